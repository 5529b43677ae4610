"""Contextual word embedding extraction to the EMB1 interchange format."""

__version__ = "0.1.0"

from .extract import ExtractError, ExtractorConfig, extract, self_test
