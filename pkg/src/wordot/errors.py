"""Exception types shared across the toolkit."""


class DataError(Exception):
    """An input file or corpus violates a format or consistency contract."""


class NumericalError(Exception):
    """A solver produced non-finite intermediates or an LP failed."""
