import json

import pytest
import torch
from transformers import BertConfig, BertModel, BertTokenizer

VOCAB = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "the", "cat", "sat", "on", "a", "mat", "hello", "wor", "##ld",
    "one", "two", "three", "was", "sit", "##ting", "plan", "##et",
]


@pytest.fixture(scope="session")
def tiny_model(tmp_path_factory):
    """A randomly initialized two-layer model saved locally (no network)."""
    path = tmp_path_factory.mktemp("tinybert")
    (path / "vocab.txt").write_text("\n".join(VOCAB) + "\n")
    config = BertConfig(
        vocab_size=len(VOCAB), hidden_size=16, num_hidden_layers=2,
        num_attention_heads=2, intermediate_size=32, max_position_embeddings=64,
    )
    torch.manual_seed(0)
    BertModel(config).save_pretrained(path)
    BertTokenizer(str(path / "vocab.txt")).save_pretrained(path)
    return str(path)


def write_corpus(path, pairs):
    with open(path, "w", encoding="utf-8") as fh:
        for pid, source, target in pairs:
            fh.write(json.dumps({"id": pid, "source": source, "target": target,
                                 "sure": [], "possible": []}))
            fh.write("\n")
    return path
