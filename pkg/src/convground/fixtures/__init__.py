"""Shipped fixture files: sample dialogues, gold annotations, predictions,
the matching replay cache, and the normative prompt bytes."""

from pathlib import Path

_DIR = Path(__file__).parent

DIALOGUES = "sample_dialogues.jsonl"
GOLD = "sample_gold.jsonl"
PREDICTIONS = "sample_predictions.jsonl"
REPLAY_CACHE = "sample_replay_cache.jsonl"
CLASSIFICATION_PROMPT = "prompt_classification.json"
EXTRACTION_PROMPT = "prompt_extraction.json"


def path(name: str) -> Path:
    """Absolute path of a shipped fixture file."""
    fixture = _DIR / name
    if not fixture.exists():
        raise FileNotFoundError(f"no fixture named {name!r}")
    return fixture
