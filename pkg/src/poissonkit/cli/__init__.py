"""Command-line front end and bundled problem corpus."""

from pathlib import Path

CORPUS = Path(__file__).resolve().parent / "corpus"


def corpus_path(name):
    """Path of a bundled problem file, e.g. ``corpus_path("sphere")``."""
    p = CORPUS / f"{name}.yaml"
    if not p.exists():
        raise FileNotFoundError(f"no bundled problem named {name!r}")
    return p
