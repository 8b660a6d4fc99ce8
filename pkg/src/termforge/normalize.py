"""Unicode normalization shared by glossary keys, matching, and vote counting."""

import unicodedata


def nfc_collapse(text: str) -> str:
    """NFC-normalize and collapse all internal whitespace to single spaces."""
    return " ".join(unicodedata.normalize("NFC", text).split())


def vote_key(text: str) -> str:
    """Equality key for counting identical candidates: NFC + trim + casefold."""
    return nfc_collapse(text).casefold()


def normalize_language(code: str) -> str:
    """Lowercase a BCP-47-style code; the set of codes is open."""
    return code.strip().lower()
