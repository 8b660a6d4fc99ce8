"""Static side-by-side HTML report for direct vs refined translations.

The output is a single self-contained XHTML page (inline CSS, no external
resources, no timestamps) with one row per segment: source, direct
translation, refined translation. Substituted terminology in the refined
column is wrapped in <mark> elements. Identical inputs produce
byte-identical pages.
"""

from __future__ import annotations

from html import escape
from typing import Sequence

from .errors import LengthMismatchError

_STYLE = """
body { font-family: sans-serif; margin: 1.5em; }
table { border-collapse: collapse; width: 100%; }
th, td { border: 1px solid #999; padding: 0.4em 0.6em; vertical-align: top; }
th { background: #eee; }
mark.term { background: #ffe97a; padding: 0 0.1em; }
caption { text-align: left; font-weight: bold; padding-bottom: 0.5em; }
""".strip()


def _mark_spans(text: str, spans: Sequence[tuple[int, int]]) -> str:
    """Escape text and wrap the given character ranges in <mark> elements."""
    ordered = sorted((int(s), int(e)) for s, e in spans)
    pos = 0
    parts: list[str] = []
    for start, end in ordered:
        if not (0 <= start < end <= len(text)) or start < pos:
            raise ValueError(f"highlight span ({start}, {end}) invalid for text of length {len(text)}")
        parts.append(escape(text[pos:start]))
        parts.append(f'<mark class="term">{escape(text[start:end])}</mark>')
        pos = end
    parts.append(escape(text[pos:]))
    return "".join(parts)


def emit_report(
    src: Sequence[str],
    direct: Sequence[str],
    refined: Sequence[str],
    highlights: Sequence[Sequence[tuple[int, int]]] | None = None,
) -> str:
    """Render the three parallel segment lists as a static HTML page.

    ``highlights`` gives, per segment, character spans into the refined string
    to wrap in highlight markup (typically the substituted terminology).
    """
    if not (len(src) == len(direct) == len(refined)):
        raise LengthMismatchError(
            f"segment lists differ: {len(src)}, {len(direct)}, {len(refined)}"
        )
    if highlights is None:
        highlights = [[] for _ in src]
    if len(highlights) != len(src):
        raise LengthMismatchError(
            f"{len(highlights)} highlight lists for {len(src)} segments"
        )

    rows: list[str] = []
    for i, (s, d, r) in enumerate(zip(src, direct, refined)):
        rows.append(
            "<tr>"
            f'<td class="n">{i + 1}</td>'
            f'<td class="source">{escape(s)}</td>'
            f'<td class="direct">{escape(d)}</td>'
            f'<td class="refined">{_mark_spans(r, highlights[i])}</td>'
            "</tr>"
        )
    body_rows = "\n".join(rows)
    return (
        "<!DOCTYPE html>\n"
        '<html xmlns="http://www.w3.org/1999/xhtml" lang="en">\n'
        "<head>\n"
        '<meta charset="utf-8"/>\n'
        "<title>Terminology-refined translations</title>\n"
        f"<style>\n{_STYLE}\n</style>\n"
        "</head>\n"
        "<body>\n"
        "<table>\n"
        "<caption>Terminology-refined translations (highlighted terms were updated)</caption>\n"
        "<thead><tr><th>#</th><th>Source</th><th>Direct translation</th>"
        "<th>Refined translation</th></tr></thead>\n"
        "<tbody>\n"
        f"{body_rows}\n"
        "</tbody>\n"
        "</table>\n"
        "</body>\n"
        "</html>\n"
    )
