"""Text formats for words and sign patterns.

Word grammar (letters separated by whitespace, read cyclically)::

    word   := letter (' '+ letter)*
    letter := label exp? ':' perm exp?      # at most one exp per letter
    label  := [A-Za-z_][A-Za-z0-9_]*
    perm   := 'I' | 'T' | 'G(' theta ',' b ',' d ')'
    theta  := '1' | '+1' | '-1'
    exp    := "'"                           # conjugate transpose

``I`` and ``T`` take their size from the word's ``N``; ``G(theta,b,d)``
must satisfy ``b*d == N``. ``A:G(1,2,4)'`` and ``A':G(1,2,4)`` are the same
letter.

Pattern grammar: either a string of ``1`` and ``*`` (one unlabeled
variable), a run of single-character labels each optionally followed by
``*`` or ``'`` (``uu*uu*``), or whitespace/comma separated tokens of the same
shape for multi-character labels.
"""

from __future__ import annotations

import re

from .errors import ContractError, DomainError, ParseError
from .moments import Letter, Word
from .perms import FullTranspose, Identity, PartialTranspose

__all__ = ["parse_word", "parse_letter", "parse_perm", "parse_pattern", "format_pattern"]

_LABEL = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_G = re.compile(r"G\(\s*([+-]?\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\)")


def parse_perm(text: str, N: int, offset: int = 0, full: str | None = None):
    full = text if full is None else full
    if text == "I":
        return Identity(N)
    if text == "T":
        return FullTranspose(N)
    m = _G.fullmatch(text)
    if not m:
        raise ParseError("expected I, T or G(theta,b,d)", full, offset)
    theta, b, d = (int(g) for g in m.groups())
    if theta not in (1, -1):
        raise ParseError("theta must be 1 or -1", full, offset + m.start(1))
    if b < 1 or d < 1:
        raise ParseError("block sizes must be positive", full, offset + m.start(2 if b < 1 else 3))
    if b * d != N:
        raise ParseError(f"b*d = {b * d} does not match N = {N}", full, offset)
    return PartialTranspose.of(theta, b, d)


def parse_letter(text: str, N: int, offset: int = 0, full: str | None = None) -> Letter:
    full = text if full is None else full
    m = _LABEL.match(text)
    if not m:
        raise ParseError("expected a label", full, offset)
    label = m.group()
    pos = m.end()
    stars = 0
    if text[pos:pos + 1] == "'":
        stars += 1
        pos += 1
    if text[pos:pos + 1] != ":":
        raise ParseError("expected ':' after the label", full, offset + pos)
    pos += 1
    body = text[pos:]
    if body.endswith("'"):
        stars += 1
        body = body[:-1]
    if stars > 1:
        raise ParseError("at most one conjugation mark per letter", full, offset + len(text) - 1)
    perm = parse_perm(body, N, offset + pos, full)
    return Letter(label, perm, "*" if stars else "1")


def parse_word(text: str, N: int) -> Word:
    """Parse the word grammar into a :class:`Word` of size ``N``."""
    if not isinstance(N, int) or N < 1:
        raise DomainError(f"N must be a positive integer, got {N!r}")
    letters = []
    for m in re.finditer(r"\S+", text):
        letters.append(parse_letter(m.group(), N, m.start(), text))
    if not letters:
        raise ParseError("empty word", text, 0)
    return Word(tuple(letters), N)


def parse_pattern(text: str) -> list[tuple[str, str]]:
    """Parse a sign pattern into ``[(label, '1' | '*'), ...]``."""
    s = text.strip()
    if not s:
        raise ParseError("empty pattern", text, 0)
    if set(s) <= {"1", "*"}:
        return [("u", c) for c in s]
    out = []
    if re.search(r"[\s,]", s):
        for m in re.finditer(r"[^\s,]+", text):
            tok = m.group()
            lm = _LABEL.match(tok)
            if not lm or tok[lm.end():] not in ("", "*", "'"):
                raise ParseError("expected label followed by optional * or '", text, m.start())
            out.append((lm.group(), "1" if lm.end() == len(tok) else "*"))
        return out
    k = 0
    while k < len(text):
        c = text[k]
        if c.isspace():
            k += 1
            continue
        if not (c.isalpha() or c == "_"):
            raise ParseError("expected a label character", text, k)
        e = "1"
        if text[k + 1:k + 2] in ("*", "'"):
            e = "*"
        out.append((c, e))
        k += 2 if e == "*" else 1
    return out


def format_pattern(pattern) -> str:
    return "".join(lab + ("*" if e == "*" else "") for lab, e in pattern)


def check_balanced(word: Word):
    if not word.balanced():
        raise ContractError(f"word {word} has unequal numbers of plain and conjugated letters per label")
