from __future__ import annotations

import bisect
import re
from dataclasses import dataclass, field
from typing import List, Tuple

from ..errors import Diagnostic, LexError

KEYWORDS = {
    "int", "float", "double", "void", "if", "else", "for", "while", "do",
    "return", "break", "continue", "switch", "case", "default",
}

# longest first so that "<=" wins over "<"
PUNCT = [
    "<<=", ">>=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
    "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||",
    "+", "-", "*", "/", "%", "<", ">", "=", "!", "~", "&", "|", "^",
    "(", ")", "{", "}", "[", "]", ";", ",", ":",
]

_NUMBER = re.compile(r"(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@dataclass(frozen=True)
class Token:
    kind: str  # ident, keyword, int, float, punct, pragma, eof
    text: str
    offset: int


@dataclass
class SourceProgram:
    """Source text plus an offset -> (line, column) index."""

    text: str
    path: str = "<string>"
    _line_starts: List[int] = field(default_factory=list, repr=False)

    def __post_init__(self):
        self._line_starts = [0] + [m.end() for m in re.finditer("\n", self.text)]

    @classmethod
    def from_file(cls, path) -> "SourceProgram":
        with open(path, encoding="utf-8") as fh:
            return cls(fh.read(), str(path))

    def position(self, offset: int) -> Tuple[int, int]:
        """1-based (line, column) of ``offset``."""
        line = bisect.bisect_right(self._line_starts, offset) - 1
        return line + 1, offset - self._line_starts[line] + 1

    def diag(self, offset: int, message: str) -> Diagnostic:
        line, col = self.position(offset)
        return Diagnostic(self.path, line, col, message)


def tokenize(src: SourceProgram) -> List[Token]:
    text = src.text
    n = len(text)
    pos = 0
    out: List[Token] = []
    while pos < n:
        ch = text[pos]
        if ch in " \t\r\n\f\v":
            pos += 1
            continue
        if text.startswith("//", pos):
            nl = text.find("\n", pos)
            pos = n if nl < 0 else nl
            continue
        if text.startswith("/*", pos):
            close = text.find("*/", pos + 2)
            if close < 0:
                raise LexError([src.diag(pos, "unterminated comment")])
            pos = close + 2
            continue
        if ch == "#":
            m = _IDENT.match(text, pos + 1)
            word = m.group(0) if m else ""
            if word != "pragma":
                raise LexError([src.diag(pos, f"preprocessor directive '#{word}' is not supported")])
            out.append(Token("pragma", "#pragma", pos))
            pos = m.end()
            continue
        if ch.isdigit() or (ch == "." and pos + 1 < n and text[pos + 1].isdigit()):
            m = _NUMBER.match(text, pos)
            lit = m.group(0)
            if m.end() < n and (text[m.end()].isalnum() or text[m.end()] == "_"):
                raise LexError([src.diag(pos, f"malformed number '{lit}{text[m.end()]}'")])
            kind = "float" if ("." in lit or "e" in lit or "E" in lit) else "int"
            out.append(Token(kind, lit, pos))
            pos = m.end()
            continue
        m = _IDENT.match(text, pos)
        if m:
            word = m.group(0)
            out.append(Token("keyword" if word in KEYWORDS else "ident", word, pos))
            pos = m.end()
            continue
        for p in PUNCT:
            if text.startswith(p, pos):
                out.append(Token("punct", p, pos))
                pos += len(p)
                break
        else:
            raise LexError([src.diag(pos, f"unexpected character {ch!r}")])
    out.append(Token("eof", "", n))
    return out
