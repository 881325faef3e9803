import re
from typing import NamedTuple

from .errors import ParseError


class Token(NamedTuple):
    kind: str  # 'num', 'name', 'op', 'end'
    text: str
    pos: int


_TOKEN_RE = re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:  # only trailing whitespace left
            break
        num, name, op = m.groups()
        start = m.start(m.lastindex)
        if num is not None:
            tokens.append(Token("num", num, start))
        elif name is not None:
            tokens.append(Token("name", name, start))
        else:
            if op not in "+-*/^(),":
                raise ParseError(f"unexpected character {op!r}", start)
            tokens.append(Token("op", op, start))
        pos = m.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class TokenStream:
    def __init__(self, text):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def peek(self) -> Token:
        return self.tokens[self.i]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def accept(self, text):
        if self.peek.text == text and self.peek.kind != "end":
            self.i += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            tok = self.peek
            raise ParseError(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok.pos)

    def error(self, message):
        raise ParseError(message, self.peek.pos)
