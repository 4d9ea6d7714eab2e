"""Lexer for MiniCC source text."""

from __future__ import annotations

from dataclasses import dataclass


KEYWORDS = {
    "int", "char", "void", "struct", "unchecked",
    "if", "else", "while", "return",
    "mm_ptr", "mm_array_ptr",
    "mm_alloc", "mm_free", "mm_checked", "mm_array_checked",
    "marshal", "unmarshal",
}

# longest-match first
PUNCTS = [
    "==", "!=", "<=", ">=", "->",
    "{", "}", "(", ")", "[", "]", "<", ">",
    ";", ",", ".", "*", "&", "+", "-", "/", "%", "=", "!",
]


@dataclass(frozen=True)
class Span:
    line: int
    col: int
    offset: int

    def __str__(self):
        return f"{self.line}:{self.col}"


@dataclass(frozen=True)
class Token:
    kind: str  # 'kw' | 'ident' | 'int' | 'char' | 'str' | 'punct' | 'eof'
    lexeme: str
    span: Span


class LexError(Exception):
    def __init__(self, msg: str, span: Span):
        super().__init__(f"{span}: {msg}")
        self.msg = msg
        self.span = span


def tokenize(src: str) -> list[Token]:
    toks: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(src)

    def span():
        return Span(line, col, i)

    def advance(k: int):
        nonlocal i, line, col
        for _ in range(k):
            if src[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        c = src[i]
        if c in " \t\r\n":
            advance(1)
            continue
        if src.startswith("//", i):
            j = src.find("\n", i)
            advance((j if j != -1 else n) - i)
            continue
        if src.startswith("/*", i):
            j = src.find("*/", i + 2)
            if j == -1:
                raise LexError("unterminated block comment", span())
            advance(j + 2 - i)
            continue
        if c.isdigit():
            sp = span()
            j = i
            while j < n and src[j].isdigit():
                j += 1
            toks.append(Token("int", src[i:j], sp))
            advance(j - i)
            continue
        if c.isalpha() or c == "_":
            sp = span()
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            word = src[i:j]
            toks.append(Token("kw" if word in KEYWORDS else "ident", word, sp))
            advance(j - i)
            continue
        if c == '"':
            sp = span()
            j = i + 1
            while j < n and src[j] != '"':
                if src[j] == "\\":
                    j += 1
                j += 1
            if j >= n:
                raise LexError("unterminated string literal", sp)
            toks.append(Token("str", src[i : j + 1], sp))
            advance(j + 1 - i)
            continue
        if c == "'":
            sp = span()
            j = i + 1
            while j < n and src[j] != "'":
                if src[j] == "\\":
                    j += 1
                j += 1
            if j >= n:
                raise LexError("unterminated char literal", sp)
            toks.append(Token("char", src[i : j + 1], sp))
            advance(j + 1 - i)
            continue
        for p in PUNCTS:
            if src.startswith(p, i):
                toks.append(Token("punct", p, span()))
                advance(len(p))
                break
        else:
            raise LexError(f"invalid character {c!r}", span())

    toks.append(Token("eof", "", span()))
    return toks


def unescape(quoted: str) -> str:
    """Decode the body of a quoted string/char literal."""
    body = quoted[1:-1]
    out = []
    i = 0
    while i < len(body):
        c = body[i]
        if c == "\\" and i + 1 < len(body):
            e = body[i + 1]
            out.append({"n": "\n", "t": "\t", "0": "\0", "\\": "\\", '"': '"', "'": "'"}.get(e, e))
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def escape(text: str) -> str:
    out = []
    for c in text:
        if c == "\n":
            out.append("\\n")
        elif c == "\t":
            out.append("\\t")
        elif c == "\0":
            out.append("\\0")
        elif c in ('"', "\\"):
            out.append("\\" + c)
        else:
            out.append(c)
    return "".join(out)
