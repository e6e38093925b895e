"""토큰화"""

from __future__ import annotations

import re
from dataclasses import dataclass

from hosl.errors import ParseError

KEYWORDS = frozenset(
    {
        'skip', 'let', 'in', 'new', 'eval', 'free', 'if', 'then', 'else',
        'true', 'false', 'emp', 'forall', 'exists', 'mu',
    }
)  # fmt: skip

# 긴 기호가 먼저 와야 한다
SYMBOLS = (
    '(*)', '<=>', '|->', '|-', '=>', '<=', '<>', ':=', '/\\', '\\/',
    '(', ')', '[', ']', '{', '}', ',', ';', '.', '=', '+', '-', '*',
    "'", '/', '@',
)  # fmt: skip

_TOKEN_RE = re.compile(
    r'(?P<space>[ \t\r\n]+|#[^\n]*)'
    r'|(?P<int>\d+)'
    r'|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)'
    r'|(?P<symbol>' + '|'.join(re.escape(symbol) for symbol in SYMBOLS) + ')'
)


@dataclass(frozen=True)
class Token:
    kind: str  # 'INT', 'ID', 'EOF', 또는 키워드/기호 자체
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    position = 0
    line, line_start = 1, 0
    while position < len(text):
        found = _TOKEN_RE.match(text, position)
        column = position - line_start + 1
        if found is None:
            raise ParseError((line, column), 'a token', text[position])
        lexeme = found.group()
        match found.lastgroup:
            case 'int':
                tokens.append(Token('INT', lexeme, line, column))
            case 'ident':
                kind = lexeme if lexeme in KEYWORDS or lexeme == '_' else 'ID'
                tokens.append(Token(kind, lexeme, line, column))
            case 'symbol':
                tokens.append(Token(lexeme, lexeme, line, column))
        newlines = lexeme.count('\n')
        if newlines:
            line += newlines
            line_start = position + lexeme.rfind('\n') + 1
        position = found.end()
    tokens.append(Token('EOF', '', line, position - line_start + 1))
    return tokens
