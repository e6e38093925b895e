"""S-식 증명 스크립트 읽기"""

from __future__ import annotations

import logging
import re
from pathlib import Path

import lark as L

from hosl.errors import ScriptError
from hosl.logic.rules import ProofNode
from hosl.syntax import parse_judgement

logger = logging.getLogger(__name__)

GRAMMAR = r'''
start: sexpr*
?sexpr: list | STRING | SYMBOL
list: "(" sexpr* ")"
STRING: /"(\\.|[^"\\])*"/
SYMBOL: /[^\s()";]+/
COMMENT: /;[^\n]*/
%import common.WS
%ignore WS
%ignore COMMENT
'''

_REFERENCE = re.compile(r'\$([A-Za-z_][A-Za-z0-9_]*)')


class Symbol(str):
    pass


class _ToPython(L.Transformer):
    def start(self, items):
        return list(items)

    def list(self, items):
        return list(items)

    def STRING(self, token):
        return re.sub(r'\\(.)', r'\1', str(token)[1:-1])

    def SYMBOL(self, token):
        return Symbol(token)


_PARSER = L.Lark(GRAMMAR, start='start', parser='lalr')


def read_sexprs(text: str) -> list:
    try:
        tree = _PARSER.parse(text)
    except L.exceptions.UnexpectedInput as err:
        raise ScriptError(
            f'malformed script at line {err.line}, column {err.column}'
        ) from err
    return _ToPython().transform(tree)


def load_script(text: str) -> list[ProofNode]:
    """스크립트의 모든 최상위 (rule ...) 증명"""
    defines: dict[str, str] = {}
    roots = []
    for form in read_sexprs(text):
        head = _head(form)
        if head == 'define':
            if len(form) != 3 or not isinstance(form[1], Symbol):
                raise ScriptError('define takes a name and a string')
            defines[str(form[1])] = _expand(_text(form[2]), defines)
        elif head == 'rule':
            roots.append(_rule(form, defines))
        else:
            raise ScriptError(f'unexpected top-level form {head!r}')
    if not roots:
        raise ScriptError('script contains no (rule ...) form')
    logger.info('loaded %d proof(s)', len(roots))
    return roots


def load_script_file(path: str | Path) -> list[ProofNode]:
    return load_script(Path(path).read_text(encoding='utf-8'))


def _head(form) -> str:
    if not isinstance(form, list) or not form or not isinstance(form[0], Symbol):
        raise ScriptError(f'expected a form, got {form!r}')
    return str(form[0])


def _text(value) -> str:
    if isinstance(value, list):
        raise ScriptError('expected a string or symbol, got a list')
    return str(value)


def _expand(text: str, defines: dict[str, str]) -> str:
    def lookup(match: re.Match) -> str:
        name = match.group(1)
        if name not in defines:
            raise ScriptError(f'undefined abbreviation ${name}')
        return defines[name]

    return _REFERENCE.sub(lookup, text)


def _rule(form: list, defines: dict[str, str]) -> ProofNode:
    if len(form) < 2 or not isinstance(form[1], Symbol):
        raise ScriptError('rule needs a name')
    name = str(form[1])
    params: dict[str, str] = {}
    premises: list[ProofNode] = []
    conclusion = None
    for item in form[2:]:
        match _head(item):
            case 'param':
                if len(item) != 3:
                    raise ScriptError(f'{name}: param takes a key and a value')
                params[_text(item[1])] = _expand(_text(item[2]), defines)
            case 'premise':
                premises.extend(_rule(child, defines) for child in item[1:])
            case 'rule':
                premises.append(_rule(item, defines))
            case 'conclude':
                if len(item) != 2:
                    raise ScriptError(f'{name}: conclude takes one judgement')
                conclusion = parse_judgement(_expand(_text(item[1]), defines))
            case other:
                raise ScriptError(f'{name}: unexpected clause {other!r}')
    return ProofNode(name, params, tuple(premises), conclusion)
