"""hosl 예외 계층"""

from __future__ import annotations


class HoslError(Exception):
    """hosl 공통 예외"""


class ParseError(HoslError):
    def __init__(self, position: tuple[int, int], expected: str, found: str = ''):
        self.position = position
        self.expected = expected
        self.found = found
        line, column = position
        detail = f', found {found!r}' if found else ''
        super().__init__(f'{line}:{column}: expected {expected}{detail}')


class ContractivenessError(HoslError):
    def __init__(self, relvar: str, path: tuple[str, ...]):
        self.relvar = relvar
        self.path = path
        where = '/'.join(path) or '<body>'
        super().__init__(f'{relvar} occurs non-contractively at {where}')


class ArityError(HoslError):
    def __init__(self, relvar: str, expected: int, got: int):
        self.relvar = relvar
        self.expected = expected
        self.got = got
        super().__init__(f'{relvar} expects {expected} argument(s), got {got}')


class UnboundVariable(HoslError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f'unbound variable {name}')


class TypeFault(HoslError):
    def __init__(self, op: str, value: object):
        self.op = op
        self.value = value
        super().__init__(f'operator {op} applied to code value')


class UniverseOverflow(HoslError):
    """테스트 유니버스로 표현할 수 없는 값"""


class ConfigError(HoslError):
    def __init__(self, key: str, detail: str):
        self.key = key
        self.detail = detail
        super().__init__(f'config key {key!r}: {detail}')


class ScriptError(HoslError):
    """증명 스크립트 구조 오류"""


class ProofError(HoslError):
    """규칙 적용 실패"""


class UnknownRule(ProofError):
    def __init__(self, name: str, citation: str | None = None):
        self.name = name
        self.citation = citation
        message = f'unknown rule {name}'
        if citation:
            message += f': {citation}'
        super().__init__(message)


class SideConditionViolation(ProofError):
    def __init__(self, rule: str, condition: str):
        self.rule = rule
        self.condition = condition
        super().__init__(f'{rule}: side condition violated: {condition}')


class SchemaMismatch(ProofError):
    def __init__(self, rule: str, detail: str):
        self.rule = rule
        self.detail = detail
        super().__init__(f'{rule}: {detail}')


class ExpansionError(ProofError):
    """파생 규칙 전개 중 내부 단계 실패"""

    def __init__(self, rule: str, cause: ProofError):
        self.rule = rule
        self.cause = cause
        super().__init__(f'{rule} expansion failed: {cause}')
