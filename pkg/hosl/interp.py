"""명령 해석기: 힙, 태그가 붙은 코드 값, 사영 π_n, 연료 제한 실행"""

from __future__ import annotations

import logging
import math
import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

from hosl.errors import ParseError, TypeFault, UnboundVariable
from hosl.syntax import (
    Assign,
    BinOp,
    Command,
    EvalAt,
    Expr,
    Free,
    If,
    IntLit,
    LetDeref,
    LetNew,
    Quote,
    Seq,
    Skip,
    Var,
    fv,
    parse,
    pretty,
    substitute,
)

logger = logging.getLogger(__name__)

INF = math.inf
DEFAULT_FUEL = 10000

Tag = int | float  # 유한 태그 또는 INF


# ---------------------------------------------------------------- values


@dataclass(frozen=True)
class IntVal:
    n: int


@dataclass(frozen=True)
class CodeVal:
    body: Command
    captured: Env
    tag: Tag = INF


Value = IntVal | CodeVal


@dataclass(frozen=True)
class Env:
    bindings: tuple[tuple[str, Value], ...] = ()

    @classmethod
    def of(cls, mapping: Mapping[str, Value] | None = None) -> Env:
        return cls(tuple(sorted((mapping or {}).items())))

    def as_dict(self) -> dict[str, Value]:
        return dict(self.bindings)

    def lookup(self, name: str) -> Value:
        for key, value in self.bindings:
            if key == name:
                return value
        raise UnboundVariable(name)

    def extend(self, name: str, value: Value) -> Env:
        mapping = self.as_dict()
        mapping[name] = value
        return Env.of(mapping)

    def restrict(self, names: Iterable[str]) -> Env:
        keep = set(names)
        return Env(tuple((k, v) for k, v in self.bindings if k in keep))

    def names(self) -> frozenset[str]:
        return frozenset(key for key, _ in self.bindings)


# ---------------------------------------------------------------- heaps


@dataclass(frozen=True)
class Bot:
    def __repr__(self) -> str:
        return 'BOT'


BOT = Bot()


@dataclass(frozen=True)
class HeapMap:
    cells: tuple[tuple[int, Value], ...] = ()

    @classmethod
    def of(cls, mapping: Mapping[int, Value] | None = None) -> HeapMap:
        return cls(tuple(sorted((mapping or {}).items())))

    def as_dict(self) -> dict[int, Value]:
        return dict(self.cells)

    @property
    def domain(self) -> frozenset[int]:
        return frozenset(addr for addr, _ in self.cells)

    def get(self, addr: int) -> Value | None:
        for key, value in self.cells:
            if key == addr:
                return value
        return None

    def set(self, addr: int, value: Value) -> HeapMap:
        mapping = self.as_dict()
        mapping[addr] = value
        return HeapMap.of(mapping)

    def remove(self, addr: int) -> HeapMap:
        return HeapMap(tuple(cell for cell in self.cells if cell[0] != addr))

    def __len__(self) -> int:
        return len(self.cells)


Heap = Bot | HeapMap
EMPTY = HeapMap()


# ---------------------------------------------------------------- outcomes


@dataclass(frozen=True)
class Done:
    heap: Heap


@dataclass(frozen=True)
class Fault:
    reason: str = 'fault'


@dataclass(frozen=True)
class OutOfFuel:
    pass


Outcome = Done | Fault | OutOfFuel


# ---------------------------------------------------------------- projections


def truncate_value(n: Tag, value: Value) -> Value:
    if isinstance(value, CodeVal) and n - 1 < value.tag:
        return CodeVal(value.body, value.captured, n - 1)
    return value


def truncate(n: Tag, h: Heap) -> Heap:
    """π_n"""
    if n == 0 or isinstance(h, Bot):
        return BOT
    if n == INF:
        return h
    return HeapMap(tuple((addr, truncate_value(n, v)) for addr, v in h.cells))


def rank(h: Heap) -> Tag:
    if isinstance(h, Bot):
        return 0
    tags = [v.tag for _, v in h.cells if isinstance(v, CodeVal)]
    if any(tag == INF for tag in tags):
        return INF
    return max([1, *(tag + 1 for tag in tags)])


def heap_join(h1: Heap, h2: Heap) -> Heap:
    if isinstance(h1, Bot) or isinstance(h2, Bot):
        return BOT
    if h1.domain & h2.domain:
        return BOT
    return HeapMap(tuple(sorted(h1.cells + h2.cells)))


def value_leq(v1: Value, v2: Value) -> bool:
    match v1, v2:
        case IntVal(a), IntVal(b):
            return a == b
        case CodeVal(body1, env1, tag1), CodeVal(body2, env2, tag2):
            if body1 != body2 or tag1 > tag2 or env1.names() != env2.names():
                return False
            other = env2.as_dict()
            return all(value_leq(v, other[k]) for k, v in env1.bindings)
    return False


def heap_leq(h1: Heap, h2: Heap) -> bool:
    """코드 근사 순서 ⊑ (구문적 하한)"""
    if isinstance(h1, Bot):
        return True
    if isinstance(h2, Bot):
        return False
    if h1.domain != h2.domain:
        return False
    other = h2.as_dict()
    return all(value_leq(v, other[addr]) for addr, v in h1.cells)


# ---------------------------------------------------------------- evaluation


def eval_expr(e: Expr, env: Env) -> Value:
    match e:
        case IntLit(value):
            return IntVal(value)
        case Var(name):
            return env.lookup(name)
        case BinOp(op, left, right):
            a, b = eval_expr(left, env), eval_expr(right, env)
            if not isinstance(a, IntVal):
                raise TypeFault(op, a)
            if not isinstance(b, IntVal):
                raise TypeFault(op, b)
            match op:
                case '+':
                    return IntVal(a.n + b.n)
                case '-':
                    return IntVal(a.n - b.n)
                case '*':
                    return IntVal(a.n * b.n)
            raise ValueError(f'unknown operator {op}')
        case Quote(body):
            return CodeVal(body, env.restrict(fv(body)), INF)
    raise TypeError(f'not an expression: {e!r}')


class _Exhausted(Exception):
    pass


@dataclass
class _Executor:
    fuel: int
    steps: int = field(default=0)

    def tick(self) -> None:
        if self.fuel <= 0:
            raise _Exhausted
        self.fuel -= 1
        self.steps += 1

    def address(self, e: Expr, env: Env, h: HeapMap) -> int | None:
        value = eval_expr(e, env)
        if isinstance(value, IntVal) and value.n in h.domain:
            return value.n
        return None

    def run(self, c: Command, env: Env, h: Heap) -> Outcome:
        if isinstance(h, Bot):
            return Done(BOT)
        match c:
            case Skip():
                return Done(h)
            case Assign(target, source):
                addr = self.address(target, env, h)
                if addr is None:
                    return Fault('dangling')
                return Done(h.set(addr, eval_expr(source, env)))
            case LetDeref(var, addr_expr, body):
                addr = self.address(addr_expr, env, h)
                if addr is None:
                    return Fault('dangling')
                return self.run(body, env.extend(var, h.get(addr)), h)
            case EvalAt(addr_expr):
                self.tick()
                addr = self.address(addr_expr, env, h)
                if addr is None:
                    return Fault('dangling')
                stored = h.get(addr)
                if not isinstance(stored, CodeVal):
                    return Fault('not-code')
                return self.run_code(stored, h)
            case LetNew(var, inits, body):
                values = [eval_expr(init, env) for init in inits]
                base = allocation_base(h, len(values))
                mapping = h.as_dict()
                for offset, value in enumerate(values):
                    mapping[base + offset] = value
                extended = env.extend(var, IntVal(base))
                return self.run(body, extended, HeapMap.of(mapping))
            case Free(addr_expr):
                addr = self.address(addr_expr, env, h)
                if addr is None:
                    return Fault('dangling')
                return Done(h.remove(addr))
            case Seq(first, second):
                self.tick()
                outcome = self.run(first, env, h)
                if isinstance(outcome, Done):
                    return self.run(second, env, outcome.heap)
                return outcome
            case If(lhs, rhs, then, orelse):
                a, b = eval_expr(lhs, env), eval_expr(rhs, env)
                if isinstance(a, CodeVal) or isinstance(b, CodeVal):
                    # 코드 비교는 발산
                    return OutOfFuel()
                return self.run(then if a == b else orelse, env, h)
        raise TypeError(f'not a command: {c!r}')

    def run_code(self, code: CodeVal, h: Heap) -> Outcome:
        if code.tag == 0:
            return OutOfFuel()
        outcome = self.run(code.body, code.captured, truncate(code.tag, h))
        if isinstance(outcome, Done):
            return Done(truncate(code.tag, outcome.heap))
        return outcome

    def guarded(self, thunk) -> Outcome:
        try:
            return thunk()
        except _Exhausted:
            return OutOfFuel()
        except RecursionError:
            logger.warning('evaluation nested too deeply after %d steps', self.steps)
            return OutOfFuel()
        except TypeFault:
            return Fault('type')
        except UnboundVariable:
            return Fault('unbound')


def allocation_base(h: HeapMap, size: int) -> int:
    """블록 ℓ..ℓ+size-1이 비어 있는 최소 ℓ ≥ 1"""
    domain = h.domain
    base = 1
    while any(base + offset in domain for offset in range(size)):
        base += 1
    return base


def exec_command(c: Command, env: Env, h: Heap, fuel: int = DEFAULT_FUEL) -> Outcome:
    executor = _Executor(fuel)
    outcome = executor.guarded(lambda: executor.run(c, env, h))
    logger.debug('exec %s: %s after %d steps', pretty(c), outcome, executor.steps)
    return outcome


def run_code(code: Value, h: Heap, fuel: int = DEFAULT_FUEL) -> Outcome:
    """저장된 코드를 태그대로 실행"""
    if isinstance(h, Bot):
        return Done(BOT)
    if not isinstance(code, CodeVal):
        return Fault('not-code')
    executor = _Executor(fuel)
    return executor.guarded(lambda: executor.run_code(code, h))


# ---------------------------------------------------------------- heap text


_CELL_RE = re.compile(r'^\s*(\d+)\s*=\s*(.+?)\s*$')
_TAG_RE = re.compile(r'^(.*)@\s*(\d+)$', re.DOTALL)


def parse_value(text: str) -> Value:
    """`n`, `'C'`, `'C'@t`"""
    tag: Tag = INF
    tagged = _TAG_RE.match(text.strip())
    if tagged:
        text, tag = tagged.group(1), int(tagged.group(2))
    expr = parse(text, 'expr')
    value = eval_expr(expr, Env())
    if isinstance(value, CodeVal):
        return CodeVal(value.body, value.captured, tag)
    if tag != INF:
        raise ParseError((1, 1), 'a quoted command before @', text)
    return value


def parse_heap(text: str) -> HeapMap:
    mapping: dict[int, Value] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0]
        if not line.strip():
            continue
        found = _CELL_RE.match(line)
        if found is None:
            raise ParseError((number, 1), "'addr = value'", line.strip())
        addr = int(found.group(1))
        if addr < 1 or addr in mapping:
            raise ParseError((number, 1), 'a fresh address >= 1', found.group(1))
        try:
            mapping[addr] = parse_value(found.group(2))
        except ParseError as err:
            raise ParseError((number, err.position[1]), err.expected, err.found)
    return HeapMap.of(mapping)


def value_expr(value: Value) -> Expr:
    """값을 닫힌 식으로 (캡처된 정수는 리터럴로 대입)"""
    if isinstance(value, IntVal):
        return IntLit(value.n)
    closing = {name: value_expr(v) for name, v in value.captured.bindings}
    return Quote(substitute(value.body, closing))


def show_value(value: Value) -> str:
    text = pretty(value_expr(value))
    if isinstance(value, CodeVal) and value.tag != INF:
        text += f'@{value.tag}'
    return text


def show_heap(h: Heap) -> str:
    if isinstance(h, Bot):
        return 'bot'
    return '{' + ', '.join(f'{addr}={show_value(v)}' for addr, v in h.cells) + '}'


def format_heap(h: HeapMap) -> str:
    return ''.join(f'{addr} = {show_value(v)}\n' for addr, v in h.cells)


def value_key(value: Value) -> tuple:
    """정규 열거 순서: 정수 먼저, 그다음 (출력, 태그)"""
    if isinstance(value, IntVal):
        return (0, value.n, '', 0)
    return (1, 0, pretty(value.body), value.tag)


# ---------------------------------------------------------------- uniform sets


def uniform_closure(heaps: Iterable[Heap]) -> frozenset[Heap]:
    """사영에 닫힌 최소 집합 (⊥ 포함)"""
    result: set[Heap] = {BOT}
    for h in heaps:
        top = rank(h)
        if top == INF:
            raise ValueError('uniform closure needs finite-rank heaps')
        result.update(truncate(n, h) for n in range(int(top) + 1))
    return frozenset(result)


def uadm_meet(a: frozenset[Heap], b: frozenset[Heap]) -> frozenset[Heap]:
    return a & b


def uadm_join(a: frozenset[Heap], b: frozenset[Heap]) -> frozenset[Heap]:
    return a | b


def uadm_implies(
    a: frozenset[Heap], b: frozenset[Heap], universe: Iterable[Heap]
) -> frozenset[Heap]:
    """Heyting 함의: 모든 사영에서 a이면 b"""
    result = set()
    for h in universe:
        top = rank(h)
        levels = range(int(top) + 1) if top != INF else ()
        if all(truncate(n, h) not in a or truncate(n, h) in b for n in levels):
            result.add(h)
    return frozenset(result)
