"""유한 근사 의미 모델: 단언 소속과 의미적 삼중항 ⊨_k"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Iterator, Mapping
from dataclasses import dataclass

from hosl.errors import TypeFault, UnboundVariable, UniverseOverflow
from hosl.interp import (
    EMPTY,
    INF,
    Bot,
    CodeVal,
    Done,
    Env,
    Fault,
    Heap,
    HeapMap,
    IntVal,
    OutOfFuel,
    Value,
    eval_expr,
    heap_leq,
    rank,
    run_code,
    show_heap,
    truncate,
    value_key,
)
from hosl.semantics.config import TestConfig
from hosl.semantics.verdict import Fail, Pass, Verdict, Witness
from hosl.semantics.worlds import EMP_WORLD, World, close, world_circ
from hosl.syntax import (
    And,
    Assertion,
    Diamond,
    Emp,
    Eq,
    Exists,
    Expr,
    FalseAsn,
    Forall,
    Implies,
    Leq,
    Mu,
    Or,
    PointsTo,
    RelDef,
    RelVar,
    Star,
    Tensor,
    TrueAsn,
    Triple,
    substitute,
    unfold_mu,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class _LevelResult:
    witness: Witness | None
    samples: int
    inconclusive: int


class Model:
    """TestConfig 하나에 대한 소속 판정기 (결과는 메모이즈)"""

    def __init__(self, cfg: TestConfig):
        self.cfg = cfg
        self._members: dict[tuple, bool] = {}
        self._active: set[tuple] = set()
        self._cycle_hits = 0
        self._levels: dict[tuple, _LevelResult] = {}
        self._universes: dict[int, tuple[HeapMap, ...]] = {}

    # -------------------------------------------------------------- universe

    def universe(self, max_tag: int) -> tuple[HeapMap, ...]:
        """크기, 주소, 값 순으로 정렬된 유한 힙들"""
        max_tag = min(max_tag, self.cfg.tag_max)
        if max_tag not in self._universes:
            values = self.cfg.heap_values(max_tag)
            addrs = sorted(set(self.cfg.addr_pool))
            heaps = []
            for size in range(len(addrs) + 1):
                for domain in itertools.combinations(addrs, size):
                    for chosen in itertools.product(values, repeat=size):
                        heaps.append(HeapMap(tuple(zip(domain, chosen))))
            self._universes[max_tag] = tuple(heaps)
            logger.debug('universe at tag %d: %d heaps', max_tag, len(heaps))
        return self._universes[max_tag]

    def levels(self, h: Heap) -> list[Heap]:
        top = rank(h)
        if top == INF:
            finite = [truncate(n, h) for n in range(1, self.cfg.tag_max + 2)]
            return [*finite, h]
        return [truncate(n, h) for n in range(1, int(top) + 1)]

    def domain(self, h: Heap) -> list[Value]:
        """양화사 범위: 설정 풀과 힙에 나타난 주소, 값"""
        values = set(self.cfg.quantifier_pool)
        if isinstance(h, HeapMap):
            for addr, value in h.cells:
                values.add(IntVal(addr))
                values.add(value)
        return sorted(values, key=value_key)

    # -------------------------------------------------------------- membership

    def member(self, p: Assertion, env: Env, w: World, h: Heap) -> bool:
        if isinstance(h, Bot):
            return True
        key = (p, env, w, h)
        cached = self._members.get(key)
        if cached is not None:
            return cached
        if key in self._active:
            logger.debug('cyclic membership query treated as false')
            self._cycle_hits += 1
            return False
        hits = self._cycle_hits
        self._active.add(key)
        try:
            result = self._member(p, env, w, h)
        finally:
            self._active.discard(key)
        # 순환 가정에 기댄 결과는 저장하지 않는다
        if self._cycle_hits == hits:
            self._members[key] = result
        return result

    @staticmethod
    def _value(e: Expr, env: Env) -> Value | None:
        try:
            return eval_expr(e, env)
        except (TypeFault, UnboundVariable):
            return None

    def _member(self, p: Assertion, env: Env, w: World, h: HeapMap) -> bool:
        match p:
            case FalseAsn():
                return False
            case TrueAsn():
                return True
            case Emp():
                return len(h) == 0
            case Eq(left, right):
                a, b = self._value(left, env), self._value(right, env)
                return a is not None and a == b
            case Leq(left, right):
                a, b = self._value(left, env), self._value(right, env)
                return isinstance(a, IntVal) and isinstance(b, IntVal) and a.n <= b.n
            case PointsTo(addr, value):
                a, v = self._value(addr, env), self._value(value, env)
                if not isinstance(a, IntVal) or a.n < 1 or v is None:
                    return False
                return heap_leq(h, HeapMap(((a.n, v),)))
            case And(left, right):
                return self.member(left, env, w, h) and self.member(right, env, w, h)
            case Or(left, right):
                return self.member(left, env, w, h) or self.member(right, env, w, h)
            case Implies(left, right):
                return all(
                    not self.member(left, env, w, g) or self.member(right, env, w, g)
                    for g in self.levels(h)
                )
            case Forall(var, body):
                return all(
                    self.member(body, env.extend(var, d), w, h) for d in self.domain(h)
                )
            case Exists(var, body):
                # 균일성에 의해 h 자신에서의 증인이면 모든 사영에서 충분하다
                return any(
                    self.member(body, env.extend(var, d), w, h) for d in self.domain(h)
                )
            case Star(left, right):
                return any(
                    self.member(left, env, w, h1) and self.member(right, env, w, h2)
                    for h1, h2 in splits(h)
                )
            case Triple(pre, code, post):
                top = rank(h)
                k = self.cfg.level_k if top == INF else int(top) - 1
                value = self._value(code, env)
                return self.triple_holds(k, w, pre, value, post, env)
            case Tensor(left, right):
                return self.member(left, env, world_circ(close(right, env), w), h)
            case RelVar():
                return False
            case Mu():
                return self.member(unfold_mu(p), env, w, h)
            case Diamond(body):
                return self._diamond(body, env, w, h)
        raise TypeError(f'not an assertion: {p!r}')

    def _diamond(self, body: Assertion, env: Env, w: World, h: HeapMap) -> bool:
        top = rank(h)
        if top == INF:
            return self.member(body, env, w, h)
        k = int(top)
        for candidate in raised_predecessors(h, k):
            if self.member(body, env, w, candidate):
                return True
        return False

    # -------------------------------------------------------------- triples

    def in_triple_set(
        self, p: Assertion, env: Env, w: World, frame: Assertion, h: Heap
    ) -> bool:
        """h ∈ P(w) ∗ ι⁻¹(w)(emp) ∗ r"""
        if isinstance(h, Bot):
            return True
        if w.inv == Emp():
            return any(
                self.member(p, env, w, h1) and self.member(frame, Env(), EMP_WORLD, h3)
                for h1, h3 in splits(h)
            )
        for h1, h2, h3 in splits3(h):
            if (
                self.member(p, env, w, h1)
                and self.member(w.inv, w.env, EMP_WORLD, h2)
                and self.member(frame, Env(), EMP_WORLD, h3)
            ):
                return True
        return False

    def dcl_member(
        self, q: Assertion, env: Env, w: World, frame: Assertion, h: Heap
    ) -> bool:
        """태그를 올린 후보 중 하나가 목표 집합에 있으면 참"""
        return any(
            self.in_triple_set(q, env, w, frame, g)
            for g in raised_candidates(h, self.cfg.tag_max)
        )

    def check_sample(
        self,
        n: int,
        w: World,
        pre: Assertion,
        code: CodeVal,
        post: Assertion,
        env: Env,
        frame: Assertion,
        h: Heap,
    ) -> Witness | OutOfFuel | None:
        """표본 하나 실행: 반례, 판정 불가(OutOfFuel), 통과(None)"""
        outcome = run_code(code, h, self.cfg.fuel)
        if isinstance(outcome, Fault):
            return Witness(w, frame, h, 'fault', outcome.reason, env, n)
        if isinstance(outcome, Done):
            result = truncate(n, outcome.heap)
            if self.dcl_member(post, env, w, frame, result):
                return None
            outcome_text = f'done {show_heap(result)}'
            return Witness(w, frame, h, outcome_text, 'postcondition', env, n, result)
        return OutOfFuel()

    def check_level(
        self,
        n: int,
        w: World,
        pre: Assertion,
        code: CodeVal,
        post: Assertion,
        env: Env,
    ) -> _LevelResult:
        key = (n, w, pre, code, post, env)
        if key in self._levels:
            return self._levels[key]
        hits = self._cycle_hits
        samples = inconclusive = 0
        witness = None
        for frame in self.cfg.frame_pool:
            for h in self.universe(n - 1):
                if not self.in_triple_set(pre, env, w, frame, h):
                    continue
                samples += 1
                found = self.check_sample(n, w, pre, code, post, env, frame, h)
                if isinstance(found, OutOfFuel):
                    inconclusive += 1
                elif found is not None:
                    witness = found
                    break
            if witness is not None:
                break
        logger.debug('level %d: %d samples, %d inconclusive', n, samples, inconclusive)
        result = _LevelResult(witness, samples, inconclusive)
        if self._cycle_hits == hits:
            self._levels[key] = result
        return result


    def sem_triple_at(
        self,
        k: int,
        w: World,
        pre: Assertion,
        code: Value | None,
        post: Assertion,
        env: Env,
    ) -> Verdict:
        if not isinstance(code, CodeVal):
            return Fail(Witness(w, None, EMPTY, 'fault', 'not-code', env, 0))
        samples = inconclusive = 0
        for n in range(1, k + 1):
            level = self.check_level(n, w, pre, code, post, env)
            samples += level.samples
            inconclusive += level.inconclusive
            if level.witness is not None:
                return Fail(level.witness, samples, inconclusive)
        return Pass(samples, inconclusive)

    def triple_holds(self, k, w, pre, code, post, env) -> bool:
        if k <= 0:
            return True
        return isinstance(self.sem_triple_at(k, w, pre, code, post, env), Pass)


# ---------------------------------------------------------------- heap splits


def splits(h: HeapMap) -> Iterator[tuple[HeapMap, HeapMap]]:
    cells = h.cells
    for mask in range(1 << len(cells)):
        left = tuple(c for i, c in enumerate(cells) if mask >> i & 1)
        right = tuple(c for i, c in enumerate(cells) if not mask >> i & 1)
        yield HeapMap(left), HeapMap(right)


def splits3(h: HeapMap) -> Iterator[tuple[HeapMap, HeapMap, HeapMap]]:
    cells = h.cells
    for owners in itertools.product(range(3), repeat=len(cells)):
        parts = ([], [], [])
        for owner, cell in zip(owners, cells):
            parts[owner].append(cell)
        yield tuple(HeapMap(tuple(part)) for part in parts)


def raised_candidates(h: Heap, tag_max: int) -> Iterator[Heap]:
    """h ⊑ g인 g: 코드 태그를 tag_max까지 올린 힙들 (h 먼저)"""
    if isinstance(h, Bot):
        yield h
        return
    options = []
    for addr, value in h.cells:
        if isinstance(value, CodeVal) and value.tag != INF:
            tags = range(int(value.tag), max(int(value.tag), tag_max) + 1)
            options.append(
                [(addr, CodeVal(value.body, value.captured, t)) for t in tags]
            )
        else:
            options.append([(addr, value)])
    for cells in itertools.product(*options):
        yield HeapMap(tuple(cells))


def raised_predecessors(h: HeapMap, k: int) -> Iterator[HeapMap]:
    """rank k+1이고 π_k(h′) = h인 h′"""
    raisable = [
        i
        for i, (_, v) in enumerate(h.cells)
        if isinstance(v, CodeVal) and v.tag == k - 1
    ]
    for size in range(1, len(raisable) + 1):
        for chosen in itertools.combinations(raisable, size):
            cells = list(h.cells)
            for i in chosen:
                addr, v = cells[i]
                cells[i] = (addr, CodeVal(v.body, v.captured, k))
            yield HeapMap(tuple(cells))


# ---------------------------------------------------------------- public API


def demote(h: Heap, cfg: TestConfig) -> Heap:
    """∞ 태그 코드를 tag_max로 낮춘다"""
    if rank(h) != INF:
        return h
    if not cfg.demote_infinite:
        raise UniverseOverflow(f'heap {show_heap(h)} has an untagged code cell')
    logger.warning('demoting untagged code in %s to tag %d', show_heap(h), cfg.tag_max)
    return truncate(cfg.tag_max + 1, h)


def close_relvars(p: Assertion, rho: Mapping[str, RelDef] | None) -> Assertion:
    return substitute(p, dict(rho)) if rho else p


def member(
    p: Assertion,
    env: Env,
    rho: Mapping[str, RelDef] | None,
    w: World,
    h: Heap,
    cfg: TestConfig,
    model: Model | None = None,
) -> bool:
    model = model or Model(cfg)
    return model.member(close_relvars(p, rho), env, w, demote(h, cfg))


def sem_triple_at(
    k: int,
    w: World,
    pre: Assertion,
    code: Value,
    post: Assertion,
    env: Env,
    rho: Mapping[str, RelDef] | None,
    cfg: TestConfig,
    model: Model | None = None,
) -> Verdict:
    model = model or Model(cfg)
    return model.sem_triple_at(
        k, w, close_relvars(pre, rho), code, close_relvars(post, rho), env
    )


def universe(cfg: TestConfig, max_tag: int) -> tuple[HeapMap, ...]:
    return Model(cfg).universe(max_tag)


__all__ = [
    'Model',
    'demote',
    'member',
    'raised_candidates',
    'raised_predecessors',
    'sem_triple_at',
    'splits',
    'splits3',
    'universe',
]
