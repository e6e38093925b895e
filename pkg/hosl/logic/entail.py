"""단언 동치와 결정 가능한 함의 조각"""

from __future__ import annotations

import itertools
import logging

from hosl.errors import TypeFault, UnboundVariable
from hosl.interp import Env, IntVal, eval_expr
from hosl.logic.normalize import normalize_otimes
from hosl.syntax import (
    And,
    Assertion,
    BinOp,
    Diamond,
    Emp,
    Eq,
    Exists,
    Expr,
    FalseAsn,
    Forall,
    Implies,
    IntLit,
    Leq,
    Mu,
    Or,
    PointsTo,
    Quote,
    Star,
    Tensor,
    TrueAsn,
    Triple,
    Var,
    canonical_key,
    equal_mod_ac,
    fresh_name,
    fv,
    star_of,
    substitute,
    unfold_mu,
)
from hosl.syntax.ops import binder_names, subterms

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 3
_MAX_WITNESSES = 24


# ---------------------------------------------------------------- equivalence


def equivalent(p: Assertion, q: Assertion, budget: int = DEFAULT_BUDGET) -> bool:
    """α, AC, ∗ 단위원, 그리고 μ 펼침을 쌍 가정으로 허용하는 동치"""
    return _equiv(p, q, budget, frozenset())


def _equiv(p, q, budget: int, assumed: frozenset) -> bool:
    if equal_mod_ac(p, q):
        return True
    pair = (canonical_key(p), canonical_key(q))
    if pair in assumed:
        return True
    if isinstance(p, Mu) or isinstance(q, Mu):
        if budget <= 0:
            return False
        assumed = assumed | {pair}
        p = unfold_mu(p) if isinstance(p, Mu) else p
        q = unfold_mu(q) if isinstance(q, Mu) else q
        return _equiv(p, q, budget - 1, assumed)
    match p, q:
        case Triple(pre1, code1, post1), Triple(pre2, code2, post2):
            return (
                equal_mod_ac(code1, code2)
                and _equiv(pre1, pre2, budget, assumed)
                and _equiv(post1, post2, budget, assumed)
            )
        case (Implies(l1, r1), Implies(l2, r2)) | (Tensor(l1, r1), Tensor(l2, r2)):
            if type(p) is not type(q):
                return False
            return _equiv(l1, l2, budget, assumed) and _equiv(r1, r2, budget, assumed)
        case (Forall(x, b1), Forall(y, b2)) | (Exists(x, b1), Exists(y, b2)):
            if type(p) is not type(q):
                return False
            b1, b2 = _common_binder(x, b1, y, b2)
            return _equiv(b1, b2, budget, assumed)
        case Diamond(b1), Diamond(b2):
            return _equiv(b1, b2, budget, assumed)
        case (Star(), Star()) | (And(), And()) | (Or(), Or()):
            if type(p) is not type(q):
                return False
            left, right = _parts(p, type(p)), _parts(q, type(q))
            return _match_all(
                left, right, lambda a, b: _equiv(a, b, budget, assumed), False
            )
    return False


def _common_binder(x: str, b1, y: str, b2):
    name = fresh_name(x, fv(b1, b2) | binder_names(b1) | binder_names(b2) | {x, y})
    return substitute(b1, {x: Var(name)}), substitute(b2, {y: Var(name)})


def _parts(p: Assertion, kind) -> list[Assertion]:
    if isinstance(p, kind):
        return _parts(p.left, kind) + _parts(p.right, kind)
    if kind is Star and isinstance(p, Emp):
        return []
    return [p]


def _match_all(left: list, right: list, related, absorb: bool) -> bool:
    """left의 각 원소를 right의 서로 다른 원소와 짝짓는다 (absorb이면 남는 left 허용)"""
    if not right:
        return absorb or not left
    head, rest = right[0], right[1:]
    for i, candidate in enumerate(left):
        if related(candidate, head):
            if _match_all(left[:i] + left[i + 1 :], rest, related, absorb):
                return True
    return False


# ---------------------------------------------------------------- simplification


def _ground(e: Expr) -> int | None:
    if fv(e):
        return None
    try:
        value = eval_expr(e, Env())
    except (TypeFault, UnboundVariable):
        return None
    return value.n if isinstance(value, IntVal) else None


def _cell_address(p: Assertion) -> Expr | None:
    """e↦e′, e↦_, e↦{A}_{B} 꼴의 주소"""
    match p:
        case PointsTo(addr, _):
            return addr
        case Exists(var, PointsTo(addr, Var(name))) if name == var:
            return None if var in fv(addr) else addr
        case Exists(var, And(PointsTo(addr, Var(name)), _)) if name == var:
            return None if var in fv(addr) else addr
    return None


def simplify(p: Assertion) -> Assertion:
    """격자 법칙, ∗-Unit/Zero/Overlap, 닫힌 산술"""
    match p:
        case Eq(left, right) | Leq(left, right):
            a, b = _ground(left), _ground(right)
            if a is None or b is None:
                if isinstance(p, Eq) and reflexive(left, right):
                    return TrueAsn()
                return p
            holds = a == b if isinstance(p, Eq) else a <= b
            return TrueAsn() if holds else FalseAsn()
        case And() | Or():
            kind = type(p)
            unit, zero = (TrueAsn(), FalseAsn()) if kind is And else (
                FalseAsn(),
                TrueAsn(),
            )
            parts = []
            for part in _parts(p, kind):
                part = simplify(part)
                if part == zero:
                    return zero
                if part != unit and all(not equal_mod_ac(part, q) for q in parts):
                    parts.append(part)
            if not parts:
                return unit
            result = parts[0]
            for part in parts[1:]:
                result = kind(result, part)
            return result
        case Star():
            parts = [simplify(part) for part in _parts(p, Star)]
            parts = [part for part in parts if part != Emp()]
            if any(part == FalseAsn() for part in parts):
                return FalseAsn()
            addrs = [_cell_address(part) for part in parts]
            for a, b in itertools.combinations([a for a in addrs if a is not None], 2):
                if equal_mod_ac(a, b) or _same_ground(a, b):
                    return FalseAsn()
            return star_of(*parts)
        case Implies(left, right):
            left, right = simplify(left), simplify(right)
            if left == FalseAsn() or right == TrueAsn():
                return TrueAsn()
            if left == TrueAsn():
                return right
            return Implies(left, right)
        case Forall(var, body) | Exists(var, body):
            body = simplify(body)
            if var not in fv(body) and body in (TrueAsn(), FalseAsn()):
                return body
            return type(p)(var, body)
        case Triple(pre, code, post):
            return Triple(simplify(pre), code, simplify(post))
        case Tensor(left, right):
            return Tensor(simplify(left), simplify(right))
        case Diamond(body):
            return Diamond(simplify(body))
    return p


def _same_ground(a: Expr, b: Expr) -> bool:
    x, y = _ground(a), _ground(b)
    return x is not None and x == y


# ---------------------------------------------------------------- entailment


def entail_basic(p: Assertion, q: Assertion, budget: int = DEFAULT_BUDGET) -> bool:
    """P ⇒ Q가 유도 가능하면 참 (거짓 음성은 허용)"""
    p = simplify(normalize_otimes(p))
    q = simplify(normalize_otimes(q))
    result = _Entailer(budget).entails(p, q, budget)
    logger.debug('entail_basic: %s', result)
    return result


class _Entailer:
    def __init__(self, budget: int):
        self.steps = 0
        self.limit = 2000 * (budget + 1)

    def entails(self, p: Assertion, q: Assertion, budget: int) -> bool:
        self.steps += 1
        if self.steps > self.limit:
            return False
        if p == FalseAsn() or q == TrueAsn():
            return True
        if equivalent(p, q, budget):
            return True
        # 가역 규칙 먼저
        match q:
            case And(left, right):
                return self.entails(p, left, budget) and self.entails(p, right, budget)
            case Forall(var, body):
                _, body = _fresh_binder(var, body, fv(p))
                return self.entails(p, body, budget)
            case Implies(left, right):
                return self.entails(simplify(And(p, left)), right, budget)
        match p:
            case Or(left, right):
                return self.entails(left, q, budget) and self.entails(right, q, budget)
            case Exists(var, body):
                _, body = _fresh_binder(var, body, fv(q))
                return self.entails(body, q, budget)
        return self._search(p, q, budget)

    def _search(self, p: Assertion, q: Assertion, budget: int) -> bool:
        match q:
            case Or(left, right):
                if self.entails(p, left, budget) or self.entails(p, right, budget):
                    return True
            case Exists(var, body):
                for term in _witnesses(p, q):
                    if self.entails(p, simplify(substitute(body, {var: term})), budget):
                        return True
        match p:
            case And():
                for part in _parts(p, And):
                    if self.entails(part, q, budget):
                        return True
            case Forall(var, body):
                for term in _witnesses(p, q):
                    if self.entails(simplify(substitute(body, {var: term})), q, budget):
                        return True
        match p, q:
            case Triple(pre1, code1, post1), Triple(pre2, code2, post2):
                # Conseq
                if equal_mod_ac(code1, code2) and (
                    self.entails(pre2, pre1, budget)
                    and self.entails(post1, post2, budget)
                ):
                    return True
            case Tensor(left1, right1), Tensor(left2, right2):
                if equivalent(right1, right2, budget) and self.entails(
                    left1, left2, budget
                ):
                    return True
        if isinstance(p, Star) or isinstance(q, Star):
            if self._star(p, q, budget):
                return True
        if budget > 0:
            if isinstance(p, Mu):
                return self.entails(_unfolded(p), q, budget - 1)
            if isinstance(q, Mu):
                return self.entails(p, _unfolded(q), budget - 1)
        return False

    def _star(self, p: Assertion, q: Assertion, budget: int) -> bool:
        """∗-Mono: 조각끼리 일대일 함의, 오른쪽 true는 남는 조각을 흡수"""
        left, right = _parts(p, Star), _parts(q, Star)
        absorb = TrueAsn() in right
        right = [part for part in right if part != TrueAsn()]
        sizes_fit = len(left) == len(right) or (len(left) > len(right) and absorb)

        def related(a, b):
            return self.entails(a, b, budget)

        if sizes_fit and _match_all(left, right, related, absorb):
            return True
        if budget <= 0:
            return False
        # μ 조각 하나를 펼쳐 다시 시도
        for side, parts in ((0, left), (1, right)):
            for i, part in enumerate(parts):
                if not isinstance(part, Mu):
                    continue
                unfolded = parts[:i] + _parts(_unfolded(part), Star) + parts[i + 1 :]
                if side == 1 and absorb:
                    unfolded.append(TrueAsn())
                pair = (star_of(*unfolded), q) if side == 0 else (p, star_of(*unfolded))
                if self.entails(*pair, budget - 1):
                    return True
        return False


def _unfolded(mu: Mu) -> Assertion:
    return simplify(normalize_otimes(unfold_mu(mu)))


def _fresh_binder(var: str, body: Assertion, avoid) -> tuple[str, Assertion]:
    if var not in avoid:
        return var, body
    new = fresh_name(var, set(avoid) | fv(body) | binder_names(body))
    return new, substitute(body, {var: Var(new)})


def _witnesses(p: Assertion, q: Assertion) -> list[Expr]:
    """∃ 도입 후보: 양쪽에 나타난 닫힌 식과 자유 변수"""
    free = fv(p, q)
    seen: list[Expr] = []
    for ast in (p, q):
        for node in subterms(ast):
            if isinstance(node, (IntLit, Var, BinOp, Quote)) and fv(node) <= free:
                if node not in seen:
                    seen.append(node)
    return seen[:_MAX_WITNESSES]


def reflexive(left: Expr, right: Expr) -> bool:
    """e = e: 평가 오류가 날 수 없는 식에 한해"""
    if not equal_mod_ac(left, right):
        return False
    return not any(isinstance(node, BinOp) for node in subterms(left)) or (
        _ground(left) is not None
    )
