"""AST 연산: 자유 변수, 치환, 분류, AC 동치"""

from __future__ import annotations

import logging
import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from enum import Enum

from hosl.errors import ArityError
from hosl.syntax.nodes import (
    And,
    Assertion,
    Assign,
    Ast,
    BinOp,
    Command,
    Diamond,
    Emp,
    Eq,
    EvalAt,
    Exists,
    Expr,
    FalseAsn,
    Forall,
    Free,
    If,
    Implies,
    IntLit,
    Leq,
    LetDeref,
    LetNew,
    Mu,
    Or,
    PointsTo,
    Quote,
    RelVar,
    Seq,
    Skip,
    Star,
    Tensor,
    TrueAsn,
    Triple,
    Var,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RelDef:
    """관계 변수에 대입할 λx⃗.P"""

    params: tuple[str, ...]
    body: Assertion


class Purity(str, Enum):
    PURE = 'pure'
    PSEUDO_PURE = 'pseudo_pure'
    GENERAL = 'general'


def fresh_name(base: str, avoid: Iterable[str]) -> str:
    avoid = set(avoid)
    root = re.sub(r'\d+$', '', base) or 'x'
    index = 1
    while f'{root}{index}' in avoid:
        index += 1
    return f'{root}{index}'


# ---------------------------------------------------------------- free vars


def free_vars(ast: Ast) -> tuple[frozenset[str], frozenset[str]]:
    """(자유 변수, 자유 관계 변수)"""
    names: set[str] = set()
    relvars: set[str] = set()
    _collect(ast, frozenset(), frozenset(), names, relvars)
    return frozenset(names), frozenset(relvars)


def fv(*asts: Ast) -> frozenset[str]:
    result: set[str] = set()
    for ast in asts:
        result |= free_vars(ast)[0]
    return frozenset(result)


def _collect(ast, bound, bound_rel, names: set[str], relvars: set[str]) -> None:
    match ast:
        case Var(name):
            if name not in bound:
                names.add(name)
        case IntLit() | Skip() | TrueAsn() | FalseAsn() | Emp():
            pass
        case BinOp(_, left, right) | Assign(left, right) | Eq(left, right) | Leq(
            left, right
        ) | PointsTo(left, right):
            _collect(left, bound, bound_rel, names, relvars)
            _collect(right, bound, bound_rel, names, relvars)
        case Quote(body) | EvalAt(body) | Free(body) | Diamond(body):
            _collect(body, bound, bound_rel, names, relvars)
        case LetDeref(var, addr, body):
            _collect(addr, bound, bound_rel, names, relvars)
            _collect(body, bound | {var}, bound_rel, names, relvars)
        case LetNew(var, inits, body):
            for init in inits:
                _collect(init, bound, bound_rel, names, relvars)
            _collect(body, bound | {var}, bound_rel, names, relvars)
        case Seq(first, second):
            _collect(first, bound, bound_rel, names, relvars)
            _collect(second, bound, bound_rel, names, relvars)
        case If(lhs, rhs, then, orelse):
            for part in (lhs, rhs, then, orelse):
                _collect(part, bound, bound_rel, names, relvars)
        case Or(left, right) | And(left, right) | Implies(left, right) | Star(
            left, right
        ) | Tensor(left, right):
            _collect(left, bound, bound_rel, names, relvars)
            _collect(right, bound, bound_rel, names, relvars)
        case Forall(var, body) | Exists(var, body):
            _collect(body, bound | {var}, bound_rel, names, relvars)
        case Triple(pre, code, post):
            _collect(pre, bound, bound_rel, names, relvars)
            _collect(code, bound, bound_rel, names, relvars)
            _collect(post, bound, bound_rel, names, relvars)
        case RelVar(name, args):
            if name not in bound_rel:
                relvars.add(name)
            for arg in args:
                _collect(arg, bound, bound_rel, names, relvars)
        case Mu(relvar, params, body, args):
            _collect(body, bound | set(params), bound_rel | {relvar}, names, relvars)
            for arg in args:
                _collect(arg, bound, bound_rel, names, relvars)
        case _:
            raise TypeError(f'not an AST node: {ast!r}')


def binder_names(ast: Ast) -> frozenset[str]:
    """AST 안에서 묶이는 모든 이름"""
    result: set[str] = set()

    def walk(node) -> None:
        match node:
            case LetDeref(var, _, _) | LetNew(var, _, _) | Forall(var, _) | Exists(
                var, _
            ):
                result.add(var)
            case Mu(relvar, params, _, _):
                result.add(relvar)
                result.update(params)
        for child in _children(node):
            walk(child)

    walk(ast)
    return frozenset(result)


def _children(node) -> tuple:
    match node:
        case BinOp(_, left, right) | Assign(left, right) | Eq(left, right) | Leq(
            left, right
        ) | PointsTo(left, right) | Seq(left, right):
            return (left, right)
        case Or(left, right) | And(left, right) | Implies(left, right) | Star(
            left, right
        ) | Tensor(left, right):
            return (left, right)
        case Quote(body) | EvalAt(body) | Free(body) | Diamond(body):
            return (body,)
        case Forall(_, body) | Exists(_, body):
            return (body,)
        case LetDeref(_, addr, body):
            return (addr, body)
        case LetNew(_, inits, body):
            return (*inits, body)
        case If(lhs, rhs, then, orelse):
            return (lhs, rhs, then, orelse)
        case Triple(pre, code, post):
            return (pre, code, post)
        case RelVar(_, args):
            return args
        case Mu(_, _, body, args):
            return (body, *args)
    return ()


def subterms(ast: Ast) -> Iterable[Ast]:
    yield ast
    for child in _children(ast):
        yield from subterms(child)


# ---------------------------------------------------------------- substitution


def substitute(ast: Ast, bindings: Mapping[str, Expr | RelDef]):
    """동시 치환, 묶인 이름은 필요할 때만 새로 짓는다"""
    exprs = {k: v for k, v in bindings.items() if not isinstance(v, RelDef)}
    rels = {k: v for k, v in bindings.items() if isinstance(v, RelDef)}
    if not exprs and not rels:
        return ast
    return _Substitution(exprs, rels).apply(ast)


class _Substitution:
    def __init__(self, exprs: dict[str, Expr], rels: dict[str, RelDef]):
        self.exprs = exprs
        self.rels = rels
        self.range_vars: set[str] = set()
        self.range_relvars: set[str] = set()
        for value in exprs.values():
            self.range_vars |= free_vars(value)[0]
        for definition in rels.values():
            names, relvars = free_vars(definition.body)
            self.range_vars |= names - set(definition.params)
            self.range_relvars |= relvars

    def _under(
        self, names: Iterable[str], relvar: str | None, body_asts, arity: int = 0
    ) -> tuple:
        """binder 아래로 들어갈 때의 치환과 새 이름"""
        names = tuple(names)
        exprs = {k: v for k, v in self.exprs.items() if k not in names}
        rels = {k: v for k, v in self.rels.items() if k != relvar}
        avoid = set(self.range_vars) | set(exprs) | set(names)
        for body in body_asts:
            avoid |= free_vars(body)[0]
        renamed = []
        for name in names:
            if name in self.range_vars:
                new = fresh_name(name, avoid)
                avoid.add(new)
                exprs[name] = Var(new)
                renamed.append(new)
            else:
                renamed.append(name)
        new_relvar = relvar
        if relvar is not None and relvar in self.range_relvars:
            rel_avoid = set(self.range_relvars) | set(rels)
            for body in body_asts:
                rel_avoid |= free_vars(body)[1]
            new_relvar = fresh_name(relvar, rel_avoid)
            rels[relvar] = relvar_renaming(new_relvar, arity)
        inner = _Substitution.__new__(_Substitution)
        inner.exprs = exprs
        inner.rels = rels
        inner.range_vars = self.range_vars | set(renamed)
        inner.range_relvars = self.range_relvars | (
            {new_relvar} if new_relvar else set()
        )
        return inner, tuple(renamed), new_relvar

    def apply(self, node):
        match node:
            case Var(name):
                return self.exprs.get(name, node)
            case IntLit() | Skip() | TrueAsn() | FalseAsn() | Emp():
                return node
            case BinOp(op, left, right):
                return BinOp(op, self.apply(left), self.apply(right))
            case Quote(body):
                return Quote(self.apply(body))
            case Assign(target, source):
                return Assign(self.apply(target), self.apply(source))
            case EvalAt(addr):
                return EvalAt(self.apply(addr))
            case Free(addr):
                return Free(self.apply(addr))
            case Seq(first, second):
                return Seq(self.apply(first), self.apply(second))
            case If(lhs, rhs, then, orelse):
                return If(
                    self.apply(lhs),
                    self.apply(rhs),
                    self.apply(then),
                    self.apply(orelse),
                )
            case LetDeref(var, addr, body):
                inner, (new,), _ = self._under((var,), None, (body,))
                return LetDeref(new, self.apply(addr), inner.apply(body))
            case LetNew(var, inits, body):
                inner, (new,), _ = self._under((var,), None, (body,))
                return LetNew(
                    new, tuple(self.apply(i) for i in inits), inner.apply(body)
                )
            case Or(left, right) | And(left, right) | Implies(left, right) | Star(
                left, right
            ) | Tensor(left, right):
                return type(node)(self.apply(left), self.apply(right))
            case Forall(var, body) | Exists(var, body):
                inner, (new,), _ = self._under((var,), None, (body,))
                return type(node)(new, inner.apply(body))
            case Eq(left, right) | Leq(left, right) | PointsTo(left, right):
                return type(node)(self.apply(left), self.apply(right))
            case Triple(pre, code, post):
                return Triple(self.apply(pre), self.apply(code), self.apply(post))
            case Diamond(body):
                return Diamond(self.apply(body))
            case RelVar(name, args):
                args = tuple(self.apply(arg) for arg in args)
                definition = self.rels.get(name)
                if definition is None:
                    return RelVar(name, args)
                if len(definition.params) != len(args):
                    raise ArityError(name, len(definition.params), len(args))
                return substitute(definition.body, dict(zip(definition.params, args)))
            case Mu(relvar, params, body, args):
                inner, new_params, new_relvar = self._under(
                    params, relvar, (body,), len(params)
                )
                return Mu(
                    new_relvar,
                    new_params,
                    inner.apply(body),
                    tuple(self.apply(arg) for arg in args),
                )
        raise TypeError(f'not an AST node: {node!r}')


def unfold_mu(mu: Mu) -> Assertion:
    """P[X:=μX(x⃗).P, x⃗:=e⃗]"""
    if len(mu.params) != len(mu.args):
        raise ArityError(mu.relvar, len(mu.params), len(mu.args))
    closed = RelDef(
        mu.params,
        Mu(mu.relvar, mu.params, mu.body, tuple(Var(p) for p in mu.params)),
    )
    bindings: dict[str, Expr | RelDef] = {mu.relvar: closed}
    bindings.update(zip(mu.params, mu.args))
    return substitute(mu.body, bindings)


# ---------------------------------------------------------------- renaming apart


def rename_apart(ast: Ast):
    """어떤 binder도 다른 binder나 자유 변수를 가리지 않게 한다"""
    names, relvars = free_vars(ast)
    return _Renamer(set(names), set(relvars)).walk(ast)


class _Renamer:
    def __init__(self, used: set[str], used_rel: set[str]):
        self.used = used
        self.used_rel = used_rel

    def _claim(self, name: str) -> str:
        if name in self.used:
            name = fresh_name(name, self.used)
        self.used.add(name)
        return name

    def _rebind(self, old: str, body):
        new = self._claim(old)
        if new != old:
            body = substitute(body, {old: Var(new)})
        return new, body

    def walk(self, node):
        match node:
            case LetDeref(var, addr, body):
                addr = self.walk(addr)
                var, body = self._rebind(var, body)
                return LetDeref(var, addr, self.walk(body))
            case LetNew(var, inits, body):
                inits = tuple(self.walk(i) for i in inits)
                var, body = self._rebind(var, body)
                return LetNew(var, inits, self.walk(body))
            case Forall(var, body) | Exists(var, body):
                var, body = self._rebind(var, body)
                return type(node)(var, self.walk(body))
            case Mu(relvar, params, body, args):
                args = tuple(self.walk(arg) for arg in args)
                if relvar in self.used_rel:
                    new_relvar = fresh_name(relvar, self.used_rel)
                    body = substitute(
                        body, {relvar: relvar_renaming(new_relvar, len(params))}
                    )
                    relvar = new_relvar
                self.used_rel.add(relvar)
                new_params = []
                for param in params:
                    param, body = self._rebind(param, body)
                    new_params.append(param)
                return Mu(relvar, tuple(new_params), self.walk(body), args)
            case Var() | IntLit() | Skip() | TrueAsn() | FalseAsn() | Emp():
                return node
            case BinOp(op, left, right):
                return BinOp(op, self.walk(left), self.walk(right))
            case RelVar(name, args):
                return RelVar(name, tuple(self.walk(arg) for arg in args))
            case If(lhs, rhs, then, orelse):
                return If(
                    self.walk(lhs), self.walk(rhs), self.walk(then), self.walk(orelse)
                )
            case Triple(pre, code, post):
                return Triple(self.walk(pre), self.walk(code), self.walk(post))
            case _:
                return type(node)(*(self.walk(child) for child in _children(node)))


# ---------------------------------------------------------------- classification


def contractive_path(p: Assertion, relvar: str) -> tuple[str, ...] | None:
    """계약적이지 않은 출현의 경로, 계약적이면 None"""
    match p:
        case RelVar(name, _):
            return ('',) if name == relvar else None
        case Triple():
            return None
        case Tensor(left, _):
            path = contractive_path(left, relvar)
            return None if path is None else ('left', *path)
        case Mu(bound, _, body, _):
            if bound == relvar:
                return None
            path = contractive_path(body, relvar)
            return None if path is None else ('mu', *path)
        case Or(left, right) | And(left, right) | Implies(left, right) | Star(
            left, right
        ):
            label = type(p).__name__.lower()
            for side, child in (('left', left), ('right', right)):
                path = contractive_path(child, relvar)
                if path is not None:
                    return (f'{label}.{side}', *path)
            return None
        case Forall(_, body) | Exists(_, body) | Diamond(body):
            path = contractive_path(body, relvar)
            return None if path is None else (type(p).__name__.lower(), *path)
    return None


def contractive_in(p: Assertion, relvar: str) -> bool:
    return contractive_path(p, relvar) is None


def is_pure(p: Assertion) -> bool:
    match p:
        case TrueAsn() | FalseAsn() | Eq() | Leq():
            return True
        case And(left, right) | Or(left, right) | Implies(left, right):
            return is_pure(left) and is_pure(right)
        case Forall(_, body) | Exists(_, body):
            return is_pure(body)
    return False


def _is_pseudo_pure(p: Assertion, relvars: frozenset[str]) -> bool:
    if is_pure(p):
        return True
    match p:
        case Triple():
            return True
        case Tensor(left, _):
            return _is_pseudo_pure(left, relvars)
        case And(left, right) | Or(left, right):
            return _is_pseudo_pure(left, relvars) and _is_pseudo_pure(right, relvars)
        case Forall(_, body) | Exists(_, body):
            return _is_pseudo_pure(body, relvars)
        case Mu(relvar, _, body, _):
            return _is_pseudo_pure(body, relvars | {relvar})
        case RelVar(name, _):
            return name in relvars
    return False


def classify(p: Assertion) -> Purity:
    if is_pure(p):
        return Purity.PURE
    if _is_pseudo_pure(p, frozenset()):
        return Purity.PSEUDO_PURE
    return Purity.GENERAL


# ---------------------------------------------------------------- AC equality


def canonical_key(ast: Ast) -> tuple:
    """α, ∗/∧/∨의 AC, ∗ 단위원을 무시한 정규 키"""
    return _canon(ast, {}, {}, 0)


def _flatten(node, kind) -> list:
    if isinstance(node, kind):
        return _flatten(node.left, kind) + _flatten(node.right, kind)
    return [node]


def _canon(node, bound: dict[str, str], bound_rel: dict[str, str], depth: int):
    # depth: 둘러싼 바인더 수. 자리표시자 #depth는 바인더 순서로만 정해진다
    def sub(child, extra=None, extra_rel=None):
        if not extra and not extra_rel:
            return _canon(child, bound, bound_rel, depth)
        inner = dict(bound, **(extra or {}))
        inner_rel = dict(bound_rel, **(extra_rel or {}))
        return _canon(child, inner, inner_rel, depth + 1)

    match node:
        case Var(name):
            return ('var', bound.get(name, name))
        case IntLit(value):
            return ('int', value)
        case BinOp(op, left, right):
            return ('binop', op, sub(left), sub(right))
        case Quote(body):
            return ('quote', sub(body))
        case Skip():
            return ('skip',)
        case Assign(target, source):
            return ('assign', sub(target), sub(source))
        case EvalAt(addr):
            return ('eval', sub(addr))
        case Free(addr):
            return ('free', sub(addr))
        case Seq(first, second):
            return ('seq', sub(first), sub(second))
        case If(lhs, rhs, then, orelse):
            return ('if', sub(lhs), sub(rhs), sub(then), sub(orelse))
        case LetDeref(var, addr, body):
            return ('letderef', sub(addr), sub(body, {var: f'#{depth}'}))
        case LetNew(var, inits, body):
            return (
                'letnew',
                tuple(sub(i) for i in inits),
                sub(body, {var: f'#{depth}'}),
            )
        case TrueAsn():
            return ('true',)
        case FalseAsn():
            return ('false',)
        case Emp():
            return ('emp',)
        case Star():
            parts = [sub(part) for part in _flatten(node, Star)]
            parts = sorted((p for p in parts if p != ('emp',)), key=repr)
            if not parts:
                return ('emp',)
            if len(parts) == 1:
                return parts[0]
            return ('star', tuple(parts))
        case And() | Or():
            label = 'and' if isinstance(node, And) else 'or'
            parts = sorted((sub(part) for part in _flatten(node, type(node))), key=repr)
            return (label, tuple(parts))
        case Implies(left, right):
            return ('implies', sub(left), sub(right))
        case Tensor(left, right):
            return ('tensor', sub(left), sub(right))
        case Forall(var, body) | Exists(var, body):
            return (type(node).__name__.lower(), sub(body, {var: f'#{depth}'}))
        case Eq(left, right):
            return ('eq', sub(left), sub(right))
        case Leq(left, right):
            return ('leq', sub(left), sub(right))
        case PointsTo(addr, value):
            return ('pointsto', sub(addr), sub(value))
        case Triple(pre, code, post):
            return ('triple', sub(pre), sub(code), sub(post))
        case Diamond(body):
            return ('diamond', sub(body))
        case RelVar(name, args):
            return ('relvar', bound_rel.get(name, name), tuple(sub(a) for a in args))
        case Mu(relvar, params, body, args):
            extra = {param: f'#{depth}.{i}' for i, param in enumerate(params)}
            return (
                'mu',
                len(params),
                sub(body, extra, {relvar: f'#{depth}'}),
                tuple(sub(a) for a in args),
            )
    raise TypeError(f'not an AST node: {node!r}')


def equal_mod_ac(p: Ast, q: Ast) -> bool:
    return p == q or canonical_key(p) == canonical_key(q)


# ---------------------------------------------------------------- sugar


def points_to_any(addr: Expr, avoid: Iterable[str] = ()) -> Assertion:
    """e ↦ _  ≡  ∃x. e ↦ x"""
    name = _sugar_name('x', fv(addr) | set(avoid))
    return Exists(name, PointsTo(addr, Var(name)))


def points_to_spec(
    addr: Expr, pre: Assertion, post: Assertion, avoid: Iterable[str] = ()
) -> Assertion:
    """e ↦ {A}_{B}  ≡  ∃k. e ↦ k ∧ {A}k{B}"""
    name = _sugar_name('k', fv(addr, pre, post) | set(avoid))
    return Exists(name, And(PointsTo(addr, Var(name)), Triple(pre, Var(name), post)))


def points_to_pred(addr: Expr, hole: str, pred: Assertion) -> Assertion:
    """e ↦ R[_]  ≡  ∃y. e ↦ y ∧ R[y]"""
    name = _sugar_name('y', fv(addr, pred) | {hole})
    return Exists(
        name, And(PointsTo(addr, Var(name)), substitute(pred, {hole: Var(name)}))
    )


def _sugar_name(base: str, avoid: Iterable[str]) -> str:
    avoid = set(avoid)
    return base if base not in avoid else fresh_name(base, avoid)


def ints_of(ast: Ast) -> frozenset[int]:
    return frozenset(node.value for node in subterms(ast) if isinstance(node, IntLit))


def quotes_of(ast: Ast) -> tuple[Command, ...]:
    seen: list[Command] = []
    for node in subterms(ast):
        if isinstance(node, Quote) and node.body not in seen:
            seen.append(node.body)
    return tuple(seen)


def relvar_renaming(new: str, arity: int) -> RelDef:
    params = tuple(f'_{i}' for i in range(arity))
    return RelDef(params, RelVar(new, tuple(Var(p) for p in params)))
