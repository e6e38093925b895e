"""Eval에서 유도되는 규칙: 커널 규칙 적용으로 전개해 검사한다"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Sequence

from hosl.errors import ExpansionError, ProofError
from hosl.logic.rules import (
    NoShape,
    Result,
    RuleId,
    Step,
    apply_rule,
    as_triple,
    command_of,
    remove_part,
    rule,
)
from hosl.syntax import (
    And,
    Assertion,
    EvalAt,
    Exists,
    Expr,
    Forall,
    Implies,
    Judgement,
    Mu,
    PointsTo,
    Quote,
    RelVar,
    Star,
    Tensor,
    Triple,
    Var,
    circ,
    equal_mod_ac,
    fresh_name,
    fv,
    substitute,
)
from hosl.syntax.ops import binder_names, points_to_pred, subterms

logger = logging.getLogger(__name__)

_MAX_INSTANCES = 256


class _Expansion:
    """내부 단계 적용기: 실패는 ExpansionError로 감싼다"""

    def __init__(self, name: str, context: Sequence[str], budget: int):
        self.name = name
        self.context = tuple(dict.fromkeys(context))
        self.budget = budget
        self.steps = 0

    def __call__(self, rule_id: RuleId, params=None, premises=()):
        self.steps += 1
        try:
            return apply_rule(
                rule_id,
                params,
                premises,
                vars=self.context,
                budget=self.budget,
            )
        except ProofError as err:
            raise ExpansionError(self.name, err) from err

    def instantiate(self, judgement: Judgement, ys, terms) -> Judgement:
        for y, t in zip(ys, terms):
            judgement = self(RuleId.FORALL_E, {'t': t}, [judgement])
        return judgement


def forall_chain(ys: Sequence[str], body: Assertion) -> Assertion:
    for y in reversed(ys):
        body = Forall(y, body)
    return body


def peel(spec: Assertion) -> tuple[tuple[str, ...], Triple]:
    ys = []
    while isinstance(spec, Forall):
        ys.append(spec.var)
        spec = spec.body
    return tuple(ys), as_triple(spec)


def spec_cell(p: Assertion, e: Expr) -> tuple[str, Assertion]:
    """∃k. e ↦ k ∧ ∀y⃗.{A}k{B} 꼴의 조각에서 (k, 명세)"""
    match p:
        case Exists(k, And(PointsTo(addr, Var(name)), spec)) if (
            name == k and equal_mod_ac(addr, e)
        ):
            peel(spec)
            return k, spec
    raise NoShape('a stored specification e |-> forall ys.{P}_{Q}')


def _evaluated(g) -> Expr:
    c = command_of(as_triple(g))
    if not isinstance(c, EvalAt):
        raise NoShape('an eval command')
    return c.addr


def _context(step: Step, *asts) -> tuple[str, ...]:
    if step.claimed is not None:
        return tuple(step.claimed.vars)
    return tuple(sorted(fv(*asts)))


def _fresh_k(*asts, avoid=()) -> str:
    names = set(avoid)
    for ast in asts:
        names |= fv(ast) | binder_names(ast)
    return fresh_name('k', names)


def instance_terms(step: Step, ys, triple: Triple, pre, post, avoid) -> tuple:
    """∀y⃗ 명세를 {pre}_{post}로 만드는 y⃗의 값"""
    if not ys:
        return ()
    code = triple.code
    target = Triple(pre, code, post)

    def fits(terms):
        return step.same(substitute(triple, dict(zip(ys, terms))), target)

    identity = tuple(Var(y) for y in ys)
    if fits(identity):
        return identity
    candidates = [Var(name) for name in sorted(fv(pre, post) | set(avoid))]
    for count, terms in enumerate(itertools.product(candidates, repeat=len(ys))):
        if count >= _MAX_INSTANCES:
            break
        if fits(terms):
            return terms
    raise NoShape('an instance of the quantified variables')


def _derived_spec(step: Step, cell_of):
    """(e, ys, 명세 삼중항, P, Q): 결론에서 추론하거나 매개변수에서 만든다"""
    e = step.param('e', _evaluated)
    if step.has('P') and step.has('Q'):
        p, q = step.param('P'), step.param('Q')
        ys = step.param('ys') if step.has('ys') else ()
        return e, ys, None, p, q
    try:
        if step.claimed is None:
            raise NoShape('a claimed conclusion')
        return (e, *cell_of(step.claimed.goal, e))
    except NoShape as shape:
        raise step.fail(f'cannot infer the stored specification: not {shape}') from None


def _finish(step: Step, final: Judgement, expansion: _Expansion) -> Result:
    logger.info('%s expanded into %d kernel steps', step.name, expansion.steps)
    return Result(final.goal)


# ---------------------------------------------------------------- TensorMono


@rule(RuleId.TENSOR_MONO)
def tensor_mono(step: Step) -> Result:
    """P ⇒ Q 에서 P⊗R ⇒ Q⊗R"""
    step.closed()
    step.count(1)
    premise = step.premises[0]
    if not isinstance(premise.goal, Implies):
        raise step.fail('premise must be an implication')

    def frame(g):
        match g:
            case Implies(Tensor(_, r), Tensor()):
                return r
        raise NoShape('an implication between tensors')

    r = step.param('R', frame)
    run = _Expansion(step.name, _context(step, premise.goal, r), step.budget)
    framed = run(RuleId.TENSOR_FRAME, {'R': r}, [premise])
    spread = run(RuleId.DIST_BIN_OP, {'P': premise.goal, 'R': r, 'dir': 'lr'})
    return _finish(step, run(RuleId.IMP_E, {}, [spread, framed]), run)


# ---------------------------------------------------------------- non-recursive eval


def _eval_from(run: _Expansion, k: str, e, r_k, p, q_eval, inner: Judgement):
    """inner: R[k] ⊢ {P ∗ F}k{q_eval} 를 Eval로 닫는다"""
    lifted = run(RuleId.IMP_I, {'A': r_k}, [inner])
    return run(
        RuleId.EVAL, {'e': e, 'k': k, 'R': r_k, 'P': p, 'Q': q_eval}, [lifted]
    )


def _non_rec_cell(step: Step, g, e, with_update: bool):
    pre = as_triple(g).pre
    cell, frame = remove_part(pre, lambda part: _is_spec_cell(part, e))
    kk, spec = spec_cell(cell, e)
    ys, triple = peel(spec)
    post = as_triple(g).post
    if not with_update:
        _, post = remove_part(post, lambda part: equal_mod_ac(part, cell))
    return ys, Triple(triple.pre, Var(kk), triple.post), frame, post, kk, spec


def _is_spec_cell(part, e) -> bool:
    try:
        spec_cell(part, e)
    except NoShape:
        return False
    return True


@rule(RuleId.EVAL_NON_REC1)
def eval_non_rec1(step: Step) -> Result:
    step.closed()
    step.count(0)
    e, ys, triple, p, q = _derived_spec(
        step,
        lambda g, e: _non_rec_cell(step, g, e, False)[:4],
    )
    context = _context(step, p, q, e)
    k = _fresh_k(p, q, e, avoid=context)
    if triple is None:
        r_k = forall_chain(ys, Triple(p, Var(k), q))
        terms = tuple(Var(y) for y in ys)
    else:
        kk = triple.code.name
        terms = instance_terms(step, ys, triple, p, q, context)
        r_k = forall_chain(ys, substitute(triple, {kk: Var(k)}))
    names = [name for t in terms for name in fv(t)]
    run = _Expansion(step.name, [*context, *names, k], step.budget)
    cell = points_to_pred(e, k, r_k)
    assumed = run(RuleId.HYP, {'A': r_k})
    body = run.instantiate(assumed, ys, terms)
    framed = run(
        RuleId.STAR_FRAME, {'e': Var(k), 'P': p, 'Q': q, 'R': cell}
    )
    inner = run(RuleId.IMP_E, {}, [framed, body])
    final = _eval_from(run, k, e, r_k, p, Star(q, cell), inner)
    return _finish(step, final, run)


@rule(RuleId.EVAL_NON_REC_UPD)
def eval_non_rec_upd(step: Step) -> Result:
    step.closed()
    step.count(0)

    def infer(g, e):
        ys, triple, frame, post, _, _ = _non_rec_cell(step, g, e, True)
        # 명세의 사전조건은 P ∗ e ↦ _
        remove_part(triple.pre, lambda part: _cell_at(part, e))
        return ys, triple, frame, post

    e, ys, triple, p, q = _derived_spec(step, infer)
    context = _context(step, p, q, e)
    k = _fresh_k(p, q, e, avoid=context)
    any_cell = _any_cell(e, fv(p, q) | {k})
    if triple is None:
        r_k = forall_chain(ys, Triple(Star(p, any_cell), Var(k), q))
        terms = tuple(Var(y) for y in ys)
    else:
        kk = triple.code.name
        terms = instance_terms(
            step, ys, triple, Star(p, any_cell), q, context
        )
        r_k = forall_chain(ys, substitute(triple, {kk: Var(k)}))
    names = [name for t in terms for name in fv(t)]
    run = _Expansion(step.name, [*context, *names, k], step.budget)
    cell = points_to_pred(e, k, r_k)
    assumed = run(RuleId.HYP, {'A': r_k})
    body = run.instantiate(assumed, ys, terms)
    weakened = run(
        RuleId.CONSEQ,
        {
            'e': Var(k),
            'P': body.goal.pre,
            'Q': body.goal.post,
            'P1': Star(p, cell),
            'Q1': q,
            'auto': 'yes',
        },
    )
    inner = run(RuleId.IMP_E, {}, [weakened, body])
    final = _eval_from(run, k, e, r_k, p, q, inner)
    return _finish(step, final, run)


def _cell_at(part, e) -> bool:
    match part:
        case Exists(x, PointsTo(addr, Var(name))) if name == x:
            return equal_mod_ac(addr, e)
    return False


def _any_cell(e, avoid) -> Assertion:
    name = fresh_name('x', set(avoid) | fv(e))
    return Exists(name, PointsTo(e, Var(name)))


# ---------------------------------------------------------------- recursive eval


def rec_parts(r: Assertion, e) -> tuple[tuple[str, ...], Triple, Assertion]:
    """R = μX.(e ↦ ∀y⃗.{P}_{Q} ∗ P0)⊗X 에서 (y⃗, 명세 삼중항, P0)"""
    match r:
        case Mu(x, (), Tensor(body, RelVar(name, ())), ()) if name == x:
            cell, p0 = remove_part(body, lambda part: _is_spec_cell(part, e))
            kk, spec = spec_cell(cell, e)
            ys, triple = peel(spec)
            if any(
                isinstance(node, RelVar) and node.name == x for node in subterms(triple)
            ):
                raise NoShape('a specification free of the recursion variable')
            return ys, Triple(triple.pre, Var(kk), triple.post), p0
    raise NoShape('mu X.(e |-> forall ys.{P}_{Q} * P0) (*) X')


def _circ_parts(p: Assertion) -> tuple[Assertion, Assertion]:
    match p:
        case Star(Tensor(inner, r), r2) if equal_mod_ac(r, r2):
            return inner, r
    raise NoShape('P o R')


@rule(RuleId.EVAL_REC)
def eval_rec(step: Step) -> Result:
    """{P∘R}eval [e]{Q∘R}, R = μX.(e ↦ ∀y⃗.{P}_{Q} ∗ P0)⊗X"""
    step.closed()
    step.count(0)
    e = step.param('e', _evaluated)
    r = step.param('R', lambda g: _circ_parts(as_triple(g).pre)[1])
    p = step.param('P', lambda g: _circ_parts(as_triple(g).pre)[0])
    q = step.param('Q', lambda g: _circ_parts(as_triple(g).post)[0])
    try:
        ys, triple, p0 = rec_parts(r, e)
    except NoShape as shape:
        raise step.fail(f'R must have the shape {shape}') from None
    context = _context(step, p, q, r, e)
    k = _fresh_k(p, q, r, e, avoid=context)
    try:
        terms = instance_terms(step, ys, triple, p, q, context)
    except NoShape:
        raise step.fail('the stored specification does not match {P}_{Q}') from None
    names = [name for t in terms for name in fv(t)]
    run = _Expansion(step.name, [*context, *names, k], step.budget)
    p_circ, q_circ = circ(p, r), circ(q, r)
    outer = tuple(name for t in terms for name in fv(t))
    s_k = forall_chain(outer, Triple(p_circ, Var(k), q_circ))
    cell = points_to_pred(e, k, s_k)
    p_eval = Star(Tensor(p, r), Tensor(p0, r))
    assumed = run(RuleId.HYP, {'A': s_k})
    body = run.instantiate(assumed, outer, [Var(y) for y in outer])
    weakened = run(
        RuleId.CONSEQ,
        {
            'e': Var(k),
            'P': p_circ,
            'Q': q_circ,
            'P1': Star(p_eval, cell),
            'Q1': q_circ,
            'auto': 'yes',
        },
    )
    inner = run(RuleId.IMP_E, {}, [weakened, body])
    evaluated = _eval_from(run, k, e, s_k, p_eval, q_circ, inner)
    code = Quote(EvalAt(e))
    rolled = run(
        RuleId.CONSEQ,
        {
            'e': code,
            'P': evaluated.goal.pre,
            'Q': q_circ,
            'P1': p_circ,
            'Q1': q_circ,
            'auto': 'yes',
        },
    )
    final = run(RuleId.IMP_E, {}, [rolled, evaluated])
    return _finish(step, final, run)
