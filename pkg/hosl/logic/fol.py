"""직관주의 1차 논리 자연 연역 규칙"""

from __future__ import annotations

import logging

from hosl.logic.entail import reflexive, simplify
from hosl.logic.rules import (
    NoShape,
    Result,
    RuleId,
    Step,
    as_implies,
    rule,
)
from hosl.syntax import (
    And,
    Assertion,
    BinOp,
    Eq,
    Exists,
    FalseAsn,
    Forall,
    Implies,
    IntLit,
    Or,
    Quote,
    TrueAsn,
    Var,
    equal_mod_ac,
    fv,
    substitute,
)
from hosl.syntax.ops import subterms

logger = logging.getLogger(__name__)

_MAX_CANDIDATES = 64


def union_hyps(*groups) -> tuple[Assertion, ...]:
    merged: list[Assertion] = []
    for group in groups:
        for hyp in group:
            if all(not equal_mod_ac(hyp, seen) for seen in merged):
                merged.append(hyp)
    return tuple(merged)


def discharge(hyps, assumption: Assertion) -> tuple[Assertion, ...]:
    return tuple(hyp for hyp in hyps if not equal_mod_ac(hyp, assumption))


def instance_term(step: Step, body: Assertion, var: str, target: Assertion):
    """body[var:=t]가 target과 같아지는 t를 찾는다"""
    if var not in fv(body):
        return Var(var)
    seen = []
    for node in subterms(target):
        if isinstance(node, (IntLit, Var, BinOp, Quote)) and node not in seen:
            seen.append(node)
    for term in seen[:_MAX_CANDIDATES]:
        if step.same(substitute(body, {var: term}), target):
            return term
    raise NoShape(f'an instance of the bound variable {var}')


@rule(RuleId.HYP)
def hyp(step: Step) -> Result:
    step.count(0)
    a = step.param('A', _require)
    return Result(a, hyps=(a,))


def _require(g):
    if g is None:
        raise NoShape('a claimed conclusion')
    return g


@rule(RuleId.IMP_I)
def imp_i(step: Step) -> Result:
    step.count(1)
    a = step.param('A', lambda g: as_implies(g).left)
    premise = step.premises[0]
    return Result(Implies(a, premise.goal), hyps=discharge(premise.hyps, a))


@rule(RuleId.IMP_E)
def imp_e(step: Step) -> Result:
    step.count(2)
    major, minor = step.premises
    if not isinstance(major.goal, Implies):
        raise step.fail('first premise must be an implication')
    step.require(minor.goal, major.goal.left, 'second premise')
    return Result(major.goal.right, hyps=union_hyps(major.hyps, minor.hyps))


@rule(RuleId.AND_I)
def and_i(step: Step) -> Result:
    step.count(2)
    left, right = step.premises
    return Result(And(left.goal, right.goal), hyps=union_hyps(left.hyps, right.hyps))


def _and_e(step: Step, pick) -> Result:
    step.count(1)
    premise = step.premises[0]
    if not isinstance(premise.goal, And):
        raise step.fail('premise must be a conjunction')
    return Result(pick(premise.goal), hyps=premise.hyps)


@rule(RuleId.AND_E1)
def and_e1(step: Step) -> Result:
    return _and_e(step, lambda p: p.left)


@rule(RuleId.AND_E2)
def and_e2(step: Step) -> Result:
    return _and_e(step, lambda p: p.right)


@rule(RuleId.OR_I1)
def or_i1(step: Step) -> Result:
    step.count(1)
    premise = step.premises[0]
    b = step.param('B', lambda g: _or(g).right)
    return Result(Or(premise.goal, b), hyps=premise.hyps)


@rule(RuleId.OR_I2)
def or_i2(step: Step) -> Result:
    step.count(1)
    premise = step.premises[0]
    a = step.param('A', lambda g: _or(g).left)
    return Result(Or(a, premise.goal), hyps=premise.hyps)


def _or(g) -> Or:
    if isinstance(g, Or):
        return g
    raise NoShape('a disjunction')


@rule(RuleId.OR_E)
def or_e(step: Step) -> Result:
    step.count(3)
    cases, left, right = step.premises
    if not isinstance(cases.goal, Or):
        raise step.fail('first premise must be a disjunction')
    step.require(right.goal, left.goal, 'third premise')
    hyps = union_hyps(
        cases.hyps,
        discharge(left.hyps, cases.goal.left),
        discharge(right.hyps, cases.goal.right),
    )
    return Result(left.goal, hyps=hyps)


def _fresh_var(step: Step) -> str | None:
    if step.claimed is None:
        return None
    extra = set(step.premises[0].vars) - set(step.claimed.vars)
    return extra.pop() if len(extra) == 1 else None


@rule(RuleId.FORALL_I)
def forall_i(step: Step) -> Result:
    step.count(1)
    premise = step.premises[0]

    def eigen(g):
        name = _fresh_var(step)
        if name is not None:
            return name
        if isinstance(g, Forall):
            return g.var
        raise NoShape('a universal quantification')

    x = step.param('x', eigen)
    if x in fv(*premise.hyps):
        raise step.violated(f'{x} not free in the hypotheses')
    return Result(Forall(x, premise.goal), hyps=premise.hyps, bound=frozenset({x}))


@rule(RuleId.FORALL_E)
def forall_e(step: Step) -> Result:
    step.count(1)
    premise = step.premises[0]
    if not isinstance(premise.goal, Forall):
        raise step.fail('premise must be universally quantified')
    x, body = premise.goal.var, premise.goal.body
    t = step.param('t', lambda g: instance_term(step, body, x, _require(g)))
    if step.claimed is not None and fv(t) - set(step.claimed.vars):
        raise step.violated('the instance term must be well-scoped')
    return Result(substitute(body, {x: t}), hyps=premise.hyps)


@rule(RuleId.EXISTS_I)
def exists_i(step: Step) -> Result:
    step.count(1)
    premise = step.premises[0]

    def quantified(g):
        if isinstance(g, Exists):
            return g
        raise NoShape('an existential quantification')

    x = step.param('x', lambda g: quantified(g).var)
    p = step.param('P', lambda g: quantified(g).body)
    t = step.param('t', lambda _: instance_term(step, p, x, premise.goal))
    step.require(premise.goal, substitute(p, {x: t}), 'premise')
    return Result(Exists(x, p), hyps=premise.hyps)


@rule(RuleId.EXISTS_E)
def exists_e(step: Step) -> Result:
    step.count(2)
    witness, use = step.premises
    if not isinstance(witness.goal, Exists):
        raise step.fail('first premise must be existentially quantified')
    x, body = witness.goal.var, witness.goal.body
    name = step.param('x', lambda _: x)
    if name != x:
        body = substitute(body, {x: Var(name)})
    rest = discharge(use.hyps, body)
    if name in fv(use.goal, *rest, *witness.hyps):
        raise step.violated(f'{name} not free in the conclusion or hypotheses')
    return Result(
        use.goal, hyps=union_hyps(witness.hyps, rest), bound=frozenset({name})
    )


@rule(RuleId.TRUE_I)
def true_i(step: Step) -> Result:
    step.count(0)
    return Result(TrueAsn())


@rule(RuleId.FALSE_E)
def false_e(step: Step) -> Result:
    step.count(1)
    premise = step.premises[0]
    if premise.goal != FalseAsn():
        raise step.fail('premise must be false')
    a = step.param('A', _require)
    return Result(a, hyps=premise.hyps)


@rule(RuleId.EQ_REFL)
def eq_refl(step: Step) -> Result:
    step.count(0)

    def side(g):
        if isinstance(g, Eq):
            return g.left
        raise NoShape('an equation')

    e = step.param('e', side)
    e1 = step.param('e1', lambda g: g.right if isinstance(g, Eq) else e)
    if not reflexive(e, e1):
        raise step.violated('both sides must be the same expression')
    return Result(Eq(e, e1))


@rule(RuleId.EQ_SUBST)
def eq_subst(step: Step) -> Result:
    step.count(2)
    equation, source = step.premises
    if not isinstance(equation.goal, Eq):
        raise step.fail('first premise must be an equation')
    e0, e1 = equation.goal.left, equation.goal.right
    x = step.param('x')
    p = step.param('P')
    step.require(source.goal, substitute(p, {x: e0}), 'second premise')
    return Result(substitute(p, {x: e1}), hyps=union_hyps(equation.hyps, source.hyps))


@rule(RuleId.ARITH_FACT)
def arith_fact(step: Step) -> Result:
    step.count(0)
    a = step.param('A', _require)
    if fv(a):
        raise step.violated('arithmetic facts must be closed')
    if simplify(a) != TrueAsn():
        raise step.violated('the fact does not evaluate to true')
    return Result(a)
