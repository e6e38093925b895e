"""건전하지 않은 규칙 목록과 그 반례"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Rejection:
    name: str
    citation: str
    counterexample: str
    superseded: bool = False

    def explain(self) -> str:
        label = 'superseded' if self.superseded else 'unsound'
        return f'{self.name} is {label}: {self.citation} ({self.counterexample})'


_REJECTED = (
    Rejection(
        'DeepFrameAxiom',
        'the axiom form {P}e{Q} => {P o R}e{Q o R} lets invariants be added '
        'selectively to nested triples and renders the logic unsound',
        "heap {1=0, 2='free(-1)', 3='skip'} with "
        "'let x = [2] in [3] := x ; eval [3]' is provable safe but faults",
    ),
    Rejection(
        'In',
        'phi => {P}e{Q} does not give {phi /\\ P}e{Q} for pseudo-pure phi',
        'with R = mu X.{X}skip{false} it derives {R}skip{false}; since '
        'emp => R holds, {emp}skip{false} would follow',
    ),
    Rejection(
        'In-T',
        'the triple instance of In, {A}d{B} => {P}e{Q} to '
        '{{A}d{B} /\\ P}e{Q}, does not hold',
        'same derivation as In with phi = {R}skip{false}',
    ),
    Rejection(
        'DiamondIn',
        'even the rank-tracking variant phi => <>{P}e{Q} to {phi /\\ P}e{Q} '
        'does not hold',
        'ranks are not preserved by *: h = h1.h2 may have rank(h1) < rank(h)',
    ),
    Rejection(
        'Conj',
        '{P2}e{Q2} /\\ {P1}e{Q1} => {P1 /\\ P2}e{Q1 /\\ Q2} is not sound, '
        'neither as an axiom nor as a rule, alongside higher-order frame rules',
        'it could only be restored by restricting to precise assertions',
    ),
    Rejection(
        'DoubleNegationElim',
        'a classical specification logic is inconsistent with the tensor frame '
        'rule',
        'framing false into ~{true}skip{false} derives ~~{true}skip{false} and '
        'hence {true}skip{false}',
    ),
    Rejection(
        'InvarianceNonPure',
        'invariance {P}e{Q} => {P /\\ psi}e{Q /\\ psi} only holds for pure psi',
        "{emp}'let x = new 0 in [x] := 'skip''{exists x. x |-> {emp}_{emp}} "
        'with invariant {emp}skip{false}, which only holds at rank 1',
    ),
    Rejection(
        'InvarianceR',
        'framing e1 |-> e2 /\\ phi for pseudo-pure phi is not invariant: the '
        'rank of the cell at e1 may grow',
        'e |-> e0 * (e1 |-> e0 /\\ phi) => (e |-> e0 /\\ phi) * (e1 |-> e0 /\\ phi) '
        'fails on a heap whose two cells carry different tags',
    ),
    Rejection(
        'OldEval',
        'the code-explicit eval rule was replaced by Eval, which abstracts the '
        'stored code by a specification R[k]',
        'use Eval (or EvalNonRec1, EvalNonRecUpd, EvalRec)',
        superseded=True,
    ),
)

REJECTED = {entry.name: entry for entry in _REJECTED}


def rejected_rule_info(name: str) -> str | None:
    entry = REJECTED.get(name)
    return None if entry is None else entry.explain()
