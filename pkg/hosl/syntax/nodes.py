"""프로그램/단언 AST"""

from __future__ import annotations

from dataclasses import dataclass

# 식 (expressions)


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str  # '+', '-', '*'
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Quote:
    body: Command


# 명령 (commands)


@dataclass(frozen=True)
class Assign:
    target: Expr
    source: Expr


@dataclass(frozen=True)
class LetDeref:
    var: str
    addr: Expr
    body: Command


@dataclass(frozen=True)
class EvalAt:
    addr: Expr


@dataclass(frozen=True)
class LetNew:
    var: str
    inits: tuple[Expr, ...]
    body: Command

    def __post_init__(self):
        if not self.inits:
            raise ValueError('let-new needs at least one initialiser')


@dataclass(frozen=True)
class Free:
    addr: Expr


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Seq:
    first: Command
    second: Command


@dataclass(frozen=True)
class If:
    lhs: Expr
    rhs: Expr
    then: Command
    orelse: Command


# 단언 (assertions)


@dataclass(frozen=True)
class FalseAsn:
    pass


@dataclass(frozen=True)
class TrueAsn:
    pass


@dataclass(frozen=True)
class Or:
    left: Assertion
    right: Assertion


@dataclass(frozen=True)
class And:
    left: Assertion
    right: Assertion


@dataclass(frozen=True)
class Implies:
    left: Assertion
    right: Assertion


@dataclass(frozen=True)
class Forall:
    var: str
    body: Assertion


@dataclass(frozen=True)
class Exists:
    var: str
    body: Assertion


@dataclass(frozen=True)
class Eq:
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Leq:
    left: Expr
    right: Expr


@dataclass(frozen=True)
class PointsTo:
    addr: Expr
    value: Expr


@dataclass(frozen=True)
class Emp:
    pass


@dataclass(frozen=True)
class Star:
    left: Assertion
    right: Assertion


@dataclass(frozen=True)
class Triple:
    pre: Assertion
    code: Expr
    post: Assertion


@dataclass(frozen=True)
class Tensor:
    left: Assertion
    right: Assertion


@dataclass(frozen=True)
class RelVar:
    name: str
    args: tuple[Expr, ...] = ()


@dataclass(frozen=True)
class Mu:
    relvar: str
    params: tuple[str, ...]
    body: Assertion
    args: tuple[Expr, ...] = ()


@dataclass(frozen=True)
class Diamond:
    body: Assertion


Expr = IntLit | Var | BinOp | Quote
Command = Assign | LetDeref | EvalAt | LetNew | Free | Skip | Seq | If
Assertion = (
    FalseAsn
    | TrueAsn
    | Or
    | And
    | Implies
    | Forall
    | Exists
    | Eq
    | Leq
    | PointsTo
    | Emp
    | Star
    | Triple
    | Tensor
    | RelVar
    | Mu
    | Diamond
)
Ast = Expr | Command | Assertion

BINARY_ASSERTIONS = (Or, And, Implies, Star, Tensor)
QUANTIFIERS = (Forall, Exists)


@dataclass(frozen=True)
class Judgement:
    """Ξ;Γ;H ⊢ P"""

    relvars: tuple[tuple[str, int], ...]
    vars: tuple[str, ...]
    hyps: tuple[Assertion, ...]
    goal: Assertion

    def with_goal(self, goal: Assertion) -> Judgement:
        return Judgement(self.relvars, self.vars, self.hyps, goal)


def star_of(*parts: Assertion) -> Assertion:
    """왼쪽 결합 ∗ 체인, 빈 체인은 emp"""
    if not parts:
        return Emp()
    result = parts[0]
    for part in parts[1:]:
        result = Star(result, part)
    return result


def iff(left: Assertion, right: Assertion) -> Assertion:
    return And(Implies(left, right), Implies(right, left))


def circ(p: Assertion, r: Assertion) -> Assertion:
    """P∘R := (P⊗R)∗R"""
    return Star(Tensor(p, r), r)


def neq(left: Expr, right: Expr) -> Assertion:
    return Implies(Eq(left, right), FalseAsn())
