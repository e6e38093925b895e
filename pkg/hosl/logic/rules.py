"""증명 규칙: 규칙마다 하나의 생성 함수"""

from __future__ import annotations

import logging
import re
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

from hosl.errors import (
    HoslError,
    SchemaMismatch,
    SideConditionViolation,
    UnknownRule,
)
from hosl.logic.entail import DEFAULT_BUDGET, entail_basic, equivalent
from hosl.logic.registry import REJECTED
from hosl.syntax import (
    And,
    Assertion,
    Assign,
    BinOp,
    Diamond,
    Emp,
    Eq,
    EvalAt,
    Exists,
    FalseAsn,
    Forall,
    Free,
    If,
    Implies,
    IntLit,
    Judgement,
    Leq,
    LetDeref,
    LetNew,
    Mu,
    Or,
    PointsTo,
    Purity,
    Quote,
    RelDef,
    RelVar,
    Seq,
    Skip,
    Star,
    Tensor,
    TrueAsn,
    Triple,
    Var,
    circ,
    classify,
    contractive_in,
    equal_mod_ac,
    free_vars,
    fv,
    iff,
    neq,
    parse,
    star_of,
    substitute,
    unfold_mu,
)
from hosl.syntax.ops import points_to_any, points_to_pred, subterms

logger = logging.getLogger(__name__)


class RuleId(str, Enum):
    STAR_ASSOC = 'StarAssoc'
    STAR_COMM = 'StarComm'
    STAR_UNIT = 'StarUnit'
    STAR_ZERO = 'StarZero'
    STAR_OVERLAP = 'StarOverlap'
    STAR_MONO = 'StarMono'
    TENSOR_MONO = 'TensorMono'
    DEREF = 'Deref'
    UPDATE = 'Update'
    UPDATE_INV = 'UpdateInv'
    NEW = 'New'
    FREE = 'Free'
    IF = 'If'
    SKIP = 'Skip'
    SEQ = 'Seq'
    EVAL = 'Eval'
    CONSEQ = 'Conseq'
    DISJ = 'Disj'
    EXIST_AUX = 'ExistAux'
    INVARIANCE = 'Invariance'
    TENSOR_FRAME = 'TensorFrame'
    STAR_FRAME = 'StarFrame'
    R_UNIQUE = 'RUnique'
    MU_UNFOLD = 'MuUnfold'
    DIST_TRIPLE = 'DistTriple'
    DIST_TENSOR_TENSOR = 'DistTensorTensor'
    DIST_QUANT = 'DistQuant'
    DIST_BIN_OP = 'DistBinOp'
    DIST_ATOM = 'DistAtom'
    OUT = 'Out'
    DIAMOND_OUT = 'DiamondOut'
    DIAMOND_E = 'DiamondE'
    EVAL_NON_REC1 = 'EvalNonRec1'
    EVAL_NON_REC_UPD = 'EvalNonRecUpd'
    EVAL_REC = 'EvalRec'
    HYP = 'Hyp'
    IMP_I = 'ImpI'
    IMP_E = 'ImpE'
    AND_I = 'AndI'
    AND_E1 = 'AndE1'
    AND_E2 = 'AndE2'
    OR_I1 = 'OrI1'
    OR_I2 = 'OrI2'
    OR_E = 'OrE'
    FORALL_I = 'ForallI'
    FORALL_E = 'ForallE'
    EXISTS_I = 'ExistsI'
    EXISTS_E = 'ExistsE'
    TRUE_I = 'TrueI'
    FALSE_E = 'FalseE'
    EQ_REFL = 'EqRefl'
    EQ_SUBST = 'EqSubst'
    ARITH_FACT = 'ArithFact'


FOL_RULES = frozenset(
    {
        RuleId.HYP,
        RuleId.IMP_I,
        RuleId.IMP_E,
        RuleId.AND_I,
        RuleId.AND_E1,
        RuleId.AND_E2,
        RuleId.OR_I1,
        RuleId.OR_I2,
        RuleId.OR_E,
        RuleId.FORALL_I,
        RuleId.FORALL_E,
        RuleId.EXISTS_I,
        RuleId.EXISTS_E,
        RuleId.TRUE_I,
        RuleId.FALSE_E,
        RuleId.EQ_REFL,
        RuleId.EQ_SUBST,
        RuleId.ARITH_FACT,
    }
)
DERIVED_RULES = frozenset(
    {
        RuleId.TENSOR_MONO,
        RuleId.EVAL_NON_REC1,
        RuleId.EVAL_NON_REC_UPD,
        RuleId.EVAL_REC,
    }
)


@dataclass(frozen=True)
class ProofNode:
    rule: str
    params: Mapping[str, object] = field(default_factory=dict)
    premises: tuple[ProofNode, ...] = ()
    conclusion: Judgement | None = None


@dataclass(frozen=True)
class CheckReport:
    failures: tuple[tuple[str, str], ...] = ()
    stats: Mapping[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures


class Result(NamedTuple):
    goal: Assertion
    hyps: tuple[Assertion, ...] = ()
    bound: frozenset[str] = frozenset()


RULES: dict[RuleId, Callable[[Step], Result]] = {}


def rule(rule_id: RuleId):
    def register(fn):
        RULES[rule_id] = fn
        return fn

    return register


# ---------------------------------------------------------------- parameters

_EXPR_PARAMS = frozenset({'e', 'e0', 'e1', 'e2', 't'})
_NAME_PARAMS = frozenset({'x', 'k', 'X', 'y'})
_RAW_PARAMS = frozenset({'dir', 'auto'})
_IDENT = re.compile(r'^[A-Za-z_][A-Za-z0-9_]*$')


def _split_top(text: str) -> list[str]:
    """괄호, 인용 밖의 쉼표로 나눈다"""
    parts, depth, quoted, current = [], 0, False, []
    for ch in text:
        if ch == "'":
            quoted = not quoted
        elif not quoted and ch in '({[':
            depth += 1
        elif not quoted and ch in ')}]':
            depth -= 1
        if ch == ',' and depth == 0 and not quoted:
            parts.append(''.join(current))
            current = []
        else:
            current.append(ch)
    parts.append(''.join(current))
    return [part.strip() for part in parts if part.strip()]


def parse_param(name: str, value):
    if not isinstance(value, str):
        return value
    if name in _RAW_PARAMS:
        return value.strip()
    if name in _NAME_PARAMS:
        if not _IDENT.match(value.strip()):
            raise SchemaMismatch(name, f'expected an identifier, got {value!r}')
        return value.strip()
    if name == 'ys':
        names = tuple(re.split(r'[\s,]+', value.strip())) if value.strip() else ()
        for item in names:
            if not _IDENT.match(item):
                raise SchemaMismatch(name, f'expected identifiers, got {value!r}')
        return names
    if name == 'inits':
        return tuple(parse(part, 'expr') for part in _split_top(value))
    if name in _EXPR_PARAMS:
        return parse(value, 'expr')
    return parse(value, 'assertion')


class NoShape(Exception):
    """추론 대상이 기대한 모양이 아님"""


def as_triple(p) -> Triple:
    if isinstance(p, Triple):
        return p
    raise NoShape('a triple')


def as_implies(p) -> Implies:
    if isinstance(p, Implies):
        return p
    raise NoShape('an implication')


def command_of(t: Triple):
    if isinstance(t.code, Quote):
        return t.code.body
    raise NoShape('a quoted command')


def star_parts(p: Assertion) -> list[Assertion]:
    if isinstance(p, Star):
        return star_parts(p.left) + star_parts(p.right)
    if isinstance(p, Emp):
        return []
    return [p]


def remove_part(p: Assertion, wanted: Callable[[Assertion], bool]):
    """∗ 조각 중 wanted를 만족하는 첫 조각과 나머지"""
    parts = star_parts(p)
    for i, part in enumerate(parts):
        if wanted(part):
            return part, star_of(*(parts[:i] + parts[i + 1 :]))
    raise NoShape('a matching separating conjunct')


def cell_address(p: Assertion):
    match p:
        case PointsTo(addr, _):
            return addr
        case Exists(var, PointsTo(addr, Var(name))) if name == var:
            return addr
        case Exists(var, And(PointsTo(addr, Var(name)), _)) if name == var:
            return addr
    return None


class Step:
    """규칙 한 번 적용의 입력"""

    def __init__(
        self,
        name: str,
        params: Mapping[str, object],
        premises: Sequence[Judgement],
        claimed: Judgement | None,
        budget: int = DEFAULT_BUDGET,
    ):
        self.name = name
        self.raw = dict(params)
        self.premises = tuple(premises)
        self.claimed = claimed
        self.budget = budget
        self._cache: dict[str, object] = {}

    def fail(self, detail: str) -> SchemaMismatch:
        return SchemaMismatch(self.name, detail)

    def violated(self, condition: str) -> SideConditionViolation:
        return SideConditionViolation(self.name, condition)

    def has(self, key: str) -> bool:
        return key in self.raw or key in self._cache

    def param(
        self, key: str, infer: Callable[[Assertion | None], object] | None = None
    ):
        """스크립트 값이 없으면 infer(주장된 결론)으로 추론"""
        if key in self._cache:
            return self._cache[key]
        if key in self.raw:
            try:
                value = parse_param(key, self.raw[key])
            except SchemaMismatch:
                raise
            except HoslError as err:
                raise self.fail(f'parameter {key}: {err}') from err
        elif infer is not None:
            goal = self.claimed.goal if self.claimed is not None else None
            try:
                value = infer(goal)
            except NoShape as shape:
                raise self.fail(f'cannot infer parameter {key}: not {shape}') from None
        else:
            raise self.fail(f'missing parameter {key}')
        self._cache[key] = value
        return value

    def count(self, n: int) -> None:
        if len(self.premises) != n:
            raise self.fail(f'expected {n} premise(s), got {len(self.premises)}')

    def closed(self) -> None:
        """명제 규칙이 아닌 규칙의 전제는 가정이 없어야 한다"""
        for i, premise in enumerate(self.premises, start=1):
            if premise.hyps:
                raise self.violated(f'premise {i} must be hypothesis-free')

    def goal(self, i: int) -> Assertion:
        return self.premises[i].goal

    def same(self, p: Assertion, q: Assertion) -> bool:
        return equivalent(p, q, self.budget)

    def require(self, got: Assertion, expected: Assertion, what: str) -> None:
        if not self.same(got, expected):
            raise self.fail(f'{what} does not have the required shape')


def _rel_context(asts) -> tuple[tuple[str, int], ...]:
    arities: dict[str, int] = {}
    for ast in asts:
        free = free_vars(ast)[1]
        for node in subterms(ast):
            if isinstance(node, RelVar) and node.name in free:
                arities.setdefault(node.name, len(node.args))
    return tuple(sorted(arities.items()))


def apply_rule(
    rule_name: RuleId | str,
    params: Mapping[str, object] | None = None,
    premises: Sequence[Judgement] = (),
    claimed: Judgement | None = None,
    *,
    vars: Sequence[str] | None = None,
    admit_unsound: bool = False,
    budget: int = DEFAULT_BUDGET,
) -> Judgement:
    """전제로부터 결론 판단을 만든다"""
    name = rule_name.value if isinstance(rule_name, RuleId) else str(rule_name)
    if name in REJECTED:
        if not (admit_unsound and name == 'In'):
            raise UnknownRule(name, REJECTED[name].explain())
        logger.warning('admitting the unsound rule In for demonstration')
        fn = admitted_in
    else:
        try:
            fn = RULES[RuleId(name)]
        except (ValueError, KeyError):
            raise UnknownRule(name) from None
    step = Step(name, params or {}, premises, claimed, budget)
    result = fn(step)
    if claimed is not None:
        context = tuple(claimed.vars)
        relvars = tuple(claimed.relvars)
    else:
        context = tuple(vars) if vars is not None else tuple(
            sorted(fv(result.goal, *result.hyps))
        )
        relvars = _rel_context([result.goal, *result.hyps])
    allowed = set(context) | set(result.bound)
    for i, premise in enumerate(step.premises, start=1):
        loose = fv(premise.goal, *premise.hyps) - allowed
        if loose:
            raise SideConditionViolation(
                name,
                f'premise {i} uses {", ".join(sorted(loose))} '
                'outside the conclusion context',
            )
    logger.debug('applied %s', name)
    return Judgement(relvars, context, tuple(result.hyps), result.goal)


# ---------------------------------------------------------------- equivalences


def _direction(goal: Assertion, wanted: str | None):
    """결론에서 (방향, 법칙의 왼쪽 후보)들"""
    options = []
    match goal:
        case And(Implies(a, _), Implies(_, _)):
            options.append(('iff', a))
    match goal:
        case Implies(a, b):
            options.extend([('lr', a), ('rl', b)])
    if wanted is not None:
        options = [option for option in options if option[0] == wanted]
    return options


def equivalence(
    step: Step,
    names: Sequence[str],
    extract: Callable[[Assertion], dict],
    build: Callable[[dict], tuple[Assertion, Assertion]],
    check: Callable[[dict], None] | None = None,
) -> Result:
    """L ⇔ R 꼴 공리: dir이 lr, rl, iff 중 하나"""
    step.closed()
    step.count(0)
    wanted = step.param('dir') if step.has('dir') else None
    if wanted not in (None, 'lr', 'rl', 'iff'):
        raise step.fail(f"dir must be lr, rl or iff, got {wanted!r}")
    given = {key: step.param(key) for key in names if step.has(key)}
    candidates = []
    if step.claimed is not None:
        for direction, lhs in _direction(step.claimed.goal, wanted):
            try:
                found = extract(lhs)
            except NoShape:
                continue
            candidates.append((direction, {**found, **given}))
    if len(given) == len(names):
        for direction in [wanted] if wanted else ['iff', 'lr', 'rl']:
            candidates.append((direction, given))
    if not candidates:
        raise step.fail('cannot determine the instance of the law')
    built = None
    for direction, values in candidates:
        missing = [key for key in names if key not in values]
        if missing:
            continue
        lhs, rhs = build(values)
        goal = {
            'iff': iff(lhs, rhs),
            'lr': Implies(lhs, rhs),
            'rl': Implies(rhs, lhs),
        }[direction]
        if built is None:
            built = (goal, values)
        if step.claimed is None or step.same(goal, step.claimed.goal):
            built = (goal, values)
            break
    if built is None:
        raise step.fail('cannot determine the instance of the law')
    if check is not None:
        check(built[1])
    return Result(built[0])


def _shape(found: bool, what: str) -> None:
    if not found:
        raise NoShape(what)


@rule(RuleId.STAR_ASSOC)
def star_assoc(step: Step) -> Result:
    def extract(lhs):
        match lhs:
            case Star(p, Star(q, r)):
                return {'P': p, 'Q': q, 'R': r}
        raise NoShape('P * (Q * R)')

    def build(v):
        return Star(v['P'], Star(v['Q'], v['R'])), Star(Star(v['P'], v['Q']), v['R'])

    return equivalence(step, ('P', 'Q', 'R'), extract, build)


@rule(RuleId.STAR_COMM)
def star_comm(step: Step) -> Result:
    def extract(lhs):
        match lhs:
            case Star(p, q):
                return {'P': p, 'Q': q}
        raise NoShape('P * Q')

    return equivalence(
        step,
        ('P', 'Q'),
        extract,
        lambda v: (Star(v['P'], v['Q']), Star(v['Q'], v['P'])),
    )


@rule(RuleId.STAR_UNIT)
def star_unit(step: Step) -> Result:
    def extract(lhs):
        match lhs:
            case Star(p, Emp()):
                return {'P': p}
        raise NoShape('P * emp')

    return equivalence(step, ('P',), extract, lambda v: (Star(v['P'], Emp()), v['P']))


@rule(RuleId.STAR_ZERO)
def star_zero(step: Step) -> Result:
    def extract(lhs):
        match lhs:
            case Star(p, FalseAsn()):
                return {'P': p}
        raise NoShape('P * false')

    return equivalence(
        step, ('P',), extract, lambda v: (Star(v['P'], FalseAsn()), FalseAsn())
    )


@rule(RuleId.STAR_OVERLAP)
def star_overlap(step: Step) -> Result:
    def extract(lhs):
        match lhs:
            case Star(PointsTo(a, v1), PointsTo(b, v2)) if equal_mod_ac(a, b):
                return {'e': a, 'e1': v1, 'e2': v2}
        raise NoShape('e |-> e1 * e |-> e2')

    def build(v):
        cells = Star(PointsTo(v['e'], v['e1']), PointsTo(v['e'], v['e2']))
        return cells, FalseAsn()

    return equivalence(step, ('e', 'e1', 'e2'), extract, build)


@rule(RuleId.MU_UNFOLD)
def mu_unfold(step: Step) -> Result:
    def extract(lhs):
        if isinstance(lhs, Mu):
            return {'P': lhs}
        raise NoShape('a recursive assertion')

    def build(v):
        mu = v['P']
        if not isinstance(mu, Mu):
            raise step.fail('MuUnfold needs a recursive assertion')
        if not contractive_in(mu.body, mu.relvar):
            raise step.violated(f'body not formally contractive in {mu.relvar}')
        return mu, unfold_mu(mu)

    return equivalence(step, ('P',), extract, build)


@rule(RuleId.DIST_TRIPLE)
def dist_triple(step: Step) -> Result:
    def extract(lhs):
        match lhs:
            case Tensor(Triple(p, e, q), r):
                return {'P': p, 'e': e, 'Q': q, 'R': r}
        raise NoShape('{P}e{Q} (*) R')

    def build(v):
        p, e, q, r = v['P'], v['e'], v['Q'], v['R']
        return Tensor(Triple(p, e, q), r), Triple(circ(p, r), e, circ(q, r))

    return equivalence(step, ('P', 'e', 'Q', 'R'), extract, build)


@rule(RuleId.DIST_TENSOR_TENSOR)
def dist_tensor_tensor(step: Step) -> Result:
    def extract(lhs):
        match lhs:
            case Tensor(Tensor(p, r1), r):
                return {'P': p, 'S': r1, 'R': r}
        raise NoShape("(P (*) R') (*) R")

    def build(v):
        p, r1, r = v['P'], v['S'], v['R']
        return Tensor(Tensor(p, r1), r), Tensor(p, circ(r1, r))

    return equivalence(step, ('P', 'S', 'R'), extract, build)


@rule(RuleId.DIST_QUANT)
def dist_quant(step: Step) -> Result:
    def extract(lhs):
        match lhs:
            case Tensor(Forall() | Exists() as q, r):
                return {'P': q, 'R': r}
        raise NoShape('(forall x. P) (*) R or (exists x. P) (*) R')

    def build(v):
        q, r = v['P'], v['R']
        if not isinstance(q, (Forall, Exists)):
            raise step.fail('DistQuant needs a quantified assertion')
        if q.var in fv(r):
            raise step.violated(f'{q.var} not in fv(R)')
        return Tensor(q, r), type(q)(q.var, Tensor(q.body, r))

    return equivalence(step, ('P', 'R'), extract, build)


@rule(RuleId.DIST_BIN_OP)
def dist_bin_op(step: Step) -> Result:
    def extract(lhs):
        match lhs:
            case Tensor(Implies() | And() | Or() | Star() as p, r):
                return {'P': p, 'R': r}
        raise NoShape('(P op Q) (*) R')

    def build(v):
        p, r = v['P'], v['R']
        if not isinstance(p, (Implies, And, Or, Star)):
            raise step.fail('DistBinOp needs =>, /\\, \\/ or * under the tensor')
        return Tensor(p, r), type(p)(Tensor(p.left, r), Tensor(p.right, r))

    return equivalence(step, ('P', 'R'), extract, build)


_ATOMS = (TrueAsn, FalseAsn, Emp, Eq, Leq, PointsTo)


@rule(RuleId.DIST_ATOM)
def dist_atom(step: Step) -> Result:
    def extract(lhs):
        match lhs:
            case Tensor(p, r) if isinstance(p, _ATOMS):
                return {'P': p, 'R': r}
        raise NoShape('atom (*) R')

    def build(v):
        p, r = v['P'], v['R']
        if not isinstance(p, _ATOMS):
            raise step.fail('DistAtom needs true, false, emp, =, <= or |->')
        return Tensor(p, r), p

    return equivalence(step, ('P', 'R'), extract, build)


# ---------------------------------------------------------------- separation


@rule(RuleId.STAR_MONO)
def star_mono(step: Step) -> Result:
    step.closed()
    step.count(2)
    first, second = step.goal(0), step.goal(1)
    if not isinstance(first, Implies) or not isinstance(second, Implies):
        raise step.fail('premises must be implications')
    return Result(
        Implies(Star(first.left, second.left), Star(first.right, second.right))
    )


# ---------------------------------------------------------------- commands


@rule(RuleId.SKIP)
def skip(step: Step) -> Result:
    step.closed()
    step.count(0)
    p = step.param('P', lambda g: as_triple(g).pre)
    return Result(Triple(p, Quote(Skip()), p))


@rule(RuleId.UPDATE)
def update(step: Step) -> Result:
    step.closed()
    step.count(0)

    def assign(g):
        c = command_of(as_triple(g))
        _shape(isinstance(c, Assign), 'an update')
        return c

    e = step.param('e', lambda g: assign(g).target)
    e0 = step.param('e0', lambda g: assign(g).source)

    def frame(g):
        _, rest = remove_part(
            as_triple(g).pre, lambda part: _addr_is(part, e)
        )
        return rest

    p = step.param('P', frame)
    pre = Star(points_to_any(e, fv(p, e0)), p)
    return Result(Triple(pre, Quote(Assign(e, e0)), Star(PointsTo(e, e0), p)))


def _addr_is(part: Assertion, e) -> bool:
    addr = cell_address(part)
    return addr is not None and equal_mod_ac(addr, e)


@rule(RuleId.UPDATE_INV)
def update_inv(step: Step) -> Result:
    step.closed()
    step.count(0)

    def assign(g):
        c = command_of(as_triple(g))
        _shape(isinstance(c, Assign), 'an update')
        return c

    e = step.param('e', lambda g: assign(g).target)
    e0 = step.param('e0', lambda g: assign(g).source)

    def guarded_cell(g):
        part, _ = remove_part(
            as_triple(g).pre,
            lambda part: isinstance(part, And) and isinstance(part.left, PointsTo),
        )
        return part

    e1 = step.param('e1', lambda g: guarded_cell(g).left.addr)
    phi = step.param('phi', lambda g: guarded_cell(g).right)
    if classify(phi) is Purity.GENERAL:
        raise step.violated('phi must be pseudo-pure')
    other = And(PointsTo(e1, e0), phi)
    pre = Star(points_to_any(e, fv(e0, e1, phi)), other)
    post = Star(And(PointsTo(e, e0), phi), other)
    return Result(Triple(pre, Quote(Assign(e, e0)), post))


@rule(RuleId.FREE)
def free(step: Step) -> Result:
    step.closed()
    step.count(0)

    def target(g):
        c = command_of(as_triple(g))
        _shape(isinstance(c, Free), 'a free command')
        return c.addr

    e = step.param('e', target)
    p = step.param('P', lambda g: as_triple(g).post)
    return Result(Triple(Star(points_to_any(e, fv(p)), p), Quote(Free(e)), p))


@rule(RuleId.SEQ)
def seq(step: Step) -> Result:
    step.closed()
    step.count(2)
    first, second = as_shape(step, step.goal(0)), as_shape(step, step.goal(1))
    step.require(second.pre, first.post, 'the intermediate assertion')
    c, d = _body(step, first), _body(step, second)
    return Result(Triple(first.pre, Quote(Seq(c, d)), second.post))


def as_shape(step: Step, p: Assertion) -> Triple:
    if not isinstance(p, Triple):
        raise step.fail('premise must be a triple')
    return p


def _body(step: Step, t: Triple):
    if not isinstance(t.code, Quote):
        raise step.fail('premise triple must run a quoted command')
    return t.code.body


@rule(RuleId.IF)
def if_rule(step: Step) -> Result:
    step.closed()
    step.count(2)
    then, orelse = as_shape(step, step.goal(0)), as_shape(step, step.goal(1))
    match then.pre:
        case And(p, Eq(e0, e1)):
            pass
        case _:
            raise step.fail("first premise needs the precondition 'P /\\ e0 = e1'")
    step.require(orelse.pre, And(p, neq(e0, e1)), 'second precondition')
    step.require(orelse.post, then.post, 'second postcondition')
    code = If(e0, e1, _body(step, then), _body(step, orelse))
    return Result(Triple(p, Quote(code), then.post))


@rule(RuleId.DEREF)
def deref(step: Step) -> Result:
    step.closed()
    step.count(1)
    premise = as_shape(step, step.goal(0))

    def let(g):
        c = command_of(as_triple(g))
        _shape(isinstance(c, LetDeref), 'a dereference')
        return c

    x = step.param('x', lambda g: let(g).var)
    e = step.param('e', lambda g: let(g).addr)
    try:
        remove_part(
            premise.pre,
            lambda part: equal_mod_ac(part, PointsTo(e, Var(x))),
        )
    except NoShape:
        raise step.fail(f'premise precondition needs the conjunct e |-> {x}') from None
    if x in fv(e, premise.post):
        raise step.violated(f'{x} not in fv(e, Q)')
    code = LetDeref(x, e, _body(step, premise))
    return Result(
        Triple(Exists(x, premise.pre), Quote(code), premise.post), bound=frozenset({x})
    )


def cells_of(x: str, inits) -> list[Assertion]:
    cells = []
    for i, init in enumerate(inits):
        addr = Var(x) if i == 0 else BinOp('+', Var(x), IntLit(i))
        cells.append(PointsTo(addr, init))
    return cells


@rule(RuleId.NEW)
def new(step: Step) -> Result:
    step.closed()
    step.count(1)
    premise = as_shape(step, step.goal(0))

    def let(g):
        c = command_of(as_triple(g))
        _shape(isinstance(c, LetNew), 'an allocation')
        return c

    x = step.param('x', lambda g: let(g).var)
    inits = step.param('inits', lambda g: let(g).inits)
    if isinstance(inits, tuple) and not inits:
        raise step.fail('allocation needs at least one initialiser')
    parts = star_parts(premise.pre)
    for cell in cells_of(x, inits):
        for i, part in enumerate(parts):
            if equal_mod_ac(part, cell):
                del parts[i]
                break
        else:
            raise step.fail(f'premise precondition lacks the cell {cell}')
    p = star_of(*parts)
    if x in fv(p, *inits, premise.post):
        raise step.violated(f'{x} not in fv(P, e, Q)')
    code = LetNew(x, tuple(inits), _body(step, premise))
    return Result(Triple(p, Quote(code), premise.post), bound=frozenset({x}))


@rule(RuleId.EVAL)
def eval_rule(step: Step) -> Result:
    step.closed()
    step.count(1)
    premise = step.goal(0)
    if not isinstance(premise, Implies) or not isinstance(premise.right, Triple):
        raise step.fail('premise must be R[k] => {P * e |-> R[_]}k{Q}')
    body = premise.right

    def evaluated(g):
        c = command_of(as_triple(g))
        _shape(isinstance(c, EvalAt), 'an eval command')
        return c.addr

    def code_var(_):
        if step.claimed is not None:
            extra = set(step.premises[0].vars) - set(step.claimed.vars)
            if len(extra) == 1:
                return extra.pop()
        if isinstance(body.code, Var):
            return body.code.name
        raise NoShape('a premise naming the code variable k')

    e = step.param('e', evaluated)
    k = step.param('k', code_var)
    r = step.param('R', lambda _: premise.left)
    pred = points_to_pred(e, k, r)

    def frame(g):
        pre = as_triple(g).pre if g is not None else body.pre
        _, rest = remove_part(pre, lambda part: step.same(part, pred))
        return rest

    p = step.param('P', frame)
    q = step.param('Q', lambda g: as_triple(g).post if g is not None else body.post)
    expected = Implies(r, Triple(Star(p, pred), Var(k), q))
    step.require(premise, expected, 'premise')
    if k in fv(e, p, q):
        raise step.violated(f'{k} not in fv(P, e, Q)')
    return Result(Triple(Star(p, pred), Quote(EvalAt(e)), q), bound=frozenset({k}))


# ---------------------------------------------------------------- structural


def _triple_pair(g) -> tuple[Triple, Triple]:
    imp = as_implies(g)
    return as_triple(imp.left), as_triple(imp.right)


@rule(RuleId.CONSEQ)
def conseq(step: Step) -> Result:
    step.closed()
    e = step.param('e', lambda g: _triple_pair(g)[0].code)
    auto = step.param('auto') if step.has('auto') else None
    if auto is not None:
        step.count(0)
        p = step.param('P', lambda g: _triple_pair(g)[0].pre)
        q = step.param('Q', lambda g: _triple_pair(g)[0].post)
        p1 = step.param('P1', lambda g: _triple_pair(g)[1].pre)
        q1 = step.param('Q1', lambda g: _triple_pair(g)[1].post)
        if not entail_basic(p1, p, step.budget):
            raise step.violated("cannot discharge P' => P automatically")
        if not entail_basic(q, q1, step.budget):
            raise step.violated("cannot discharge Q => Q' automatically")
    else:
        step.count(2)
        strengthen, weaken = step.goal(0), step.goal(1)
        if not isinstance(strengthen, Implies) or not isinstance(weaken, Implies):
            raise step.fail("premises must be P' => P and Q => Q'")
        p1, p = strengthen.left, strengthen.right
        q, q1 = weaken.left, weaken.right
    return Result(Implies(Triple(p, e, q), Triple(p1, e, q1)))


@rule(RuleId.DISJ)
def disj(step: Step) -> Result:
    step.closed()
    step.count(0)

    def pair(g):
        imp = as_implies(g)
        _shape(isinstance(imp.left, And), 'a conjunction of triples')
        return as_triple(imp.left.left), as_triple(imp.left.right)

    e = step.param('e', lambda g: pair(g)[0].code)
    p = step.param('P', lambda g: pair(g)[0].pre)
    q = step.param('Q', lambda g: pair(g)[0].post)
    p1 = step.param('P1', lambda g: pair(g)[1].pre)
    q1 = step.param('Q1', lambda g: pair(g)[1].post)
    left = And(Triple(p, e, q), Triple(p1, e, q1))
    return Result(Implies(left, Triple(Or(p, p1), e, Or(q, q1))))


@rule(RuleId.EXIST_AUX)
def exist_aux(step: Step) -> Result:
    step.closed()
    step.count(0)

    def inner(g):
        imp = as_implies(g)
        _shape(isinstance(imp.left, Forall), 'a universally quantified triple')
        return imp.left.var, as_triple(imp.left.body)

    x = step.param('x', lambda g: inner(g)[0])
    e = step.param('e', lambda g: inner(g)[1].code)
    p = step.param('P', lambda g: inner(g)[1].pre)
    q = step.param('Q', lambda g: inner(g)[1].post)
    if x in fv(e):
        raise step.violated(f'{x} not in fv(e)')
    return Result(
        Implies(Forall(x, Triple(p, e, q)), Triple(Exists(x, p), e, Exists(x, q)))
    )


@rule(RuleId.INVARIANCE)
def invariance(step: Step) -> Result:
    step.closed()
    step.count(0)

    def invariant(g):
        _, right = _triple_pair(g)
        _shape(isinstance(right.pre, And), 'a conjunction with the invariant')
        return right.pre.right

    e = step.param('e', lambda g: _triple_pair(g)[0].code)
    p = step.param('P', lambda g: _triple_pair(g)[0].pre)
    q = step.param('Q', lambda g: _triple_pair(g)[0].post)
    psi = step.param('psi', invariant)
    if classify(psi) is not Purity.PURE:
        raise step.violated('psi must be pure')
    return Result(
        Implies(Triple(p, e, q), Triple(And(p, psi), e, And(q, psi)))
    )


@rule(RuleId.TENSOR_FRAME)
def tensor_frame(step: Step) -> Result:
    step.closed()
    step.count(1)

    def frame(g):
        _shape(isinstance(g, Tensor), 'a tensor')
        return g.right

    r = step.param('R', frame)
    return Result(Tensor(step.goal(0), r))


@rule(RuleId.STAR_FRAME)
def star_frame(step: Step) -> Result:
    step.closed()
    step.count(0)

    def frame(g):
        _, right = _triple_pair(g)
        _shape(isinstance(right.pre, Star), 'a framed precondition')
        return right.pre.right

    e = step.param('e', lambda g: _triple_pair(g)[0].code)
    p = step.param('P', lambda g: _triple_pair(g)[0].pre)
    q = step.param('Q', lambda g: _triple_pair(g)[0].post)
    r = step.param('R', frame)
    return Result(Implies(Triple(p, e, q), Triple(Star(p, r), e, Star(q, r))))


def _iff_sides(step: Step, p: Assertion) -> tuple[Assertion, Assertion]:
    match p:
        case And(Implies(a, b), Implies(c, d)) if step.same(a, d) and step.same(b, c):
            return a, b
    raise step.fail('premise must be an equivalence A <=> B')


@rule(RuleId.R_UNIQUE)
def r_unique(step: Step) -> Result:
    step.closed()
    step.count(2)
    x = step.param('X')
    body = step.param('P')
    if any(
        isinstance(node, RelVar) and node.name == x and node.args
        for node in subterms(body)
    ):
        raise step.fail(f'{x} must be used without arguments')
    if not contractive_in(body, x):
        raise step.violated(f'P formally contractive in {x}')
    r, r_body = _iff_sides(step, step.goal(0))
    s, s_body = _iff_sides(step, step.goal(1))
    step.require(r_body, substitute(body, {x: RelDef((), r)}), 'first premise')
    step.require(s_body, substitute(body, {x: RelDef((), s)}), 'second premise')
    return Result(iff(r, s))


# ---------------------------------------------------------------- modal / pseudo-pure


def _pseudo_pure(step: Step, phi: Assertion) -> None:
    if classify(phi) is Purity.GENERAL:
        raise step.violated('phi must be pseudo-pure')


def _out(step: Step, wrap) -> Result:
    step.closed()
    step.count(1)
    premise = as_shape(step, step.goal(0))
    if not isinstance(premise.pre, And):
        raise step.fail("premise precondition must be 'phi /\\ P'")

    def guard(g):
        return as_implies(g).left

    phi = step.param('phi', guard) if step.claimed else premise.pre.left
    if step.same(premise.pre.left, phi):
        p = premise.pre.right
    elif step.same(premise.pre.right, phi):
        p = premise.pre.left
    else:
        raise step.fail('premise precondition does not contain phi')
    _pseudo_pure(step, phi)
    return Result(Implies(phi, wrap(Triple(p, premise.code, premise.post))))


@rule(RuleId.OUT)
def out(step: Step) -> Result:
    return _out(step, lambda t: t)


@rule(RuleId.DIAMOND_OUT)
def diamond_out(step: Step) -> Result:
    return _out(step, Diamond)


@rule(RuleId.DIAMOND_E)
def diamond_e(step: Step) -> Result:
    step.closed()
    step.count(0)
    p = step.param('P', lambda g: as_implies(g).right)
    return Result(Implies(Diamond(p), p))


def admitted_in(step: Step) -> Result:
    """데모 전용: φ ⇒ {P}e{Q} 에서 {φ ∧ P}e{Q}"""
    step.closed()
    step.count(1)
    premise = step.goal(0)
    if not isinstance(premise, Implies) or not isinstance(premise.right, Triple):
        raise step.fail('premise must be phi => {P}e{Q}')
    phi, t = premise.left, premise.right
    _pseudo_pure(step, phi)
    return Result(Triple(And(phi, t.pre), t.code, t.post))
