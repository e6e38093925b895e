import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hosl.errors import ArityError, ContractivenessError, ParseError
from hosl.syntax import (
    And,
    Assign,
    BinOp,
    Emp,
    Eq,
    EvalAt,
    Exists,
    FalseAsn,
    Forall,
    Free,
    Implies,
    IntLit,
    Leq,
    LetDeref,
    Mu,
    Or,
    PointsTo,
    Purity,
    Quote,
    RelVar,
    Seq,
    Skip,
    Star,
    Tensor,
    TrueAsn,
    Triple,
    Var,
    classify,
    equal_mod_ac,
    free_vars,
    fv,
    parse,
    parse_judgement,
    pretty,
    substitute,
    unfold_mu,
)


def test_points_to_any_is_sugar():
    assert parse('1 |-> _') == Exists('x', PointsTo(IntLit(1), Var('x')))


def test_points_to_spec_is_sugar():
    cell = parse('1 |-> {emp}_{emp}')
    assert cell == Exists(
        'k', And(PointsTo(IntLit(1), Var('k')), Triple(Emp(), Var('k'), Emp()))
    )


def test_sequence_and_let_scope():
    program = parse('let x = [2] in [3] := x ; eval [3]', 'program')
    assert program == LetDeref(
        'x', IntLit(2), Seq(Assign(IntLit(3), Var('x')), EvalAt(IntLit(3)))
    )
    assert parse('[1] := 5 ; free(1)', 'program') == Seq(
        Assign(IntLit(1), IntLit(5)), Free(IntLit(1))
    )


def test_assertion_precedence():
    p = parse('a = 1 \\/ emp * true => false')
    assert p == Implies(
        Or(Eq(Var('a'), IntLit(1)), Star(Emp(), TrueAsn())), FalseAsn()
    )


def test_multiplication_needs_parentheses_in_assertions():
    assert parse('(x * y) = 2') == Eq(BinOp('*', Var('x'), Var('y')), IntLit(2))
    assert parse('x * y') == Star(RelVar('x'), RelVar('y'))


def test_iff_is_sugar():
    assert parse('emp <=> true') == And(
        Implies(Emp(), TrueAsn()), Implies(TrueAsn(), Emp())
    )


def test_recursive_assertion():
    assert parse("mu X.{X}'skip'{false}") == Mu(
        'X', (), Triple(RelVar('X'), Quote(Skip()), FalseAsn())
    )


def test_non_contractive_recursion_is_rejected():
    with pytest.raises(ContractivenessError):
        parse('mu X. X * emp')


def test_tensor_right_is_contractive():
    p = parse('mu X. (1 |-> 0) (*) X')
    assert isinstance(p, Mu)
    assert p.body == Tensor(PointsTo(IntLit(1), IntLit(0)), RelVar('X'))


def test_relation_arity_mismatch():
    with pytest.raises(ArityError):
        parse("(mu X(a). {X(a, 1)}'skip'{emp})(2)")


@pytest.mark.parametrize(
    'text, kind',
    [
        ("{emp}'skip'", 'assertion'),
        ('let x = in skip', 'program'),
        ('1 +', 'expr'),
        ('emp |-', 'judgement'),
    ],
)
def test_parse_errors(text, kind):
    with pytest.raises(ParseError) as info:
        parse(text, kind)
    line, column = info.value.position
    assert line == 1 and column >= 1


def test_parse_error_reports_line():
    with pytest.raises(ParseError) as info:
        parse('emp *\n  * emp')
    assert info.value.position[0] == 2


def test_judgement_with_context():
    j = parse_judgement('[X/0, x] x = 1 |- X')
    assert j.relvars == (('X', 0),)
    assert j.vars == ('x',)
    assert j.hyps == (Eq(Var('x'), IntLit(1)),)
    assert j.goal == RelVar('X')


def test_judgement_context_defaults_to_free_variables():
    j = parse_judgement('|- y |-> x')
    assert j.vars == ('x', 'y')
    assert j.hyps == ()


def test_judgement_context_must_cover_free_variables():
    with pytest.raises(ParseError):
        parse_judgement('[x] |- y = 1')


def test_free_vars():
    assert free_vars(parse('exists x. y |-> x * X')) == ({'y'}, {'X'})
    assert fv(parse("{emp}'let z = [y] in skip'{emp}")) == {'y'}


def test_substitution_avoids_capture():
    p = substitute(parse('exists x. y |-> x'), {'y': Var('x')})
    assert fv(p) == {'x'}
    assert equal_mod_ac(p, parse('exists z. x |-> z'))


def test_binders_renamed_apart():
    p = parse('exists x. x = 1 /\\ (exists x. x = 2)')
    assert isinstance(p, Exists)
    inner = p.body.right
    assert isinstance(inner, Exists)
    assert inner.var != p.var


def test_unfold_mu():
    mu = parse("mu X.{X}'skip'{false}")
    assert unfold_mu(mu) == Triple(mu, Quote(Skip()), FalseAsn())


@pytest.mark.parametrize(
    'text, expected',
    [
        ('1 = 1 /\\ 2 <= 3', Purity.PURE),
        ("{emp}'skip'{false}", Purity.PSEUDO_PURE),
        ("mu X.{X}'skip'{false}", Purity.PSEUDO_PURE),
        ('emp', Purity.GENERAL),
        ('1 |-> 0', Purity.GENERAL),
    ],
)
def test_classify(text, expected):
    assert classify(parse(text)) is expected


@pytest.mark.parametrize(
    'text, expected',
    [
        ("exists y. {y |-> _}'skip'{true}", Purity.PSEUDO_PURE),
        ("forall y. {y |-> 0}'[y] := 1'{y |-> 1}", Purity.PSEUDO_PURE),
        ("forall y. (y = 1 \\/ {emp}'skip'{emp})", Purity.PSEUDO_PURE),
        ("mu X.({X}'skip'{emp} /\\ {emp}'skip'{X})", Purity.PSEUDO_PURE),
        ("mu X.({emp}'skip'{X}) (*) 1 |-> 0", Purity.PSEUDO_PURE),
        ("({emp}'skip'{emp}) (*) 1 |-> 0", Purity.PSEUDO_PURE),
        ('X', Purity.GENERAL),
        ("X /\\ {emp}'skip'{emp}", Purity.GENERAL),
        ('exists y. y |-> 0', Purity.GENERAL),
        ("<> {emp}'skip'{emp}", Purity.GENERAL),
        ("{emp}'skip'{emp} * emp", Purity.GENERAL),
        ("{emp}'skip'{emp} => 1 = 1", Purity.GENERAL),
    ],
)
def test_classify_under_binders(text, expected):
    assert classify(parse(text)) is expected


@pytest.mark.parametrize(
    'left, right',
    [
        ('emp * 1 |-> 0 * true', 'true * 1 |-> 0'),
        ('exists x. 1 |-> x', 'exists y. 1 |-> y'),
        ('a = 1 /\\ b = 2', 'b = 2 /\\ a = 1'),
        ('1 |-> _ * emp', '1 |-> _'),
        ('(exists x. 1 |-> x) * emp', 'exists x. 1 |-> x'),
        ('emp * (exists x. x |-> 0) * 2 |-> 1', '2 |-> 1 * exists y. y |-> 0'),
        ('emp * 1 |-> {emp}_{emp}', '1 |-> {emp * emp}_{emp}'),
    ],
)
def test_equal_mod_ac(left, right):
    assert equal_mod_ac(parse(left), parse(right))


def test_equal_mod_ac_keeps_order_of_implication():
    assert not equal_mod_ac(parse('emp => true'), parse('true => emp'))


def test_equal_mod_ac_tells_nested_binders_apart():
    p = parse('exists x. exists y. x |-> y')
    q = parse('exists x. exists y. y |-> x')
    assert not equal_mod_ac(p, q)
    assert not equal_mod_ac(Star(p, Emp()), q)


# ---------------------------------------------------------------- round trip

_names = st.sampled_from(['a', 'b', 'k'])

exprs = st.recursive(
    st.one_of(st.integers(-3, 5).map(IntLit), _names.map(Var)),
    lambda inner: st.builds(BinOp, st.sampled_from(['+', '-', '*']), inner, inner),
    max_leaves=4,
)

atoms = st.one_of(
    st.just(Emp()),
    st.just(TrueAsn()),
    st.just(FalseAsn()),
    st.builds(Eq, exprs, exprs),
    st.builds(Leq, exprs, exprs),
    st.builds(PointsTo, exprs, exprs),
)

assertions = st.recursive(
    atoms,
    lambda inner: st.one_of(
        st.builds(And, inner, inner),
        st.builds(Or, inner, inner),
        st.builds(Implies, inner, inner),
        st.builds(Star, inner, inner),
        st.builds(Tensor, inner, inner),
        st.builds(Triple, inner, _names.map(Var), inner),
    ),
    max_leaves=6,
)


@settings(max_examples=100)
@given(exprs)
def test_expression_round_trip(e):
    assert parse(pretty(e), 'expr') == e


@settings(max_examples=100)
@given(assertions)
def test_assertion_round_trip(p):
    assert parse(pretty(p)) == p


@given(assertions, exprs)
def test_substitution_composes(p, e):
    once = substitute(substitute(p, {'a': e}), {'b': IntLit(0)})
    both = substitute(p, {'a': substitute(e, {'b': IntLit(0)}), 'b': IntLit(0)})
    assert once == both


# ---------------------------------------------------------------- AC equality

binder_assertions = st.recursive(
    atoms,
    lambda inner: st.one_of(
        st.builds(And, inner, inner),
        st.builds(Star, inner, inner),
        st.builds(Exists, _names, inner),
        st.builds(Forall, _names, inner),
        st.builds(Triple, inner, _names.map(Var), inner),
    ),
    max_leaves=6,
)


@settings(max_examples=150)
@given(binder_assertions)
def test_emp_is_a_unit_under_binders(p):
    assert equal_mod_ac(p, p)
    assert equal_mod_ac(Star(p, Emp()), p)
    assert equal_mod_ac(p, Star(Emp(), p))


@settings(max_examples=150)
@given(binder_assertions, binder_assertions)
def test_ac_equality_is_symmetric(p, q):
    assert equal_mod_ac(Star(p, q), Star(q, p))
    assert equal_mod_ac(Star(q, p), Star(p, q))
    assert equal_mod_ac(p, q) == equal_mod_ac(q, p)


@settings(max_examples=150)
@given(binder_assertions, binder_assertions, binder_assertions)
def test_ac_equality_is_transitive(p, q, r):
    a = Star(Star(p, q), r)
    b = Star(p, Star(Emp(), Star(q, r)))
    c = Star(Star(r, p), q)
    assert equal_mod_ac(a, b) and equal_mod_ac(b, c)
    assert equal_mod_ac(a, c)


@settings(max_examples=150)
@given(binder_assertions)
def test_renaming_a_binder_keeps_the_key(p):
    body = Star(p, PointsTo(Var('a'), IntLit(0)))
    renamed = substitute(body, {'a': Var('z')})
    assert equal_mod_ac(Exists('a', body), Exists('z', renamed))
    assert equal_mod_ac(Star(Exists('a', body), Emp()), Exists('z', renamed))
