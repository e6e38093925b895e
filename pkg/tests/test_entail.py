import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hosl.logic import entail_basic, equivalent, normalize_otimes, simplify
from hosl.semantics import Pass, tester
from hosl.syntax import (
    Emp,
    Eq,
    FalseAsn,
    IntLit,
    PointsTo,
    Star,
    Tensor,
    TrueAsn,
    Triple,
    Var,
    parse,
)

P = parse


def test_tensor_distributes_over_triples():
    r = PointsTo(IntLit(1), IntLit(0))
    p = normalize_otimes(P('{emp}k{emp} (*) 1 |-> 0'))
    assert p == Triple(Star(Emp(), r), Var('k'), Star(Emp(), r))


def test_tensor_vanishes_on_atoms():
    assert normalize_otimes(P('(a = 1 * emp) (*) 1 |-> 0')) == Star(
        Eq(Var('a'), IntLit(1)), Emp()
    )


def test_tensor_stays_on_relation_variables():
    p = P('X (*) 1 |-> 0')
    assert normalize_otimes(p) == p


def test_nested_tensors_compose():
    p = normalize_otimes(P('({emp}k{emp} (*) 1 |-> 0) (*) 2 |-> 0'))
    assert isinstance(p, Triple)
    assert isinstance(p.pre, Star)


@pytest.mark.parametrize(
    'text, expected',
    [
        ('2 + 2 = 4', TrueAsn()),
        ('1 <= 0', FalseAsn()),
        ('1 |-> 0 * 1 |-> 2', FalseAsn()),
        ('emp * true /\\ true', TrueAsn()),
        ('false => emp', TrueAsn()),
        ('x = x', TrueAsn()),
    ],
)
def test_simplify(text, expected):
    assert simplify(P(text)) == expected


@pytest.mark.parametrize(
    'left, right',
    [
        ('1 |-> 0 * emp * 2 |-> 1', '2 |-> 1 * 1 |-> 0'),
        ("mu X.{X}'skip'{false}", "{mu X.{X}'skip'{false}}'skip'{false}"),
        ('exists x. 1 |-> x', 'exists y. 1 |-> y'),
    ],
)
def test_equivalent(left, right):
    assert equivalent(P(left), P(right))


def test_equivalent_is_not_entailment():
    assert not equivalent(P('1 |-> 0'), P('1 |-> _'))


ENTAILED = [
    ('1 |-> 5', '1 |-> _'),
    ('1 |-> 0 * 2 |-> 1', '2 |-> 1 * true'),
    ('a = 1 /\\ emp', 'emp'),
    ('emp', 'emp \\/ 1 |-> 0'),
    ('false', '1 |-> 0'),
    ('1 |-> 0', 'exists v. 1 |-> v /\\ v = 0'),
    ("{1 |-> _}'free(1)'{emp}", "{1 |-> 3}'free(1)'{emp}"),
]


@pytest.mark.parametrize('left, right', ENTAILED)
def test_entail_basic_proves(left, right):
    assert entail_basic(P(left), P(right))


@pytest.mark.parametrize(
    'left, right',
    [
        ('emp', '1 |-> 0'),
        ('1 |-> 0 * 2 |-> 1', '1 |-> 0'),
        ('true', 'emp'),
        ('1 |-> _', '1 |-> 5'),
    ],
)
def test_entail_basic_refuses(left, right):
    assert not entail_basic(P(left), P(right))


def test_entail_basic_unfolds_recursion():
    r = "(mu X.{X}'skip'{false})"
    assert entail_basic(P(f"{{{r}}}'skip'{{false}}"), P(r))
    assert entail_basic(P(r), P(f"{{{r}}}'skip'{{false}}"))


@pytest.mark.parametrize('left, right', ENTAILED)
def test_proved_entailments_hold_semantically(left, right, small_cfg):
    verdict = tester.test_entailment(P(left), P(right), small_cfg)
    assert isinstance(verdict, Pass)


# ---------------------------------------------------------------- properties

_exprs = st.one_of(
    st.integers(0, 3).map(IntLit), st.sampled_from(['a', 'k']).map(Var)
)
_atoms = st.one_of(
    st.just(Emp()),
    st.just(TrueAsn()),
    st.builds(Eq, _exprs, _exprs),
    st.builds(PointsTo, _exprs, _exprs),
)
_assertions = st.recursive(
    _atoms,
    lambda inner: st.one_of(
        st.builds(Star, inner, inner),
        st.builds(Tensor, inner, inner),
        st.builds(Triple, inner, st.just(Var('k')), inner),
    ),
    max_leaves=5,
)


@settings(max_examples=60)
@given(_assertions)
def test_normalize_otimes_is_idempotent(p):
    once = normalize_otimes(p)
    assert normalize_otimes(once) == once


@settings(max_examples=60)
@given(_assertions)
def test_normal_forms_have_no_tensors(p):
    text = repr(normalize_otimes(p))
    assert 'Tensor' not in text


@settings(max_examples=60)
@given(_assertions)
def test_equivalent_is_reflexive(p):
    assert equivalent(p, p)
    assert entail_basic(p, p)
