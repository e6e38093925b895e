import pytest

from hosl.errors import SchemaMismatch, SideConditionViolation, UnknownRule
from hosl.logic import RULES, RuleId, apply_rule, conclusion_mismatch, equivalent
from hosl.syntax import (
    And,
    Emp,
    If,
    Implies,
    IntLit,
    LetNew,
    PointsTo,
    Quote,
    Skip,
    Tensor,
    Triple,
    Var,
    parse,
    parse_judgement,
    pretty,
)

J = parse_judgement


def derive(name, conclusion, premises=(), **params):
    """주장된 결론과 같은 판단이 나오는지 확인"""
    claimed = J(conclusion)
    got = apply_rule(name, params, [J(p) for p in premises], claimed)
    assert conclusion_mismatch(got, claimed) is None, pretty(got.goal)
    return got


def test_every_rule_is_registered():
    assert set(RULES) == set(RuleId)


# ---------------------------------------------------------------- rejected rules


@pytest.mark.parametrize(
    'name, phrase',
    [
        ('In', 'pseudo-pure'),
        ('DeepFrameAxiom', 'unsound'),
        ('InvarianceNonPure', 'pure psi'),
        ('OldEval', 'superseded'),
        ('DiamondIn', 'rank-tracking'),
        ('Conj', 'not sound'),
        ('DoubleNegationElim', 'classical'),
        ('In-T', 'triple instance'),
        ('InvarianceR', 'rank of the cell'),
    ],
)
def test_rejected_rules_cite_their_reason(name, phrase):
    with pytest.raises(UnknownRule) as excinfo:
        apply_rule(name)
    assert excinfo.value.citation is not None
    assert phrase in str(excinfo.value)


def test_unknown_rule_has_no_citation():
    with pytest.raises(UnknownRule) as excinfo:
        apply_rule('Frame')
    assert excinfo.value.citation is None
    assert str(excinfo.value) == 'unknown rule Frame'


def test_in_can_be_admitted_for_demonstration():
    premise = J("|- {emp}'skip'{emp} => {1 |-> 0}'skip'{1 |-> 0}")
    got = apply_rule('In', {}, [premise], admit_unsound=True)
    phi = parse("{emp}'skip'{emp}")
    cell = PointsTo(IntLit(1), IntLit(0))
    assert got.goal == Triple(And(phi, cell), Quote(Skip()), cell)


def test_only_in_is_admitted():
    with pytest.raises(UnknownRule):
        apply_rule('DeepFrameAxiom', admit_unsound=True)


# ---------------------------------------------------------------- commands


def test_skip_infers_its_assertion():
    derive('Skip', "|- {1 |-> 0}'skip'{1 |-> 0}")


def test_skip_with_explicit_parameter():
    got = apply_rule('Skip', {'P': 'x |-> 0'})
    cell = PointsTo(Var('x'), IntLit(0))
    assert got.goal == Triple(cell, Quote(Skip()), cell)
    assert got.vars == ('x',)


def test_update_keeps_the_frame():
    derive('Update', "|- {1 |-> _ * 2 |-> 0}'[1] := 5'{1 |-> 5 * 2 |-> 0}")


def test_free():
    derive('Free', "|- {1 |-> _}'free(1)'{emp}")


def test_seq():
    derive(
        'Seq',
        "|- {emp}'skip ; skip'{emp}",
        ["|- {emp}'skip'{emp}", "|- {emp}'skip'{emp}"],
    )


def test_seq_needs_matching_intermediate_assertion():
    premises = [J("|- {emp}'skip'{emp}"), J("|- {1 |-> 0}'skip'{1 |-> 0}")]
    with pytest.raises(SchemaMismatch, match='intermediate'):
        apply_rule('Seq', {}, premises)


def test_command_rules_need_hypothesis_free_premises():
    premises = [J("1 = 1 |- {emp}'skip'{emp}"), J("|- {emp}'skip'{emp}")]
    with pytest.raises(SideConditionViolation, match='hypothesis-free'):
        apply_rule('Seq', {}, premises)


def test_if():
    premises = [
        J("|- {emp /\\ x = 1}'skip'{emp}"),
        J("|- {emp /\\ (x = 1 => false)}'skip'{emp}"),
    ]
    got = apply_rule('If', {}, premises)
    code = If(Var('x'), IntLit(1), Skip(), Skip())
    assert got.goal == Triple(Emp(), Quote(code), Emp())
    assert got.vars == ('x',)


def test_if_needs_the_guard_in_the_first_premise():
    premises = [J("|- {emp}'skip'{emp}"), J("|- {emp}'skip'{emp}")]
    with pytest.raises(SchemaMismatch):
        apply_rule('If', {}, premises)


def test_deref_binds_the_variable():
    got = apply_rule('Deref', {'x': 'v', 'e': '1'}, [J("|- {1 |-> v}'skip'{emp}")])
    expected = parse("{exists v. 1 |-> v}'let w = [1] in skip'{emp}")
    assert equivalent(got.goal, expected)
    assert got.vars == ()


def test_deref_variable_must_not_escape():
    premise = J("|- {1 |-> v}'skip'{v = 0}")
    with pytest.raises(SideConditionViolation):
        apply_rule('Deref', {'x': 'v', 'e': '1'}, [premise])


def test_new_consumes_the_allocated_cells():
    premise = J("|- {y |-> 0 * y + 1 |-> 7}'skip'{emp}")
    got = apply_rule('New', {'x': 'y', 'inits': '0, 7'}, [premise])
    code = LetNew('y', (IntLit(0), IntLit(7)), Skip())
    assert got.goal == Triple(Emp(), Quote(code), Emp())


def test_new_reports_a_missing_cell():
    premise = J("|- {y |-> 0}'skip'{emp}")
    with pytest.raises(SchemaMismatch, match='lacks the cell'):
        apply_rule('New', {'x': 'y', 'inits': '0, 7'}, [premise])


# ---------------------------------------------------------------- structural


def test_conseq_from_premises():
    premises = [J('|- 1 |-> 5 => 1 |-> _'), J('|- emp => emp')]
    got = apply_rule('Conseq', {'e': "'free(1)'"}, premises)
    expected = parse("{1 |-> _}'free(1)'{emp} => {1 |-> 5}'free(1)'{emp}")
    assert equivalent(got.goal, expected)


def test_conseq_auto_discharges_entailments():
    derive(
        'Conseq',
        "|- {1 |-> _}'free(1)'{emp} => {1 |-> 5}'free(1)'{emp}",
        auto='yes',
    )


def test_conseq_auto_refuses_a_stronger_precondition():
    claimed = J("|- {1 |-> 5}'free(1)'{emp} => {1 |-> _}'free(1)'{emp}")
    with pytest.raises(SideConditionViolation):
        apply_rule('Conseq', {'auto': 'yes'}, [], claimed)


def test_invariance_with_pure_invariant():
    derive(
        'Invariance',
        "|- {emp}'skip'{emp} => {emp /\\ 1 = 1}'skip'{emp /\\ 1 = 1}",
    )


def test_invariance_rejects_a_triple_invariant():
    t = "{emp}'skip'{false}"
    claimed = J(f"|- {{emp}}'skip'{{emp}} => {{emp /\\ {t}}}'skip'{{emp /\\ {t}}}")
    with pytest.raises(SideConditionViolation, match='pure'):
        apply_rule('Invariance', {}, [], claimed)


def test_premises_must_stay_in_the_conclusion_context():
    premises = [J('|- x = 1 => true'), J('|- emp => emp')]
    with pytest.raises(SideConditionViolation, match='outside'):
        apply_rule('StarMono', {}, premises, J('|- true => true'))


def test_star_mono():
    premises = [J('|- 1 |-> 5 => 1 |-> _'), J('|- emp => true')]
    got = apply_rule('StarMono', {}, premises)
    assert equivalent(got.goal, parse('1 |-> 5 * emp => 1 |-> _ * true'))


def test_tensor_frame():
    got = apply_rule('TensorFrame', {'R': '1 |-> 0'}, [J("|- {emp}'skip'{emp}")])
    assert got.goal == Tensor(parse("{emp}'skip'{emp}"), parse('1 |-> 0'))


def test_out_moves_a_pseudo_pure_guard():
    premise = J("|- {{emp}'skip'{emp} /\\ 1 |-> 0}'skip'{1 |-> 0}")
    got = apply_rule('Out', {}, [premise])
    assert got.goal == Implies(
        parse("{emp}'skip'{emp}"), parse("{1 |-> 0}'skip'{1 |-> 0}")
    )


def test_out_rejects_a_heap_guard():
    premise = J("|- {1 |-> 0 /\\ emp}'skip'{emp}")
    with pytest.raises(SideConditionViolation, match='pseudo-pure'):
        apply_rule('Out', {}, [premise])


def test_out_accepts_a_quantified_triple_guard():
    guard = "exists y. {y |-> _}'skip'{true}"
    premise = J(f"|- {{({guard}) /\\ 1 |-> 0}}'skip'{{1 |-> 0}}")
    got = apply_rule('Out', {}, [premise])
    expected = Implies(parse(guard), parse("{1 |-> 0}'skip'{1 |-> 0}"))
    assert equivalent(got.goal, expected)


def test_update_inv_rejects_a_free_relation_variable():
    params = {'e': '1', 'e0': '0', 'e1': '2', 'phi': 'X'}
    with pytest.raises(SideConditionViolation, match='pseudo-pure'):
        apply_rule('UpdateInv', params)


# ---------------------------------------------------------------- equivalences


def test_star_comm():
    derive('StarComm', '|- 1 |-> 0 * emp => emp * 1 |-> 0')


def test_star_overlap():
    derive('StarOverlap', '|- 1 |-> 0 * 1 |-> 2 => false')


def test_law_direction_must_be_known():
    with pytest.raises(SchemaMismatch, match='dir'):
        apply_rule('StarComm', {'P': 'emp', 'Q': 'true', 'dir': 'up'})


def test_mu_unfold():
    r = "(mu X.{X}'skip'{false})"
    derive('MuUnfold', f"|- {r} => {{{r}}}'skip'{{false}}", dir='lr')


def test_dist_triple():
    f = '(emp (*) 1 |-> 0) * 1 |-> 0'
    t = "{emp}'skip'{emp}"
    derive('DistTriple', f"|- {t} (*) 1 |-> 0 => {{{f}}}'skip'{{{f}}}")


def test_dist_quant_needs_a_fresh_binder():
    params = {'P': 'exists x. x |-> 0', 'R': 'x |-> 1', 'dir': 'lr'}
    with pytest.raises(SideConditionViolation):
        apply_rule('DistQuant', params)
