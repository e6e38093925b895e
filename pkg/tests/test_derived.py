import pytest

from hosl.errors import SchemaMismatch
from hosl.logic import apply_rule, check_all, equivalent, load_script_file
from hosl.syntax import EvalAt, IntLit, Quote, parse, parse_judgement

J = parse_judgement


def test_tensor_mono_expands_to_kernel_rules():
    premise = J('|- 1 |-> 5 => 1 |-> _')
    got = apply_rule('TensorMono', {'R': '2 |-> 0'}, [premise])
    expected = parse('1 |-> 5 (*) 2 |-> 0 => (1 |-> _) (*) 2 |-> 0')
    assert equivalent(got.goal, expected)
    assert got.hyps == ()


def test_tensor_mono_infers_the_frame():
    claimed = J('|- 1 |-> 5 (*) 2 |-> 0 => (1 |-> _) (*) 2 |-> 0')
    got = apply_rule('TensorMono', {}, [J('|- 1 |-> 5 => 1 |-> _')], claimed)
    assert equivalent(got.goal, claimed.goal)


def test_tensor_mono_needs_an_implication():
    with pytest.raises(SchemaMismatch, match='implication'):
        apply_rule('TensorMono', {'R': 'emp'}, [J('|- emp')])


def test_eval_non_rec_from_parameters():
    params = {'e': '1', 'P': '2 |-> 0', 'Q': '2 |-> 1'}
    got = apply_rule('EvalNonRec1', params)
    spec = '1 |-> {2 |-> 0}_{2 |-> 1}'
    expected = parse(f"{{2 |-> 0 * {spec}}}'eval [1]'{{2 |-> 1 * {spec}}}")
    assert got.goal.code == Quote(EvalAt(IntLit(1)))
    assert equivalent(got.goal, expected)
    assert got.vars == ()


def test_eval_non_rec_needs_a_stored_specification():
    claimed = J("|- {emp}'eval [1]'{emp}")
    with pytest.raises(SchemaMismatch, match='stored specification'):
        apply_rule('EvalNonRec1', {}, [], claimed)


def test_eval_rec_checks_the_recursive_shape():
    params = {'e': '1', 'R': '(mu X. (1 |-> 0) (*) X)', 'P': 'emp', 'Q': 'emp'}
    with pytest.raises(SchemaMismatch, match='R must have the shape'):
        apply_rule('EvalRec', params)


@pytest.mark.parametrize(
    'name, rule', [('counter', 'EvalNonRec1'), ('eval_rec', 'EvalRec')]
)
def test_derived_rules_count_as_one_application(samples, name, rule):
    report = check_all(load_script_file(samples / 'proofs' / f'{name}.proof'))
    assert report.ok, report.failures
    assert report.stats == {rule: 1}
