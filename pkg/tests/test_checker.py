import pytest

from hosl.errors import ScriptError
from hosl.logic import check_all, check_proof, load_script, load_script_file
from hosl.logic.script import Symbol, read_sexprs
from hosl.syntax import Emp, Quote, Skip, Triple

ACCEPTED = ['skip', 'update_free', 'tensor_frame', 'counter', 'eval_rec']


@pytest.fixture
def proof(samples):
    def load(name):
        return load_script_file(samples / 'proofs' / f'{name}.proof')

    return load


@pytest.mark.parametrize('name', ACCEPTED)
def test_sample_proofs_are_accepted(proof, name):
    report = check_all(proof(name))
    assert report.ok, report.failures


def test_stats_count_rule_applications(proof):
    assert check_all(proof('update_free')).stats == {
        'Seq': 1,
        'Update': 1,
        'ImpE': 1,
        'Conseq': 1,
        'Free': 1,
    }


def test_deep_frame_axiom_is_rejected(proof):
    report = check_all(proof('deep_frame_axiom'))
    assert not report.ok
    [(path, message)] = report.failures
    assert path == 'DeepFrameAxiom'
    assert 'unsound' in message


def test_in_rule_is_rejected_at_its_node(proof):
    report = check_all(proof('in_rule'))
    [(path, message)] = report.failures
    assert path == 'ImpE/1:In'
    assert message.startswith('unknown rule In')


def test_in_rule_can_be_admitted(proof):
    assert check_all(proof('in_rule'), admit_unsound=True).ok


def test_conclusion_mismatch_is_reported():
    [root] = load_script('''(rule Skip (conclude "|- {emp}'skip'{true}"))''')
    report = check_proof(root)
    [(path, message)] = report.failures
    assert path == 'Skip'
    assert 'but the node claims' in message


def test_failures_in_several_proofs_are_numbered():
    roots = load_script(
        '''
        (rule Skip (conclude "|- {emp}'skip'{emp}"))
        (rule Skip (conclude "|- {emp}'skip'{true}"))
        '''
    )
    report = check_all(roots)
    assert [path for path, _ in report.failures] == ['#1:Skip']
    assert report.stats == {'Skip': 2}


def test_failed_premise_does_not_hide_the_parent():
    roots = load_script(
        '''
        (rule Seq
          (premise
            (rule Skip (conclude "|- {emp}'skip'{true}"))
            (rule Skip (conclude "|- {emp}'skip'{emp}")))
          (conclude "|- {emp}'skip ; skip'{emp}"))
        '''
    )
    report = check_all(roots)
    paths = [path for path, _ in report.failures]
    assert paths[0] == 'Seq/0:Skip'
    assert 'Seq' in paths


# ---------------------------------------------------------------- scripts


def test_read_sexprs():
    forms = read_sexprs('(a "b c" (d)) ; comment\n(e)')
    assert forms == [['a', 'b c', ['d']], ['e']]
    assert isinstance(forms[0][0], Symbol)
    assert not isinstance(forms[0][1], Symbol)


def test_string_escapes():
    [[_, text]] = read_sexprs(r'(x "a \\/ b \"q\"")')
    assert text == 'a \\/ b "q"'


def test_defines_are_expanded():
    [root] = load_script(
        '''
        (define A "emp")
        (define T "{$A}'skip'{$A}")
        (rule Skip (conclude "|- $T"))
        '''
    )
    assert root.rule == 'Skip'
    assert root.conclusion.goal == Triple(Emp(), Quote(Skip()), Emp())


def test_params_and_nested_premises():
    [root] = load_script(
        '''
        (rule TensorFrame
          (param R "1 |-> 0")
          (premise (rule Skip (param P "emp"))))
        '''
    )
    assert root.params == {'R': '1 |-> 0'}
    assert root.conclusion is None
    [child] = root.premises
    assert child.rule == 'Skip'
    assert check_proof(root).ok


@pytest.mark.parametrize(
    'text, message',
    [
        ('', 'no \\(rule'),
        ('(define A "emp")', 'no \\(rule'),
        ('(rule Skip (conclude "|- $B"))', 'undefined abbreviation \\$B'),
        ('(rule Skip', 'malformed'),
        ('(lemma Skip)', 'unexpected top-level form'),
        ('(rule Skip (hint "x"))', 'unexpected clause'),
        ('(rule Skip (conclude "a" "b"))', 'one judgement'),
        ('(define "A" "emp") (rule Skip)', 'define takes'),
        ('(rule)', 'needs a name'),
    ],
)
def test_script_errors(text, message):
    with pytest.raises(ScriptError, match=message):
        load_script(text)
