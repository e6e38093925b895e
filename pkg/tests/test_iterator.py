import pytest

from hosl.logic import check_all, load_script_file
from hosl.semantics import TestConfig, tester
from hosl.syntax import Emp, Skip, Triple, parse

ITERATOR = (
    'let n = [3] in if (n = 0) then skip '
    'else (eval [2] ; [3] := n - 1 ; eval [1])'
)


def iterator_goal(counter: int) -> str:
    cells = f"2 |-> 'skip' * 1 |-> '{ITERATOR}'"
    return f"{{3 |-> {counter} * {cells}}}'eval [1]'{{3 |-> 0 * {cells}}}"


@pytest.fixture
def iterator_cfg() -> TestConfig:
    """주소 셋, 태그 2까지, 액자 없음"""
    return TestConfig(
        addr_pool=(1, 2, 3),
        int_pool=(0,),
        code_pool=(Skip(),),
        tag_max=2,
        level_k=3,
        frame_pool=(Emp(),),
        fuel=2000,
        env_samples=1,
    )


def test_iterator_proof_is_accepted(samples):
    report = check_all(load_script_file(samples / 'proofs' / 'iterator.proof'))
    assert report.ok, report.failures
    assert report.stats == {
        'ImpE': 1,
        'DistTriple': 1,
        'TensorFrame': 1,
        'Eval': 1,
        'ImpI': 1,
        'Hyp': 1,
    }


def test_iterator_goal_file_is_a_triple(samples):
    goal = parse((samples / 'goals' / 'iterator.goal').read_text(encoding='utf-8'))
    assert isinstance(goal, Triple)
    assert goal == parse(iterator_goal(2))


@pytest.mark.slow
@pytest.mark.parametrize('counter', [0, 1, 2])
def test_concrete_iterator_passes(iterator_cfg, counter):
    verdict = tester.test_goal(parse(iterator_goal(counter)), iterator_cfg)
    assert verdict.ok, verdict
    assert verdict.samples > 0
