from hosl.semantics.config import (
    TestConfig,
    config_from_mapping,
    default_config,
    load_config,
)
from hosl.semantics.model import Model, member, sem_triple_at, universe
from hosl.semantics.tester import (
    replay,
    sample_envs,
    test_entailment,
    test_goal,
    test_triple,
)
from hosl.semantics.verdict import Fail, Pass, Verdict, Witness
from hosl.semantics.worlds import EMP_WORLD, World, close, world_circ

__all__ = [
    'EMP_WORLD',
    'Fail',
    'Model',
    'Pass',
    'TestConfig',
    'Verdict',
    'Witness',
    'World',
    'close',
    'config_from_mapping',
    'default_config',
    'load_config',
    'member',
    'replay',
    'sample_envs',
    'sem_triple_at',
    'test_entailment',
    'test_goal',
    'test_triple',
    'universe',
    'world_circ',
]
