import dataclasses
import json

import pytest

from hosl.errors import ConfigError, UniverseOverflow
from hosl.interp import EMPTY, Env, IntVal, parse_heap
from hosl.semantics import (
    EMP_WORLD,
    Fail,
    Model,
    Pass,
    TestConfig,
    Witness,
    World,
    config_from_mapping,
    default_config,
    load_config,
    member,
    replay,
    sample_envs,
    tester,
    world_circ,
)
from hosl.syntax import Emp, PointsTo, Star, Tensor, TrueAsn, Var, parse


def holds(text: str, h, cfg: TestConfig, env: Env | None = None) -> bool:
    return member(parse(text), env or Env(), None, EMP_WORLD, h, cfg)


def test_emp_holds_only_on_the_empty_heap(small_cfg):
    assert holds('emp', EMPTY, small_cfg)
    assert not holds('emp', parse_heap('1 = 0'), small_cfg)


def test_points_to_and_separation(small_cfg):
    h = parse_heap('1 = 0\n2 = 1')
    assert holds('1 |-> 0 * 2 |-> 1', h, small_cfg)
    assert holds('1 |-> 0 * true', h, small_cfg)
    assert not holds('1 |-> 0', h, small_cfg)
    assert not holds('1 |-> 0 * 1 |-> 0', parse_heap('1 = 0'), small_cfg)


def test_membership_uses_the_environment(small_cfg):
    h = parse_heap('1 = 0')
    env = Env.of({'x': IntVal(1)})
    assert holds('x |-> 0', h, small_cfg, env)
    assert holds('exists y. y |-> 0', h, small_cfg)


@pytest.mark.parametrize(
    'goal',
    [
        "{1 |-> _}'free(1)'{emp}",
        "{1 |-> 0}'[1] := 1'{1 |-> 1}",
        "{emp}'skip'{emp}",
        "emp => mu X.{X}'skip'{false}",
        '1 |-> 0 * 2 |-> 0 => 1 |-> 0 * true',
    ],
)
def test_valid_goals_pass(goal, small_cfg):
    verdict = tester.test_goal(parse(goal), small_cfg)
    assert isinstance(verdict, Pass)
    assert verdict.ok
    assert verdict.samples > 0


@pytest.mark.parametrize(
    'goal',
    [
        "{true}'skip'{false}",
        "{emp}'skip'{false}",
        "{emp}'[1] := 0'{true}",
        'true => emp',
    ],
)
def test_invalid_goals_fail(goal, small_cfg):
    verdict = tester.test_goal(parse(goal), small_cfg)
    assert isinstance(verdict, Fail)
    assert not verdict.ok


def test_witness_replays_through_json(small_cfg):
    goal = parse("{true}'skip'{false}")
    verdict = tester.test_goal(goal, small_cfg)
    assert isinstance(verdict, Fail)
    data = json.loads(json.dumps(verdict.witness.to_json()))
    again = replay(goal, Witness.from_json(data), small_cfg)
    assert isinstance(again, Fail)


def test_sample_envs_are_deterministic_and_capped(small_cfg):
    asts = [parse('x = y /\\ z = 0')]
    first = sample_envs(asts, small_cfg)
    assert first == sample_envs(asts, small_cfg)
    assert len(first) == small_cfg.env_samples
    assert all(env.names() == {'x', 'y', 'z'} for env in first)


def test_closed_goal_has_one_environment(small_cfg):
    assert sample_envs([parse('emp')], small_cfg) == [Env()]


def test_untagged_code_is_rejected_without_demotion(small_cfg):
    strict = dataclasses.replace(small_cfg, demote_infinite=False)
    with pytest.raises(UniverseOverflow):
        holds('true', parse_heap("1 = 'skip'"), strict)


def test_world_circ_shape():
    w = World(PointsTo(Var('a'), TrueAsn()), Env.of({'a': IntVal(1)}))
    circ = world_circ(w, EMP_WORLD)
    assert circ.inv == Star(Tensor(w.inv, Emp()), Emp())
    assert circ.env == w.env


def test_world_circ_renames_clashing_bindings():
    w1 = World(PointsTo(Var('a'), TrueAsn()), Env.of({'a': IntVal(1)}))
    w2 = World(PointsTo(Var('a'), TrueAsn()), Env.of({'a': IntVal(2)}))
    env = world_circ(w1, w2).env.as_dict()
    assert env['a'] == IntVal(2)
    assert IntVal(1) in env.values()


# ---------------------------------------------------------------- config


def test_default_config_file_matches_defaults(samples):
    assert load_config(samples / 'configs' / 'default.cfg') == default_config()


def test_yaml_config(samples):
    cfg = load_config(samples / 'configs' / 'small.yaml')
    assert cfg.addr_pool == (1, 2)
    assert cfg.tag_max == 1
    assert cfg.level_k == 2
    assert cfg.fuel == 1000
    assert cfg.frame_pool == default_config().frame_pool


def test_frames_always_include_emp_and_true():
    cfg = config_from_mapping({'frames': ['3 |-> 0']})
    assert Emp() in cfg.frame_pool and TrueAsn() in cfg.frame_pool


@pytest.mark.parametrize(
    'raw',
    [
        {'bogus': 1},
        {'addrs': [0, 1]},
        {'tag_max': 'three'},
        {'absorb_constants': 'yes'},
        {'frames': ['x |-> 0']},
    ],
)
def test_config_errors(raw):
    with pytest.raises(ConfigError):
        config_from_mapping(raw)


def test_code_entries_can_reference_files(tmp_path):
    (tmp_path / 'loop.prog').write_text('free(1)', encoding='utf-8')
    (tmp_path / 'run.cfg').write_text('code = [skip, "@loop.prog"]\n', encoding='utf-8')
    cfg = load_config(tmp_path / 'run.cfg')
    assert cfg.code_pool == (parse('skip', 'program'), parse('free(1)', 'program'))


class EchoModel(Model):
    """true는 emp를 묻고 emp는 다시 true를 묻는다"""

    def _member(self, p, env, w, h):
        match p:
            case TrueAsn():
                self.member(Emp(), env, w, h)
                return True
            case Emp():
                return self.member(TrueAsn(), env, w, h)
        return super()._member(p, env, w, h)


def test_answers_under_a_cycle_are_not_memoised(small_cfg):
    model = EchoModel(small_cfg)
    assert model.member(TrueAsn(), Env(), EMP_WORLD, EMPTY)
    # 순환 안에서 emp는 잠시 거짓이었지만 그 답이 남으면 안 된다
    fresh = EchoModel(small_cfg).member(Emp(), Env(), EMP_WORLD, EMPTY)
    assert fresh
    assert model.member(Emp(), Env(), EMP_WORLD, EMPTY) == fresh


@pytest.mark.parametrize(
    'text',
    [
        "(mu X. {X}'skip'{false})",
        "(mu X. {X}'skip'{X})",
        "(mu X. 1 |-> {X}_{emp})",
        "(mu X. 1 |-> {X * true}_{true})",
    ],
)
def test_memoised_mu_answers_match_fresh_models(text, small_cfg):
    p = parse(text)
    heaps = [parse_heap("1 = 'skip'"), parse_heap("1 = 'eval [1]'"), EMPTY]
    model = Model(small_cfg)
    for h in heaps:
        member(p, Env(), None, EMP_WORLD, h, small_cfg, model)
    for (q, env, w, h), value in list(model._members.items()):
        assert Model(small_cfg).member(q, env, w, h) == value, (q, h)
