"""유계 테스터: 삼중항과 함의를 설정된 유니버스에서 반박"""

from __future__ import annotations

import itertools
import logging
import random
from collections.abc import Mapping

from hosl.errors import TypeFault, UnboundVariable
from hosl.interp import Env, OutOfFuel, Value, eval_expr
from hosl.semantics.config import TestConfig
from hosl.semantics.model import Model, close_relvars, demote
from hosl.semantics.verdict import Fail, Pass, Verdict, Witness
from hosl.syntax import (
    Assertion,
    Expr,
    Implies,
    RelDef,
    Triple,
    TrueAsn,
    free_vars,
)

logger = logging.getLogger(__name__)


def sample_envs(asts, cfg: TestConfig) -> list[Env]:
    """자유 변수마다 env_values의 곱집합, env_samples개로 제한"""
    names = set()
    for ast in asts:
        names |= free_vars(ast)[0]
    names = sorted(names)
    if not names:
        return [Env()]
    combos = list(itertools.product(cfg.env_values, repeat=len(names)))
    if len(combos) > cfg.env_samples:
        picked = random.Random(cfg.seed).sample(range(len(combos)), cfg.env_samples)
        combos = [combos[i] for i in sorted(picked)]
    return [Env.of(dict(zip(names, values))) for values in combos]


def _code_of(e: Expr, env: Env) -> Value | None:
    try:
        return eval_expr(e, env)
    except (TypeFault, UnboundVariable):
        return None


def _report(kind: str, verdict: Verdict, cfg: TestConfig) -> Verdict:
    if verdict.samples and verdict.inconclusive / verdict.samples > (
        cfg.inconclusive_threshold
    ):
        logger.warning(
            '%s: %d of %d samples ran out of fuel',
            kind,
            verdict.inconclusive,
            verdict.samples,
        )
    name = type(verdict).__name__
    logger.info('%s: %s after %d samples', kind, name, verdict.samples)
    return verdict


def test_triple(
    p: Assertion,
    e: Expr,
    q: Assertion,
    cfg: TestConfig,
    rho: Mapping[str, RelDef] | None = None,
) -> Verdict:
    p, q = close_relvars(p, rho), close_relvars(q, rho)
    cfg = cfg.absorbing(p, e, q)
    model = Model(cfg)
    samples = inconclusive = 0
    for env in sample_envs((p, e, q), cfg):
        code = _code_of(e, env)
        for w in cfg.world_pool:
            verdict = model.sem_triple_at(cfg.level_k, w, p, code, q, env)
            samples += verdict.samples
            inconclusive += verdict.inconclusive
            if isinstance(verdict, Fail):
                return _report(
                    'triple', Fail(verdict.witness, samples, inconclusive), cfg
                )
    return _report('triple', Pass(samples, inconclusive), cfg)


def test_entailment(
    p: Assertion,
    q: Assertion,
    cfg: TestConfig,
    rho: Mapping[str, RelDef] | None = None,
) -> Verdict:
    p, q = close_relvars(p, rho), close_relvars(q, rho)
    cfg = cfg.absorbing(p, q)
    model = Model(cfg)
    goal = Implies(p, q)
    samples = 0
    for env in sample_envs((p, q), cfg):
        for w in cfg.world_pool:
            for h in model.universe(cfg.tag_max):
                samples += 1
                if not model.member(goal, env, w, h):
                    witness = Witness(w, None, h, 'not entailed', 'entailment', env)
                    return _report('entailment', Fail(witness, samples), cfg)
    return _report('entailment', Pass(samples), cfg)


def test_goal(
    goal: Assertion, cfg: TestConfig, rho: Mapping[str, RelDef] | None = None
) -> Verdict:
    """삼중항, 함의, 또는 true ⇒ P"""
    match goal:
        case Triple(pre, code, post):
            return test_triple(pre, code, post, cfg, rho)
        case Implies(left, right):
            return test_entailment(left, right, cfg, rho)
    return test_entailment(TrueAsn(), goal, cfg, rho)


def replay(goal: Assertion, witness: Witness, cfg: TestConfig) -> Verdict:
    """반례 하나를 다시 실행"""
    if isinstance(goal, Triple):
        cfg = cfg.absorbing(goal)
        model = Model(cfg)
        code = _code_of(goal.code, witness.env)
        if witness.level == 0 or witness.frame is None:
            return model.sem_triple_at(
                1, witness.world, goal.pre, code, goal.post, witness.env
            )
        heap = demote(witness.heap, cfg)
        if not model.in_triple_set(
            goal.pre, witness.env, witness.world, witness.frame, heap
        ):
            return Pass(0)
        found = model.check_sample(
            witness.level,
            witness.world,
            goal.pre,
            code,
            goal.post,
            witness.env,
            witness.frame,
            heap,
        )
        if isinstance(found, OutOfFuel):
            return Pass(1, 1)
        return Pass(1) if found is None else Fail(found, 1)
    if not isinstance(goal, Implies):
        goal = Implies(TrueAsn(), goal)
    cfg = cfg.absorbing(goal)
    model = Model(cfg)
    heap = demote(witness.heap, cfg)
    if model.member(goal, witness.env, witness.world, heap):
        return Pass(1)
    refuted = Witness(
        witness.world, None, heap, 'not entailed', 'entailment', witness.env
    )
    return Fail(refuted, 1)


test_triple.__test__ = False
test_entailment.__test__ = False
test_goal.__test__ = False
