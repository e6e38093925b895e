"""구문적 세계: 닫힌 불변식과 그 환경"""

from __future__ import annotations

from dataclasses import dataclass, field

from hosl.interp import Env
from hosl.syntax import Assertion, Emp, Star, Tensor, Var, fresh_name, fv, substitute


@dataclass(frozen=True)
class World:
    inv: Assertion
    env: Env = field(default_factory=Env)


EMP_WORLD = World(Emp())


def close(r: Assertion, env: Env) -> World:
    """ι(⟦R⟧_η)"""
    return World(r, env.restrict(fv(r)))


def world_circ(w1: World, w2: World) -> World:
    """w1 ∘ w2 = ι(ι⁻¹(w1) ⊗ w2 ∗ ι⁻¹(w2))"""
    inv1, env1 = w1.inv, w1.env.as_dict()
    env2 = w2.env.as_dict()
    taken = set(env1) | set(env2) | fv(w1.inv, w2.inv)
    renaming = {}
    for name, value in list(env1.items()):
        if name in env2 and env2[name] != value:
            new = fresh_name(name, taken)
            taken.add(new)
            renaming[name] = Var(new)
            env1[new] = env1.pop(name)
    if renaming:
        inv1 = substitute(inv1, renaming)
    merged = dict(env2)
    merged.update(env1)
    return World(Star(Tensor(inv1, w2.inv), w2.inv), Env.of(merged))
