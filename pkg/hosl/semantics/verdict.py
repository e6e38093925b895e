"""판정과 재현 가능한 반례"""

from __future__ import annotations

from dataclasses import dataclass, field

from hosl.interp import BOT, Bot, Env, Heap, HeapMap, parse_value, show_value
from hosl.semantics.worlds import EMP_WORLD, World
from hosl.syntax import Assertion, parse, pretty


@dataclass(frozen=True)
class Witness:
    world: World = EMP_WORLD
    frame: Assertion | None = None
    heap: Heap = BOT
    outcome: str = ''
    reason: str = ''
    env: Env = field(default_factory=Env)
    level: int = 0
    result: Heap | None = None

    def to_json(self) -> dict:
        return {
            'world': pretty(self.world.inv),
            'frame': None if self.frame is None else pretty(self.frame),
            'heap': _heap_json(self.heap),
            'outcome': self.outcome,
            'reason': self.reason,
            'env': {name: show_value(v) for name, v in self.env.bindings},
            'level': self.level,
            'result': None if self.result is None else _heap_json(self.result),
        }

    @classmethod
    def from_json(cls, data: dict) -> Witness:
        frame = data.get('frame')
        result = data.get('result')
        return cls(
            world=World(parse(data.get('world', 'emp'))),
            frame=None if frame is None else parse(frame),
            heap=_heap_from_json(data.get('heap')),
            outcome=data.get('outcome', ''),
            reason=data.get('reason', ''),
            env=Env.of(
                {k: parse_value(v) for k, v in (data.get('env') or {}).items()}
            ),
            level=int(data.get('level', 0)),
            result=None if result is None else _heap_from_json(result),
        )


def _heap_json(h: Heap) -> dict | None:
    if isinstance(h, Bot):
        return None
    return {str(addr): show_value(v) for addr, v in h.cells}


def _heap_from_json(data: dict | None) -> Heap:
    if data is None:
        return BOT
    return HeapMap.of({int(addr): parse_value(v) for addr, v in data.items()})


@dataclass(frozen=True)
class Pass:
    samples: int = 0
    inconclusive: int = 0

    @property
    def ok(self) -> bool:
        return True


@dataclass(frozen=True)
class Fail:
    witness: Witness
    samples: int = 0
    inconclusive: int = 0

    @property
    def ok(self) -> bool:
        return False


Verdict = Pass | Fail
