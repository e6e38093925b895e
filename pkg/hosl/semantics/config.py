"""테스트 유니버스 설정 (TestConfig)"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from pathlib import Path

import yaml

from hosl.errors import ConfigError, HoslError
from hosl.interp import CodeVal, Env, IntVal, Value, value_key
from hosl.semantics.worlds import EMP_WORLD, World
from hosl.syntax import (
    Assertion,
    Command,
    Emp,
    Free,
    IntLit,
    PointsTo,
    Skip,
    TrueAsn,
    free_vars,
    parse,
)
from hosl.syntax.ops import ints_of, quotes_of

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TestConfig:
    __test__ = False  # pytest 수집 제외

    addr_pool: tuple[int, ...] = (1, 2, 3)
    int_pool: tuple[int, ...] = (-1, 0, 1, 2)
    code_pool: tuple[Command, ...] = (Skip(), Free(IntLit(-1)))
    tag_max: int = 3
    level_k: int = 3
    world_pool: tuple[World, ...] = (EMP_WORLD,)
    frame_pool: tuple[Assertion, ...] = (
        Emp(),
        TrueAsn(),
        PointsTo(IntLit(3), IntLit(0)),
    )
    fuel: int = 10000
    env_samples: int = 16
    seed: int = 0
    inconclusive_threshold: float = 0.2
    absorb_constants: bool = True
    demote_infinite: bool = True
    entail_budget: int = 3

    def __post_init__(self):
        if any(addr < 1 for addr in self.addr_pool):
            raise ConfigError('addrs', 'addresses must be >= 1')
        if self.tag_max < 0 or self.level_k < 0 or self.fuel < 0:
            raise ConfigError('tag_max/k/fuel', 'must be non-negative')
        for world in self.world_pool:
            names, relvars = free_vars(world.inv)
            if (names - world.env.names()) or relvars:
                raise ConfigError('worlds', 'world invariants must be closed')
        for frame in self.frame_pool:
            if any(free_vars(frame)):
                raise ConfigError('frames', 'frames must be closed')

    def heap_values(self, max_tag: int) -> tuple[Value, ...]:
        """힙 칸에 들어갈 값: 정수, 태그 ≤ max_tag인 코드"""
        ints = [IntVal(n) for n in sorted(set(self.int_pool))]
        codes = [
            CodeVal(c, Env(), t)
            for c in self.code_pool
            for t in range(min(max_tag, self.tag_max) + 1)
        ]
        return tuple(sorted(ints + codes, key=value_key))

    @property
    def value_pool(self) -> tuple[Value, ...]:
        return self.heap_values(self.tag_max)

    @property
    def quantifier_pool(self) -> tuple[Value, ...]:
        """∀/∃ 범위: 주소, 정수, 코드"""
        ints = {IntVal(n) for n in (*self.addr_pool, *self.int_pool)}
        codes = [v for v in self.value_pool if isinstance(v, CodeVal)]
        return tuple(sorted([*ints, *codes], key=value_key))

    @property
    def env_values(self) -> tuple[Value, ...]:
        """자유 변수 표본: 정수와 tag_max 코드"""
        ints = {IntVal(n) for n in (*self.addr_pool, *self.int_pool)}
        codes = [CodeVal(c, Env(), self.tag_max) for c in self.code_pool]
        return tuple(sorted([*ints, *codes], key=value_key))

    def absorbing(self, *asts) -> TestConfig:
        """목표의 정수 상수와 닫힌 인용 코드를 풀에 추가"""
        if not self.absorb_constants:
            return self
        ints = set(self.int_pool)
        codes = list(self.code_pool)
        for ast in asts:
            ints |= ints_of(ast)
            for body in quotes_of(ast):
                if not free_vars(body)[0] and body not in codes:
                    codes.append(body)
        if ints == set(self.int_pool) and len(codes) == len(self.code_pool):
            return self
        return dataclasses.replace(
            self, int_pool=tuple(sorted(ints)), code_pool=tuple(codes)
        )


def default_config() -> TestConfig:
    return TestConfig()


_KEYS = {
    'addrs': 'addr_pool',
    'ints': 'int_pool',
    'code': 'code_pool',
    'tag_max': 'tag_max',
    'k': 'level_k',
    'worlds': 'world_pool',
    'frames': 'frame_pool',
    'fuel': 'fuel',
    'env_samples': 'env_samples',
    'seed': 'seed',
    'inconclusive_threshold': 'inconclusive_threshold',
    'absorb_constants': 'absorb_constants',
    'demote_infinite': 'demote_infinite',
    'entail_budget': 'entail_budget',
}


def load_config(path: str | Path) -> TestConfig:
    path = Path(path)
    text = path.read_text(encoding='utf-8')
    if path.suffix in ('.yaml', '.yml'):
        raw = yaml.safe_load(text) or {}
        if not isinstance(raw, dict):
            raise ConfigError('<file>', 'expected a mapping')
    else:
        raw = _read_key_values(text)
    config = config_from_mapping(raw, base_dir=path.parent)
    logger.info('loaded config %s', path)
    return config


def _read_key_values(text: str) -> dict:
    raw = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith('#'):
            continue
        if '=' not in line:
            raise ConfigError(f'line {number}', "expected 'key = value'")
        key, value = line.split('=', 1)
        try:
            raw[key.strip()] = yaml.safe_load(value.strip())
        except yaml.YAMLError as err:
            raise ConfigError(key.strip(), f'unreadable value: {err}') from err
    return raw


def config_from_mapping(raw: dict, base_dir: Path | None = None) -> TestConfig:
    fields = {}
    for key, value in raw.items():
        if key not in _KEYS:
            raise ConfigError(key, 'unknown key')
        try:
            fields[_KEYS[key]] = _convert(key, value, base_dir or Path('.'))
        except HoslError as err:
            if isinstance(err, ConfigError):
                raise
            raise ConfigError(key, str(err)) from err
        except (TypeError, ValueError, OSError) as err:
            raise ConfigError(key, str(err)) from err
    if 'world_pool' in fields and EMP_WORLD not in fields['world_pool']:
        fields['world_pool'] = (EMP_WORLD, *fields['world_pool'])
    if 'frame_pool' in fields:
        frames = list(fields['frame_pool'])
        for required in (TrueAsn(), Emp()):
            if required not in frames:
                frames.insert(0, required)
        fields['frame_pool'] = tuple(frames)
    return TestConfig(**fields)


def _items(value) -> list:
    if isinstance(value, dict):
        return list(value)
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


def _as_text(item) -> str:
    if isinstance(item, bool):
        return 'true' if item else 'false'
    return str(item)


def _convert(key: str, value, base_dir: Path):
    match key:
        case 'addrs' | 'ints':
            return tuple(sorted({int(item) for item in _items(value)}))
        case 'code':
            programs = []
            for item in _items(value):
                text = _as_text(item)
                if text.startswith('@'):
                    text = (base_dir / text[1:]).read_text(encoding='utf-8')
                programs.append(parse(text, 'program'))
            return tuple(programs)
        case 'worlds':
            return tuple(World(parse(_as_text(item))) for item in _items(value))
        case 'frames':
            return tuple(parse(_as_text(item)) for item in _items(value))
        case 'inconclusive_threshold':
            return float(value)
        case 'absorb_constants' | 'demote_infinite':
            if not isinstance(value, bool):
                raise ConfigError(key, 'expected true or false')
            return value
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(key, 'expected an integer')
    return value
