from pathlib import Path

import pytest

from hosl.semantics import TestConfig, default_config
from hosl.syntax import Emp, Skip, TrueAsn

SAMPLES = Path(__file__).resolve().parent.parent / 'samples'


@pytest.fixture
def samples() -> Path:
    return SAMPLES


@pytest.fixture
def cfg() -> TestConfig:
    return default_config()


@pytest.fixture
def small_cfg() -> TestConfig:
    """두 주소, 태그 1까지: 빠른 검사용"""
    return TestConfig(
        addr_pool=(1, 2),
        int_pool=(0, 1),
        code_pool=(Skip(),),
        tag_max=1,
        level_k=2,
        frame_pool=(Emp(), TrueAsn()),
        fuel=1000,
        env_samples=4,
    )
