"""고차 저장소를 위한 분리 논리 검증 도구"""

__version__ = '0.1.0'
