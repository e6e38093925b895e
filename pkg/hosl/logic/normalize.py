"""−⊗R 분배 공리로 텐서를 안쪽으로 민다"""

from __future__ import annotations

import logging

from hosl.syntax import (
    And,
    Assertion,
    Diamond,
    Emp,
    Eq,
    Exists,
    FalseAsn,
    Forall,
    Implies,
    Leq,
    Mu,
    Or,
    PointsTo,
    Star,
    Tensor,
    TrueAsn,
    Triple,
    Var,
    fresh_name,
    fv,
    substitute,
)
from hosl.syntax.ops import binder_names

logger = logging.getLogger(__name__)


def normalize_otimes(p: Assertion) -> Assertion:
    match p:
        case Tensor(left, right):
            return push(normalize_otimes(left), normalize_otimes(right))
        case Implies() | And() | Or() | Star():
            return type(p)(normalize_otimes(p.left), normalize_otimes(p.right))
        case Forall(var, body) | Exists(var, body):
            return type(p)(var, normalize_otimes(body))
        case Triple(pre, code, post):
            return Triple(normalize_otimes(pre), code, normalize_otimes(post))
        case Mu(relvar, params, body, args):
            return Mu(relvar, params, normalize_otimes(body), args)
        case Diamond(body):
            return Diamond(normalize_otimes(body))
    return p


def push(p: Assertion, r: Assertion) -> Assertion:
    """정규형 p, r에 대해 p ⊗ r의 정규형"""
    match p:
        case TrueAsn() | FalseAsn() | Emp() | Eq() | Leq() | PointsTo():
            return p
        case Triple(pre, code, post):
            return Triple(Star(push(pre, r), r), code, Star(push(post, r), r))
        case Tensor(inner, r1):
            return Tensor(inner, Star(push(r1, r), r))
        case Forall(var, body) | Exists(var, body):
            if var in fv(r):
                new = fresh_name(var, fv(r, body) | binder_names(body) | {var})
                body = substitute(body, {var: Var(new)})
                var = new
            return type(p)(var, push(body, r))
        case Implies() | And() | Or() | Star():
            return type(p)(push(p.left, r), push(p.right, r))
    # μ, 관계 변수, ◇ 위로는 분배하지 않는다
    return Tensor(p, r)
