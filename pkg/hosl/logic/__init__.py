from hosl.logic import derived, fol  # noqa: F401  규칙 등록
from hosl.logic.checker import check_all, check_proof, conclusion_mismatch
from hosl.logic.entail import entail_basic, equivalent, simplify
from hosl.logic.normalize import normalize_otimes
from hosl.logic.registry import REJECTED, Rejection, rejected_rule_info
from hosl.logic.rules import (
    RULES,
    CheckReport,
    ProofNode,
    RuleId,
    apply_rule,
)
from hosl.logic.script import load_script, load_script_file

__all__ = [
    'REJECTED',
    'RULES',
    'CheckReport',
    'ProofNode',
    'Rejection',
    'RuleId',
    'apply_rule',
    'check_all',
    'check_proof',
    'conclusion_mismatch',
    'entail_basic',
    'equivalent',
    'load_script',
    'load_script_file',
    'normalize_otimes',
    'rejected_rule_info',
    'simplify',
]
