"""증명 트리 검사기"""

from __future__ import annotations

import logging
from collections import Counter

from hosl.errors import ExpansionError, HoslError
from hosl.logic.entail import DEFAULT_BUDGET, equivalent
from hosl.logic.rules import CheckReport, ProofNode, apply_rule
from hosl.syntax import Judgement, equal_mod_ac, pretty

logger = logging.getLogger(__name__)


def check_proof(
    root: ProofNode,
    *,
    admit_unsound: bool = False,
    budget: int = DEFAULT_BUDGET,
) -> CheckReport:
    """전제부터 검사하고 생성된 결론을 주장된 결론과 비교한다"""
    checker = _Checker(admit_unsound, budget)
    checker.visit(root, root.rule)
    report = CheckReport(tuple(checker.failures), dict(checker.stats))
    logger.info(
        'checked %d rule applications, %d failure(s)',
        sum(checker.stats.values()),
        len(checker.failures),
    )
    return report


def check_all(roots, **options) -> CheckReport:
    failures, stats = [], Counter()
    for i, root in enumerate(roots):
        report = check_proof(root, **options)
        prefix = f'#{i}:' if len(roots) > 1 else ''
        failures.extend((prefix + path, message) for path, message in report.failures)
        stats.update(report.stats)
    return CheckReport(tuple(failures), dict(stats))


def conclusion_mismatch(
    generated: Judgement, claimed: Judgement, budget: int = DEFAULT_BUDGET
) -> str | None:
    if not equivalent(generated.goal, claimed.goal, budget):
        return (
            f'derived {pretty(generated.goal)} but the node claims '
            f'{pretty(claimed.goal)}'
        )
    for hyp in generated.hyps:
        if not any(equal_mod_ac(hyp, other) for other in claimed.hyps):
            return f'undischarged hypothesis {pretty(hyp)}'
    return None


class _Checker:
    def __init__(self, admit_unsound: bool, budget: int):
        self.admit_unsound = admit_unsound
        self.budget = budget
        self.failures: list[tuple[str, str]] = []
        self.stats: Counter[str] = Counter()

    def visit(self, node: ProofNode, path: str) -> Judgement | None:
        premises = []
        for i, child in enumerate(node.premises):
            judgement = self.visit(child, f'{path}/{i}:{child.rule}')
            if judgement is None:
                return node.conclusion
            premises.append(judgement)
        self.stats[node.rule] += 1
        try:
            generated = apply_rule(
                node.rule,
                node.params,
                premises,
                node.conclusion,
                admit_unsound=self.admit_unsound,
                budget=self.budget,
            )
        except ExpansionError as err:
            self._fail(f'{path}/expansion', str(err))
            return node.conclusion
        except HoslError as err:
            self._fail(path, str(err))
            return node.conclusion
        if node.conclusion is None:
            return generated
        problem = conclusion_mismatch(generated, node.conclusion, self.budget)
        if problem is not None:
            self._fail(path, problem)
        return node.conclusion

    def _fail(self, path: str, message: str) -> None:
        logger.debug('%s: %s', path, message)
        self.failures.append((path, message))
