"""건전성 회귀 목록: 기각된 규칙마다 의미론적 반례를 다시 확인한다"""

from __future__ import annotations

import dataclasses
import logging
from collections.abc import Callable
from dataclasses import dataclass
from enum import Enum

from hosl.interp import (
    Done,
    Env,
    Fault,
    HeapMap,
    OutOfFuel,
    exec_command,
    parse_value,
    rank,
    show_heap,
)
from hosl.logic import check_proof, load_script
from hosl.semantics import Fail, TestConfig, Verdict, Witness, test_goal
from hosl.semantics.model import splits, universe
from hosl.syntax import parse

logger = logging.getLogger(__name__)


class Status(str, Enum):
    REGISTERED = 'as registered'
    CONTRADICTED = 'contradicted'
    INCONCLUSIVE = 'inconclusive'


@dataclass(frozen=True)
class Outcome:
    status: Status
    detail: str
    witness: Witness | None = None


@dataclass(frozen=True)
class Entry:
    name: str
    description: str
    run: Callable[[TestConfig, bool], Outcome]


def _heap(cells: dict[int, str]) -> HeapMap:
    return HeapMap.of({addr: parse_value(text) for addr, text in cells.items()})


def _expect_fault(program: str, cells: dict[int, str], cfg: TestConfig) -> Outcome:
    h = _heap(cells)
    outcome = exec_command(parse(program, 'program'), Env(), h, cfg.fuel)
    match outcome:
        case Fault(reason):
            return Outcome(Status.REGISTERED, f'faults ({reason}) on {show_heap(h)}')
        case OutOfFuel():
            return Outcome(Status.INCONCLUSIVE, f'out of fuel after {cfg.fuel} steps')
        case Done(heap):
            return Outcome(Status.CONTRADICTED, f'terminated with {show_heap(heap)}')
    raise AssertionError(outcome)


def _too_inconclusive(verdict: Verdict, cfg: TestConfig) -> bool:
    if not verdict.samples:
        return verdict.inconclusive > 0
    return verdict.inconclusive / verdict.samples > cfg.inconclusive_threshold


def _expect_verdict(goal: str, cfg: TestConfig, valid: bool) -> Outcome:
    verdict = test_goal(parse(goal), cfg)
    witness = verdict.witness if isinstance(verdict, Fail) else None
    if isinstance(verdict, Fail):
        status = Status.CONTRADICTED if valid else Status.REGISTERED
        return Outcome(status, f'refuted: {goal}', witness)
    if verdict.inconclusive and (not valid or _too_inconclusive(verdict, cfg)):
        return Outcome(
            Status.INCONCLUSIVE, f'{verdict.inconclusive} inconclusive sample(s)'
        )
    status = Status.REGISTERED if valid else Status.CONTRADICTED
    return Outcome(status, f'holds on {verdict.samples} sample(s): {goal}')


def _combine(*outcomes: Outcome) -> Outcome:
    for status in (Status.CONTRADICTED, Status.INCONCLUSIVE):
        for outcome in outcomes:
            if outcome.status is status:
                return outcome
    witness = next((o.witness for o in outcomes if o.witness is not None), None)
    return Outcome(
        Status.REGISTERED, '; '.join(o.detail for o in outcomes), witness
    )


def _expect_rejected(script: str, admit_unsound: bool) -> tuple[Outcome, bool]:
    """(결과, 수용 여부)"""
    reports = [
        check_proof(root, admit_unsound=admit_unsound) for root in load_script(script)
    ]
    failures = [message for report in reports for _, message in report.failures]
    if failures:
        return Outcome(Status.REGISTERED, f'script rejected: {failures[0]}'), False
    return Outcome(Status.CONTRADICTED, 'script accepted'), True


# ---------------------------------------------------------------- entries

_LAUNDER_HEAP = {1: '0', 2: "'free(-1)'", 3: "'skip'"}

# 중첩 삼중항에 불변식을 골라 더하는 유도. 공리 단계 하나만 기각되어야 한다
DEEP_FRAME_SCRIPT = r'''
(define P "2 |-> {1 |-> _}_{1 |-> _}")
(define Q "2 |-> _")
(define R "1 |-> _")
(define S "(mu X. (3 |-> {1 |-> _}_{1 |-> _}) (*) X)")
(define T "{$P}k{$Q}")
(define TS "{($P) (*) $S * $S}k{($Q) (*) $S * $S}")
(define PR "($P) (*) $R * $R")
(define QR "($Q) (*) $R * $R")
(define TR "{$PR}k{$QR}")
(define TRS "{($PR) (*) $S * $S}k{($QR) (*) $S * $S}")
(rule ImpI
  (premise
    (rule ImpE
      (premise
        (rule DistTriple
          (param dir "lr")
          (conclude "[k] |- $TR (*) $S => $TRS")))
      (premise
        (rule ImpE
          (premise
            (rule TensorMono
              (param R "$S")
              (premise
                (rule DeepFrameAxiom
                  (param R "$R")
                  (conclude "[k] |- $T => $TR")))
              (conclude "[k] |- $T (*) $S => $TR (*) $S")))
          (premise
            (rule ImpE
              (premise
                (rule DistTriple
                  (param dir "rl")
                  (conclude "[k] |- $TS => $T (*) $S")))
              (premise (rule Hyp (conclude "[k] $TS |- $TS")))
              (conclude "[k] $TS |- $T (*) $S")))
          (conclude "[k] $TS |- $TR (*) $S")))
      (conclude "[k] $TS |- $TRS")))
  (conclude "[k] |- $TS => $TRS"))
'''


def _only_axiom_rejected(script: str, axiom: str, admit_unsound: bool) -> Outcome:
    """유도의 나머지 단계는 모두 검사를 통과해야 한다"""
    failures = [
        (path, message)
        for root in load_script(script)
        for path, message in check_proof(
            root, admit_unsound=admit_unsound
        ).failures
    ]
    if not failures:
        return Outcome(Status.CONTRADICTED, 'derivation accepted')
    stray = [(path, message) for path, message in failures if not path.endswith(axiom)]
    if stray:
        path, message = stray[0]
        return Outcome(Status.INCONCLUSIVE, f'derivation broken at {path}: {message}')
    return Outcome(Status.REGISTERED, f'script rejected: {failures[0][1]}')


def _deep_frame(cfg: TestConfig, admit_unsound: bool) -> Outcome:
    ran = _expect_fault('let x = [2] in [3] := x ; eval [3]', _LAUNDER_HEAP, cfg)
    rejected = _only_axiom_rejected(DEEP_FRAME_SCRIPT, 'DeepFrameAxiom', admit_unsound)
    return _combine(ran, rejected)


def _classical(cfg: TestConfig, admit_unsound: bool) -> Outcome:
    return _expect_verdict("{true}'skip'{false}", cfg, valid=False)


R_SKIP = "mu X.{X}'skip'{false}"

IN_SCRIPT = r'''
(define R "(mu X.{X}'skip'{false})")
(rule ImpE
  (premise
    (rule Conseq
      (param auto "yes")
      (conclude "|- {$R /\\ $R}'skip'{false} => {$R}'skip'{false}"))
    (rule In
      (premise
        (rule MuUnfold
          (param dir "lr")
          (conclude "|- $R => {$R}'skip'{false}")))
      (conclude "|- {$R /\\ $R}'skip'{false}")))
  (conclude "|- {$R}'skip'{false}"))
'''


def _in_rule(cfg: TestConfig, admit_unsound: bool) -> Outcome:
    implication = _expect_verdict(f'emp => {R_SKIP}', cfg, valid=True)
    refuted = _expect_verdict("{emp}'skip'{false}", cfg, valid=False)
    checked, accepted = _expect_rejected(IN_SCRIPT, admit_unsound)
    if not accepted:
        return _combine(implication, refuted, checked)
    # 데모 모드: 유도된 삼중항은 의미론적으로 거짓이어야 한다
    derived = _expect_verdict(f"{{{R_SKIP}}}'skip'{{false}}", cfg, valid=False)
    if derived.status is Status.REGISTERED:
        return Outcome(
            Status.CONTRADICTED,
            f'unsound rule In derived a refuted triple: {derived.detail}',
            derived.witness,
        )
    return _combine(implication, refuted, derived)


_PHI = "{emp}'skip'{false}"
INVARIANCE_R_GOAL = (
    f"1 |-> 'skip' * (2 |-> 'skip' /\\ {_PHI}) => "
    f"(1 |-> 'skip' /\\ {_PHI}) * (2 |-> 'skip' /\\ {_PHI})"
)


def _invariance_r(cfg: TestConfig, admit_unsound: bool) -> Outcome:
    return _expect_verdict(INVARIANCE_R_GOAL, cfg, valid=False)


INVARIANCE_GOAL = (
    f"{{emp /\\ {_PHI}}}'let x = new 0 in [x] := 'skip''"
    f"{{(exists x. x |-> {{emp}}_{{emp}}) /\\ {_PHI}}}"
)


def _invariance(cfg: TestConfig, admit_unsound: bool) -> Outcome:
    return _expect_verdict(INVARIANCE_GOAL, cfg, valid=False)


def _through_the_store(cfg: TestConfig, admit_unsound: bool) -> Outcome:
    cells = {**_LAUNDER_HEAP, 4: "'let x = [2] in [3] := x'"}
    return _expect_fault('eval [4] ; eval [3]', cells, cfg)


def _rank_split(cfg: TestConfig, admit_unsound: bool) -> Outcome:
    for h in universe(cfg, cfg.tag_max):
        for h1, h2 in splits(h):
            if h1.cells and h2.cells and rank(h1) < rank(h):
                return Outcome(
                    Status.REGISTERED,
                    f'rank {rank(h1)} part of rank {rank(h)} heap {show_heap(h)}',
                    Witness(heap=h, outcome='rank', reason='rank-split'),
                )
    return Outcome(Status.CONTRADICTED, 'every split preserves the rank')


REGISTRY: tuple[Entry, ...] = (
    Entry(
        'deep-frame',
        'code laundering faults; selective framing fails only at DeepFrameAxiom',
        _deep_frame,
    ),
    Entry('classical', "{true}'skip'{false} is refuted", _classical),
    Entry(
        'in-rule',
        "emp => R holds, {emp}'skip'{false} fails, In stays rejected",
        _in_rule,
    ),
    Entry(
        'invariance-r',
        'a pseudo-pure conjunct does not survive copying a cell',
        _invariance_r,
    ),
    Entry(
        'invariance',
        'a triple invariant is not preserved by allocation',
        _invariance,
    ),
    Entry(
        'through-the-store',
        'running laundered code from the heap faults',
        _through_the_store,
    ),
    Entry('rank-split', 'separating a heap can lower its rank', _rank_split),
)


def run_registry(
    cfg: TestConfig, fuel: int | None = None, admit_unsound: bool = False
) -> list[tuple[Entry, Outcome]]:
    if fuel is not None:
        cfg = dataclasses.replace(cfg, fuel=fuel)
    results = []
    for entry in REGISTRY:
        outcome = entry.run(cfg, admit_unsound)
        logger.info('%s: %s', entry.name, outcome.status.value)
        results.append((entry, outcome))
    return results


def registry_exit_code(results) -> int:
    statuses = {outcome.status for _, outcome in results}
    if Status.CONTRADICTED in statuses:
        return 1
    if Status.INCONCLUSIVE in statuses:
        return 2
    return 0


__all__ = [
    'DEEP_FRAME_SCRIPT',
    'REGISTRY',
    'Entry',
    'Outcome',
    'Status',
    'registry_exit_code',
    'run_registry',
]
