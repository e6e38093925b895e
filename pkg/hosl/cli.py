"""hosl 명령줄 도구"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import humanize

from hosl.counterexamples import registry_exit_code, run_registry
from hosl.errors import HoslError
from hosl.interp import (
    DEFAULT_FUEL,
    Done,
    Env,
    Fault,
    HeapMap,
    exec_command,
    parse_heap,
    show_heap,
)
from hosl.logic import check_all, load_script, normalize_otimes, simplify
from hosl.semantics import (
    Fail,
    TestConfig,
    Verdict,
    Witness,
    default_config,
    load_config,
    replay,
    test_goal,
)
from hosl.syntax import Implies, Triple, parse, pretty

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 3

KINDS = ('program', 'assertion', 'expr', 'judgement')


class _Parser(argparse.ArgumentParser):
    """사용법 오류도 입력 오류(3)로 끝낸다"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f'{self.prog}: error: {message}\n')


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog='hosl',
        description='Separation logic for higher-order store: '
        'parse, run, check proofs and test triples',
    )
    parser.add_argument(
        '--json', action='store_true', help='print JSON lines instead of text'
    )
    parser.add_argument(
        '-v', '--verbose', action='count', default=0, help='-v INFO, -vv DEBUG'
    )
    commands = parser.add_subparsers(dest='command', required=True)

    p = commands.add_parser('parse', help='parse and pretty-print a file')
    p.add_argument('file')
    p.add_argument('--kind', choices=KINDS, default='assertion')
    p.set_defaults(handler=cmd_parse)

    p = commands.add_parser('run', help='run a program on an initial heap')
    p.add_argument('program')
    p.add_argument('--heap', help="heap file with 'addr = value' lines")
    p.add_argument('--fuel', type=int, default=DEFAULT_FUEL)
    p.set_defaults(handler=cmd_run)

    p = commands.add_parser('check', help='check a proof script')
    p.add_argument('script')
    p.add_argument(
        '--admit-unsound',
        action='store_true',
        help='accept the rejected In rule (demonstration only)',
    )
    p.set_defaults(handler=cmd_check)

    p = commands.add_parser('test', help='test a triple or entailment')
    p.add_argument('goal')
    p.add_argument('--config', required=True)
    p.add_argument('--replay', metavar='WITNESS', help='re-run one JSON witness')
    p.set_defaults(handler=cmd_test)

    p = commands.add_parser('counterexamples', help='run the soundness registry')
    p.add_argument('--config')
    p.add_argument('--fuel', type=int)
    p.add_argument('--admit-unsound', action='store_true')
    p.set_defaults(handler=cmd_counterexamples)

    p = commands.add_parser('normalize', help='push (*) inward in an assertion')
    p.add_argument('file')
    p.add_argument(
        '--simplify', action='store_true', help='also apply the lattice laws'
    )
    p.set_defaults(handler=cmd_normalize)
    return parser


# ---------------------------------------------------------------- helpers


def _read(path: str) -> str:
    return Path(path).read_text(encoding='utf-8')


def _emit(args, record: dict, text: str) -> None:
    if args.json:
        print(json.dumps(record, ensure_ascii=False))
    else:
        print(text)


def _elapsed(start: float) -> str:
    return humanize.precisedelta(
        time.perf_counter() - start, minimum_unit='milliseconds'
    )


def _millis(start: float) -> int:
    return round((time.perf_counter() - start) * 1000)


def _footer(args, start: float) -> None:
    if not args.json:
        print(f'({_elapsed(start)})')


# ---------------------------------------------------------------- commands


def cmd_parse(args) -> int:
    ast = parse(_read(args.file), args.kind)
    _emit(args, {'kind': args.kind, 'ast': pretty(ast)}, pretty(ast))
    return EXIT_OK


def cmd_run(args) -> int:
    start = time.perf_counter()
    program = parse(_read(args.program), 'program')
    heap = parse_heap(_read(args.heap)) if args.heap else HeapMap.of({})
    outcome = exec_command(program, Env(), heap, args.fuel)
    match outcome:
        case Done(final):
            code, text = 0, f'DONE {show_heap(final)}'
            record = {'outcome': 'done', 'heap': show_heap(final)}
        case Fault(reason):
            code, text = 1, f'FAULT ({reason})'
            record = {'outcome': 'fault', 'reason': reason}
        case _:
            code, text = 2, f'OUT-OF-FUEL after {humanize.intcomma(args.fuel)} steps'
            record = {'outcome': 'out-of-fuel', 'fuel': args.fuel}
    _emit(args, {'kind': 'run', **record, 'millis': _millis(start)}, text)
    _footer(args, start)
    return code


def cmd_check(args) -> int:
    start = time.perf_counter()
    roots = load_script(_read(args.script))
    report = check_all(roots, admit_unsound=args.admit_unsound)
    record = {
        'kind': 'check',
        'script': args.script,
        'verdict': 'ok' if report.ok else 'rejected',
        'failures': [
            {'path': path, 'message': message} for path, message in report.failures
        ],
        'stats': report.stats,
        'millis': _millis(start),
    }
    applications = sum(report.stats.values())
    lines = [f'{path}: {message}' for path, message in report.failures]
    summary = 'OK' if report.ok else f'REJECTED ({len(report.failures)} failure(s))'
    lines.append(
        f'{summary}: {len(roots)} proof(s), '
        f'{humanize.intcomma(applications)} rule application(s)'
    )
    _emit(args, record, '\n'.join(lines))
    _footer(args, start)
    return EXIT_OK if report.ok else 1


def _goal_kind(goal) -> str:
    match goal:
        case Triple():
            return 'triple'
        case Implies():
            return 'entailment'
    return 'validity'


def _load_witness(path: str) -> Witness:
    data = json.loads(_read(path))
    if not isinstance(data, dict):
        raise HoslError(f'{path}: expected a JSON object')
    return Witness.from_json(data.get('witness', data))


def verdict_exit_code(verdict: Verdict, cfg: TestConfig) -> int:
    """Pass 0, Fail 1, 미결 비율 초과 2"""
    if isinstance(verdict, Fail):
        return 1
    if verdict.samples:
        ratio = verdict.inconclusive / verdict.samples
    else:
        ratio = 1.0 if verdict.inconclusive else 0.0
    return 2 if ratio > cfg.inconclusive_threshold else 0


def cmd_test(args) -> int:
    start = time.perf_counter()
    cfg = load_config(args.config)
    goal = parse(_read(args.goal))
    if args.replay:
        verdict = replay(goal, _load_witness(args.replay), cfg)
    else:
        verdict = test_goal(goal, cfg)
    record = {
        'kind': _goal_kind(goal),
        'goal': pretty(goal),
        'verdict': 'pass' if verdict.ok else 'fail',
        'samples': verdict.samples,
        'inconclusive': verdict.inconclusive,
        'millis': _millis(start),
    }
    if isinstance(verdict, Fail):
        record['witness'] = verdict.witness.to_json()
    lines = [
        f'{record["verdict"].upper()}: {record["goal"]}',
        f'{humanize.intcomma(verdict.samples)} sample(s), '
        f'{humanize.intcomma(verdict.inconclusive)} inconclusive',
    ]
    if isinstance(verdict, Fail):
        lines.append('witness: ' + json.dumps(record['witness'], ensure_ascii=False))
    _emit(args, record, '\n'.join(lines))
    _footer(args, start)
    return verdict_exit_code(verdict, cfg)


def cmd_counterexamples(args) -> int:
    start = time.perf_counter()
    cfg = load_config(args.config) if args.config else default_config()
    results = run_registry(cfg, fuel=args.fuel, admit_unsound=args.admit_unsound)
    width = max(len(entry.name) for entry, _ in results)
    for entry, outcome in results:
        record = {
            'kind': 'counterexample',
            'name': entry.name,
            'status': outcome.status.value,
            'detail': outcome.detail,
        }
        if outcome.witness is not None:
            record['witness'] = outcome.witness.to_json()
        text = f'{entry.name:<{width}}  {outcome.status.value:<13}  {outcome.detail}'
        _emit(args, record, text)
    _footer(args, start)
    return registry_exit_code(results)


def cmd_normalize(args) -> int:
    p = normalize_otimes(parse(_read(args.file)))
    if args.simplify:
        p = simplify(p)
    _emit(args, {'kind': 'normalize', 'assertion': pretty(p)}, pretty(p))
    return EXIT_OK


# ---------------------------------------------------------------- entry


def _configure_logging(verbosity: int) -> None:
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s')


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_ERROR
    _configure_logging(args.verbose)
    try:
        return args.handler(args)
    except FileNotFoundError as e:
        print(f'파일을 찾을 수 없습니다: {e.filename}', file=sys.stderr)
    except UnicodeDecodeError as e:
        print(f'UTF-8로 읽을 수 없는 파일입니다: {e.reason}', file=sys.stderr)
    except json.JSONDecodeError as e:
        print(f'잘못된 JSON: {e}', file=sys.stderr)
    except HoslError as e:
        print(f'error: {e}', file=sys.stderr)
    except KeyboardInterrupt:
        print('\nKeyboard Interrupt detected.', file=sys.stderr)
    return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(main())
