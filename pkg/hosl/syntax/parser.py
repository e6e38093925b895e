"""재귀 하강 파서

단언 안에서 '*'는 분리 논리곱이다. 곱셈은 괄호 안에서만 쓴다: (x * y) = 2.
"""

from __future__ import annotations

import logging
from typing import Literal

from hosl.errors import ArityError, ContractivenessError, ParseError
from hosl.syntax.lexer import Token, tokenize
from hosl.syntax.nodes import (
    And,
    Assertion,
    Assign,
    BinOp,
    Command,
    Diamond,
    Emp,
    Eq,
    EvalAt,
    Exists,
    Expr,
    FalseAsn,
    Forall,
    Free,
    If,
    Implies,
    IntLit,
    Judgement,
    Leq,
    LetDeref,
    LetNew,
    Mu,
    Or,
    PointsTo,
    Quote,
    RelVar,
    Seq,
    Skip,
    Star,
    Tensor,
    TrueAsn,
    Triple,
    Var,
    iff,
)
from hosl.syntax.ops import (
    contractive_path,
    free_vars,
    points_to_any,
    points_to_spec,
    rename_apart,
    subterms,
)

logger = logging.getLogger(__name__)

Kind = Literal['program', 'assertion', 'expr', 'judgement']

_EXPR_FOLLOW = ('=', '<=', '|->', '+', '-')


def parse(text: str, kind: Kind = 'assertion'):
    parser = _Parser(text)
    match kind:
        case 'program':
            result = parser.command()
        case 'assertion':
            result = parser.assertion()
        case 'expr':
            result = parser.expr()
        case 'judgement':
            result = parser.judgement()
        case _:
            raise ValueError(f'unknown parse kind {kind!r}')
    parser.expect('EOF', 'end of input')
    if isinstance(result, Judgement):
        return result
    _check_mu_arity(result)
    return rename_apart(result)


def parse_program(text: str) -> Command:
    return parse(text, 'program')


def parse_assertion(text: str) -> Assertion:
    return parse(text, 'assertion')


def parse_expr(text: str) -> Expr:
    return parse(text, 'expr')


def parse_judgement(text: str) -> Judgement:
    return parse(text, 'judgement')


def _check_mu_arity(ast) -> None:
    for node in subterms(ast):
        if isinstance(node, Mu) and len(node.params) != len(node.args):
            raise ArityError(node.relvar, len(node.params), len(node.args))


class _Parser:
    def __init__(self, text: str):
        self.tokens: list[Token] = tokenize(text)
        self.pos = 0
        self.arities: dict[str, int] = {}

    # -------------------------------------------------------------- tokens

    def peek(self, offset: int = 0) -> Token:
        index = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[index]

    def advance(self) -> Token:
        token = self.peek()
        if token.kind != 'EOF':
            self.pos += 1
        return token

    def accept(self, kind: str) -> Token | None:
        if self.peek().kind == kind:
            return self.advance()
        return None

    def expect(self, kind: str, what: str | None = None) -> Token:
        token = self.accept(kind)
        if token is None:
            self.fail(what or repr(kind))
        return token

    def fail(self, expected: str):
        token = self.peek()
        found = token.text or 'end of input'
        raise ParseError((token.line, token.column), expected, found)

    # -------------------------------------------------------------- expressions

    def expr(self) -> Expr:
        left = self._term()
        while self.peek().kind in ('+', '-'):
            op = self.advance().kind
            left = BinOp(op, left, self._term())
        return left

    def _term(self) -> Expr:
        left = self._factor()
        while self.accept('*'):
            left = BinOp('*', left, self._factor())
        return left

    def assertion_expr(self) -> Expr:
        """단언 위치의 식: 최상위 곱셈 없음"""
        left = self._factor()
        while self.peek().kind in ('+', '-'):
            op = self.advance().kind
            left = BinOp(op, left, self._factor())
        return left

    def _factor(self) -> Expr:
        token = self.peek()
        match token.kind:
            case 'INT':
                self.advance()
                return IntLit(int(token.text))
            case '-':
                self.advance()
                return IntLit(-int(self.expect('INT', 'an integer').text))
            case 'ID':
                self.advance()
                return Var(token.text)
            case '(':
                self.advance()
                inner = self.expr()
                self.expect(')', "')'")
                return inner
            case "'":
                self.advance()
                body = self.command()
                self.expect("'", 'closing quote')
                return Quote(body)
        self.fail('an expression')

    # -------------------------------------------------------------- commands

    def command(self) -> Command:
        left = self._unit()
        while self.accept(';'):
            left = Seq(left, self._unit())
        return left

    def _unit(self) -> Command:
        token = self.peek()
        match token.kind:
            case 'skip':
                self.advance()
                return Skip()
            case '[':
                self.advance()
                target = self.expr()
                self.expect(']', "']'")
                self.expect(':=', "':='")
                return Assign(target, self.expr())
            case 'let':
                return self._let()
            case 'eval':
                self.advance()
                self.expect('[', "'['")
                addr = self.expr()
                self.expect(']', "']'")
                return EvalAt(addr)
            case 'free':
                self.advance()
                self.expect('(', "'('")
                addr = self.expr()
                self.expect(')', "')'")
                return Free(addr)
            case 'if':
                self.advance()
                self.expect('(', "'('")
                lhs = self.expr()
                self.expect('=', "'='")
                rhs = self.expr()
                self.expect(')', "')'")
                self.expect('then', "'then'")
                then = self.command()
                self.expect('else', "'else'")
                return If(lhs, rhs, then, self.command())
            case '(':
                self.advance()
                inner = self.command()
                self.expect(')', "')'")
                return inner
        self.fail('a command')

    def _let(self) -> Command:
        self.expect('let')
        name = self.expect('ID', 'a variable').text
        self.expect('=', "'='")
        if self.accept('['):
            addr = self.expr()
            self.expect(']', "']'")
            self.expect('in', "'in'")
            return LetDeref(name, addr, self.command())
        self.expect('new', "'[' or 'new'")
        inits = [self.expr()]
        while self.accept(','):
            inits.append(self.expr())
        self.expect('in', "'in'")
        return LetNew(name, tuple(inits), self.command())

    # -------------------------------------------------------------- assertions

    def assertion(self) -> Assertion:
        left = self._disjunction()
        while True:
            if self.accept('=>'):
                left = Implies(left, self._disjunction())
            elif self.accept('<=>'):
                left = iff(left, self._disjunction())
            else:
                return left

    def _disjunction(self) -> Assertion:
        left = self._conjunction()
        while self.accept('\\/'):
            left = Or(left, self._conjunction())
        return left

    def _conjunction(self) -> Assertion:
        left = self._separation()
        while self.accept('/\\'):
            left = And(left, self._separation())
        return left

    def _separation(self) -> Assertion:
        left = self._tensor()
        while self.accept('*'):
            left = Star(left, self._tensor())
        return left

    def _tensor(self) -> Assertion:
        left = self._prefix()
        while self.accept('(*)'):
            left = Tensor(left, self._prefix())
        return left

    def _prefix(self) -> Assertion:
        if self.accept('<>'):
            return Diamond(self._prefix())
        return self._atom()

    def _atom(self) -> Assertion:
        token = self.peek()
        match token.kind:
            case 'true':
                self.advance()
                return TrueAsn()
            case 'false':
                self.advance()
                return FalseAsn()
            case 'emp':
                self.advance()
                return Emp()
            case 'forall' | 'exists':
                self.advance()
                name = self.expect('ID', 'a variable').text
                self.expect('.', "'.'")
                body = self.assertion()
                return Forall(name, body) if token.kind == 'forall' else Exists(
                    name, body
                )
            case 'mu':
                return self._mu()
            case '{':
                self.advance()
                pre = self.assertion()
                self.expect('}', "'}'")
                code = self.assertion_expr()
                self.expect('{', "'{'")
                post = self.assertion()
                self.expect('}', "'}'")
                return Triple(pre, code, post)
            case 'ID':
                following = self.peek(1).kind
                if following == '(':
                    return self._relvar()
                if following not in _EXPR_FOLLOW:
                    self.advance()
                    return self._use_relvar(token.text, ())
                return self._expression_atom()
            case '(':
                return self._parenthesised()
            case 'INT' | '-' | "'":
                return self._expression_atom()
        self.fail('an assertion')

    def _parenthesised(self) -> Assertion:
        start = self.pos
        asn_error: ParseError | None = None
        try:
            self.expect('(')
            inner = self.assertion()
            self.expect(')', "')'")
            following = self.peek().kind
            if isinstance(inner, Mu) and inner.params and following == '(':
                args = self._arguments()
                if len(args) != len(inner.params):
                    raise ArityError(inner.relvar, len(inner.params), len(args))
                return Mu(inner.relvar, inner.params, inner.body, args)
            if following not in _EXPR_FOLLOW:
                return inner
        except ParseError as err:
            asn_error = err
        asn_reached = self.pos
        self.pos = start
        try:
            return self._expression_atom()
        except ParseError as err:
            if asn_error is not None and asn_reached > self.pos:
                raise asn_error from None
            raise err

    def _expression_atom(self) -> Assertion:
        left = self.assertion_expr()
        if self.accept('='):
            return Eq(left, self.assertion_expr())
        if self.accept('<='):
            return Leq(left, self.assertion_expr())
        if self.accept('|->'):
            if self.accept('_'):
                return points_to_any(left)
            if self.accept('{'):
                pre = self.assertion()
                self.expect('}', "'}'")
                self.expect('_', "'_'")
                self.expect('{', "'{'")
                post = self.assertion()
                self.expect('}', "'}'")
                return points_to_spec(left, pre, post)
            return PointsTo(left, self.assertion_expr())
        self.fail("'=', '<=' or '|->'")

    def _arguments(self) -> tuple[Expr, ...]:
        self.expect('(', "'('")
        args = [self.assertion_expr()]
        while self.accept(','):
            args.append(self.assertion_expr())
        self.expect(')', "')'")
        return tuple(args)

    def _relvar(self) -> Assertion:
        name = self.expect('ID').text
        return self._use_relvar(name, self._arguments())

    def _use_relvar(self, name: str, args: tuple[Expr, ...]) -> Assertion:
        arity = self.arities.get(name)
        if arity is not None and arity != len(args):
            raise ArityError(name, arity, len(args))
        return RelVar(name, args)

    def _mu(self) -> Assertion:
        self.expect('mu')
        name = self.expect('ID', 'a relation variable').text
        params: list[str] = []
        if self.accept('('):
            params.append(self.expect('ID', 'a parameter').text)
            while self.accept(','):
                params.append(self.expect('ID', 'a parameter').text)
            self.expect(')', "')'")
        self.expect('.', "'.'")
        saved = dict(self.arities)
        self.arities[name] = len(params)
        try:
            body = self.assertion()
        finally:
            self.arities = saved
        path = contractive_path(body, name)
        if path is not None:
            raise ContractivenessError(name, path)
        return Mu(name, tuple(params), body, ())

    # -------------------------------------------------------------- judgements

    def judgement(self) -> Judgement:
        start = self.peek()
        declared = self.accept('[') is not None
        relvars: list[tuple[str, int]] = []
        names: list[str] = []
        if declared and not self.accept(']'):
            while True:
                name = self.expect('ID', 'a context entry').text
                if self.accept('/'):
                    relvars.append((name, int(self.expect('INT', 'an arity').text)))
                else:
                    names.append(name)
                if not self.accept(','):
                    break
            self.expect(']', "']'")
        hyps: list[Assertion] = []
        if self.peek().kind != '|-':
            hyps.append(self.assertion())
            while self.accept(','):
                hyps.append(self.assertion())
        self.expect('|-', "'|-'")
        goal = self.assertion()
        parts = [*hyps, goal]
        for part in parts:
            _check_mu_arity(part)
        hyps = [rename_apart(h) for h in hyps]
        goal = rename_apart(goal)
        used_vars, used_rels = _context_of([*hyps, goal])
        if not declared:
            return Judgement(
                tuple(sorted(used_rels.items())),
                tuple(sorted(used_vars)),
                tuple(hyps),
                goal,
            )
        position = (start.line, start.column)
        missing = sorted(used_vars - set(names))
        if missing:
            raise ParseError(position, f'context declaring {", ".join(missing)}')
        declared_arity = dict(relvars)
        for name, arity in used_rels.items():
            if name not in declared_arity:
                raise ParseError(position, f'context declaring {name}/{arity}')
            if declared_arity[name] != arity:
                raise ArityError(name, declared_arity[name], arity)
        return Judgement(tuple(relvars), tuple(names), tuple(hyps), goal)


def _context_of(parts) -> tuple[set[str], dict[str, int]]:
    names: set[str] = set()
    relvars: dict[str, int] = {}
    for part in parts:
        free, free_rel = free_vars(part)
        names |= free
        for node in subterms(part):
            if isinstance(node, RelVar) and node.name in free_rel:
                relvars.setdefault(node.name, len(node.args))
    return names, relvars
