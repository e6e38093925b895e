"""AST 출력, parse(pretty(a)) == a"""

from __future__ import annotations

from hosl.syntax.nodes import (
    And,
    Assign,
    BinOp,
    Diamond,
    Emp,
    Eq,
    EvalAt,
    Exists,
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
)

# 단언 연산자 우선순위 (작을수록 느슨)
_ASN_OPS = {Implies: ('=>', 1), Or: ('\\/', 2), And: ('/\\', 3), Star: ('*', 4),
            Tensor: ('(*)', 5)}  # fmt: skip
_PREFIX = 6
_ATOM = 7
_EXPR_PREC = {'+': 1, '-': 1, '*': 2}


def pretty(ast) -> str:
    match ast:
        case Judgement():
            return _judgement(ast)
        case IntLit() | Var() | BinOp() | Quote():
            return _expr(ast)
        case Skip() | Assign() | LetDeref() | EvalAt() | LetNew() | Free():
            return _cmd(ast, tail=True)
        case Seq() | If():
            return _cmd(ast, tail=True)
    return _asn(ast)


# ---------------------------------------------------------------- expressions


def _expr(e, in_assertion: bool = False) -> str:
    match e:
        case IntLit(value):
            return str(value)
        case Var(name):
            return name
        case Quote(body):
            return f"'{_cmd(body, tail=True)}'"
        case BinOp(op, left, right):
            prec = _EXPR_PREC[op]
            text = (
                f'{_operand(left, prec, False, in_assertion)} {op} '
                f'{_operand(right, prec, True, in_assertion)}'
            )
            if in_assertion and op == '*':
                # 단언 안의 곱셈은 항상 괄호
                return f'({_expr(e)})'
            return text
    raise TypeError(f'not an expression: {e!r}')


def _operand(e, prec: int, right: bool, in_assertion: bool) -> str:
    text = _expr(e, in_assertion)
    if isinstance(e, BinOp) and not (in_assertion and e.op == '*'):
        inner = _EXPR_PREC[e.op]
        if inner < prec or (right and inner == prec):
            return f'({text})'
    return text


# ---------------------------------------------------------------- commands


def _cmd(c, tail: bool) -> str:
    match c:
        case Skip():
            return 'skip'
        case Assign(target, source):
            return f'[{_expr(target)}] := {_expr(source)}'
        case EvalAt(addr):
            return f'eval [{_expr(addr)}]'
        case Free(addr):
            return f'free({_expr(addr)})'
        case Seq(first, second):
            left = _cmd(first, tail=False)
            right = _cmd(second, tail=tail)
            if isinstance(second, Seq):
                right = f'({_cmd(second, tail=True)})'
            return f'{left}; {right}'
        case LetDeref(var, addr, body):
            text = f'let {var} = [{_expr(addr)}] in {_cmd(body, tail=True)}'
        case LetNew(var, inits, body):
            values = ', '.join(_expr(init) for init in inits)
            text = f'let {var} = new {values} in {_cmd(body, tail=True)}'
        case If(lhs, rhs, then, orelse):
            text = (
                f'if ({_expr(lhs)} = {_expr(rhs)}) then {_cmd(then, tail=True)} '
                f'else {_cmd(orelse, tail=True)}'
            )
        case _:
            raise TypeError(f'not a command: {c!r}')
    return text if tail else f'({text})'


# ---------------------------------------------------------------- assertions


def _precedence(p) -> int:
    match p:
        case Forall() | Exists():
            return 0
        case Mu(_, params, _, _):
            return _ATOM if params else 0
        case Diamond():
            return _PREFIX
    op = _ASN_OPS.get(type(p))
    return op[1] if op else _ATOM


def _asn(p) -> str:
    match p:
        case TrueAsn():
            return 'true'
        case FalseAsn():
            return 'false'
        case Emp():
            return 'emp'
        case Eq(left, right):
            return f'{_expr(left, True)} = {_expr(right, True)}'
        case Leq(left, right):
            return f'{_expr(left, True)} <= {_expr(right, True)}'
        case PointsTo(addr, value):
            return f'{_expr(addr, True)} |-> {_expr(value, True)}'
        case Triple(pre, code, post):
            return f'{{{_asn(pre)}}}{_expr(code, True)}{{{_asn(post)}}}'
        case RelVar(name, args):
            if not args:
                return name
            return f'{name}({", ".join(_expr(arg, True) for arg in args)})'
        case Forall(var, body):
            return f'forall {var}. {_asn(body)}'
        case Exists(var, body):
            return f'exists {var}. {_asn(body)}'
        case Mu(relvar, params, body, args):
            if not params:
                return f'mu {relvar}. {_asn(body)}'
            arguments = ', '.join(_expr(arg, True) for arg in args)
            return f'(mu {relvar}({", ".join(params)}). {_asn(body)})({arguments})'
        case Diamond(body):
            return f'<> {_wrap(body, _PREFIX, strict=False)}'
    symbol, prec = _ASN_OPS[type(p)]
    left = _wrap(p.left, prec, strict=False)
    right = _wrap(p.right, prec, strict=True)
    return f'{left} {symbol} {right}'


def _wrap(p, prec: int, strict: bool) -> str:
    inner = _precedence(p)
    if inner == 0 or inner < prec or (strict and inner == prec):
        return f'({_asn(p)})'
    return _asn(p)


def _judgement(j: Judgement) -> str:
    context = [f'{name}/{arity}' for name, arity in j.relvars] + list(j.vars)
    hyps = ', '.join(_asn(h) for h in j.hyps)
    head = f'[{", ".join(context)}] '
    return f'{head}{hyps + " " if hyps else ""}|- {_asn(j.goal)}'
