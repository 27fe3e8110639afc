"""Expression trees for univariate real functions, extended-precision
evaluation, truncated Taylor expansion (jets), and an independent
finite-difference derivative oracle.

The expression language is deliberately small: rational arithmetic,
integer powers, ln, sqrt, atan and sin over a single variable named
``t`` or ``x``.  Two aliases, ``f(.)`` and ``H(.)``, expand at parse
time into the arctangent-corridor function

    f(u) = pi + (1/2)*(4+pi)*u - 2*(u+2)*atan(sqrt(u+1))

and its square-substituted form H(u) = f(u^2 - 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import mpmath
from mpmath import mp, mpf

from .errors import (
    DomainError,
    ConvergenceError,
    NonDifferentiableError,
    ParseError,
)

Num = Union[int, float, str, mpf]

# Extra working digits carried through evaluation so that results are
# correctly rounded at the requested precision.
GUARD_DIGITS = 15


@dataclass(frozen=True)
class Precision:
    """Significant decimal digits of working arithmetic (>= 15)."""

    digits: int = 50

    def __post_init__(self):
        if self.digits < 15:
            raise ValueError(f"precision must be >= 15 digits, got {self.digits}")

    def doubled(self) -> "Precision":
        return Precision(2 * self.digits)


DEFAULT_PRECISION = Precision(50)


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


class Expr:
    """Base class of expression nodes.  Nodes are immutable and compare
    structurally."""

    __slots__ = ()


@dataclass(frozen=True)
class Const(Expr):
    """Exact decimal literal (kept as text) or the named constant "pi"."""

    value: str

    def __post_init__(self):
        if self.value != "pi":
            mpf(self.value)  # raises if not a valid decimal literal


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class PowInt(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True)
class Ln(Expr):
    arg: Expr


@dataclass(frozen=True)
class Sqrt(Expr):
    arg: Expr


@dataclass(frozen=True)
class Atan(Expr):
    arg: Expr


@dataclass(frozen=True)
class Sin(Expr):
    arg: Expr


def const(v: Num) -> Const:
    """Build a Const from an int or decimal string."""
    if isinstance(v, int):
        return Const(str(v))
    return Const(str(v))


def variables(e: Expr) -> set:
    """Distinct variable names appearing in e."""
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Const):
        return set()
    if isinstance(e, (Neg, Ln, Sqrt, Atan, Sin)):
        return variables(e.arg)
    if isinstance(e, PowInt):
        return variables(e.base)
    return variables(e.left) | variables(e.right)


def f_of(u: Expr) -> Expr:
    """AST of f(u) = pi + (1/2)*(4+pi)*u - 2*(u+2)*atan(sqrt(u+1))."""
    pi = Const("pi")
    half = Div(Const("1"), Const("2"))
    lin = Mul(Mul(half, Add(Const("4"), pi)), u)
    tail = Mul(Mul(Const("2"), Add(u, Const("2"))), Atan(Sqrt(Add(u, Const("1")))))
    return Sub(Add(pi, lin), tail)


def h_of(u: Expr) -> Expr:
    """AST of H(u) = f(u^2 - 1)."""
    return f_of(Sub(PowInt(u, 2), Const("1")))


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_FUNCS: dict = {"ln": Ln, "sqrt": Sqrt, "atan": Atan, "sin": Sin}
_ALIASES: dict = {"f": f_of, "H": h_of}
_VAR_NAMES = ("t", "x")


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def peek(self):
        return self._scan(advance=False)

    def next(self):
        return self._scan(advance=True)

    def _scan(self, advance: bool):
        text, i = self.text, self.pos
        while i < len(text) and text[i] in " \t":
            i += 1
        if i >= len(text):
            tok = ("eof", "", i)
        else:
            ch = text[i]
            if ch in "+-*/^()":
                tok = (ch, ch, i)
                i += 1
            elif ch.isdigit() or ch == ".":
                j = i
                while j < len(text) and (text[j].isdigit() or text[j] == "."):
                    j += 1
                lit = text[i:j]
                if lit.count(".") > 1 or lit == ".":
                    raise ParseError(f"malformed number {lit!r}", i)
                tok = ("num", lit, i)
                i = j
            elif ch.isalpha() or ch == "_":
                j = i
                while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                    j += 1
                tok = ("ident", text[i:j], i)
                i = j
            else:
                raise ParseError(f"unexpected character {ch!r}", i)
        if advance:
            self.pos = i if tok[0] == "eof" else i
        return tok


class _Parser:
    """Recursive descent over the grammar

        expr   := term (('+'|'-') term)*
        term   := factor (('*'|'/') factor)*
        factor := '-' factor | base ('^' integer)?
        base   := number | 'pi' | variable | func '(' expr ')' | '(' expr ')'

    Unary minus is accepted at the factor level so that printed Neg
    nodes re-parse to themselves.
    """

    def __init__(self, text: str):
        self.toks = _Tokenizer(text)
        self.var_seen: Optional[str] = None

    def parse(self) -> Expr:
        e = self.expr()
        kind, _, pos = self.toks.peek()
        if kind != "eof":
            raise ParseError("unexpected trailing input", pos)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            kind, _, _ = self.toks.peek()
            if kind == "+":
                self.toks.next()
                e = Add(e, self.term())
            elif kind == "-":
                self.toks.next()
                e = Sub(e, self.term())
            else:
                return e

    def term(self) -> Expr:
        e = self.factor()
        while True:
            kind, _, _ = self.toks.peek()
            if kind == "*":
                self.toks.next()
                e = Mul(e, self.factor())
            elif kind == "/":
                self.toks.next()
                e = Div(e, self.factor())
            else:
                return e

    def factor(self) -> Expr:
        kind, _, _ = self.toks.peek()
        if kind == "-":
            self.toks.next()
            return Neg(self.factor())
        e = self.base()
        kind, _, _ = self.toks.peek()
        if kind == "^":
            self.toks.next()
            e = PowInt(e, self.integer())
        return e

    def integer(self) -> int:
        sign = 1
        kind, lit, pos = self.toks.next()
        if kind == "-":
            sign = -1
            kind, lit, pos = self.toks.next()
        if kind != "num" or "." in lit:
            raise ParseError("expected integer exponent", pos)
        return sign * int(lit)

    def base(self) -> Expr:
        kind, lit, pos = self.toks.next()
        if kind == "num":
            return Const(lit)
        if kind == "(":
            e = self.expr()
            kind, _, pos = self.toks.next()
            if kind != ")":
                raise ParseError("expected ')'", pos)
            return e
        if kind == "ident":
            if lit == "pi":
                return Const("pi")
            nkind, _, _ = self.toks.peek()
            if nkind == "(":
                if lit not in _FUNCS and lit not in _ALIASES:
                    raise ParseError(f"unknown function {lit!r}", pos)
                self.toks.next()
                arg = self.expr()
                kind, _, cpos = self.toks.next()
                if kind != ")":
                    raise ParseError("expected ')'", cpos)
                if lit in _ALIASES:
                    return _ALIASES[lit](arg)
                return _FUNCS[lit](arg)
            if lit in _VAR_NAMES:
                if self.var_seen is not None and self.var_seen != lit:
                    raise ParseError(
                        f"second variable {lit!r} (already using {self.var_seen!r})",
                        pos,
                    )
                self.var_seen = lit
                return Var(lit)
            raise ParseError(f"unknown identifier {lit!r}", pos)
        raise ParseError(f"unexpected token {lit!r}" if lit else "unexpected end of input", pos)


def parse(text: str) -> Expr:
    """Parse expression text into an AST.

    The aliases f(.) and H(.) are expanded during parsing, so the
    resulting tree contains only core nodes.
    """
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Pretty printing (round-trips through parse)
# ---------------------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(e: Expr) -> int:
    if isinstance(e, (Add, Sub)):
        return _PREC_ADD
    if isinstance(e, (Mul, Div)):
        return _PREC_MUL
    if isinstance(e, Neg):
        return _PREC_NEG
    if isinstance(e, PowInt):
        return _PREC_POW
    return _PREC_ATOM


def to_text(e: Expr) -> str:
    """Render e so that parse(to_text(e)) is structurally equal to e."""

    def wrap(child: Expr, min_prec: int) -> str:
        s = to_text(child)
        return f"({s})" if _prec(child) < min_prec else s

    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        # parenthesize nested Neg for readability; the grammar would
        # accept the bare form as well
        return "-" + wrap(e.arg, _PREC_NEG + (1 if isinstance(e.arg, Neg) else 0))
    if isinstance(e, Add):
        return f"{wrap(e.left, _PREC_ADD)} + {wrap(e.right, _PREC_ADD + 1)}"
    if isinstance(e, Sub):
        return f"{wrap(e.left, _PREC_ADD)} - {wrap(e.right, _PREC_ADD + 1)}"
    if isinstance(e, Mul):
        return f"{wrap(e.left, _PREC_MUL)}*{wrap(e.right, _PREC_MUL + 1)}"
    if isinstance(e, Div):
        return f"{wrap(e.left, _PREC_MUL)}/{wrap(e.right, _PREC_MUL + 1)}"
    if isinstance(e, PowInt):
        return f"{wrap(e.base, _PREC_ATOM)}^{e.exponent}"
    for cls, name in ((Ln, "ln"), (Sqrt, "sqrt"), (Atan, "atan"), (Sin, "sin")):
        if isinstance(e, cls):
            return f"{name}({to_text(e.arg)})"
    raise TypeError(f"not an Expr: {e!r}")


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _const_value(lit: str) -> mpf:
    return +mp.pi if lit == "pi" else mpf(lit)


def _eval(e: Expr, x: mpf) -> mpf:
    if isinstance(e, Const):
        return _const_value(e.value)
    if isinstance(e, Var):
        return x
    if isinstance(e, Neg):
        return -_eval(e.arg, x)
    if isinstance(e, Add):
        return _eval(e.left, x) + _eval(e.right, x)
    if isinstance(e, Sub):
        return _eval(e.left, x) - _eval(e.right, x)
    if isinstance(e, Mul):
        return _eval(e.left, x) * _eval(e.right, x)
    if isinstance(e, Div):
        num = _eval(e.left, x)
        den = _eval(e.right, x)
        if den == 0:
            raise DomainError(f"division by zero in {to_text(e)}")
        return num / den
    if isinstance(e, PowInt):
        b = _eval(e.base, x)
        if e.exponent < 0 and b == 0:
            raise DomainError(f"zero base with negative exponent in {to_text(e)}")
        return b ** e.exponent
    if isinstance(e, Ln):
        a = _eval(e.arg, x)
        if a <= 0:
            raise DomainError(f"ln of non-positive value {mpmath.nstr(a, 8)}")
        return mpmath.ln(a)
    if isinstance(e, Sqrt):
        a = _eval(e.arg, x)
        if a < 0:
            raise DomainError(f"sqrt of negative value {mpmath.nstr(a, 8)}")
        return mpmath.sqrt(a)
    if isinstance(e, Atan):
        return mpmath.atan(_eval(e.arg, x))
    if isinstance(e, Sin):
        return mpmath.sin(_eval(e.arg, x))
    raise TypeError(f"not an Expr: {e!r}")


def eval_expr(e: Expr, x: Num, p: Precision = DEFAULT_PRECISION) -> mpf:
    """Evaluate e at x, accurate to ~10^(2-digits) relative error.

    Domain violations raise DomainError rather than returning NaN.
    """
    with mp.workdps(p.digits + GUARD_DIGITS):
        val = _eval(e, mpmath.mpmathify(x))
    with mp.workdps(p.digits):
        return +val


# ---------------------------------------------------------------------------
# Jets: truncated Taylor expansion at a point
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Jet:
    """Taylor coefficients c_0..c_order of a function at a center point.

    derivative(k) == k! * coeffs[k] by definition.
    """

    center: mpf
    order: int
    coeffs: tuple
    digits: int

    def coefficient(self, k: int) -> mpf:
        return self.coeffs[k]

    def derivative(self, k: int) -> mpf:
        with mp.workdps(self.digits):
            return +(self.coeffs[k] * mpmath.factorial(k))

    def derivatives(self) -> list:
        return [self.derivative(k) for k in range(self.order + 1)]


def _s_scal(v: mpf, n: int) -> list:
    s = [mpf(0)] * (n + 1)
    s[0] = v
    return s


def _s_mul(a: list, b: list) -> list:
    n = len(a) - 1
    out = []
    for k in range(n + 1):
        out.append(mpmath.fsum(a[j] * b[k - j] for j in range(k + 1)))
    return out


def _s_div(w: list, v: list, what: str = "expression") -> list:
    n = len(w) - 1
    if v[0] == 0:
        raise DomainError(f"division by zero at expansion center ({what})")
    out = [w[0] / v[0]]
    for k in range(1, n + 1):
        acc = w[k] - mpmath.fsum(out[j] * v[k - j] for j in range(k))
        out.append(acc / v[0])
    return out


def _s_powint(u: list, k: int) -> list:
    n = len(u) - 1
    if k == 0:
        return _s_scal(mpf(1), n)
    neg = k < 0
    k = abs(k)
    acc = None
    base = u
    while k:
        if k & 1:
            acc = base if acc is None else _s_mul(acc, base)
        k >>= 1
        if k:
            base = _s_mul(base, base)
    if neg:
        acc = _s_div(_s_scal(mpf(1), n), acc, "negative power")
    return acc


def _s_ln(u: list) -> list:
    # w = ln(u):  u*w' = u'  =>  k*w_k*u_0 = k*u_k - sum_{j<k} j*w_j*u_{k-j}
    n = len(u) - 1
    if u[0] <= 0:
        raise DomainError("ln of non-positive value at expansion center")
    out = [mpmath.ln(u[0])]
    for k in range(1, n + 1):
        acc = k * u[k] - mpmath.fsum(j * out[j] * u[k - j] for j in range(1, k))
        out.append(acc / (k * u[0]))
    return out


def _s_sqrt(u: list) -> list:
    # w^2 = u  =>  w_k = (u_k - sum_{0<j<k} w_j*w_{k-j}) / (2*w_0)
    n = len(u) - 1
    if u[0] < 0:
        raise DomainError("sqrt of negative value at expansion center")
    if u[0] == 0:
        if n == 0:
            return [mpf(0)]
        raise NonDifferentiableError("sqrt is not differentiable where its argument vanishes")
    out = [mpmath.sqrt(u[0])]
    for k in range(1, n + 1):
        acc = u[k] - mpmath.fsum(out[j] * out[k - j] for j in range(1, k))
        out.append(acc / (2 * out[0]))
    return out


def _s_atan(u: list) -> list:
    # w = atan(u):  w'*(1+u^2) = u', solved coefficient by coefficient.
    n = len(u) - 1
    d = _s_mul(u, u)
    d[0] += 1
    out = [mpmath.atan(u[0])]
    for k in range(1, n + 1):
        acc = k * u[k] - mpmath.fsum(j * out[j] * d[k - j] for j in range(1, k))
        out.append(acc / (k * d[0]))
    return out


def _s_sin(u: list) -> list:
    # Joint recurrence for s = sin(u), c = cos(u):  s' = u'*c,  c' = -u'*s.
    n = len(u) - 1
    s = [mpmath.sin(u[0])]
    c = [mpmath.cos(u[0])]
    for k in range(1, n + 1):
        s.append(mpmath.fsum(j * u[j] * c[k - j] for j in range(1, k + 1)) / k)
        c.append(-mpmath.fsum(j * u[j] * s[k - j] for j in range(1, k + 1)) / k)
    return s


def _series(e: Expr, center: mpf, n: int) -> list:
    if isinstance(e, Const):
        return _s_scal(_const_value(e.value), n)
    if isinstance(e, Var):
        s = _s_scal(+center, n)
        if n >= 1:
            s[1] = mpf(1)
        return s
    if isinstance(e, Neg):
        return [-c for c in _series(e.arg, center, n)]
    if isinstance(e, Add):
        a, b = _series(e.left, center, n), _series(e.right, center, n)
        return [x + y for x, y in zip(a, b)]
    if isinstance(e, Sub):
        a, b = _series(e.left, center, n), _series(e.right, center, n)
        return [x - y for x, y in zip(a, b)]
    if isinstance(e, Mul):
        return _s_mul(_series(e.left, center, n), _series(e.right, center, n))
    if isinstance(e, Div):
        return _s_div(_series(e.left, center, n), _series(e.right, center, n), to_text(e.right))
    if isinstance(e, PowInt):
        return _s_powint(_series(e.base, center, n), e.exponent)
    if isinstance(e, Ln):
        return _s_ln(_series(e.arg, center, n))
    if isinstance(e, Sqrt):
        return _s_sqrt(_series(e.arg, center, n))
    if isinstance(e, Atan):
        return _s_atan(_series(e.arg, center, n))
    if isinstance(e, Sin):
        return _s_sin(_series(e.arg, center, n))
    raise TypeError(f"not an Expr: {e!r}")


def jet(e: Expr, center: Num, order: int, p: Precision = DEFAULT_PRECISION) -> Jet:
    """Taylor-expand e at the center point up to the given order.

    Coefficients are produced by the classical truncated-power-series
    recurrences; atan goes through its derivative ODE w'*(1+u^2) = u'
    so the closed-form derivative formula can be tested against it
    independently.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    with mp.workdps(p.digits + GUARD_DIGITS + order):
        coeffs = _series(e, mpmath.mpmathify(center), order)
    with mp.workdps(p.digits):
        return Jet(
            center=+mpmath.mpmathify(center),
            order=order,
            coeffs=tuple(+c for c in coeffs),
            digits=p.digits,
        )


# ---------------------------------------------------------------------------
# Finite-difference oracle
# ---------------------------------------------------------------------------


def _central_diff(fn: Callable, x0: mpf, k: int, h: mpf) -> mpf:
    # Symmetric k-th difference on step h; nodes sit at half-integer
    # multiples of h when k is odd.  Truncation error is O(h^2).
    acc = mpf(0)
    for i in range(k + 1):
        w = (-1) ** i * math.comb(k, i)
        acc += w * fn(x0 + (mpf(k) / 2 - i) * h)
    return acc / h ** k


def fd_derivative(
    e: Expr,
    center: Num,
    k: int,
    p: Precision = DEFAULT_PRECISION,
    tol: Optional[Num] = None,
):
    """k-th derivative of e at center by central differences with
    3-level Richardson extrapolation.

    Returns (value, error_estimate).  The step is h = 10^(-digits/(k+2)),
    which balances truncation against subtractive cancellation at the
    working precision.  When tol is given and the error estimate
    exceeds it, ConvergenceError is raised.
    """
    if k < 1:
        raise ValueError("derivative order must be >= 1")
    wd = p.digits + GUARD_DIGITS
    with mp.workdps(wd):
        x0 = mpmath.mpmathify(center)
        h = mpf(10) ** (-mpf(p.digits) / (k + 2))
        fn = lambda x: _eval(e, x)
        d0 = _central_diff(fn, x0, k, h)
        d1 = _central_diff(fn, x0, k, h / 2)
        d2 = _central_diff(fn, x0, k, h / 4)
        t1 = (4 * d1 - d0) / 3
        t1b = (4 * d2 - d1) / 3
        t2 = (16 * t1b - t1) / 15
        # Roundoff floor: the finest stencil amplifies absolute errors
        # of the function values by 2^k / (h/4)^k.
        fscale = max(abs(fn(x0 + h)), abs(fn(x0 - h)), mpf(1))
        roundoff = fscale * 2 ** k * mpf(10) ** (-wd) / (h / 4) ** k
        err = abs(t2 - t1b) + abs(t1b - t1) / 15 + roundoff
    with mp.workdps(p.digits):
        value, err = +t2, +err
    if tol is not None and err > mpmath.mpmathify(tol):
        raise ConvergenceError(
            f"finite differences did not converge: error estimate {mpmath.nstr(err, 5)} > tol"
        )
    return value, err
