"""Exact scalar arithmetic for the search engine.

Every coefficient that can appear in a periodic fractional-linear recursion
of order two or three lives in the cyclotomic field Q(zeta12) =
Q[x]/(x^4 - x^2 + 1), where zeta is a primitive twelfth root of unity.
The field contains the imaginary unit i = zeta^3, sqrt(3) = 2*zeta - zeta^3,
and every twelfth root of unity, so a single scalar type covers all of them.

Elements are stored on the power basis (1, zeta, zeta^2, zeta^3) with
arbitrary-precision rational coordinates.  All operations are exact; the
only approximate objects are ComplexApprox values produced by `embed`,
which carry their working precision with them.  `recognize` maps such an
approximation back to an exact candidate; callers must confirm candidates
by exact substitution before trusting them.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from fractions import Fraction

import mpmath

__all__ = [
    "CycloElem",
    "ComplexApprox",
    "ScalarParseError",
    "embed",
    "recognize",
    "root_of_unity_order",
    "parse_scalar",
    "render_scalar",
    "render_scalar_pretty",
]

_F0 = Fraction(0)
_F1 = Fraction(1)


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    raise TypeError(f"expected int or Fraction, got {type(v).__name__}")


@dataclass(frozen=True)
class CycloElem:
    """Element of Q(zeta12) with coordinates over the basis (1, zeta, zeta^2, zeta^3).

    The representation is unique, so dataclass equality is field equality.
    Arithmetic reduces by the minimal-polynomial relation zeta^4 = zeta^2 - 1.
    """

    c0: Fraction
    c1: Fraction
    c2: Fraction
    c3: Fraction

    def __post_init__(self):
        for name in ("c0", "c1", "c2", "c3"):
            object.__setattr__(self, name, _frac(getattr(self, name)))

    # -- constructors -------------------------------------------------

    @staticmethod
    def zero() -> "CycloElem":
        return CycloElem(_F0, _F0, _F0, _F0)

    @staticmethod
    def one() -> "CycloElem":
        return CycloElem(_F1, _F0, _F0, _F0)

    @staticmethod
    def from_rational(r) -> "CycloElem":
        return CycloElem(_frac(r), _F0, _F0, _F0)

    @staticmethod
    def zeta() -> "CycloElem":
        return CycloElem(_F0, _F1, _F0, _F0)

    @staticmethod
    def i() -> "CycloElem":
        # i = zeta^3
        return CycloElem(_F0, _F0, _F0, _F1)

    @staticmethod
    def sqrt3() -> "CycloElem":
        # sqrt(3) = 2*zeta - zeta^3
        return CycloElem(_F0, Fraction(2), _F0, Fraction(-1))

    # -- predicates ----------------------------------------------------

    @property
    def coords(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.c0, self.c1, self.c2, self.c3)

    def is_zero(self) -> bool:
        return not (self.c0 or self.c1 or self.c2 or self.c3)

    def is_rational(self) -> bool:
        return not (self.c1 or self.c2 or self.c3)

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.c0

    # -- field operations ----------------------------------------------

    def __add__(self, other) -> "CycloElem":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return CycloElem(self.c0 + other.c0, self.c1 + other.c1,
                         self.c2 + other.c2, self.c3 + other.c3)

    __radd__ = __add__

    def __neg__(self) -> "CycloElem":
        return CycloElem(-self.c0, -self.c1, -self.c2, -self.c3)

    def __sub__(self, other) -> "CycloElem":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "CycloElem":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other) -> "CycloElem":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a0, a1, a2, a3 = self.coords
        b0, b1, b2, b3 = other.coords
        # Convolution up to degree 6, then reduce with zeta^4 = zeta^2 - 1,
        # zeta^5 = zeta^3 - zeta, zeta^6 = -1.
        d0 = a0 * b0
        d1 = a0 * b1 + a1 * b0
        d2 = a0 * b2 + a1 * b1 + a2 * b0
        d3 = a0 * b3 + a1 * b2 + a2 * b1 + a3 * b0
        d4 = a1 * b3 + a2 * b2 + a3 * b1
        d5 = a2 * b3 + a3 * b2
        d6 = a3 * b3
        return CycloElem(d0 - d4 - d6, d1 - d5, d2 + d4, d3 + d5)

    __rmul__ = __mul__

    def inv(self) -> "CycloElem":
        """Multiplicative inverse, via the 4x4 multiplication matrix over Q."""
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in Q(zeta12)")
        basis = (CycloElem.one(), CycloElem.zeta(),
                 CycloElem(_F0, _F0, _F1, _F0), CycloElem.i())
        cols = [(self * b).coords for b in basis]
        # Row i of the system: sum_j cols[j][i] * x_j = rhs[i]
        mat = [[cols[j][i] for j in range(4)] for i in range(4)]
        rhs = [_F1, _F0, _F0, _F0]
        sol = _solve_linear(mat, rhs)
        return CycloElem(*sol)

    def __truediv__(self, other) -> "CycloElem":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inv()

    def __rtruediv__(self, other) -> "CycloElem":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self.inv()

    def __pow__(self, n: int) -> "CycloElem":
        if n < 0:
            return self.inv() ** (-n)
        result = CycloElem.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- conversions -----------------------------------------------------

    def rect_parts(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        """Coordinates (p, q, r, s) over the basis (1, i, sqrt3, i*sqrt3)."""
        p = self.c0 + self.c2 / 2
        q = self.c3 + self.c1 / 2
        r = self.c1 / 2
        s = self.c2 / 2
        return (p, q, r, s)

    def __str__(self) -> str:
        return render_scalar(self)


def _coerce(v):
    if isinstance(v, CycloElem):
        return v
    if isinstance(v, (int, Fraction)):
        return CycloElem.from_rational(v)
    return NotImplemented


def _solve_linear(mat: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Gaussian elimination over Q for small dense systems."""
    n = len(mat)
    aug = [row[:] + [rhs[i]] for i, row in enumerate(mat)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col]), None)
        if pivot is None:
            raise ZeroDivisionError("singular linear system")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [aug[r][n] for r in range(n)]


def root_of_unity_order(x: CycloElem) -> int | None:
    """Smallest n dividing 12 with x^n = 1, or None.

    Every root of unity contained in Q(zeta12) has order dividing 12, so
    checking the divisors of 12 is exhaustive.
    """
    one = CycloElem.one()
    for n in (1, 2, 3, 4, 6, 12):
        if x ** n == one:
            return n
    return None


# ---------------------------------------------------------------------------
# Complex embeddings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComplexApprox:
    """A complex value at a recorded binary precision.

    The precision travels with the value; operations that consume it run at
    (at least) that precision rather than silently dropping to the ambient
    mpmath default.
    """

    re: mpmath.mpf
    im: mpmath.mpf
    precision: int

    @staticmethod
    def from_mpc(z, precision: int) -> "ComplexApprox":
        z = mpmath.mpc(z)
        return ComplexApprox(z.real, z.imag, precision)

    def to_mpc(self):
        return mpmath.mpc(self.re, self.im)

    def __str__(self) -> str:
        return f"({mpmath.nstr(self.re, 17)} {mpmath.nstr(self.im, 17)}j @{self.precision}b)"


def _omega(precision: int):
    """The embedding image of zeta: exp(i*pi/6)."""
    with mpmath.workprec(precision):
        return mpmath.expjpi(mpmath.mpf(1) / 6)


def _frac_to_mpf(r: Fraction):
    return mpmath.mpf(r.numerator) / r.denominator


def embed(x: CycloElem, precision: int = 256) -> ComplexApprox:
    """Numeric image of x under zeta -> exp(i*pi/6), at `precision` bits."""
    if precision < 64:
        raise ValueError("embedding precision must be at least 64 bits")
    with mpmath.workprec(precision):
        w = _omega(precision)
        acc = mpmath.mpc(0)
        for c in reversed(x.coords):
            acc = acc * w + _frac_to_mpf(c)
        return ComplexApprox.from_mpc(acc, precision)


# ---------------------------------------------------------------------------
# Recognition of exact elements from numeric values
# ---------------------------------------------------------------------------

def _cf_rationalize(x, max_den: int) -> Fraction | None:
    """Best continued-fraction convergent of x with denominator <= max_den."""
    p0, q0, p1, q1 = 0, 1, 1, 0
    val = mpmath.mpf(x)
    best = None
    for _ in range(256):
        fl = mpmath.floor(val)
        if abs(fl) > 10 ** 80:
            break
        a = int(fl)
        p0, p1 = p1, a * p1 + p0
        q0, q1 = q1, a * q1 + q0
        if q1 > max_den:
            break
        best = Fraction(p1, q1)
        frac_part = val - a
        if frac_part == 0 or abs(frac_part) < mpmath.mpf(2) ** (-mpmath.mp.prec + 8):
            break
        val = 1 / frac_part
    return best


def _real_to_q_sqrt3(x, sqrt3, denom_bound: int, precision: int):
    """Express a real x as alpha + beta*sqrt(3) with rational alpha, beta.

    Tries a plain continued-fraction rationalization first (beta = 0 and
    alpha = 0 fast paths), then falls back to a three-term integer-relation
    search (PSLQ) between x, 1 and sqrt(3).  Returns None when nothing
    within the bounds reproduces x to well below working precision.
    """
    tol = mpmath.mpf(2) ** (-(precision * 3) // 4)
    if abs(x) < tol:
        return (_F0, _F0)
    cand = _cf_rationalize(x, denom_bound)
    if cand is not None and abs(x - _frac_to_mpf(cand)) < tol:
        return (cand, _F0)
    cand = _cf_rationalize(x / sqrt3, denom_bound)
    if cand is not None and abs(x - _frac_to_mpf(cand) * sqrt3) < tol:
        return (_F0, cand)
    maxcoeff = max(10 ** 18, denom_bound ** 3)
    rel = mpmath.pslq([x, mpmath.mpf(1), sqrt3], maxcoeff=maxcoeff, maxsteps=10000)
    if rel is None or rel[0] == 0:
        return None
    t0, t1, t2 = rel
    alpha = Fraction(-t1, t0)
    beta = Fraction(-t2, t0)
    if abs(x - (_frac_to_mpf(alpha) + _frac_to_mpf(beta) * sqrt3)) >= tol:
        return None
    return (alpha, beta)


def recognize(value: ComplexApprox, denom_bound: int) -> CycloElem | None:
    """Candidate exact element within `denom_bound` coordinate denominators.

    The real and imaginary parts of any element of Q(zeta12) lie in
    Q(sqrt(3)); each part is resolved to alpha + beta*sqrt(3) and the four
    basis coordinates are then recovered from the exact change of basis.
    The candidate is screened by re-embedding; it is still only a
    candidate, and callers must certify it by exact substitution.
    """
    if value.precision < 128:
        raise ValueError("recognition requires at least 128 bits of precision")
    if denom_bound < 1:
        raise ValueError("denominator bound must be positive")
    with mpmath.workprec(value.precision):
        s3 = mpmath.sqrt(3)
        re_part = _real_to_q_sqrt3(value.re, s3, denom_bound, value.precision)
        if re_part is None:
            return None
        im_part = _real_to_q_sqrt3(value.im, s3, denom_bound, value.precision)
        if im_part is None:
            return None
        (ar, br), (ai, bi) = re_part, im_part
        # re = (c0 + c2/2) + (c1/2) * sqrt3,  im = (c1/2 + c3) + (c2/2) * sqrt3
        cand = CycloElem(ar - bi, 2 * br, 2 * bi, ai - br)
        if any(c.denominator > denom_bound for c in cand.coords):
            return None
        emb = embed(cand, value.precision)
        err = mpmath.mpc(emb.re - value.re, emb.im - value.im)
        if abs(err) >= mpmath.mpf(2) ** (-(value.precision // 2)):
            return None
        return cand


# ---------------------------------------------------------------------------
# Textual form
# ---------------------------------------------------------------------------

class ScalarParseError(ValueError):
    """Raised for malformed scalar expressions; carries a column offset."""

    def __init__(self, message: str, column: int):
        super().__init__(f"{message} (column {column})")
        self.column = column


def render_scalar(x: CycloElem) -> str:
    """Exact coordinate form, e.g. cyclo(1/2, 0, 0, -1/2)."""
    return "cyclo({}, {}, {}, {})".format(*(str(c) for c in x.coords))


def _render_rect_term(coeff: Fraction, symbol: str) -> str:
    if coeff == 1:
        return symbol
    if coeff == -1:
        return f"-{symbol}"
    return f"{coeff}*{symbol}"


def render_scalar_pretty(x: CycloElem) -> str:
    """Human form p + q*I + r*SQRT3 when x has no i*sqrt3 component."""
    p, q, r, s = x.rect_parts()
    if s != 0:
        return render_scalar(x)
    parts = []
    if p != 0 or (q == 0 and r == 0):
        parts.append(str(p))
    for coeff, symbol in ((q, "I"), (r, "SQRT3")):
        if coeff == 0:
            continue
        term = _render_rect_term(coeff, symbol)
        if parts and not term.startswith("-"):
            parts.append("+ " + term)
        elif parts:
            parts.append("- " + term[1:])
        else:
            parts.append(term)
    return " ".join(parts)


_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(.))")


def _tokenize_scalar(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            break
        col = m.start(m.lastindex) + 1
        if m.group(1):
            tokens.append(("int", int(m.group(1)), col))
        elif m.group(2):
            tokens.append(("name", m.group(2), col))
        else:
            ch = m.group(3)
            if not ch.strip():
                pos = m.end()
                continue
            if ch not in "+-*/(),":
                raise ScalarParseError(f"unexpected character {ch!r}", col)
            tokens.append((ch, ch, col))
        pos = m.end()
    tokens.append(("end", None, len(text) + 1))
    return tokens


class _ScalarParser:
    """Recursive-descent parser for +,-,*,/ expressions over rationals,
    the tokens I and SQRT3, and cyclo(c0,c1,c2,c3) tuples."""

    def __init__(self, text: str):
        self.tokens = _tokenize_scalar(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str):
        tok = self.next()
        if tok[0] != kind:
            raise ScalarParseError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        return tok

    def parse(self) -> CycloElem:
        value = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ScalarParseError(f"trailing input {tok[1]!r}", tok[2])
        return value

    def expr(self) -> CycloElem:
        value = self.term()
        while self.peek()[0] in "+-":
            op = self.next()[0]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> CycloElem:
        value = self.factor()
        while self.peek()[0] in "*/":
            op, _, col = self.next()
            rhs = self.factor()
            if op == "*":
                value = value * rhs
            else:
                if rhs.is_zero():
                    raise ScalarParseError("division by zero", col)
                value = value / rhs
        return value

    def factor(self) -> CycloElem:
        tok = self.peek()
        if tok[0] == "-":
            self.next()
            return -self.factor()
        if tok[0] == "+":
            self.next()
            return self.factor()
        return self.atom()

    def atom(self) -> CycloElem:
        kind, val, col = self.next()
        if kind == "int":
            return CycloElem.from_rational(val)
        if kind == "name":
            if val == "I":
                return CycloElem.i()
            if val == "SQRT3":
                return CycloElem.sqrt3()
            if val == "cyclo":
                return self.cyclo_tuple()
            raise ScalarParseError(f"unknown symbol {val!r}", col)
        if kind == "(":
            value = self.expr()
            self.expect(")")
            return value
        raise ScalarParseError(f"unexpected token {val!r}", col)

    def cyclo_tuple(self) -> CycloElem:
        self.expect("(")
        coords = [self.signed_rational()]
        for _ in range(3):
            self.expect(",")
            coords.append(self.signed_rational())
        self.expect(")")
        return CycloElem(*coords)

    def signed_rational(self) -> Fraction:
        sign = 1
        while self.peek()[0] in "+-":
            if self.next()[0] == "-":
                sign = -sign
        num = self.expect("int")[1]
        if self.peek()[0] == "/":
            self.next()
            den_tok = self.expect("int")
            if den_tok[1] == 0:
                raise ScalarParseError("zero denominator", den_tok[2])
            return Fraction(sign * num, den_tok[1])
        return Fraction(sign * num)


def parse_scalar(text: str) -> CycloElem:
    """Parse an exact scalar expression such as '(1 - I)/2' or 'cyclo(0,2,0,-1)'."""
    return _ScalarParser(text).parse()


def random_cyclo(rng: random.Random, max_num: int = 100, max_den: int = 100) -> CycloElem:
    """Uniform-ish random element for property tests; exact coordinates."""
    def frac():
        return Fraction(rng.randint(-max_num, max_num), rng.randint(1, max_den))
    return CycloElem(frac(), frac(), frac(), frac())
