"""Sparse multivariate polynomials and rational functions over an exact field.

Polynomials carry a coefficient-field tag (Q with Fraction coefficients, or
Q(zeta12) with CycloElem coefficients) and an ordered variable tuple.  Terms
are stored sorted in graded order (total degree first, ties broken by the
exponent vector with earlier-listed variables weighing more), with no zero
coefficients and no duplicate monomials, so structural equality is
mathematical equality.

Rational functions are kept fully normalized: numerator and denominator
coprime and the denominator monic in the graded order.  That makes equality
of rational functions a structural comparison, which the orbit machinery
relies on.

The gcd is computed by content/primitive-part recursion with subresultant
polynomial remainder sequences in a chosen main variable.  Two fast paths
keep the common cases cheap: exact-division probes (orbit denominators
usually cancel whole factors), and a sound degree filter that certifies
coprimality from univariate specializations at random points (the bound
deg_v gcd <= deg gcd(p(point), q(point)) is exact whenever the leading
coefficient of p in v does not vanish at the point).
"""

from __future__ import annotations

import heapq
import random
import re
from enum import Enum
from fractions import Fraction
from math import gcd as int_gcd

from .ring import CycloElem, render_scalar

__all__ = [
    "Field",
    "Poly",
    "RatFunc",
    "PolyParseError",
    "gcd",
    "resultant",
    "squarefree_part",
    "make_ratfunc",
    "poly_to_str",
    "parse_poly",
]

_F0 = Fraction(0)
_F1 = Fraction(1)

# Conventional variable order for the recursion engine; other names are
# allowed and fall back to alphabetical order.
GLOBAL_VAR_ORDER = ("z1", "z2", "z3", "a0", "a1", "a2", "a3")


class Field(Enum):
    Q = "Q"
    CYCLO = "QZ12"


def _zero_coeff(field: Field):
    return _F0 if field is Field.Q else CycloElem.zero()


def _one_coeff(field: Field):
    return _F1 if field is Field.Q else CycloElem.one()


def _coerce_coeff(field: Field, v):
    if field is Field.Q:
        if isinstance(v, Fraction):
            return v
        if isinstance(v, int):
            return Fraction(v)
        if isinstance(v, CycloElem) and v.is_rational():
            return v.as_fraction()
        raise TypeError(f"cannot use {v!r} as a Q coefficient")
    if isinstance(v, CycloElem):
        return v
    if isinstance(v, (int, Fraction)):
        return CycloElem.from_rational(v)
    raise TypeError(f"cannot use {v!r} as a Q(zeta12) coefficient")


def _key(exps: tuple[int, ...]):
    return (sum(exps), exps)


class Poly:
    """Immutable sparse polynomial.  Do not mutate `terms`."""

    __slots__ = ("field", "vars", "terms", "_hash")

    def __init__(self, field: Field, vars: tuple[str, ...], terms):
        merged: dict[tuple[int, ...], object] = {}
        zero = _zero_coeff(field)
        for exps, coeff in terms:
            coeff = _coerce_coeff(field, coeff)
            if exps in merged:
                coeff = merged[exps] + coeff
            if coeff == zero:
                merged.pop(exps, None)
            else:
                merged[exps] = coeff
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "vars", tuple(vars))
        object.__setattr__(self, "terms", tuple(
            sorted(merged.items(), key=lambda t: _key(t[0]), reverse=True)))
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    # -- fast internal constructor -------------------------------------

    @classmethod
    def _raw(cls, field, vars, sorted_terms):
        self = object.__new__(cls)
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "vars", vars)
        object.__setattr__(self, "terms", sorted_terms)
        object.__setattr__(self, "_hash", None)
        return self

    @classmethod
    def _from_dict(cls, field, vars, d):
        zero = _zero_coeff(field)
        items = [(e, c) for e, c in d.items() if c != zero]
        items.sort(key=lambda t: _key(t[0]), reverse=True)
        return cls._raw(field, vars, tuple(items))

    # -- constructors ----------------------------------------------------

    @classmethod
    def zero(cls, field: Field, vars) -> "Poly":
        return cls._raw(field, tuple(vars), ())

    @classmethod
    def const(cls, field: Field, vars, value) -> "Poly":
        vars = tuple(vars)
        value = _coerce_coeff(field, value)
        if value == _zero_coeff(field):
            return cls.zero(field, vars)
        return cls._raw(field, vars, (((0,) * len(vars), value),))

    @classmethod
    def variable(cls, field: Field, vars, name: str) -> "Poly":
        vars = tuple(vars)
        idx = vars.index(name)
        exps = tuple(1 if i == idx else 0 for i in range(len(vars)))
        return cls._raw(field, vars, ((exps, _one_coeff(field)),))

    @classmethod
    def monomial(cls, field: Field, vars, exps, coeff=1) -> "Poly":
        return cls(field, tuple(vars), [(tuple(exps), coeff)])

    # -- basic queries -----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and sum(self.terms[0][0]) == 0)

    def constant_value(self):
        if self.is_zero():
            return _zero_coeff(self.field)
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return self.terms[0][1]

    def total_degree(self) -> int:
        return sum(self.terms[0][0]) if self.terms else 0

    def degree_in(self, var: str) -> int:
        if not self.terms:
            return 0
        i = self.vars.index(var)
        return max(e[i] for e, _ in self.terms)

    def leading_term(self):
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        return self.terms[0]

    def leading_coeff(self):
        return self.leading_term()[1]

    def used_vars(self) -> tuple[str, ...]:
        if not self.terms:
            return ()
        used = [False] * len(self.vars)
        for e, _ in self.terms:
            for i, x in enumerate(e):
                if x:
                    used[i] = True
        return tuple(v for v, u in zip(self.vars, used) if u)

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return (self.field is other.field and self.vars == other.vars
                and self.terms == other.terms)

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((self.field, self.vars, self.terms))
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self):
        return f"Poly({poly_to_str(self)!r})"

    def sort_key(self):
        """Canonical comparison key: degree, then the term tuple itself."""
        return (self.total_degree(), len(self.terms),
                tuple((e, _coeff_sort_key(c)) for e, c in self.terms))

    # -- arithmetic -------------------------------------------------------

    def _check(self, other: "Poly"):
        if self.field is not other.field:
            raise ValueError("mismatched coefficient fields")
        if self.vars != other.vars:
            raise ValueError("mismatched variable sets")

    def __add__(self, other):
        other = self._coerce_operand(other)
        if other is NotImplemented:
            return NotImplemented
        self._check(other)
        if not self.terms:
            return other
        if not other.terms:
            return self
        d = dict(self.terms)
        zero = _zero_coeff(self.field)
        for e, c in other.terms:
            nv = d.get(e, zero) + c
            if nv == zero:
                d.pop(e, None)
            else:
                d[e] = nv
        return Poly._from_dict(self.field, self.vars, d)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw(self.field, self.vars,
                         tuple((e, -c) for e, c in self.terms))

    def __sub__(self, other):
        other = self._coerce_operand(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce_operand(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = self._coerce_operand(other)
        if other is NotImplemented:
            return NotImplemented
        self._check(other)
        if not self.terms or not other.terms:
            return Poly.zero(self.field, self.vars)
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        d: dict[tuple[int, ...], object] = {}
        zero = _zero_coeff(self.field)
        for eb, cb in b:
            for ea, ca in a:
                e = tuple(x + y for x, y in zip(ea, eb))
                nv = d.get(e, zero) + ca * cb
                if nv == zero:
                    d.pop(e, None)
                else:
                    d[e] = nv
        return Poly._from_dict(self.field, self.vars, d)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative polynomial power")
        result = Poly.const(self.field, self.vars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def _coerce_operand(self, other):
        if isinstance(other, Poly):
            return other
        if isinstance(other, (int, Fraction, CycloElem)):
            return Poly.const(self.field, self.vars, other)
        return NotImplemented

    def scale(self, factor) -> "Poly":
        factor = _coerce_coeff(self.field, factor)
        if factor == _zero_coeff(self.field):
            return Poly.zero(self.field, self.vars)
        return Poly._raw(self.field, self.vars,
                         tuple((e, c * factor) for e, c in self.terms))

    def monic(self) -> "Poly":
        """Divide by the leading coefficient (graded order)."""
        if self.is_zero():
            return self
        lc = self.leading_coeff()
        if lc == _one_coeff(self.field):
            return self
        if self.field is Field.Q:
            inv = 1 / lc
        else:
            inv = lc.inv()
        return self.scale(inv)

    # -- substitution and restriction --------------------------------------

    def eval_partial(self, bindings: dict) -> "Poly":
        """Substitute exact values for some variables.

        Binding values may be int, Fraction or CycloElem; a genuinely
        cyclotomic value promotes a Q polynomial to Q(zeta12).
        """
        if not bindings:
            return self
        for name in bindings:
            if name not in self.vars:
                raise ValueError(f"unknown variable {name!r}")
        field = self.field
        if field is Field.Q and any(
                isinstance(v, CycloElem) and not v.is_rational()
                for v in bindings.values()):
            field = Field.CYCLO
        values = {}
        for name, v in bindings.items():
            values[self.vars.index(name)] = _coerce_coeff(field, v)
        zero = _zero_coeff(field)
        d: dict[tuple[int, ...], object] = {}
        for e, c in self.terms:
            factor = _coerce_coeff(field, c)
            ne = list(e)
            for idx, val in values.items():
                if e[idx]:
                    factor = factor * val ** e[idx]
                ne[idx] = 0
            te = tuple(ne)
            nv = d.get(te, zero) + factor
            if nv == zero:
                d.pop(te, None)
            else:
                d[te] = nv
        return Poly._from_dict(field, self.vars, d)

    def promote(self) -> "Poly":
        """The same polynomial with coefficients in Q(zeta12)."""
        if self.field is Field.CYCLO:
            return self
        return Poly._raw(Field.CYCLO, self.vars, tuple(
            (e, CycloElem.from_rational(c)) for e, c in self.terms))

    def restrict(self, vars) -> "Poly":
        """Reduce the variable tuple; dropped variables must be unused."""
        vars = tuple(vars)
        index = []
        for v in vars:
            index.append(self.vars.index(v))
        keep = set(index)
        for e, _ in self.terms:
            for i, x in enumerate(e):
                if x and i not in keep:
                    raise ValueError(f"variable {self.vars[i]!r} is in use")
        terms = tuple((tuple(e[i] for i in index), c) for e, c in self.terms)
        return Poly(self.field, vars, terms)

    def extend(self, vars) -> "Poly":
        """Embed into a larger variable tuple (matching by name)."""
        vars = tuple(vars)
        pos = {v: i for i, v in enumerate(vars)}
        for v in self.vars:
            if v not in pos:
                raise ValueError(f"variable {v!r} missing from target set")
        n = len(vars)
        terms = []
        for e, c in self.terms:
            ne = [0] * n
            for v, x in zip(self.vars, e):
                ne[pos[v]] = x
            terms.append((tuple(ne), c))
        terms.sort(key=lambda t: _key(t[0]), reverse=True)
        return Poly._raw(self.field, vars, tuple(terms))

    def split_by(self, split_vars) -> list[tuple[tuple[int, ...], "Poly"]]:
        """Write the polynomial as sum of split-monomials times coefficient
        polynomials in the remaining variables.

        Returns (exponents over split_vars, coefficient Poly) pairs in
        descending graded order of the split monomial.  Multiplying back and
        summing reproduces the polynomial exactly.
        """
        split_vars = tuple(split_vars)
        sidx = [self.vars.index(v) for v in split_vars]
        rest = tuple(v for v in self.vars if v not in split_vars)
        ridx = [self.vars.index(v) for v in rest]
        groups: dict[tuple[int, ...], dict[tuple[int, ...], object]] = {}
        for e, c in self.terms:
            se = tuple(e[i] for i in sidx)
            re_ = tuple(e[i] for i in ridx)
            groups.setdefault(se, {})[re_] = c
        out = []
        for se in sorted(groups, key=_key, reverse=True):
            out.append((se, Poly._from_dict(self.field, rest, groups[se])))
        return out

    def derivative(self, var: str) -> "Poly":
        i = self.vars.index(var)
        d: dict[tuple[int, ...], object] = {}
        for e, c in self.terms:
            if not e[i]:
                continue
            ne = list(e)
            ne[i] -= 1
            d[tuple(ne)] = c * e[i]
        return Poly._from_dict(self.field, self.vars, d)

    def univariate_coeffs(self, var: str) -> list:
        """Dense coefficient list (low to high) of a univariate polynomial."""
        i = self.vars.index(var)
        for e, _ in self.terms:
            if any(x and j != i for j, x in enumerate(e)):
                raise ValueError("polynomial is not univariate in " + var)
        out = [_zero_coeff(self.field)] * (self.degree_in(var) + 1)
        for e, c in self.terms:
            out[e[i]] = c
        return out

    # -- integer content ---------------------------------------------------

    def rational_content(self) -> Fraction:
        """Positive rational c with self = c * (integer-primitive part).

        For Q(zeta12) coefficients the content is taken across all basis
        coordinates.  Zero polynomial has content 1.
        """
        if self.is_zero():
            return _F1
        nums: list[int] = []
        dens: list[int] = []
        for _, c in self.terms:
            fractions = (c,) if self.field is Field.Q else c.coords
            for f in fractions:
                if f:
                    nums.append(abs(f.numerator))
                    dens.append(f.denominator)
        g = 0
        for n in nums:
            g = int_gcd(g, n)
        l = 1
        for d in dens:
            l = l * d // int_gcd(l, d)
        return Fraction(g, l)

    def primitive_part(self) -> "Poly":
        """Integer-primitive multiple; over Q the leading coefficient is
        made positive."""
        if self.is_zero():
            return self
        c = self.rational_content()
        p = self.scale(1 / c)
        if p.field is Field.Q and p.leading_coeff() < 0:
            p = -p
        return p


def _coeff_sort_key(c):
    if isinstance(c, Fraction):
        return (c.numerator, c.denominator)
    return tuple((x.numerator, x.denominator) for x in c.coords)


# ---------------------------------------------------------------------------
# Exact division
# ---------------------------------------------------------------------------

def _neg_key(e):
    return (-sum(e), tuple(-x for x in e))


def divide_exact(p: Poly, d: Poly) -> Poly | None:
    """Quotient p/d when d divides p exactly, else None."""
    p._check(d)
    if d.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if p.is_zero():
        return p
    if d.is_constant():
        c = d.constant_value()
        inv = 1 / c if p.field is Field.Q else c.inv()
        return p.scale(inv)
    de, dc = d.terms[0]
    dc_inv = 1 / dc if p.field is Field.Q else dc.inv()
    rem = dict(p.terms)
    heap = [_neg_key(e) for e in rem]
    heapq.heapify(heap)
    zero = _zero_coeff(p.field)
    out: dict[tuple[int, ...], object] = {}
    while heap:
        nk = heapq.heappop(heap)
        e = tuple(-x for x in nk[1])
        c = rem.pop(e, None)
        if c is None:
            continue
        qe = tuple(x - y for x, y in zip(e, de))
        if any(x < 0 for x in qe):
            return None
        qc = c * dc_inv
        out[qe] = qc
        for te_, tc in d.terms[1:]:
            te = tuple(x + y for x, y in zip(qe, te_))
            old = rem.get(te)
            nv = (old if old is not None else zero) - qc * tc
            if nv == zero:
                if old is not None:
                    del rem[te]
            else:
                if old is None:
                    heapq.heappush(heap, _neg_key(te))
                rem[te] = nv
    if rem:
        return None
    return Poly._from_dict(p.field, p.vars, out)


# ---------------------------------------------------------------------------
# GCD
# ---------------------------------------------------------------------------

_FILTER_SEED = 982451653


def _euclid_univariate(a: list, b: list, field: Field) -> list:
    """Monic gcd of dense univariate coefficient lists over a field."""
    zero = _zero_coeff(field)

    def trim(x):
        while x and x[-1] == zero:
            x.pop()
        return x

    a, b = trim(list(a)), trim(list(b))
    while b:
        if len(a) < len(b):
            a, b = b, a
            continue
        lb = b[-1]
        inv = 1 / lb if field is Field.Q else lb.inv()
        bm = [c * inv for c in b]
        r = list(a)
        for shift in range(len(a) - len(b), -1, -1):
            lead = r[shift + len(b) - 1]
            if lead == zero:
                continue
            for i, c in enumerate(bm):
                r[shift + i] = r[shift + i] - lead * c
        a, b = b, trim(r)
    if not a:
        return []
    la = a[-1]
    inv = 1 / la if field is Field.Q else la.inv()
    return [c * inv for c in a]


def _eval_univariate(p: Poly, var: str, point: dict[str, int]) -> list:
    """Dense coefficient list of p in `var` after substituting integer points
    for every other variable."""
    i = p.vars.index(var)
    zero = _zero_coeff(p.field)
    out = [zero] * (p.degree_in(var) + 1)
    cache: dict[tuple[int, int], object] = {}
    for e, c in p.terms:
        factor = c
        for j, x in enumerate(e):
            if j == i or not x:
                continue
            key = (j, x)
            power = cache.get(key)
            if power is None:
                power = _coerce_coeff(p.field, Fraction(point[p.vars[j]]) ** x)
                cache[key] = power
            factor = factor * power
        out[e[i]] = out[e[i]] + factor
    while out and out[-1] == zero:
        out.pop()
    return out


def _gcd_degree_bound(p: Poly, q: Poly, var: str) -> int | None:
    """Sound upper bound for deg_var gcd(p, q), or None if uncertified."""
    rng = random.Random(_FILTER_SEED)
    others = [v for v in p.vars
              if v != var and (p.degree_in(v) or q.degree_in(v))]
    dp = p.degree_in(var)
    for _ in range(4):
        point = {v: rng.randint(-97, 97) for v in others}
        pu = _eval_univariate(p, var, point)
        if len(pu) - 1 != dp:
            continue  # leading coefficient vanished; bound would be unsound
        qu = _eval_univariate(q, var, point)
        if not qu:
            continue
        g = _euclid_univariate(pu, qu, p.field)
        return len(g) - 1
    return None


def _lc_wrt(p: Poly, var: str) -> Poly:
    """Leading coefficient of p viewed in `var` (a Poly with var unused)."""
    i = p.vars.index(var)
    d = p.degree_in(var)
    terms = {}
    for e, c in p.terms:
        if e[i] == d:
            ne = list(e)
            ne[i] = 0
            terms[tuple(ne)] = c
    return Poly._from_dict(p.field, p.vars, terms)


def _shift(p: Poly, var: str, k: int) -> Poly:
    if k == 0 or p.is_zero():
        return p
    i = p.vars.index(var)
    terms = tuple((tuple(x + k if j == i else x for j, x in enumerate(e)), c)
                  for e, c in p.terms)
    return Poly(p.field, p.vars, terms)


def _prem(a: Poly, b: Poly, var: str) -> Poly:
    """Pseudo-remainder of a by b with respect to var."""
    da, db = a.degree_in(var), b.degree_in(var)
    lcb = _lc_wrt(b, var)
    r = a
    e = da - db + 1
    while not r.is_zero() and r.degree_in(var) >= db:
        dr = r.degree_in(var)
        lcr = _lc_wrt(r, var)
        r = r * lcb - _shift(b * lcr, var, dr - db)
        e -= 1
    if e > 0:
        r = r * lcb ** e
    return r


def _content_wrt(p: Poly, var: str) -> tuple[Poly, Poly]:
    """(content, primitive part) of p viewed in var; content is the gcd of
    the var-coefficients, a Poly not involving var."""
    i = p.vars.index(var)
    coeffs: dict[int, dict[tuple[int, ...], object]] = {}
    for e, c in p.terms:
        ne = list(e)
        k = ne[i]
        ne[i] = 0
        coeffs.setdefault(k, {})[tuple(ne)] = c
    parts = [Poly._from_dict(p.field, p.vars, d) for d in coeffs.values()]
    content = parts[0]
    for part in parts[1:]:
        if content.is_constant():
            break
        content = gcd(content, part)
    if content.is_constant():
        return (Poly.const(p.field, p.vars, 1), p)
    pp = divide_exact(p, content)
    assert pp is not None
    return (content, pp)


def _prs_gcd(p: Poly, q: Poly, var: str) -> Poly:
    """Multivariate gcd via subresultant PRS in `var`."""
    cp, pp = _content_wrt(p, var)
    cq, qq = _content_wrt(q, var)
    cont = gcd(cp, cq)
    u, v = (pp, qq) if pp.degree_in(var) >= qq.degree_in(var) else (qq, pp)
    one = Poly.const(p.field, p.vars, 1)
    g_, h_ = one, one
    while True:
        delta = u.degree_in(var) - v.degree_in(var)
        r = _prem(u, v, var)
        if r.is_zero():
            main = _content_wrt(v, var)[1]
            break
        if r.degree_in(var) == 0:
            main = one
            break
        divisor = g_ * h_ ** delta
        nv = divide_exact(r, divisor)
        assert nv is not None, "subresultant division must be exact"
        u, v = v, nv
        g_ = _lc_wrt(u, var)
        if delta == 1:
            h_ = g_
        elif delta > 1:
            h_ = divide_exact(g_ ** delta, h_ ** (delta - 1))
            assert h_ is not None
    return cont * main


def _mono_content(p: Poly) -> tuple[tuple[int, ...], Poly]:
    """Largest monomial dividing p, and the cofactor."""
    mins = list(p.terms[0][0])
    for e, _ in p.terms[1:]:
        for i, x in enumerate(e):
            if x < mins[i]:
                mins[i] = x
        if not any(mins):
            break
    mono = tuple(mins)
    if not any(mono):
        return (mono, p)
    stripped = tuple((tuple(x - m for x, m in zip(e, mono)), c)
                     for e, c in p.terms)
    return (mono, Poly._raw(p.field, p.vars, stripped))


def gcd(p: Poly, q: Poly) -> Poly:
    """Greatest common divisor, normalized monic in the graded order.

    gcd(p, 0) is the normalized p; gcd(0, 0) is 0.
    """
    p._check(q)
    if p.is_zero():
        return q.monic()
    if q.is_zero():
        return p.monic()
    mono_p, p1 = _mono_content(p)
    mono_q, q1 = _mono_content(q)
    shared = tuple(min(a, b) for a, b in zip(mono_p, mono_q))
    if p1.is_constant() or q1.is_constant():
        return Poly.monomial(p.field, p.vars, shared)
    core = _gcd_monomial_free(p1, q1)
    if any(shared):
        core = _shift_all(core, shared)
    return core.monic()


def _shift_all(p: Poly, mono: tuple[int, ...]) -> Poly:
    terms = tuple((tuple(x + m for x, m in zip(e, mono)), c)
                  for e, c in p.terms)
    return Poly(p.field, p.vars, terms)


def _gcd_monomial_free(p: Poly, q: Poly) -> Poly:
    one = Poly.const(p.field, p.vars, 1)
    pvars = [v for v in p.vars if p.degree_in(v)]
    qvars = [v for v in q.vars if q.degree_in(v)]
    shared_vars = [v for v in pvars if v in qvars]
    if not shared_vars:
        return one
    if pvars == qvars and len(pvars) == 1:
        var = pvars[0]
        g = _euclid_univariate(p.univariate_coeffs(var),
                               q.univariate_coeffs(var), p.field)
        i = p.vars.index(var)
        terms = []
        for k, c in enumerate(g):
            if c != _zero_coeff(p.field):
                e = tuple(k if j == i else 0 for j in range(len(p.vars)))
                terms.append((e, c))
        return Poly(p.field, p.vars, terms)
    bounds = {}
    uncertain = False
    for v in shared_vars:
        b = _gcd_degree_bound(p, q, v)
        if b is None:
            uncertain = True
        bounds[v] = b
    if not uncertain and all(b == 0 for b in bounds.values()):
        return one
    # A whole-argument division is the common cancellation pattern.
    small, big = (p, q) if len(p.terms) <= len(q.terms) else (q, p)
    if divide_exact(big, small) is not None:
        return small
    candidates = [v for v in shared_vars if bounds[v] is None or bounds[v] > 0]
    var = min(candidates, key=lambda v: (
        bounds[v] if bounds[v] is not None else 10 ** 9,
        min(p.degree_in(v), q.degree_in(v))))
    return _prs_gcd(p, q, var)


# ---------------------------------------------------------------------------
# Resultant and square-free part
# ---------------------------------------------------------------------------

def resultant(p: Poly, q: Poly, var: str) -> Poly:
    """Resultant with respect to var, via fraction-free elimination of the
    Sylvester matrix.  The result does not involve var."""
    p._check(q)
    m, n = p.degree_in(var), q.degree_in(var)
    if m == 0 and n == 0:
        raise ValueError("resultant requires positive degree in " + var)
    if p.is_zero() or q.is_zero():
        return Poly.zero(p.field, p.vars)
    if m == 0:
        return p ** n
    if n == 0:
        return q ** m

    def coeff_rows(f: Poly, deg: int):
        i = f.vars.index(var)
        row = [Poly.zero(f.field, f.vars) for _ in range(deg + 1)]
        for e, c in f.terms:
            ne = list(e)
            k = ne[i]
            ne[i] = 0
            row[deg - k] = row[deg - k] + Poly.monomial(f.field, f.vars, ne, c)
        return row

    prow = coeff_rows(p, m)
    qrow = coeff_rows(q, n)
    size = m + n
    zero = Poly.zero(p.field, p.vars)
    mat = []
    for s in range(n):
        mat.append([zero] * s + prow + [zero] * (n - 1 - s))
    for s in range(m):
        mat.append([zero] * s + qrow + [zero] * (m - 1 - s))
    sign = 1
    prev = Poly.const(p.field, p.vars, 1)
    for k in range(size - 1):
        if mat[k][k].is_zero():
            pivot = next((r for r in range(k + 1, size)
                          if not mat[r][k].is_zero()), None)
            if pivot is None:
                return zero
            mat[k], mat[pivot] = mat[pivot], mat[k]
            sign = -sign
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                val = mat[i][j] * mat[k][k] - mat[i][k] * mat[k][j]
                res = divide_exact(val, prev)
                assert res is not None, "Bareiss division must be exact"
                mat[i][j] = res
            mat[i][k] = zero
        prev = mat[k][k]
    det = mat[size - 1][size - 1]
    return -det if sign < 0 else det


def squarefree_part(p: Poly, var: str) -> Poly:
    """p / gcd(p, dp/dvar) for univariate p, normalized monic."""
    if p.is_zero():
        raise ValueError("square-free part of the zero polynomial")
    p.univariate_coeffs(var)  # raises if not univariate
    d = p.derivative(var)
    if d.is_zero():
        return p.monic()
    g = gcd(p, d)
    result = divide_exact(p, g)
    assert result is not None
    return result.monic()


# ---------------------------------------------------------------------------
# Rational functions
# ---------------------------------------------------------------------------

class RatFunc:
    """Normalized quotient of two polynomials.

    Invariants: den != 0, gcd(num, den) = 1, den monic in the graded order.
    Structural equality therefore decides mathematical equality.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly):
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("RatFunc is immutable")

    # -- constructors ---------------------------------------------------

    @classmethod
    def from_poly(cls, p: Poly) -> "RatFunc":
        return cls(p, Poly.const(p.field, p.vars, 1))

    @classmethod
    def const(cls, field: Field, vars, value) -> "RatFunc":
        return cls.from_poly(Poly.const(field, vars, value))

    @classmethod
    def variable(cls, field: Field, vars, name: str) -> "RatFunc":
        return cls.from_poly(Poly.variable(field, vars, name))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __eq__(self, other):
        if not isinstance(other, RatFunc):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __repr__(self):
        return f"RatFunc({poly_to_str(self.num)!r}, {poly_to_str(self.den)!r})"

    # -- arithmetic -------------------------------------------------------

    def __neg__(self):
        return RatFunc(-self.num, self.den)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        d = gcd(self.den, other.den)
        if d.is_constant():
            num = self.num * other.den + other.num * self.den
            return make_ratfunc(num, [self.den, other.den])
        fd = divide_exact(self.den, d)
        gd = divide_exact(other.den, d)
        num = self.num * gd + other.num * fd
        return make_ratfunc(num, [fd, d, gd])

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return RatFunc.const(self.num.field, self.num.vars, 0)
        c1 = gcd(self.num, other.den)
        c2 = gcd(other.num, self.den)
        n1 = self.num if c1.is_constant() else divide_exact(self.num, c1)
        d2 = other.den if c1.is_constant() else divide_exact(other.den, c1)
        n2 = other.num if c2.is_constant() else divide_exact(other.num, c2)
        d1 = self.den if c2.is_constant() else divide_exact(self.den, c2)
        return _gauge(n1 * n2, d1 * d2)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return self * RatFunc(other.den, other.num)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def _coerce(self, other):
        if isinstance(other, RatFunc):
            return other
        if isinstance(other, Poly):
            return RatFunc.from_poly(other)
        if isinstance(other, (int, Fraction, CycloElem)):
            return RatFunc.const(self.num.field, self.num.vars, other)
        return NotImplemented


def _gauge(num: Poly, den: Poly) -> RatFunc:
    """Fix the canonical gauge: monic denominator."""
    if num.is_zero():
        return RatFunc(num, Poly.const(den.field, den.vars, 1))
    lc = den.leading_coeff()
    if lc != _one_coeff(den.field):
        inv = 1 / lc if den.field is Field.Q else lc.inv()
        num = num.scale(inv)
        den = den.scale(inv)
    return RatFunc(num, den)


def make_ratfunc(num: Poly, den_factors: list[Poly]) -> RatFunc:
    """Normalized rational function num / prod(den_factors).

    Cancellation peels the denominator factor by factor, which is exact:
    gcd(a, f*g) = gcd(a, f) * gcd(a / gcd(a, f), g).
    """
    den = Poly.const(num.field, num.vars, 1)
    for f in den_factors:
        if f.is_zero():
            raise ZeroDivisionError("zero denominator")
        den = den * f
    if num.is_zero():
        return RatFunc(num, Poly.const(num.field, num.vars, 1))
    for f in den_factors:
        if f.is_constant():
            continue
        g = gcd(num, f)
        if g.is_constant():
            continue
        num = divide_exact(num, g)
        den = divide_exact(den, g)
        if den.is_constant():
            break
    return _gauge(num, den)


# ---------------------------------------------------------------------------
# Textual form
# ---------------------------------------------------------------------------

class PolyParseError(ValueError):
    def __init__(self, message: str, column: int):
        super().__init__(f"{message} (column {column})")
        self.column = column


def _coeff_str(c) -> str:
    if isinstance(c, Fraction):
        return str(c)
    if c.is_rational():
        return str(c.as_fraction())
    return render_scalar(c)


def poly_to_str(p: Poly) -> str:
    """Deterministic rendering: canonical term order, explicit * and ^."""
    if p.is_zero():
        return "0"
    parts = []
    for e, c in p.terms:
        mono = "*".join(
            f"{v}^{k}" if k > 1 else v
            for v, k in zip(p.vars, e) if k)
        cs = _coeff_str(c)
        negative = cs.startswith("-") and not cs.startswith("-c")
        if negative:
            cs = cs[1:]
        if mono:
            body = mono if cs == "1" else f"{cs}*{mono}"
        else:
            body = cs
        if not parts:
            parts.append("-" + body if negative else body)
        else:
            parts.append(("- " if negative else "+ ") + body)
    return " ".join(parts)


_POLY_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(.))")


def _default_var_order(names) -> tuple[str, ...]:
    known = [v for v in GLOBAL_VAR_ORDER if v in names]
    extra = sorted(n for n in names if n not in GLOBAL_VAR_ORDER)
    return tuple(known + extra)


class _PolyParser:
    def __init__(self, text: str, vars: tuple[str, ...] | None):
        self.tokens = []
        pos = 0
        while pos < len(text):
            m = _POLY_TOKEN.match(text, pos)
            if not m or m.end() == pos:
                break
            col = m.start(m.lastindex) + 1
            if m.group(1):
                self.tokens.append(("int", int(m.group(1)), col))
            elif m.group(2):
                self.tokens.append(("name", m.group(2), col))
            else:
                ch = m.group(3)
                if ch.strip():
                    if ch not in "+-*/^()":
                        raise PolyParseError(f"unexpected character {ch!r}", col)
                    self.tokens.append((ch, ch, col))
            pos = m.end()
        self.tokens.append(("end", None, len(text) + 1))
        if vars is None:
            names = {t[1] for t in self.tokens if t[0] == "name"}
            vars = _default_var_order(names)
        self.vars = tuple(vars)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def parse(self) -> Poly:
        value = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise PolyParseError(f"trailing input {tok[1]!r}", tok[2])
        return value

    def expr(self) -> Poly:
        value = self.term()
        while self.peek()[0] in "+-":
            op = self.next()[0]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> Poly:
        value = self.factor()
        while self.peek()[0] in "*/":
            op, _, col = self.next()
            rhs = self.factor()
            if op == "*":
                value = value * rhs
            else:
                if not rhs.is_constant():
                    raise PolyParseError("division by a non-constant", col)
                c = rhs.constant_value()
                if c == 0:
                    raise PolyParseError("division by zero", col)
                value = value.scale(1 / c)
        return value

    def factor(self) -> Poly:
        tok = self.peek()
        if tok[0] == "-":
            self.next()
            return -self.factor()
        if tok[0] == "+":
            self.next()
            return self.factor()
        base = self.atom()
        if self.peek()[0] == "^":
            self.next()
            exp_tok = self.next()
            if exp_tok[0] != "int":
                raise PolyParseError("exponent must be an integer", exp_tok[2])
            return base ** exp_tok[1]
        return base

    def atom(self) -> Poly:
        kind, val, col = self.next()
        if kind == "int":
            return Poly.const(Field.Q, self.vars, val)
        if kind == "name":
            if val not in self.vars:
                raise PolyParseError(f"unknown variable {val!r}", col)
            return Poly.variable(Field.Q, self.vars, val)
        if kind == "(":
            value = self.expr()
            closing = self.next()
            if closing[0] != ")":
                raise PolyParseError("expected ')'", closing[2])
            return value
        raise PolyParseError(f"unexpected token {val!r}", col)


def parse_poly(text: str, vars: tuple[str, ...] | None = None) -> Poly:
    """Parse the rendering produced by poly_to_str (Q coefficients)."""
    return _PolyParser(text, vars).parse()
