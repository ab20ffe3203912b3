"""Exact solver for the zero-dimensional parameter systems.

Pipeline: a reduced lexicographic Groebner basis (Buchberger with the
product and chain criteria) triangularizes the system over Q; the
univariate eliminant in the last variable is solved by numeric root
isolation (Aberth simultaneous iteration at high precision) followed by
algebraic recognition into Q(zeta12); back-substitution repeats the same
root extraction for the remaining variables over Q(zeta12).  Every
candidate assignment is certified by exact substitution into the original
generators before it is reported, so numeric precision can never corrupt
the result set; failures only move roots into the outside-field count.

Linear factors are solved exactly without any numerics at all, which is
the common case after triangularization.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .poly import Field, Poly, divide_exact, gcd, poly_to_str
from .ring import ComplexApprox, CycloElem, embed, recognize, render_scalar

__all__ = [
    "PolySystem",
    "Assignment",
    "SolveOutcome",
    "PositiveDimensionalError",
    "groebner_lex",
    "roots_in_cyclo",
    "solve_system",
    "quick_infeasibility",
    "verify_assignment",
    "DEFAULT_PRECISION",
    "MAX_PRECISION",
    "DEFAULT_DENOM_BOUND",
]

DEFAULT_PRECISION = 256
MAX_PRECISION = 4096
DEFAULT_DENOM_BOUND = 2 ** 32


class PositiveDimensionalError(ValueError):
    """The system has infinitely many solutions; unsupported here."""


@dataclass(frozen=True)
class PolySystem:
    """Generators over Q in an ascending tuple of parameter variables."""

    vars: tuple[str, ...]
    generators: tuple[Poly, ...]

    def __post_init__(self):
        if not self.generators:
            raise ValueError("a system needs at least one generator")
        for g in self.generators:
            if g.vars != self.vars:
                raise ValueError("generator variable set mismatch")
            if g.field is not Field.Q:
                raise ValueError("system generators must be over Q")

    @staticmethod
    def from_condition_system(cs) -> "PolySystem":
        vars = cs.kind.live_params
        gens = tuple(g if g.vars == vars else g.extend(vars)
                     for g in cs.generators)
        if not gens:
            # An empty condition list constrains nothing.
            raise PositiveDimensionalError("no constraints on the parameters")
        return PolySystem(vars, gens)


@dataclass(frozen=True)
class Assignment:
    """An exact binding of every system variable."""

    items: tuple[tuple[str, CycloElem], ...]

    @staticmethod
    def of(mapping: dict[str, CycloElem]) -> "Assignment":
        return Assignment(tuple(sorted(mapping.items())))

    def as_dict(self) -> dict[str, CycloElem]:
        return dict(self.items)

    def value(self, name: str) -> CycloElem:
        for n, v in self.items:
            if n == name:
                return v
        raise KeyError(name)

    def render(self) -> str:
        return ", ".join(f"{n} = {render_scalar(v)}" for n, v in self.items)


@dataclass(frozen=True)
class SolveOutcome:
    solutions: tuple[Assignment, ...]
    outside_field_count: int
    infeasible: bool


# ---------------------------------------------------------------------------
# Lexicographic Groebner bases over Q
# ---------------------------------------------------------------------------
#
# Internally the basis lives as dicts of integer coefficients (content
# stripped, leading coefficient positive) and reduction is fraction-free:
# this sidesteps the rational blowup that monic reduction produces on the
# larger condition systems.  The computed basis is verified at the end by
# reducing every S-polynomial of the result to zero, which is the defining
# property, so a selection-strategy bug cannot silently corrupt results.

from math import gcd as _int_gcd


def _lex_perm(vars: tuple[str, ...]) -> tuple[int, ...]:
    """Indices ordered biggest variable first (eliminate early, keep the
    first-listed variable for the univariate eliminant)."""
    return tuple(range(len(vars) - 1, -1, -1))


def _lex_key(perm):
    def key(e):
        return tuple(e[i] for i in perm)
    return key


def _divides(a, b) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _int_primitive(d: dict, key) -> dict:
    """Strip integer content and fix a positive leading coefficient."""
    if not d:
        return d
    g = 0
    for c in d.values():
        g = _int_gcd(g, abs(c))
        if g == 1:
            break
    if d[max(d, key=key)] < 0:
        g = -g
    if g in (0, 1):
        return d
    return {e: c // g for e, c in d.items()}


def _to_int_dict(p: Poly, key) -> dict:
    lcm_den = 1
    for _, c in p.terms:
        lcm_den = lcm_den * c.denominator // _int_gcd(lcm_den, c.denominator)
    d = {e: int(c * lcm_den) for e, c in p.terms}
    return _int_primitive(d, key)


def _int_to_poly(d: dict, vars, key) -> Poly:
    """Monic Poly over Q from an integer term dict."""
    lc = d[max(d, key=key)]
    return Poly(Field.Q, vars, [(e, Fraction(c, lc)) for e, c in d.items()])


def _int_reduce(p: dict, basis: list, key) -> dict:
    """Fraction-free normal form of p modulo basis entries (lm, lc, rest).

    The result equals a positive rational multiple of the true normal form,
    which is all the algorithm needs; content is stripped before returning.
    """
    work = dict(p)
    out: dict = {}
    while work:
        e = max(work, key=key)
        c = work.pop(e)
        for lm, lc, rest in basis:
            if _divides(lm, e):
                d = _int_gcd(abs(c), lc)
                scale = lc // d
                mult = c // d
                if scale != 1:
                    for t in work:
                        work[t] *= scale
                    for t in out:
                        out[t] *= scale
                shift = tuple(x - y for x, y in zip(e, lm))
                for ge, gc in rest:
                    te = tuple(x + y for x, y in zip(ge, shift))
                    nv = work.get(te, 0) - mult * gc
                    if nv:
                        work[te] = nv
                    else:
                        work.pop(te, None)
                break
        else:
            out[e] = c
    return _int_primitive(out, key)


def _int_entry(d: dict, key):
    """(leading monomial, leading coefficient, non-leading terms)."""
    lm = max(d, key=key)
    rest = tuple((e, c) for e, c in d.items() if e != lm)
    return (lm, d[lm], rest)


def _int_spoly(f_entry, f_dict, g_entry, g_dict, key) -> dict:
    lmf, lcf, _ = f_entry
    lmg, lcg, _ = g_entry
    lcm = tuple(max(x, y) for x, y in zip(lmf, lmg))
    d = _int_gcd(lcf, lcg)
    mf, mg = lcg // d, lcf // d
    sf = tuple(x - y for x, y in zip(lcm, lmf))
    sg = tuple(x - y for x, y in zip(lcm, lmg))
    s: dict = {}
    for e, c in f_dict.items():
        te = tuple(x + y for x, y in zip(e, sf))
        s[te] = s.get(te, 0) + mf * c
    for e, c in g_dict.items():
        te = tuple(x + y for x, y in zip(e, sg))
        nv = s.get(te, 0) - mg * c
        if nv:
            s[te] = nv
        else:
            s.pop(te, None)
    return s


def _interreduce_int(polys: list[dict], key) -> list[dict]:
    """Mutually reduce until stable; preserves the generated ideal."""
    polys = [p for p in polys if p]
    changed = True
    while changed:
        changed = False
        for idx in range(len(polys)):
            others = [_int_entry(q, key) for t, q in enumerate(polys)
                      if t != idx and q]
            others.sort(key=lambda ent: (sum(ent[0]), key(ent[0])))
            r = _int_reduce(polys[idx], others, key)
            if r != polys[idx]:
                changed = True
                polys[idx] = r
        polys = [p for p in polys if p]
    return polys


def groebner_lex(system: PolySystem) -> list[Poly]:
    """Reduced Groebner basis in pure lex order (first system variable is
    the smallest, so it carries the univariate eliminant)."""
    perm = _lex_perm(system.vars)
    key = _lex_key(perm)
    gens = []
    seen = set()
    for g in system.generators:
        if g.is_zero():
            continue
        d = _to_int_dict(g, key)
        frozen = tuple(sorted(d.items()))
        if frozen not in seen:
            seen.add(frozen)
            gens.append(d)
    if not gens:
        raise PositiveDimensionalError("all generators are zero")
    gens = _interreduce_int(gens, key)

    basis: list[dict] = []
    entries: list = []
    pairs: set[tuple[int, int]] = set()

    def add_poly(d: dict):
        idx = len(basis)
        basis.append(d)
        entries.append(_int_entry(d, key))
        for i in range(idx):
            pairs.add((i, idx))

    for g in gens:
        add_poly(g)

    def lcm_of(i, j):
        return tuple(max(x, y) for x, y in
                     zip(entries[i][0], entries[j][0]))

    def pair_sort(pair):
        l = lcm_of(*pair)
        return (sum(l), key(l), pair)

    while pairs:
        pair = min(pairs, key=pair_sort)
        pairs.discard(pair)
        i, j = pair
        lmi, lmj = entries[i][0], entries[j][0]
        lcm = lcm_of(i, j)
        if lcm == tuple(x + y for x, y in zip(lmi, lmj)):
            continue  # product criterion
        s = _int_spoly(entries[i], basis[i], entries[j], basis[j], key)
        r = _int_reduce(s, entries, key)
        if r:
            add_poly(r)

    # minimal basis: drop entries whose lm is divisible by another lm
    lms = [ent[0] for ent in entries]
    keep = []
    for i in range(len(basis)):
        dominated = False
        for j in range(len(basis)):
            if j == i:
                continue
            if _divides(lms[j], lms[i]) and not (lms[j] == lms[i] and j > i):
                dominated = True
                break
        if not dominated:
            keep.append(i)
    reduced = [basis[i] for i in keep]
    # interreduce to the unique reduced basis
    changed = True
    while changed:
        changed = False
        for idx in range(len(reduced)):
            others = [_int_entry(q, key) for t, q in enumerate(reduced)
                      if t != idx]
            r = _int_reduce(reduced[idx], others, key)
            if not r:
                del reduced[idx]
                changed = True
                break
            if r != reduced[idx]:
                reduced[idx] = r
                changed = True
    reduced.sort(key=lambda d: key(max(d, key=key)))

    # Defining-property check: every S-polynomial of the result reduces to
    # zero.  Reduced bases here are small, so this is cheap insurance.
    ents = [_int_entry(d, key) for d in reduced]
    for i in range(len(reduced)):
        for j in range(i + 1, len(reduced)):
            s = _int_spoly(ents[i], reduced[i], ents[j], reduced[j], key)
            if _int_reduce(s, ents, key):
                raise AssertionError("computed basis fails the S-pair test")
    return [_int_to_poly(d, system.vars, key) for d in reduced]


def basis_is_trivial(basis: list[Poly]) -> bool:
    return len(basis) == 1 and basis[0].is_constant() and \
        not basis[0].is_zero()


def is_zero_dimensional(basis: list[Poly], vars: tuple[str, ...]) -> bool:
    """True when every variable has a pure-power leading monomial."""
    perm = _lex_perm(vars)
    key = _lex_key(perm)
    lms = [max((e for e, _ in p.terms), key=key) for p in basis]
    for i in range(len(vars)):
        ok = False
        for lm in lms:
            if lm[i] > 0 and all(x == 0 for j, x in enumerate(lm) if j != i):
                ok = True
                break
        if not ok:
            return False
    return True


# ---------------------------------------------------------------------------
# Univariate roots in Q(zeta12)
# ---------------------------------------------------------------------------

def _aberth_roots(coeffs, precision: int):
    """All complex roots of a square-free polynomial by Aberth-Ehrlich
    simultaneous iteration; returns None on non-convergence.

    `coeffs` are mpc values, low degree first, at `precision` bits; the
    starting configuration is seeded deterministically from the rendered
    coefficients, so repeated runs are identical.
    """
    n = len(coeffs) - 1
    seedsrc = ",".join(mpmath.nstr(c, 20) for c in coeffs)
    rng = random.Random(seedsrc)
    with mpmath.workprec(precision + 64):
        lead = coeffs[-1]
        radius = 1 + max(abs(c / lead) for c in coeffs[:-1])
        ws = []
        for k in range(n):
            angle = 2 * mpmath.pi * (k + mpmath.mpf("0.3")) / n \
                + rng.uniform(0.01, 0.3)
            r = radius * (mpmath.mpf("0.4") + mpmath.mpf("0.5") * (k + 1) / n
                          + mpmath.mpf(rng.uniform(0.0, 0.05)))
            ws.append(r * mpmath.expj(angle))
        deriv = [coeffs[k] * k for k in range(1, n + 1)]

        def horner(cs, x):
            acc = mpmath.mpc(0)
            for c in reversed(cs):
                acc = acc * x + c
            return acc

        target = mpmath.mpf(2) ** (-(precision + 16))
        for _ in range(64 + 8 * n):
            max_corr = mpmath.mpf(0)
            scale = max(mpmath.mpf(1), max(abs(w) for w in ws))
            for k in range(n):
                w = ws[k]
                pv = horner(coeffs, w)
                if pv == 0:
                    continue
                dv = horner(deriv, w)
                if dv == 0:
                    ws[k] = w + mpmath.mpf(rng.uniform(0.01, 0.1))
                    max_corr = scale
                    continue
                newton = pv / dv
                ssum = mpmath.mpc(0)
                for t in range(n):
                    if t != k:
                        diff = w - ws[t]
                        if diff == 0:
                            diff = mpmath.mpf(2) ** (-precision // 2)
                        ssum += 1 / diff
                denom = 1 - newton * ssum
                corr = newton if denom == 0 else newton / denom
                ws[k] = w - corr
                if abs(corr) > max_corr:
                    max_corr = abs(corr)
            if max_corr < target * scale:
                break
        else:
            return None
        return [mpmath.mpc(w) for w in ws]


def _cyclo_univariate_coeffs(p: Poly, var: str) -> list[CycloElem]:
    coeffs = p.promote().univariate_coeffs(var)
    return coeffs


def _eval_cyclo_univariate(coeffs: list[CycloElem], x: CycloElem) -> CycloElem:
    acc = CycloElem.zero()
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def roots_in_cyclo(p: Poly, var: str | None = None,
                   precision: int = DEFAULT_PRECISION,
                   max_precision: int = MAX_PRECISION,
                   denom_bound: int = DEFAULT_DENOM_BOUND,
                   ) -> tuple[list[CycloElem], int]:
    """All distinct roots of a univariate polynomial that lie in Q(zeta12),
    each certified by exact evaluation, plus the count of remaining roots
    (those outside the field or beyond the recognition bounds)."""
    if p.is_zero():
        raise ValueError("root extraction from the zero polynomial")
    if var is None:
        used = p.used_vars()
        if len(used) != 1:
            raise ValueError("polynomial must be univariate")
        var = used[0]
    p = p.promote()
    from .poly import squarefree_part
    sf = squarefree_part(p, var)
    degree = sf.degree_in(var)
    if degree == 0:
        return ([], 0)
    coeffs = _cyclo_univariate_coeffs(sf, var)
    if degree == 1:
        root = -(coeffs[0] / coeffs[1])
        return ([root], 0)

    best: list[CycloElem] = []
    prec = precision
    while True:
        numeric = _aberth_roots(
            [embed(c, prec).to_mpc() for c in coeffs], prec)
        certified: list[CycloElem] = []
        failures = 0
        if numeric is not None:
            for w in numeric:
                approx = ComplexApprox.from_mpc(w, prec)
                cand = recognize(approx, denom_bound)
                if cand is None:
                    failures += 1
                    continue
                if _eval_cyclo_univariate(coeffs, cand).is_zero():
                    certified.append(cand)
                else:
                    failures += 1
        distinct = []
        for x in certified:
            if x not in distinct:
                distinct.append(x)
        collisions = len(certified) - len(distinct)
        if len(distinct) > len(best):
            best = distinct
        if numeric is not None and failures == 0 and collisions == 0:
            break
        if prec >= max_precision:
            break
        prec *= 2
    best.sort(key=render_scalar)
    return (best, degree - len(best))


# ---------------------------------------------------------------------------
# System solving
# ---------------------------------------------------------------------------

def quick_infeasibility(system: PolySystem) -> bool:
    """True when some generator is a nonzero constant (sound, incomplete)."""
    return any(g.is_constant() and not g.is_zero() for g in system.generators)


def verify_assignment(system: PolySystem, assignment: Assignment) -> bool:
    """Exact zero residual of every generator at the assignment."""
    binding = assignment.as_dict()
    missing = [v for v in system.vars if v not in binding]
    if missing:
        raise ValueError(f"assignment misses variables {missing}")
    for g in system.generators:
        if not g.eval_partial(binding).is_zero():
            return False
    return True


def _univariate_gcd_cyclo(polys: list[Poly], var: str) -> Poly:
    g = polys[0]
    for p in polys[1:]:
        if g.is_constant():
            break
        g = gcd(g, p)
    return g


def solve_system(system: PolySystem,
                 precision: int = DEFAULT_PRECISION,
                 max_precision: int = MAX_PRECISION,
                 denom_bound: int = DEFAULT_DENOM_BOUND) -> SolveOutcome:
    """All solutions of a zero-dimensional system with coordinates in
    Q(zeta12); solutions are exactly certified and deterministically
    ordered.  Roots outside the field are counted, not represented."""
    if quick_infeasibility(system):
        return SolveOutcome((), 0, True)
    basis = groebner_lex(system)
    if basis_is_trivial(basis):
        return SolveOutcome((), 0, True)
    if not is_zero_dimensional(basis, system.vars):
        raise PositiveDimensionalError(
            "system is not zero-dimensional; unsupported")
    outside_total = 0
    solutions: list[Assignment] = []
    basis_used = [(g, set(g.used_vars())) for g in basis]

    def extend(partial: dict[str, CycloElem], remaining: tuple[str, ...]):
        nonlocal outside_total
        if not remaining:
            cand = Assignment.of(partial)
            if verify_assignment(system, cand):
                solutions.append(cand)
            return
        var = remaining[0]
        solved = set(partial)
        cands = [g for g, used in basis_used
                 if used <= solved | {var} and g.degree_in(var) > 0]
        if not cands:
            raise PositiveDimensionalError(
                f"no eliminant found for {var}; system not triangular")
        substituted = [g.eval_partial(partial) for g in cands]
        nonzero = [p.promote() for p in substituted if not p.is_zero()]
        if not nonzero:
            raise PositiveDimensionalError(
                f"all eliminants vanish for {var}")
        g = _univariate_gcd_cyclo(nonzero, var)
        if g.is_constant():
            return  # contradictory constraints on this branch
        roots, outside = roots_in_cyclo(
            g, var, precision=precision, max_precision=max_precision,
            denom_bound=denom_bound)
        outside_total += outside
        for r in roots:
            extend({**partial, var: r}, remaining[1:])

    extend({}, system.vars)
    solutions.sort(key=lambda a: tuple(render_scalar(v) for _, v in a.items))
    return SolveOutcome(tuple(solutions), outside_total, False)
