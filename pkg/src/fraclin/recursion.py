"""Fractional-linear recursions of orders two and three.

The engine works with the reduced (affine-conjugation) representatives:

  order 2:         z_n = (a2*z_{n-2} + z_{n-1} + a0) / z_{n-2}
  order 3, type 1: z_n = (a3*z_{n-3} + z_{n-2} + a1*z_{n-1} + a0) / z_{n-3}
  order 3, type 2: z_n = (a3*z_{n-3} + z_{n-1} + a0) / z_{n-3}

together with general forms whose denominator is b_order*z_{n-order} + b0
(the shape whose inverse step is again fractional-linear).  A reduced spec
is either fully symbolic (parameters are polynomial variables over Q) or
fully concrete (parameters are Q(zeta12) scalars).

A recursion is globally periodic with period k when iterating it k times
from symbolic initial values returns the initial values as rational-function
identities.  Candidate parameter values are found from the meeting rule: run
the orbit forward to z_i and the inverse orbit (started from the reversed
initial values) backward to u_j, where i + j = k + order + 1; requiring
u_j = z_i identically in the initial values yields polynomial conditions on
the parameters.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .poly import Field, Poly, RatFunc, make_ratfunc
from .ring import CycloElem

__all__ = [
    "RecursionKind",
    "RecursionSpec",
    "GeneralSpec",
    "AffineMap",
    "ConditionSystem",
    "DegenerateRecursionError",
    "SingularStepError",
    "KIND_NAMES",
    "kind_from_name",
    "meeting_indices",
    "forward_step",
    "inverse_step",
    "orbit_symbolic",
    "build_condition_system",
    "normalize_to_reduced",
    "conjugate",
    "reduced_to_general",
]

LINEAR_REASON = "recursion becomes linear"
MERGER_REASON = "trivial 'merger'"


class DegenerateRecursionError(ValueError):
    """A general spec violates the non-degeneracy requirements."""


class SingularStepError(ArithmeticError):
    """A symbolic orbit step produced an identically-zero denominator."""


class RecursionKind(Enum):
    ORDER2_REDUCED = ("order2-reduced", 2, ("a0", "a2"))
    ORDER3_TYPE1 = ("order3-type1", 3, ("a0", "a1", "a3"))
    ORDER3_TYPE2 = ("order3-type2", 3, ("a0", "a3"))

    def __init__(self, label: str, order: int, live_params: tuple[str, ...]):
        self.label = label
        self.order = order
        self.live_params = live_params

    @property
    def orbit_vars(self) -> tuple[str, ...]:
        return ("z1", "z2", "z3")[: self.order]


KIND_NAMES = {k.label: k for k in RecursionKind}


def kind_from_name(name: str) -> RecursionKind:
    try:
        return KIND_NAMES[name]
    except KeyError:
        raise ValueError(f"unknown recursion kind {name!r}") from None


@dataclass(frozen=True)
class RecursionSpec:
    """A reduced recursion: fully symbolic or fully concrete."""

    kind: RecursionKind
    coefficients: tuple[tuple[str, CycloElem], ...] | None

    @staticmethod
    def symbolic(kind: RecursionKind) -> "RecursionSpec":
        return RecursionSpec(kind, None)

    @staticmethod
    def concrete(kind: RecursionKind, values: dict) -> "RecursionSpec":
        missing = [p for p in kind.live_params if p not in values]
        extra = [p for p in values if p not in kind.live_params]
        if missing or extra:
            raise ValueError(
                f"coefficients must bind exactly {kind.live_params}, "
                f"missing={missing}, extra={extra}")
        coeffs = tuple(
            (name, _as_cyclo(values[name])) for name in kind.live_params)
        return RecursionSpec(kind, coeffs)

    @property
    def is_symbolic(self) -> bool:
        return self.coefficients is None

    @property
    def order(self) -> int:
        return self.kind.order

    def coefficient(self, name: str) -> CycloElem:
        if self.coefficients is None:
            raise ValueError("symbolic spec has no concrete coefficients")
        for n, v in self.coefficients:
            if n == name:
                return v
        raise KeyError(name)

    def coefficient_map(self) -> dict[str, CycloElem]:
        if self.coefficients is None:
            raise ValueError("symbolic spec has no concrete coefficients")
        return dict(self.coefficients)


def _as_cyclo(v) -> CycloElem:
    if isinstance(v, CycloElem):
        return v
    if isinstance(v, (int, Fraction)):
        return CycloElem.from_rational(v)
    raise TypeError(f"cannot use {v!r} as a coefficient")


_ORDER2_FIELDS = ("a2", "a1", "a0", "b2", "b0")
_ORDER3_FIELDS = ("a3", "a2", "a1", "a0", "b3", "b0")


@dataclass(frozen=True)
class GeneralSpec:
    """General recursion with denominator b_order*z_{n-order} + b0.

    Numerator coefficients run a_order..a0; b1 (and b2 for order 3) are zero
    by construction so that the inverse step stays fractional-linear.
    """

    order: int
    coefficients: tuple[tuple[str, CycloElem], ...]

    @staticmethod
    def create(order: int, values: dict) -> "GeneralSpec":
        if order not in (2, 3):
            raise ValueError("order must be 2 or 3")
        fields = _ORDER2_FIELDS if order == 2 else _ORDER3_FIELDS
        missing = [f for f in fields if f not in values]
        extra = [f for f in values if f not in fields]
        if missing or extra:
            raise ValueError(
                f"order-{order} general spec needs exactly {fields}, "
                f"missing={missing}, extra={extra}")
        spec = GeneralSpec(order, tuple(
            (f, _as_cyclo(values[f])) for f in fields))
        spec.validate()
        return spec

    def validate(self):
        if self.coefficient("b" + str(self.order)).is_zero():
            raise DegenerateRecursionError(LINEAR_REASON)
        if self.order == 2:
            if self.coefficient("a1").is_zero():
                raise DegenerateRecursionError(MERGER_REASON)
        else:
            if self.coefficient("a1").is_zero() and \
                    self.coefficient("a2").is_zero():
                raise DegenerateRecursionError(MERGER_REASON)

    def coefficient(self, name: str) -> CycloElem:
        for n, v in self.coefficients:
            if n == name:
                return v
        raise KeyError(name)

    def coefficient_map(self) -> dict[str, CycloElem]:
        return dict(self.coefficients)


@dataclass(frozen=True)
class AffineMap:
    """Invertible change of variable G(x) = a*x + b."""

    a: CycloElem
    b: CycloElem

    def __post_init__(self):
        object.__setattr__(self, "a", _as_cyclo(self.a))
        object.__setattr__(self, "b", _as_cyclo(self.b))
        if self.a.is_zero():
            raise ValueError("affine map must have a != 0")

    @staticmethod
    def identity() -> "AffineMap":
        return AffineMap(CycloElem.one(), CycloElem.zero())

    def inverse(self) -> "AffineMap":
        inv_a = self.a.inv()
        return AffineMap(inv_a, -(self.b * inv_a))

    def apply(self, x: CycloElem) -> CycloElem:
        return self.a * x + self.b

    def is_identity(self) -> bool:
        return self.a == CycloElem.one() and self.b.is_zero()


@dataclass(frozen=True)
class ConditionSystem:
    """Polynomial conditions on the live parameters for one (kind, period)."""

    kind: RecursionKind
    period: int
    meet_i: int
    meet_j: int
    generators: tuple[Poly, ...]

    def __post_init__(self):
        expected = self.period + self.kind.order + 1
        if self.meet_i + self.meet_j != expected:
            raise ValueError("meeting indices violate i + j = k + order + 1")


def meeting_indices(order: int, k: int) -> tuple[int, int]:
    """The balanced meeting pair (i, j) with i + j = k + order + 1."""
    if order not in (2, 3):
        raise ValueError("order must be 2 or 3")
    if k < order + 2:
        raise ValueError(f"period must be at least {order + 2}")
    total = k + order + 1
    i = (total + 1) // 2
    return (i, total - i)


# ---------------------------------------------------------------------------
# Orbit steps
# ---------------------------------------------------------------------------

def _step_context(spec, state):
    """Common setup: (field, vars, coefficient polys, num/den parts)."""
    if not state:
        raise ValueError("empty state")
    first = state[0]
    vars = first.num.vars
    field = first.num.field
    if isinstance(spec, RecursionSpec):
        names = spec.kind.live_params
        if spec.is_symbolic:
            coeffs = {n: Poly.variable(field, vars, n) for n in names}
        else:
            coeffs = {n: Poly.const(field, vars, spec.coefficient(n))
                      for n in names}
    elif isinstance(spec, GeneralSpec):
        coeffs = {n: Poly.const(field, vars, v)
                  for n, v in spec.coefficients}
    else:
        raise TypeError(f"unsupported spec {spec!r}")
    return field, vars, coeffs


def _expected_state_len(spec) -> int:
    return spec.order if isinstance(spec, GeneralSpec) else spec.kind.order


def forward_step(spec, state: list[RatFunc]) -> RatFunc:
    """Next orbit element from state (z_{n-order}, ..., z_{n-1})."""
    order = _expected_state_len(spec)
    if len(state) != order:
        raise ValueError(f"state must have length {order}")
    field, vars, cf = _step_context(spec, state)
    nums = [f.num for f in state]
    dens = [f.den for f in state]
    if isinstance(spec, GeneralSpec):
        if order == 2:
            num = (cf["a2"] * nums[0] * dens[1] + cf["a1"] * nums[1] * dens[0]
                   + cf["a0"] * dens[0] * dens[1])
            den_base = cf["b2"] * nums[0] + cf["b0"] * dens[0]
            factors = [dens[1], den_base]
        else:
            d12 = dens[1] * dens[2]
            num = (cf["a3"] * nums[0] * d12
                   + cf["a2"] * nums[1] * dens[0] * dens[2]
                   + cf["a1"] * nums[2] * dens[0] * dens[1]
                   + cf["a0"] * dens[0] * d12)
            den_base = cf["b3"] * nums[0] + cf["b0"] * dens[0]
            factors = [dens[1], dens[2], den_base]
    elif spec.kind is RecursionKind.ORDER2_REDUCED:
        num = (cf["a2"] * nums[0] * dens[1] + nums[1] * dens[0]
               + cf["a0"] * dens[0] * dens[1])
        factors = [dens[1], nums[0]]
    elif spec.kind is RecursionKind.ORDER3_TYPE1:
        d12 = dens[1] * dens[2]
        num = (cf["a3"] * nums[0] * d12 + nums[1] * dens[0] * dens[2]
               + cf["a1"] * nums[2] * dens[0] * dens[1]
               + cf["a0"] * dens[0] * d12)
        factors = [dens[1], dens[2], nums[0]]
    else:  # ORDER3_TYPE2
        d12 = dens[1] * dens[2]
        num = (cf["a3"] * nums[0] * d12 + nums[2] * dens[0] * dens[1]
               + cf["a0"] * dens[0] * d12)
        factors = [dens[1], dens[2], nums[0]]
    return _finish_step(num, factors)


def inverse_step(spec, state: list[RatFunc]) -> RatFunc:
    """Preceding orbit element from state (z_n, z_{n-1}[, z_{n-2}])."""
    order = _expected_state_len(spec)
    if len(state) != order:
        raise ValueError(f"state must have length {order}")
    if isinstance(spec, GeneralSpec):
        return _general_inverse_step(spec, state)
    field, vars, cf = _step_context(spec, state)
    nums = [f.num for f in state]
    dens = [f.den for f in state]
    if spec.kind is RecursionKind.ORDER2_REDUCED:
        num = (nums[1] + cf["a0"] * dens[1]) * dens[0]
        factors = [dens[1], nums[0] - cf["a2"] * dens[0]]
    elif spec.kind is RecursionKind.ORDER3_TYPE1:
        num = (nums[2] * dens[1] + cf["a1"] * nums[1] * dens[2]
               + cf["a0"] * dens[1] * dens[2]) * dens[0]
        factors = [dens[1], dens[2], nums[0] - cf["a3"] * dens[0]]
    else:  # ORDER3_TYPE2
        num = (nums[1] + cf["a0"] * dens[1]) * dens[0]
        factors = [dens[1], nums[0] - cf["a3"] * dens[0]]
    return _finish_step(num, factors)


def _general_inverse_step(spec: GeneralSpec, state: list[RatFunc]) -> RatFunc:
    field, vars, cf = _step_context(spec, state)
    nums = [f.num for f in state]
    dens = [f.den for f in state]
    if spec.order == 2:
        # z_{n-2} = (b0*z_n - a1*z_{n-1} - a0) / (-b2*z_n + a2)
        num = (cf["b0"] * nums[0] * dens[1] - cf["a1"] * nums[1] * dens[0]
               - cf["a0"] * dens[0] * dens[1])
        factors = [dens[1], cf["a2"] * dens[0] - cf["b2"] * nums[0]]
    else:
        # z_{n-3} = (b0*z_n - a2*z_{n-2} - a1*z_{n-1} - a0) / (-b3*z_n + a3)
        d12 = dens[1] * dens[2]
        num = (cf["b0"] * nums[0] * d12
               - cf["a2"] * nums[2] * dens[0] * dens[1]
               - cf["a1"] * nums[1] * dens[0] * dens[2]
               - cf["a0"] * dens[0] * d12)
        factors = [dens[1], dens[2], cf["a3"] * dens[0] - cf["b3"] * nums[0]]
    return _finish_step(num, factors)


def _finish_step(num: Poly, factors: list[Poly]) -> RatFunc:
    if any(f.is_zero() for f in factors):
        raise SingularStepError("identically zero denominator in orbit step")
    return make_ratfunc(num, factors)


def initial_state(spec, direction: str = "forward") -> list[RatFunc]:
    """Symbolic initial window: (z1..z_order), reversed for backward orbits."""
    order = _expected_state_len(spec)
    names = ("z1", "z2", "z3")[:order]
    if isinstance(spec, GeneralSpec) or not spec.is_symbolic:
        field, vars = Field.CYCLO, names
    else:
        field, vars = Field.Q, names + spec.kind.live_params
    state = [RatFunc.variable(field, vars, n) for n in names]
    if direction == "backward":
        state.reverse()
    return state


def orbit_symbolic(spec, steps: int, direction: str = "forward") -> list[RatFunc]:
    """New orbit elements produced by iterating `steps` times.

    Forward orbits start from (z1, ..., z_order) and return
    [z_{order+1}, ...]; backward orbits start from the reversed initial
    values (u_1 = z_order, ..., u_order = z1) and return [u_{order+1}, ...].
    """
    if steps < 1:
        raise ValueError("steps must be positive")
    if direction not in ("forward", "backward"):
        raise ValueError("direction must be 'forward' or 'backward'")
    window = initial_state(spec, direction)
    step = forward_step if direction == "forward" else inverse_step
    out = []
    for _ in range(steps):
        new = step(spec, window)
        out.append(new)
        window = window[1:] + [new]
    return out


# ---------------------------------------------------------------------------
# Condition systems
# ---------------------------------------------------------------------------

def build_condition_system(kind: RecursionKind, k: int) -> ConditionSystem:
    """Polynomial conditions equivalent to the meeting identity u_j = z_i.

    The cleared numerator of u_j - z_i must vanish identically in the
    initial values, so each of its coefficients with respect to the orbit
    variables is a generator.  Generators are returned content-free
    (integer coefficients with gcd 1), sign-normalized, deduplicated and
    canonically ordered.
    """
    order = kind.order
    i, j = meeting_indices(order, k)
    spec = RecursionSpec.symbolic(kind)
    z_i = orbit_symbolic(spec, i - order, "forward")[-1]
    u_j = orbit_symbolic(spec, j - order, "backward")[-1]
    diff = u_j - z_i
    generators = extract_generators(diff.num, kind)
    return ConditionSystem(kind, k, i, j, generators)


def extract_generators(numer: Poly, kind: RecursionKind) -> tuple[Poly, ...]:
    """Coefficient polynomials of `numer` over the orbit variables,
    normalized and deduplicated."""
    seen = set()
    gens = []
    for _, coeff in numer.split_by(kind.orbit_vars):
        g = coeff.primitive_part()
        if g.is_zero() or g in seen:
            continue
        seen.add(g)
        gens.append(g)
    gens.sort(key=lambda p: p.sort_key())
    return tuple(gens)


# ---------------------------------------------------------------------------
# Normalization and conjugation
# ---------------------------------------------------------------------------

def normalize_to_reduced(g: GeneralSpec) -> tuple[RecursionSpec, AffineMap]:
    """Reduced representative of g's affine-conjugation class.

    Order 2 rescales by a = a1/b2; order 3 splits into type 1 (a2 != 0,
    a = a2/b3) and type 2 (a2 = 0, a1 != 0, a = a1/b3).  In both cases
    b = -b0/b_order, which clears the denominator's constant term.
    """
    g.validate()
    c = g.coefficient_map()
    if g.order == 2:
        b2, b0 = c["b2"], c["b0"]
        a = c["a1"] / b2
        b = -(b0 / b2)
        a2 = (c["a2"] + b0) / c["a1"]
        a0 = (c["a0"] * b2 - (c["a2"] + c["a1"]) * b0) / (c["a1"] ** 2)
        spec = RecursionSpec.concrete(
            RecursionKind.ORDER2_REDUCED, {"a0": a0, "a2": a2})
        return spec, AffineMap(a, b)
    b3, b0 = c["b3"], c["b0"]
    b = -(b0 / b3)
    if not c["a2"].is_zero():
        a = c["a2"] / b3
        a3 = (c["a3"] + b0) / c["a2"]
        a1 = c["a1"] / c["a2"]
        a0 = (c["a0"] * b3 - (c["a3"] + c["a2"] + c["a1"]) * b0) / (c["a2"] ** 2)
        spec = RecursionSpec.concrete(
            RecursionKind.ORDER3_TYPE1, {"a0": a0, "a1": a1, "a3": a3})
    else:
        a = c["a1"] / b3
        a3 = (c["a3"] + b0) / c["a1"]
        a0 = (c["a0"] * b3 - (c["a3"] + c["a1"]) * b0) / (c["a1"] ** 2)
        spec = RecursionSpec.concrete(
            RecursionKind.ORDER3_TYPE2, {"a0": a0, "a3": a3})
    return spec, AffineMap(a, b)


def reduced_to_general(spec: RecursionSpec) -> GeneralSpec:
    """Embed a concrete reduced spec into the general form."""
    c = spec.coefficient_map()
    one = CycloElem.one()
    zero = CycloElem.zero()
    if spec.kind is RecursionKind.ORDER2_REDUCED:
        return GeneralSpec.create(2, {
            "a2": c["a2"], "a1": one, "a0": c["a0"], "b2": one, "b0": zero})
    if spec.kind is RecursionKind.ORDER3_TYPE1:
        return GeneralSpec.create(3, {
            "a3": c["a3"], "a2": one, "a1": c["a1"], "a0": c["a0"],
            "b3": one, "b0": zero})
    return GeneralSpec.create(3, {
        "a3": c["a3"], "a2": zero, "a1": one, "a0": c["a0"],
        "b3": one, "b0": zero})


def conjugate(spec, g: AffineMap) -> GeneralSpec:
    """The recursion G^{-1}(R(G(.), ..., G(.))) as a general spec.

    Reduced specs are embedded into the general form first; conjugating by
    the identity returns that embedding, and conjugating by g then by
    g^{-1} returns it exactly.
    """
    if isinstance(spec, RecursionSpec):
        spec = reduced_to_general(spec)
    c = spec.coefficient_map()
    a, b = g.a, g.b
    if spec.order == 2:
        b2, b0 = c["b2"], c["b0"]
        return GeneralSpec.create(2, {
            "a2": (c["a2"] - b * b2) * a,
            "a1": c["a1"] * a,
            "a0": (c["a2"] + c["a1"]) * b + c["a0"] - b * b * b2 - b * b0,
            "b2": a * a * b2,
            "b0": a * (b * b2 + b0),
        })
    b3, b0 = c["b3"], c["b0"]
    return GeneralSpec.create(3, {
        "a3": (c["a3"] - b * b3) * a,
        "a2": c["a2"] * a,
        "a1": c["a1"] * a,
        "a0": (c["a3"] + c["a2"] + c["a1"]) * b + c["a0"] - b * b * b3 - b * b0,
        "b3": a * a * b3,
        "b0": a * (b * b3 + b0),
    })
