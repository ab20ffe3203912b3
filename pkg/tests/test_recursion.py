"""Tests for orbit steps, meeting indices, condition systems and conjugation."""

import random
from fractions import Fraction

import pytest

from fraclin.poly import Field, RatFunc, parse_poly, poly_to_str
from fraclin.recursion import (
    AffineMap,
    DegenerateRecursionError,
    GeneralSpec,
    RecursionKind,
    RecursionSpec,
    build_condition_system,
    conjugate,
    forward_step,
    initial_state,
    inverse_step,
    meeting_indices,
    normalize_to_reduced,
    orbit_symbolic,
    reduced_to_general,
)
from fraclin.ring import CycloElem, parse_scalar

F = Fraction
K2 = RecursionKind.ORDER2_REDUCED
K31 = RecursionKind.ORDER3_TYPE1
K32 = RecursionKind.ORDER3_TYPE2

LYNESS = RecursionSpec.concrete(K2, {"a0": 1, "a2": 0})


def rf(text, vars):
    return RatFunc.from_poly(parse_poly(text, vars))


def random_rational(rng, bound=4):
    return F(rng.randint(-bound, bound), rng.randint(1, bound))


class TestForwardStep:
    def test_symbolic_order2(self):
        spec = RecursionSpec.symbolic(K2)
        state = initial_state(spec)
        got = forward_step(spec, state)
        vars = state[0].num.vars
        assert got.num == parse_poly("a2*z1 + z2 + a0", vars)
        assert got.den == parse_poly("z1", vars)

    def test_lyness_concrete_step(self):
        state = [RatFunc.const(Field.CYCLO, ("z1", "z2"), 1),
                 RatFunc.const(Field.CYCLO, ("z1", "z2"), 2)]
        got = forward_step(LYNESS, state)
        assert got == RatFunc.const(Field.CYCLO, ("z1", "z2"), 3)

    def test_symbolic_order3_type2(self):
        spec = RecursionSpec.symbolic(K32)
        state = initial_state(spec)
        got = forward_step(spec, state)
        vars = state[0].num.vars
        assert got.num == parse_poly("a3*z1 + z3 + a0", vars)
        assert got.den == parse_poly("z1", vars)

    def test_wrong_state_length(self):
        spec = RecursionSpec.symbolic(K2)
        with pytest.raises(ValueError):
            forward_step(spec, initial_state(spec)[:1])


class TestInverseStep:
    def test_symbolic_order2_formula(self):
        spec = RecursionSpec.symbolic(K2)
        state = initial_state(spec, "backward")  # (u1, u2) = (z2, z1)
        got = inverse_step(spec, state)
        vars = state[0].num.vars
        assert got.num == parse_poly("z1 + a0", vars)
        assert got.den == parse_poly("z2 - a2", vars)

    def test_symbolic_order3_type1_formula(self):
        spec = RecursionSpec.symbolic(K31)
        state = initial_state(spec, "backward")  # (z3, z2, z1)
        got = inverse_step(spec, state)
        vars = state[0].num.vars
        assert got.num == parse_poly("z1 + a1*z2 + a0", vars)
        assert got.den == parse_poly("z3 - a3", vars)

    def test_inverse_undoes_forward_symbolic(self):
        for kind in RecursionKind:
            spec = RecursionSpec.symbolic(kind)
            state = initial_state(spec)
            new = forward_step(spec, state)
            back_state = [new] + state[:0:-1]
            assert inverse_step(spec, back_state) == state[0]

    def test_inverse_undoes_forward_concrete(self):
        rng = random.Random(101)
        for _ in range(20):
            kind = rng.choice(list(RecursionKind))
            values = {p: random_rational(rng) for p in kind.live_params}
            spec = RecursionSpec.concrete(kind, values)
            vars = kind.orbit_vars
            state = [RatFunc.variable(Field.CYCLO, vars, v) for v in vars]
            new = forward_step(spec, state)
            back_state = [new] + state[:0:-1]
            assert inverse_step(spec, back_state) == state[0]


class TestOrbitSymbolic:
    def test_lyness_period_five(self):
        orbit = orbit_symbolic(LYNESS, 5)
        vars = ("z1", "z2")
        assert orbit[-2] == RatFunc.variable(Field.CYCLO, vars, "z1")
        assert orbit[-1] == RatFunc.variable(Field.CYCLO, vars, "z2")

    def test_two_steps_match_listing(self):
        spec = RecursionSpec.symbolic(K2)
        orbit = orbit_symbolic(spec, 2)
        vars = orbit[0].num.vars
        assert orbit[0] == rf("a2*z1 + z2 + a0", vars) / rf("z1", vars)
        z3 = orbit[0]
        expected_z4 = (rf("a2*z2 + a0", vars) + z3) / rf("z2", vars)
        assert orbit[1] == expected_z4

    def test_lyness_backward_orbit(self):
        # hand substitution into u3 = (u2 + a0)/(u1 - a2) with a0=1, a2=0
        orbit = orbit_symbolic(LYNESS, 3, "backward")
        vars = ("z1", "z2")
        u3 = orbit[0]
        assert u3.num == parse_poly("z1 + 1", vars).promote()
        assert u3.den == parse_poly("z2", vars).promote()


class TestMeetingIndices:
    def test_published_pairs(self):
        table = {(2, 5): (4, 4), (2, 6): (5, 4), (2, 8): (6, 5),
                 (2, 12): (8, 7), (3, 8): (6, 6), (3, 12): (8, 8)}
        for (order, k), expected in table.items():
            assert meeting_indices(order, k) == expected

    def test_index_sum_invariant(self):
        for order in (2, 3):
            for k in range(order + 2, 25):
                i, j = meeting_indices(order, k)
                assert i + j == k + order + 1
                assert abs(i - j) <= 1

    def test_small_period_rejected(self):
        with pytest.raises(ValueError):
            meeting_indices(2, 3)


class TestMeetingConsistency:
    # For a globally periodic solution the identity u_j = z_i must hold for
    # every index pair with i + j = k + order + 1, not only the builder's.
    @pytest.mark.parametrize("spec,k", [
        (LYNESS, 5),
        (RecursionSpec.concrete(K2, {"a0": 0, "a2": 0}), 6),
        (RecursionSpec.concrete(K2, {"a0": parse_scalar("(1 - I)/2"),
                                     "a2": parse_scalar("I")}), 8),
        (RecursionSpec.concrete(K31, {"a0": 1, "a1": 1, "a3": 0}), 8),
        (RecursionSpec.concrete(K31, {"a0": F(-1, 2), "a1": -1, "a3": -1}), 12),
    ])
    def test_full_identity_chain(self, spec, k):
        order = spec.order
        total = k + order + 1
        vars = spec.kind.orbit_vars
        init = [RatFunc.variable(Field.CYCLO, vars, v) for v in vars]
        zs = init + orbit_symbolic(spec, total - order, "forward")
        us = list(reversed(init)) + orbit_symbolic(spec, total - order, "backward")
        for i in range(1, total):
            j = total - i
            if j < 1 or i > len(zs) or j > len(us):
                continue
            assert us[j - 1] == zs[i - 1], f"u_{j} != z_{i}"


class TestConditionSystems:
    def test_period5_variety_is_lyness(self):
        cs = build_condition_system(K2, 5)
        assert cs.meet_i == 4 and cs.meet_j == 4
        # {a0: 1, a2: 0} satisfies every generator ...
        for g in cs.generators:
            assert g.eval_partial({"a0": 1, "a2": 0}).is_zero()
        # ... and {a0: 0, a2: 0} fails at least one.
        assert any(not g.eval_partial({"a0": 0, "a2": 0}).is_zero()
                   for g in cs.generators)

    def test_period5_matches_published_generators(self):
        cs = build_condition_system(K2, 5)
        published = [
            "a2",
            "(a0 - a2)*a2",
            "-1 + a0 + a2^2",
            "a2*(-1 - a2 + a2^2)",
            "a0*a2^2",
            "a2*(a0 + a2)",
            "1 - a0 - a2 + a2^2",
            "a2*(-a0 + a0*a2 + a2^2)",
        ]
        expected = {parse_poly(t, ("a0", "a2")).primitive_part()
                    for t in published}
        assert set(cs.generators) == expected

    def test_period6_unique_solution(self):
        cs = build_condition_system(K2, 6)
        for g in cs.generators:
            assert g.eval_partial({"a0": 0, "a2": 0}).is_zero()
        assert any(not g.eval_partial({"a0": 1, "a2": 0}).is_zero()
                   for g in cs.generators)

    def test_type2_period8_infeasible_constant(self):
        cs = build_condition_system(K32, 8)
        consts = [g for g in cs.generators if g.is_constant()]
        assert consts and all(not g.is_zero() for g in consts)

    def test_build_is_deterministic(self):
        a = build_condition_system(K2, 5)
        b = build_condition_system(K2, 5)
        assert a.generators == b.generators

    def test_generators_are_normalized(self):
        cs = build_condition_system(K2, 8)
        seen = set()
        for g in cs.generators:
            assert g not in seen
            seen.add(g)
            assert g.rational_content() == 1  # integer, content-free
            assert g.leading_coeff() > 0


class TestNormalization:
    def test_lyness_general_form(self):
        g = GeneralSpec.create(2, {"a2": 0, "a1": 1, "a0": 1, "b2": 1, "b0": 0})
        spec, gmap = normalize_to_reduced(g)
        assert spec.kind is K2
        assert spec.coefficient("a0") == CycloElem.one()
        assert spec.coefficient("a2") == CycloElem.zero()
        assert gmap.is_identity()

    def test_already_reduced_unchanged(self):
        g = GeneralSpec.create(2, {"a2": F(1, 3), "a1": 1, "a0": F(-2, 5),
                                   "b2": 1, "b0": 0})
        spec, gmap = normalize_to_reduced(g)
        assert spec.coefficient("a2") == CycloElem.from_rational(F(1, 3))
        assert spec.coefficient("a0") == CycloElem.from_rational(F(-2, 5))
        assert gmap.is_identity()

    def test_degenerate_inputs(self):
        with pytest.raises(DegenerateRecursionError, match="linear"):
            GeneralSpec.create(2, {"a2": 1, "a1": 1, "a0": 1, "b2": 0, "b0": 1})
        with pytest.raises(DegenerateRecursionError, match="merger"):
            GeneralSpec.create(2, {"a2": 1, "a1": 0, "a0": 1, "b2": 1, "b0": 0})
        with pytest.raises(DegenerateRecursionError, match="merger"):
            GeneralSpec.create(3, {"a3": 1, "a2": 0, "a1": 0, "a0": 1,
                                   "b3": 1, "b0": 0})

    def test_type_split(self):
        t1 = GeneralSpec.create(3, {"a3": 1, "a2": 2, "a1": 3, "a0": 1,
                                    "b3": 1, "b0": 0})
        spec1, _ = normalize_to_reduced(t1)
        assert spec1.kind is K31
        t2 = GeneralSpec.create(3, {"a3": 1, "a2": 0, "a1": 3, "a0": 1,
                                    "b3": 1, "b0": 0})
        spec2, _ = normalize_to_reduced(t2)
        assert spec2.kind is K32

    def _symbolic_conjugation_identity(self, g: GeneralSpec, reduced, gmap):
        """Oracle: G^{-1}(R(G(z1), ..., G(z.))) equals the reduced recursion
        as rational functions of the initial values."""
        order = g.order
        vars = ("z1", "z2", "z3")[:order]
        zs = [RatFunc.variable(Field.CYCLO, vars, v) for v in vars]
        a = RatFunc.const(Field.CYCLO, vars, gmap.a)
        b = RatFunc.const(Field.CYCLO, vars, gmap.b)
        transformed = [a * z + b for z in zs]
        lhs = (forward_step(g, transformed) - b) / a
        rhs = forward_step(reduced, zs)
        assert lhs == rhs

    def test_random_general_specs_conjugate_correctly(self):
        rng = random.Random(77)
        done = 0
        while done < 25:
            order = rng.choice((2, 3))
            fields = ("a2", "a1", "a0", "b2", "b0") if order == 2 else \
                ("a3", "a2", "a1", "a0", "b3", "b0")
            values = {f: random_rational(rng) for f in fields}
            try:
                g = GeneralSpec.create(order, values)
            except DegenerateRecursionError:
                continue
            reduced, gmap = normalize_to_reduced(g)
            self._symbolic_conjugation_identity(g, reduced, gmap)
            done += 1


class TestConjugate:
    def test_identity_map_is_identity(self):
        g = reduced_to_general(LYNESS)
        assert conjugate(LYNESS, AffineMap.identity()) == g
        assert conjugate(g, AffineMap.identity()) == g

    def test_round_trip(self):
        rng = random.Random(55)
        g = reduced_to_general(LYNESS)
        for _ in range(20):
            a = CycloElem(random_rational(rng), random_rational(rng),
                          random_rational(rng), random_rational(rng))
            if a.is_zero():
                continue
            b = CycloElem.from_rational(random_rational(rng))
            gmap = AffineMap(a, b)
            assert conjugate(conjugate(g, gmap), gmap.inverse()) == g

    def test_conjugated_lyness_still_period_five(self):
        # numeric orbit oracle
        import mpmath
        spec = conjugate(LYNESS, AffineMap(CycloElem.from_rational(2),
                                           CycloElem.zero()))
        c = spec.coefficient_map()
        with mpmath.workprec(128):
            def num(x):
                from fraclin.ring import embed
                return embed(x, 128).to_mpc()
            a2, a1, a0 = num(c["a2"]), num(c["a1"]), num(c["a0"])
            b2, b0 = num(c["b2"]), num(c["b0"])
            w = [mpmath.mpc("0.731"), mpmath.mpc("1.279")]
            orbit = list(w)
            for _ in range(10):
                z = (a2 * w[0] + a1 * w[1] + a0) / (b2 * w[0] + b0)
                orbit.append(z)
                w = [w[1], z]
            for n in range(len(orbit) - 5):
                assert abs(orbit[n + 5] - orbit[n]) < mpmath.mpf(2) ** -100
            assert abs(orbit[4] - orbit[0]) > mpmath.mpf(1) / 100
