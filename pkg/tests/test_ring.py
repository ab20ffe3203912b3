"""Tests for exact Q(zeta12) arithmetic, embeddings and recognition."""

import random
from fractions import Fraction

import mpmath
import pytest

from fraclin.ring import (
    ComplexApprox,
    CycloElem,
    ScalarParseError,
    embed,
    parse_scalar,
    random_cyclo,
    recognize,
    render_scalar,
    render_scalar_pretty,
    root_of_unity_order,
)

F = Fraction
ZETA = CycloElem.zeta()
I = CycloElem.i()
SQRT3 = CycloElem.sqrt3()
ONE = CycloElem.one()


def C(c0, c1=0, c2=0, c3=0):
    return CycloElem(F(c0), F(c1), F(c2), F(c3))


class TestAddition:
    def test_additive_inverse(self):
        assert C(1) + C(-1) == C(0)

    def test_double_i(self):
        assert I + I == C(0, 0, 0, 2)

    def test_half_conjugates_sum_to_one(self):
        # (1 - i)/2 + (1 + i)/2 = 1
        a = CycloElem(F(1, 2), F(0), F(0), F(-1, 2))
        b = CycloElem(F(1, 2), F(0), F(0), F(1, 2))
        assert a + b == ONE


class TestMultiplication:
    def test_i_squared(self):
        assert I * I == C(-1)

    def test_sqrt3_squared(self):
        assert SQRT3 * SQRT3 == C(3)

    def test_zeta_squared_is_sixth_root(self):
        z2 = ZETA * ZETA
        assert z2 * z2 * z2 == C(-1)

    def test_zeta_orders(self):
        assert ZETA ** 6 == C(-1)
        assert ZETA ** 12 == ONE


class TestInverse:
    def test_inv_i(self):
        assert I.inv() == C(0, 0, 0, -1)

    def test_inv_zeta(self):
        # zeta^-1 = -zeta^5 = zeta - zeta^3 by the reduction rule; the product
        # check below is the oracle.
        got = ZETA.inv()
        assert got == C(0, 1, 0, -1)
        assert ZETA * got == ONE

    def test_inv_zero_raises(self):
        with pytest.raises(ZeroDivisionError):
            CycloElem.zero().inv()

    def test_division(self):
        assert (ONE / I) == -I


class TestEmbedding:
    def test_zeta_embeds_on_unit_circle(self):
        v = embed(ZETA, 128)
        with mpmath.workprec(128):
            assert abs(v.re - mpmath.sqrt(3) / 2) < 1e-30
            assert abs(v.im - mpmath.mpf(1) / 2) < 1e-30

    def test_half_minus_half_i(self):
        v = embed(CycloElem(F(1, 2), F(0), F(0), F(-1, 2)), 128)
        with mpmath.workprec(128):
            assert abs(v.re - 0.5) < 1e-30
            assert abs(v.im + 0.5) < 1e-30

    def test_sqrt3(self):
        v = embed(SQRT3, 128)
        with mpmath.workprec(128):
            assert abs(v.re - mpmath.sqrt(3)) < 1e-30
            assert abs(v.im) < 1e-30

    def test_precision_floor(self):
        with pytest.raises(ValueError):
            embed(ONE, 32)


class TestRecognition:
    def test_half_minus_half_i(self):
        target = CycloElem(F(1, 2), F(0), F(0), F(-1, 2))
        got = recognize(embed(target, 256), 10 ** 6)
        assert got == target
        # oracle: exact re-embedding agrees to full precision
        back = embed(got, 256)
        orig = embed(target, 256)
        assert abs(back.to_mpc() - orig.to_mpc()) == 0

    def test_sqrt3(self):
        got = recognize(embed(SQRT3, 256), 10 ** 6)
        assert got == SQRT3

    def test_pi_not_recognized(self):
        with mpmath.workprec(256):
            v = ComplexApprox(mpmath.pi, mpmath.mpf(0), 256)
        assert recognize(v, 10 ** 6) is None

    def test_precision_precondition(self):
        with mpmath.workprec(64):
            v = ComplexApprox(mpmath.mpf(1), mpmath.mpf(0), 64)
        with pytest.raises(ValueError):
            recognize(v, 100)

    def test_round_trip_random(self):
        rng = random.Random(1201)
        for _ in range(500):
            x = random_cyclo(rng, max_num=10 ** 4, max_den=10 ** 4)
            assert recognize(embed(x, 256), 10 ** 6) == x


class TestRootOfUnityOrder:
    def test_i_has_order_four(self):
        assert root_of_unity_order(I) == 4

    def test_sixth_root(self):
        # (1 + sqrt3*i)/2 = zeta^2
        x = (ONE + SQRT3 * I) / 2
        assert x == C(0, 0, 1, 0)
        assert root_of_unity_order(x) == 6

    def test_two_is_not_a_root_of_unity(self):
        assert root_of_unity_order(C(2)) is None

    def test_twelfth(self):
        assert root_of_unity_order(ZETA) == 12


class TestFieldAxioms:
    def test_randomized_axioms(self):
        rng = random.Random(7)
        one = ONE
        for _ in range(1000):
            x = random_cyclo(rng)
            y = random_cyclo(rng)
            z = random_cyclo(rng)
            assert (x + y) + z == x + (y + z)
            assert (x * y) * z == x * (y * z)
            assert x * (y + z) == x * y + x * z
            assert x * y == y * x
            if not x.is_zero():
                assert x * x.inv() == one

    def test_embedding_is_multiplicative(self):
        rng = random.Random(8)
        prec = 192
        with mpmath.workprec(prec):
            bound = mpmath.mpf(2) ** (-prec + 8)
            for _ in range(200):
                x = random_cyclo(rng)
                y = random_cyclo(rng)
                lhs = embed(x * y, prec).to_mpc()
                rhs = embed(x, prec).to_mpc() * embed(y, prec).to_mpc()
                scale = max(1, abs(rhs))
                assert abs(lhs - rhs) < bound * scale


class TestTextualForm:
    def test_render_exact(self):
        assert render_scalar(CycloElem(F(1, 2), F(0), F(0), F(-1, 2))) == \
            "cyclo(1/2, 0, 0, -1/2)"

    def test_parse_expression(self):
        assert parse_scalar("(1 - I)/2") == CycloElem(F(1, 2), F(0), F(0), F(-1, 2))
        assert parse_scalar("SQRT3") == SQRT3
        assert parse_scalar("-3/4") == C(F(-3, 4))
        assert parse_scalar("1 + 1/2*I - SQRT3/2") == \
            CycloElem(F(1), F(-1), F(0), F(1))

    def test_parse_cyclo_tuple(self):
        assert parse_scalar("cyclo(0, 2, 0, -1)") == SQRT3

    def test_round_trip(self):
        rng = random.Random(99)
        for _ in range(50):
            x = random_cyclo(rng, 30, 30)
            assert parse_scalar(render_scalar(x)) == x
            assert parse_scalar(render_scalar_pretty(x)) == x

    def test_pretty_uses_i_and_sqrt3(self):
        x = parse_scalar("1 - 1/2*I + 1/2*SQRT3")
        assert render_scalar_pretty(x) == "1 - 1/2*I + 1/2*SQRT3"

    def test_parse_errors_carry_column(self):
        with pytest.raises(ScalarParseError) as err:
            parse_scalar("1 + $")
        assert err.value.column == 5
        with pytest.raises(ScalarParseError):
            parse_scalar("1 +")
        with pytest.raises(ScalarParseError):
            parse_scalar("QQQ")
