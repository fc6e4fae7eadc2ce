import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multlag.errors import NonPositiveLambda, SpeedLimitExceeded
from multlag.lagrangians import (
    Family, LagrangianModel, ModelParams, L_additive_nr, L_additive_rel, L_hier_nr, L_hier_rel, L_mult_nr,
    L_mult_rel, P2_antiderivative, P_functions, P_j, P_printed, hier_coefficient, momentum_mult_nr,
)
from multlag.potentials import Free, Harmonic, Polynomial

import oracles

UNIT = ModelParams()
SQRT6 = math.sqrt(6.0)  # T = 3 at m = 1
V_ONE = Polynomial((1.0,))
GAUSS_1 = 0.8556243918


def test_family_flags():
    assert Family("mult-rel").relativistic and Family("mult-rel").multiplicative
    assert Family("hier-nr").hierarchical and not Family("hier-nr").relativistic
    assert Family("add-nr").additive


@pytest.mark.parametrize("kwargs, exc", [(dict(lam=0), NonPositiveLambda), (dict(m=-1), ValueError),
                                          (dict(c=0), ValueError)])
def test_params_validation(kwargs, exc):
    with pytest.raises(exc):
        ModelParams(**kwargs)


@pytest.mark.parametrize("m, pot, x, v, want", [
    (1, Free(), 0, 2, 2),
    (1, Harmonic(), 1, 0, -0.5),
    (2, Free(), 3, 1, 1),
])
def test_additive_nr(m, pot, x, v, want):
    assert L_additive_nr(ModelParams(m=m), pot, x, v) == pytest.approx(want)


def test_mult_nr_examples():
    assert L_mult_nr(UNIT, Free(), 0.0, 0.0) == 1.0
    assert L_mult_nr(UNIT, Harmonic(), 0.0, 0.0) == 1.0
    want = math.exp(-0.5) + oracles.gauss_integral(1.0, 1.0)
    assert L_mult_nr(UNIT, Free(), 0.0, 1.0) == pytest.approx(want, rel=1e-12)


def test_mult_nr_excess_is_stable():
    p = ModelParams(lam=1e6)
    # L - m lam^2 -> T - V; the direct difference would lose every digit
    assert L_mult_nr(p, Harmonic(), 0.5, 0.3, excess=True) == pytest.approx(0.045 - 0.125, rel=1e-9)


def test_momentum_examples():
    assert momentum_mult_nr(UNIT, Harmonic(), 0.4, 0.0) == 0.0
    assert momentum_mult_nr(ModelParams(lam=10), Free(), 0.0, 1.0) == pytest.approx(0.9983, abs=1e-4)
    want = oracles.gauss_integral(1.0, 1.0) * math.exp(-0.5)
    assert want == pytest.approx(GAUSS_1 * math.exp(-0.5), abs=1e-10)
    assert momentum_mult_nr(UNIT, Harmonic(), 1.0, 1.0) == pytest.approx(want, rel=1e-10)


def test_momentum_tends_to_mv():
    devs = [abs(momentum_mult_nr(ModelParams(lam=2.0**k), Free(), 0, 1.0) - 1.0) for k in range(3, 8)]
    assert all(b < 0.3 * a for a, b in zip(devs, devs[1:]))


@settings(max_examples=60, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.5, 5))
def test_momentum_is_velocity_derivative(x, v, lam):
    p = ModelParams(lam=lam)
    fd = oracles.d1(lambda u: L_mult_nr(p, Harmonic(), x, u), v)
    assert momentum_mult_nr(p, Harmonic(), x, v) == pytest.approx(fd, rel=1e-6, abs=1e-8)


@pytest.mark.parametrize("j, v, pot, want", [(1, SQRT6, V_ONE, 2), (2, SQRT6, V_ONE, 8),
                                             (3, 0.0, Polynomial((2.0,)), -8)])
def test_hier_nr_examples(j, v, pot, want):
    assert L_hier_nr(UNIT, pot, j, 0.0, v) == pytest.approx(want, rel=1e-14)


def test_hier_coefficients_lead_and_tail():
    for j in range(1, 12):
        assert hier_coefficient(j, j) == -1
        assert hier_coefficient(j, 0) == pytest.approx(1 / (2 * j - 1))


def test_hier_order_validation():
    with pytest.raises(ValueError):
        L_hier_nr(UNIT, Free(), 0, 0.0, 0.0)
    with pytest.raises(ValueError):
        LagrangianModel(Family.HIERARCHY_NR, UNIT, Free())


@pytest.mark.parametrize("pot, x, v, want", [(Free(), 0, 0, -1), (Free(), 0, 0.6, -0.8),
                                             (Harmonic(), 1, 0, -1.5)])
def test_additive_rel(pot, x, v, want):
    assert L_additive_rel(UNIT, pot, x, v) == pytest.approx(want, rel=1e-14)


def test_additive_rel_speed_limit():
    with pytest.raises(SpeedLimitExceeded):
        L_additive_rel(UNIT, Free(), 0.0, 1.0)


def test_mult_rel_examples():
    assert L_mult_rel(UNIT, Free(), 0.0, 0.0) == pytest.approx(math.exp(-1), rel=1e-15)
    g = 1 / math.sqrt(0.75)
    want = math.exp(-g) + 0.5 * oracles.rel_integral(0.5, 1.0, 1.0)
    assert L_mult_rel(UNIT, Free(), 0.0, 0.5) == pytest.approx(want, rel=1e-10)


def test_mult_rel_rest_scaled_and_excess_consistent():
    p = ModelParams(lam=1.5, c=2.0)
    plain = L_mult_rel(p, Harmonic(), 0.4, 0.9)
    assert L_mult_rel(p, Harmonic(), 0.4, 0.9, excess=True) == pytest.approx(plain - p.energy_scale, rel=1e-12)
    scaled = L_mult_rel(p, Harmonic(), 0.4, 0.9, rest_scaled=True)
    assert scaled == pytest.approx(plain * math.exp(4 / 2.25), rel=1e-12)


def test_P_examples():
    assert P_j(0.0, 1.0, 4) == 1.0
    assert P_j(0.6, 1.0, 1) == pytest.approx(0.8, rel=1e-12)
    assert P_j(0.6, 1.0, 3) == pytest.approx(0.35, rel=1e-12)
    assert P_j(0.6, 1.0, 0) == 1.0


@pytest.mark.parametrize("v", [-0.85, -0.3, 0.2, 0.6, 0.9])
def test_P_matches_defining_integral(v):
    Ps = P_functions(v, 1.0, 5)
    for j in range(6):
        assert Ps[j] == pytest.approx(oracles.P(v, 1.0, j), rel=1e-10)


@pytest.mark.parametrize("v", np.linspace(-0.9, 0.9, 13))
def test_P1_P3_closed_forms(v):
    assert P_j(v, 1.0, 1) == pytest.approx(P_printed(v, 1.0, 1), rel=1e-10)
    assert P_j(v, 1.0, 3) == pytest.approx(P_printed(v, 1.0, 3), rel=1e-10)


def test_P2_elementary_antiderivative():
    for v in (0.1, 0.5, 0.8):
        assert P2_antiderivative(v, 1.0) == pytest.approx(P_j(v, 1.0, 2), rel=1e-12)


def test_printed_P2_P4_disagree_with_integral():
    assert abs(P_printed(0.6, 1.0, 2) - P_j(0.6, 1.0, 2)) > 0.1
    assert abs(P_printed(0.6, 1.0, 4) - P_j(0.6, 1.0, 4)) > 0.1


def test_hier_rel_examples():
    assert L_hier_rel(UNIT, Free(), 1, 0.0, 0.6) == pytest.approx(-0.8, rel=1e-12)
    assert L_hier_rel(UNIT, V_ONE, 2, 0.0, 0.0) == pytest.approx(-4.0, rel=1e-14)
    for v in (-0.5, 0.1, 0.7):
        assert L_hier_rel(UNIT, Harmonic(), 1, 0.8, v) == pytest.approx(
            L_additive_rel(UNIT, Harmonic(), 0.8, v), rel=1e-12)


def test_hier_nr_first_member_is_additive():
    for v in (-1.0, 0.3):
        assert L_hier_nr(UNIT, Harmonic(), 1, 0.7, v) == pytest.approx(L_additive_nr(UNIT, Harmonic(), 0.7, v))


def test_model_dispatch_and_describe():
    for fam in Family:
        j = 2 if fam.hierarchical else None
        model = LagrangianModel(fam, UNIT, Harmonic(), j)
        assert math.isfinite(float(model(0.3, 0.4)))
        assert model.describe().startswith(f"family={fam.value}")


def test_hier_coefficient_exactness():
    # the float table entries are exactly the nearest doubles of the rationals
    for j in range(1, 10):
        for k in range(j + 1):
            exact = Fraction(math.factorial(j), math.factorial(j - k) * math.factorial(k) * (2 * j - 2 * k - 1))
            assert hier_coefficient(j, k) == float(exact)
