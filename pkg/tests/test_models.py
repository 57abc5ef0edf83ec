import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from joycekit import numdiff
from joycekit.axiomcheck import lattice_pairing_check, sample_a2_states
from joycekit.errors import DegenerateBase, PoleAtPZero, PoleOnZeroSection, ZeroZ
from joycekit.models import (
    A1Point,
    A2_CHART,
    A2State,
    a1_evaluate,
    a1_first_determinant,
    a1_first_jacobian,
    a1_model,
    a1_phi,
    a1_u,
    a2_euler,
    a2_euler_pushforward_residual,
    a2_flows,
    a2_forms,
    a2_joyce_F,
    a2_joyce_residual,
    a2_linear_joyce_data,
    a2_period_model,
    a2_phi,
    a2_plebanski_W,
    a2_scale,
    flat_model,
    joyce_function,
    linear_joyce_data,
    standard_omega,
)
from joycekit.tensorcore import PlebanskiModel, SymplecticData, TangentPoint

from conftest import TWO_PI_I, complex_strategy


# -- A1 ---------------------------------------------------------------------------
def test_a1_values_at_unit_point():
    rec = a1_evaluate(A1Point(1, 0, 1, 0))
    assert abs(rec.W - 1 / (24 * math.pi**2)) < 1e-15


def test_a1_u_on_zero_phi():
    z, zv, phiv = 0.7 - 0.3j, 1.2, 0.4j
    assert abs(a1_u(z, zv, 0, phiv) + phiv * z / TWO_PI_I) < 1e-15


def test_a1_zero_z_rejected():
    with pytest.raises(ZeroZ):
        A1Point(0, 1, 1, 1)


@given(complex_strategy(), complex_strategy(), complex_strategy(), complex_strategy())
def test_a1_first_jacobian_matches_finite_differences(z, zv, th, thv):
    w = z / TWO_PI_I  # stay clear of the pole and of the logarithm's cut
    assume(abs(z) > 0.2 and (w.real > 0.05 or abs(w.imag) > 0.05))
    pt = A1Point(z, zv, th, thv)
    phi, phiv = a1_phi(pt)
    x = np.array([z, zv, phi, phiv])
    grad = lambda y: numdiff.gradient(lambda u: a1_u(*u), y, 1e-4)
    H = numdiff.jacobian(grad, x, 1e-3)
    assert np.max(np.abs(H[:2, 2:] - a1_first_jacobian(pt))) < 1e-7


def test_a1_first_determinant_value():
    # product of the mixed second derivatives as implemented
    det = a1_first_determinant(A1Point(0.4 + 1j, 2, 0.3, -1))
    assert abs(det - 1 / TWO_PI_I**2) < 1e-15


@given(complex_strategy(), complex_strategy())
def test_a1_first_jacobian_is_anti_symplectic(z, th):
    assume(abs(z) > 0.1)
    m = a1_model()
    J = a1_first_jacobian(A1Point(z, 1, th, 0))
    assert np.max(np.abs(J @ m.sym.eta @ J.T + m.sym.omega)) < 1e-15


def test_a1_phi_is_conserved_along_h():
    from joycekit.twistor import leaf_flow

    m = a1_model()
    start = TangentPoint([1 + 0.5j, 0.2], [0.3, -0.1])
    end = leaf_flow(m, start, math.inf, np.array([0.3, 0.0]), 1.0, tol=1e-12)
    p0 = a1_phi(A1Point(*start.x))
    p1 = a1_phi(A1Point(*end.x))
    assert max(abs(p0[0] - p1[0]), abs(p0[1] - p1[1])) < 1e-8


def test_joyce_function_values():
    m = a1_model()
    assert abs(joyce_function(m, TangentPoint([1, 0], [1, 0])) - 1 / (8 * math.pi**2)) < 1e-15
    assert joyce_function(m, TangentPoint([1, 0.5], [0, 0])) == 0
    assert joyce_function(flat_model(), TangentPoint([1, 2], [3, 4])) == 0


def test_linear_joyce_data_flat_and_pole():
    data = linear_joyce_data(flat_model(), [1, 2])
    assert not data.connection_coeffs.any() and not data.metric.any()
    with pytest.raises(PoleOnZeroSection):
        linear_joyce_data(a1_model(), [0, 1])


def test_lattice_pairing():
    assert lattice_pairing_check(a1_model())
    eta_bad = np.array([[0, math.pi * 1j], [-math.pi * 1j, 0]])
    bad = PlebanskiModel(SymplecticData(np.linalg.inv(eta_bad)), W=lambda z, t: 0j,
                         has_period_structure=True)
    assert not lattice_pairing_check(bad)


# -- A2 ---------------------------------------------------------------------------
def test_a2_state_validation():
    with pytest.raises(ValueError):
        A2State(0.5, 0.1, 1.0, 3.0, 0.0)
    with pytest.raises(DegenerateBase):
        a2_flows(A2State.from_qr(-3, 2, 0.5, 0.1), 1.0)
    with pytest.raises(PoleAtPZero):
        a2_phi(A2State(-1, 0, 1, 0, 0.3))


def test_a2_flows_at_infinity(a2_state):
    s = a2_state
    ha, hb = a2_flows(s, math.inf)
    assert np.allclose(hb, [0, 1, 0, s.r / (2 * s.p**2)], atol=0)
    ha0, _ = a2_flows(A2State.from_qr(s.a, s.b, s.q, 0), math.inf)
    assert np.array_equal(ha0, [1, 0, 0, 0])


def test_a2_flows_epsilon_terms(a2_state):
    s = a2_state
    ha_inf, hb_inf = a2_flows(s, math.inf)
    ha, hb = a2_flows(s, 2.0)
    assert np.allclose(hb - hb_inf, [0, 0, 0, -0.5])
    assert np.allclose(ha - ha_inf, [0, 0, -s.p, -s.q / 2])


def test_a2_phi_and_F_on_zero_r(a2_state):
    s = A2State.from_qr(a2_state.a, a2_state.b, a2_state.q, 0)
    assert a2_phi(s) == (s.q, 0)
    assert a2_joyce_F(s) == pytest.approx(0.2)


def test_a2_F_vanishes_on_hyperbola():
    a, b, q = 0.6, 0.3, 0.9 + 0.4j
    p = cmath.sqrt(q**3 + a * q + b)
    # solve phi1 phi2 = 1/2 for r: (q + a r/p) r/(2p) = 1/2
    r = np.roots([a / (2 * p * p), q / (2 * p), -0.5])[0]
    assert abs(a2_joyce_F(A2State(a, b, q, p, r))) < 1e-13


def test_a2_W_on_zero_r():
    s = A2State.from_qr(0.6 + 0.1j, 0.3 - 0.2j, 0.9 + 0.4j, 0)
    expected = -s.a * s.p / (2 * s.discriminant)
    assert abs(a2_plebanski_W(s) - expected) < 1e-15


@pytest.mark.parametrize("lam", [1.3, 0.8 + 0.1j, -0.5j])
def test_a2_weights(a2_state, lam):
    t = a2_scale(a2_state, lam)
    f0, f1 = np.array(a2_phi(a2_state)), np.array(a2_phi(t))
    w = cmath.exp(0.4 * cmath.log(lam))
    assert abs(f1[0] / f0[0] - w) < 1e-12
    assert abs(f1[1] / f0[1] - 1 / w) < 1e-12
    assert abs(a2_plebanski_W(t) / a2_plebanski_W(a2_state) - 1 / lam) < 1e-8


def test_a2_phi_logarithmic_rates(a2_state):
    E = a2_euler(a2_state)
    y = A2_CHART.independent(a2_state.vector)
    for k, weight in ((0, 0.4), (1, -0.4)):
        f = lambda u: a2_phi(A2_CHART.embed(u, a2_state.vector))[k]
        rate = numdiff.directional_derivative(f, y, E, 1e-4) / a2_phi(a2_state)[k]
        assert abs(rate - weight) < 1e-6


def test_a2_two_i_omega_I_is_darboux(a2_state):
    two_i, _ = a2_forms(a2_state)
    # coordinates (a, b, q, r); 2i Omega_I = dq ^ dp + da ^ dr with dp eliminated
    assert abs(two_i[0, 3] - 1) < 1e-12


@pytest.mark.parametrize("seed", [0, 1])
def test_a2_joyce_function_identity(seed):
    for s in sample_a2_states(3, seed):
        assert a2_joyce_residual(s) < 1e-5


def test_a2_euler_pushforward(a2_state):
    assert a2_euler_pushforward_residual(a2_state) < 1e-6


def test_a2_linear_joyce_data():
    data = a2_linear_joyce_data(0.6 + 0.1j, 0.3 - 0.2j)
    assert np.max(np.abs(data.metric - np.array([[0, 0.2], [0.2, 0]]))) < 1e-4
    assert np.max(np.abs(data.connection_coeffs)) < 1e-4


def test_a2_period_chart_model(a2_state):
    model = a2_period_model(a2_state)
    chart = model.metadata["chart"]
    pt = TangentPoint.from_x(chart.forward(a2_state))
    back = chart.inverse(pt.x)
    assert np.max(np.abs(back.vector - a2_state.vector)) < 1e-10
    w0 = model.w(pt)
    w1 = model.w(TangentPoint(1.3 * pt.z, pt.theta))
    assert abs(w1 - w0 / 1.3) < 1e-6 * max(1, abs(w0))
    assert lattice_pairing_check(model)


def test_standard_omega_requires_even():
    with pytest.raises(ValueError):
        standard_omega(3)
