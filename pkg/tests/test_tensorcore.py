import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from joycekit.errors import BothZero, NoPeriodStructure, PoleError, ZeroEpsilon
from joycekit.models import a1_model, flat_model, standard_omega, synthetic_counterexample_model
from joycekit.tensorcore import (
    PlebanskiModel,
    SymplecticData,
    TangentPoint,
    TwoForm,
    euler_fields,
    form_pencil,
    forms_from_metric,
    frames,
    hk_tensors,
    inverse_epsilon,
    two_forms,
)

from conftest import TWO_PI_I, complex_strategy

points4 = st.lists(complex_strategy(), min_size=4, max_size=4)


def a1_point(x):
    x = np.array(x, dtype=complex)
    if abs(x[0]) < 0.2:
        x[0] += 0.5
    return TangentPoint(x[:2], x[2:])


def test_symplectic_data_inverse():
    sym = SymplecticData(standard_omega(4))
    assert np.allclose(sym.omega @ sym.eta, np.eye(4))
    assert np.allclose(sym.eta, -sym.eta.T)


def test_symplectic_data_rejects_non_skew():
    with pytest.raises(ValueError):
        SymplecticData(np.eye(2))


def test_inverse_epsilon():
    assert inverse_epsilon(math.inf) == 0
    assert inverse_epsilon(2.0) == 0.5
    with pytest.raises(ZeroEpsilon):
        inverse_epsilon(0)


def test_flat_frame_is_coordinate_sum():
    fr = frames(flat_model(), TangentPoint([0.3, 1j], [0.2, -1.0]), 1.0)
    assert np.array_equal(fr.h_eps, np.vstack([np.eye(2), np.eye(2)]))
    assert np.array_equal(fr.v, np.vstack([np.zeros((2, 2)), np.eye(2)]))


def test_a1_horizontal_dual_component():
    fr = frames(a1_model(), TangentPoint([1, 0], [1, 0]), math.inf)
    assert abs(fr.h[3, 0] - 1 / TWO_PI_I) < 1e-15


def test_a1_pencil_frame_at_eps_two():
    fr = frames(a1_model(), TangentPoint([1, 0], [2, 0]), 2.0)
    assert abs(fr.h_eps[2, 0] - 0.5) < 1e-15
    assert abs(fr.h_eps[3, 0] - 2 / TWO_PI_I) < 1e-15


def test_pole_is_rejected():
    with pytest.raises(PoleError):
        frames(a1_model(), TangentPoint([0, 1], [1, 0]), 1.0)


def test_flat_omega_minus_blocks():
    om = standard_omega(2)
    _, _, minus = two_forms(flat_model(), TangentPoint([1, 2], [3, 4]))
    assert np.allclose(minus.double_sum_coefficients()[2:, 2:], 0.5 * om)
    assert np.allclose(minus.mat[2:, :2], 0)
    assert minus.skew_defect() == 0


def test_a1_two_i_omega_I_constant_coefficients():
    # 2i Omega_I = -(2 pi i)^{-1} (dtheta ^ dz_dual - dtheta_dual ^ dz) for this coordinate convention
    for x in ([1, 0, 1, 0], [0.3 - 1j, 2, 0.5j, -1]):
        _, om_i, _ = two_forms(a1_model(), TangentPoint.from_x(x))
        two_i = 2j * om_i.mat
        assert abs(two_i[2, 1] + 1 / TWO_PI_I) < 1e-15
        assert abs(two_i[3, 0] - 1 / TWO_PI_I) < 1e-15
        assert abs(two_i[0, 1]) < 1e-15 and abs(two_i[2, 3]) < 1e-15


def test_a1_omega_minus_mixed_coefficient():
    _, _, minus = two_forms(a1_model(), TangentPoint([1, 0], [1, 0]))
    assert abs(minus.component(2, 0) - 1 / (4 * math.pi**2)) < 1e-15


def test_double_sum_coefficients_halve():
    f = TwoForm(np.array([[0, 2], [-2, 0]]))
    assert np.allclose(f.double_sum_coefficients(), [[0, 1], [-1, 0]])
    assert f([1, 0], [0, 1]) == 2


@given(points4)
def test_quaternion_and_compatibility(x):
    for model in (a1_model(), flat_model(), synthetic_counterexample_model()):
        pt = a1_point(x)
        hk = hk_tensors(model, pt)
        assert hk.quaternion_defect() < 1e-12
        assert hk.compatibility_defect() < 1e-12
        assert np.allclose(hk.g, hk.g.T)
        assert abs(np.linalg.det(hk.g)) > 0


@given(points4, st.integers(0, 2**31 - 1))
def test_metric_invariant_under_J(x, seed):
    rng = np.random.default_rng(seed)
    hk = hk_tensors(a1_model(), a1_point(x))
    u, w = rng.normal(size=(2, 4)) + 1j * rng.normal(size=(2, 4))
    assert abs((hk.J @ u) @ hk.g @ (hk.J @ w) - u @ hk.g @ w) < 1e-10 * max(1, abs(u @ hk.g @ w))


@given(points4)
def test_forms_from_metric_match_coordinate_forms(x):
    pt = a1_point(x)
    model = a1_model()
    direct = two_forms(model, pt)
    via_g = forms_from_metric(hk_tensors(model, pt))
    for f, g in zip(direct, via_g):
        assert np.max(np.abs(f.mat - g.mat)) < 1e-12 * max(1, np.max(np.abs(f.mat)))


def test_form_pencil_endpoints():
    pt = TangentPoint([1 + 1j, 0.3], [0.7, -0.2])
    model = a1_model()
    plus, _, minus = two_forms(model, pt)
    assert np.array_equal(form_pencil(model, pt, 1, 0).mat, plus.mat)
    assert np.array_equal(form_pencil(model, pt, 0, 1).mat, minus.mat)
    with pytest.raises(BothZero):
        form_pencil(model, pt, 0, 0)


@given(points4, complex_strategy(-3, 3))
def test_pencil_kernel_contains_h_eps(x, eps):
    if abs(eps) < 0.1:
        eps = 1.0
    pt = a1_point(x)
    model = a1_model()
    B = form_pencil(model, pt, 1.0, eps).mat
    H = frames(model, pt, eps).h_eps
    assert np.max(np.abs(H.T @ B)) < 1e-12 * max(1.0, np.max(np.abs(B)))


def test_euler_fields():
    Z, E = euler_fields(flat_model(), TangentPoint([1, 2], [5, 6]))
    assert np.array_equal(Z, [1, 2]) and np.array_equal(E, [1, 2, 0, 0])
    Z, E = euler_fields(flat_model(), TangentPoint([0, 0], [5, 6]))
    assert not Z.any() and not E.any()
    bare = PlebanskiModel(SymplecticData(standard_omega(2)), W=lambda z, t: 0j)
    with pytest.raises(NoPeriodStructure):
        euler_fields(bare, TangentPoint([1, 2], [0, 0]))


@given(points4)
def test_fallback_derivatives_match_analytic(x):
    model = a1_model()
    numeric = PlebanskiModel(model.sym, W=model.W, is_pole=model.is_pole,
                             pole_distance=model.pole_distance)
    pt = a1_point(x)
    scale = max(1.0, np.max(np.abs(model.hessian(pt))))
    assert np.max(np.abs(numeric.grad_theta(pt) - model.grad_theta(pt))) < 1e-8 * scale
    assert np.max(np.abs(numeric.hessian(pt) - model.hessian(pt))) < 1e-6 * scale
    assert np.max(np.abs(numeric.third_theta(pt) - model.third_theta(pt))) < 1e-4 * max(
        1, np.max(np.abs(model.third_theta(pt))))
