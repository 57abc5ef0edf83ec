"""Worked examples, the Joyce function and the linear Joyce data.

Two explicit structures are provided:

* the doubled A1 structure on ``C* x C`` with ``W = -theta^3 / (6 (2 pi i)^2 z)``;
* the A2 structure over ``{4a^3 + 27b^2 != 0}``, described in the chart
  ``(a, b, q, r)`` with ``p`` carried as a dependent coordinate on the curve
  ``p^2 = q^3 + a q + b``.

A2 states are stored as vectors ``(a, b, q, p, r)``; the independent
coordinates are ``(a, b, q, r)`` and ``p`` is re-projected onto the branch of
the square root nearest to its previous value.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import numdiff
from .elliptic import (
    Curve,
    PeriodData,
    complete_periods,
    continued_periods,
    raw_theta,
)
from .errors import (
    DegenerateBase,
    NoPeriodStructure,
    PoleAtPZero,
    PoleError,
    PoleOnZeroSection,
    StepUnderflow,
    ZeroZ,
)
from .tensorcore import (
    PlebanskiModel,
    SymplecticData,
    TangentPoint,
    inverse_epsilon,
    is_infinite,
)

TWO_PI_I = 2j * math.pi


# -- simple models ---------------------------------------------------------------
def standard_omega(n: int) -> np.ndarray:
    """Block-diagonal ``[[0, 1], [-1, 0]]`` symplectic matrix of size ``n``."""
    if n % 2:
        raise ValueError("n must be even")
    om = np.zeros((n, n), dtype=complex)
    for k in range(0, n, 2):
        om[k, k + 1], om[k + 1, k] = 1.0, -1.0
    return om


def flat_model(n: int = 2, omega=None) -> PlebanskiModel:
    """``W = 0``: the flat structure ``h_i = d/dz_i``."""
    om = standard_omega(n) if omega is None else np.asarray(omega, dtype=complex)
    zero = lambda z, th: 0j
    return PlebanskiModel(
        sym=SymplecticData(om),
        W=zero,
        dW_theta=lambda z, th: np.zeros(n, dtype=complex),
        d2W=lambda z, th: np.zeros((2 * n, 2 * n), dtype=complex),
        d3W_theta=lambda z, th: np.zeros((n, n, n), dtype=complex),
        has_period_structure=True,
        name="flat",
    )


def synthetic_bilinear_model() -> PlebanskiModel:
    """``W = theta_1 theta_2`` with ``omega_12 = 1`` (not a solution of the heavenly equations)."""

    def d2(z, th):
        H = np.zeros((4, 4), dtype=complex)
        H[2, 3] = H[3, 2] = 1.0
        return H

    return PlebanskiModel(
        sym=SymplecticData(standard_omega(2)),
        W=lambda z, th: complex(th[0] * th[1]),
        dW_theta=lambda z, th: np.array([th[1], th[0]], dtype=complex),
        d2W=d2,
        d3W_theta=lambda z, th: np.zeros((2, 2, 2), dtype=complex),
        has_period_structure=True,
        name="synthetic-bilinear",
    )


def synthetic_counterexample_model() -> PlebanskiModel:
    """``W = theta_1^3 theta_2 / 6`` with ``omega_12 = 1``.

    The heavenly residual is ``-theta_1^4 / 4`` in entry ``(1, 2)``, so the
    pencil is not flat away from ``theta_1 = 0``.
    """

    def d2(z, th):
        t1, t2 = th
        H = np.zeros((4, 4), dtype=complex)
        H[2, 2] = t1 * t2
        H[2, 3] = H[3, 2] = t1 * t1 / 2
        return H

    def d3(z, th):
        t1, t2 = th
        T = np.zeros((2, 2, 2), dtype=complex)
        T[0, 0, 0] = t2
        T[0, 0, 1] = T[0, 1, 0] = T[1, 0, 0] = t1
        return T

    return PlebanskiModel(
        sym=SymplecticData(standard_omega(2)),
        W=lambda z, th: complex(th[0] ** 3 * th[1] / 6),
        dW_theta=lambda z, th: np.array([th[0] ** 2 * th[1] / 2, th[0] ** 3 / 6], dtype=complex),
        d2W=d2,
        d3W_theta=d3,
        has_period_structure=True,
        name="synthetic-counterexample",
    )


# -- doubled A1 ----------------------------------------------------------------------
A1_LOG_BRANCH = "principal Log(z / 2 pi i), cut along z / 2 pi i in (-inf, 0]"
_A1_K = -1.0 / (6.0 * TWO_PI_I**2)


def a1_model() -> PlebanskiModel:
    """The doubled A1 structure in coordinates ``(z, z_dual, theta, theta_dual)``.

    ``omega = (2 pi i)^{-1} dz ^ dz_dual`` and ``W = -theta^3 / (6 (2 pi i)^2 z)``
    with a simple pole along ``z = 0``.
    """
    c = 1.0 / TWO_PI_I
    om = np.array([[0, c], [-c, 0]], dtype=complex)

    def W(z, th):
        return complex(_A1_K * th[0] ** 3 / z[0])

    def dW(z, th):
        return np.array([3 * _A1_K * th[0] ** 2 / z[0], 0.0], dtype=complex)

    def d2(z, th):
        z0, t0 = z[0], th[0]
        H = np.zeros((4, 4), dtype=complex)
        H[0, 0] = 2 * _A1_K * t0**3 / z0**3
        H[0, 2] = H[2, 0] = -3 * _A1_K * t0**2 / z0**2
        H[2, 2] = 6 * _A1_K * t0 / z0
        return H

    def d3(z, th):
        T = np.zeros((2, 2, 2), dtype=complex)
        T[0, 0, 0] = 6 * _A1_K / z[0]
        return T

    return PlebanskiModel(
        sym=SymplecticData(om),
        W=W,
        dW_theta=dW,
        d2W=d2,
        d3W_theta=d3,
        is_pole=lambda z, th: z[0] == 0,
        pole_distance=lambda z, th: abs(z[0]),
        has_period_structure=True,
        name="a1",
    )


@dataclass(frozen=True)
class A1Point:
    """A point ``(z, z_dual, theta, theta_dual)`` of the A1 total space."""

    z: complex
    zv: complex
    theta: complex
    thetav: complex

    def __post_init__(self):
        for name in ("z", "zv", "theta", "thetav"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        if self.z == 0:
            raise ZeroZ("z must be nonzero")

    def tangent_point(self) -> TangentPoint:
        return TangentPoint([self.z, self.zv], [self.theta, self.thetav])


@dataclass(frozen=True)
class A1Record:
    W: complex
    U: complex
    F_prepotential: complex
    phi: complex
    phiv: complex
    log_branch: str = A1_LOG_BRANCH


def a1_log(z) -> complex:
    """``Log(z / 2 pi i)`` on the principal branch."""
    z = complex(z)
    if z == 0:
        raise ZeroZ("z must be nonzero")
    return cmath.log(z / TWO_PI_I)


def a1_phi(pt: A1Point):
    """Flat fibre coordinates ``(phi, phi_dual)`` of the connection ``h``."""
    return pt.theta, pt.thetav - pt.theta / TWO_PI_I * a1_log(pt.z)


def a1_u(z, zv, phi, phiv) -> complex:
    """First Plebanski function in mixed coordinates ``(z, z_dual, phi, phi_dual)``."""
    L = a1_log(z)
    return (zv * phi - phiv * z + phi * z / TWO_PI_I - phi * z / TWO_PI_I * L) / TWO_PI_I


def a1_prepotential(z, zv) -> complex:
    L = a1_log(z)
    return z * zv / TWO_PI_I - (0.5 * z * z * L - 0.75 * z * z) / TWO_PI_I**2


def a1_evaluate(pt: A1Point) -> A1Record:
    """``W``, ``U``, the prepotential and ``(phi, phi_dual)`` at ``pt``."""
    phi, phiv = a1_phi(pt)
    return A1Record(
        W=complex(_A1_K * pt.theta**3 / pt.z),
        U=a1_u(pt.z, pt.zv, phi, phiv),
        F_prepotential=a1_prepotential(pt.z, pt.zv),
        phi=phi,
        phiv=phiv,
    )


def a1_first_jacobian(pt: A1Point) -> np.ndarray:
    """Mixed second derivatives ``d^2 U / d(z, z_dual) d(phi, phi_dual)``.

    Row index runs over ``(z, z_dual)`` and column index over
    ``(phi, phi_dual)``.
    """
    L = a1_log(pt.z)
    return np.array(
        [[-L / TWO_PI_I**2, -1.0 / TWO_PI_I], [1.0 / TWO_PI_I, 0.0]], dtype=complex
    )


def a1_first_determinant(pt: A1Point) -> complex:
    """``U_{z phi} U_{zv phiv} - U_{zv phi} U_{z phiv}``."""
    J = a1_first_jacobian(pt)
    return complex(J[0, 0] * J[1, 1] - J[1, 0] * J[0, 1])


# -- Joyce function and linear Joyce data ----------------------------------------------
@dataclass(frozen=True)
class JoyceLinearData:
    """Linear Joyce connection coefficients and Joyce metric on the base.

    ``connection_coeffs[i, j, m]`` is the coefficient of ``d/dz_m`` in
    ``nabla_{d/dz_i} d/dz_j``.
    """

    connection_coeffs: np.ndarray
    metric: np.ndarray
    details: dict = field(default_factory=dict)


def joyce_function(model: PlebanskiModel, pt: TangentPoint) -> complex:
    """``F = sum_q z_q dW/dtheta_q``."""
    if not model.has_period_structure:
        raise NoPeriodStructure(f"{model.name} declares no period structure")
    return complex(np.dot(pt.z, model.grad_theta(pt)))


def linear_joyce_data(model: PlebanskiModel, base_z) -> JoyceLinearData:
    """Linear Joyce connection and metric from third ``theta``-derivatives at ``theta = 0``.

    Raises
    ------
    PoleOnZeroSection
        If the zero section over ``base_z`` lies in the polar locus.
    """
    if not model.has_period_structure:
        raise NoPeriodStructure(f"{model.name} declares no period structure")
    z = np.asarray(base_z, dtype=complex)
    pt0 = TangentPoint(z, np.zeros_like(z))
    try:
        T = model.third_theta(pt0)
    except PoleError as exc:
        raise PoleOnZeroSection(str(exc)) from exc
    eta = model.sym.eta
    conn = -np.einsum("ijl,lm->ijm", T, eta)
    metric = np.einsum("q,qij->ij", z, T)
    return JoyceLinearData(conn, 0.5 * (metric + metric.T))


# -- A2 ---------------------------------------------------------------------------
A2_OMEGA_AB = np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex)  # omega = da ^ db
A2_ETA_AB = np.linalg.inv(A2_OMEGA_AB)
A2_EULER_WEIGHTS = np.array([4 / 5, 6 / 5, 2 / 5, 3 / 5, 1 / 5])  # (a, b, q, p, r)


def _check_base(a, b, tol=1e-12):
    if abs(4 * a**3 + 27 * b**2) <= tol * max(1.0, abs(a) ** 3, abs(b) ** 2):
        raise DegenerateBase(f"(a, b) = ({a}, {b}) lies on the discriminant")


def _check_p(p, tol=1e-12):
    if abs(p) <= tol:
        raise PoleAtPZero("p = 0")


def _branch(value: complex, reference: complex) -> complex:
    s = cmath.sqrt(value)
    return s if abs(s - reference) <= abs(s + reference) else -s


@dataclass(frozen=True)
class A2State:
    """A point ``(a, b, q, p, r)`` with ``p^2 = q^3 + a q + b``."""

    a: complex
    b: complex
    q: complex
    p: complex
    r: complex

    def __post_init__(self):
        for name in ("a", "b", "q", "p", "r"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        res = abs(self.p**2 - (self.q**3 + self.a * self.q + self.b))
        if res > 1e-10 * max(1.0, abs(self.p) ** 2):
            raise ValueError(f"off-curve state: residual {res:.3g}")

    @classmethod
    def from_qr(cls, a, b, q, r, branch=None) -> "A2State":
        """State with ``p`` the square root closest to ``branch`` (principal if omitted)."""
        val = complex(q) ** 3 + complex(a) * complex(q) + complex(b)
        p = cmath.sqrt(val) if branch is None else _branch(val, complex(branch))
        return cls(a, b, q, p, r)

    @classmethod
    def from_vector(cls, x) -> "A2State":
        return cls(*[complex(v) for v in x])

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.a, self.b, self.q, self.p, self.r], dtype=complex)

    @property
    def curve(self) -> Curve:
        return Curve(self.a, self.b)

    @property
    def discriminant(self) -> complex:
        return 4 * self.a**3 + 27 * self.b**2


def _coerce(state) -> A2State:
    return state if isinstance(state, A2State) else A2State.from_vector(state)


def _validate(state: A2State) -> None:
    _check_base(state.a, state.b)
    _check_p(state.p)


def a2_p_rate(state: A2State, tangent) -> complex:
    """Rate of change of ``p`` along a tangent ``(da, db, dq, dr)``."""
    a, b, q, p = state.a, state.b, state.q, state.p
    da, db, dq = tangent[0], tangent[1], tangent[2]
    return ((3 * q * q + a) * dq + q * da + db) / (2 * p)


def a2_flows(state, eps) -> tuple:
    """``h_eps(d/da)`` and ``h_eps(d/db)`` in the ``(a, b, q, r)`` chart.

    ``eps = inf`` (or ``None``) drops the ``1/eps`` terms.

    Raises
    ------
    PoleAtPZero, DegenerateBase
    """
    s = _coerce(state)
    _validate(s)
    ie = inverse_epsilon(eps)
    a, q, p, r = s.a, s.q, s.p, s.r
    ha = np.array(
        [1.0, 0.0, -2 * p * ie - r / p, -q * ie - (r * r * (3 * q * q + a) - q * p * r) / (2 * p**3)],
        dtype=complex,
    )
    hb = np.array([0.0, 1.0, 0.0, -ie + r / (2 * p * p)], dtype=complex)
    return ha, hb


def a2_vertical(state) -> tuple:
    """Vertical fields ``d/dtheta_a = -2p d/dq - q d/dr`` and ``d/dtheta_b = -d/dr``."""
    s = _coerce(state)
    _check_p(s.p)
    return (
        np.array([0, 0, -2 * s.p, -s.q], dtype=complex),
        np.array([0, 0, 0, -1.0], dtype=complex),
    )


def a2_phi(state) -> tuple:
    """``(phi_1, phi_2) = (q + a r / p, r / (2p))``, constant along the ``eps = inf`` flows."""
    s = _coerce(state)
    _check_p(s.p)
    return s.q + s.a * s.r / s.p, s.r / (2 * s.p)


def a2_joyce_F(state) -> complex:
    """``F = (1 - 2 phi_1 phi_2) / 5``."""
    f1, f2 = a2_phi(state)
    return (1 - 2 * f1 * f2) / 5


def a2_plebanski_W(state) -> complex:
    """Rational generating function in ``(a, b, q, p, r)`` (not normalized on ``theta = 0``)."""
    s = _coerce(state)
    _validate(s)
    a, b, q, p, r = s.a, s.b, s.q, s.p, s.r
    num = (
        2 * a * p * r**3
        - (6 * a * q * q - 9 * b * q + 4 * a * a) * r * r
        - 3 * p * (3 * b - 2 * a * q) * r
        - 2 * a * p * p
    )
    return num / (4 * s.discriminant * p)


def a2_euler(state) -> np.ndarray:
    """Euler field ``(4a/5, 6b/5, 2q/5, r/5)`` in the ``(a, b, q, r)`` chart."""
    s = _coerce(state)
    return np.array([4 * s.a / 5, 6 * s.b / 5, 2 * s.q / 5, s.r / 5], dtype=complex)


def a2_scale(state, lam) -> A2State:
    """Image of ``state`` under the weighted scaling with factor ``lam``.

    Fractional powers use the principal branch of ``log(lam)``.
    """
    s = _coerce(state)
    lg = cmath.log(complex(lam))
    f = [cmath.exp(w * lg) for w in A2_EULER_WEIGHTS]
    return A2State(s.a * f[0], s.b * f[1], s.q * f[2], s.p * f[3], s.r * f[4])


class A2Chart:
    """Chart protocol for the A2 structure on states ``(a, b, q, p, r)``.

    Frames are returned as ``5 x 2`` column matrices including the rate of
    ``p``; :meth:`independent` drops the ``p`` row.
    """

    n = 2
    state_dim = 5
    name = "a2"
    sym = SymplecticData(A2_OMEGA_AB)
    has_period_structure = False

    def coords(self, state) -> np.ndarray:
        return _coerce(state).vector

    def point(self, x) -> A2State:
        return A2State.from_vector(x)

    @staticmethod
    def independent(x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        return x[[0, 1, 2, 4], ...]

    @staticmethod
    def embed(y, reference) -> np.ndarray:
        a, b, q, r = [complex(v) for v in y]
        p = _branch(q**3 + a * q + b, complex(reference[3]))
        return np.array([a, b, q, p, r], dtype=complex)

    def project(self, x) -> np.ndarray:
        return self.embed(self.independent(x), x)

    @staticmethod
    def base(x) -> np.ndarray:
        return np.asarray(x, dtype=complex)[:2]

    def check(self, x) -> None:
        x = np.asarray(x, dtype=complex)
        _check_base(x[0], x[1])
        _check_p(x[3])

    guard = check

    def distance_to_pole(self, x) -> float:
        x = np.asarray(x, dtype=complex)
        roots = np.roots([1.0, 0.0, x[0], x[1]])
        return float(np.min(np.abs(roots - x[2])))

    def scale(self, x) -> float:
        return max(1.0, float(np.max(np.abs(self.independent(x)))))

    def frame(self, x, eps) -> np.ndarray:
        s = A2State.from_vector(self.project(x))
        if eps is not None and not is_infinite(eps) and complex(eps) == 0:
            cols = a2_vertical(s)
        else:
            cols = a2_flows(s, eps)
        out = np.zeros((5, 2), dtype=complex)
        for k, c in enumerate(cols):
            out[[0, 1, 2, 4], k] = c
            out[3, k] = a2_p_rate(s, c)
        return out

    def two_i_omega_I(self, x) -> np.ndarray:
        """``2i Omega_I`` in the ``(a, b, q, r)`` chart."""
        return a2_forms(A2State.from_vector(self.project(x)))[0]

    def omega_minus(self, x) -> np.ndarray:
        return a2_forms(A2State.from_vector(self.project(x)))[1]


A2_CHART = A2Chart()


def a2_frame_matrix(state) -> np.ndarray:
    """Columns ``(h_a, h_b, v_a, v_b)`` in the ``(a, b, q, r)`` chart."""
    ha, hb = a2_flows(state, math.inf)
    va, vb = a2_vertical(state)
    return np.stack([ha, hb, va, vb], axis=1)


def a2_forms(state):
    """``2i Omega_I`` and ``Omega_-`` as evaluation matrices in the ``(a, b, q, r)`` chart.

    Both are obtained from their values on the frame ``(h, v)``:
    ``Omega_-`` vanishes on ``h`` with ``Omega_-(v_i, v_j) = omega_ij``, and
    ``2i Omega_I(h_i, v_j) = 2i Omega_I(v_i, h_j) = -omega_ij``.
    """
    P = a2_frame_matrix(state)
    Pinv = np.linalg.inv(P)
    om = A2_OMEGA_AB
    O = np.zeros((2, 2))
    minus_f = np.block([[O, O], [O, om]])
    two_i_f = np.block([[O, -om], [-om, O]])
    return Pinv.T @ two_i_f @ Pinv, Pinv.T @ minus_f @ Pinv


def a2_darboux_form(state) -> np.ndarray:
    """Evaluation matrix of ``dq ^ dp + da ^ dr`` in the ``(a, b, q, r)`` chart."""
    s = _coerce(state)
    dq = np.array([0, 0, 1, 0], dtype=complex)
    dp = np.array([s.q, 1.0, 3 * s.q**2 + s.a, 0]) / (2 * s.p)
    da = np.array([1, 0, 0, 0], dtype=complex)
    dr = np.array([0, 0, 0, 1], dtype=complex)
    return np.outer(dq, dp) - np.outer(dp, dq) + np.outer(da, dr) - np.outer(dr, da)


def _chart_function(func, state):
    ref = _coerce(state).vector
    return lambda y: func(A2State.from_vector(A2_CHART.embed(y, ref)))


def a2_joyce_residual(state, step: float = 1e-4) -> float:
    """``max |dF + i_E Omega_-|`` with ``dF`` by finite differences in ``(a, b, q, r)``."""
    s = _coerce(state)
    y = A2_CHART.independent(s.vector)
    dF = numdiff.gradient(_chart_function(a2_joyce_F, s), y, step)
    _, minus = a2_forms(s)
    iE = a2_euler(s) @ minus
    return float(np.max(np.abs(dF + iE)))


def _vertical_derivative(func, ref, index, step):
    # y -> derivative of func along the vertical field d/dtheta_index
    def g(y):
        v = a2_vertical(A2State.from_vector(A2_CHART.embed(y, ref)))[index]
        f = lambda yy: func(A2State.from_vector(A2_CHART.embed(yy, ref)))
        return numdiff.directional_derivative(f, y, v, step, richardson=False)

    return g


def a2_fibre_hessian(func, state, step: Optional[float] = None) -> np.ndarray:
    """Second derivatives ``d^2 f / dtheta_i dtheta_j`` along the commuting vertical fields."""
    s = _coerce(state)
    ref = s.vector
    y = A2_CHART.independent(ref)
    if step is None:
        step = 1e-3 * min(1.0, abs(s.q / s.p)) if s.q != 0 else 1e-3
    H = np.zeros((2, 2), dtype=complex)
    for j in range(2):
        g = _vertical_derivative(func, ref, j, step)
        for i in range(2):
            v = a2_vertical(s)[i]
            H[i, j] = numdiff.directional_derivative(g, y, v, step, richardson=False)
    return 0.5 * (H + H.T)


def _nearest_root(a, b, target) -> complex:
    roots = np.roots([1.0, 0.0, a, b])
    return complex(roots[int(np.argmin(np.abs(roots - target)))])


def a2_theta_ab(state, base_point) -> np.ndarray:
    """``(theta_a, theta_b)`` with the path through the root nearest ``base_point``."""
    s = _coerce(state)
    e = _nearest_root(s.a, s.b, base_point)
    return raw_theta(s.curve, s.q, s.p, s.r, e)


def a2_flow_hessian(state, base_point=None, step: float = 1e-3) -> np.ndarray:
    """``theta``-Hessian of the generating function in the ``(a, b)`` chart, read off the flows.

    The ``theta``-components of ``h(d/da)`` and ``h(d/db)`` are
    ``M = A eta`` with ``A`` the Hessian, so ``A = M eta^{-1}``.  The
    ``theta``-Jacobian uses the closed-form ``q``- and ``r``-partials
    ``d theta_a/dq = -1/(2p)``, ``d theta_b/dq = q/(2p)``,
    ``d theta_b/dr = -1`` and finite differences in ``(a, b)``.
    """
    s = _coerce(state)
    _validate(s)
    e0 = _nearest_root(s.a, s.b, s.q) if base_point is None else complex(base_point)
    ref = s.vector
    y = A2_CHART.independent(ref)

    def th(yy):
        return a2_theta_ab(A2State.from_vector(A2_CHART.embed(yy, ref)), e0)

    hab = step * max(1.0, abs(s.a), abs(s.b))
    cols = []
    for k in range(2):
        v = np.zeros(4, dtype=complex)
        v[k] = 1.0
        cols.append(numdiff.directional_derivative(th, y, v, hab))
    D = np.zeros((2, 4), dtype=complex)
    D[:, 0], D[:, 1] = cols
    D[:, 2] = [-1 / (2 * s.p), s.q / (2 * s.p)]
    D[:, 3] = [0.0, -1.0]
    ha, hb = a2_flows(s, math.inf)
    M = np.stack([D @ ha, D @ hb])
    return M @ np.linalg.inv(A2_ETA_AB)


def a2_flow_third(state, base_point=None, step: Optional[float] = None) -> np.ndarray:
    """Third ``theta``-derivatives ``T[i, j, l] = d/dtheta_l A_ij`` of the flow Hessian."""
    s = _coerce(state)
    e0 = _nearest_root(s.a, s.b, s.q) if base_point is None else complex(base_point)
    ref = s.vector
    y = A2_CHART.independent(ref)
    if step is None:
        step = 1e-2 * min(1.0, abs(s.q / s.p))
    A = lambda yy: a2_flow_hessian(A2State.from_vector(A2_CHART.embed(yy, ref)), e0)
    T = np.zeros((2, 2, 2), dtype=complex)
    for l, v in enumerate(a2_vertical(s)):
        T[:, :, l] = numdiff.directional_derivative(A, y, v, step, richardson=False)
    return T


def extrapolate_inverse(qs, values) -> np.ndarray:
    """Constant term of the polynomial in ``1/q`` interpolating ``values``."""
    qs = np.asarray(qs, dtype=float)
    vals = np.asarray(values)
    V = np.vander(1.0 / qs, len(qs), increasing=True)
    flat = vals.reshape(len(qs), -1)
    coeffs = np.linalg.solve(V, flat)
    return coeffs[0].reshape(vals.shape[1:])


def a2_zero_section_samples(a, b, qs=(40.0, 80.0, 160.0, 320.0), direction: complex = 1.0):
    """States with ``r = 0`` and ``q = t * direction`` for large ``t``.

    Along ``r = 0`` with ``q`` growing the point tends to the zero section
    (``theta_a, theta_b -> 0``).
    """
    out = []
    for t in qs:
        q = complex(t) * complex(direction)
        out.append(A2State.from_qr(a, b, q, 0.0, branch=cmath.sqrt(q) ** 3))
    return out


def a2_linear_joyce_data(a, b, qs=(40.0, 80.0, 160.0, 320.0), direction: complex = 1.0) -> JoyceLinearData:
    """Linear Joyce connection and metric in the ``(a, b)`` chart via the zero-section limit.

    The metric is the fibre Hessian of ``F``; the connection coefficients are
    ``-sum_l eta_lm T_ijl`` with ``T`` the third derivatives of the flow
    Hessian.  Both are evaluated along :func:`a2_zero_section_samples` and
    extrapolated polynomially in ``1/q``.
    """
    _check_base(complex(a), complex(b))
    states = a2_zero_section_samples(a, b, qs, direction)
    metrics = np.array([a2_fibre_hessian(a2_joyce_F, s) for s in states])
    thirds = np.array([a2_flow_third(s) for s in states])
    conns = -np.einsum("kijl,lm->kijm", thirds, A2_ETA_AB)
    metric = extrapolate_inverse(qs, metrics)
    conn = extrapolate_inverse(qs, conns)
    return JoyceLinearData(
        connection_coeffs=conn,
        metric=0.5 * (metric + metric.T),
        details={"qs": list(qs), "metric_samples": metrics, "connection_samples": conns},
    )


# -- A2 in the period chart -------------------------------------------------------------
class A2PeriodMap:
    """Chart change ``(a, b, q, r) -> (z_1, z_2, theta_1, theta_2)`` near a reference state.

    Periods are continued from the reference curve and the Abel path goes
    through the root tracked from the one nearest the reference ``q``;
    ``theta_i`` are the unreduced lattice-chart values.
    """

    def __init__(self, state):
        self.reference = _coerce(state)
        _validate(self.reference)
        self.ref_periods: PeriodData = complete_periods(self.reference.curve)
        self.ref_base = _nearest_root(self.reference.a, self.reference.b, self.reference.q)

    def periods(self, state) -> PeriodData:
        s = _coerce(state)
        if s.a == self.reference.a and s.b == self.reference.b:
            return self.ref_periods
        return continued_periods(s.curve, self.ref_periods)

    def forward(self, state) -> np.ndarray:
        s = _coerce(state)
        pd = self.periods(s)
        th = a2_theta_ab(s, self.ref_base)
        lift = -pd.eta * th[0] + pd.omega * th[1]
        return np.concatenate([pd.z, lift])

    def forward_independent(self, y, reference=None) -> np.ndarray:
        ref = self.reference.vector if reference is None else reference
        return self.forward(A2_CHART.embed(y, ref))

    def jacobian(self, state, step: float = 1e-5) -> np.ndarray:
        """``d(z, theta) / d(a, b, q, r)`` by finite differences."""
        s = _coerce(state)
        y = A2_CHART.independent(s.vector)
        f = lambda yy: self.forward_independent(yy, s.vector)
        return numdiff.jacobian(f, y, step, richardson=False)

    def inverse(self, target, guess=None, steps: int = 4, tol: float = 1e-13,
                max_iter: int = 30) -> A2State:
        """State mapping to ``target = (z_1, z_2, theta_1, theta_2)`` by continuation and Newton."""
        s = self.reference if guess is None else _coerce(guess)
        target = np.asarray(target, dtype=complex)
        start = self.forward(s)
        x = s.vector
        for k in range(1, steps + 1):
            goal = start + (target - start) * k / steps
            for _ in range(max_iter):
                res = self.forward(x) - goal
                if np.max(np.abs(res)) <= tol * max(1.0, float(np.max(np.abs(goal)))):
                    break
                J = self.jacobian(x, 1e-6)
                dy = np.linalg.solve(J, -res)
                x = A2_CHART.embed(A2_CHART.independent(x) + dy, x)
            else:
                raise StepUnderflow("Newton iteration for the chart inverse did not converge")
        return A2State.from_vector(x)


def a2_euler_pushforward_residual(state) -> float:
    """Relative mismatch between the chart image of ``E`` and ``sum z_i d/dz_i``."""
    s = _coerce(state)
    chart = A2PeriodMap(s)
    J = chart.jacobian(s)
    image = J @ a2_euler(s)
    pd = chart.ref_periods
    expected = np.concatenate([pd.z, np.zeros(2)])
    return float(np.max(np.abs(image - expected)) / max(1.0, float(np.max(np.abs(pd.z)))))


def a2_period_model(state) -> PlebanskiModel:
    """The A2 structure as a model in the period chart around ``state``.

    ``W(z, theta)`` evaluates the rational generating function at the
    state found by inverting :class:`A2PeriodMap`; derivatives fall back to
    finite differences.  ``omega = -(2 pi i)^{-1} dz_1 ^ dz_2``.
    """
    chart = A2PeriodMap(state)
    c = -1.0 / TWO_PI_I
    om = np.array([[0, c], [-c, 0]], dtype=complex)

    def W(z, th):
        target = np.concatenate([np.asarray(z, dtype=complex), np.asarray(th, dtype=complex)])
        return a2_plebanski_W(chart.inverse(target))

    return PlebanskiModel(
        sym=SymplecticData(om),
        W=W,
        has_period_structure=True,
        normalized=False,
        name="a2-period-chart",
        metadata={"reference": chart.reference, "chart": chart},
    )
