"""Charts, Plebanski models, frames, hyperkähler tensors and two-forms.

Conventions
-----------
A point of the total space is written in coordinates ``x = (z_1..z_n,
theta_1..theta_n)`` and every matrix below is expressed in the ordered basis
``(dz_1..dz_n, dtheta_1..dtheta_n)``.

The symplectic form on the base is ``omega = 1/2 sum omega_pq dz_p ^ dz_q``
with a constant skew matrix ``omega``; ``eta`` is its inverse matrix.  Given a
generating function ``W(z, theta)`` the frames are::

    v_i = d/dtheta_i
    h_i = d/dz_i + sum_{p,q} eta_pq (d^2 W / dtheta_i dtheta_p) d/dtheta_q
    h_eps = h + eps^{-1} v

A two-form is stored through its evaluation matrix ``B`` with
``Omega(u, w) = u^T B w``.  ``B[a, b]`` is therefore the coefficient of
``dx_a ^ dx_b`` when the form is written with one term per unordered pair,
while the coefficients ``c`` of a double sum ``sum_{a,b} c_ab dx_a ^ dx_b``
are ``B / 2`` (see :meth:`TwoForm.double_sum_coefficients`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import numdiff
from .errors import (
    BothZero,
    NoPeriodStructure,
    PoleError,
    StepUnderflow,
    ZeroEpsilon,
)

INF = math.inf


def inverse_epsilon(eps) -> complex:
    """Return ``1/eps`` with ``eps = inf`` (or ``None``) mapped to 0."""
    if eps is None:
        return 0.0
    if isinstance(eps, (float, int)) and math.isinf(eps):
        return 0.0
    eps = complex(eps)
    if cmath_isinf(eps):
        return 0.0
    if eps == 0:
        raise ZeroEpsilon("epsilon must be nonzero")
    return 1.0 / eps


def cmath_isinf(value: complex) -> bool:
    return math.isinf(value.real) or math.isinf(value.imag)


def is_infinite(eps) -> bool:
    if eps is None:
        return True
    return cmath_isinf(complex(eps))


@dataclass(frozen=True)
class SymplecticData:
    """Constant symplectic matrix on the base and its inverse.

    Parameters
    ----------
    omega : ndarray
        Skew-symmetric ``n x n`` complex matrix.
    eta : ndarray, optional
        Inverse of ``omega``; computed when omitted.
    """

    omega: np.ndarray
    eta: np.ndarray = None

    def __post_init__(self):
        omega = np.array(self.omega, dtype=complex)
        if omega.ndim != 2 or omega.shape[0] != omega.shape[1]:
            raise ValueError("omega must be square")
        if not np.allclose(omega, -omega.T, atol=1e-14):
            raise ValueError("omega must be skew-symmetric")
        eta = np.linalg.inv(omega) if self.eta is None else np.array(self.eta, dtype=complex)
        if not np.allclose(omega @ eta, np.eye(len(omega)), atol=1e-12):
            raise ValueError("omega @ eta must be the identity")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "eta", eta)

    @property
    def n(self) -> int:
        return self.omega.shape[0]


@dataclass(frozen=True)
class TangentPoint:
    """A point ``(z, theta)`` of the total space."""

    z: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        z = np.atleast_1d(np.array(self.z, dtype=complex))
        th = np.atleast_1d(np.array(self.theta, dtype=complex))
        if z.shape != th.shape:
            raise ValueError("z and theta must have the same length")
        if not (np.all(np.isfinite(z)) and np.all(np.isfinite(th))):
            raise ValueError("coordinates must be finite")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "theta", th)

    @property
    def n(self) -> int:
        return self.z.size

    @property
    def x(self) -> np.ndarray:
        return np.concatenate([self.z, self.theta])

    @classmethod
    def from_x(cls, x) -> "TangentPoint":
        x = np.asarray(x, dtype=complex)
        n = x.size // 2
        return cls(x[:n], x[n:])


@dataclass(frozen=True)
class PlebanskiModel:
    """Chart-level description of a pre-Joyce structure.

    Parameters
    ----------
    sym : SymplecticData
        Constant symplectic data on the base.
    W : callable
        ``W(z, theta) -> complex``.
    dW_theta, d2W, d3W_theta : callable, optional
        Analytic derivative stack: the ``theta``-gradient (shape ``(n,)``),
        the full Hessian in ``(z, theta)`` (shape ``(2n, 2n)``) and the
        third ``theta``-derivatives (shape ``(n, n, n)``).  Missing entries
        fall back to central differences.
    is_pole : callable, optional
        Predicate on ``(z, theta)``.
    pole_distance : callable, optional
        Distance from ``(z, theta)`` to the polar divisor; used for the
        finite-difference guard.
    has_period_structure : bool
        Whether ``z`` are integral linear coordinates with Euler field
        ``sum z_i d/dz_i``.
    lattice_basis : ndarray, optional
        Basis of the lattice in the ``z`` chart (columns); ``None`` means the
        coordinate basis.
    normalized : bool
        Whether ``W`` and its ``theta``-gradient vanish on ``theta = 0``.
    fd_steps : tuple of float
        Spacings for first, second and third derivative fallbacks.
    """

    sym: SymplecticData
    W: Callable
    dW_theta: Optional[Callable] = None
    d2W: Optional[Callable] = None
    d3W_theta: Optional[Callable] = None
    is_pole: Optional[Callable] = None
    pole_distance: Optional[Callable] = None
    has_period_structure: bool = False
    lattice_basis: Optional[np.ndarray] = None
    normalized: bool = True
    name: str = "model"
    fd_steps: tuple = (1e-5, 1e-3, 3e-3)
    metadata: dict = field(default_factory=dict)

    # -- basic chart protocol -------------------------------------------------
    @property
    def n(self) -> int:
        return self.sym.n

    @property
    def state_dim(self) -> int:
        return 2 * self.n

    def point(self, x) -> TangentPoint:
        return TangentPoint.from_x(x)

    def coords(self, pt) -> np.ndarray:
        return pt.x if isinstance(pt, TangentPoint) else np.asarray(pt, dtype=complex)

    def independent(self, x) -> np.ndarray:
        return np.asarray(x, dtype=complex)

    def embed(self, y, reference=None) -> np.ndarray:
        return np.asarray(y, dtype=complex)

    def project(self, x) -> np.ndarray:
        return np.asarray(x, dtype=complex)

    def base(self, x) -> np.ndarray:
        return np.asarray(x, dtype=complex)[: self.n]

    def distance_to_pole(self, pt: TangentPoint) -> float:
        if self.pole_distance is not None:
            return float(self.pole_distance(pt.z, pt.theta))
        return math.inf

    def check(self, pt: TangentPoint) -> None:
        """Raise :class:`PoleError` if ``pt`` lies on the polar divisor."""
        if self.is_pole is not None and self.is_pole(pt.z, pt.theta):
            raise PoleError(f"{self.name}: point lies on the polar divisor")
        if self.pole_distance is not None and self.distance_to_pole(pt) == 0.0:
            raise PoleError(f"{self.name}: point lies on the polar divisor")

    def guard(self, x) -> None:
        self.check(TangentPoint.from_x(x))

    def safe_step(self, pt: TangentPoint, step: float, min_step: float = 1e-8) -> float:
        """Shrink ``step`` so the guard radius (10 steps) avoids the poles."""
        self.check(pt)
        scale = max(1.0, float(np.max(np.abs(pt.x))))
        d = self.distance_to_pole(pt)
        if 10.0 * step * scale < d:
            return step
        shrunk = d / (10.0 * scale)
        if shrunk < min_step:
            raise StepUnderflow(
                f"{self.name}: pole at distance {d:.3g} needs step {shrunk:.3g} < {min_step:g}"
            )
        return shrunk

    # -- derivative stack -----------------------------------------------------
    def w(self, pt: TangentPoint) -> complex:
        self.check(pt)
        return complex(self.W(pt.z, pt.theta))

    def _w_of_x(self, x):
        n = self.n
        return complex(self.W(x[:n], x[n:]))

    def grad_theta(self, pt: TangentPoint) -> np.ndarray:
        self.check(pt)
        if self.dW_theta is not None:
            return np.asarray(self.dW_theta(pt.z, pt.theta), dtype=complex)
        n = self.n
        f = lambda th: complex(self.W(pt.z, th))
        return numdiff.gradient(f, pt.theta, self.fd_steps[0])

    def hessian(self, pt: TangentPoint) -> np.ndarray:
        """All second partials of ``W`` in the ``(z, theta)`` ordering."""
        self.check(pt)
        if self.d2W is not None:
            return np.asarray(self.d2W(pt.z, pt.theta), dtype=complex)
        return numdiff.hessian(self._w_of_x, pt.x, self.fd_steps[0], self.fd_steps[1])

    def theta_hessian(self, pt: TangentPoint) -> np.ndarray:
        n = self.n
        if self.d2W is None and self.dW_theta is not None:
            self.check(pt)
            g = lambda th: np.asarray(self.dW_theta(pt.z, th), dtype=complex)
            H = numdiff.jacobian(g, pt.theta, self.fd_steps[1])
            return 0.5 * (H + H.T)
        return self.hessian(pt)[n:, n:]

    def third_theta(self, pt: TangentPoint) -> np.ndarray:
        self.check(pt)
        if self.d3W_theta is not None:
            return np.asarray(self.d3W_theta(pt.z, pt.theta), dtype=complex)
        g = lambda th: self.theta_hessian(TangentPoint(pt.z, th))
        return numdiff.jacobian(g, pt.theta, self.fd_steps[2])

    # -- frames ---------------------------------------------------------------
    def horizontal_theta_part(self, pt: TangentPoint) -> np.ndarray:
        """Matrix ``B`` with ``B[q, i]`` the ``theta_q`` component of ``h_i``."""
        A = self.theta_hessian(pt)
        return (A @ self.sym.eta).T

    def frame(self, x, eps) -> np.ndarray:
        """Columns of ``h_eps`` at coordinates ``x``.

        ``eps = inf`` gives ``h``; ``eps = 0`` gives the vertical frame ``v``
        (the foliation whose leaf space is the base).
        """
        pt = TangentPoint.from_x(x)
        n = self.n
        out = np.zeros((2 * n, n), dtype=complex)
        if eps is not None and not is_infinite(eps) and complex(eps) == 0:
            out[n:, :] = np.eye(n)
            return out
        out[:n, :] = np.eye(n)
        out[n:, :] = self.horizontal_theta_part(pt) + inverse_epsilon(eps) * np.eye(n)
        return out


@dataclass(frozen=True)
class FramePair:
    """Vertical, horizontal and pencil frames as ``2n x n`` column matrices."""

    v: np.ndarray
    h: np.ndarray
    h_eps: np.ndarray


@dataclass(frozen=True)
class TwoForm:
    """A two-form given by its skew evaluation matrix.

    ``mat[a, b] = Omega(d/dx_a, d/dx_b)`` in the ``(z, theta)`` ordering.
    """

    mat: np.ndarray

    def __post_init__(self):
        m = np.array(self.mat, dtype=complex)
        object.__setattr__(self, "mat", m)

    def __call__(self, u, w) -> complex:
        return complex(np.asarray(u) @ self.mat @ np.asarray(w))

    def component(self, a: int, b: int) -> complex:
        """Coefficient of ``dx_a ^ dx_b`` in the one-term-per-pair expansion."""
        return complex(self.mat[a, b])

    def double_sum_coefficients(self) -> np.ndarray:
        """Skew ``c`` with ``Omega = sum_{a,b} c_ab dx_a ^ dx_b``."""
        return 0.5 * self.mat

    def skew_defect(self) -> float:
        return float(np.max(np.abs(self.mat + self.mat.T)))

    def __add__(self, other: "TwoForm") -> "TwoForm":
        return TwoForm(self.mat + other.mat)

    def __rmul__(self, c) -> "TwoForm":
        return TwoForm(complex(c) * self.mat)


@dataclass(frozen=True)
class HKTensors:
    """Metric and complex structures in coordinates."""

    g: np.ndarray
    I: np.ndarray
    J: np.ndarray
    K: np.ndarray

    def quaternion_defect(self) -> float:
        """Largest entry of ``I^2 + 1``, ``J^2 + 1``, ``K^2 + 1``, ``IJK + 1``."""
        Id = np.eye(self.g.shape[0])
        mats = [
            self.I @ self.I + Id,
            self.J @ self.J + Id,
            self.K @ self.K + Id,
            self.I @ self.J @ self.K + Id,
        ]
        return float(max(np.max(np.abs(m)) for m in mats))

    def compatibility_defect(self) -> float:
        """Largest entry of ``R^T g R - g`` over ``R = I, J, K``."""
        return float(
            max(np.max(np.abs(R.T @ self.g @ R - self.g)) for R in (self.I, self.J, self.K))
        )


# -- operations ---------------------------------------------------------------
def frames(model: PlebanskiModel, pt: TangentPoint, eps) -> FramePair:
    """Vertical, horizontal and pencil frames at ``pt``.

    Raises
    ------
    PoleError
        If ``pt`` is a pole of the model.
    ZeroEpsilon
        If ``eps == 0``.
    """
    inv = inverse_epsilon(eps)
    model.check(pt)
    n = model.n
    v = np.zeros((2 * n, n), dtype=complex)
    v[n:, :] = np.eye(n)
    h = np.zeros((2 * n, n), dtype=complex)
    h[:n, :] = np.eye(n)
    h[n:, :] = model.horizontal_theta_part(pt)
    return FramePair(v=v, h=h, h_eps=h + inv * v)


def _wedge(B: np.ndarray, C: np.ndarray, rows: slice, cols: slice) -> None:
    # add sum_{p,q} C_pq dx_rows[p] ^ dx_cols[q] to the evaluation matrix B
    B[rows, cols] += C
    B[cols, rows] -= C.T


def two_forms(model: PlebanskiModel, pt: TangentPoint):
    """The three two-forms from their coordinate expressions.

    Returns
    -------
    (TwoForm, TwoForm, TwoForm)
        ``Omega_+``, ``Omega_I`` and ``Omega_-``.  Note that ``Omega_I`` is
        returned as is; the coordinate expression naturally produces
        ``2i Omega_I`` and is divided by ``2i`` here.
    """
    model.check(pt)
    n = model.n
    om, eta = model.sym.omega, model.sym.eta
    A = model.theta_hessian(pt)  # A[i, p] = dW_i / dtheta_p
    Z, T = slice(0, n), slice(n, 2 * n)

    plus = np.zeros((2 * n, 2 * n), dtype=complex)
    _wedge(plus, 0.5 * om, Z, Z)

    two_i = np.zeros((2 * n, 2 * n), dtype=complex)
    _wedge(two_i, 0.5 * (A - A.T), Z, Z)
    _wedge(two_i, -om, T, Z)

    minus = np.zeros((2 * n, 2 * n), dtype=complex)
    _wedge(minus, 0.5 * om, T, T)
    _wedge(minus, A.T, T, Z)
    _wedge(minus, -0.5 * (A @ eta @ A.T), Z, Z)

    return TwoForm(plus), TwoForm(two_i / 2j), TwoForm(minus)


def hk_tensors(model: PlebanskiModel, pt: TangentPoint) -> HKTensors:
    """Metric ``g`` and operators ``I, J, K`` in coordinates.

    The tensors are defined on the frame ``(h_1..h_n, v_1..v_n)`` by

    ``I h = i h``, ``J h = -v``, ``K h = i v``, ``I v = -i v``, ``J v = h``,
    ``K v = i h`` and ``g(h(u1), v(u2)) = omega(u1, u2) / 2`` with ``g``
    vanishing on pairs of horizontal or pairs of vertical vectors, then
    transported to coordinates through the (unipotent) frame matrix.
    """
    fr = frames(model, pt, INF)
    n = model.n
    P = np.hstack([fr.h, fr.v])
    Pinv = np.eye(2 * n, dtype=complex)
    Pinv[n:, :n] = -fr.h[n:, :]
    Id, O = np.eye(n), np.zeros((n, n))
    I_f = np.block([[1j * Id, O], [O, -1j * Id]])
    J_f = np.block([[O, Id], [-Id, O]])
    K_f = np.block([[O, 1j * Id], [1j * Id, O]])
    om = model.sym.omega
    G_f = np.block([[O, 0.5 * om], [0.5 * om.T, O]])
    conj = lambda M: P @ M @ Pinv
    g = Pinv.T @ G_f @ Pinv
    return HKTensors(g=0.5 * (g + g.T), I=conj(I_f), J=conj(J_f), K=conj(K_f))


def forms_from_metric(hk: HKTensors):
    """``Omega_I = g(I., .)`` and ``Omega_+- = g((J +- iK)., .)``."""
    g = hk.g
    om_i = hk.I.T @ g
    plus = (hk.J + 1j * hk.K).T @ g
    minus = (hk.J - 1j * hk.K).T @ g
    return TwoForm(plus), TwoForm(om_i), TwoForm(minus)


def form_pencil(model: PlebanskiModel, pt: TangentPoint, eps0, eps1) -> TwoForm:
    """``eps0^2 Omega_+ + 2i eps0 eps1 Omega_I + eps1^2 Omega_-``.

    Its kernel is spanned by ``eps0 v + eps1 h``, i.e. by the columns of
    ``h_eps`` with ``eps = eps1 / eps0``.
    """
    eps0, eps1 = complex(eps0), complex(eps1)
    if eps0 == 0 and eps1 == 0:
        raise BothZero("(eps0, eps1) must not both vanish")
    plus, om_i, minus = two_forms(model, pt)
    return TwoForm(eps0**2 * plus.mat + 2j * eps0 * eps1 * om_i.mat + eps1**2 * minus.mat)


def euler_fields(model: PlebanskiModel, pt: TangentPoint):
    """Euler field ``Z = sum z_i d/dz_i`` on the base and its vertical-free lift ``E``."""
    if not model.has_period_structure:
        raise NoPeriodStructure(f"{model.name} declares no period structure")
    Z = pt.z.copy()
    E = np.concatenate([pt.z, np.zeros(pt.n, dtype=complex)])
    return Z, E
