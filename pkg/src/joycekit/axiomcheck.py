"""Residuals of the structural identities: flatness, heavenly equations,
symmetries, closedness of the two-forms, lattice integrality and parallelism.

Most functions accept either a :class:`~joycekit.tensorcore.PlebanskiModel`
with a :class:`~joycekit.tensorcore.TangentPoint`, or a chart object such as
:class:`~joycekit.models.A2Chart` with a coordinate vector.  A chart exposes
``coords``, ``independent``, ``embed``, ``frame``, ``check`` and
``distance_to_pole``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
from scipy.stats import qmc

from . import numdiff
from .errors import NoPeriodStructure, PoleError, SingularMetric, StepUnderflow
from .tensorcore import (
    PlebanskiModel,
    TangentPoint,
    form_pencil,
    hk_tensors,
    inverse_epsilon,
    two_forms,
)

TWO_PI_I = 2j * math.pi


@dataclass(frozen=True)
class ResidualReport:
    """Outcome of one residual check (``passed`` iff ``max_abs <= tolerance_used``)."""

    name: str
    max_abs: float
    location: object
    samples: int
    tolerance_used: float
    passed: bool
    anchor: str = ""
    expect_fail: bool = False

    @classmethod
    def build(cls, name, values, location, tolerance, anchor="", expect_fail=False):
        values = np.atleast_1d(np.asarray(values, dtype=float))
        worst = float(np.max(values)) if values.size else 0.0
        return cls(name, worst, location, int(values.size), float(tolerance),
                   bool(worst <= tolerance), anchor, expect_fail)

    @property
    def ok(self) -> bool:
        """Whether the outcome is the expected one (failure for negative controls)."""
        return self.passed != self.expect_fail


# -- chart helpers ----------------------------------------------------------------
def _coords(chart, pt) -> np.ndarray:
    if isinstance(pt, TangentPoint):
        return pt.x
    return np.asarray(chart.coords(pt) if not isinstance(pt, np.ndarray) else pt, dtype=complex)


def _guard(chart, x) -> None:
    if isinstance(chart, PlebanskiModel):
        chart.check(TangentPoint.from_x(x))
    else:
        chart.check(x)


def _pole_distance(chart, x) -> float:
    if isinstance(chart, PlebanskiModel):
        return chart.distance_to_pole(TangentPoint.from_x(x))
    return chart.distance_to_pole(x)


def safe_step(chart, x, step: float, min_step: float = 1e-8) -> float:
    """Shrink ``step`` so that a guard radius of ten steps avoids the poles.

    Raises
    ------
    PoleError
        If ``x`` is a pole.
    StepUnderflow
        If the required step is below ``min_step``.
    """
    _guard(chart, x)
    scale = max(1.0, float(np.max(np.abs(chart.independent(x)))))
    d = _pole_distance(chart, x)
    if 10.0 * step * scale < d:
        return step
    shrunk = d / (10.0 * scale)
    if shrunk < min_step:
        raise StepUnderflow(f"pole at distance {d:.3g} needs step {shrunk:.3g} < {min_step:g}")
    return shrunk


# -- heavenly equations ---------------------------------------------------------------
def heavenly2_residual(model: PlebanskiModel, pt: TangentPoint) -> np.ndarray:
    """``W_{theta_i z_j} - W_{theta_j z_i} - sum_{p,q} eta_pq W_{theta_i theta_p} W_{theta_j theta_q}``."""
    model.check(pt)
    n = model.n
    H = model.hessian(pt)
    mixed = H[n:, :n]  # [i, j] = d^2 W / dtheta_i dz_j
    A = H[n:, n:]
    return mixed - mixed.T - A @ model.sym.eta @ A.T


# -- flatness -------------------------------------------------------------------------
def frame_brackets(chart, pt, eps, step: float = 1e-4) -> dict:
    """Lie brackets ``[h_eps,i, h_eps,j]`` (``i < j``) in independent coordinates."""
    inverse_epsilon(eps)
    x = _coords(chart, pt)
    step = safe_step(chart, x, step)
    y0 = chart.independent(x)
    scale = max(1.0, float(np.max(np.abs(y0))))

    def field(i):
        return lambda y: chart.independent(chart.frame(chart.embed(y, x), eps))[:, i]

    cols = chart.independent(chart.frame(x, eps))
    n = cols.shape[1]
    out = {}
    for i in range(n):
        for j in range(i + 1, n):
            Xi, Xj = cols[:, i], cols[:, j]
            hi = step * scale / max(1.0, float(np.max(np.abs(Xi))))
            hj = step * scale / max(1.0, float(np.max(np.abs(Xj))))
            dXj = numdiff.directional_derivative(field(j), y0, Xi, hi)
            dXi = numdiff.directional_derivative(field(i), y0, Xj, hj)
            out[(i, j)] = dXj - dXi
    return out


def flatness_residual(chart, pt, eps, step: float = 1e-4) -> float:
    """Largest entry of the frame brackets of ``h + eps^{-1} v`` by finite differences.

    Raises
    ------
    PoleError, StepUnderflow, ZeroEpsilon
    """
    brackets = frame_brackets(chart, pt, eps, step)
    if not brackets:
        return 0.0
    return float(max(np.max(np.abs(b)) for b in brackets.values()))


# -- symmetries -----------------------------------------------------------------------
def symmetry_residuals(model: PlebanskiModel, pt: TangentPoint, k, lam) -> tuple:
    """Lattice translation, homogeneity and parity residuals.

    Returns
    -------
    (float, float, float)
        ``max |A(z, theta + 2 pi i k) - A(z, theta)|`` for the ``theta``-Hessian
        ``A``; ``|W(lam z, theta) - W(z, theta) / lam|``;
        ``|W(z, -theta) + W(z, theta)|``.
    """
    k = np.asarray(k, dtype=complex)
    lam = complex(lam)
    shifted = TangentPoint(pt.z, pt.theta + TWO_PI_I * k)
    scaled = TangentPoint(lam * pt.z, pt.theta)
    negated = TangentPoint(pt.z, -pt.theta)
    for p in (pt, shifted, scaled, negated):
        model.check(p)
    r1 = float(np.max(np.abs(model.theta_hessian(shifted) - model.theta_hessian(pt))))
    w0 = model.w(pt)
    r2 = abs(model.w(scaled) - w0 / lam)
    r3 = abs(model.w(negated) + w0)
    return r1, float(r2), float(r3)


# -- closedness -----------------------------------------------------------------------
FormSelector = Union[str, tuple, Callable]


def _form_function(model: PlebanskiModel, which: FormSelector) -> Callable:
    if callable(which):
        return which
    if isinstance(which, tuple) and which[0] == "pencil":
        e0, e1 = which[1], which[2]
        return lambda x: form_pencil(model, TangentPoint.from_x(x), e0, e1).mat
    index = {"plus": 0, "I": 1, "minus": 2}
    if which not in index:
        raise ValueError(f"unknown form {which!r}")
    k = index[which]
    return lambda x: two_forms(model, TangentPoint.from_x(x))[k].mat


def exterior_derivative(form: Callable, x, step: float = 1e-4) -> np.ndarray:
    """Coefficients ``(dB)_{abc} = d_a B_bc + d_b B_ca + d_c B_ab``."""
    D = numdiff.jacobian(form, np.asarray(x, dtype=complex), step)  # D[b, c, a] = d_a B_bc
    dA = np.transpose(D, (2, 0, 1))  # [a, b, c]
    return dA + np.transpose(dA, (1, 2, 0)) + np.transpose(dA, (2, 0, 1))


def closedness_residual(model: PlebanskiModel, pt: TangentPoint, which: FormSelector,
                        step: float = 1e-4) -> float:
    """Largest coefficient of ``d Omega`` for ``which`` in ``plus``, ``I``, ``minus``,
    ``("pencil", eps0, eps1)`` or a callable returning the evaluation matrix."""
    x = pt.x
    step = safe_step(model, x, step)
    return float(np.max(np.abs(exterior_derivative(_form_function(model, which), x, step))))


# -- lattice ----------------------------------------------------------------------------
def lattice_pairing_check(model: PlebanskiModel, tol: float = 1e-9) -> bool:
    """Whether ``eta / (2 pi i)`` is integral on the dual lattice basis."""
    if not model.has_period_structure:
        raise NoPeriodStructure(f"{model.name} declares no period structure")
    basis = np.eye(model.n) if model.lattice_basis is None else np.asarray(model.lattice_basis)
    dual = np.linalg.inv(basis)  # rows are the dual basis covectors
    pairing = dual @ model.sym.eta @ dual.T / TWO_PI_I
    return bool(np.all(np.abs(pairing - np.round(pairing.real)) <= tol))


# -- parallelism -------------------------------------------------------------------------
def christoffel(model: PlebanskiModel, pt: TangentPoint, step: float = 1e-4) -> np.ndarray:
    """Levi-Civita symbols ``Gamma[k, i, j]`` of ``g`` by finite differences."""
    x = pt.x
    g = hk_tensors(model, pt).g
    if np.linalg.cond(g) > 1e12:
        raise SingularMetric("metric is numerically degenerate")
    dg = numdiff.jacobian(lambda y: hk_tensors(model, TangentPoint.from_x(y)).g, x, step)
    # dg[i, j, l] = d_l g_ij
    ginv = np.linalg.inv(g)
    # lower[l, i, j] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    lower = 0.5 * (np.einsum("jli->lij", dg) + np.einsum("ilj->lij", dg) - np.einsum("ijl->lij", dg))
    return np.einsum("kl,lij->kij", ginv, lower)


def parallel_residual(model: PlebanskiModel, pt: TangentPoint, step: float = 1e-4) -> float:
    """Largest component of ``nabla I``, ``nabla J``, ``nabla K`` for the Levi-Civita connection.

    Raises
    ------
    PoleError, StepUnderflow, SingularMetric
    """
    x = pt.x
    step = safe_step(model, x, step)
    Gam = christoffel(model, pt, step)
    hk = hk_tensors(model, pt)
    worst = 0.0
    for name in ("I", "J", "K"):
        R = getattr(hk, name)
        dR = numdiff.jacobian(lambda y: getattr(hk_tensors(model, TangentPoint.from_x(y)), name), x, step)
        # (nabla_i R)^a_b = d_i R^a_b + Gamma^a_ik R^k_b - Gamma^k_ib R^a_k
        nab = (np.einsum("abi->iab", dR) + np.einsum("aik,kb->iab", Gam, R)
               - np.einsum("kib,ak->iab", Gam, R))
        worst = max(worst, float(np.max(np.abs(nab))))
    return worst


# -- sampling ----------------------------------------------------------------------------
def sample_polydisc(center: Sequence[complex], radius, count: int, seed: int) -> np.ndarray:
    """Scrambled Halton points in the polydisc ``|x_k - center_k| <= radius_k``."""
    center = np.asarray(center, dtype=complex)
    dim = center.size
    radius = np.broadcast_to(np.asarray(radius, dtype=float), (dim,))
    u = qmc.Halton(d=2 * dim, scramble=True, seed=seed).random(count)
    rad = np.sqrt(u[:, :dim]) * radius
    ang = 2 * math.pi * u[:, dim:]
    return center + rad * np.exp(1j * ang)


def sample_points(model: PlebanskiModel, count: int, seed: int, center=None, radius=1.0,
                  min_pole_distance: float = 0.2) -> list:
    """Sample ``count`` non-pole points of ``model`` in a polydisc (rejecting near-poles)."""
    dim = 2 * model.n
    center = np.ones(dim, dtype=complex) if center is None else np.asarray(center, dtype=complex)
    out = []
    batch = 0
    while len(out) < count:
        for x in sample_polydisc(center, radius, 4 * count, seed + 7919 * batch):
            pt = TangentPoint.from_x(x)
            try:
                model.check(pt)
            except PoleError:
                continue
            if model.distance_to_pole(pt) < min_pole_distance:
                continue
            out.append(pt)
            if len(out) == count:
                break
        batch += 1
    return out


def sample_a2_states(count: int, seed: int, base_radius: float = 1.0, q_radius: float = 1.2,
                     r_radius: float = 0.5, min_p: float = 0.3, min_discriminant: float = 0.3,
                     min_pole_distance: float = 0.2) -> list:
    """Sample on-curve A2 states ``(a, b, q, p, r)`` with ``|p|`` and the discriminant bounded below."""
    from .models import A2_CHART, A2State

    out = []
    batch = 0
    radius = [base_radius, base_radius, q_radius, r_radius]
    while len(out) < count:
        for a, b, q, r in sample_polydisc(np.zeros(4), radius, 4 * count, seed + 7919 * batch):
            if abs(4 * a**3 + 27 * b**2) <= min_discriminant:
                continue
            s = A2State.from_qr(a, b, q, r)
            if abs(s.p) <= min_p or A2_CHART.distance_to_pole(s.vector) < min_pole_distance:
                continue
            out.append(s)
            if len(out) == count:
                break
        batch += 1
    return out
