"""Leaf flows of the pencil ``h_eps``, twistor-line tangency and descent checks.

Points of a twistor fibre are represented by points of the total space; two
representatives are identified when a leaf of ``h_eps`` joins them.  All
statements are therefore checked on the total space itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DegenerateFrame, NoPeriodStructure, PoleError
from .integrate import integrate
from .tensorcore import PlebanskiModel, TangentPoint, inverse_epsilon, is_infinite


@dataclass(frozen=True)
class LeafPath:
    """Samples ``(parameter, point)`` of a leaf of ``h_eps`` through a start point."""

    samples: list
    eps: complex
    direction: np.ndarray

    @property
    def end(self):
        return self.samples[-1][1]


def _state(chart, pt) -> np.ndarray:
    if isinstance(pt, TangentPoint):
        return pt.x
    if isinstance(pt, np.ndarray):
        return pt.astype(complex)
    return np.asarray(chart.coords(pt), dtype=complex)


def _wrap(chart, x):
    return TangentPoint.from_x(x) if isinstance(chart, PlebanskiModel) else x


def _guard(chart, x, radius: float = 0.0):
    if isinstance(chart, PlebanskiModel):
        pt = TangentPoint.from_x(x)
        chart.check(pt)
        d = chart.distance_to_pole(pt)
    else:
        chart.guard(x)
        d = chart.distance_to_pole(x)
    if d < radius:
        raise PoleError(f"path within {d:.3g} of the polar locus")


def leaf_path(chart, pt, eps, u, time: float, tol: float = 1e-10,
              pole_guard: float = 1e-6) -> LeafPath:
    """Integrate ``dx/dt = h_eps(u)(x)`` for parameter ``time``.

    ``eps = inf`` follows ``h``; ``eps = 0`` follows the vertical foliation.
    The path stops once it comes within ``pole_guard`` of the polar locus.

    Raises
    ------
    PoleEncountered
        If the path reaches the pole guard; ``exc.partial`` holds the path.
    TolFailure
        If the integrator cannot meet ``tol``.
    """
    u = np.asarray(u, dtype=complex)
    x0 = _state(chart, pt)
    rhs = lambda t, x: chart.frame(x, eps) @ u
    project = None if isinstance(chart, PlebanskiModel) else chart.project
    traj = integrate(rhs, x0, 0.0, float(time), rtol=tol, atol=tol,
                     project=project, guard=lambda x: _guard(chart, x, pole_guard))
    samples = [(t, _wrap(chart, y)) for t, y in zip(traj.ts, traj.ys)]
    return LeafPath(samples=samples, eps=eps, direction=u)


def leaf_flow(chart, pt, eps, u, time: float, tol: float = 1e-10, pole_guard: float = 1e-6):
    """Endpoint of :func:`leaf_path`."""
    return leaf_path(chart, pt, eps, u, time, tol, pole_guard).end


def _line_field(model: PlebanskiModel, x: TangentPoint, eps) -> np.ndarray:
    # theta-part of the right-hand side at x (pushed by the scaling, which fixes theta-components)
    inv = inverse_epsilon(eps)
    A = model.theta_hessian(x)
    B = (A @ model.sym.eta).T
    return inv * inv * x.z + inv * (B @ x.z)


def twistor_line_residual(model: PlebanskiModel, x: TangentPoint, eps,
                          perturbation: Optional[np.ndarray] = None) -> float:
    """Distance of ``c'(eps) - V`` from the ``h_1``-frame at ``c(eps) = (z / eps, theta)``.

    ``V = eps^{-2} sum z_i d/dtheta_i + eps^{-1} sum eta_pq z_i W_{theta_i theta_p} d/dtheta_q``
    is formed from the coordinates and second derivatives at the original
    point ``x`` (the field acts on ``y(eps, .)`` at ``x``) and is carried to
    ``c(eps)`` by the scaling map, which leaves ``theta``-components unchanged.
    A vanishing residual means ``c'(eps) - V`` is tangent to the leaf of
    ``h_1``, i.e. the equation holds in the twistor fibre over ``1``.

    Parameters
    ----------
    perturbation : ndarray, optional
        Extra vector (length ``2n``) added to ``V``; used as a negative control.

    Raises
    ------
    NoPeriodStructure, PoleError, DegenerateFrame
    """
    if not model.has_period_structure:
        raise NoPeriodStructure(f"{model.name} declares no period structure")
    n = model.n
    inv = inverse_epsilon(eps)
    model.check(x)
    c = TangentPoint(inv * x.z, x.theta)
    model.check(c)
    dc = np.concatenate([-inv * inv * x.z, np.zeros(n, dtype=complex)])
    V = np.concatenate([np.zeros(n, dtype=complex), _line_field(model, x, eps)])
    if perturbation is not None:
        V = V + np.asarray(perturbation, dtype=complex)
    d = dc - V
    H = model.frame(c.x, 1.0)
    if np.linalg.matrix_rank(H) < n:
        raise DegenerateFrame("h_1 frame is rank deficient")
    coef, *_ = np.linalg.lstsq(H, d, rcond=None)
    return float(np.linalg.norm(H @ coef - d))


def descent_drift(chart, pt, eps, invariants: Sequence[Callable], time: float,
                  tol: float = 1e-10) -> float:
    """Largest change of the ``invariants`` along each frame direction of ``h_eps``."""
    x0 = _state(chart, pt)
    start = _wrap(chart, x0)
    n = chart.n
    worst = 0.0
    for i in range(n):
        u = np.zeros(n, dtype=complex)
        u[i] = 1.0
        end = leaf_flow(chart, start, eps, u, time, tol)
        for f in invariants:
            worst = max(worst, abs(complex(f(end)) - complex(f(start))))
    return float(worst)


def asymptotic_probe(model: PlebanskiModel, x: TangentPoint, eps_values: Sequence[complex],
                     section_z=None, tol: float = 1e-10) -> list:
    """Record fibre coordinates of ``y(eps, x)`` on the cross-section ``z = section_z``.

    For each ``eps`` the point ``c(eps) = (z / eps, theta)`` is moved along
    ``h_1`` to the cross-section and the ``theta`` values there are recorded
    next to the leading-order guess ``-z / eps + theta``.  No pass/fail
    judgement is made.
    """
    zs = np.ones(model.n, dtype=complex) if section_z is None else np.asarray(section_z, dtype=complex)
    out = []
    for eps in eps_values:
        inv = inverse_epsilon(eps)
        c = TangentPoint(inv * x.z, x.theta)
        u = zs - c.z
        end = leaf_flow(model, c, 1.0, u, 1.0, tol)
        out.append({
            "eps": complex(eps),
            "t": (end.theta - zs).tolist(),
            "leading": (-inv * x.z + x.theta).tolist(),
        })
    return out
