"""Adaptive Dormand-Prince 5(4) integrator for complex-valued states.

The integrator is hand-rolled rather than delegated to ``scipy.integrate``
because two features are needed that the library solvers do not expose: a
projection hook applied after every accepted step (used to keep redundant
coordinates on a constraint surface) and a guard hook that aborts the path
with the partial trajectory attached.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import JoyceKitError, PoleEncountered, PoleError, TolFailure

# Butcher tableau of the Dormand-Prince pair
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_E = _B5 - _B4


@dataclass
class Trajectory:
    """Accepted steps of an integration run."""

    ts: list = field(default_factory=list)
    ys: list = field(default_factory=list)

    @property
    def end(self) -> np.ndarray:
        return self.ys[-1]


def integrate(
    f: Callable[[float, np.ndarray], np.ndarray],
    y0,
    t0: float,
    t1: float,
    rtol: float = 1e-10,
    atol: Optional[float] = None,
    project: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    guard: Optional[Callable[[np.ndarray], None]] = None,
    max_steps: int = 200_000,
    h0: Optional[float] = None,
) -> Trajectory:
    """Integrate ``y' = f(t, y)`` from ``t0`` to ``t1``.

    Parameters
    ----------
    f : callable
        Right-hand side; returns an array shaped like ``y``.
    y0 : array_like
        Complex initial state.
    t0, t1 : float
        Real start and end parameters (``t1 < t0`` integrates backwards).
    rtol, atol : float
        Local error tolerances; ``atol`` defaults to ``rtol``.
    project : callable, optional
        Applied to the state after every accepted step.
    guard : callable, optional
        Called on every accepted state; should raise :class:`PoleError`
        to abort.

    Returns
    -------
    Trajectory
        All accepted ``(t, y)`` pairs including the initial state.

    Raises
    ------
    PoleEncountered
        If ``guard`` or ``f`` raised a :class:`PoleError`; the partial
        trajectory is attached as ``exc.partial``.
    TolFailure
        If the step size underflows or ``max_steps`` is exceeded.
    """
    atol = rtol if atol is None else atol
    y = np.array(y0, dtype=complex)
    if project is not None:
        y = project(y)
    traj = Trajectory([float(t0)], [y.copy()])
    span = float(t1) - float(t0)
    if span == 0.0:
        return traj
    direction = 1.0 if span > 0 else -1.0
    t = float(t0)
    h = abs(h0) if h0 else min(abs(span), 1e-2 * max(1.0, abs(span)))

    def _abort(exc):
        raise PoleEncountered(str(exc), partial=traj) from exc

    try:
        if guard is not None:
            guard(y)
        k1 = np.asarray(f(t, y), dtype=complex)
    except PoleError as exc:
        _abort(exc)

    for _ in range(max_steps):
        remaining = t1 - t
        if direction * remaining <= 1e-15 * max(1.0, abs(t1)):
            return traj
        h = min(h, abs(remaining))
        hs = direction * h
        try:
            ks = [k1]
            for i in range(1, 7):
                yi = y + hs * sum(a * k for a, k in zip(_A[i], ks))
                ks.append(np.asarray(f(t + _C[i] * hs, yi), dtype=complex))
        except PoleError:
            # a stage left the admissible domain; retry smaller before giving up
            h *= 0.25
            if h < 1e-14 * max(1.0, abs(t)):
                _abort(PoleError("pole guard reached during stage evaluation"))
            continue
        y_new = y + hs * sum(b * k for b, k in zip(_B5, ks))
        err_vec = hs * sum(e * k for e, k in zip(_E, ks))
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.sqrt(np.mean((np.abs(err_vec) / scale) ** 2)))
        if not np.isfinite(err):
            h *= 0.1
            if h < 1e-14 * max(1.0, abs(t)):
                raise TolFailure("non-finite error estimate")
            continue
        if err <= 1.0:
            t = t + hs
            y = y_new if project is None else project(y_new)
            try:
                if guard is not None:
                    guard(y)
                # first-same-as-last: the final stage already sits at (t, y) without projection
                k1 = ks[6] if project is None else np.asarray(f(t, y), dtype=complex)
            except PoleError as exc:
                traj.ts.append(t)
                traj.ys.append(y.copy())
                _abort(exc)
            traj.ts.append(t)
            traj.ys.append(y.copy())
            factor = 5.0 if err == 0.0 else min(5.0, 0.9 * err ** -0.2)
        else:
            factor = max(0.2, 0.9 * err ** -0.2)
        h *= factor
        if h < 1e-14 * max(1.0, abs(t)):
            raise TolFailure(f"step size underflow at t={t}")
    raise TolFailure("maximum number of steps exceeded")


def flow(f, y0, duration, **kwargs) -> np.ndarray:
    """Endpoint of the autonomous flow ``y' = f(y)`` after ``duration``."""
    return integrate(lambda t, y: f(y), y0, 0.0, duration, **kwargs).end


__all__ = ["Trajectory", "integrate", "flow", "JoyceKitError"]
