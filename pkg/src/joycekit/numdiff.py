"""Central finite differences for holomorphic functions.

Complex coordinates are treated as independent holomorphic directions, so a
real step along a coordinate axis gives the complex partial derivative.  The
basic stencil is the fourth-order five-point rule; an optional Richardson
step (halving the spacing) lifts it to sixth order.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

DEFAULT_STEP = 1e-4


def _stencil(f: Callable, x: np.ndarray, v: np.ndarray, h: float):
    # antisymmetric pairs so that constant functions give exactly zero
    d1 = np.asarray(f(x + h * v)) - np.asarray(f(x - h * v))
    d2 = np.asarray(f(x + 2 * h * v)) - np.asarray(f(x - 2 * h * v))
    return (8.0 * d1 - d2) / (12.0 * h)


def directional_derivative(f, x, v, h=DEFAULT_STEP, richardson=True):
    """Derivative of ``f`` at ``x`` along ``v`` with spacing ``h``."""
    x = np.asarray(x, dtype=complex)
    v = np.asarray(v, dtype=complex)
    d1 = _stencil(f, x, v, h)
    if not richardson:
        return d1
    d2 = _stencil(f, x, v, h / 2.0)
    return (16.0 * d2 - d1) / 15.0


def scaled_steps(x: np.ndarray, h: float) -> np.ndarray:
    """Per-coordinate spacings ``h * max(1, |x_k|)``."""
    return h * np.maximum(1.0, np.abs(np.asarray(x)))


def jacobian(f, x, h=DEFAULT_STEP, richardson=True, scale=True):
    """Finite-difference Jacobian.

    Parameters
    ----------
    f : callable
        Maps a complex vector of length N to an array of any shape S.
    x : array_like
        Evaluation point.
    h : float
        Base spacing; multiplied by ``max(1, |x_k|)`` when ``scale`` is set.

    Returns
    -------
    ndarray
        Array of shape ``S + (N,)`` whose last index is the differentiation
        direction.
    """
    x = np.asarray(x, dtype=complex)
    steps = scaled_steps(x, h) if scale else np.full(x.shape, h)
    cols = []
    for k in range(x.size):
        e = np.zeros(x.size, dtype=complex)
        e[k] = 1.0
        cols.append(directional_derivative(f, x, e, steps[k], richardson))
    return np.stack(cols, axis=-1)


def gradient(f, x, h=DEFAULT_STEP, richardson=True):
    """Gradient of a scalar function (shape ``(N,)``)."""
    return jacobian(lambda y: np.asarray(f(y)), x, h, richardson)


def hessian(f, x, h_inner=DEFAULT_STEP, h_outer=1e-3, richardson=True):
    """Hessian of a scalar function by nested differences."""
    g = lambda y: gradient(f, y, h_inner, richardson)
    H = jacobian(g, x, h_outer, richardson)
    return 0.5 * (H + H.T)
