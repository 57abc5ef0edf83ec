"""Time-dependent Hamiltonian systems, their extraction from a pencil of flat
connections, and the deformed cubic oscillator.

Extraction recipe
-----------------
Input: a chart for the total space, a cotangent splitting of the base
coordinates into times ``t`` and momenta ``s`` with ``omega = sum dt ^ ds``,
a Lagrangian level set ``R = {f = c}`` of ``h``-invariant functions, a seed
point on ``Y = {f = c}`` and a Darboux parametrisation of the seed fibre.

* The lift of ``d/dt_i`` is ``w_i = d/dt_i + sum_j alpha_ij d/ds_j`` with
  ``alpha`` fixed by asking ``v(w_i)`` to annihilate ``f``; transversality
  means the matrix ``df(v(d/ds))`` is invertible.  Since ``h`` preserves
  ``f``, ``h_eps(w_i)`` is tangent to ``Y`` for every ``eps``.
* Fibre coordinates ``(Q, P)`` on the seed fibre are extended to ``Y`` by
  transport along ``k_inf = h(w)``; the Hamiltonians are
  ``H_i(t, Q, P) = s_i`` at the transported point.
* In these coordinates ``k_eps(d/dt_i) = d/dt_i - eps^{-1} X_{H_i}`` with
  ``X_H = H_P d/dQ - H_Q d/dP``, i.e. ``flow_sign = -1`` below, because
  ``(Q, P)`` are Darboux for ``2i Omega_I`` restricted to the fibres.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import numdiff
from .errors import (
    CheckFailure,
    DomainExit,
    LoopThroughSingularity,
    NotOnY,
    PoleEncountered,
    PoleError,
    TransversalityFailure,
)
from .integrate import integrate
from .models import A2State, a2_flows
from .tensorcore import PlebanskiModel, TangentPoint, inverse_epsilon, two_forms


@dataclass(frozen=True)
class HamiltonianSystem:
    """Hamiltonians ``H_i(t, q, p)`` for ``d`` times and ``m`` Darboux pairs.

    The pencil is ``k_eps(d/dt_i) = d/dt_i + eps^{-1} flow_sign (dH_i/dp d/dq - dH_i/dq d/dp)``.
    """

    d: int
    m: int
    H: Sequence[Callable]
    flow_sign: float = 1.0
    domain: Optional[Callable] = None
    metadata: dict = field(default_factory=dict)
    gradients: Optional[Sequence[Callable]] = None

    def hamiltonians(self, t, q, p) -> np.ndarray:
        t, q, p = (np.atleast_1d(np.asarray(v, dtype=complex)) for v in (t, q, p))
        return np.array([complex(h(t, q, p)) for h in self.H])

    def inside(self, t, q, p) -> bool:
        return True if self.domain is None else bool(self.domain(t, q, p))

    def split(self, y):
        y = np.asarray(y, dtype=complex)
        return y[: self.d], y[self.d: self.d + self.m], y[self.d + self.m:]

    def _grad(self, i, t, q, p, step):
        if self.gradients is not None:
            return np.asarray(self.gradients[i](t, q, p), dtype=complex)

        def f(qp):
            return complex(self.H[i](t, qp[: self.m], qp[self.m:]))

        return numdiff.gradient(f, np.concatenate([q, p]), step)

    def vector_field(self, i: int, eps, y, step: float = 1e-4) -> np.ndarray:
        """``k_eps(d/dt_i)`` at ``y = (t, q, p)``."""
        inv = inverse_epsilon(eps)
        t, q, p = self.split(y)
        out = np.zeros(self.d + 2 * self.m, dtype=complex)
        out[i] = 1.0
        if inv != 0:
            g = self._grad(i, t, q, p, step)
            Hq, Hp = g[: self.m], g[self.m:]
            out[self.d: self.d + self.m] = inv * self.flow_sign * Hp
            out[self.d + self.m:] = -inv * self.flow_sign * Hq
        return out


def k_flow(system: HamiltonianSystem, eps, start, direction: int, duration: float,
           tol: float = 1e-10, step: float = 1e-4):
    """Flow ``k_eps(d/dt_direction)`` for ``duration`` starting at ``start = (t, q, p)``.

    Raises
    ------
    DomainExit
        If the path leaves the system's domain or a Hamiltonian hits a pole.
    """
    t0, q0, p0 = (np.atleast_1d(np.asarray(v, dtype=complex)) for v in start)
    y0 = np.concatenate([t0, q0, p0])

    def guard(y):
        if not system.inside(*system.split(y)):
            raise PoleError("left the domain")

    def rhs(s, y):
        try:
            return system.vector_field(direction, eps, y, step)
        except PoleEncountered as exc:
            raise PoleError(str(exc)) from exc

    try:
        traj = integrate(rhs, y0, 0.0, float(duration), rtol=tol, atol=tol, guard=guard)
    except PoleEncountered as exc:
        raise DomainExit(str(exc)) from exc
    return system.split(traj.end)


def poisson_bracket(system: HamiltonianSystem, i: int, j: int, t, q, p, step: float = 1e-4) -> complex:
    """``sum_r (dH_i/dq_r dH_j/dp_r - dH_i/dp_r dH_j/dq_r)``."""
    gi = system._grad(i, t, q, p, step)
    gj = system._grad(j, t, q, p, step)
    m = system.m
    return complex(np.dot(gi[:m], gj[m:]) - np.dot(gi[m:], gj[:m]))


def strong_integrability_residual(system: HamiltonianSystem, pt, step: float = 1e-4) -> tuple:
    """``(max |{H_i, H_j}|, max |dH_i/dt_j - dH_j/dt_i|)`` over ``i < j``."""
    t, q, p = (np.atleast_1d(np.asarray(v, dtype=complex)) for v in pt)
    if not system.inside(t, q, p):
        raise DomainExit("point outside the domain")
    poisson, curl = 0.0, 0.0
    for i in range(system.d):
        for j in range(i + 1, system.d):
            poisson = max(poisson, abs(poisson_bracket(system, i, j, t, q, p, step)))
            dti = numdiff.gradient(lambda tt: complex(system.H[i](tt, q, p)), t, step)
            dtj = numdiff.gradient(lambda tt: complex(system.H[j](tt, q, p)), t, step)
            curl = max(curl, abs(dti[j] - dtj[i]))
    return float(poisson), float(curl)


def commutator_defect(system: HamiltonianSystem, eps, start, i: int, j: int, duration: float,
                      tol: float = 1e-12) -> float:
    """Distance between the endpoints of (t_i then t_j) and (t_j then t_i) flows."""
    a = k_flow(system, eps, k_flow(system, eps, start, i, duration, tol), j, duration, tol)
    b = k_flow(system, eps, k_flow(system, eps, start, j, duration, tol), i, duration, tol)
    return float(max(np.max(np.abs(u - v)) for u, v in zip(a, b)))


# -- extraction ---------------------------------------------------------------------
@dataclass(frozen=True)
class CotangentSplit:
    """Indices of times and momenta among the base coordinates (``omega = sum dt_i ^ ds_i``)."""

    times: tuple
    momenta: tuple


@dataclass(frozen=True)
class LevelSet:
    """``R = {f(x) = level}`` for ``h``-invariant functions ``f`` on the total space.

    ``gradient`` (optional) returns the differential of ``f`` in independent
    chart coordinates, shape ``(k, N)``; finite differences are used otherwise.
    """

    f: Callable
    level: np.ndarray
    gradient: Optional[Callable] = None


def _chart_coords(chart, pt) -> np.ndarray:
    if isinstance(pt, TangentPoint):
        return pt.x
    if isinstance(pt, A2State):
        return pt.vector
    return np.asarray(pt, dtype=complex)


def _independent(chart, x):
    return chart.independent(x)


def _two_i_omega_I(chart, x) -> np.ndarray:
    if isinstance(chart, PlebanskiModel):
        return 2j * two_forms(chart, TangentPoint.from_x(x))[1].mat
    return chart.two_i_omega_I(x)


def _invariant_gradient(chart, R: LevelSet, x, step=1e-6) -> np.ndarray:
    if R.gradient is not None:
        return np.atleast_2d(np.asarray(R.gradient(x), dtype=complex))
    y = _independent(chart, x)
    f = lambda yy: np.atleast_1d(np.asarray(R.f(chart.embed(yy, x)), dtype=complex))
    return numdiff.jacobian(f, y, step)


def _frame_indep(chart, x, eps) -> np.ndarray:
    return _independent(chart, chart.frame(x, eps))


@dataclass
class Extraction:
    """Data produced by :func:`extract_from_joyce`."""

    chart: object
    split: CotangentSplit
    R: LevelSet
    t0: np.ndarray
    fibre_chart: Callable
    fibre_coords: Callable
    transversality_rank: dict
    tol: float = 1e-12

    def lift_coefficients(self, x) -> np.ndarray:
        """``alpha`` with ``w_i = d/dt_i + sum_j alpha_ij d/ds_j``."""
        G, g = self._lift_system(x)
        return np.linalg.solve(G, -g).T

    def _lift_system(self, x):
        Df = _invariant_gradient(self.chart, self.R, x)
        V = _frame_indep(self.chart, x, 0)  # vertical frame in independent coordinates
        G = Df @ V[:, list(self.split.momenta)]
        g = Df @ V[:, list(self.split.times)]
        return G, g

    def lift(self, x) -> np.ndarray:
        """Base vectors ``w_i`` as columns (length ``n``)."""
        n = self.chart.n
        alpha = self.lift_coefficients(x)
        d = len(self.split.times)
        W = np.zeros((n, d), dtype=complex)
        for i, ti in enumerate(self.split.times):
            W[ti, i] = 1.0
            for j, sj in enumerate(self.split.momenta):
                W[sj, i] = alpha[i, j]
        return W

    def k_field(self, x, eps, weights) -> np.ndarray:
        """``h_eps(sum_i weights_i w_i)`` in full chart coordinates."""
        return self.chart.frame(x, eps) @ (self.lift(x) @ np.asarray(weights, dtype=complex))

    def times_of(self, x) -> np.ndarray:
        base = self.chart.base(x)
        return np.asarray(base)[list(self.split.times)]

    def momenta_of(self, x) -> np.ndarray:
        base = self.chart.base(x)
        return np.asarray(base)[list(self.split.momenta)]

    def transport(self, x, dt, eps=math.inf) -> np.ndarray:
        """Move ``x`` by the time displacement ``dt`` along ``k_eps``."""
        dt = np.asarray(dt, dtype=complex)
        if np.all(dt == 0):
            return np.asarray(x, dtype=complex)
        # parametrise by s in [0, 1] with real parameter; complex dt enters the field
        rhs = lambda s, y: self.k_field(y, eps, dt)
        project = None if isinstance(self.chart, PlebanskiModel) else self.chart.project
        guard = (lambda y: self.chart.check(TangentPoint.from_x(y))) if isinstance(
            self.chart, PlebanskiModel) else self.chart.guard
        traj = integrate(rhs, x, 0.0, 1.0, rtol=self.tol, atol=self.tol, project=project, guard=guard)
        return traj.end

    def transport_with_tangents(self, x, dt, T, eps=math.inf, fd_step: float = 1e-6):
        """Transport ``x`` as in :meth:`transport` together with tangent vectors ``T`` (columns).

        The tangents follow the linearised field, obtained by central differences of
        ``k_field`` along each column.
        """
        x = np.asarray(x, dtype=complex)
        T = np.asarray(T, dtype=complex)
        N, k = T.shape
        dt = np.asarray(dt, dtype=complex)
        if np.all(dt == 0):
            return x, T

        def rhs(s, y):
            xs = y[:N]
            Ts = y[N:].reshape(N, k)
            out = np.empty_like(y)
            out[:N] = self.k_field(xs, eps, dt)
            cols = []
            for j in range(k):
                v = Ts[:, j]
                h = fd_step / max(1e-300, float(np.max(np.abs(v))))
                cols.append((self.k_field(xs + h * v, eps, dt) - self.k_field(xs - h * v, eps, dt)) / (2 * h))
            out[N:] = np.stack(cols, axis=1).ravel()
            return out

        chart_project = None if isinstance(self.chart, PlebanskiModel) else self.chart.project
        project = None if chart_project is None else (
            lambda y: np.concatenate([chart_project(y[:N]), y[N:]]))
        check = (lambda z: self.chart.check(TangentPoint.from_x(z))) if isinstance(
            self.chart, PlebanskiModel) else self.chart.guard
        y0 = np.concatenate([x, T.ravel()])
        traj = integrate(rhs, y0, 0.0, 1.0, rtol=self.tol, atol=self.tol, project=project,
                         guard=lambda y: check(y[:N]))
        end = traj.end
        return end[:N], end[N:].reshape(N, k)

    def hamiltonian_gradients(self, t, Q, P) -> np.ndarray:
        """``dH_i / d(Q, P)`` for all ``i`` (rows) from one transport with tangents."""
        Q = np.atleast_1d(np.asarray(Q, dtype=complex))
        P = np.atleast_1d(np.asarray(P, dtype=complex))
        m = Q.size
        qp = np.concatenate([Q, P])
        x0 = np.asarray(self.fibre_chart(Q, P), dtype=complex)
        J = numdiff.jacobian(lambda v: np.asarray(self.fibre_chart(v[:m], v[m:]), dtype=complex), qp, 1e-3)
        x1, T1 = self.transport_with_tangents(x0, np.asarray(t, dtype=complex) - self.t0, J)
        dm = numdiff.jacobian(lambda y: self.momenta_of(y), x1, 1e-3)
        return dm @ T1

    def to_point(self, t, Q, P) -> np.ndarray:
        """Total-space point with system coordinates ``(t, Q, P)``."""
        x0 = self.fibre_chart(np.asarray(Q, dtype=complex), np.asarray(P, dtype=complex))
        return self.transport(x0, np.asarray(t, dtype=complex) - self.t0)

    def to_system(self, x):
        """System coordinates ``(t, Q, P)`` of a point of ``Y``."""
        t = self.times_of(x)
        x0 = self.transport(x, self.t0 - t)
        Q, P = self.fibre_coords(x0)
        return t, np.atleast_1d(Q), np.atleast_1d(P)


def extract_from_joyce(chart, split: CotangentSplit, R: LevelSet, seed, fibre_chart: Callable,
                       fibre_coords: Callable, eps_check=1.0, tol: float = 1e-12,
                       rank_tol: float = 1e-8) -> HamiltonianSystem:
    """Hamiltonian system induced on ``Y = {f = level}`` by the pencil of ``chart``.

    Parameters
    ----------
    chart : PlebanskiModel or chart object
    split : CotangentSplit
        Times and momenta among the base coordinates.
    R : LevelSet
        ``h``-invariant functions and their level values.
    seed : point
        A point of ``Y``; its times are the reference times ``t0``.
    fibre_chart : callable
        ``(Q, P) -> x``: a parametrisation of the seed fibre of ``Y``.
    fibre_coords : callable
        Inverse of ``fibre_chart`` on the seed fibre.
    eps_check : complex
        Working value of ``eps`` at which transversality is also reported.

    Returns
    -------
    HamiltonianSystem
        With ``flow_sign = -1``; ``metadata["extraction"]`` holds the
        :class:`Extraction` object and ``metadata["seed"]`` the seed coordinates.

    Raises
    ------
    NotOnY
        If the seed is not on the level set.
    TransversalityFailure
        If ``df(v(d/ds))`` is rank deficient at the seed.
    CheckFailure
        If ``fibre_chart`` is not Darboux for ``2i Omega_I`` on the seed fibre.
    """
    x0 = _chart_coords(chart, seed)
    level = np.atleast_1d(np.asarray(R.level, dtype=complex))
    if np.max(np.abs(np.atleast_1d(R.f(x0)) - level)) > 1e-9 * max(1.0, float(np.max(np.abs(level)))):
        raise NotOnY("seed does not lie on the level set")
    d = len(split.times)
    n = chart.n
    om = chart.sym.omega
    for ti, si in zip(split.times, split.momenta):
        if abs(om[ti, si] - 1.0) > 1e-12:
            raise CheckFailure("cotangent split is not Darboux for omega")

    ext = Extraction(chart, split, R, np.zeros(d, dtype=complex), fibre_chart, fibre_coords, {}, tol)
    G, _ = ext._lift_system(x0)
    sv = np.linalg.svd(G, compute_uv=False)
    rank = int(np.sum(sv > rank_tol * max(1.0, sv[0] if sv.size else 1.0)))
    Df = _invariant_gradient(chart, R, x0)
    He = _frame_indep(chart, x0, eps_check)
    sv_e = np.linalg.svd(Df @ He[:, list(split.momenta)], compute_uv=False)
    rank_e = int(np.sum(sv_e > rank_tol * max(1.0, sv_e[0] if sv_e.size else 1.0)))
    ext.transversality_rank.update({"vertical": rank, "eps": rank_e, "eps_value": eps_check})
    if rank < d:
        raise TransversalityFailure(f"df(v(d/ds)) has rank {rank} < {d}")
    ext.t0 = ext.times_of(x0)

    # Darboux check of the seed-fibre chart
    Q0, P0 = (np.atleast_1d(np.asarray(v, dtype=complex)) for v in fibre_coords(x0))
    m = Q0.size
    qp0 = np.concatenate([Q0, P0])
    sigma = lambda qp: _independent(chart, fibre_chart(qp[:m], qp[m:]))
    Jac = numdiff.jacobian(sigma, qp0, 1e-4)
    pulled = Jac.T @ _independent_form(chart, _two_i_omega_I(chart, x0)) @ Jac
    std = np.block([[np.zeros((m, m)), np.eye(m)], [-np.eye(m), np.zeros((m, m))]])
    if np.max(np.abs(pulled - std)) > 1e-6:
        raise CheckFailure("fibre chart is not Darboux for the restricted form")
    if np.max(np.abs(_independent(chart, fibre_chart(Q0, P0)) - _independent(chart, x0))) > 1e-9 * max(
            1.0, float(np.max(np.abs(x0)))):
        raise CheckFailure("fibre chart does not invert fibre_coords at the seed")

    def make_H(i):
        def H(t, Q, P):
            try:
                x = ext.to_point(t, Q, P)
            except PoleEncountered as exc:
                raise DomainExit(str(exc)) from exc
            return complex(ext.momenta_of(x)[i])

        return H

    def make_grad(i):
        def grad(t, Q, P):
            try:
                return ext.hamiltonian_gradients(t, Q, P)[i]
            except PoleEncountered as exc:
                raise DomainExit(str(exc)) from exc

        return grad

    return HamiltonianSystem(
        d=d, m=m, H=[make_H(i) for i in range(d)], flow_sign=-1.0,
        gradients=[make_grad(i) for i in range(d)],
        metadata={"origin": f"extracted from {getattr(chart, 'name', 'chart')}", "extraction": ext,
                  "seed": x0},
    )


def _independent_form(chart, B) -> np.ndarray:
    # forms from charts are already in independent coordinates; models use the full chart
    return B


def geometric_k_flow(system: HamiltonianSystem, eps, seed, direction: int, duration: float,
                     tol: float = 1e-10) -> np.ndarray:
    """Flow ``h_eps(w_direction)`` on the total space starting at ``seed``."""
    ext: Extraction = system.metadata["extraction"]
    x0 = _chart_coords(ext.chart, seed)
    e = np.zeros(system.d, dtype=complex)
    e[direction] = 1.0
    rhs = lambda s, y: ext.k_field(y, eps, e)
    project = None if isinstance(ext.chart, PlebanskiModel) else ext.chart.project
    return integrate(rhs, x0, 0.0, float(duration), rtol=tol, atol=tol, project=project).end


# -- deformed cubic oscillator -----------------------------------------------------------
@dataclass(frozen=True)
class OscillatorProblem:
    """``y'' = Q(x) y`` with ``Q = eps^-2 Q0 + eps^-1 Q1 + Q2``.

    ``Q0 = x^3 + a x + b``, ``Q1 = p/(x - q) + r``,
    ``Q2 = 3/(4 (x - q)^2) + r/(2p (x - q)) + r^2/(4 p^2)``.
    """

    state: A2State
    eps: complex

    def potential_terms(self, x):
        s = self.state
        d = x - s.q
        Q0 = x**3 + s.a * x + s.b
        Q1 = s.p / d + s.r
        Q2 = 0.75 / d**2 + s.r / (2 * s.p * d) + s.r**2 / (4 * s.p**2)
        return Q0, Q1, Q2

    def potential(self, x):
        inv = inverse_epsilon(self.eps)
        Q0, Q1, Q2 = self.potential_terms(x)
        return inv * inv * Q0 + inv * Q1 + Q2

    def turning_points(self) -> np.ndarray:
        """Zeros of ``Q`` (roots of ``4 p^2 eps^2 (x - q)^2 Q``)."""
        s = self.state
        e = complex(self.eps)
        P = np.polynomial.Polynomial
        d = P([-s.q, 1.0])
        num = (4 * s.p**2 * (P([s.b, s.a, 0, 1]) * d * d + e * (s.p * d + s.r * d * d))
               + e * e * (3 * s.p**2 + 2 * s.p * s.r * d + s.r**2 * d * d))
        return num.roots()


def double_pole_coefficient(problem: OscillatorProblem, delta: float = 1e-6) -> complex:
    """``lim (x - q)^2 Q2(x)`` sampled at ``x = q + delta`` (Laurent leading term)."""
    _, _, Q2 = problem.potential_terms(problem.state.q + delta)
    return complex(Q2 * delta**2)


@dataclass(frozen=True)
class CircleLoop:
    """Positively oriented circle ``center + radius e^{2 pi i s}``, based at ``s = 0``."""

    center: complex
    radius: float

    def point(self, s):
        return self.center + self.radius * np.exp(2j * math.pi * s)

    def velocity(self, s):
        return 2j * math.pi * self.radius * np.exp(2j * math.pi * s)

    def distance_to(self, z) -> float:
        return abs(abs(complex(z) - self.center) - self.radius)


def loop_around_q(problem: OscillatorProblem, radius: Optional[float] = None) -> CircleLoop:
    """Small circle around the apparent singularity ``x = q`` avoiding the turning points."""
    tp = problem.turning_points()
    d = float(np.min(np.abs(tp - problem.state.q))) if tp.size else 1.0
    r = 0.5 * d if radius is None else radius
    return CircleLoop(problem.state.q, r)


def oscillator_monodromy(problem: OscillatorProblem, loop: CircleLoop, guard: float = 1e-3,
                         tol: float = 1e-12) -> np.ndarray:
    """Monodromy of ``(y, y')`` around ``loop`` (fundamental matrix starting at the identity).

    Raises
    ------
    LoopThroughSingularity
        If the loop passes within ``guard`` of ``x = q`` or a turning point.
    """
    if loop.distance_to(problem.state.q) <= guard:
        raise LoopThroughSingularity("loop passes through x = q")
    for z in problem.turning_points():
        if loop.distance_to(z) <= guard:
            raise LoopThroughSingularity(f"loop passes through turning point {z}")

    def rhs(s, Y):
        x = loop.point(s)
        M = np.array([[0.0, 1.0], [problem.potential(x), 0.0]])
        return (loop.velocity(s) * (M @ Y.reshape(2, 2))).ravel()

    traj = integrate(rhs, np.eye(2, dtype=complex).ravel(), 0.0, 1.0, rtol=tol, atol=tol)
    return traj.end.reshape(2, 2)


def isomonodromy_trace_drift(state: A2State, eps, loop: CircleLoop, step: float = 1e-2,
                             direction=(1.0, 0.0), tol: float = 1e-12) -> float:
    """Change of the monodromy trace after moving ``state`` by ``step`` along ``h_eps``."""
    from .models import A2_CHART
    from .twistor import leaf_flow

    before = np.trace(oscillator_monodromy(OscillatorProblem(state, eps), loop, tol=tol))
    moved = A2State.from_vector(leaf_flow(A2_CHART, state.vector, eps, np.asarray(direction), step))
    after = np.trace(oscillator_monodromy(OscillatorProblem(moved, eps), loop, tol=tol))
    return float(abs(after - before))


# -- ready-made extractions -------------------------------------------------------------
def flat_extraction(n: int = 2, level=0.25, seed=None) -> HamiltonianSystem:
    """Flat model with times ``z_1, z_3, ...``, momenta ``z_2, z_4, ...`` and
    ``R = {theta_2 = c_1, theta_4 = c_2, ...}``; fibre coordinates ``(z_2k, theta_2k-1)``."""
    from .models import flat_model

    model = flat_model(n)
    d = n // 2
    times = tuple(range(0, n, 2))
    momenta = tuple(range(1, n, 2))
    level = np.broadcast_to(np.asarray(level, dtype=complex), (d,)).copy()
    if seed is None:
        z = np.arange(1, n + 1, dtype=complex) * 0.3
        th = np.zeros(n, dtype=complex)
        th[list(momenta)] = level
        th[list(times)] = 0.1 * np.arange(1, d + 1)
        seed = TangentPoint(z, th)
    x0 = seed.x
    R = LevelSet(f=lambda x: np.asarray(x)[n + np.array(momenta)], level=level,
                 gradient=lambda x: np.eye(2 * n)[n + np.array(momenta)])

    def fibre_chart(Q, P):
        x = x0.copy()
        x[list(momenta)] = Q
        x[n + np.array(times)] = P
        return x

    def fibre_coords(x):
        x = np.asarray(x)
        return x[list(momenta)], x[n + np.array(times)]

    return extract_from_joyce(model, CotangentSplit(times, momenta), R, seed, fibre_chart, fibre_coords)


def a2_extraction(seed: A2State, level: Optional[complex] = None, tol: float = 1e-10) -> HamiltonianSystem:
    """A2 with time ``a``, momentum ``b`` and ``R = {phi_2 = c}``; fibre coordinates ``(phi_1, p)``.

    On the seed fibre ``a = a0`` the chart is ``q = Q - 2 a0 c``, ``p = P``,
    ``r = 2 P c``, ``b = P^2 - q^3 - a0 q``.
    """
    from .models import A2_CHART, a2_phi

    c = a2_phi(seed)[1] if level is None else complex(level)
    a0 = seed.a

    def grad(x):
        a, b, q, p, r = x
        # d(r / 2p) with dp = (q da + db + (3q^2 + a) dq) / 2p
        k = -r / (2 * p * p) / (2 * p)
        return np.array([[k * q, k, k * (3 * q * q + a), 1 / (2 * p)]])

    R = LevelSet(f=lambda x: np.array([a2_phi(x)[1]]), level=np.array([c]), gradient=grad)

    def fibre_chart(Q, P):
        Q, P = complex(np.ravel(Q)[0]), complex(np.ravel(P)[0])
        q = Q - 2 * a0 * c
        b = P * P - q**3 - a0 * q
        return np.array([a0, b, q, P, 2 * P * c], dtype=complex)

    def fibre_coords(x):
        return np.array([a2_phi(x)[0]]), np.array([x[3]])

    return extract_from_joyce(A2_CHART, CotangentSplit((0,), (1,)), R, seed.vector,
                              fibre_chart, fibre_coords, tol=tol)


def a2_closed_form_hamiltonian(t, Q, P, c) -> complex:
    """``P^2 - q^3 - t q`` with ``q = Q - 2 c t``: the A2 Hamiltonian in flat fibre coordinates."""
    q = Q - 2 * c * t
    return P * P - q**3 - t * q
