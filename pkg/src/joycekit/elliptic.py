"""Periods and Abel integrals of the curve ``y^2 = x^3 + a x + b``.

Cycle convention
----------------
The three roots are sorted lexicographically by (real part, imaginary part),
with real parts closer than ``1e-9`` times the root scale treated as equal.
Cycle ``gamma_1`` encircles the straight cut ``[e_1, e_2]`` and ``gamma_2``
encircles ``[e_2, e_3]``.  A cycle integral equals twice the integral along
its cut, taken on a continuous branch of ``y``.  Orientations are then fixed
by two rules: ``Re(omega_1) > 0`` (or ``Im(omega_1) > 0`` when the real part
vanishes), and the Legendre combination ``omega_2 eta_1 - omega_1 eta_2``
equals ``+2 pi i``.

Square roots are never taken pointwise on the principal branch along a path.
On a straight segment ``x(s)`` that avoids a root ``e`` the function
``x - e`` traces a segment missing the origin.  The product
``sqrt(m) * sqrt((x - e)/m)`` with ``m`` its midpoint value is then continuous,
because the quotient never meets the negative real axis.

Integrable endpoint singularities at branch points are removed by
substitution: ``x = e_j + (e_k - e_j)(1 - cos t)/2`` on a cut between two
roots, and ``x = e + (x_1 - e) u^2`` on a path that starts at a root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DegenerateCurve, OffCurve, PathThroughBranchPoint, QuadratureFailure

TWO_PI_I = 2j * math.pi

_GL_LO = np.polynomial.legendre.leggauss(24)
_GL_HI = np.polynomial.legendre.leggauss(48)

CYCLE_BASIS_ID = (
    "roots:lex(re,im);gamma1:cut[e1,e2];gamma2:cut[e2,e3];"
    "orient:Re(omega1)>0,legendre=+2pi*i"
)


@dataclass(frozen=True)
class Curve:
    """The cubic ``y^2 = x^3 + a x + b``."""

    a: complex
    b: complex

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))

    @property
    def discriminant(self) -> complex:
        """``4 a^3 + 27 b^2`` (vanishes exactly for singular curves)."""
        return 4 * self.a**3 + 27 * self.b**2

    def f(self, x):
        return x**3 + self.a * x + self.b

    def validate(self, tol: float = 1e-12) -> None:
        scale = max(1.0, abs(self.a) ** 3, abs(self.b) ** 2)
        if abs(self.discriminant) <= tol * scale:
            raise DegenerateCurve(f"curve ({self.a}, {self.b}) has a repeated root")

    def roots(self) -> np.ndarray:
        """Roots in the documented lexicographic order."""
        self.validate()
        return _sort_roots(_polish(np.roots([1.0, 0.0, self.a, self.b]), self.a, self.b))

    def on_curve_residual(self, q, p) -> float:
        return abs(p * p - self.f(q)) / max(1.0, abs(p) ** 2)


def _polish(roots: np.ndarray, a, b) -> np.ndarray:
    out = np.array(roots, dtype=complex)
    for _ in range(3):
        out = out - (out**3 + a * out + b) / (3 * out**2 + a)
    return out


def _sort_roots(roots: np.ndarray) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(roots))))
    tol = 1e-9 * scale
    order = sorted(range(3), key=lambda k: (roots[k].real, roots[k].imag))
    # bubble pass so that near-equal real parts are ordered by imaginary part
    order = list(order)
    for _ in range(3):
        for i in range(2):
            u, v = roots[order[i]], roots[order[i + 1]]
            if abs(u.real - v.real) <= tol and u.imag > v.imag:
                order[i], order[i + 1] = order[i + 1], order[i]
    return roots[order]


def track_roots(reference: np.ndarray, a, b) -> np.ndarray:
    """Roots of a nearby curve, matched to ``reference`` by proximity."""
    new = list(_polish(np.roots([1.0, 0.0, a, b]), a, b))
    out = []
    for r in reference:
        k = int(np.argmin([abs(r - s) for s in new]))
        out.append(new.pop(k))
    return np.array(out)


# -- quadrature ------------------------------------------------------------------
def adaptive_quad(g: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
                  tol: float = 1e-14, max_depth: int = 40) -> np.ndarray:
    """Adaptive composite Gauss-Legendre quadrature of a vector integrand.

    ``g`` maps an array of nodes of shape ``(m,)`` to values of shape
    ``(k, m)``; the result has shape ``(k,)``.  Panels are bisected until a
    24-point and a 48-point rule agree to ``tol`` relative to the running
    magnitude of the integral.
    """

    def rule(nodes, lo_, hi_):
        x, w = nodes
        mid, half = 0.5 * (lo_ + hi_), 0.5 * (hi_ - lo_)
        vals = np.atleast_2d(g(mid + half * x))
        return half * (vals @ w)

    total = rule(_GL_HI, lo, hi)
    scale = max(1.0, float(np.max(np.abs(total))))
    stack = [(lo, hi, 0)]
    acc = 0.0
    while stack:
        a_, b_, depth = stack.pop()
        coarse = rule(_GL_LO, a_, b_)
        fine = rule(_GL_HI, a_, b_)
        if np.max(np.abs(fine - coarse)) <= tol * scale:
            acc = acc + fine
            continue
        if depth >= max_depth:
            raise QuadratureFailure("adaptive quadrature did not converge")
        m = 0.5 * (a_ + b_)
        stack.append((m, b_, depth + 1))
        stack.append((a_, m, depth + 1))
    return np.asarray(acc)


def _cont_sqrt(w: np.ndarray, m: complex) -> np.ndarray:
    # continuous square root along a straight segment of w-values missing 0
    return np.sqrt(m) * np.sqrt(w / m)


def _segment_clearance(x0, x1, point) -> float:
    d = x1 - x0
    if d == 0:
        return abs(point - x0)
    s = ((point - x0) * np.conj(d)).real / abs(d) ** 2
    s = min(1.0, max(0.0, s))
    return abs(point - (x0 + s * d))


# -- cut integrals -----------------------------------------------------------------
def _cut_integrals(ej, ek, em, tol):
    """Integrals of dx/y, x dx/y and y dx along the cut from ej to ek."""
    m = 0.5 * (ej + ek) - em
    d = ek - ej

    def g(t):
        x = ej + d * (1 - np.cos(t)) / 2
        S = _cont_sqrt(x - em, m)
        sin = np.sin(t)
        return np.vstack([1.0 / (1j * S), x / (1j * S), 1j * d * d * (sin * sin / 4) * S])

    return adaptive_quad(g, 0.0, math.pi, tol)


@dataclass(frozen=True)
class PeriodData:
    """Periods, quasi-periods and central charges of a curve.

    ``omega_i = oint dx/2y``, ``eta_i = -oint x dx/2y`` and
    ``z_i = oint y dx`` over the cycle basis named by ``cycle_basis_id``.
    """

    omega1: complex
    omega2: complex
    eta1: complex
    eta2: complex
    z1: complex
    z2: complex
    cycle_basis_id: str
    roots: tuple
    legendre_residual: float

    @property
    def omega(self) -> np.ndarray:
        return np.array([self.omega1, self.omega2])

    @property
    def eta(self) -> np.ndarray:
        return np.array([self.eta1, self.eta2])

    @property
    def z(self) -> np.ndarray:
        return np.array([self.z1, self.z2])


def complete_periods(curve: Curve, roots: Optional[np.ndarray] = None,
                     tol: float = 1e-14) -> PeriodData:
    """Periods of ``curve`` in the documented cycle basis.

    Parameters
    ----------
    curve : Curve
    roots : ndarray, optional
        Explicit ordered root triple (used to continue a basis to nearby
        curves); defaults to :meth:`Curve.roots`.

    Raises
    ------
    DegenerateCurve
        If the discriminant vanishes.
    QuadratureFailure
        If quadrature fails or the Legendre relation cannot be matched.
    """
    curve.validate()
    e = curve.roots() if roots is None else np.asarray(roots, dtype=complex)
    c1 = _cut_integrals(e[0], e[1], e[2], tol)
    c2 = _cut_integrals(e[1], e[2], e[0], tol)
    # (omega, eta, z) per cycle
    g1 = np.array([c1[0], -c1[1], 2 * c1[2]])
    g2 = np.array([c2[0], -c2[1], 2 * c2[2]])
    w1 = g1[0]
    if w1.real < 0 or (abs(w1.real) <= 1e-12 * abs(w1) and w1.imag < 0):
        g1 = -g1
    leg = g2[0] * g1[1] - g1[0] * g2[1]
    if abs(leg + TWO_PI_I) < abs(leg - TWO_PI_I):
        g2 = -g2
        leg = -leg
    residual = abs(leg - TWO_PI_I)
    if residual > 1e-6:
        raise QuadratureFailure(f"Legendre relation off by {residual:.3g}")
    return PeriodData(
        omega1=complex(g1[0]), omega2=complex(g2[0]),
        eta1=complex(g1[1]), eta2=complex(g2[1]),
        z1=complex(g1[2]), z2=complex(g2[2]),
        cycle_basis_id=CYCLE_BASIS_ID, roots=tuple(complex(r) for r in e),
        legendre_residual=float(residual),
    )


def legendre_residual(curve: Curve) -> float:
    """``|omega_2 eta_1 - omega_1 eta_2 - 2 pi i|``."""
    return complete_periods(curve).legendre_residual


def continued_periods(curve: Curve, reference: PeriodData) -> PeriodData:
    """Periods of a nearby curve continued from ``reference``.

    Roots are matched to the reference roots by proximity and each cycle's
    orientation is chosen to keep its period closest to the reference value,
    so the result varies smoothly with ``(a, b)``.
    """
    roots = track_roots(np.array(reference.roots), curve.a, curve.b)
    pd = complete_periods(curve, roots=roots)
    s1 = 1.0 if abs(pd.omega1 - reference.omega1) <= abs(pd.omega1 + reference.omega1) else -1.0
    s2 = 1.0 if abs(pd.omega2 - reference.omega2) <= abs(pd.omega2 + reference.omega2) else -1.0
    leg = (s2 * pd.omega2) * (s1 * pd.eta1) - (s1 * pd.omega1) * (s2 * pd.eta2)
    return PeriodData(
        omega1=s1 * pd.omega1, omega2=s2 * pd.omega2, eta1=s1 * pd.eta1, eta2=s2 * pd.eta2,
        z1=s1 * pd.z1, z2=s2 * pd.z2, cycle_basis_id=reference.cycle_basis_id + ";continued",
        roots=pd.roots, legendre_residual=float(abs(leg - TWO_PI_I)),
    )


def period_jacobian(curve: Curve, step: float = 1e-5) -> np.ndarray:
    """Finite-difference Jacobian ``d(z_1, z_2)/d(a, b)`` (shape ``(2, 2)``)."""
    base = complete_periods(curve)
    offsets = (-2.0, -1.0, 1.0, 2.0)
    weights = (1 / 12, -8 / 12, 8 / 12, -1 / 12)
    cols = []
    for da, db in ((1.0, 0.0), (0.0, 1.0)):
        acc = np.zeros(2, dtype=complex)
        for o, w in zip(offsets, weights):
            pd = continued_periods(Curve(curve.a + o * step * da, curve.b + o * step * db), base)
            acc += w * pd.z
        cols.append(acc / step)
    return np.stack(cols, axis=1)


def period_jacobian_residual(curve: Curve, step: float = 1e-5) -> float:
    """Largest of ``|dz_i/da + eta_i|`` and ``|dz_i/db - omega_i|``."""
    pd = complete_periods(curve)
    jac = period_jacobian(curve, step)
    return float(max(np.max(np.abs(jac[:, 0] + pd.eta)), np.max(np.abs(jac[:, 1] - pd.omega))))


# -- Abel integrals ----------------------------------------------------------------
def _check_on_curve(curve: Curve, q, p, tol=1e-10):
    if curve.on_curve_residual(q, p) > tol:
        raise OffCurve(f"p^2 - (q^3 + a q + b) = {p * p - curve.f(q)}")


def path_integrals(curve: Curve, x0, y0, x1, tol: float = 1e-14):
    """Integrals from the on-curve point ``(x0, y0)`` to the point above ``x1``.

    The path is the straight segment from ``x0`` to ``x1`` with ``y``
    continued from ``y0``.

    Returns
    -------
    (ndarray, complex)
        ``(int dx/y, int x dx/y, int y dx)`` and the continued value of ``y``
        at ``x1``.
    """
    curve.validate()
    _check_on_curve(curve, x0, y0)
    e = curve.roots()
    scale = max(1.0, abs(x0), abs(x1))
    for r in e:
        if _segment_clearance(x0, x1, r) <= 1e-9 * scale:
            raise PathThroughBranchPoint(f"segment passes through branch point {r}")
    xm = 0.5 * (x0 + x1)
    mids = [xm - r for r in e]

    def y_of(x):
        out = np.ones_like(x, dtype=complex)
        for r, m in zip(e, mids):
            out = out * _cont_sqrt(x - r, m)
        return out

    sign = 1.0 if abs(y_of(np.array([x0]))[0] - y0) <= abs(y_of(np.array([x0]))[0] + y0) else -1.0
    d = x1 - x0

    def g(s):
        x = x0 + d * s
        y = sign * y_of(x)
        return np.vstack([d / y, d * x / y, d * y])

    vals = adaptive_quad(g, 0.0, 1.0, tol)
    y1 = complex(sign * y_of(np.array([x1]))[0])
    return vals, y1


def _base_root(curve: Curve, q) -> complex:
    e = curve.roots()
    dist = np.abs(e - q)
    return complex(e[int(np.argmin(dist))])


def branch_integrals(curve: Curve, e, q, p, tol: float = 1e-14) -> np.ndarray:
    """Integrals of ``dx/y, x dx/y, y dx`` from the branch point ``e`` to ``(q, p)``.

    The path is the straight segment from ``e`` to ``q`` with the branch of
    ``y`` ending at ``p``.
    """
    roots = curve.roots()
    others = [r for r in roots if abs(r - e) > 1e-12 * max(1.0, abs(e))]
    if len(others) != 2:
        raise PathThroughBranchPoint("base point is not a simple root")
    scale = max(1.0, abs(q), abs(e))
    if abs(q - e) <= 1e-12 * scale:
        raise PathThroughBranchPoint("(q, p) is a branch point")
    for r in others:
        if _segment_clearance(e, q, r) <= 1e-9 * scale:
            raise PathThroughBranchPoint(f"path passes through branch point {r}")
    d = q - e
    mids = [q - r for r in others]

    def G(x):
        return _cont_sqrt(x - others[0], mids[0]) * _cont_sqrt(x - others[1], mids[1])

    sq = np.sqrt(d)
    y_end = sq * G(np.array([q]))[0]
    s = 1.0 if abs(y_end - p) <= abs(y_end + p) else -1.0
    sq = s * sq

    def g(u):
        x = e + d * u * u
        Gx = G(x)
        return np.vstack([2 * sq / Gx, 2 * sq * x / Gx, 2 * sq * d * u * u * Gx])

    return adaptive_quad(g, 0.0, 1.0, tol)


def raw_theta(curve: Curve, q, p, r, base_point) -> np.ndarray:
    """``(theta_a, theta_b)`` on the path through ``base_point`` (no checks on the path class)."""
    i0, i1, _ = branch_integrals(curve, complex(base_point), complex(q), complex(p))
    return np.array([-0.5 * i0, 0.5 * i1 - complex(r)])


@dataclass(frozen=True)
class ThetaPair:
    """Fibre coordinates of an on-curve point.

    ``theta_a``, ``theta_b`` are the raw path integrals; ``theta1``,
    ``theta2`` are the lattice-chart values ``-eta_i theta_a + omega_i
    theta_b`` reduced to imaginary part in ``(-pi, pi]``; ``lift`` keeps the
    unreduced values.
    """

    theta_a: complex
    theta_b: complex
    theta1: complex
    theta2: complex
    lift: tuple
    base_point: complex
    path: str


def reduce_mod_2pi_i(value: complex) -> complex:
    k = round(value.imag / (2 * math.pi))
    out = value - 2j * math.pi * k
    if out.imag <= -math.pi:
        out += 2j * math.pi
    return complex(out)


def abel_theta(curve: Curve, q, p, r, periods: Optional[PeriodData] = None,
               base_point=None) -> ThetaPair:
    """Fibre coordinates ``theta_a, theta_b`` and their lattice-chart values.

    ``theta_a = -1/4 int dx/y`` and ``theta_b = 1/4 int x dx/y - r`` along
    the path from ``(q, -p)`` to the branch point nearest to ``q`` and back
    to ``(q, p)`` on the other sheet; the integral is twice the integral from
    that branch point to ``(q, p)``.

    Raises
    ------
    OffCurve
        If ``p^2 != q^3 + a q + b``.
    PathThroughBranchPoint
        If ``(q, p)`` is a branch point or the path meets another one.
    """
    q, p, r = complex(q), complex(p), complex(r)
    curve.validate()
    _check_on_curve(curve, q, p)
    if abs(p) <= 1e-12 * max(1.0, abs(q)) ** 1.5:
        raise PathThroughBranchPoint("(q, p) is a branch point")
    e = _base_root(curve, q) if base_point is None else complex(base_point)
    i0, i1, _ = branch_integrals(curve, e, q, p)
    theta_a = -0.5 * i0
    theta_b = 0.5 * i1 - r
    pd = complete_periods(curve) if periods is None else periods
    lift = -pd.eta * theta_a + pd.omega * theta_b
    return ThetaPair(
        theta_a=complex(theta_a), theta_b=complex(theta_b),
        theta1=reduce_mod_2pi_i(complex(lift[0])), theta2=reduce_mod_2pi_i(complex(lift[1])),
        lift=(complex(lift[0]), complex(lift[1])), base_point=e,
        path=f"(q,-p)->branch point {e:.6g}->(q,p) along straight segments",
    )


def u_integral(curve: Curve, q, p, base_point=None) -> complex:
    """``U = 1/2 int y dx`` from ``(q, -p)`` to ``(q, p)`` on the abel_theta path."""
    q, p = complex(q), complex(p)
    curve.validate()
    _check_on_curve(curve, q, p)
    e = _base_root(curve, q) if base_point is None else complex(base_point)
    if abs(q - e) <= 1e-12 * max(1.0, abs(q)):
        return 0j
    return complex(branch_integrals(curve, e, q, p)[2])
