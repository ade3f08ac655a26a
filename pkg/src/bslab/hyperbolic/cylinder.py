"""Periodized heat sums on hyperbolic cylinders and their thin parts.

Points are described in Fermi coordinates (rho, s) around the core geodesic:
rho is the distance to the axis.  The cylinder group is generated by a
translation of length tau along the axis.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import integrate, special

from bslab.hyperbolic.heat import HeatQuery, HyperbolicCylinder, heat_kernel_array

BISECTION_TOL = 1e-10


def cylinder_orbit_distance(c: HyperbolicCylinder, rho, n):
    """d(x, gamma^n x) for x at distance rho from the axis.

    cosh d = 1 + cosh(rho)^2 (cosh(n tau) - 1), written as
    sinh(d/2) = cosh(rho) sinh(|n| tau / 2) for accuracy near 0.
    """
    rho = np.asarray(rho, dtype=float)
    n = np.abs(np.asarray(n, dtype=float))
    out = 2.0 * np.arcsinh(np.cosh(rho) * np.sinh(n * c.tau / 2.0))
    return float(out) if out.ndim == 0 else out


def _tail_envelope(q: HeatQuery, s):
    """Decreasing majorant of p_t on [sqrt(2t), inf).

    d = 3: rho / sinh(rho) <= 1.  d = 2: cosh s - cosh rho >= sinh(rho)(s - rho)
    and (rho + w)^2 >= rho^2 + w^2 turn the integral representation into two
    Gamma integrals.
    """
    t = q.t
    s = np.asarray(s, dtype=float)
    if q.d == 3:
        return (4.0 * math.pi * t) ** -1.5 * np.exp(-t - s * s / (4.0 * t))
    k = math.sqrt(2.0) * math.exp(-t / 4.0) / (4.0 * math.pi * t) ** 1.5
    a = 0.5 * (4.0 * t) ** 0.25 * math.gamma(0.25)
    b = 0.5 * (4.0 * t) ** 0.75 * math.gamma(0.75)
    with np.errstate(over="ignore"):
        return k * np.exp(-s * s / (4.0 * t) - 0.5 * np.log(np.sinh(s))) * (s * a + b)


def _envelope_integral(q: HeatQuery, x: float) -> float:
    """Integral of the envelope over [x, inf)."""
    t = q.t
    if q.d == 3:
        return (4.0 * math.pi * t) ** -1.5 * math.exp(-t) * math.sqrt(math.pi * t) * special.erfc(x / (2.0 * math.sqrt(t)))
    val, _ = integrate.quad(lambda s: float(_tail_envelope(q, s)), x, np.inf, epsabs=1e-300, epsrel=1e-10, limit=200)
    return val


def tail_bound(c: HyperbolicCylinder, q: HeatQuery, n_star: int) -> float:
    """Bound on 2 sum_{n > n_star} p_t(d(x, gamma^n x)), uniform in x.

    Uses d_n >= n tau, monotonicity of the envelope past sqrt(2t), and
    sum_{n > N} E(n tau) <= (1/tau) int_{N tau}^inf E.
    """
    x = n_star * c.tau
    if x < math.sqrt(2.0 * q.t):
        return math.inf
    return 2.0 * _envelope_integral(q, x) / c.tau


def truncation_index(c: HyperbolicCylinder, q: HeatQuery) -> int:
    """Smallest n* whose certified tail is at most q.tail_tol."""
    lo = max(1, math.ceil(math.sqrt(2.0 * q.t) / c.tau))
    if tail_bound(c, q, lo) <= q.tail_tol:
        return lo
    hi = 2 * lo
    while tail_bound(c, q, hi) > q.tail_tol:
        lo, hi = hi, 2 * hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tail_bound(c, q, mid) <= q.tail_tol:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class PeriodizedValue:
    value: float
    n_star: int
    tail: float


def f_t_cylinder_detail(c: HyperbolicCylinder, rho, q: HeatQuery) -> tuple[np.ndarray, int, float]:
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    n_star = truncation_index(c, q)
    n = np.arange(1, n_star + 1)
    dist = cylinder_orbit_distance(c, rho[:, None], n[None, :])
    vals = 2.0 * heat_kernel_array(q, dist).sum(axis=1)
    return vals, n_star, tail_bound(c, q, n_star)


def f_t_cylinder(c: HyperbolicCylinder, rho, q: HeatQuery):
    """f_t(x) = sum over gamma != 1 of p_t(x, gamma x) at distance rho from the axis.

    Truncated at n* with a certified tail below q.tail_tol; scalar input gives
    a float, array input an array.
    """
    vals, _, _ = f_t_cylinder_detail(c, rho, q)
    return float(vals[0]) if np.ndim(rho) == 0 else vals


def f_t_value(c: HyperbolicCylinder, rho: float, q: HeatQuery) -> PeriodizedValue:
    vals, n_star, tail = f_t_cylinder_detail(c, rho, q)
    return PeriodizedValue(float(vals[0]), n_star, tail)


def f_t_direct(c: HyperbolicCylinder, rho: float, q: HeatQuery, n_max: int) -> float:
    """Plain sum over n in [-n_max, n_max] minus {0}."""
    n = np.concatenate([np.arange(-n_max, 0), np.arange(1, n_max + 1)])
    return float(heat_kernel_array(q, cylinder_orbit_distance(c, rho, n)).sum())


# ---------------------------------------------------------------------------
# thin part


@dataclass(frozen=True)
class ThinPartReport:
    tau: float
    t: float
    d: int
    epsilon: float
    rho_thin: float
    vol_thin_per_period: float
    integral_f_over_thin: float
    ratio: float
    n_star: int

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def thin_radius(c: HyperbolicCylinder, epsilon: float) -> float:
    """rho with d(x, gamma x) = epsilon, by bisection to 1e-10."""
    if c.tau >= epsilon:
        raise ValueError(f"no thin part: tau = {c.tau} >= epsilon = {epsilon}")
    lo, hi = 0.0, 1.0
    while cylinder_orbit_distance(c, hi, 1) < epsilon:
        hi *= 2.0
    while hi - lo > BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        if cylinder_orbit_distance(c, mid, 1) < epsilon:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def thin_volume(c: HyperbolicCylinder, rho_thin: float, d: int = 2) -> float:
    """Volume of {rho <= rho_thin} per period.

    d = 2: 2 tau sinh(rho_thin); d = 3: pi tau sinh(rho_thin)^2.
    """
    if d == 2:
        return 2.0 * c.tau * math.sinh(rho_thin)
    return math.pi * c.tau * math.sinh(rho_thin) ** 2


def _radial_weight(d: int, rho):
    # d vol = cosh(rho) d rho ds (two sides) or sinh cosh d rho dtheta ds
    return 2.0 * np.cosh(rho) if d == 2 else 2.0 * math.pi * np.sinh(rho) * np.cosh(rho)


def thin_part_report(c: HyperbolicCylinder, q: HeatQuery, nodes: int = 48) -> ThinPartReport:
    """Integral of f_t over the epsilon-thin part against its volume, per period."""
    rho_thin = thin_radius(c, q.epsilon)
    vol = thin_volume(c, rho_thin, q.d)
    x, w = np.polynomial.legendre.leggauss(nodes)
    rho = 0.5 * rho_thin * (x + 1.0)
    vals, n_star, _ = f_t_cylinder_detail(c, rho, q)
    integral = c.tau * 0.5 * rho_thin * float(np.sum(w * vals * _radial_weight(q.d, rho)))
    return ThinPartReport(tau=c.tau, t=q.t, d=q.d, epsilon=q.epsilon, rho_thin=rho_thin,
                          vol_thin_per_period=vol, integral_f_over_thin=integral,
                          ratio=integral / vol, n_star=n_star)


def monte_carlo_thin_area(c: HyperbolicCylinder, rho_thin: float, samples: int, rng: np.random.Generator) -> float:
    """Area of the thin part of a 2d cylinder estimated in the upper half-plane.

    A fundamental domain is {1 <= |z| < e^tau}; the thin part is the sector
    of points within rho_thin of the imaginary axis.  The integrand does not
    depend on log r, so only the angle is sampled.
    """
    theta = rng.uniform(0.0, math.pi, samples)
    # dx dy / y^2 = d(log r) dtheta / sin^2 theta, and the log r range has length tau
    dens = 1.0 / np.sin(theta) ** 2
    # distance to the imaginary axis: sinh(rho) = |x| / y = |cot theta|
    inside = np.abs(np.cos(theta)) / np.sin(theta) <= math.sinh(rho_thin)
    return float(c.tau * math.pi * np.mean(dens * inside))
