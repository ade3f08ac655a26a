"""SL(2, R) matrices acting on the upper half-plane, taken up to sign."""

from __future__ import annotations

import math

import numpy as np

DET_TOL = 1e-10


class MobiusTransform:
    __slots__ = ("m",)

    def __init__(self, m, check: bool = True):
        m = np.array(m, dtype=float).reshape(2, 2)
        if check and abs(np.linalg.det(m) - 1.0) > DET_TOL * max(1.0, float(np.max(np.abs(m))) ** 2):
            raise ValueError(f"determinant {np.linalg.det(m)} is not 1")
        self.m = m

    def __repr__(self):
        (a, b), (c, d) = self.m
        return f"MobiusTransform([[{a!r}, {b!r}], [{c!r}, {d!r}]])"

    def __matmul__(self, other: "MobiusTransform") -> "MobiusTransform":
        return MobiusTransform(self.m @ other.m, check=False)

    def __neg__(self) -> "MobiusTransform":
        return MobiusTransform(-self.m, check=False)

    def __pow__(self, n: int) -> "MobiusTransform":
        base = self if n >= 0 else self.inverse()
        return MobiusTransform(np.linalg.matrix_power(base.m, abs(n)), check=False)

    def inverse(self) -> "MobiusTransform":
        (a, b), (c, d) = self.m
        return MobiusTransform([[d, -b], [-c, a]], check=False)

    def conjugate(self, g: "MobiusTransform") -> "MobiusTransform":
        """g M g^-1."""
        return g @ self @ g.inverse()

    @property
    def trace(self) -> float:
        return float(self.m[0, 0] + self.m[1, 1])

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.m))

    def is_hyperbolic(self) -> bool:
        return abs(self.trace) > 2.0

    def __call__(self, z: complex) -> complex:
        (a, b), (c, d) = self.m
        return (a * z + b) / (c * z + d)

    def positive(self) -> "MobiusTransform":
        """The sign representative with nonnegative trace."""
        return -self if self.trace < 0 else self

    def standardizer(self) -> "MobiusTransform":
        """A with A M A^-1 = diag(e^{l/2}, e^{-l/2}), l > 0, for hyperbolic M
        (sign normalized): the attracting fixed point goes to infinity and the
        repelling one to 0, so the axis is the imaginary axis traversed upward.
        """
        if not self.is_hyperbolic():
            raise ValueError("standardizer needs a hyperbolic element")
        m = self.positive().m
        (a, b), (c, d) = m
        t = a + d
        root = math.sqrt(t * t - 4.0)
        lam_big, lam_small = (t + root) / 2.0, (t - root) / 2.0
        cols = []
        for lam in (lam_big, lam_small):
            v1 = np.array([b, lam - a])
            v2 = np.array([lam - d, c])
            v = v1 if np.linalg.norm(v1) >= np.linalg.norm(v2) else v2
            cols.append(v / np.linalg.norm(v))
        v = np.column_stack(cols)
        det = np.linalg.det(v)
        if det < 0:
            v[:, 1] = -v[:, 1]
            det = -det
        v = v / math.sqrt(det)
        return MobiusTransform(np.linalg.inv(v), check=False)

    def fixed_points(self) -> tuple[complex | float, complex | float]:
        """(attracting, repelling) fixed points on the boundary for hyperbolic M;
        ``math.inf`` stands for infinity."""
        inv = self.standardizer().inverse()
        hi = inv.m[0, 0] / inv.m[1, 0] if inv.m[1, 0] != 0 else math.inf
        lo = inv.m[0, 1] / inv.m[1, 1] if inv.m[1, 1] != 0 else math.inf
        return hi, lo


def translation_length(mt: MobiusTransform) -> float:
    """2 arccosh(|tr| / 2) for hyperbolic elements, 0 otherwise."""
    t = abs(mt.trace)
    if t <= 2.0:
        return 0.0
    return 2.0 * math.acosh(t / 2.0)


def translation_lengths(traces: np.ndarray) -> np.ndarray:
    t = np.abs(np.asarray(traces, dtype=float))
    return np.where(t > 2.0, 2.0 * np.arccosh(np.maximum(t, 2.0) / 2.0), 0.0)


def projective_distance(a: MobiusTransform, b: MobiusTransform) -> float:
    """min(||A - B||, ||A + B||) in the Frobenius norm."""
    return float(min(np.linalg.norm(a.m - b.m), np.linalg.norm(a.m + b.m)))


def diagonal(length: float) -> MobiusTransform:
    """Translation by ``length`` along the imaginary axis."""
    h = length / 2.0
    return MobiusTransform([[math.exp(h), 0.0], [0.0, math.exp(-h)]], check=False)


def boost(length: float) -> MobiusTransform:
    """Translation by ``length`` along the geodesic from -1 to 1."""
    h = length / 2.0
    return MobiusTransform([[math.cosh(h), math.sinh(h)], [math.sinh(h), math.cosh(h)]], check=False)


ROTATE_PI = MobiusTransform([[0.0, 1.0], [-1.0, 0.0]], check=False)  # z -> -1/z


def upper_half_plane_distance(z: complex, w: complex) -> float:
    """cosh d = 1 + |z - w|^2 / (2 Im z Im w)."""
    return math.acosh(1.0 + abs(z - w) ** 2 / (2.0 * z.imag * w.imag))


def random_sl2(rng: np.random.Generator, scale: float = 1.0) -> MobiusTransform:
    """A random element of SL(2, R) (entries of order ``scale``)."""
    while True:
        m = rng.normal(scale=scale, size=(2, 2))
        det = np.linalg.det(m)
        if abs(det) > 1e-3:
            if det < 0:
                m[:, 0] = -m[:, 0]
                det = -det
            return MobiusTransform(m / math.sqrt(det))
