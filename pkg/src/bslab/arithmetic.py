"""Mahler measures of monic integer polynomials, bounded-measure censuses,
and growth of resultants against x^n - 1.

Coefficients are listed from the leading term down: ``[1, a_1, ..., a_n]``
is x^n + a_1 x^(n-1) + ... + a_n.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from bslab.exact import integer_det, matmul

MAX_CENSUS_DEGREE = 10
MAX_CENSUS_BOX = 2 * 10**9


@dataclass(frozen=True)
class IntPolynomial:
    coefficients: tuple[int, ...]

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coefficients)
        if not coeffs or all(c == 0 for c in coeffs):
            raise ValueError("zero polynomial")
        if coeffs[0] != 1:
            raise ValueError(f"polynomial must be monic, leading coefficient is {coeffs[0]}")
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def parse(cls, text: str) -> "IntPolynomial":
        return cls(tuple(int(x) for x in text.replace(",", " ").split()))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __mul__(self, other: "IntPolynomial") -> "IntPolynomial":
        a, b = self.coefficients, other.coefficients
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                out[i + j] += x * y
        return IntPolynomial(tuple(out))

    def __call__(self, x):
        return np.polyval(np.array(self.coefficients, dtype=complex), x)

    def roots(self) -> np.ndarray:
        return polish_roots(self.coefficients, np.roots(np.array(self.coefficients, dtype=float)))

    def reversed(self) -> "IntPolynomial":
        """x^n p(1/x), with the sign chosen so that it stays monic.  Defined
        when p(0) = +-1."""
        rev = self.coefficients[::-1]
        if rev[0] not in (1, -1):
            raise ValueError("reciprocal is monic only when p(0) = +-1")
        return IntPolynomial(tuple(c * rev[0] for c in rev))

    def __str__(self) -> str:
        return " ".join(str(c) for c in self.coefficients)


def polish_roots(coefficients: Sequence[int], roots: np.ndarray) -> np.ndarray:
    """One Newton step per root, kept only where it reduces |p|."""
    c = np.array(coefficients, dtype=complex)
    dc = np.polyder(c) if len(c) > 1 else np.zeros(1, dtype=complex)
    roots = np.asarray(roots, dtype=complex)
    pv = np.polyval(c, roots)
    dv = np.polyval(dc, roots)
    safe = np.abs(dv) > 1e-300
    step = np.where(safe, pv / np.where(safe, dv, 1.0), 0.0)
    cand = roots - step
    better = np.abs(np.polyval(c, cand)) < np.abs(pv)
    return np.where(better, cand, roots)


def is_kronecker(coefficients: Sequence[int]) -> bool:
    """Exact test that every root is 0 or a root of unity.

    Strips powers of x, then iterates the integer Graeffe map
    q(x) -> +-q(sqrt x) q(-sqrt x), which squares the roots.  Roots in the
    closed unit disk keep coefficients within binomial bounds, so the orbit
    is finite and must cycle; otherwise some coefficient breaks the bound.
    """
    q = list(coefficients)
    while len(q) > 1 and q[-1] == 0:
        q.pop()
    n = len(q) - 1
    if n == 0:
        return True
    bounds = [math.comb(n, i) for i in range(n + 1)]
    seen = set()
    while True:
        if any(abs(c) > b for c, b in zip(q, bounds)):
            return False
        key = tuple(q)
        if key in seen:
            return True
        seen.add(key)
        q = _graeffe(q)


def _graeffe(q: list[int]) -> list[int]:
    n = len(q) - 1
    # ascending-order coefficients make the parity split easy
    a = q[::-1]
    neg = [c if i % 2 == 0 else -c for i, c in enumerate(a)]
    prod = [0] * (2 * n + 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(neg):
                prod[i + j] += x * y
    even = prod[0::2]
    sign = -1 if n % 2 else 1
    return [sign * c for c in even[::-1]]


def _strip(a: list) -> list:
    i = 0
    while i < len(a) - 1 and a[i] == 0:
        i += 1
    return a[i:]


def _divmod_poly(a: list, b: list) -> tuple[list, list]:
    """Division of descending Fraction coefficient lists."""
    a = list(a)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    while len(a) >= len(b) and any(a):
        f = a[0] / b[0]
        q[len(q) - (len(a) - len(b) + 1)] = f
        for i in range(len(b)):
            a[i] -= f * b[i]
        a = a[1:]
    return q, _strip(a) if a else [Fraction(0)]


def _gcd_poly(a: list, b: list) -> list:
    while any(b):
        _, r = _divmod_poly(a, b)
        a, b = b, r
    return [c / a[0] for c in a]


def _deriv(a: list) -> list:
    n = len(a) - 1
    return [c * (n - i) for i, c in enumerate(a[:-1])] or [Fraction(0)]


def _sub(a: list, b: list) -> list:
    width = max(len(a), len(b))
    a = [Fraction(0)] * (width - len(a)) + a
    b = [Fraction(0)] * (width - len(b)) + b
    return _strip([x - y for x, y in zip(a, b)])


def squarefree_factors(coefficients: Sequence[int]) -> list[tuple[tuple[int, ...], int]]:
    """Yun's decomposition p = prod f_i^i into squarefree monic integer factors."""
    f = [Fraction(c) for c in coefficients]
    if len(f) == 1:
        return []
    out = []
    a0 = _gcd_poly(f, _deriv(f))
    b, _ = _divmod_poly(f, a0)
    c, _ = _divmod_poly(_deriv(f), a0)
    d = _sub(c, _deriv(b))
    i = 1
    while len(b) > 1:
        a = _gcd_poly(b, d) if any(d) else b
        if len(a) > 1:
            # monic factors of a monic integer polynomial have integer coefficients
            out.append((tuple(int(x) for x in a), i))
        b, _ = _divmod_poly(b, a)
        c, _ = _divmod_poly(d, a)
        d = _sub(c, _deriv(b))
        i += 1
    return out


def mahler_measure(p: IntPolynomial) -> float:
    """Product of max(1, |alpha|) over the complex roots of p.

    Repeated roots scatter by eps**(1/k) in floating point, so p is first
    split into squarefree factors; each factor gets the exact Kronecker test
    (measure 1) or a root-finder evaluation with simple roots only.
    """
    total = 1.0
    for coeffs, mult in squarefree_factors(p.coefficients):
        if is_kronecker(coeffs):
            continue
        roots = polish_roots(coeffs, np.roots(np.array(coeffs, dtype=float)))
        total *= max(float(np.prod(np.maximum(1.0, np.abs(roots)))), 1.0) ** mult
    return total


def _measures_batch(coeffs: np.ndarray) -> np.ndarray:
    """Mahler measures of many monic polynomials of one degree (rows are
    [a_1, ..., a_n])."""
    k, n = coeffs.shape
    comp = np.zeros((k, n, n))
    comp[:, 0, :] = -coeffs
    if n > 1:
        comp[:, np.arange(1, n), np.arange(n - 1)] = 1.0
    roots = np.linalg.eigvals(comp)
    full = np.hstack([np.ones((k, 1)), coeffs]).astype(complex)
    # one vectorized Newton step per root
    pv = np.zeros(roots.shape, dtype=complex)
    dv = np.zeros(roots.shape, dtype=complex)
    for j in range(n + 1):
        dv = dv * roots + pv
        pv = pv * roots + full[:, j:j + 1]
    safe = np.abs(dv) > 1e-300
    cand = roots - np.where(safe, pv / np.where(safe, dv, 1.0), 0.0)
    pc = np.zeros(roots.shape, dtype=complex)
    for j in range(n + 1):
        pc = pc * cand + full[:, j:j + 1]
    roots = np.where(np.abs(pc) < np.abs(pv), cand, roots)
    return np.prod(np.maximum(1.0, np.abs(roots)), axis=1)


@dataclass(frozen=True)
class CensusQuery:
    degree: int
    threshold: float

    def __post_init__(self):
        if self.degree < 1:
            raise ValueError("degree must be positive")
        if self.degree > MAX_CENSUS_DEGREE:
            raise ValueError(f"degree {self.degree} exceeds the census guard {MAX_CENSUS_DEGREE}")
        if self.threshold < 1:
            raise ValueError("threshold must be at least 1")

    def box(self) -> list[int]:
        """Coefficient bounds |a_i| <= binomial(n, i) * theta."""
        n, t = self.degree, self.threshold
        return [math.floor(math.comb(n, i) * t + 1e-9) for i in range(1, n + 1)]


@dataclass
class CensusResult:
    query: CensusQuery
    polynomials: list[IntPolynomial]
    measures: list[float]
    box_size: int

    @property
    def count(self) -> int:
        return len(self.polynomials)

    @property
    def min_m_above_1(self) -> float | None:
        above = [m for m in self.measures if m > 1 + 1e-9]
        return min(above) if above else None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["coefficients", "mahler_measure"])
        for p, m in zip(self.polynomials, self.measures):
            w.writerow([str(p), repr(m)])
        return buf.getvalue()


def census_count_bound(n: int, theta: float) -> float:
    """theta ** (n (1 + 16 log log n / log n)); meaningful for n >= 3."""
    if n < 3:
        raise ValueError("bound is stated for n >= 3")
    return theta ** (n * (1 + 16 * math.log(math.log(n)) / math.log(n)))


def _power_sum_filter(rows: np.ndarray, n: int, theta: float) -> np.ndarray:
    """Keep rows whose Newton power sums obey |s_k| <= (n - 1) + theta^k.

    If the roots outside the unit circle have product <= theta then
    sum |alpha|^k <= (n - 1) + theta^k, so this never drops a census member.
    """
    s: list[np.ndarray] = []
    for k in range(1, 2 * n + 1):
        acc = np.zeros(len(rows), dtype=np.int64)
        for j in range(1, min(k, n + 1)):
            acc += rows[:, j - 1] * s[k - j - 1]
        if k <= n:
            acc += k * rows[:, k - 1]
        ok = np.abs(acc) <= (n - 1) + theta**k + 1e-9
        rows = rows[ok]
        s = [x[ok] for x in s] + [-acc[ok]]
        if not len(rows):
            break
    return rows


def _box_chunks(box: list[int]) -> Iterator[np.ndarray]:
    """Rows of the coefficient box, chunked over the leading two coefficients."""
    n = len(box)
    ranges = [np.arange(-b, b + 1) for b in box]
    head = min(2, n)
    tail = ranges[head:]
    if tail:
        grids = np.meshgrid(*tail, indexing="ij")
        tail_rows = np.stack([g.ravel() for g in grids], axis=1)
    else:
        tail_rows = np.zeros((1, 0), dtype=np.int64)
    for prefix in itertools.product(*ranges[:head]):
        pre = np.broadcast_to(np.array(prefix, dtype=np.int64), (len(tail_rows), head))
        yield np.hstack([pre, tail_rows]).astype(np.int64)


def census(q: CensusQuery) -> CensusResult:
    """All monic integer polynomials of degree n with Mahler measure <= theta."""
    n, theta = q.degree, q.threshold
    box = q.box()
    size = math.prod(2 * b + 1 for b in box)
    if size > MAX_CENSUS_BOX:
        raise ValueError(f"coefficient box of size {size} exceeds the census guard")
    found: list[np.ndarray] = []
    for chunk in _box_chunks(box):
        rows = _power_sum_filter(chunk, n, theta)
        if not len(rows):
            continue
        m = _measures_batch(rows.astype(float))
        # generous slack: exact classification happens per candidate below
        found.append(rows[m <= theta + 0.05])
    polys, measures = [], []
    cand = np.concatenate(found) if found else np.zeros((0, n), dtype=np.int64)
    for row in cand:
        p = IntPolynomial((1, *row.tolist()))
        m = mahler_measure(p)
        if m <= theta + 1e-9:
            polys.append(p)
            measures.append(m)
    order = sorted(range(len(polys)), key=lambda i: polys[i].coefficients)
    return CensusResult(q, [polys[i] for i in order], [measures[i] for i in order], size)


# ---------------------------------------------------------------------------
# resultants with x^n - 1


class CyclotomicVanishing(ValueError):
    def __init__(self, n: int):
        super().__init__(f"Res(p, t^{n} - 1) = 0: p vanishes at an {n}-th root of unity")
        self.n = n


def companion(p: IntPolynomial) -> list[list[int]]:
    n = p.degree
    c = [[0] * n for _ in range(n)]
    for j in range(n):
        c[0][j] = -p.coefficients[j + 1]
    for i in range(1, n):
        c[i][i - 1] = 1
    return c


def resultant_with_cyclic(p: IntPolynomial, n: int) -> int:
    """Res(p, t^n - 1) = det(C^n - I) for the companion matrix C (p monic)."""
    c = companion(p)
    power = [[int(i == j) for j in range(p.degree)] for i in range(p.degree)]
    for _ in range(n):
        power = matmul(power, c)
    return integer_det([[x - int(i == j) for j, x in enumerate(row)] for i, row in enumerate(power)])


@dataclass
class GrowthRate:
    polynomial: IntPolynomial
    rows: list[tuple[int, float, float]]  # (n, log|Res|, a_n)
    limit_estimate: float
    log_mahler: float

    @property
    def constant_k(self) -> float:
        """Smallest K with |a_n - log m| <= K / n over the computed range."""
        return max(n * abs(a - self.log_mahler) for n, _, a in self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "log_resultant", "a_n"])
        for n, lr, a in self.rows:
            w.writerow([n, repr(lr), repr(a)])
        return buf.getvalue()


def torsion_growth_rate(p: IntPolynomial, n_max: int) -> GrowthRate:
    """a_n = log|Res(p, t^n - 1)| / n for n = 1..n_max, in exact arithmetic
    up to the final logarithm."""
    if n_max < 1:
        raise ValueError("n_max must be positive")
    c = companion(p)
    d = p.degree
    power = [[int(i == j) for j in range(d)] for i in range(d)]
    rows = []
    for n in range(1, n_max + 1):
        power = matmul(power, c)
        res = integer_det([[x - int(i == j) for j, x in enumerate(row)] for i, row in enumerate(power)])
        if res == 0:
            raise CyclotomicVanishing(n)
        lr = math.log(abs(res))
        rows.append((n, lr, lr / n))
    return GrowthRate(p, rows, rows[-1][2], math.log(mahler_measure(p)))
