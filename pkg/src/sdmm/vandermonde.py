"""Norm and condition bounds for Vandermonde matrices built on roots of unity.

A subset of m distinct n-th roots of unity defines W[i, j] = alpha_i^j with
j = 0..m-1 (rows follow the points).  Closed-form bounds on ||W||_2, ||W^-1||
and cond_2(W) are provided in two regimes, together with an exhaustive
numerical verifier and a Lagrange-style decomposition of the inverse.
"""

import csv
import itertools
from dataclasses import dataclass
from math import factorial, sqrt

import numpy as np

from .numerics import cond_2, unit_root_power, vandermonde_matrix


def Pi(m: int) -> int:
    """Product of the first m terms of 1, 1, 2, 2, 3, 3, ...

    >>> [Pi(m) for m in range(7)]
    [1, 1, 1, 2, 4, 12, 36]
    """
    if m < 0:
        raise ValueError(f"need m >= 0, got {m}")
    k = m // 2
    out = factorial(k) ** 2
    return out * (k + 1) if m % 2 else out


def bound_w_norm(n: int) -> float:
    """||W||_2 <= sqrt(n) for any submatrix W of the n-point evaluation matrix."""
    return sqrt(n)


def bound_inv_large(n: int, d: int) -> float:
    """||W^-1||_2 <= n^(d + 3/2) / d! where d = n - m roots are left out."""
    return n ** (d + 1.5) / factorial(d)


def bound_cond_large(n: int, d: int) -> float:
    """cond_2(W) <= n^(d + 2) / d! in the few-missing-roots regime."""
    return n ** (d + 2) / factorial(d)


def bound_inv_small_2(n: int, m: int) -> float:
    """||W^-1||_2 <= sqrt(m) n^(m-1) / (2^(m-1) Pi(m-1)) for m-point subsets."""
    return sqrt(m) * n ** (m - 1) / (2 ** (m - 1) * Pi(m - 1))


def bound_inv_small_fro(n: int, m: int) -> float:
    """||W^-1||_F <= m n^(m-1) / (2^(m-1) Pi(m-1)) for m-point subsets.

    >>> bound_inv_small_fro(9, 3)
    60.75
    """
    return m * n ** (m - 1) / (2 ** (m - 1) * Pi(m - 1))


def subset_vandermonde(n: int, indices) -> np.ndarray:
    """W for the points omega_n^i over 1-based indices, exponents 0..m-1."""
    idx = tuple(indices)
    if len(set(idx)) != len(idx):
        raise ValueError("indices must be distinct")
    points = unit_root_power(n, np.asarray(idx))
    return vandermonde_matrix(points, len(idx))


def beta_points_large(m: int, n: int) -> np.ndarray:
    """m auxiliary points omega_2mn * omega_m^(i-1); never n-th roots of unity."""
    return unit_root_power(2 * m * n, 1) * unit_root_power(m, np.arange(m))


def beta_points_small(m: int) -> np.ndarray:
    """The m-th roots of unity omega_m^(i-1) as auxiliary points."""
    return unit_root_power(m, np.arange(m))


def decompose_inverse(points, betas):
    """Factor the inverse of a Vandermonde matrix as W^-1 = B^-1 C A.

    ``points`` are the m distinct nodes of W (rows-as-points convention) and
    ``betas`` m distinct auxiliary points disjoint from them.  A is diagonal
    with the inverse node-difference products, C holds the cross products
    C[i, j] = prod(betas[i] - points[j'], j' != j), and B is the plain
    Vandermonde matrix at the betas.
    """
    alpha = np.asarray(points)
    beta = np.asarray(betas)
    m = alpha.shape[0]
    if beta.shape[0] != m:
        raise ValueError("need as many auxiliary points as nodes")
    if np.min(np.abs(beta[:, None] - alpha[None, :])) < 1e-12:
        raise ValueError("auxiliary points must be disjoint from the nodes")
    diff = alpha[:, None] - alpha[None, :]
    np.fill_diagonal(diff, 1.0)
    a = np.diag(1.0 / np.prod(diff, axis=1))
    cross = beta[:, None] - alpha[None, :]
    full = np.prod(cross, axis=1, keepdims=True)
    c = full / cross
    b = vandermonde_matrix(beta, m)
    return b, c, a


@dataclass(frozen=True)
class BoundReport:
    """Measured norms of one root subset against every applicable bound."""

    n: int
    m: int
    subset: tuple
    w_norm: float
    inv_norm_2: float
    inv_norm_fro: float
    cond: float

    @property
    def d(self) -> int:
        return self.n - self.m

    @property
    def ok(self) -> bool:
        slack = 1 + 1e-9
        return (
            self.w_norm <= bound_w_norm(self.n) * slack
            and self.inv_norm_2 <= bound_inv_large(self.n, self.d) * slack
            and self.inv_norm_2 <= bound_inv_small_2(self.n, self.m) * slack
            and self.inv_norm_fro <= bound_inv_small_fro(self.n, self.m) * slack
            and self.cond <= bound_cond_large(self.n, self.d) * slack
        )


def measure_subset(n: int, indices) -> BoundReport:
    """Exact norms of W and W^-1 for one subset of n-th roots."""
    w = subset_vandermonde(n, indices)
    w_inv = np.linalg.inv(w)
    return BoundReport(
        n=n,
        m=w.shape[0],
        subset=tuple(indices),
        w_norm=float(np.linalg.norm(w, 2)),
        inv_norm_2=float(np.linalg.norm(w_inv, 2)),
        inv_norm_fro=float(np.linalg.norm(w_inv)),
        cond=cond_2(w),
    )


def verify_bounds_exhaustive(n_max: int = 14):
    """Measure every subset of every root count n <= n_max against the bounds.

    Returns the full list of reports; filter on ``report.ok`` for violations.
    Work grows as 2^n, which is why the default caps at n = 14.
    """
    if n_max > 20:
        raise ValueError(f"n_max {n_max} is past the exhaustive-search cap")
    reports = []
    for n in range(1, n_max + 1):
        for m in range(1, n + 1):
            for subset in itertools.combinations(range(1, n + 1), m):
                reports.append(measure_subset(n, subset))
    return reports


def reports_to_csv(reports, path) -> None:
    """Write bound reports as CSV, one measured subset per row beside its bounds."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "n",
                "m",
                "d",
                "subset",
                "measured_w_norm",
                "bound_w_norm",
                "measured_inv_norm_2",
                "bound_inv_norm_2",
                "measured_inv_norm_fro",
                "bound_inv_norm_fro",
                "measured_cond",
                "bound_cond",
                "ok",
            ]
        )
        for r in reports:
            writer.writerow(
                [
                    r.n,
                    r.m,
                    r.d,
                    "-".join(map(str, r.subset)),
                    f"{r.w_norm:.12g}",
                    f"{bound_w_norm(r.n):.12g}",
                    f"{r.inv_norm_2:.12g}",
                    f"{min(bound_inv_large(r.n, r.d), bound_inv_small_2(r.n, r.m)):.12g}",
                    f"{r.inv_norm_fro:.12g}",
                    f"{bound_inv_small_fro(r.n, r.m):.12g}",
                    f"{r.cond:.12g}",
                    f"{bound_cond_large(r.n, r.d):.12g}",
                    int(r.ok),
                ]
            )
