"""Noise-based secret sharing on roots of unity and its leakage audit.

Data symbols ride on one set of monomial exponents and Gaussian noise symbols
on a disjoint set; a share is one evaluation of the combined polynomial.  The
calibrator picks the noise variance that keeps the worst-case per-symbol
leakage of any t colluding workers at or below a target delta (in nats), and
the auditor re-checks that claim subset by subset.
"""

import csv
import itertools
from dataclasses import dataclass
from math import comb, inf, sqrt
from typing import Optional

import numpy as np

from .numerics import generalized_vandermonde
from .vandermonde import Pi


def complex_normal(rng: np.random.Generator, sigma2: float, size) -> np.ndarray:
    """Circularly symmetric complex Gaussian draws with variance sigma2.

    Real and imaginary parts are independent N(0, sigma2 / 2); the real part
    of the whole array is drawn before the imaginary part.
    """
    scale = sqrt(sigma2 / 2.0)
    re = rng.standard_normal(size)
    im = rng.standard_normal(size)
    return scale * (re + 1j * im)


@dataclass(frozen=True)
class NoiseSpec:
    """A calibrated noise variance plus the inputs that produced it."""

    sigma2: float
    delta: Optional[float] = None
    x: Optional[int] = None
    p: Optional[int] = None
    n_workers: Optional[int] = None
    real_factor: int = 1


def calibrate_sigma2(
    delta: float, x: int, p: int, n_workers: int, real_factor: int = 1
) -> NoiseSpec:
    """Noise variance guaranteeing per-symbol leakage <= delta nats against x colluders.

    ``p`` is the number of unit-bounded data symbols carried per share
    polynomial and ``n_workers`` the evaluation count.  Real-valued schemes
    pass real_factor=2 to absorb the sqrt(2) amplitude growth their inputs
    pick up when packed into complex form.

    >>> calibrate_sigma2(0.5, 1, 1, 6).sigma2
    2.0
    """
    if x < 1:
        raise ValueError(f"need at least one noise symbol, got x = {x}")
    if delta <= 0 or p < 1 or n_workers < 1:
        raise ValueError("delta must be positive and p, n_workers at least 1")
    if real_factor not in (1, 2):
        raise ValueError(f"real_factor must be 1 or 2, got {real_factor}")
    sigma2 = (
        real_factor
        * (1.0 / delta)
        * (p * x**3 / (4 ** (x - 1) * Pi(x - 1) ** 2))
        * float(n_workers) ** (2 * x - 2)
    )
    return NoiseSpec(sigma2, delta, x, p, n_workers, real_factor)


@dataclass(frozen=True)
class NestedCosetScheme:
    """Generator pair over the n-th roots: data rows g_enc, noise rows g_sec.

    Column i of each generator evaluates the respective monomials at
    omega_n^i, so a share vector is s @ g_enc + r @ g_sec.
    """

    n: int
    data_exponents: tuple
    noise_exponents: tuple
    g_enc: np.ndarray
    g_sec: np.ndarray

    @property
    def m(self) -> int:
        return len(self.data_exponents)

    @property
    def k(self) -> int:
        return len(self.noise_exponents)


def nested_coset_scheme(
    n: int, data_exponents, noise_exponents, precision: str = "double"
) -> NestedCosetScheme:
    """Build generators from disjoint exponent sets; row spaces then only share 0."""
    data = tuple(int(e) for e in data_exponents)
    noise = tuple(int(e) for e in noise_exponents)
    combined = [e % n for e in data + noise]
    if len(set(combined)) != len(combined):
        # distinctness mod n also caps the symbol count at n
        raise ValueError("data and noise exponents must be distinct mod n")
    points = range(1, n + 1)
    g_enc = generalized_vandermonde(n, points, data, precision).matrix.T
    g_sec = generalized_vandermonde(n, points, noise, precision).matrix.T
    return NestedCosetScheme(n, data, noise, g_enc, g_sec)


def shamir_scheme(n: int, m: int, k: int, start: int = 0) -> NestedCosetScheme:
    """Consecutive-exponent scheme: data at start..start+m-1, noise right after."""
    return nested_coset_scheme(n, range(start, start + m), range(start + m, start + m + k))


def share(
    secret,
    scheme: NestedCosetScheme,
    sigma2: float,
    rng_seed=0,
    randomness=None,
) -> np.ndarray:
    """All n shares of a secret vector (axis 0 indexes the m symbols).

    ``randomness`` substitutes an explicit noise vector for the Gaussian draw,
    which keeps replay and worked examples deterministic.
    """
    s = np.asarray(secret)
    if s.shape[0] != scheme.m:
        raise ValueError(f"secret has {s.shape[0]} symbols, scheme expects {scheme.m}")
    if randomness is None:
        rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
        randomness = complex_normal(rng, sigma2, (scheme.k, *s.shape[1:]))
    r = np.asarray(randomness)
    if r.shape[0] != scheme.k:
        raise ValueError(f"noise has {r.shape[0]} symbols, scheme expects {scheme.k}")
    return np.tensordot(scheme.g_enc, s, axes=(0, 0)) + np.tensordot(scheme.g_sec, r, axes=(0, 0))


def _channel_matrix(scheme: NestedCosetScheme, subset) -> Optional[np.ndarray]:
    """(g_enc_T g_sec_T^-1)^T for the observed columns; None when not invertible."""
    cols = list(subset)
    if len(cols) != scheme.k:
        raise ValueError(f"subset size {len(cols)} must equal the noise count {scheme.k}")
    g_enc_t = scheme.g_enc[:, cols]
    g_sec_t = scheme.g_sec[:, cols]
    try:
        h = np.linalg.solve(g_sec_t.T, g_enc_t.T)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(h)):
        return None
    return h


def leakage_bound_frobenius(scheme: NestedCosetScheme, subset, sigma2: float) -> float:
    """Per-symbol leakage bound ||g_enc_T g_sec_T^-1||_F^2 / sigma2 in nats."""
    h = _channel_matrix(scheme, subset)
    if h is None:
        return inf
    total = float(np.linalg.norm(h)) ** 2
    if sigma2 <= 0:
        return 0.0 if total == 0 else inf
    return total / sigma2


def leakage_bound_logdet(scheme: NestedCosetScheme, subset, sigma2: float, q=None) -> float:
    """Per-symbol Gaussian-input leakage (1/m) log det(I + H Q H* / sigma2) in nats."""
    h = _channel_matrix(scheme, subset)
    if h is None:
        return inf
    if sigma2 <= 0:
        return 0.0 if np.linalg.norm(h) == 0 else inf
    q = np.eye(scheme.m) if q is None else np.asarray(q)
    gram = h @ q @ h.conj().T
    sign, logdet = np.linalg.slogdet(np.eye(scheme.k) + gram / sigma2)
    if sign == 0:
        return inf
    return float(logdet) / scheme.m


@dataclass(frozen=True)
class LeakageReport:
    """Worst-case leakage over the audited subsets of worker columns."""

    t: int
    sigma2: float
    delta: float
    n_subsets: int
    exhaustive: bool
    worst_frobenius: float
    worst_logdet: float
    worst_subset: tuple
    entries: list

    @property
    def passed(self) -> bool:
        return self.worst_frobenius <= self.delta * (1 + 1e-9)


def audit_scheme(
    scheme: NestedCosetScheme,
    sigma2: float,
    t: int,
    delta: float,
    max_subsets: int = 100_000,
    sample: Optional[int] = None,
    rng_seed: int = 0,
) -> LeakageReport:
    """Evaluate both leakage bounds for size-t collusion sets against delta.

    All C(n, t) subsets are checked unless that count exceeds ``max_subsets``,
    in which case ``sample`` random subsets must be requested explicitly; the
    report is then flagged as non-exhaustive.
    """
    if t == 0:
        return LeakageReport(0, sigma2, delta, 0, True, 0.0, 0.0, (), [])
    total = comb(scheme.n, t)
    if sample is None:
        if total > max_subsets:
            raise ValueError(
                f"{total} subsets exceed the cap of {max_subsets}; pass sample= to audit anyway"
            )
        subsets = itertools.combinations(range(scheme.n), t)
        n_subsets, exhaustive = total, True
    else:
        rng = np.random.default_rng(rng_seed)
        subsets = [
            tuple(np.sort(rng.choice(scheme.n, size=t, replace=False)).tolist())
            for _ in range(sample)
        ]
        n_subsets, exhaustive = sample, False
    entries = []
    worst_f, worst_l, worst_subset = -inf, -inf, ()
    for subset in subsets:
        f = leakage_bound_frobenius(scheme, subset, sigma2)
        l = leakage_bound_logdet(scheme, subset, sigma2)
        entries.append((tuple(subset), f, l))
        if f > worst_f:
            worst_f, worst_subset = f, tuple(subset)
        worst_l = max(worst_l, l)
    return LeakageReport(
        t, sigma2, delta, n_subsets, exhaustive, worst_f, worst_l, worst_subset, entries
    )


def leakage_to_csv(report: LeakageReport, path) -> None:
    """One CSV row per audited subset with both leakage bounds in nats."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["subset", "frobenius_nats", "logdet_nats"])
        for subset, f, l in report.entries:
            writer.writerow(["-".join(map(str, subset)), f"{f:.12g}", f"{l:.12g}"])
