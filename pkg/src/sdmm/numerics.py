"""Complex matrices, roots of unity and Laurent polynomials with matrix coefficients.

Matrices are plain numpy arrays; ``precision`` selects between binary32
("single") and binary64 ("double") component types.
"""

from dataclasses import dataclass
from math import pi

import numpy as np

PRECISIONS = ("single", "double")


def complex_dtype(precision: str = "double") -> np.dtype:
    """Complex dtype for a precision tag.

    >>> complex_dtype("single")
    dtype('complex64')
    """
    if precision == "single":
        return np.dtype(np.complex64)
    if precision == "double":
        return np.dtype(np.complex128)
    raise ValueError(f"unknown precision {precision!r}")


def real_dtype(precision: str = "double") -> np.dtype:
    """Real dtype for a precision tag."""
    return np.dtype(np.float32) if precision == "single" else np.dtype(np.float64)


def as_matrix(a, precision: str = "double", real: bool = False) -> np.ndarray:
    """Validate a 2-d array and cast it to the requested component type."""
    m = np.asarray(a)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    return m.astype(real_dtype(precision) if real else complex_dtype(precision))


def unit_root_power(n: int, exponent, precision: str = "double") -> np.ndarray:
    """omega_n ** exponent computed from the angle, elementwise.

    Exponents are reduced mod n in exact integer arithmetic first, so huge or
    negative exponents lose no accuracy.
    """
    e = np.mod(np.asarray(exponent, dtype=np.int64), n)
    w = np.exp(2j * pi * e / n)
    return w.astype(complex_dtype(precision))


@dataclass(frozen=True)
class RootsOfUnity:
    """The n-th roots of unity alpha_i = omega_n^i for i = 1..n (alpha_n = 1)."""

    n: int
    points: np.ndarray

    def point(self, i: int) -> complex:
        """alpha_i for a 1-based index i."""
        if not 1 <= i <= self.n:
            raise ValueError(f"index {i} outside 1..{self.n}")
        return self.points[i - 1]


def roots_of_unity(n: int, precision: str = "double") -> RootsOfUnity:
    """All n-th roots of unity, ordered alpha_1 = omega_n, ..., alpha_n = 1.

    >>> np.allclose(roots_of_unity(4).points, [1j, -1, -1j, 1])
    True
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    return RootsOfUnity(n, unit_root_power(n, np.arange(1, n + 1), precision))


@dataclass(frozen=True)
class GeneralizedVandermonde:
    """Evaluations of monomials z^k at roots of unity: V[j, i] = omega_n^(g_j * k_i).

    Rows follow the 1-based evaluation indices g_j (points omega_n^g_j) and
    columns the integer exponents k_i, which may be negative.
    """

    n: int
    eval_indices: tuple
    exponents: tuple
    matrix: np.ndarray


def generalized_vandermonde(
    n: int, eval_indices, exponents, precision: str = "double"
) -> GeneralizedVandermonde:
    """Build the evaluation matrix of z^k_i at the points omega_n^g_j."""
    g = np.asarray(list(eval_indices), dtype=np.int64)
    k = np.asarray(list(exponents), dtype=np.int64)
    matrix = unit_root_power(n, np.outer(g, k), precision)
    return GeneralizedVandermonde(n, tuple(g.tolist()), tuple(k.tolist()), matrix)


def vandermonde_matrix(points, m: int) -> np.ndarray:
    """Plain Vandermonde matrix V[i, j] = points[i]^j with j = 0..m-1."""
    p = np.asarray(points)
    return p[:, None] ** np.arange(m)


@dataclass(frozen=True)
class LaurentMatrixPoly:
    """A Laurent polynomial with matrix coefficients over a dense exponent window.

    ``coeffs[j]`` is the matrix coefficient of z^(min_exp + j).
    """

    coeffs: np.ndarray
    min_exp: int

    def __post_init__(self):
        if self.coeffs.ndim != 3:
            raise ValueError("coeffs must be a (terms, rows, cols) array")

    @property
    def num_terms(self) -> int:
        return self.coeffs.shape[0]

    @property
    def max_exp(self) -> int:
        return self.min_exp + self.num_terms - 1

    @property
    def shape(self) -> tuple:
        return self.coeffs.shape[1:]

    def coefficient(self, exponent: int) -> np.ndarray:
        """The matrix coefficient of z^exponent (zero outside the window)."""
        j = exponent - self.min_exp
        if 0 <= j < self.num_terms:
            return self.coeffs[j]
        return np.zeros(self.shape, dtype=self.coeffs.dtype)


def laurent_from_terms(terms: dict, shape, dtype=np.complex128) -> LaurentMatrixPoly:
    """Assemble a dense-window polynomial from an {exponent: matrix} mapping."""
    if not terms:
        raise ValueError("need at least one term")
    lo, hi = min(terms), max(terms)
    coeffs = np.zeros((hi - lo + 1, *shape), dtype=dtype)
    for e, c in terms.items():
        coeffs[e - lo] += c
    return LaurentMatrixPoly(coeffs, lo)


def eval_laurent(p: LaurentMatrixPoly, z: complex) -> np.ndarray:
    """Evaluate p at z by Horner's rule on the dense window, then scale by z^min_exp."""
    if z == 0 and p.min_exp < 0:
        raise ValueError("cannot evaluate a pole at z = 0")
    acc = p.coeffs[-1].copy()
    for j in range(p.num_terms - 2, -1, -1):
        acc *= z
        acc += p.coeffs[j]
    if p.min_exp != 0:
        acc *= z ** p.min_exp
    return acc


def conj_poly(p: LaurentMatrixPoly) -> LaurentMatrixPoly:
    """The polynomial q with q(z) = conj(p(conj(z)^-1)) on |z| = 1, i.e. q(z) = conj(p(1/z̄)).

    Coefficients are conjugated and exponents negated, so on the unit circle
    q(z) = conj(p(z)).
    """
    return LaurentMatrixPoly(np.conj(p.coeffs[::-1]), -p.max_exp)


def interpolate_laurent(points, values, min_exp: int, num_terms: int) -> LaurentMatrixPoly:
    """Recover the coefficients of a Laurent polynomial from point evaluations.

    ``values[i]`` is the matrix evaluation at ``points[i]``.  The window is
    exactly ``min_exp .. min_exp + num_terms - 1``; at least ``num_terms``
    distinct points are required, and extra points are fit in the least-squares
    sense so surplus responses average down noise.
    """
    pts = np.asarray(points)
    vals = np.asarray(values)
    if vals.ndim != 3 or vals.shape[0] != pts.shape[0]:
        raise ValueError("values must stack one matrix per point")
    if pts.shape[0] < num_terms:
        raise ValueError(
            f"insufficient data: {pts.shape[0]} points for {num_terms} coefficients"
        )
    if len(set(pts.tolist())) != len(pts):
        raise ValueError("interpolation points must be distinct")
    dtype = np.result_type(pts, vals)
    # z^min_exp is factored out of the evaluations, leaving an ordinary polynomial.
    rhs = vals * pts[:, None, None] ** float(-min_exp)
    v = vandermonde_matrix(pts, num_terms).astype(dtype)
    flat = rhs.reshape(pts.shape[0], -1)
    if pts.shape[0] == num_terms:
        sol = np.linalg.solve(v, flat)
    else:
        sol, *_ = np.linalg.lstsq(v, flat, rcond=None)
    return LaurentMatrixPoly(sol.reshape(num_terms, *vals.shape[1:]), min_exp)


def matmul(a, b, method: str = "naive") -> np.ndarray:
    """Complex matrix product from real block products.

    "naive" uses the four real products ac, bd, ad, bc; "three_m" trades one
    for extra additions: real = ac - bd, imag = (a+b)(c+d) - ac - bd.

    >>> complex(matmul(np.array([[1 + 1j]]), np.array([[1 - 1j]]), "three_m")[0, 0])
    (2+0j)
    """
    ar, ai = np.asarray(a).real, np.asarray(a).imag
    br, bi = np.asarray(b).real, np.asarray(b).imag
    if method == "naive":
        return (ar @ br - ai @ bi) + 1j * (ar @ bi + ai @ br)
    if method == "three_m":
        t1 = ar @ br
        t2 = ai @ bi
        return (t1 - t2) + 1j * ((ar + ai) @ (br + bi) - t1 - t2)
    raise ValueError(f"unknown method {method!r}")


def cond_2(m) -> float:
    """2-norm condition number from the singular values; inf when singular."""
    a = np.asarray(m)
    s = np.linalg.svd(a, compute_uv=False)
    cutoff = s[0] * max(a.shape) * np.finfo(s.dtype).eps
    if s[-1] <= cutoff:
        return float("inf")
    return float(s[0] / s[-1])


def relative_error(approx, exact) -> float:
    """Frobenius-norm relative error of approx against a reference."""
    denom = np.linalg.norm(exact)
    if denom == 0:
        return float(np.linalg.norm(approx))
    return float(np.linalg.norm(np.asarray(approx) - np.asarray(exact)) / denom)
