"""Eight straggler-tolerant schemes for secure multiplication on roots of unity.

Inner schemes split the shared dimension of AB into M blocks and hide the sum
in the constant coefficient of a product polynomial; outer schemes split the
rows of A into K and the columns of B into L blocks and read every pairwise
block product off its own coefficient.  Complex inputs are supported directly
("c" schemes); real inputs are first packed into complex matrices of half the
size ("r" schemes), whose workers return real-valued payloads.  Each encoding
polynomial appends x Gaussian noise blocks so that any x colluding workers
learn next to nothing, and any R of the N shares suffice to decode.
"""

import numpy as np

from dataclasses import dataclass
from math import inf
from typing import Optional

from .numerics import (
    LaurentMatrixPoly,
    complex_dtype,
    eval_laurent,
    interpolate_laurent,
    laurent_from_terms,
    real_dtype,
    roots_of_unity,
)
from .sharing import NestedCosetScheme, calibrate_sigma2, complex_normal, nested_coset_scheme

SCHEME_IDS = ("cmatdot", "cdft", "cgasp", "ca3s", "rmatdot", "rdft", "rgasp", "ra3s")
INNER_IDS = {"cmatdot", "cdft", "rmatdot", "rdft"}
REAL_IDS = {"rmatdot", "rdft", "rgasp", "ra3s"}
DFT_IDS = {"cdft", "rdft"}


class InsufficientResponsesError(RuntimeError):
    """Raised when fewer worker responses arrive than decoding requires."""

    def __init__(self, received: int, required: int):
        self.received = received
        self.required = required
        super().__init__(f"{received} < {required} responses required to decode")


class DecodingResidueError(ArithmeticError):
    """Raised when a real-valued result carries a non-negligible imaginary part.

    The decoded real part and the residue ratio ride along so callers that
    chart the noise-swamped regime (where heavy calibrated noise amplifies
    roundoff past the gate) can still consume the value deliberately.
    """

    def __init__(self, message: str, result: np.ndarray, ratio: float):
        self.result = result
        self.ratio = ratio
        super().__init__(message)


def recovery_threshold(scheme_id: str, parts, x: int) -> int:
    """Minimum number of responses that determine the product.

    >>> recovery_threshold("cmatdot", 8, 3)
    21
    >>> recovery_threshold("rgasp", (4, 4), 3)
    43
    """
    if scheme_id in INNER_IDS:
        m = parts
        if scheme_id == "cmatdot":
            return 2 * m + 2 * x - 1
        if scheme_id == "rmatdot":
            return 2 * m + 4 * x - 1
        return m + 2 * x  # the DFT variants use every worker
    k, l = parts
    if scheme_id == "cgasp":
        return 2 * k * l + 2 * x - 1
    if scheme_id == "rgasp":
        return 2 * k * l + k + 3 * x - 2
    if scheme_id == "ca3s":
        return (k + x) * (l + 1) - 1
    if scheme_id == "ra3s":
        return (k + x) * (l + 1) + x - 1
    raise ValueError(f"unknown scheme {scheme_id!r}")


@dataclass(frozen=True)
class ExponentLayout:
    """Monomial exponents of both encoding polynomials and the decode windows.

    ``targets`` maps each block of the product to the exponent carrying it in
    the first decoded polynomial; ``targets_minus`` does the same within
    ``window_minus`` for the conjugate-path polynomial of real outer schemes.
    Windows are (min_exp, num_terms) pairs.
    """

    f_data: tuple
    f_noise: tuple
    g_data: tuple
    g_noise: tuple
    window: tuple
    targets: tuple
    window_minus: Optional[tuple] = None
    targets_minus: Optional[tuple] = None


def exponent_layout(scheme_id: str, parts, x: int) -> ExponentLayout:
    """The exponent tables of one scheme as plain integer tuples."""
    if scheme_id in INNER_IDS:
        m = parts
        f_data = tuple(range(m))
        f_noise = tuple(range(m, m + x))
        g_data = tuple(-j for j in range(m))
        g_noise = tuple(range(1, x + 1))
        if scheme_id in ("cmatdot", "cdft"):
            window = (-(m - 1), 2 * m + 2 * x - 1)
        else:
            # taking real parts mirrors the spectrum, widening the window
            window = (-(m + 2 * x - 1), 2 * m + 4 * x - 1)
        return ExponentLayout(f_data, f_noise, g_data, g_noise, window, ((0,),))

    k, l = parts
    if scheme_id in ("cgasp", "rgasp"):
        f_noise = tuple(range(x))
        g_noise = tuple(range(x))
        g_data = tuple(k + x - 1 + k * j for j in range(l))
        if scheme_id == "cgasp":
            f_data = tuple(k * (l - 1) + x + j for j in range(k))
            window = (0, 2 * k * l + 2 * x - 1)
            base = k * l + 2 * x - 1
            targets = tuple(tuple(base + j + k * jp for jp in range(l)) for j in range(k))
            return ExponentLayout(f_data, f_noise, g_data, g_noise, window, targets)
        f_data = tuple(k * l + 2 * x - 1 + j for j in range(k))
        window = (0, 2 * k * l + k + 3 * x - 2)
        base = k * l + k + 3 * x - 2
        targets = tuple(tuple(base + j + k * jp for jp in range(l)) for j in range(k))
        window_minus = (-(k * l + x - 1), 2 * k * l + k + 3 * x - 2)
        base_minus = k * (l - 1) + x
        targets_minus = tuple(
            tuple(base_minus + j - k * jp for jp in range(l)) for j in range(k)
        )
        return ExponentLayout(
            f_data, f_noise, g_data, g_noise, window, targets, window_minus, targets_minus
        )

    if scheme_id in ("ca3s", "ra3s"):
        f_data = tuple(range(k))
        f_noise = tuple(range(k, k + x))
        g_data = tuple((k + x) * j for j in range(l))
        targets = tuple(tuple(j + (k + x) * jp for jp in range(l)) for j in range(k))
        if scheme_id == "ca3s":
            g_noise = tuple((k + x) * (l - 1) + k + j for j in range(x))
            window = (0, (k + x) * (l + 1) - 1)
            return ExponentLayout(f_data, f_noise, g_data, g_noise, window, targets)
        g_noise = tuple((k + x) * l + j for j in range(x))
        window = (0, (k + x) * (l + 1) + x - 1)
        window_minus = (-((k + x) * l + x - 1), (k + x) * (l + 1) + x - 1)
        targets_minus = tuple(tuple(j - (k + x) * jp for jp in range(l)) for j in range(k))
        return ExponentLayout(
            f_data, f_noise, g_data, g_noise, window, targets, window_minus, targets_minus
        )
    raise ValueError(f"unknown scheme {scheme_id!r}")


@dataclass(frozen=True)
class SchemeParams:
    """Everything needed to encode, distribute and decode one product.

    Inner schemes take ``m_parts``; outer schemes take ``k_parts`` and
    ``l_parts``.  ``n_workers`` defaults to the recovery threshold plus the
    straggler allowance.  Noise is either an explicit variance ``sigma2`` or a
    leakage target ``delta`` that is calibrated per polynomial; with neither,
    encoding runs noise-free.
    """

    scheme_id: str
    x: int = 0
    m_parts: Optional[int] = None
    k_parts: Optional[int] = None
    l_parts: Optional[int] = None
    stragglers: int = 0
    n_workers: Optional[int] = None
    sigma2: Optional[float] = None
    delta: Optional[float] = None
    precision: str = "double"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "scheme_id", str(self.scheme_id).lower())
        if self.scheme_id not in SCHEME_IDS:
            raise ValueError(f"unknown scheme {self.scheme_id!r}, expected one of {SCHEME_IDS}")
        if self.x < 0:
            raise ValueError("x must be non-negative")
        if self.is_inner:
            if self.m_parts is None or self.m_parts < 1:
                raise ValueError(f"{self.scheme_id} needs m_parts >= 1")
            if self.k_parts is not None or self.l_parts is not None:
                raise ValueError(f"{self.scheme_id} splits with m_parts, not k/l")
        else:
            if self.k_parts is None or self.l_parts is None or min(self.k_parts, self.l_parts) < 1:
                raise ValueError(f"{self.scheme_id} needs k_parts and l_parts >= 1")
            if self.m_parts is not None:
                raise ValueError(f"{self.scheme_id} splits with k_parts and l_parts, not m")
        if self.stragglers < 0:
            raise ValueError("stragglers must be non-negative")
        if self.scheme_id in DFT_IDS:
            if self.stragglers != 0:
                raise ValueError(f"{self.scheme_id} uses every worker and tolerates no stragglers")
            if self.n_workers is not None and self.n_workers != self.recovery_threshold:
                raise ValueError(
                    f"{self.scheme_id} requires exactly {self.recovery_threshold} workers"
                )
        elif self.n_workers is not None and self.n_workers < self.recovery_threshold + self.stragglers:
            raise ValueError(
                f"n_workers {self.n_workers} cannot cover threshold "
                f"{self.recovery_threshold} plus {self.stragglers} stragglers"
            )
        if self.sigma2 is not None and self.delta is not None:
            raise ValueError("give sigma2 or delta, not both")
        if self.sigma2 is not None and self.sigma2 < 0:
            raise ValueError("sigma2 must be non-negative")
        complex_dtype(self.precision)

    @property
    def is_inner(self) -> bool:
        return self.scheme_id in INNER_IDS

    @property
    def is_real(self) -> bool:
        return self.scheme_id in REAL_IDS

    @property
    def parts(self):
        return self.m_parts if self.is_inner else (self.k_parts, self.l_parts)

    @property
    def recovery_threshold(self) -> int:
        return recovery_threshold(self.scheme_id, self.parts, self.x)

    @property
    def num_workers(self) -> int:
        if self.n_workers is not None:
            return self.n_workers
        return self.recovery_threshold + self.stragglers

    @property
    def layout(self) -> ExponentLayout:
        return exponent_layout(self.scheme_id, self.parts, self.x)

    def noise_variances(self) -> tuple:
        """(variance for the A-side polynomial, variance for the B-side)."""
        if self.x == 0:
            return 0.0, 0.0
        if self.sigma2 is not None:
            return float(self.sigma2), float(self.sigma2)
        if self.delta is None:
            return 0.0, 0.0
        factor = 2 if self.is_real else 1
        if self.is_inner:
            p_a = p_b = self.m_parts
        else:
            p_a, p_b = self.k_parts, self.l_parts
        n = self.num_workers
        return (
            calibrate_sigma2(self.delta, self.x, p_a, n, factor).sigma2,
            calibrate_sigma2(self.delta, self.x, p_b, n, factor).sigma2,
        )


@dataclass(frozen=True)
class EncodedShares:
    """The pair of evaluation shares destined for one worker."""

    worker_index: int
    a_share: np.ndarray
    b_share: np.ndarray


@dataclass(frozen=True)
class WorkerResponse:
    """One worker's computed payloads, tagged with its 1-based index."""

    worker_index: int
    payloads: tuple


def inner_partition(a, b, m: int):
    """Split the shared dimension: A into m column blocks, B into m row blocks."""
    a, b = np.asarray(a), np.asarray(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"inner dimensions {a.shape[1]} and {b.shape[0]} differ")
    if a.shape[1] % m:
        raise ValueError(f"inner dimension {a.shape[1]} is not divisible by {m}")
    return np.split(a, m, axis=1), np.split(b, m, axis=0)


def outer_partition(a, b, k: int, l: int):
    """Split A into k row blocks and B into l column blocks."""
    a, b = np.asarray(a), np.asarray(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"inner dimensions {a.shape[1]} and {b.shape[0]} differ")
    if a.shape[0] % k:
        raise ValueError(f"{a.shape[0]} rows of A do not split into {k} blocks")
    if b.shape[1] % l:
        raise ValueError(f"{b.shape[1]} columns of B do not split into {l} blocks")
    return np.split(a, k, axis=0), np.split(b, l, axis=1)


def inner_complexify(a, b):
    """Pack real A, B into half-width complex factors with AB = Re(A' B').

    A = [A1 A2] becomes A1 + iA2 and B = [B1; B2] becomes B1 - iB2.
    """
    a, b = np.asarray(a), np.asarray(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"inner dimensions {a.shape[1]} and {b.shape[0]} differ")
    if a.shape[1] % 2:
        raise ValueError("the shared dimension must be even to pack real inputs")
    a1, a2 = np.split(a, 2, axis=1)
    b1, b2 = np.split(b, 2, axis=0)
    return a1 + 1j * a2, b1 - 1j * b2


def outer_complexify(a, b):
    """Pack real A, B into half-size complex factors for the two-product path.

    A = [A1; A2] becomes A1 + iA2 and B = [B1 B2] becomes B1 + iB2; the block
    products of AB are rebuilt by ``assemble_outer`` from A'B' and A' conj(B').
    """
    a, b = np.asarray(a), np.asarray(b)
    if a.shape[0] % 2:
        raise ValueError("the row count of A must be even to pack real inputs")
    if b.shape[1] % 2:
        raise ValueError("the column count of B must be even to pack real inputs")
    a1, a2 = np.split(a, 2, axis=0)
    b1, b2 = np.split(b, 2, axis=1)
    return a1 + 1j * a2, b1 + 1j * b2


def assemble_outer(p_plus, p_minus) -> np.ndarray:
    """Rebuild [[A1B1, A1B2], [A2B1, A2B2]] from A'B' and A' conj(B')."""
    re_p, im_p = np.real(p_plus), np.imag(p_plus)
    re_m, im_m = np.real(p_minus), np.imag(p_minus)
    return 0.5 * np.block([[re_p + re_m, im_p - im_m], [im_p + im_m, re_m - re_p]])


def _cast_inputs(params: SchemeParams, a, b):
    a, b = np.asarray(a), np.asarray(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("inputs must be 2-d matrices")
    if params.is_real:
        if np.iscomplexobj(a) or np.iscomplexobj(b):
            raise ValueError(f"{params.scheme_id} multiplies real matrices only")
        dt = real_dtype(params.precision)
    else:
        dt = complex_dtype(params.precision)
    return a.astype(dt), b.astype(dt)


def _factor_blocks(params: SchemeParams, a, b):
    if params.is_inner:
        if params.is_real:
            a, b = inner_complexify(a, b)
        return inner_partition(a, b, params.m_parts)
    if params.is_real:
        a, b = outer_complexify(a, b)
    return outer_partition(a, b, params.k_parts, params.l_parts)


def build_polynomials(params: SchemeParams, a, b, rng=None):
    """The encoding polynomial pair (f for A, g for B) with noise drawn in.

    Noise blocks are drawn from the A-side polynomial first, in ascending
    exponent order, so a fixed seed pins every coefficient.
    """
    a, b = _cast_inputs(params, a, b)
    a_blocks, b_blocks = _factor_blocks(params, a, b)
    layout = params.layout
    sigma2_a, sigma2_b = params.noise_variances()
    if rng is None:
        rng = np.random.default_rng(params.seed)
    dt = complex_dtype(params.precision)
    f_terms = {e: blk.astype(dt) for e, blk in zip(layout.f_data, a_blocks)}
    for e in layout.f_noise:
        f_terms[e] = complex_normal(rng, sigma2_a, a_blocks[0].shape).astype(dt)
    g_terms = {e: blk.astype(dt) for e, blk in zip(layout.g_data, b_blocks)}
    for e in layout.g_noise:
        g_terms[e] = complex_normal(rng, sigma2_b, b_blocks[0].shape).astype(dt)
    f = laurent_from_terms(f_terms, a_blocks[0].shape, dt)
    g = laurent_from_terms(g_terms, b_blocks[0].shape, dt)
    return f, g


def encode(params: SchemeParams, a, b, rng=None):
    """Evaluation shares of both factors for all n_workers workers."""
    f, g = build_polynomials(params, a, b, rng)
    roots = roots_of_unity(params.num_workers, params.precision)
    return [
        EncodedShares(i, eval_laurent(f, roots.point(i)), eval_laurent(g, roots.point(i)))
        for i in range(1, params.num_workers + 1)
    ]


def real_inner_product(a_share, b_share) -> np.ndarray:
    """Re(a_share @ b_share) via one stacked real product: [Re Im] @ [Re; -Im]."""
    left = np.hstack([a_share.real, a_share.imag])
    right = np.vstack([b_share.real, -b_share.imag])
    return left @ right


def worker_compute(scheme_id: str, a_share, b_share, worker_index: int = 0) -> WorkerResponse:
    """The payloads one worker derives from its shares.

    Complex schemes return the single product of the shares; real inner
    schemes return its real part (computed directly from real blocks); real
    outer schemes additionally return the product against the conjugate share.
    """
    scheme_id = scheme_id.lower()
    if scheme_id not in SCHEME_IDS:
        raise ValueError(f"unknown scheme {scheme_id!r}")
    if scheme_id not in REAL_IDS:
        return WorkerResponse(worker_index, (a_share @ b_share,))
    if scheme_id in INNER_IDS:
        return WorkerResponse(worker_index, (real_inner_product(a_share, b_share),))
    return WorkerResponse(worker_index, (a_share @ b_share, a_share @ np.conj(b_share)))


def _response_points(params: SchemeParams, responses):
    indices = [r.worker_index for r in responses]
    if len(set(indices)) != len(indices):
        raise ValueError("duplicate worker indices in responses")
    n = params.num_workers
    if any(not 1 <= i <= n for i in indices):
        raise ValueError(f"worker indices must lie in 1..{n}")
    return roots_of_unity(n, params.precision).points[np.asarray(indices) - 1]


def _coefficient_grid(h: LaurentMatrixPoly, targets) -> np.ndarray:
    return np.block([[h.coefficient(e) for e in row] for row in targets])


def _check_residue(result: np.ndarray) -> np.ndarray:
    residue = float(np.linalg.norm(result.imag))
    scale = float(np.linalg.norm(result.real))
    if residue > 1e-6 * scale:
        raise DecodingResidueError(
            f"imaginary residue {residue:.3e} exceeds 1e-6 of the result norm {scale:.3e}",
            result=result.real,
            ratio=residue / scale if scale else float("inf"),
        )
    return result.real


def decode(params: SchemeParams, responses) -> np.ndarray:
    """Recover AB from any R worker responses (every response, for DFT schemes).

    Extra responses beyond the threshold join a least-squares fit and damp the
    noise instead of being discarded.
    """
    pts = _response_points(params, responses)
    required = params.num_workers if params.scheme_id in DFT_IDS else params.recovery_threshold
    if len(responses) < required:
        raise InsufficientResponsesError(len(responses), required)
    layout = params.layout
    if params.scheme_id in DFT_IDS:
        # every exponent of the product polynomial stays inside (-N, N), so
        # averaging the evaluations isolates the constant coefficient
        return np.mean([r.payloads[0] for r in responses], axis=0)
    first = np.stack([r.payloads[0] for r in responses])
    h = interpolate_laurent(pts, first, *layout.window)
    if params.scheme_id in ("cmatdot", "cgasp", "ca3s"):
        return _coefficient_grid(h, layout.targets)
    if params.scheme_id == "rmatdot":
        return _check_residue(_coefficient_grid(h, layout.targets))
    second = np.stack([r.payloads[1] for r in responses])
    h_minus = interpolate_laurent(pts, second, *layout.window_minus)
    p_plus = _coefficient_grid(h, layout.targets)
    p_minus = _coefficient_grid(h_minus, layout.targets_minus)
    return assemble_outer(p_plus, p_minus)


def decode_via_interpolation(params: SchemeParams, responses) -> np.ndarray:
    """Interpolation-based decode for the DFT schemes, as a cross-check.

    At N-th roots of unity exponents fold mod N, so fitting the folded window
    0..N-1 from all N evaluations recovers the same constant coefficient that
    plain averaging does.
    """
    if params.scheme_id not in DFT_IDS:
        raise ValueError("interpolation cross-check applies to the DFT schemes")
    pts = _response_points(params, responses)
    n = params.num_workers
    if len(responses) < n:
        raise InsufficientResponsesError(len(responses), n)
    vals = np.stack([np.asarray(r.payloads[0], dtype=complex_dtype(params.precision)) for r in responses])
    h = interpolate_laurent(pts, vals, 0, n)
    c0 = h.coefficient(0)
    return _check_residue(c0) if params.scheme_id == "rdft" else c0


def multiply(params: SchemeParams, a, b) -> np.ndarray:
    """Encode, run every worker in-process, and decode the product."""
    shares = encode(params, a, b)
    responses = [
        worker_compute(params.scheme_id, s.a_share, s.b_share, s.worker_index) for s in shares
    ]
    return decode(params, responses)


def generator_matrices(params: SchemeParams):
    """The nested coset generator pair of each encoding polynomial.

    Returns (A-side scheme, B-side scheme); the shares produced by ``encode``
    are exactly the images of the data blocks under these generators.
    """
    layout = params.layout
    n = params.num_workers
    f = nested_coset_scheme(n, layout.f_data, layout.f_noise, params.precision)
    g = nested_coset_scheme(n, layout.g_data, layout.g_noise, params.precision)
    return f, g


COST_FAMILIES = (
    "real_inner",
    "real_inner_complexified",
    "complex_inner",
    "real_outer",
    "real_outer_complexified",
    "complex_outer",
)


def cost_family(scheme_id: str) -> str:
    """The cost-model row a scheme is accounted under."""
    return {
        "cmatdot": "complex_inner",
        "cdft": "complex_inner",
        "cgasp": "complex_outer",
        "ca3s": "complex_outer",
        "rmatdot": "real_inner_complexified",
        "rdft": "real_inner_complexified",
        "rgasp": "real_outer_complexified",
        "ra3s": "real_outer_complexified",
    }[scheme_id.lower()]


def _exact_div(num: int, den: int) -> int:
    if num % den:
        raise ValueError(f"{num} operations do not split evenly over {den} parts")
    return num // den


def cost_model(family: str, dims, parts, x: int, r_threshold: int) -> dict:
    """Real floating-point operation counts per worker and for the decoder.

    ``dims`` is (t, s, r) for a t x s times s x r product; ``parts`` is M for
    inner rows and (K, L) for outer rows.  Counts are exact integers: encode_a
    and encode_b are the per-worker costs of producing one share of each
    factor, decode the cost of rebuilding the product from R responses.
    """
    t, s, r = dims
    if family in ("real_inner", "real_inner_complexified", "complex_inner"):
        m = parts
        weight = {
            "real_inner": 2 * (m + x) - 1,
            "real_inner_complexified": 4 * (m + x) - 1,
            "complex_inner": 8 * (m + x) - 2,
        }[family]
        decode_weight = 8 * r_threshold - 2 if family == "complex_inner" else 2 * r_threshold - 1
        return {
            "encode_a": _exact_div(weight * t * s, m),
            "encode_b": _exact_div(weight * s * r, m),
            "decode": decode_weight * t * r,
        }
    if family in ("real_outer", "real_outer_complexified", "complex_outer"):
        k, l = parts
        if family == "real_outer":
            return {
                "encode_a": _exact_div((2 * (k + x) - 1) * t * s, k),
                "encode_b": _exact_div((2 * (k + x) - 1) * s * r, k),
                "decode": (2 * r_threshold - 1) * t * r,
            }
        if family == "real_outer_complexified":
            return {
                "encode_a": _exact_div((4 * (k + x) - 1) * t * s, k),
                "encode_b": _exact_div((4 * (l + x) - 1) * s * r, l),
                "decode": (4 * r_threshold - 1) * t * r,
            }
        return {
            "encode_a": _exact_div((8 * (k + x) - 2) * t * s, k),
            "encode_b": _exact_div((8 * (l + x) - 2) * s * r, l),
            "decode": (8 * r_threshold - 2) * t * r,
        }
    raise ValueError(f"unknown cost family {family!r}, expected one of {COST_FAMILIES}")
