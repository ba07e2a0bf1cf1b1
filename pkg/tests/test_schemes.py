import itertools
from collections import defaultdict

import numpy as np
import pytest

from sdmm.numerics import relative_error
from sdmm.schemes import (
    DecodingResidueError,
    EncodedShares,
    InsufficientResponsesError,
    SchemeParams,
    assemble_outer,
    build_polynomials,
    cost_family,
    cost_model,
    decode,
    decode_via_interpolation,
    encode,
    exponent_layout,
    generator_matrices,
    inner_complexify,
    inner_partition,
    multiply,
    outer_complexify,
    outer_partition,
    real_inner_product,
    recovery_threshold,
    worker_compute,
)

SCHEME_GRID = [
    ("cmatdot", dict(m_parts=4)),
    ("cdft", dict(m_parts=4)),
    ("cgasp", dict(k_parts=2, l_parts=2)),
    ("ca3s", dict(k_parts=2, l_parts=2)),
    ("rmatdot", dict(m_parts=4)),
    ("rdft", dict(m_parts=4)),
    ("rgasp", dict(k_parts=2, l_parts=2)),
    ("ra3s", dict(k_parts=2, l_parts=2)),
]


def random_inputs(scheme_id, t=8, s=16, r=8, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.uniform(-1, 1, (t, s))
    b = rng.uniform(-1, 1, (s, r))
    if scheme_id.startswith("c"):
        a = a + 1j * rng.uniform(-1, 1, (t, s))
        b = b + 1j * rng.uniform(-1, 1, (s, r))
    return a, b


def run_workers(params, shares):
    return [worker_compute(params.scheme_id, s.a_share, s.b_share, s.worker_index) for s in shares]


def test_recovery_threshold_reference_values():
    assert recovery_threshold("cmatdot", 8, 3) == 21
    assert recovery_threshold("cdft", 8, 3) == 14
    assert recovery_threshold("cgasp", (4, 4), 3) == 37
    assert recovery_threshold("ca3s", (4, 4), 3) == 34
    assert recovery_threshold("rmatdot", 8, 3) == 27
    assert recovery_threshold("rdft", 8, 3) == 14
    assert recovery_threshold("rgasp", (4, 4), 3) == 43
    assert recovery_threshold("ra3s", (4, 4), 3) == 37


def test_layout_cmatdot_small():
    lay = exponent_layout("cmatdot", 2, 1)
    assert lay.f_data == (0, 1) and lay.f_noise == (2,)
    assert lay.g_data == (0, -1) and lay.g_noise == (1,)
    assert lay.window == (-1, 5) and lay.targets == ((0,),)


def test_layout_rmatdot_widened_window():
    lay = exponent_layout("rmatdot", 2, 1)
    assert lay.window == (-3, 7)
    assert lay.window[1] == recovery_threshold("rmatdot", 2, 1)


def test_layout_cgasp_square():
    lay = exponent_layout("cgasp", (2, 2), 2)
    assert lay.f_noise == (0, 1) and lay.f_data == (4, 5)
    assert lay.g_noise == (0, 1) and lay.g_data == (3, 5)
    assert lay.window == (0, 11)
    assert lay.targets == ((7, 9), (8, 10))


def test_layout_ca3s_rectangular():
    lay = exponent_layout("ca3s", (2, 3), 1)
    assert lay.f_data == (0, 1) and lay.f_noise == (2,)
    assert lay.g_data == (0, 3, 6) and lay.g_noise == (8,)
    assert lay.window == (0, 11)
    assert lay.targets == ((0, 3, 6), (1, 4, 7))


def test_layout_rgasp_two_windows():
    lay = exponent_layout("rgasp", (2, 2), 1)
    assert lay.f_noise == (0,) and lay.f_data == (5, 6)
    assert lay.g_noise == (0,) and lay.g_data == (2, 4)
    assert lay.window == (0, 11) and lay.window_minus == (-4, 11)
    assert lay.targets == ((7, 9), (8, 10))
    assert lay.targets_minus == ((3, 1), (4, 2))


def test_layout_ra3s_two_windows():
    lay = exponent_layout("ra3s", (2, 2), 1)
    assert lay.f_data == (0, 1) and lay.f_noise == (2,)
    assert lay.g_data == (0, 3) and lay.g_noise == (6,)
    assert lay.window == (0, 9) and lay.window_minus == (-6, 9)
    assert lay.targets == ((0, 3), (1, 4))
    assert lay.targets_minus == ((0, -3), (1, -2))


def _term_sums(layout, conjugate_g=False):
    f_terms = [("data", i, e) for i, e in enumerate(layout.f_data)]
    f_terms += [("noise", i, e) for i, e in enumerate(layout.f_noise)]
    g_terms = [("data", i, e) for i, e in enumerate(layout.g_data)]
    g_terms += [("noise", i, e) for i, e in enumerate(layout.g_noise)]
    sign = -1 if conjugate_g else 1
    sums = defaultdict(list)
    for fk, fi, fe in f_terms:
        for gk, gi, ge in g_terms:
            sums[fe + sign * ge].append((fk, fi, gk, gi))
    return sums


@pytest.mark.parametrize("scheme_id", ["cmatdot", "cgasp", "ca3s", "rgasp", "ra3s", "rmatdot"])
def test_every_target_coefficient_is_pure(scheme_id):
    # no noise-involving cross term may land on an exponent carrying data
    inner = scheme_id in ("cmatdot", "rmatdot")
    for p1, p2, x in itertools.product((1, 2, 3), (1, 2, 3), (0, 1, 2, 3)):
        parts = p1 if inner else (p1, p2)
        lay = exponent_layout(scheme_id, parts, x)
        sums = _term_sums(lay)
        lo, num = lay.window
        assert min(sums) >= lo and max(sums) <= lo + num - 1
        if inner:
            assert sorted(sums[0]) == [("data", i, "data", i) for i in range(p1)]
        else:
            for j, row in enumerate(lay.targets):
                for jp, e in enumerate(row):
                    assert sums[e] == [("data", j, "data", jp)]
        if lay.window_minus is not None:
            diffs = _term_sums(lay, conjugate_g=True)
            lo_m, num_m = lay.window_minus
            assert min(diffs) >= lo_m and max(diffs) <= lo_m + num_m - 1
            for j, row in enumerate(lay.targets_minus):
                for jp, e in enumerate(row):
                    assert diffs[e] == [("data", j, "data", jp)]
        if inner:
            expected_r = recovery_threshold(scheme_id, parts, x)
            assert lay.window[1] == expected_r
        elif scheme_id in ("cgasp", "ca3s"):
            assert lay.window[1] == recovery_threshold(scheme_id, parts, x)
        else:
            assert lay.window[1] == lay.window_minus[1] == recovery_threshold(
                scheme_id, parts, x
            )


@pytest.mark.parametrize("scheme_id", ["cdft", "rdft"])
def test_dft_constant_coefficient_is_pure_mod_n(scheme_id):
    for m, x in itertools.product((1, 2, 3, 5), (0, 1, 2, 3)):
        n = m + 2 * x
        lay = exponent_layout(scheme_id, m, x)
        sums = _term_sums(lay)
        aliased_to_zero = [src for e, srcs in sums.items() if e % n == 0 for src in srcs]
        assert sorted(aliased_to_zero) == [("data", i, "data", i) for i in range(m)]


def test_inner_partition_and_errors():
    a = np.arange(8).reshape(2, 4)
    b = np.arange(12).reshape(4, 3)
    a_blocks, b_blocks = inner_partition(a, b, 2)
    assert len(a_blocks) == len(b_blocks) == 2
    np.testing.assert_array_equal(sum(x @ y for x, y in zip(a_blocks, b_blocks)), a @ b)
    with pytest.raises(ValueError, match="divisible"):
        inner_partition(a, b, 3)
    with pytest.raises(ValueError, match="differ"):
        inner_partition(a, np.ones((5, 3)), 1)


def test_outer_partition_grid():
    a = np.arange(12).reshape(4, 3).astype(float)
    b = np.arange(18).reshape(3, 6).astype(float)
    a_blocks, b_blocks = outer_partition(a, b, 2, 3)
    rebuilt = np.block([[ai @ bj for bj in b_blocks] for ai in a_blocks])
    np.testing.assert_array_equal(rebuilt, a @ b)
    with pytest.raises(ValueError, match="rows"):
        outer_partition(a, b, 3, 2)
    with pytest.raises(ValueError, match="columns"):
        outer_partition(a, b, 2, 4)


def test_inner_complexify_hand_example():
    a = np.array([[1.0, 2.0]])
    b = np.array([[3.0], [4.0]])
    ap, bp = inner_complexify(a, b)
    assert ap[0, 0] == 1 + 2j and bp[0, 0] == 3 - 4j
    np.testing.assert_allclose((ap @ bp).real, a @ b)
    with pytest.raises(ValueError, match="even"):
        inner_complexify(np.ones((2, 3)), np.ones((3, 2)))


def test_outer_complexify_hand_example():
    a = np.array([[1.0], [2.0]])
    b = np.array([[3.0, 4.0]])
    ap, bp = outer_complexify(a, b)
    assert ap[0, 0] == 1 + 2j and bp[0, 0] == 3 + 4j
    np.testing.assert_allclose(assemble_outer(ap @ bp, ap @ np.conj(bp)), a @ b)


def test_complexified_products_match_on_random_matrices():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((6, 10))
    b = rng.standard_normal((10, 8))
    ap, bp = inner_complexify(a, b)
    np.testing.assert_allclose((ap @ bp).real, a @ b, atol=1e-13)
    ap, bp = outer_complexify(a, b)
    np.testing.assert_allclose(assemble_outer(ap @ bp, ap @ np.conj(bp)), a @ b, atol=1e-13)


def test_real_inner_product_two_paths_agree():
    rng = np.random.default_rng(4)
    a = rng.standard_normal((5, 7)) + 1j * rng.standard_normal((5, 7))
    b = rng.standard_normal((7, 6)) + 1j * rng.standard_normal((7, 6))
    np.testing.assert_allclose(real_inner_product(a, b), (a @ b).real, atol=1e-13)


def test_build_polynomials_places_blocks_on_layout():
    params = SchemeParams("cmatdot", x=1, m_parts=2, sigma2=0.0, n_workers=5)
    a = np.array([[1.0 + 0j, 2.0]])
    b = np.array([[3.0 + 0j], [4.0]])
    f, g = build_polynomials(params, a, b)
    assert f.min_exp == 0 and f.num_terms == 3
    np.testing.assert_allclose(f.coeffs[:, 0, 0], [1.0, 2.0, 0.0])
    assert g.min_exp == -1 and g.num_terms == 3
    np.testing.assert_allclose(g.coeffs[:, 0, 0], [4.0, 3.0, 0.0])
    shares = encode(params, a, b)
    assert [s.worker_index for s in shares] == [1, 2, 3, 4, 5]
    # the last evaluation point is always 1, turning shares into plain sums
    np.testing.assert_allclose(shares[-1].a_share, [[3.0]], atol=1e-12)
    np.testing.assert_allclose(shares[-1].b_share, [[7.0]], atol=1e-12)


@pytest.mark.parametrize("scheme_id,kw", SCHEME_GRID)
def test_encode_matches_generator_matrices(scheme_id, kw):
    params = SchemeParams(scheme_id, x=2, sigma2=1.5, seed=9, **kw)
    a, b = random_inputs(scheme_id)
    rng = np.random.default_rng(params.seed)
    f, g = build_polynomials(params, a, b, rng)
    shares = encode(params, a, b)
    f_scheme, g_scheme = generator_matrices(params)
    lay = params.layout
    f_symbols = np.stack([f.coefficient(e) for e in lay.f_data + lay.f_noise])
    g_symbols = np.stack([g.coefficient(e) for e in lay.g_data + lay.g_noise])
    a_expected = np.einsum("ji,jkl->ikl", np.vstack([f_scheme.g_enc, f_scheme.g_sec]), f_symbols)
    b_expected = np.einsum("ji,jkl->ikl", np.vstack([g_scheme.g_enc, g_scheme.g_sec]), g_symbols)
    np.testing.assert_allclose(np.stack([s.a_share for s in shares]), a_expected, atol=1e-10)
    np.testing.assert_allclose(np.stack([s.b_share for s in shares]), b_expected, atol=1e-10)


@pytest.mark.parametrize("scheme_id,kw", SCHEME_GRID)
def test_multiply_round_trip_with_noise(scheme_id, kw):
    params = SchemeParams(scheme_id, x=2, sigma2=2.0, **kw)
    a, b = random_inputs(scheme_id)
    got = multiply(params, a, b)
    assert relative_error(got, a @ b) < 1e-11
    if scheme_id.startswith("r"):
        assert not np.iscomplexobj(got)


def test_decode_from_every_exact_threshold_subset():
    params = SchemeParams("cmatdot", x=1, m_parts=2, stragglers=2, sigma2=1.0)
    assert (params.recovery_threshold, params.num_workers) == (5, 7)
    a, b = random_inputs("cmatdot", 4, 4, 4)
    responses = run_workers(params, encode(params, a, b))
    exact = a @ b
    for subset in itertools.combinations(responses, 5):
        assert relative_error(decode(params, list(subset)), exact) < 1e-9


def test_decode_from_oversized_subsets():
    params = SchemeParams("cmatdot", x=1, m_parts=2, stragglers=4, sigma2=1.0)
    assert params.num_workers == 9
    a, b = random_inputs("cmatdot", 4, 4, 4)
    responses = run_workers(params, encode(params, a, b))
    exact = a @ b
    for subset in itertools.combinations(responses, 7):
        assert relative_error(decode(params, list(subset)), exact) < 1e-9


def test_decode_insufficient_responses():
    params = SchemeParams("cmatdot", x=1, m_parts=2, stragglers=1, sigma2=0.0)
    a, b = random_inputs("cmatdot", 4, 4, 4)
    responses = run_workers(params, encode(params, a, b))
    with pytest.raises(InsufficientResponsesError, match="4 < 5"):
        decode(params, responses[:4])


def test_decode_rejects_duplicate_and_out_of_range_indices():
    params = SchemeParams("cmatdot", x=0, m_parts=2)
    a, b = random_inputs("cmatdot", 4, 4, 4)
    responses = run_workers(params, encode(params, a, b))
    with pytest.raises(ValueError, match="duplicate"):
        decode(params, responses[:2] + responses[:1])
    bad = responses[:2] + [type(responses[0])(99, responses[2].payloads)]
    with pytest.raises(ValueError, match="1[.][.]3"):
        decode(params, bad)


@pytest.mark.parametrize("scheme_id", ["cdft", "rdft"])
def test_dft_decoding_averages_and_interpolates_identically(scheme_id):
    params = SchemeParams(scheme_id, x=2, m_parts=3, sigma2=4.0, seed=5)
    a, b = random_inputs(scheme_id, 6, 12, 6)
    responses = run_workers(params, encode(params, a, b))
    averaged = decode(params, responses)
    interpolated = decode_via_interpolation(params, responses)
    assert relative_error(averaged, a @ b) < 1e-10
    np.testing.assert_allclose(averaged, interpolated, atol=1e-10)
    with pytest.raises(InsufficientResponsesError):
        decode(params, responses[:-1])


def test_dft_rejects_stragglers_and_wrong_worker_counts():
    with pytest.raises(ValueError, match="stragglers"):
        SchemeParams("cdft", x=1, m_parts=2, stragglers=1)
    with pytest.raises(ValueError, match="exactly"):
        SchemeParams("rdft", x=1, m_parts=2, n_workers=9)
    with pytest.raises(ValueError, match="interpolation cross-check"):
        params = SchemeParams("cmatdot", x=0, m_parts=2)
        a, b = random_inputs("cmatdot", 4, 4, 4)
        decode_via_interpolation(params, run_workers(params, encode(params, a, b)))


def test_rmatdot_residue_check_fires_when_roundoff_swamps_the_result():
    # heavy noise plus a consecutive (worst-conditioned) straggler subset in
    # single precision leaves roundoff far above the 1e-6 imaginary budget
    params = SchemeParams(
        "rmatdot", x=1, m_parts=2, stragglers=6, sigma2=1e6, precision="single", seed=1
    )
    a, b = random_inputs("rmatdot", 4, 4, 4)
    responses = run_workers(params, encode(params, a, b))
    with pytest.raises(DecodingResidueError, match="residue"):
        decode(params, responses[: params.recovery_threshold])


def test_scheme_params_validation():
    with pytest.raises(ValueError, match="unknown scheme"):
        SchemeParams("polydot", x=1, m_parts=2)
    with pytest.raises(ValueError, match="m_parts"):
        SchemeParams("cmatdot", x=1)
    with pytest.raises(ValueError, match="k_parts"):
        SchemeParams("cgasp", x=1)
    with pytest.raises(ValueError, match="not both"):
        SchemeParams("cmatdot", x=1, m_parts=2, sigma2=1.0, delta=0.1)
    with pytest.raises(ValueError, match="cannot cover"):
        SchemeParams("cmatdot", x=1, m_parts=2, n_workers=5, stragglers=1)
    with pytest.raises(ValueError, match="non-negative"):
        SchemeParams("cmatdot", x=-1, m_parts=2)
    with pytest.raises(ValueError, match="real"):
        multiply(SchemeParams("rmatdot", x=0, m_parts=1), np.eye(2) * 1j, np.eye(2))


def test_scheme_id_is_case_insensitive():
    assert SchemeParams("CMatDot", x=1, m_parts=2).scheme_id == "cmatdot"


def test_noise_variances_follow_calibration():
    from sdmm.sharing import calibrate_sigma2

    params = SchemeParams("cgasp", x=2, k_parts=2, l_parts=3, delta=1e-2, stragglers=1)
    n = params.num_workers
    sa, sb = params.noise_variances()
    assert sa == calibrate_sigma2(1e-2, 2, 2, n).sigma2
    assert sb == calibrate_sigma2(1e-2, 2, 3, n).sigma2
    real = SchemeParams("rgasp", x=2, k_parts=2, l_parts=3, delta=1e-2)
    ra, rb = real.noise_variances()
    assert ra == calibrate_sigma2(1e-2, 2, 2, real.num_workers, real_factor=2).sigma2
    assert rb == calibrate_sigma2(1e-2, 2, 3, real.num_workers, real_factor=2).sigma2
    assert SchemeParams("cmatdot", x=0, m_parts=2).noise_variances() == (0.0, 0.0)
    assert SchemeParams("cmatdot", x=2, m_parts=2).noise_variances() == (0.0, 0.0)


def test_encode_is_deterministic_in_the_seed():
    params = SchemeParams("ca3s", x=2, k_parts=2, l_parts=2, sigma2=3.0, seed=7)
    a, b = random_inputs("ca3s")
    one = encode(params, a, b)
    two = encode(params, a, b)
    assert all(
        x.a_share.tobytes() == y.a_share.tobytes() and x.b_share.tobytes() == y.b_share.tobytes()
        for x, y in zip(one, two)
    )
    other = encode(SchemeParams("ca3s", x=2, k_parts=2, l_parts=2, sigma2=3.0, seed=8), a, b)
    assert one[0].a_share.tobytes() != other[0].a_share.tobytes()


def test_single_precision_multiply():
    params = SchemeParams("cmatdot", x=1, m_parts=2, sigma2=1.0, precision="single")
    a, b = random_inputs("cmatdot", 4, 4, 4)
    shares = encode(params, a, b)
    assert shares[0].a_share.dtype == np.complex64
    got = multiply(params, a, b)
    assert got.dtype == np.complex64
    assert relative_error(got, a @ b) < 1e-4


def test_cost_model_reference_row():
    costs = cost_model("complex_inner", (256, 256, 256), 8, 3, 21)
    assert costs == {
        "encode_a": (8 * 11 - 2) * 256 * 256 // 8,
        "encode_b": (8 * 11 - 2) * 256 * 256 // 8,
        "decode": (8 * 21 - 2) * 256 * 256,
    }
    outer = cost_model("real_outer_complexified", (64, 32, 128), (4, 2), 3, 43)
    assert outer == {
        "encode_a": (4 * 7 - 1) * 64 * 32 // 4,
        "encode_b": (4 * 5 - 1) * 32 * 128 // 2,
        "decode": (4 * 43 - 1) * 64 * 128,
    }
    assert all(isinstance(v, int) for v in outer.values())


def test_cost_model_divisibility_and_family_names():
    with pytest.raises(ValueError, match="evenly"):
        cost_model("real_inner", (3, 5, 3), 7, 1, 9)
    with pytest.raises(ValueError, match="unknown cost family"):
        cost_model("quantum", (2, 2, 2), 1, 0, 1)
    assert cost_family("cdft") == "complex_inner"
    assert cost_family("RA3S") == "real_outer_complexified"


def test_worker_compute_validates_scheme():
    with pytest.raises(ValueError, match="unknown scheme"):
        worker_compute("nope", np.eye(2), np.eye(2))
