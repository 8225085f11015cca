"""Gram-matrix moments against closed forms and a scalar-loop oracle."""

import csv

import numpy as np
import pytest

from mcmimo.channel import draw_small_scale
from mcmimo.gramstats import (GRAM_STATISTICS, GramStats, closed_form_moments,
                              estimate_gram_moments, gram_matrix,
                              write_gram_csv)


def gram_oracle(H):
    """Brute-force q_ij = (1/N) sum_n h_in conj(h_jn), scalar loops only."""
    K, N = H.shape
    Q = np.zeros((K, K), dtype=complex)
    for i in range(K):
        for j in range(K):
            acc = 0.0 + 0.0j
            for n in range(N):
                acc += H[i, n] * np.conjugate(H[j, n])
            Q[i, j] = acc / N
    return Q


def test_gram_identity_rows():
    K, N = 3, 6
    H = np.eye(N, dtype=complex)[:K]
    np.testing.assert_allclose(gram_matrix(H), np.eye(K) / N, atol=0)


def test_gram_single_row():
    H = np.array([[1.0 + 0.0j, 0.0 + 1.0j]])
    np.testing.assert_allclose(gram_matrix(H), [[1.0]], atol=0)


def test_gram_matches_scalar_oracle():
    rng = np.random.default_rng(8)
    H = draw_small_scale(rng, 2, 3)
    np.testing.assert_allclose(gram_matrix(H), gram_oracle(H), rtol=1e-13)


def test_gram_exactly_hermitian_nonneg_diag():
    rng = np.random.default_rng(9)
    H = draw_small_scale(rng, 6, 40, size=(5,))
    Q = gram_matrix(H)
    # exact equality, not approximate: construction mirrors conjugates
    np.testing.assert_array_equal(Q, np.conjugate(np.swapaxes(Q, -1, -2)))
    d = np.diagonal(Q, axis1=-2, axis2=-1)
    assert np.all(d.imag == 0.0)
    assert np.all(d.real >= 0.0)


def test_closed_forms():
    assert closed_form_moments(4) == (1.0, 1.25, 0.0, 0.25, 0.25, 0.25)
    assert closed_form_moments(1) == (1.0, 2.0, 0.0, 1.0, 1.0, 1.0)
    for N in (10, 100, 1000):
        assert closed_form_moments(N)[4] * N == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        closed_form_moments(0)


def test_estimates_track_closed_forms():
    st = estimate_gram_moments(100, 4, 10_000, np.random.default_rng(10))
    assert abs(st.mean_diag - 1.0) < st.ci_halfwidth["mean_diag"]
    assert abs(st.var_diag - 0.01) < st.ci_halfwidth["var_diag"]
    assert abs(st.mean_offdiag_sqmag - 0.01) < st.ci_halfwidth["mean_offdiag_sqmag"]
    assert abs(st.mean_offdiag.real) < st.ci_halfwidth["mean_offdiag_re"]
    assert abs(st.mean_offdiag.imag) < st.ci_halfwidth["mean_offdiag_im"]


def test_estimate_small_n():
    st = estimate_gram_moments(10, 4, 20_000, np.random.default_rng(11))
    assert abs(st.mean_diag_sq - 1.1) < st.ci_halfwidth["mean_diag_sq"]
    st1 = estimate_gram_moments(1, 4, 20_000, np.random.default_rng(12))
    assert abs(st1.var_diag - 1.0) < st1.ci_halfwidth["var_diag"]


def test_ci_coverage_about_99_percent():
    # 3-sigma CLT intervals: over 20 independent repetitions allow at most
    # one excursion per statistic
    checks = {name: 0 for name in GRAM_STATISTICS}
    for rep in range(20):
        st = estimate_gram_moments(25, 3, 2000, np.random.default_rng(100 + rep))
        for name in GRAM_STATISTICS:
            if abs(st.empirical(name) - st.closed_form(name)) > st.ci_halfwidth[name]:
                checks[name] += 1
    for name, misses in checks.items():
        assert misses <= 1, f"{name} fell outside its CI {misses}/20 times"


def test_var_diag_halves_when_n_doubles():
    a = estimate_gram_moments(32, 4, 20_000, np.random.default_rng(13))
    b = estimate_gram_moments(64, 4, 20_000, np.random.default_rng(14))
    ratio = a.var_diag / b.var_diag
    # propagate the two CIs into a tolerance on the ratio
    tol = ratio * (a.ci_halfwidth["var_diag"] / a.var_diag
                   + b.ci_halfwidth["var_diag"] / b.var_diag)
    assert abs(ratio - 2.0) < tol


def test_single_user_has_no_offdiag():
    st = estimate_gram_moments(8, 1, 100, np.random.default_rng(15))
    assert np.isnan(st.mean_offdiag_sqmag)
    assert abs(st.mean_diag - 1.0) < st.ci_halfwidth["mean_diag"]


def test_gram_csv(tmp_path):
    st = estimate_gram_moments(16, 3, 500, np.random.default_rng(16))
    out = tmp_path / "gram.csv"
    write_gram_csv(out, [st], header_comment="fixture")
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# ")
    rows = list(csv.DictReader(lines[1:]))
    assert len(rows) == len(GRAM_STATISTICS)
    by_name = {r["statistic"]: r for r in rows}
    assert float(by_name["mean_diag"]["closed_form"]) == 1.0
    assert float(by_name["var_diag"]["closed_form"]) == pytest.approx(1 / 16)
    assert all(r["N"] == "16" for r in rows)
    assert isinstance(st, GramStats)
