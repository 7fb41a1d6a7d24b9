import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from tronquee.equations import Case, EquationSpec, eqh_residual, normalize
from tronquee.errors import DomainError
from tronquee.series import (FormalSeries, compute_h0, compute_levels, evaluate_transseries, level_prefactor,
                             ring_residual, series_arith, transseries_ring, truncation_residual)

from conftest import levels_for, load, make_spec, nf_for


def test_arith_examples():
    a = FormalSeries([1], 2)
    b = FormalSeries([1], 3)
    p = series_arith(a, b, "mul")
    assert p.offset == 5 and p.coeffs.tolist() == [1]
    r = series_arith(FormalSeries([1, 1], 0, 3), None, "reciprocal")
    assert_array_equal(r.coeffs, [1, -1, 1, -1])
    d = series_arith(a, None, "differentiate")
    assert d.offset == 3 and d.coeffs.tolist() == [-2]
    with pytest.raises(ZeroDivisionError):
        series_arith(FormalSeries([0, 1], 0, 3), None, "reciprocal")
    with pytest.raises(ValueError):
        series_arith(a, b, "pow")


def test_truncation_orders():
    a = FormalSeries([1, 2, 3], 1, 3)
    b = FormalSeries([1, 1], 0)
    assert (a + b).top == 3
    assert (a * b).top == 3
    assert (a * FormalSeries([1], 2)).top == 5
    assert a.differentiate().top == 4
    with pytest.raises(IndexError):
        a.coeff(4)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=3), min_size=4, max_size=12))
def test_reciprocal_inverts(c):
    c[0] = c[0] + 4  # keep the leading coefficient away from zero
    a = FormalSeries(c, 0, len(c) - 1)
    one = a * a.reciprocal()
    assert_allclose(one.coeffs, np.eye(1, len(c))[0], atol=1e-9 * max(1, np.abs(c).max() ** len(c)))


def test_json_roundtrip():
    f = compute_h0(nf_for("PIV_1"), 10)
    g = FormalSeries.from_json(f.to_json())
    assert g.offset == f.offset and g.top == f.top
    assert_array_equal(g.coeffs, f.coeffs)


def test_h0_leading_golden(case):
    gold = load("h0_leading.json")[case]
    A = None if gold["A"] is None else complex(*gold["A"])
    spec = make_spec(case, gold["alpha"], gold["beta"], A)
    f = compute_h0(normalize(spec), 6)
    assert f.offset == 2
    assert_allclose(f.coeff(2), complex(*gold["h02"]), rtol=1e-12, atol=1e-14)


def _mp_oracle_coeffs(nf, n_max, radius=0.02, M=64):
    """h0 coefficients by order-by-order balance on Cauchy integrals, in 40-digit arithmetic.

    With h truncated after w^-(j-1), the residual h'' - H(w, h, h') is an analytic
    function of t = 1/w whose t^j coefficient equals h_j (the -h term dominates the
    linearized equation). Coefficients are read off with the trapezoid rule on
    |t| = radius, using the direct (unsplit) form of H.
    """
    with mp.workdps(40):
        ts = [radius * mp.expjpi(mp.mpf(2 * k) / M) for k in range(M)]
        coeffs = {}
        for j in range(2, n_max + 1):
            acc = 0
            for t in ts:
                h = sum(c * t ** m for m, c in coeffs.items())
                hp = sum(-m * c * t ** (m + 1) for m, c in coeffs.items())
                hpp = sum(m * (m + 1) * c * t ** (m + 2) for m, c in coeffs.items())
                r = hpp - nf.hpp_direct(t, mp.mpc(h), mp.mpc(hp))
                acc += r / t ** j
            coeffs[j] = acc / M
        return [complex(coeffs[j]) for j in range(2, n_max + 1)]


def test_h0_against_high_precision_balance(case):
    nf = nf_for(case)
    f = compute_h0(nf, 8)
    ref = _mp_oracle_coeffs(nf, 8)
    assert_allclose(f.coeffs, ref, rtol=1e-10, atol=1e-13)


def test_h0_residual_example():
    nf = normalize(EquationSpec(Case.PIII_i, 0, 0, 1))
    f = compute_h0(nf, 6)
    # alpha = beta = 0 has h0 = 0 exactly
    assert not np.any(f.coeffs)
    assert abs(truncation_residual(nf, f, 30.0)) < 10 * 30.0 ** -7
    nf = nf_for("PIII_i")
    f = compute_h0(nf, 6)
    r = [abs(truncation_residual(nf, f, w)) for w in (60.0, 120.0)]
    assert_allclose(r[1] / r[0], 2.0 ** -7, rtol=0.2)


def test_h0_minimal_truncation(case):
    nf = nf_for(case)
    f = compute_h0(nf, 2)
    assert f.N == 0 and f.top == 2
    r = [abs(truncation_residual(nf, f, w)) for w in (100.0, 200.0)]
    if r[0] > 1e-30:
        assert_allclose(np.log(r[1] / r[0]) / np.log(2), -3, atol=0.1)
    with pytest.raises(DomainError):
        compute_h0(nf, 1)


def test_h0_uniqueness(case):
    nf = nf_for(case)
    a = compute_h0(nf, 12)
    b = compute_h0(nf, 20)
    assert_array_equal(a.coeffs, b.coeffs[:len(a.coeffs)])


def test_truncation_residual_matches_direct_at_moderate_w(case):
    """Where cancellation is harmless (small |w|, few terms) the two evaluations agree."""
    nf = nf_for(case)
    f = compute_h0(nf, 4)
    w = 6.0 + 1.0j
    h = f.evaluate(w)
    hp = f.differentiate().evaluate(w)
    hpp = f.differentiate().differentiate().evaluate(w)
    direct = eqh_residual(nf, w, h, hp, hpp)
    assert_allclose(truncation_residual(nf, f, w), direct, rtol=1e-6, atol=1e-14)


def test_levels_normalization_and_residual(case):
    nf = nf_for(case)
    ts = levels_for(case)
    assert ts.level(1).coeff(0) == 1
    R = ring_residual(nf, transseries_ring(ts, ts.h0.N + 2)).data
    scale = np.abs(transseries_ring(ts).data).max(axis=1)
    # level 0 through order N, level 1 through order N+1, levels >= 2 through order N
    assert np.abs(R[0, :31]).max() < 1e-10 * scale[0]
    assert np.abs(R[1, :32]).max() < 1e-10 * max(scale[1], 1)
    for k in (2, 3):
        assert np.abs(R[k, :31]).max() < 1e-10 * max(scale[k], 1)


def test_level_one_solves_linearization():
    """e^-w w^-beta1 s1 solves the equation linearized about h0, to the truncation order."""
    nf = nf_for("PIV_1")
    ts = levels_for("PIV_1")
    h0 = ts.h0
    w = 25.0 + 3.0j
    s1 = ts.level(1)
    xi = level_prefactor(ts.beta1, 1.0, w)
    s, sp, spp = (s1.evaluate(w), s1.differentiate().evaluate(w), s1.differentiate().differentiate().evaluate(w))
    a = -1 - ts.beta1 / w
    da = ts.beta1 / w ** 2
    u = xi * s
    up = xi * (a * s + sp)
    upp = xi * ((a * a + da) * s + 2 * a * sp + spp)
    H = h0.optimal(w)[0]
    Hp = h0.differentiate().optimal(w)[0]

    def F(t):
        return nf.hpp(1 / w, H + t * u, Hp + t * up)
    eps = 1e-6 / abs(u)
    lin = (F(eps) - F(-eps)) / (2 * eps)
    assert abs(upp - lin) < 1e-9 * abs(u)


def test_s20_matches_f0_taylor():
    ts = compute_levels(normalize(EquationSpec(Case.PIII_i, 0, 0, 1)), 2, 6)
    assert_allclose(ts.level(2).coeff(0), 0.5, rtol=1e-12)


def test_sk0_matches_f0_golden(case):
    taylor = load("f0.json")["taylor_A1"][case]
    ts = levels_for(case, K=6, N=8)
    got = [ts.level(k).coeff(0) for k in range(1, 7)]
    assert_allclose(got, taylor, rtol=1e-10, atol=1e-12)


def test_evaluate_c_zero_is_h0(case):
    ts = levels_for(case)
    w = 30.0
    v = evaluate_transseries(ts, 0, w)
    assert v.value == ts.h0.optimal(w)[0]
    assert not v.warn


def test_evaluate_level_structure():
    ts = levels_for("PIII_ii")
    w, C = 30.0, 0.8
    d = evaluate_transseries(ts, C, w).value - evaluate_transseries(ts, 0, w).value
    xi = level_prefactor(ts.beta1, C, w)
    bound = abs(xi) * 2 / abs(w) + 10 * abs(xi) ** 2
    assert abs(d - xi) < bound
    assert abs(d - xi) > 1e-3 * abs(xi) / abs(w)  # the 1/w correction is really there


def test_evaluate_K_consistency():
    w, C = 40.0, 2.0
    a = evaluate_transseries(levels_for("PIV_2", K=1), C, w).value
    b = evaluate_transseries(levels_for("PIV_2", K=3), C, w).value
    xi = abs(level_prefactor(nf_for("PIV_2").beta1, C, w))
    assert abs(a - b) < 10 * xi ** 2


def test_warn_flag_for_large_prefactor():
    ts = levels_for("PIII_ii")
    assert evaluate_transseries(ts, 1e30, 20.0).warn


def test_level_k_scales_as_power_of_level_one():
    ts = levels_for("PIV_2", K=3)
    for w in (30.0, 45.0):
        x1 = level_prefactor(ts.beta1, 0.5, w)
        for k in (2, 3):
            assert_allclose(level_prefactor(ts.beta1, 0.5, w, k), x1 ** k, rtol=1e-14)
