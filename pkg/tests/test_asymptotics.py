import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from sobotest.asymptotics import (
    AsymptoticPower,
    MixtureLaw,
    ThresholdReport,
    asymptotic_power,
    classify_threshold,
    expansion_coeffs,
    expansion_system,
    gegenbauer_expectation_coeffs,
    limit_law,
    mixture_quantile,
    mixture_tail,
    noncentral_chi2_cdf,
    noncentral_chi2_sf,
    noncentrality_delayed,
    noncentrality_standard,
    power_curve,
    power_curve_csv,
)
from sobotest.rotsym import (
    cauchy,
    gegenbauer_expectation_oracle,
    power,
    t_moment_oracle,
    vmf,
    watson,
)
from sobotest.sobolev import WeightSequence
from sobotest.specfun import harmonic_dim, t_factor

BUILTINS = {
    "vmf": vmf(),
    "watson": watson(),
    "power_3": power(3),
    "cauchy": cauchy(),
}

# frozen from the symbolic ratio-series oracle
# (tests/oracles/asymptotics_oracle.py): (p, f, m, q) -> b_{m,0..q-m}
MOMENT_COEFFS = {
    (3, "vmf", 1, 6): [0, Fraction(1, 3), 0, Fraction(-1, 45), 0, Fraction(2, 945)],
    (2, "vmf", 1, 5): [0, Fraction(1, 2), 0, Fraction(-1, 16), 0],
    (4, "vmf", 2, 6): [Fraction(1, 4), 0, Fraction(1, 32), 0, Fraction(-1, 512)],
    (3, "watson", 2, 8): [Fraction(1, 3), 0, Fraction(4, 45), 0,
                          Fraction(8, 945), 0, Fraction(-16, 14175)],
    (2, "watson", 2, 6): [Fraction(1, 2), 0, Fraction(1, 8), 0, 0],
    (5, "watson", 4, 8): [Fraction(3, 35), 0, Fraction(16, 525), 0,
                          Fraction(1088, 202125)],
    (3, "power_3", 1, 7): [0, 0, 0, Fraction(1, 5), 0, 0, 0],
    (3, "cauchy", 1, 4): [0, Fraction(-2, 3), 0, Fraction(-32, 45)],
    (4, "cauchy", 3, 7): [0, Fraction(-1, 4), 0, Fraction(-3, 8), 0],
}

# same oracle: (p, k, f, r) -> coefficients of kappa^(k..k+r)
GEGEN_COEFFS = {
    (3, 1, "vmf", 4): [Fraction(1, 3), 0, Fraction(-1, 45), 0, Fraction(2, 945)],
    (3, 2, "watson", 4): [Fraction(2, 15), 0, Fraction(4, 315), 0, Fraction(-8, 4725)],
    (3, 2, "power_3", 4): [0, 0, 0, 0, Fraction(1, 21)],
    (2, 2, "vmf", 4): [Fraction(1, 8), 0, Fraction(-1, 48), 0, Fraction(11, 3072)],
    (4, 3, "vmf", 3): [Fraction(1, 48), 0, Fraction(-1, 640), 0],
    (5, 2, "cauchy", 3): [Fraction(48, 35), 0, Fraction(64, 25), 0],
}


def test_moment_coeffs_match_symbolic_oracle():
    for (p, name, m, q), want in MOMENT_COEFFS.items():
        got = expansion_coeffs(p, m, q, BUILTINS[name])
        assert got.shape == (q - m + 1,)
        for ell, ref in enumerate(want):
            if ref == 0:
                assert got[ell] == 0.0, (p, name, m, ell)
            else:
                assert got[ell] == pytest.approx(float(ref), rel=1e-11), (p, name, m, ell)


def test_moment_coeffs_low_order_values():
    # zeroth order is the uniform moment; first order is f'(0)/p for m=1
    for p in (2, 3, 4, 7):
        got = expansion_coeffs(p, 1, 2, vmf())
        assert got[0] == 0.0
        assert got[1] == pytest.approx(1.0 / p, rel=1e-13)
        for f in BUILTINS.values():
            assert expansion_coeffs(p, 2, 2, f)[0] == pytest.approx(1.0 / p, rel=1e-13)


def test_moment_coeffs_symmetric_f_odd_moment_vanishes():
    got = expansion_coeffs(3, 1, 4, watson())
    assert np.all(got == 0.0)


def test_moment_coeffs_parity_zeros_are_exact():
    for m in (1, 2, 3):
        got = expansion_coeffs(3, m, m + 5, vmf())
        for ell in range(got.size):
            if (ell - m) % 2:
                assert got[ell] == 0.0


def test_expansion_coeffs_validation():
    with pytest.raises(ValueError):
        expansion_coeffs(3, 0, 2, vmf())
    with pytest.raises(ValueError):
        expansion_coeffs(3, 3, 2, vmf())
    with pytest.raises(ValueError):
        expansion_coeffs(3, 1, 18, vmf())


def test_expansion_system_structure():
    system = expansion_system(3, vmf(), 8, m=2, k=2)
    size = system.order + 1
    assert system.A.shape == (size, size)
    assert np.all(np.diag(system.A) == 1.0)
    assert np.all(np.triu(system.A, 1) == 0.0)
    for i in range(size):
        for j in range(i):
            if (i - j) % 2:
                assert system.A[i, j] == 0.0
    # strictly lower part is nilpotent at exactly the matrix size
    low = system.A - np.eye(size)
    powermat = np.linalg.matrix_power(low, size)
    assert np.all(powermat == 0.0)


def test_neumann_inverse_matches_forward_substitution():
    for name in BUILTINS:
        system = expansion_system(3, BUILTINS[name], 7, m=1)
        inv = system.neumann_inverse()
        size = system.order + 1
        for col in range(size):
            e = np.zeros(size)
            e[col] = 1.0
            assert np.allclose(system.solve(e), inv[:, col], rtol=0, atol=1e-12)
        assert np.allclose(inv @ system.A, np.eye(size), atol=1e-12)
        # parity structure survives inversion
        for i in range(size):
            for j in range(i):
                if (i - j) % 2:
                    assert inv[i, j] == 0.0


def _moment_remainder_ratios(p, m, q, f, kappas=(0.2, 0.1, 0.05)):
    b = expansion_coeffs(p, m, q, f)
    ratios = []
    for kap in kappas:
        approx = sum(c * kap**ell for ell, c in enumerate(b))
        exact = t_moment_oracle(p, kap, f, m)
        ratios.append(abs(exact - approx) / kap ** (q - m))
    return b, ratios


@pytest.mark.parametrize("name", sorted(BUILTINS))
@pytest.mark.parametrize("p", [2, 3, 4])
@pytest.mark.parametrize("m", [1, 2, 3])
def test_moment_expansion_matches_quadrature(name, p, m):
    f = BUILTINS[name]
    # horizon at the last coefficient position sharing the parity of m;
    # one step further only renames the o(.) order without adding a term
    q = m + 4 if m % 2 == 0 else m + 3
    b, ratios = _moment_remainder_ratios(p, m, q, f)
    peak = float(np.max(np.abs(b)))
    if peak == 0.0:
        # identically-zero expansion: the oracle moment itself must vanish
        for kap in (0.2, 0.1, 0.05):
            assert abs(t_moment_oracle(p, kap, f, m)) < 1e-12
        return
    assert ratios[0] >= ratios[1] >= ratios[2] or max(ratios) < 1e-9
    assert ratios[-1] < 0.1 * peak


def test_moment_oracle_small_kappa_spot_value():
    # E[t] under a weak concentration is kappa/p to leading order
    assert abs(t_moment_oracle(3, 0.1, vmf(), 1) - 0.1 / 3.0) < 1e-4


def test_gegenbauer_coeffs_match_symbolic_oracle():
    for (p, k, name, r), want in GEGEN_COEFFS.items():
        got = gegenbauer_expectation_coeffs(p, k, r, BUILTINS[name])
        assert got.shape == (r + 1,)
        for i, ref in enumerate(want):
            if ref == 0:
                assert got[i] == 0.0, (p, k, name, i)
            else:
                assert got[i] == pytest.approx(float(ref), rel=1e-11), (p, k, name, i)


def test_gegenbauer_leading_coefficient_closed_form():
    from sobotest.specfun import monomial_to_gegenbauer

    for p in (2, 3, 4, 5):
        for k in range(1, 6):
            for name in ("vmf", "power_3"):
                f = BUILTINS[name]
                fk = f.derivative_at_zero(k)
                lead = gegenbauer_expectation_coeffs(p, k, 0, f)[0]
                want = (monomial_to_gegenbauer(p, k)[k] * fk
                        / (math.factorial(k) * t_factor(p, k) ** 2))
                if fk == 0.0:
                    assert lead == 0.0
                else:
                    assert lead == pytest.approx(want, rel=1e-12)


def test_gegenbauer_structural_zeros_below_degree():
    system = expansion_system(3, vmf(), 7, k=3)
    full = system.solve(system.z)
    assert np.all(full[:3] == 0.0)
    # symmetric f against an odd degree: flat zero through the horizon
    got = gegenbauer_expectation_coeffs(4, 1, 2, watson())
    assert np.all(got == 0.0)


def test_gegenbauer_degree_one_is_scaled_first_moment():
    # degree-one polynomial is t for p in {2,3} and (p-2) t above
    for p in (2, 3, 5):
        a = gegenbauer_expectation_coeffs(p, 1, 4, vmf())
        b = expansion_coeffs(p, 1, 6, vmf())[1:]
        scale = 1.0 if p == 2 else float(p - 2)
        assert np.allclose(a, scale * b, rtol=1e-12, atol=0)


@pytest.mark.parametrize("case", sorted(GEGEN_COEFFS))
def test_gegenbauer_expansion_matches_quadrature(case):
    p, k, name, r = case
    f = BUILTINS[name]
    # even r keeps the horizon on the informative parity
    r = r - (r % 2)
    coeffs = gegenbauer_expectation_coeffs(p, k, r, f)
    ratios = []
    remainders = []
    for kap in (0.2, 0.1, 0.05):
        approx = sum(c * kap ** (k + i) for i, c in enumerate(coeffs))
        exact = gegenbauer_expectation_oracle(p, kap, f, k)
        remainders.append(abs(exact - approx))
        ratios.append(remainders[-1] / kap ** (k + r))
    peak = float(np.max(np.abs(coeffs)))
    assert ratios[-1] < max(0.1 * peak, 1e-9)
    # monotone decrease only where the remainder sits above quadrature noise
    live = [i for i, rem in enumerate(remainders) if rem > 1e-12]
    assert all(ratios[i] >= ratios[j] for i, j in zip(live, live[1:]))


def test_noncentrality_standard_closed_forms():
    # degree 1: tau^2/p for a unit slope at zero
    for p in (2, 3, 5):
        for tau in (1.0, 2.5):
            assert noncentrality_standard(p, 1, tau, vmf()) == pytest.approx(
                tau**2 / p, rel=1e-12)
    # degree 2 with f''(0) = 2: (p-1) f''(0)^2 tau^4 / (2 p^2 (p+2))
    for p in (2, 3, 4):
        tau = 1.7
        want = (p - 1) * 4.0 * tau**4 / (2.0 * p**2 * (p + 2))
        assert noncentrality_standard(p, 2, tau, watson()) == pytest.approx(
            want, rel=1e-12)
    # odd derivative of a symmetric profile vanishes
    assert noncentrality_standard(3, 3, 2.0, watson()) == 0.0
    assert noncentrality_standard(3, 2, 0.0, vmf()) == 0.0


def test_noncentrality_standard_dual_route_over_grid():
    # the product form and the m_{k,k} form are asserted equal internally
    for p in (2, 3, 4, 5):
        for k in range(1, 9):
            value = noncentrality_standard(p, k, 1.3, vmf())
            assert value > 0.0


def test_noncentrality_delayed_values():
    # first degree detected through third order: 9 tau^6 / (p (p+2)^2)
    for p in (2, 3, 5):
        tau = 1.4
        want = 9.0 * tau**6 / (p * (p + 2) ** 2)
        assert noncentrality_delayed(p, 1, 3, tau, power(3)) == pytest.approx(
            want, rel=1e-12)
    assert noncentrality_delayed(3, 1, 3, 1.0, power(3)) == pytest.approx(0.12, rel=1e-12)
    # second degree detected through sixth order
    want = 5.0 / 441.0
    assert noncentrality_delayed(3, 2, 6, 1.0, power(3)) == pytest.approx(want, rel=1e-12)


def test_noncentrality_delayed_reduces_to_standard():
    for p in (2, 3, 4):
        for k in (1, 2, 3, 4):
            a = noncentrality_delayed(p, k, k, 1.9, vmf())
            b = noncentrality_standard(p, k, 1.9, vmf())
            assert a == pytest.approx(b, rel=1e-12)


def test_noncentrality_delayed_validation():
    with pytest.raises(ValueError):
        noncentrality_delayed(3, 2, 3, 1.0, power(3))  # parity mismatch
    with pytest.raises(ValueError):
        noncentrality_delayed(3, 4, 2, 1.0, vmf())  # k_star below k
    with pytest.raises(ValueError):
        noncentrality_standard(3, 1, -1.0, vmf())


RAYLEIGH = WeightSequence.delta(1, name="rayleigh")
BINGHAM = WeightSequence.delta(2, name="bingham")
THREE = WeightSequence.delta(3, name="3-test")


def test_classification_table():
    rep = classify_threshold(RAYLEIGH, vmf(), 4)
    assert (rep.case, rep.k_star, rep.k_dagger) == ("standard", 1, 1)
    assert rep.rate_exponent == 0.5
    assert rep.rate_string() == "n^(-1/2)"

    rep = classify_threshold(BINGHAM, vmf(), 4)
    assert (rep.case, rep.k_star, rep.k_dagger) == ("standard", 2, 2)
    assert rep.rate_string() == "n^(-1/4)"

    rep = classify_threshold(THREE, vmf(), 6)
    assert (rep.case, rep.k_star, rep.k_dagger) == ("standard", 3, 3)
    assert rep.rate_string() == "n^(-1/6)"

    rep = classify_threshold(BINGHAM, watson(), 8)
    assert (rep.case, rep.k_star) == ("standard", 2)

    rep = classify_threshold(RAYLEIGH, watson(), 8)
    assert rep.case == "blind"
    assert rep.k_star is None and rep.k_dagger is None
    assert rep.blind_up_to_order == 8
    assert rep.rate_string() == "none"

    rep = classify_threshold(RAYLEIGH, power(3), 12)
    assert (rep.case, rep.k_star, rep.k_dagger) == ("delayed", 3, 1)
    assert rep.rate_string() == "n^(-1/6)"

    rep = classify_threshold(BINGHAM, power(3), 12)
    assert (rep.case, rep.k_star, rep.k_dagger) == ("delayed", 6, 2)
    assert rep.rate_string() == "n^(-1/12)"

    rep = classify_threshold(THREE, power(3), 12)
    assert (rep.case, rep.k_star, rep.k_dagger) == ("standard", 3, 3)
    assert rep.rate_string() == "n^(-1/6)"


def test_combined_weights_inherit_oracle_rate():
    both = WeightSequence.finite([1.0, 0.7])
    for name, f in BUILTINS.items():
        combined = classify_threshold(both, f, 12)
        best = None
        for single in (WeightSequence.delta(1), WeightSequence.delta(2)):
            rep = classify_threshold(single, f, 12)
            if rep.rate_exponent is not None:
                best = rep.rate_exponent if best is None else max(best, rep.rate_exponent)
        assert combined.rate_exponent == best, name


def test_threshold_report_record():
    text = classify_threshold(BINGHAM, power(3), 12).to_record()
    assert "case=delayed" in text
    assert "k_star=6" in text
    assert "k_dagger=2" in text
    assert "rate=n^(-1/12)" in text
    blind = classify_threshold(RAYLEIGH, watson(), 8).to_record()
    assert "case=blind" in blind
    assert "blind_up_to_order=8" in blind
    assert "n^(-1/16)" in blind


def test_limit_law_null_structure():
    law = limit_law(RAYLEIGH, 3)
    assert law.terms == ((1.0, 3, 0.0),)
    assert law.tail_bound == 0.0
    law = limit_law(WeightSequence.finite([1.0, 0.5]), 4)
    assert law.terms == ((1.0, 4, 0.0), (0.25, harmonic_dim(4, 2), 0.0))


def test_limit_law_alternative_structure():
    tau = 1.3
    law = limit_law(BINGHAM, 3, watson(), tau, 0.25)
    assert len(law.terms) == 1
    weight, df, nc = law.terms[0]
    assert (weight, df) == (1.0, 5)
    assert nc == pytest.approx(4.0 * tau**4 / 45.0, rel=1e-12)

    both = WeightSequence.finite([1.0, 1.0])
    law = limit_law(both, 3, power(3), tau, 1.0 / 6.0)
    assert len(law.terms) == 2
    assert law.terms[0][1] == 3 and law.terms[1][1] == 5
    assert law.terms[0][2] == pytest.approx(9.0 * tau**6 / 75.0, rel=1e-12)
    assert law.terms[1][2] == 0.0

    # undershooting rate: central again
    law = limit_law(BINGHAM, 3, watson(), tau, 0.5)
    assert law.terms[0][2] == 0.0
    # blind pair: central at any rate
    law = limit_law(RAYLEIGH, 3, watson(), tau, 0.5, q=8)
    assert law.terms[0][2] == 0.0
    # tau = 0 degenerates to the null law
    law = limit_law(BINGHAM, 3, watson(), 0.0, 0.25)
    assert law.terms[0][2] == 0.0


def test_limit_law_rate_mismatch_raises():
    with pytest.raises(ValueError):
        limit_law(BINGHAM, 3, watson(), 1.0, 1.0 / 6.0)
    with pytest.raises(ValueError):
        limit_law(RAYLEIGH, 3, f=vmf(), tau=None, rate_exponent=0.5)
    with pytest.raises(ValueError):
        limit_law(RAYLEIGH, 3, vmf(), -1.0, 0.5)


def test_limit_law_infinite_weights():
    rule = WeightSequence.from_rule(lambda k: 2.0 ** (-k), name="geom")
    law = limit_law(rule, 3, vmf(), 1.0, 0.5)
    assert law.tail_bound > 0.0
    assert law.terms[0][2] == pytest.approx(1.0 / 3.0, rel=1e-12)
    assert all(nc == 0.0 for _, _, nc in law.terms[1:])


def test_noncentral_series_against_scipy():
    xs = np.array([0.5, 2.0, 7.8147, 15.0, 40.0])
    for df in (1, 3, 5, 7):
        for nc in (0.5, 2.0, 10.0, 100.0):
            mine = noncentral_chi2_cdf(xs + nc, df, nc)
            ref = stats.ncx2.cdf(xs + nc, df, nc)
            assert np.allclose(mine, ref, rtol=1e-10, atol=1e-13)
            mine_sf = noncentral_chi2_sf(xs + nc, df, nc)
            ref_sf = stats.ncx2.sf(xs + nc, df, nc)
            assert np.allclose(mine_sf, ref_sf, rtol=1e-9, atol=1e-13)


def test_noncentral_series_large_noncentrality():
    # far enough out that naive Poisson weights would underflow
    nc = 6000.0
    df = 5
    grid = np.array([nc * 0.8, nc + df, nc * 1.2])
    vals = noncentral_chi2_cdf(grid, df, nc)
    assert np.all(np.diff(vals) > 0.0)
    assert vals[0] < 0.01 and vals[-1] > 0.99
    assert noncentral_chi2_cdf(nc + df - 1.0, df, nc) == pytest.approx(0.5, abs=0.02)


def test_noncentral_series_stays_a_probability():
    # the window dot product used to overshoot 1 by a few ulp out here
    assert noncentral_chi2_sf(11.0705, 5, 6025.41) <= 1.0
    assert noncentral_chi2_cdf(1e6, 5, 6025.41) <= 1.0
    assert noncentral_chi2_sf(1e-12, 3, 4000.0) <= 1.0


def test_single_term_quantile_is_deterministic_series_value():
    law = MixtureLaw(3, [(1.0, 3, 0.0)])
    value, se = law.quantile(0.05)
    assert value == pytest.approx(stats.chi2.ppf(0.95, 3), rel=1e-10)
    assert value == pytest.approx(7.814727903251179, rel=1e-10)
    assert se > 0.0
    noncentral = MixtureLaw(3, [(2.0, 5, 3.7)])
    value, _ = noncentral.quantile(0.1)
    assert value == pytest.approx(2.0 * stats.ncx2.ppf(0.9, 5, 3.7), rel=1e-8)


def test_single_term_tail_series_value():
    law = MixtureLaw(3, [(1.0, 3, 3.0)])
    value, se = law.tail(7.814727903251179)
    assert value == pytest.approx(stats.ncx2.sf(7.814727903251179, 3, 3.0), rel=1e-9)
    # frozen from a direct Poisson-mixture sum over central tails
    assert value == pytest.approx(0.2746396149, rel=1e-8)
    assert se > 0.0


def test_mixture_sample_determinism_and_scaling():
    terms = [(1.0, 3, 0.0), (0.5, 5, 1.2)]
    law_a = MixtureLaw(3, terms, seed=11)
    law_b = MixtureLaw(3, terms, seed=11)
    assert np.array_equal(law_a.sample(), law_b.sample())
    law_c = MixtureLaw(3, terms, seed=12)
    assert not np.array_equal(law_a.sample(), law_c.sample())

    doubled = MixtureLaw(3, [(2.0, 3, 0.0), (1.0, 5, 1.2)], seed=11)
    q1, _ = law_a.quantile(0.05)
    q2, _ = doubled.quantile(0.05)
    assert q2 == 2.0 * q1


def test_two_term_mixture_against_collapsed_chi_square():
    # chi2_3 + chi2_5 is chi2_8; the Monte Carlo path must agree with the
    # deterministic series of the collapsed single-term law
    law = MixtureLaw(3, [(1.0, 3, 0.0), (1.0, 5, 0.0)], seed=5)
    value, se = law.quantile(0.05)
    target = stats.chi2.ppf(0.95, 8)
    assert abs(value - target) < 4.0 * se
    tail, tail_se = law.tail(target)
    assert abs(tail - 0.05) < 4.0 * max(tail_se, 1e-12)


def test_mixture_quantile_monotone_in_alpha():
    law = MixtureLaw(3, [(1.0, 3, 0.0), (0.7, 5, 2.0)], seed=3)
    values = [law.quantile(a)[0] for a in (0.01, 0.05, 0.1, 0.5)]
    assert values == sorted(values, reverse=True)


def test_mixture_tail_monotone_and_wrappers():
    law = MixtureLaw(3, [(1.0, 3, 0.0), (0.7, 5, 2.0)], seed=3)
    t1, _ = mixture_tail(law, 2.0)
    t2, _ = mixture_tail(law, 8.0)
    assert t1 > t2
    q, se = mixture_quantile(law, 0.05)
    assert q > 0 and se >= 0.0


def test_mixture_validation():
    with pytest.raises(ValueError):
        MixtureLaw(3, [])
    with pytest.raises(ValueError):
        MixtureLaw(3, [(0.0, 3, 0.0)])
    with pytest.raises(ValueError):
        MixtureLaw(3, [(1.0, 0, 0.0)])
    with pytest.raises(ValueError):
        MixtureLaw(3, [(1.0, 3, -0.5)])
    with pytest.raises(ValueError):
        MixtureLaw(3, [(1.0, 3, 0.0)], draws=1000)
    law = MixtureLaw(3, [(1.0, 3, 0.0)])
    with pytest.raises(ValueError):
        law.quantile(0.0)
    with pytest.raises(ValueError):
        law.quantile(0.05, draws=10)


def test_mixture_record():
    law = MixtureLaw(3, [(1.0, 3, 0.0), (0.25, 5, 1.5)], tail_bound=1e-7)
    text = law.to_record()
    assert "n_terms=2" in text
    assert "term1=1,3,0" in text
    assert "term2=0.25,5,1.5" in text
    assert "tail_bound=1e-07" in text


def test_asymptotic_power_reference_points():
    # tau = 0 sits at the level by continuity
    row = asymptotic_power(RAYLEIGH, 3, vmf(), 0.0, 0.05)
    assert not row.trivial
    assert row.power == pytest.approx(0.05, abs=1e-9)
    # noncentrality 1 at tau = sqrt(3); frozen from a direct Poisson sum
    row = asymptotic_power(RAYLEIGH, 3, vmf(), math.sqrt(3.0), 0.05)
    ref = stats.ncx2.sf(stats.chi2.ppf(0.95, 3), 3, 1.0)
    assert row.power == pytest.approx(ref, rel=1e-9)
    assert row.power == pytest.approx(0.1156588374, rel=1e-8)


def test_asymptotic_power_blind_is_exact_alpha():
    row = asymptotic_power(RAYLEIGH, 3, watson(), 2.5, 0.05, q=8)
    assert row == AsymptoticPower(0.05, 0.0, True)
    row = asymptotic_power(THREE, 3, watson(), 1.0, 0.05, q=8)
    assert row.trivial and row.power == 0.05


def test_asymptotic_power_monotone_in_tau():
    taus = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0]
    rows = power_curve(RAYLEIGH, 3, vmf(), taus, 0.05)
    powers = [r.power for r in rows]
    assert all(b >= a - 1e-9 for a, b in zip(powers, powers[1:]))
    assert powers[0] == pytest.approx(0.05, abs=1e-9)
    assert powers[-1] == pytest.approx(stats.ncx2.sf(stats.chi2.ppf(0.95, 3), 3, 16.0 / 3.0),
                                       rel=1e-9)

    rows = power_curve(BINGHAM, 3, watson(), [0.0, 1.0, 2.0, 3.0, 4.0], 0.05)
    powers = [r.power for r in rows]
    assert all(b >= a - 1e-9 for a, b in zip(powers, powers[1:]))
    assert powers[-1] > 0.8


def test_power_curve_matches_single_calls():
    taus = [0.0, 1.0, 2.0]
    rows = power_curve(BINGHAM, 3, watson(), taus, 0.05)
    for tau, row in zip(taus, rows):
        single = asymptotic_power(BINGHAM, 3, watson(), tau, 0.05)
        assert row.power == pytest.approx(single.power, rel=1e-12)


def test_power_curve_csv_format():
    text = power_curve_csv(RAYLEIGH, 3, watson(), [0.0, 1.0], 0.05, q=8)
    lines = text.strip().splitlines()
    assert lines[0] == "tau,power,se,flag"
    assert lines[1] == "0,0.05,0,trivial"
    assert lines[2] == "1,0.05,0,trivial"
    text = power_curve_csv(RAYLEIGH, 3, vmf(), [1.0], 0.05)
    assert text.strip().splitlines()[1].endswith(",ok")
