import math
from dataclasses import replace

import numpy as np
import pytest

from nlslab.bounds import (BoundConstants, OutOfRegimeError, ab_weights,
                           build_constants, d_of_t, g_fun, h_fun, jr_lower,
                           jr_upper, lifespan_lower, lifespan_upper, min_d,
                           min_d_limit, min_d_theta_limit, min_d_weights,
                           psi_fun, tail_weight)
from nlslab.cutoffs import TemporalCutoff, a_closed, b_closed, make_spatial_cutoff
from nlslab.exponents import InadmissibleParams, ProblemParams, compute_exponents
from nlslab.numerics import golden_section_min, grid_max

from conftest import reference_params


@pytest.fixture(scope="module")
def spatial():
    return make_spatial_cutoff(1.0, 1)


@pytest.fixture(scope="module")
def consts(spatial):
    return build_constants(reference_params(), spatial, theta=20.0)


# ---------------------------------------------------------------------------
# envelope maximum


def test_psi_frozen_values():
    # max_x (2 sqrt(x) - x) = 1 at x = 1.
    assert psi_fun(2.0, 0.5) == pytest.approx(1.0, rel=1e-14)
    for sigma in (1.0, 3.0, 10.0):
        assert psi_fun(sigma, 0.5) == pytest.approx(sigma ** 2 / 4.0, rel=1e-14)


def test_psi_matches_grid_max():
    rng = np.random.default_rng(2)
    cases = [(2.0, 0.5), (0.7, 0.25), (1.5, 0.6)]
    cases += [(rng.uniform(0.2, 5.0), rng.uniform(0.1, 0.9)) for _ in range(20)]
    for sigma, omega in cases:
        x_star = (sigma * omega) ** (1.0 / (1.0 - omega))
        _, brute = grid_max(lambda x: sigma * x ** omega - x,
                            0.0, 10.0 * x_star)
        assert psi_fun(sigma, omega) == pytest.approx(brute, rel=1e-8)


def test_psi_domain_errors():
    with pytest.raises(ValueError):
        psi_fun(1.0, 1.0)
    with pytest.raises(ValueError):
        psi_fun(1.0, 0.0)
    with pytest.raises(ValueError):
        psi_fun(-1.0, 0.5)


# ---------------------------------------------------------------------------
# assembled constants


def test_constants_formulas(consts, spatial):
    p, q, theta = 2.0, 2.0, 20.0
    l1 = spatial.l1_norm
    mu = spatial.mu
    assert consts.a_p == pytest.approx(
        l1 ** (1.0 / q) * theta / (theta - 1.0) ** (1.0 / q), rel=1e-14)
    assert consts.b_p == pytest.approx(
        l1 ** (1.0 / q) * mu / (theta + 1.0) ** (1.0 / q), rel=1e-14)
    assert consts.C1 == pytest.approx(
        1.0 * (p - 1.0) * (1.0 / p) ** q, rel=1e-14)   # lambda_eff = 1
    assert consts.C2 == pytest.approx(consts.C1 / consts.C_k, rel=1e-14)
    assert consts.C4 == pytest.approx(consts.C2 * consts.C3, rel=1e-14)


def test_constants_positive(consts):
    for name in ("a_p", "b_p", "C_k", "C1", "C2", "C3", "C4",
                 "R0", "mu", "l1_norm", "lambda_eff", "tangent_coeff"):
        assert getattr(consts, name) > 0.0, name


def test_r0_inside_tangent_interval(consts, spatial):
    assert 0.0 < consts.R0 < math.sqrt(consts.tangent_coeff)
    # An explicit out-of-interval request is refused.
    with pytest.raises(OutOfRegimeError):
        build_constants(reference_params(), spatial, theta=20.0,
                        r0=math.sqrt(consts.tangent_coeff) * 1.01)


def test_build_rejects_inadmissible(spatial):
    bad = ProblemParams(n=1, p=3.0, lambda_re=0.0, lambda_im=1.0, k=1.5)
    with pytest.raises(InadmissibleParams):
        build_constants(bad, spatial, theta=20.0)


def test_build_rejects_dimension_mismatch():
    spec2 = make_spatial_cutoff(1.0, 2)
    with pytest.raises(ValueError, match="dimension"):
        build_constants(reference_params(), spec2, theta=20.0)


def test_build_rejects_small_theta(spatial):
    # theta must exceed 1/(p-1) = 1 for the descent weight to converge.
    with pytest.raises(OutOfRegimeError):
        build_constants(reference_params(), spatial, theta=0.8)


def test_build_rejects_huge_theta(spatial):
    # Large theta collapses the admissible R0 interval and the tail
    # weight beyond 1/R0 underflows; the chain degenerates cleanly.
    with pytest.raises(OutOfRegimeError, match="tail weight"):
        build_constants(reference_params(), spatial, theta=1e6)


def test_as_dict_serializable(consts):
    import json
    d = consts.as_dict()
    assert d["case"]["branch"] == "LAMBDA2_POS"
    json.dumps(d)


# ---------------------------------------------------------------------------
# the two-power cost and its minimum


def test_d_unit_weights():
    # a_p = b_p = 1, p = 2: D(1) = 2 and the minimum sits at T = 1.
    t_min, d_min = min_d_weights(1.0, 1.0, 2.0)
    assert t_min == pytest.approx(1.0, rel=1e-14)
    assert d_min == pytest.approx(2.0, rel=1e-14)


def test_d_of_t_matches_weight_closed_forms(consts, spatial):
    # D(T) = A(0,T) + mu B(0,T) with the L1 factor folded the same way.
    rng = np.random.default_rng(3)
    l1 = spatial.l1_norm
    for _ in range(10):
        T = rng.uniform(0.05, 20.0)
        tc = TemporalCutoff(theta=20.0, S=0.0, T=T)
        want = a_closed(tc, 2.0, l1) + spatial.mu * b_closed(tc, 2.0, l1)
        assert d_of_t(T, consts, 2.0) == pytest.approx(want, rel=1e-10)


def test_d_of_t_rejects_nonpositive(consts):
    with pytest.raises(ValueError):
        d_of_t(0.0, consts, 2.0)


def test_min_d_matches_golden_section_randomized():
    rng = np.random.default_rng(4)
    for _ in range(50):
        p = rng.uniform(1.3, 3.5)
        theta = 1.0 / (p - 1.0) + rng.uniform(0.2, 30.0)
        mu = rng.uniform(0.2, 5.0)
        l1 = rng.uniform(0.5, 4.0)
        a_p, b_p = ab_weights(theta, p, mu, l1)
        t_min, d_min = min_d_weights(a_p, b_p, p)
        q = p / (p - 1.0)
        cost = lambda T: a_p * T ** (-1.0 / p) + b_p * T ** (1.0 / q)
        t_gold, d_gold = golden_section_min(cost, t_min / 50.0, t_min * 50.0)
        assert d_min == pytest.approx(d_gold, rel=1e-8)
        assert t_min == pytest.approx(t_gold, rel=1e-5)


def test_min_d_consts_entry(consts):
    t_min, d_min = min_d(consts, 2.0)
    assert d_min == pytest.approx(d_of_t(t_min, consts, 2.0), rel=1e-14)
    # First-order condition: the minimum is flat to second order.
    assert d_of_t(t_min * (1.0 + 1e-6), consts, 2.0) >= d_min
    assert d_of_t(t_min * (1.0 - 1e-6), consts, 2.0) >= d_min


def test_min_d_theta_limit(consts):
    # At theta = 1e6 the minimum is within 1e-3 (in fact ~1e-13) of the
    # theta -> infinity closed form.
    a_hi, b_hi = ab_weights(1e6, 2.0, consts.mu, consts.l1_norm)
    _, d_hi = min_d_weights(a_hi, b_hi, 2.0)
    limit = min_d_limit(consts.mu, consts.l1_norm, 2.0)
    assert abs(d_hi - limit) / limit < 1e-3
    assert min_d_theta_limit(consts, 2.0) == limit


def test_min_d_decreases_toward_limit(consts):
    # The minimum is decreasing in theta on its way to the limit.
    vals = []
    for theta in (2.0, 5.0, 20.0, 100.0, 1e4):
        a_p, b_p = ab_weights(theta, 2.0, consts.mu, consts.l1_norm)
        vals.append(min_d_weights(a_p, b_p, 2.0)[1])
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] > min_d_limit(consts.mu, consts.l1_norm, 2.0)


def test_ab_weights_rejects_small_theta():
    with pytest.raises(OutOfRegimeError):
        ab_weights(1.0, 2.0, 1.0, 1.0)


# ---------------------------------------------------------------------------
# pairing bounds


def test_jr_upper_closed_form(consts):
    # The envelope evaluation and the simplified form C1 R^(sq) D(T)^q
    # agree; the function asserts that internally, so one spot value
    # pins the formula.
    R, T, p = 3.0, 2.0, 2.0
    q = 2.0
    s = -0.5
    want = consts.C1 * R ** (s * q) * d_of_t(T, consts, p) ** q
    assert jr_upper(R, T, consts, p) == pytest.approx(want, rel=1e-14)
    with pytest.raises(ValueError):
        jr_upper(-1.0, T, consts, p)


def test_jr_upper_global_criterion_at_large_theta(consts):
    # R^(-sq) jr_upper at the cost minimum converges (theta -> infinity)
    # to l1 * (mu / lambda_eff)^(1/(p-1)), the coefficient in the
    # no-global-solution criterion.  theta = 1e6 lands within 1e-3.
    p, q = 2.0, 2.0
    a_hi, b_hi = ab_weights(1e6, p, consts.mu, consts.l1_norm)
    hi = replace(consts, a_p=a_hi, b_p=b_hi, theta=1e6)
    t_min, _ = min_d(hi, p)
    R = 7.0
    sq = -1.0
    val = jr_upper(R, t_min, hi, p) * R ** (-sq)
    target = consts.l1_norm * (consts.mu / consts.lambda_eff) ** (1.0 / (p - 1.0))
    assert val == pytest.approx(target, rel=1e-3)


def test_jr_lower_shape(consts):
    eps = 0.5
    base = jr_lower(2.0, eps, consts)
    assert base == pytest.approx(consts.C_k * eps * 2.0 ** (1.0 - 1.5),
                                 rel=1e-14)
    # Linear in eps, power law R^(n-k) in the radius.
    assert jr_lower(2.0, 2.0 * eps, consts) == pytest.approx(2.0 * base,
                                                             rel=1e-14)
    assert jr_lower(4.0, eps, consts) / base == pytest.approx(
        2.0 ** (consts.n - consts.k), rel=1e-14)


def test_jr_lower_domain(consts):
    with pytest.raises(OutOfRegimeError):
        jr_lower(consts.R0 * 0.9, 0.5, consts)
    with pytest.raises(ValueError):
        jr_lower(2.0, 0.0, consts)


def test_tail_weight_at_half(spatial):
    # C_k for R0 = 0.5: integral of |x|^(-k) phi over |x| >= 2.
    val = tail_weight(spatial, 1.5, 2.0)
    assert math.isfinite(val) and val > 0.0
    # Independent cross-check by a crude Riemann sum.
    rs = np.linspace(2.0, 60.0, 400_000)
    dens = rs ** (-1.5) * np.exp(1.0 - np.sqrt(1.0 + rs ** 2))
    crude = 2.0 * np.trapezoid(dens, rs)
    assert val == pytest.approx(crude, rel=1e-4)


# ---------------------------------------------------------------------------
# tangent construction


def test_tangent_envelope_majorized(consts, ref_exps):
    taus = np.geomspace(1.0001, 1e3, 50)
    radii = np.geomspace(consts.R0 * 1.0001, 1e3, 50)
    for tau in taus:
        g_val, r_tau = g_fun(tau, consts, ref_exps)
        h_vals = [h_fun(tau, R, consts, ref_exps) for R in radii]
        assert all(h >= g_val * (1.0 - 1e-12) for h in h_vals)
        # Equality at the tangent radius.
        assert h_fun(tau, r_tau, consts, ref_exps) == pytest.approx(
            g_val, rel=1e-8)


def test_tangent_slope_is_kappa(consts, ref_exps):
    taus = np.geomspace(2.0, 500.0, 40)
    gs = np.array([g_fun(t, consts, ref_exps)[0] for t in taus])
    slopes = np.diff(np.log(gs)) / np.diff(np.log(taus))
    assert np.allclose(slopes, ref_exps.kappa, rtol=0.0, atol=1e-10)


def test_tangent_radius_grows_like_sqrt_tau(consts, ref_exps):
    _, r2 = g_fun(2.0, consts, ref_exps)
    _, r8 = g_fun(8.0, consts, ref_exps)
    assert r8 / r2 == pytest.approx(2.0, rel=1e-14)


def test_g_fun_requires_tau_beyond_one(consts, ref_exps):
    with pytest.raises(OutOfRegimeError):
        g_fun(1.0, consts, ref_exps)


def test_h_fun_domain(consts, ref_exps):
    with pytest.raises(ValueError):
        h_fun(0.0, 2.0, consts, ref_exps)
    with pytest.raises(ValueError):
        h_fun(2.0, 0.0, consts, ref_exps)


# ---------------------------------------------------------------------------
# the lifespan bracket


def test_lifespan_upper_shape(consts, ref_exps):
    eps = min(0.5, 0.5 * consts.C4)
    t_up = lifespan_upper(eps, consts, ref_exps)
    assert t_up == pytest.approx((eps / consts.C4) ** -4.0, rel=1e-14)
    # Smaller data lives longer.
    assert lifespan_upper(eps / 2.0, consts, ref_exps) > t_up


def test_lifespan_upper_threshold(consts, ref_exps):
    with pytest.raises(OutOfRegimeError):
        lifespan_upper(consts.C4, consts, ref_exps)
    with pytest.raises(ValueError):
        lifespan_upper(0.0, consts, ref_exps)


def test_lifespan_lower_shape(ref_exps):
    assert lifespan_lower(0.5, ref_exps) == pytest.approx(
        0.5 ** (-4.0 / 3.0), rel=1e-14)
    assert lifespan_lower(0.5, ref_exps, constant=3.0) == pytest.approx(
        3.0 * 0.5 ** (-4.0 / 3.0), rel=1e-14)
    with pytest.raises(ValueError):
        lifespan_lower(-1.0, ref_exps)
    with pytest.raises(ValueError):
        lifespan_lower(0.5, ref_exps, constant=0.0)


def test_lifespan_lower_needs_negative_omega():
    # p = 6 in one dimension puts omega above zero.
    fast = ProblemParams(n=1, p=6.0, lambda_re=0.0, lambda_im=1.0)
    exps = compute_exponents(fast, enforce=False)
    assert exps.omega > 0.0
    with pytest.raises(OutOfRegimeError):
        lifespan_lower(0.5, exps)


def test_bracket_ordering(consts, ref_exps):
    # Inside the valid range the lower bound sits below the upper bound
    # for small data (the bracket exponents differ, so this is only a
    # spot check at one epsilon well inside the window).
    eps = min(1e-3, 0.1 * consts.C4)
    lo = lifespan_lower(eps, ref_exps)
    hi = lifespan_upper(eps, consts, ref_exps)
    assert lo < hi
    # Gap ratio grows like eps^(1/kappa - 1/omega).
    lo2 = lifespan_lower(eps / 4.0, ref_exps)
    hi2 = lifespan_upper(eps / 4.0, consts, ref_exps)
    assert (hi2 / lo2) / (hi / lo) == pytest.approx(
        0.25 ** (1.0 / ref_exps.kappa - 1.0 / ref_exps.omega), rel=1e-10)
