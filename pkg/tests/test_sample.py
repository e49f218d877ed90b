import math

import numpy as np
import pytest
from scipy import integrate

from qlognorm import (
    CascadeConfig,
    DataError,
    DivergenceError,
    DomainError,
    QLogNormalBase,
    QParams,
    Region,
    RngStream,
    Side,
    TruncatedNormalParams,
    UniformBase,
    cascade_run,
    cdf,
    compact_image_pdf,
    compact_image_variance,
    hill_tail_estimate,
    ks_distance,
    levy_alpha,
    q_log,
    q_product_n,
    sample_mixture,
    sample_qlognormal,
    sample_truncnorm,
    mixture_cdf,
    MixtureParams,
    truncnorm_from_q,
)


# --- streams -----------------------------------------------------------------

def test_stream_frozen_first_draws():
    u = RngStream(0).uniform(3)
    assert u == pytest.approx(
        [0.011546754286331562, 0.24154919656271812, 0.11142585551493822],
        rel=1e-15,
    )


def test_stream_determinism_and_separation():
    a = RngStream(7).uniform(64)
    b = RngStream(7).uniform(64)
    c = RngStream(7, stream_id=1).uniform(64)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert np.array_equal(RngStream(7).substream(1).uniform(64), c)


def test_stream_open_interval():
    u = RngStream(3).uniform(10**6)
    assert u.min() > 0.0
    assert u.max() < 1.0


# --- inverse-transform samplers -------------------------------------------------

def test_truncnorm_sampler_respects_support():
    left = TruncatedNormalParams(0.0, 1.0, -0.3, Side.LEFT_TRUNCATED)
    y = sample_truncnorm(left, 20000, RngStream(1))
    assert y.min() >= -0.3
    right = TruncatedNormalParams(0.0, 1.0, 0.4, Side.RIGHT_TRUNCATED)
    y = sample_truncnorm(right, 20000, RngStream(2))
    assert y.max() <= 0.4


def test_truncnorm_sampler_moments():
    # left truncation at the mean halves the support: mean = sqrt(2/pi)
    tn = TruncatedNormalParams(0.0, 1.0, 0.0, Side.LEFT_TRUNCATED)
    y = sample_truncnorm(tn, 200000, RngStream(3))
    assert y.mean() == pytest.approx(math.sqrt(2.0 / math.pi), abs=0.01)


@pytest.mark.parametrize("q", [0.8, 1.0, 1.25])
def test_qlognormal_sampler_ks(q):
    p = QParams(q, 0.0, 1.0)
    n = 20000
    x = sample_qlognormal(p, n, RngStream(11))
    d = ks_distance(x, lambda t: cdf(t, p))
    assert d < 1.63 / math.sqrt(n)


def test_mixture_sampler_ks():
    m = MixtureParams(QParams(1.22, 0.391, 1.15), 0.5)
    n = 20000
    x = sample_mixture(m, n, RngStream(13))
    d = ks_distance(x, lambda t: mixture_cdf(t, m))
    assert d < 1.63 / math.sqrt(n)


def test_sampler_draw_budget_is_fixed():
    # same stream, same count: the mixture consumes selector + body draws,
    # so two different mixtures still land on the same selectors
    m1 = MixtureParams(QParams(1.22, 0.0, 1.0), 0.5)
    m2 = MixtureParams(QParams(1.22, 0.0, 1.0), 0.5)
    assert np.array_equal(
        sample_mixture(m1, 100, RngStream(5)), sample_mixture(m2, 100, RngStream(5))
    )


# --- cascades ---------------------------------------------------------------

def test_cascade_classical_is_plain_product():
    cfg = CascadeConfig(q=1.0, n_factors=8, ensemble_size=50)
    outcomes = cascade_run(cfg, RngStream(17))
    draws = cfg.draw_factors(RngStream(17), 8 * 50).reshape(50, 8)
    want = draws.prod(axis=1)
    got = np.array([o.value for o in outcomes])
    assert np.allclose(got, want, rtol=1e-12)
    assert all(o.region is Region.REGULAR for o in outcomes)


def test_cascade_single_factor_passthrough():
    cfg = CascadeConfig(q=0.5, n_factors=1, ensemble_size=100)
    outcomes = cascade_run(cfg, RngStream(19))
    draws = cfg.draw_factors(RngStream(19), 100)
    assert np.array_equal(np.array([o.value for o in outcomes]), draws)


def test_cascade_matches_fold_oracle():
    cfg = CascadeConfig(q=0.7, n_factors=5, ensemble_size=300)
    outcomes = cascade_run(cfg, RngStream(23))
    draws = cfg.draw_factors(RngStream(23), 5 * 300).reshape(300, 5)
    for row, out in zip(draws, outcomes):
        want = q_product_n(row, 0.7)
        assert out.region == want.region
        if want.region is Region.REGULAR:
            assert out.value == pytest.approx(want.value, rel=1e-10)


def test_cascade_subcritical_mostly_cuts_off():
    cfg = CascadeConfig(q=0.5, n_factors=6, ensemble_size=2000)
    outcomes = cascade_run(cfg, RngStream(21))
    cut = sum(o.region is Region.CUTOFF_ZERO for o in outcomes)
    assert cut == 1941  # frozen; uniform factors rarely survive six steps
    assert all(o.value == 0.0 for o in outcomes if o.region is Region.CUTOFF_ZERO)


def test_cascade_supercritical_stays_regular():
    # q > 1 with factors in (0, 1]: every term of the constraint sum is
    # >= 1, so neither cutoff nor divergence can trigger
    cfg = CascadeConfig(q=1.75, n_factors=50, ensemble_size=500)
    outcomes = cascade_run(cfg, RngStream(29))
    assert all(o.region is Region.REGULAR for o in outcomes)


def test_cascade_qlognormal_base():
    base = QLogNormalBase(QParams(1.0, 0.0, 0.3))
    cfg = CascadeConfig(q=1.0, n_factors=4, ensemble_size=200, base=base)
    outcomes = cascade_run(cfg, RngStream(31))
    v = np.array([o.value for o in outcomes])
    assert np.all(v > 0)
    # product of 4 lognormals: ln has mean 0, sd 0.6
    assert np.log(v).std() == pytest.approx(0.6, abs=0.05)


def test_cascade_config_validation():
    with pytest.raises(DomainError):
        CascadeConfig(q=1.0, n_factors=0)
    with pytest.raises(DomainError):
        CascadeConfig(q=1.0, n_factors=3, ensemble_size=0)
    with pytest.raises(DomainError):
        UniformBase(0.0)
    with pytest.raises(DataError):
        cascade_run(
            CascadeConfig(q=1.0, n_factors=2, ensemble_size=2,
                          base=lambda rng, n: -np.ones(n)),
            RngStream(1),
        )


# --- image law of the deformed logarithm -------------------------------------

@pytest.mark.parametrize("q,b", [(0.5, 1.0), (1.0, 1.0), (1.25, 1.0), (0.5, 2.0)])
def test_compact_image_pdf_normalized(q, b):
    u = 1.0 - q
    if q < 1:
        lo, hi = -1.0 / u, (b**u - 1.0) / u
    elif q == 1.0:
        lo, hi = -60.0, math.log(b)
    else:
        lo, hi = -np.inf, (b**u - 1.0) / u
    v, _ = integrate.quad(lambda y: compact_image_pdf(y, q, b), lo, hi, limit=200)
    assert v == pytest.approx(1.0, abs=1e-8)


def test_compact_image_pdf_support_enforced():
    with pytest.raises(DomainError):
        compact_image_pdf(1.0, 0.5, 1.0)  # above the image of b
    with pytest.raises(DomainError):
        compact_image_pdf(-3.0, 0.5, 1.0)  # below the collapse edge


def test_compact_image_matches_sampled_histogram():
    q, b, n = 0.5, 1.0, 10**6
    y = q_log(RngStream(37).uniform(n), q)
    hist, edges = np.histogram(y, bins=50, range=(-2.0, 0.0), density=True)
    mids = 0.5 * (edges[1:] + edges[:-1])
    want = np.array([compact_image_pdf(m, q, b) for m in mids])
    assert np.max(np.abs(hist - want)) < 0.02


def test_compact_image_variance_values():
    assert compact_image_variance(0.5, 1.0) == pytest.approx(2.0 / 9.0, rel=1e-14)
    assert compact_image_variance(1.25, 1.0) == pytest.approx(32.0 / 9.0, rel=1e-14)
    assert compact_image_variance(0.5, 2.0) == pytest.approx(4.0 / 9.0, rel=1e-14)
    for q in (1.5, 1.6, 2.0):
        with pytest.raises(DivergenceError):
            compact_image_variance(q, 1.0)


# --- tail diagnostics ---------------------------------------------------------

def test_levy_alpha():
    assert levy_alpha(1.75) == pytest.approx(4.0 / 3.0, rel=1e-14)
    assert levy_alpha(2.0) == pytest.approx(1.0, rel=1e-14)
    for q in (1.5, 1.2, 0.8):
        with pytest.raises(DomainError):
            levy_alpha(q)


def test_hill_estimate_on_pareto():
    # exact Pareto with tail index 2
    u = RngStream(41).uniform(20000)
    s = (1.0 - u) ** (-0.5)
    est = hill_tail_estimate(s, 800)
    assert est == pytest.approx(2.0, abs=0.25)


def test_hill_estimate_guards():
    s = np.abs(np.random.default_rng(2).normal(size=1000)) + 0.1
    with pytest.raises(DataError):
        hill_tail_estimate(s, 5)  # k too small
    with pytest.raises(DataError):
        hill_tail_estimate(s, 500)  # k > n/10
    with pytest.raises(DataError):
        hill_tail_estimate(np.array([-1.0] * 100 + [1.0] * 100), 10)
