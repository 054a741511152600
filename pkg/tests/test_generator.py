import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quasargen import generator as gen
from quasargen import encodings as enc
from quasargen import problems as pb


def test_mixture_params_validation():
    with pytest.raises(ValueError):
        gen.MixtureParams(np.zeros((2, 2)), beta_star=-0.1)
    with pytest.raises(ValueError):
        gen.MixtureParams(np.zeros((2, 2)), beta_star=1.5)
    with pytest.raises(ValueError):
        gen.MixtureParams(np.zeros((2, 2)), rho_star=0.0)
    # endpoints of beta are allowed (vanilla and pure-slow limits)
    gen.MixtureParams(np.zeros((2, 2)), beta_star=0.0)
    gen.MixtureParams(np.zeros((2, 2)), beta_star=1.0)


def test_distribution_rejects_nan():
    with pytest.raises(ValueError):
        gen.Distribution(np.array([0.0, np.nan]))


def test_log_softmax_overflow_safe():
    lp = gen.log_softmax(np.array([1e4, 0.0, -1e4]))
    assert np.all(np.isfinite(lp))
    assert np.exp(lp).sum() == pytest.approx(1.0)
    assert lp[0] == pytest.approx(0.0, abs=1e-12)


@given(st.floats(0.0, 1.0), st.floats(0.01, 1.0))
def test_mixture_log_probs_normalized(beta, rho):
    scores = np.array([3.0, -1.0, 0.5, 2.0])
    lp = gen.mixture_log_probs(scores, beta, rho)
    assert np.exp(lp).sum() == pytest.approx(1.0, abs=1e-12)


def test_mixture_endpoints_match_components(battery):
    e = battery["maxcut"]
    rng = np.random.default_rng(0)
    W = 0.1 * rng.standard_normal(e.M.shape)
    fast = gen.gibbs_density(e, W)
    slow = gen.gibbs_density(e, 0.25 * W)
    at0 = gen.mixture_density(e, gen.MixtureParams(W, 0.0, 0.25))
    at1 = gen.mixture_density(e, gen.MixtureParams(W, 1.0, 0.25))
    assert np.allclose(at0.probs, fast.probs)
    assert np.allclose(at1.probs, slow.probs)


def test_mixture_is_convex_combination(battery):
    e = battery["csp"]
    rng = np.random.default_rng(1)
    W = 0.05 * rng.standard_normal(e.M.shape)
    mp = gen.MixtureParams(W, beta_star=0.3, rho_star=0.1)
    mix = gen.mixture_density(e, mp)
    direct = 0.7 * gen.gibbs_density(e, W).probs \
        + 0.3 * gen.gibbs_density(e, 0.1 * W).probs
    assert np.allclose(mix.probs, direct, atol=1e-12)


def test_gibbs_density_shift_invariant(battery):
    # adding a constant to every score leaves the softmax unchanged; the
    # all-ones feature direction of the csp encoding realizes that shift
    e = battery["csp"]
    rng = np.random.default_rng(2)
    W = 0.1 * rng.standard_normal(e.M.shape)
    d1 = gen.gibbs_density(e, W)
    const = np.zeros(e.M.shape)
    const[:, 0] = 1.0  # index 0 is the constant monomial for every solution
    d2 = gen.gibbs_density(e, W + const * 0.37)
    assert np.allclose(d1.probs, d2.probs, atol=1e-12)


def test_sample_deterministic_and_distributed(battery):
    e = battery["maxcut"]
    W = np.zeros(e.M.shape)
    d = gen.gibbs_density(e, W)  # uniform over 16 labels
    a = gen.sample(d, seed=7, count=4000)
    b = gen.sample(d, seed=7, count=4000)
    assert np.array_equal(a, b)
    freq = np.bincount(a, minlength=len(d)) / 4000
    assert np.abs(freq - 1.0 / len(d)).max() < 0.03


def test_sample_point_mass():
    lp = np.full(8, -1e9)
    lp[3] = 0.0
    d = gen.Distribution(lp - gen.logsumexp(lp))
    assert np.all(gen.sample(d, seed=1, count=50) == 3)


def test_neg_entropy_bounds(battery):
    e = battery["maxcut"]
    m = e.n_solutions
    uniform = gen.uniform_density(m)
    assert gen.neg_entropy(uniform) == pytest.approx(-np.log(m))
    sharp = gen.gibbs_density(e, -50.0 * e.M)
    assert gen.neg_entropy(uniform) <= gen.neg_entropy(sharp) <= 0.0


def test_regularizer_matches_direct_computation(battery):
    e = battery["mwbm"]
    rng = np.random.default_rng(3)
    W = 0.2 * rng.standard_normal(e.M.shape)
    mp = gen.MixtureParams(W, beta_star=0.25, rho_star=0.4)
    got = gen.regularizer(e, mp)
    h_fast = gen.neg_entropy(gen.gibbs_density(e, W))
    h_slow = gen.neg_entropy(gen.gibbs_density(e, 0.4 * W))
    assert got == pytest.approx(0.75 * h_fast + 0.625 * h_slow, rel=1e-12)


def test_linear_variance_oracle(battery):
    e = battery["tsp"]
    rng = np.random.default_rng(4)
    W = 0.3 * rng.standard_normal(e.M.shape)
    d = gen.gibbs_density(e, W)
    v = rng.standard_normal(e.n_x)
    vals = e.features @ v
    expect = float(np.average((vals - np.average(vals, weights=d.probs)) ** 2,
                              weights=d.probs))
    assert gen.linear_variance(d, e, v) == pytest.approx(expect, rel=1e-10)


def test_almost_uniform_scan_converges_to_uniform_variance(battery):
    e = battery["maxcut"]
    rng = np.random.default_rng(5)
    W = rng.standard_normal(e.M.shape)
    c = e.subspace_basis @ rng.standard_normal(e.subspace_basis.shape[1])
    scan = gen.almost_uniform_scan(e, W, c, [1.0, 0.1, 1e-4])
    uniform_var = gen.linear_variance(gen.uniform_density(e.n_solutions), e, c)
    rhos, variances = zip(*scan)
    assert rhos == (1.0, 0.1, 1e-4)
    assert variances[-1] == pytest.approx(uniform_var, rel=1e-3)
    # the uniform variance respects the encoding's floor
    assert uniform_var >= e.variance_floor * float(c @ c) - 1e-9


@given(st.floats(0.05, 0.95))
def test_total_variation_mixture_bound(beta):
    e = enc.encode_maxcut(pb.erdos_renyi(4, 0.6, 5))
    rng = np.random.default_rng(6)
    W = 0.5 * rng.standard_normal(e.M.shape)
    mp = gen.MixtureParams(W, beta_star=beta, rho_star=0.1)
    tv = gen.total_variation(gen.mixture_density(e, mp), gen.gibbs_density(e, W))
    assert 0.0 <= tv <= beta + 1e-12


def test_total_variation_properties(battery):
    e = battery["maxcut"]
    d1 = gen.gibbs_density(e, np.zeros(e.M.shape))
    d2 = gen.gibbs_density(e, 0.2 * e.M)
    assert gen.total_variation(d1, d1) == 0.0
    assert gen.total_variation(d1, d2) == pytest.approx(gen.total_variation(d2, d1))
    assert gen.total_variation(d1, d2) <= 1.0


def test_distribution_to_csv(tmp_path, battery):
    e = battery["tsp"]
    d = gen.gibbs_density(e, np.zeros(e.M.shape))
    path = tmp_path / "dist.csv"
    gen.distribution_to_csv(d, e, path)
    lines = path.read_text().strip().splitlines()
    assert len(lines) == e.n_solutions + 1
    assert lines[0].startswith("index,label")
