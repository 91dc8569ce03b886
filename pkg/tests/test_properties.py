import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from cyclefv import chebyshev
from cyclefv.chebyshev import PolyFamily
from cyclefv.circulant import build_Q, circ_eigenvalues, exp_action, q_spectrum_closed_form, spectral_constants
from cyclefv.covariance import check_monotone, sk_closed_form, solve_sk_linear
from cyclefv.dynamics import drift_term, g_infinity, kronecker_sum, q2_operator
from cyclefv.covariance import stationary_covariances
from cyclefv.model import Configuration, ModelParams, move_particle, rotate
from cyclefv.particles import enumerate_states, full_generator

thetas = st.floats(0.05, 10.0)
rates = st.floats(0.01, 20.0)
settings.register_profile("ci", max_examples=60, deadline=None)
settings.load_profile("ci")


@st.composite
def prob_vectors(draw, K):
    w = np.array(draw(st.lists(st.floats(0.0, 1.0), min_size=K, max_size=K))) + 1e-3
    return w / w.sum()


@given(st.integers(3, 40), thetas)
def test_spectrum_closed_form(K, theta):
    pr = ModelParams(K, theta, 1.0)
    lam = q_spectrum_closed_form(pr)
    assert np.max(np.abs(lam - circ_eigenvalues(build_Q(pr)))) < 1e-10
    assert np.all(lam.real <= 1e-12)
    rho, alpha = spectral_constants(pr)
    assert 0 < rho <= alpha


@given(st.integers(3, 12), thetas, st.floats(0.0, 5.0), st.data())
def test_exp_action_sandwich(K, theta, t, data):
    pr = ModelParams(K, theta, 1.0)
    nu, mu = data.draw(prob_vectors(K)), data.draw(prob_vectors(K))
    Q = build_Q(pr)
    out = exp_action(Q, t, nu)
    assert abs(out.sum() - 1) < 1e-12 and out.min() > -1e-12
    rho, alpha = spectral_constants(pr)
    d0 = np.linalg.norm(nu - mu)
    d = np.linalg.norm(exp_action(Q, t, nu - mu))
    assert np.exp(-alpha * t) * d0 - 1e-10 <= d <= np.exp(-rho * t) * d0 + 1e-10


@given(st.integers(0, 40), st.floats(2.0, 6.0))
def test_chebyshev_identities(n, x):
    assert chebyshev.chebyshev_identity_check(n, x) < 1e-9
    assert chebyshev.three_term_relation_check(n, x) < 1e-9


@given(st.integers(1, 60), st.floats(2.0, 50.0))
def test_ratio_path_matches_direct(n, x):
    direct = chebyshev.sequence(PolyFamily.Nodd, n, x)
    d = chebyshev.evaluate(PolyFamily.Dodd, n, x)
    ratios = chebyshev.ratio_table(PolyFamily.Nodd, PolyFamily.Dodd, n, x)
    np.testing.assert_allclose(ratios, [v / d for v in direct], rtol=1e-11)


@given(st.integers(3, 40), st.integers(2, 10**5), thetas, rates)
def test_closed_form_equals_linear(K, N, theta, p):
    pr = ModelParams(K, theta, p)
    closed = sk_closed_form(pr, N)
    assert np.max(np.abs(closed.s - solve_sk_linear(pr, N).s)) < 1e-11
    cov = closed.cov
    assert abs(cov.sum()) < 1e-12
    np.testing.assert_allclose(cov[1:], cov[1:][::-1], atol=1e-15)
    assert check_monotone(cov, atol=1e-13)
    assert cov[0] > 0


@given(st.integers(3, 7), st.integers(2, 9), st.data())
def test_configuration_moves(K, N, data):
    counts = data.draw(st.lists(st.integers(0, N), min_size=K, max_size=K).filter(lambda c: sum(c) >= 2))
    c = Configuration(counts)
    assert rotate(c, K) == c
    assert rotate(rotate(c, 2), -2) == c
    i = data.draw(st.sampled_from([k for k in range(K) if counts[k] > 0]))
    j = data.draw(st.integers(0, K - 1))
    assert move_particle(c, i, j).N == c.N


@settings(max_examples=15)
@given(st.integers(3, 5), st.integers(2, 4), thetas, rates)
def test_generator_properties(K, N, theta, p):
    pr = ModelParams(K, theta, p)
    sp = enumerate_states(K, N)
    L = full_generator(pr, sp).dense()
    np.testing.assert_allclose(L.sum(axis=1), 0, atol=1e-11 * max(1.0, np.abs(L).max()))
    perm = [sp.index[rotate(s).counts] for s in sp.states]
    off = ~np.eye(len(sp), dtype=bool)
    np.testing.assert_array_equal(L[off], L[np.ix_(perm, perm)][off])


@given(st.integers(3, 8), st.integers(2, 50), thetas, rates, st.data())
def test_drift_term_structure(K, N, theta, p, data):
    s = data.draw(prob_vectors(K))
    w = drift_term(ModelParams(K, theta, p), N, s).w
    np.testing.assert_allclose(w, w.T, atol=1e-15)
    np.testing.assert_allclose(w.sum(axis=1), 0, atol=1e-13)


@settings(max_examples=25)
@given(st.integers(3, 8), thetas)
def test_q2_is_kronecker_sum(K, theta):
    pr = ModelParams(K, theta, 1.0)
    np.testing.assert_array_equal(q2_operator(pr), kronecker_sum(pr))


@settings(max_examples=25)
@given(st.integers(3, 7), st.integers(2, 200), thetas, rates)
def test_g_infinity_matches_closed_form(K, N, theta, p):
    pr = ModelParams(K, theta, p)
    g = g_infinity(pr, N).g
    cov = stationary_covariances(pr, N)
    circ = np.array([[cov[(r - k) % K] for r in range(K)] for k in range(K)])
    assert np.max(np.abs(g - circ)) < 1e-9
