from fractions import Fraction

import numpy as np
import pytest

from cyclefv.covariance import (
    almost_symmetry_sandwich,
    beta_N,
    build_system,
    check_monotone,
    cov_asymptotic,
    gamma_N,
    qsd_distance_bound,
    qsd_distance_jensen,
    reflection,
    sk_closed_form,
    solve_sk_linear,
    stationary_covariances,
    stationary_moments,
)
from cyclefv.errors import DomainError
from cyclefv.model import ModelParams
from cyclefv.particles import s_from_distribution, solve_instance


def _exact_fraction_solve(K, N, theta, p):
    """Gauss-Jordan on the moment system in exact rational arithmetic."""
    th, p = Fraction(theta), Fraction(p)
    eps = p / ((N - 1) * (1 + th))
    beta, gamma = 2 * (1 + eps), -2 * (1 + N * eps)
    A = [[Fraction(0)] * K for _ in range(K)]
    for r in range(K):
        A[r][r] = beta
        A[r][(r + 1) % K] -= 1
        A[r][(r - 1) % K] -= 1
    b = [Fraction(0)] * K
    b[0], b[1], b[-1] = gamma, Fraction(1), Fraction(1)
    b = [-v / (K * N) for v in b]
    M = [row + [rhs] for row, rhs in zip(A, b)]
    for c in range(K):
        piv = next(r for r in range(c, K) if M[r][c] != 0)
        M[c], M[piv] = M[piv], M[c]
        M[c] = [v / M[c][c] for v in M[c]]
        for r in range(K):
            if r != c and M[r][c] != 0:
                M[r] = [a - M[r][c] * bb for a, bb in zip(M[r], M[c])]
    return [M[r][K] for r in range(K)]


def test_hand_values():
    np.testing.assert_allclose(sk_closed_form(ModelParams(3, 1, 1), 2).s, [1 / 4, 1 / 24, 1 / 24], atol=1e-15)
    np.testing.assert_allclose(
        sk_closed_form(ModelParams(5, 1, 1), 2).s, [8 / 55, 1 / 55, 1 / 110, 1 / 110, 1 / 55], atol=1e-15
    )
    assert sk_closed_form(ModelParams(4, 1, 1), 2).s[2] == pytest.approx(1 / 60, abs=1e-15)


@pytest.mark.parametrize("K,N,theta,p", [(3, 2, 1, 1), (6, 7, Fraction(1, 3), 2), (9, 50, 5, Fraction(1, 100))])
def test_against_rational_arithmetic(K, N, theta, p):
    exact = np.array([float(v) for v in _exact_fraction_solve(K, N, theta, p)])
    pr = ModelParams(K, float(theta), float(p))
    np.testing.assert_allclose(sk_closed_form(pr, N).s, exact, atol=1e-14)
    np.testing.assert_allclose(solve_sk_linear(pr, N).s, exact, atol=1e-14)


def test_against_enumeration():
    for K, N, th, p in [(3, 4, 2.0, 0.5), (4, 5, 0.5, 3.0), (5, 3, 1.0, 1.0)]:
        pr = ModelParams(K, th, p)
        space, _, nu = solve_instance(pr, N)
        np.testing.assert_allclose(s_from_distribution(space, nu), sk_closed_form(pr, N).s, atol=1e-12)


def test_system_structure():
    pr = ModelParams(6, 2, 1)
    sys_ = build_system(pr, 4)
    assert almost_symmetry_sandwich(sys_) == 0.0
    assert sys_.b[1] == sys_.b[-1]
    J = reflection(6)
    np.testing.assert_array_equal(J @ J, np.eye(6))
    assert beta_N(pr, 4) == pytest.approx(2 * (1 + 1 / 9))
    assert gamma_N(pr, 4) == pytest.approx(-2 * (1 + 4 / 9))


def test_moment_set_properties():
    pr = ModelParams(7, 0.5, 2)
    m = stationary_moments(pr, 30, "checked")
    assert m.s.sum() == pytest.approx(1 / 7, abs=1e-15)
    assert m.cov.sum() == pytest.approx(0.0, abs=1e-15)
    assert m.variance == m.cov[0] > 0
    np.testing.assert_allclose(m.s[1:], m.s[1:][::-1], atol=1e-16)
    assert check_monotone(m.cov)
    with pytest.raises(ValueError):
        stationary_moments(pr, 30, "bogus")
    with pytest.raises(DomainError):
        stationary_moments(pr, 1)


def test_large_arguments_use_ratio_path():
    # beta far above 2 and K large overflow the raw recurrence
    pr = ModelParams(2001, 0.01, 1000)
    s = sk_closed_form(pr, 2).s
    assert np.all(np.isfinite(s))
    np.testing.assert_allclose(s, solve_sk_linear(pr, 2).s, atol=1e-14)


def test_asymptotics_k3():
    pr = ModelParams(3, 1, 1)
    N = 10**5
    assert N * stationary_covariances(pr, N)[0] == pytest.approx(8 / 27, rel=1e-3)
    first, second = cov_asymptotic(pr, N, 0)
    assert N * first == pytest.approx(8 / 27)
    with pytest.raises(DomainError):
        cov_asymptotic(pr, N, 3)


def test_second_order_rate():
    pr = ModelParams(6, 2.0, 0.7)
    errs = []
    for N in (10**3, 10**4):
        cov = stationary_covariances(pr, N)
        errs.append(max(abs(cov[k] - cov_asymptotic(pr, N, k)[1]) for k in range(6)) * N**2)
    assert errs[0] / errs[1] >= 4


def test_qsd_distance():
    pr = ModelParams(5, 1, 1)
    for N in (10, 100, 1000):
        assert qsd_distance_jensen(pr, N) <= qsd_distance_bound(pr, N) * 1.05
