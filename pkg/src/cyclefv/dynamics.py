"""Transient first and second moments of the particle proportions, and the
finite-time bounds that compare the particle system with the conditioned walk.

Covariance fields are ``K x K`` matrices ``g(k, r)``; when flattened, pair
``(k, r)`` sits at index ``k K + r``. With this ordering the pair generator
``Q (+) Q = Q x I + I x Q`` acts on row vectors by

    (g Q2)(k, r) = g(k-1, r) + theta g(k+1, r) + g(k, r-1) + theta g(k, r+1)
                   - 2 (1 + theta) g(k, r).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp

from .circulant import build_Q, exp_action, expm_dense, spectral_constants
from .covariance import stationary_moments
from .errors import DomainError, SolveError, StepSizeUnderflow
from .model import Configuration, ModelParams, as_prob_vector, empirical_measure, uniform

ODE_RTOL = 1e-10
ODE_ATOL = 1e-13
MIN_STEP = 1e-12


@dataclass(frozen=True)
class CovarianceField:
    g: np.ndarray
    t: float

    def row(self, k: int = 0) -> np.ndarray:
        return self.g[k]


@dataclass(frozen=True)
class DriftTerm:
    w: np.ndarray


@dataclass(frozen=True)
class BoundConstants:
    p_N: float
    C_KN: float
    D_K: float
    E_K: float


def _config(eta0) -> Configuration:
    return eta0 if isinstance(eta0, Configuration) else Configuration(eta0)


def mean_dynamics(params: ModelParams, N: int, eta0, t: float) -> np.ndarray:
    """Expected empirical measure at time ``t``: ``m(eta0) expm(t Q)``."""
    cfg = _config(eta0)
    if cfg.N != N or cfg.K != params.K:
        raise DomainError("initial configuration does not match (K, N)")
    return exp_action(build_Q(params), t, empirical_measure(cfg))


def kill_rate_pairs(N: int, p: float) -> float:
    """``p_N = 2p / (N - 1)``."""
    if N < 2:
        raise DomainError("N must be >= 2")
    return 2.0 * p / (N - 1)


def q2_operator(params: ModelParams, N: int | None = None) -> np.ndarray:
    """Dense ``K^2 x K^2`` pair generator, assembled entry by entry.

    With ``N`` given, returns the killed version ``Q2 - p_N I``.
    """
    K, th = params.K, params.theta
    n = K * K
    M = np.zeros((n, n))
    for k in range(K):
        for r in range(K):
            col = k * K + r
            # row index of the source pair feeding (k, r)
            M[((k - 1) % K) * K + r, col] += 1.0
            M[((k + 1) % K) * K + r, col] += th
            M[k * K + (r - 1) % K, col] += 1.0
            M[k * K + (r + 1) % K, col] += th
            M[col, col] -= 2.0 * (1.0 + th)
    if N is not None:
        M -= kill_rate_pairs(N, params.p) * np.eye(n)
    return M


def kronecker_sum(params: ModelParams) -> np.ndarray:
    """``Q x I + I x Q`` built with ``numpy.kron``; an independent route to :func:`q2_operator`."""
    Q = build_Q(params).dense()
    eye = np.eye(params.K)
    return np.kron(Q, eye) + np.kron(eye, Q)


def q2_exp(params: ModelParams, t: float) -> np.ndarray:
    """``expm(t Q2)`` as the Kronecker square of ``expm(t Q)``."""
    E = expm_dense(build_Q(params).dense(), t)
    return np.kron(E, E)


def drift_term(params: ModelParams, N: int, s) -> DriftTerm:
    """Source term of the covariance equation for a mean profile ``s``.

    Diagonal ``(1/N)[s(k-1) + (1+theta) s(k) + theta s(k+1)] + p_N s(k) - p_N s(k)^2``;
    neighbours ``w(k, k+1) = -(1/N)[s(k) + theta s(k+1)] - p_N s(k) s(k+1)``
    (indices mod ``K``, the matrix is symmetric); otherwise ``-p_N s(k) s(r)``.
    """
    s = as_prob_vector(s)
    K, th = params.K, params.theta
    if s.size != K:
        raise DomainError("mean profile has the wrong length")
    pN = kill_rate_pairs(N, params.p)
    w = -pN * np.outer(s, s)
    for k in range(K):
        km, kp = (k - 1) % K, (k + 1) % K
        w[k, k] += (s[km] + (1.0 + th) * s[k] + th * s[kp]) / N + pN * s[k]
        edge = -(s[k] + th * s[kp]) / N
        w[k, kp] += edge
        w[kp, k] += edge
    return DriftTerm(w)


def w_infinity(params: ModelParams, N: int) -> DriftTerm:
    return drift_term(params, N, uniform(params.K))


def g_infinity(params: ModelParams, N: int) -> CovarianceField:
    """Stationary covariance field ``g = -w_inf Q2_p^{-1}``."""
    K = params.K
    A = q2_operator(params, N)
    w = w_infinity(params, N).w.ravel()
    try:
        lu = scipy.linalg.lu_factor(A.T)
    except (ValueError, scipy.linalg.LinAlgError) as exc:
        raise SolveError(str(exc)) from exc
    if np.min(np.abs(np.diag(lu[0]))) < 1e-14:
        raise SolveError("pair generator is numerically singular")
    g = scipy.linalg.lu_solve(lu, -w)
    return CovarianceField(g.reshape(K, K), math.inf)


def integrate_g(params: ModelParams, N: int, eta0, t_grid) -> list[CovarianceField]:
    """Covariance fields on ``t_grid`` from ``dg/dt = g Q2_p + w_t``, ``g_0 = 0``.

    ``w_t`` is rebuilt from the exact mean profile at every stage, and the
    field is integrated with the order-8 Dormand-Prince scheme.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0 or t_grid[0] != 0 or np.any(np.diff(t_grid) < 0):
        raise DomainError("t_grid must be nondecreasing and start at 0")
    cfg = _config(eta0)
    K = params.K
    A = q2_operator(params, N)
    Q = build_Q(params)
    m0 = empirical_measure(cfg)

    def rhs(t, y):
        s = np.clip(exp_action(Q, t, m0), 0.0, None)
        return y @ A + drift_term(params, N, s / s.sum()).w.ravel()

    out = [CovarianceField(np.zeros((K, K)), 0.0)]
    if t_grid[-1] == 0:
        return out * t_grid.size
    sol = solve_ivp(rhs, (0.0, t_grid[-1]), np.zeros(K * K), method="DOP853",
                    t_eval=t_grid, rtol=ODE_RTOL, atol=ODE_ATOL)
    if sol.status != 0:
        raise StepSizeUnderflow(f"covariance integration failed: {sol.message}")
    steps = np.diff(sol.t)
    if np.any((steps > 0) & (steps < MIN_STEP)):
        raise StepSizeUnderflow("output grid finer than the minimum step")
    return [CovarianceField(sol.y[:, a].reshape(K, K), float(t)) for a, t in enumerate(sol.t)]


def bound_constants(params: ModelParams, N: int) -> BoundConstants:
    K, th, p = params.K, params.theta, params.p
    pN = kill_rate_pairs(N, p)
    root = (K + 1) * math.sqrt(K - 1) / (K * math.sqrt(K))
    C = (2.0 / N) * (1 + th + p / (N - 1) + p * N * root / (N - 1))
    D = 2.0 * (1 + th + p * root)
    E = (K - 1) / K**2 + (K**2 - 1) / (6.0 * K**2 * (1 + th))
    return BoundConstants(pN, C, D, E)


def _decay_gap(rho: float, pN: float, t: float) -> float:
    """``(exp(-pN t) - exp(-rho t)) / (rho - pN)`` with its limit ``t exp(-rho t)``."""
    if abs(rho - pN) < 1e-12:
        return t * math.exp(-rho * t)
    return (math.exp(-pN * t) - math.exp(-rho * t)) / (rho - pN)


def variance_bound(params: ModelParams, N: int, t: float) -> float:
    """Bound on ``|Var_eta[eta_t(k)/N] - Var_nu[eta(0)/N]|`` for deterministic starts."""
    if t < 0:
        raise DomainError("t must be nonnegative")
    c = bound_constants(params, N)
    rho = spectral_constants(params)[0]
    var = stationary_moments(params, N).variance
    return c.C_KN * _decay_gap(rho, c.p_N, t) + math.exp(-c.p_N * t) * var


def uniform_variance_bound(params: ModelParams, N: int) -> float:
    """Time-uniform bound on ``Var_eta[eta_t(k)/N]``."""
    c = bound_constants(params, N)
    rho = spectral_constants(params)[0]
    return c.C_KN / max(rho, c.p_N) + 2.0 * stationary_moments(params, N).variance


def empirical_distance_bound(params: ModelParams, N: int, t: float, eta, mu) -> tuple[float, float]:
    """``(lower, upper)`` for ``E|m(eta_t) - mu expm(tQ)|_2`` from a deterministic ``eta``.

    The upper bound is the leading-order expression; its ``o(1/sqrt(N))``
    remainder has no explicit constant.
    """
    if t < 0:
        raise DomainError("t must be nonnegative")
    cfg = _config(eta)
    mu = as_prob_vector(mu)
    rho, alpha = spectral_constants(params)
    c = bound_constants(params, N)
    d0 = float(np.linalg.norm(empirical_measure(cfg) - mu))
    lower = math.exp(-alpha * t) * d0
    fluct = math.sqrt(params.K / N) * math.sqrt(c.D_K * (1 - math.exp(-rho * t)) / rho + c.E_K)
    return lower, fluct + math.exp(-rho * t) * d0
