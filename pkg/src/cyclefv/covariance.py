"""Stationary second moments of the particle proportions.

With ``s_k = E[eta(0) eta(k)] / N^2`` under the stationary law, the moments
solve the symmetric circulant system

    circ(beta, -1, 0, ..., 0, -1) s = -(1/(K N)) (gamma, 1, 0, ..., 0, 1)

with ``beta = 2(1 + eps)``, ``gamma = -2(1 + N eps)`` and
``eps = p / ((N-1)(1+theta))``. Two independent routes are provided: a dense
LU solve of this system and the closed form through ratios of the auxiliary
Chebyshev-type families evaluated at ``beta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import chebyshev
from .chebyshev import PolyFamily
from .circulant import CirculantMatrix
from .errors import DomainError, SolveError
from .model import ModelParams

CHECK_TOL = 1e-10


def _eps(params: ModelParams, N: int) -> float:
    return params.p / ((N - 1) * (1.0 + params.theta))


def beta_N(params: ModelParams, N: int) -> float:
    return 2.0 * (1.0 + _eps(params, N))


def gamma_N(params: ModelParams, N: int) -> float:
    return -2.0 * (1.0 + N * _eps(params, N))


def _check_N(N: int) -> int:
    if int(N) != N or N < 2:
        raise DomainError(f"N must be an integer >= 2, got {N!r}")
    return int(N)


@dataclass(frozen=True)
class StationaryMomentSet:
    params: ModelParams
    N: int
    beta_N: float
    gamma_N: float
    s: np.ndarray
    method: str = ""

    @property
    def cov(self) -> np.ndarray:
        return self.s - 1.0 / self.params.K**2

    @property
    def variance(self) -> float:
        return float(self.cov[0])


@dataclass(frozen=True)
class AlmostSymmetricSystem:
    A: CirculantMatrix
    b: np.ndarray


def reflection(K: int) -> np.ndarray:
    """Permutation ``J`` fixing index 0 and sending ``k -> K - k``."""
    J = np.zeros((K, K))
    J[np.arange(K), (-np.arange(K)) % K] = 1.0
    return J


def build_system(params: ModelParams, N: int) -> AlmostSymmetricSystem:
    N = _check_N(N)
    K = params.K
    row = np.zeros(K)
    row[0] = beta_N(params, N)
    row[1] = -1.0
    row[-1] = -1.0
    b = np.zeros(K)
    b[0] = gamma_N(params, N)
    b[1] = 1.0
    b[-1] = 1.0
    return AlmostSymmetricSystem(CirculantMatrix(row), -b / (K * N))


def almost_symmetry_sandwich(system: AlmostSymmetricSystem) -> float:
    """``max |J A J - A|``; zero for every symmetric circulant ``A``."""
    A = system.A.dense() if isinstance(system.A, CirculantMatrix) else np.asarray(system.A)
    J = reflection(A.shape[0])
    return float(np.max(np.abs(J @ A @ J - A)))


def solve_sk_linear(params: ModelParams, N: int) -> StationaryMomentSet:
    """Moments by a dense LU solve of the circulant system.

    The system is solved for the centred vector ``c = s - 1/K^2``. The
    right-hand side ``b - A 1/K^2`` is assembled from ``eps`` directly, so no
    digits are lost to ``beta - 2`` and ``gamma + 2`` when ``N`` is large
    and the matrix is nearly singular along the constant direction.
    """
    N = _check_N(N)
    K = params.K
    eps = _eps(params, N)
    system = build_system(params, N)
    A = system.A.dense()
    u = 1.0 / K**2
    # A (u 1) = (beta - 2) u 1 = 2 eps u 1
    r = np.full(K, -2.0 * eps * u)
    r[0] += 2.0 / (K * N) + 2.0 * eps / K
    r[1] -= 1.0 / (K * N)
    r[-1] -= 1.0 / (K * N)
    lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
    if np.min(np.abs(np.diag(lu))) < 1e-14:
        raise SolveError("near-zero pivot in the stationary moment system")
    c = scipy.linalg.lu_solve((lu, piv), r)
    return StationaryMomentSet(params, N, beta_N(params, N), gamma_N(params, N), c + u, "linear")


def _closed_form_ratios(num: PolyFamily, den: PolyFamily, K2: int, x: float) -> list[float]:
    try:
        nums = chebyshev.sequence(num, K2, x)
        d = chebyshev.sequence(den, K2, x)[K2]
        return [v / d for v in nums]
    except OverflowError:
        return chebyshev.ratio_table(num, den, K2, x)


def sk_closed_form(params: ModelParams, N: int) -> StationaryMomentSet:
    """Moments from ratios of the auxiliary families at ``beta_N``.

    ``K = 2 K2``: ``s_k = (N-1)/(KN) Neven_{K2-k} / Deven_{K2}``;
    ``K = 2 K2 + 1``: ``s_k = (N-1)/(KN) Nodd_{K2-k} / Dodd_{K2}``;
    ``s_0`` gains ``1/(KN)`` and ``s_{K-k} = s_k``.
    """
    N = _check_N(N)
    K = params.K
    beta = beta_N(params, N)
    if K % 2 == 0:
        K2 = K // 2
        ratios = _closed_form_ratios(PolyFamily.Neven, PolyFamily.Deven, K2, beta)
    else:
        K2 = (K - 1) // 2
        ratios = _closed_form_ratios(PolyFamily.Nodd, PolyFamily.Dodd, K2, beta)
    scale = (N - 1) / (K * N)
    s = np.empty(K)
    for k in range(K2 + 1):
        s[k] = scale * ratios[K2 - k]
        s[(K - k) % K] = s[k]
    s[0] += 1.0 / (K * N)
    return StationaryMomentSet(params, N, beta, gamma_N(params, N), s, "closed")


def stationary_moments(params: ModelParams, N: int, method: str = "closed") -> StationaryMomentSet:
    """Dispatch on ``method`` in ``{"closed", "linear", "checked"}``.

    ``"checked"`` computes both routes and raises ``AssertionError`` if they
    disagree by more than ``CHECK_TOL``.
    """
    if method == "linear":
        return solve_sk_linear(params, N)
    if method == "closed":
        return sk_closed_form(params, N)
    if method == "checked":
        closed = sk_closed_form(params, N)
        linear = solve_sk_linear(params, N)
        gap = float(np.max(np.abs(closed.s - linear.s)))
        if gap > CHECK_TOL:
            raise AssertionError(f"closed form and linear solve disagree by {gap:.3e}")
        return closed
    raise ValueError(f"unknown method {method!r}")


def stationary_covariances(params: ModelParams, N: int, method: str = "closed") -> np.ndarray:
    """``Cov(eta(0)/N, eta(k)/N)`` for ``k = 0..K-1`` under the stationary law."""
    return stationary_moments(params, N, method).cov


def check_monotone(cov, atol: float = 1e-14) -> bool:
    """True when the covariance does not increase with graph distance."""
    cov = np.asarray(cov)
    K = cov.size
    return all(cov[k] >= cov[k + 1] - atol for k in range(K // 2))


def cov_asymptotic(params: ModelParams, N: int, k: int) -> tuple[float, float]:
    """First- and second-order large-N expansions of ``Cov(eta(0)/N, eta(k)/N)``."""
    K, th, p = params.K, params.theta, params.p
    if not 0 <= k < K:
        raise DomainError(f"k must be in [0, {K - 1}]")
    lead = (1.0 / K) * (k == 0) - 1.0 / K**2 + p * (6 * k * (k - K) + K**2 - 1) / (6 * K**2 * (th + 1))
    order1 = lead / N
    m = k * (K - k)
    second = p**2 * (30 * m * (m + 2) - (K - 1) * (K + 1) * (K**2 + 11)) / (180 * K**2 * (th + 1) ** 2)
    return order1, order1 + second / N**2


def qsd_distance_bound(params: ModelParams, N: int) -> float:
    """Leading-order bound on ``E|m(eta) - uniform|_2`` under the stationary law."""
    K = params.K
    return math.sqrt((K - 1) / N) * math.sqrt(1.0 + params.p * (K + 1) / (6.0 * (1.0 + params.theta)))


def qsd_distance_jensen(params: ModelParams, N: int) -> float:
    """``sqrt(K Var[eta(0)/N])``, the exact quantity the leading-order bound approximates."""
    return math.sqrt(params.K * stationary_moments(params, N).variance)
