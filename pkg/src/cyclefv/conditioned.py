"""Law of the killed walk conditioned on survival.

Killing is uniform in space, so conditioning on survival up to time ``t``
gives exactly the law of the unkilled walk: ``nu @ expm(t Q)``. The killing
rate never enters here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circulant import build_Q, exp_action, spectral_constants
from .model import ModelParams, as_prob_vector, uniform


@dataclass(frozen=True)
class ConditionedLawQuery:
    params: ModelParams
    initial: np.ndarray
    t: float

    def __post_init__(self):
        if self.t < 0:
            raise ValueError("t must be nonnegative")
        object.__setattr__(self, "initial", as_prob_vector(self.initial))


def conditioned_law(params: ModelParams, initial, t: float) -> np.ndarray:
    """Distribution at time ``t`` of the walk started from ``initial``, given survival."""
    q = ConditionedLawQuery(params, initial, t)
    return exp_action(build_Q(q.params), q.t, q.initial)


def qsd(params: ModelParams) -> np.ndarray:
    """Quasi-stationary distribution (uniform on the cycle)."""
    return uniform(params.K)


def l2_sandwich(params: ModelParams, nu, mu, t: float) -> tuple[float, float, float]:
    """``(exp(-alpha t)|nu-mu|, |(nu-mu) expm(tQ)|, exp(-rho t)|nu-mu|)`` in the 2-norm."""
    nu, mu = as_prob_vector(nu), as_prob_vector(mu)
    rho, alpha = spectral_constants(params)
    d0 = float(np.linalg.norm(nu - mu))
    actual = float(np.linalg.norm(exp_action(build_Q(params), t, nu - mu)))
    return np.exp(-alpha * t) * d0, actual, np.exp(-rho * t) * d0


def tv_distance(a, b) -> float:
    return 0.5 * float(np.abs(np.asarray(a) - np.asarray(b)).sum())


def tv_sandwich(params: ModelParams, nu, mu, t: float) -> tuple[float, float, float]:
    """Total-variation analogue of :func:`l2_sandwich`.

    Norm equivalence on R^K costs a factor ``sqrt(K)`` on each side:
    ``exp(-alpha t) d/sqrt(K) <= d_TV(t) <= sqrt(K) exp(-rho t) d``.
    """
    nu, mu = as_prob_vector(nu), as_prob_vector(mu)
    rho, alpha = spectral_constants(params)
    d0 = tv_distance(nu, mu)
    Q = build_Q(params)
    actual = tv_distance(exp_action(Q, t, nu), exp_action(Q, t, mu))
    sk = np.sqrt(params.K)
    return np.exp(-alpha * t) * d0 / sk, actual, sk * np.exp(-rho * t) * d0
