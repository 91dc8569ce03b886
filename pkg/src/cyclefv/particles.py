"""Exact treatment of the N-particle system on small instances.

Each particle walks on the cycle (clockwise rate 1, anti-clockwise rate
``theta``) and is killed at rate ``p``; a killed particle immediately jumps
onto the site of one of the other ``N - 1`` particles chosen uniformly. In
occupation coordinates the transition ``eta -> eta - e_i + e_j`` has rate

    eta(i) * (1{j = i+1} + theta 1{j = i-1} + p eta(j) / (N - 1)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg
from scipy.stats import poisson

from .errors import DomainError, SolveError, TooLarge
from .model import Configuration, ModelParams, move_particle, rotate

MAX_STATES = 10**7
DENSE_SOLVE_LIMIT = 3000
SPARSE_SOLVE_LIMIT = 20000


@dataclass
class StateSpace:
    K: int
    N: int
    states: list
    index: dict = field(repr=False)

    def __len__(self) -> int:
        return len(self.states)

    def counts_matrix(self) -> np.ndarray:
        """``(n_states, K)`` array of occupation numbers."""
        return np.array([s.counts for s in self.states], dtype=np.int64)


def _compositions(total: int, parts: int):
    # lexicographic order of the occupation vectors
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def enumerate_states(K: int, N: int) -> StateSpace:
    """All configurations of ``N`` particles on ``K`` sites, in lexicographic order."""
    if K < 3:
        raise DomainError("K must be >= 3")
    if N < 2:
        raise DomainError("N must be >= 2")
    size = math.comb(K + N - 1, N)
    if size > MAX_STATES:
        raise TooLarge(f"{size} states exceeds the enumeration budget {MAX_STATES}")
    states = [Configuration(c) for c in _compositions(N, K)]
    return StateSpace(K, N, states, {s.counts: i for i, s in enumerate(states)})


@dataclass
class FullGenerator:
    params: ModelParams
    space: StateSpace
    matrix: scipy.sparse.csr_matrix

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def rate(self, source: Configuration, target: Configuration) -> float:
        ix = self.space.index
        return float(self.matrix[ix[source.counts], ix[target.counts]])


def transition_rates(params: ModelParams, config: Configuration):
    """Yield ``(target, rate)`` for every move ``i -> j`` with ``i != j``.

    Several ``(i, j)`` may produce the same target only when ``K`` is small;
    callers that need a matrix accumulate duplicates.
    """
    K, N = config.K, config.N
    th, p = params.theta, params.p
    for i in range(K):
        ni = config.counts[i]
        if ni == 0:
            continue
        for j in range(K):
            if j == i:
                continue
            r = (j == (i + 1) % K) + th * (j == (i - 1) % K) + p * config.counts[j] / (N - 1)
            if r:
                yield move_particle(config, i, j), ni * r


def full_generator(params: ModelParams, space: StateSpace) -> FullGenerator:
    if params.K != space.K:
        raise DomainError("parameter K does not match the state space")
    rows, cols, vals = [], [], []
    for a, state in enumerate(space.states):
        out = 0.0
        for target, r in transition_rates(params, state):
            rows.append(a)
            cols.append(space.index[target.counts])
            vals.append(r)
            out += r
        rows.append(a)
        cols.append(a)
        vals.append(-out)
    n = len(space)
    # duplicate (row, col) pairs are summed on conversion
    L = scipy.sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    L.sum_duplicates()
    return FullGenerator(params, space, L)


def stationary_distribution_exact(gen: FullGenerator) -> np.ndarray:
    """Solve ``nu L = 0, sum(nu) = 1`` by replacing one equation with the normalisation."""
    n = gen.matrix.shape[0]
    if n > SPARSE_SOLVE_LIMIT:
        raise TooLarge(f"{n} states exceeds the exact-solve budget {SPARSE_SOLVE_LIMIT}")
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    if n <= DENSE_SOLVE_LIMIT:
        M = gen.dense().T
        M[-1, :] = 1.0
        try:
            nu = scipy.linalg.solve(M, rhs)
        except (scipy.linalg.LinAlgError, ValueError) as exc:
            raise SolveError(str(exc)) from exc
    else:
        M = gen.matrix.T.tolil()
        M[-1, :] = np.ones(n)
        nu = scipy.sparse.linalg.spsolve(M.tocsc(), rhs)
        if not np.all(np.isfinite(nu)):
            raise SolveError("sparse stationary solve failed")
    return nu


def solve_instance(params: ModelParams, N: int):
    """Convenience: ``(space, generator, nu)`` for a small instance."""
    space = enumerate_states(params.K, N)
    gen = full_generator(params, space)
    return space, gen, stationary_distribution_exact(gen)


def second_moments(space: StateSpace, dist: np.ndarray) -> np.ndarray:
    """``E[eta(k) eta(r)] / N^2`` as a ``K x K`` matrix."""
    X = space.counts_matrix() / space.N
    return (X * dist[:, None]).T @ X


def first_moments(space: StateSpace, dist: np.ndarray) -> np.ndarray:
    return dist @ (space.counts_matrix() / space.N)


def s_from_distribution(space: StateSpace, dist: np.ndarray) -> np.ndarray:
    """``s_k = E[eta(0) eta(k)] / N^2``."""
    return second_moments(space, dist)[0]


def detailed_balance_residual(gen: FullGenerator, nu: np.ndarray) -> float:
    """``max |nu(x) L(x,y) - nu(y) L(y,x)|`` over all pairs."""
    F = scipy.sparse.diags(nu) @ gen.matrix
    D = (F - F.T).tocoo()
    return float(np.max(np.abs(D.data), initial=0.0))


def rotation_spread(space: StateSpace, nu: np.ndarray) -> float:
    """Largest ``|nu(eta) - nu(rotate(eta))|`` over the state space."""
    worst = 0.0
    for a, state in enumerate(space.states):
        b = space.index[rotate(state, 1).counts]
        worst = max(worst, abs(nu[a] - nu[b]))
    return worst


def reversibility_report(params: ModelParams, N: int) -> dict:
    """Reversibility diagnostics on the states used in the non-reversibility argument.

    For ``K = 3`` the Kolmogorov products around the cycle
    ``(N,0,0) -> (N-1,1,0) -> (N-1,0,1) -> (N,0,0)`` are compared with the
    reversed cycle. For ``K >= 4`` the pair ``(N,0,...)`` and
    ``(N-1,0,1,0,...)`` is tested for detailed balance under the exact
    stationary law.
    """
    K = params.K
    space = enumerate_states(K, N)
    gen = full_generator(params, space)
    report = {"kolmogorov_violation": math.nan, "detailed_balance_violation": math.nan}
    e1 = Configuration([N] + [0] * (K - 1))
    if K == 3:
        e2 = Configuration([N - 1, 1, 0])
        e3 = Configuration([N - 1, 0, 1])
        fwd = gen.rate(e1, e2) * gen.rate(e2, e3) * gen.rate(e3, e1)
        bwd = gen.rate(e1, e3) * gen.rate(e3, e2) * gen.rate(e2, e1)
        report["kolmogorov_violation"] = abs(fwd - bwd)
        report["forward_product"] = fwd
        report["backward_product"] = bwd
    else:
        e2 = Configuration([N - 1, 0, 1] + [0] * (K - 3))
        nu = stationary_distribution_exact(gen)
        ix = space.index
        a, b = ix[e1.counts], ix[e2.counts]
        report["detailed_balance_violation"] = abs(
            nu[a] * gen.rate(e1, e2) - nu[b] * gen.rate(e2, e1)
        )
    return report


MOMENT_KINDS = ("f_k", "f_kk", "f_k_kplus1", "f_kl")


def generator_moments(params: ModelParams, N: int, config: Configuration, which: str, k: int, l: int | None = None) -> float:
    """Generator applied to ``f_k = eta(k)`` or ``f_{k,l} = eta(k) eta(l)``, in closed form."""
    K = config.K
    if K != params.K:
        raise DomainError("configuration size does not match K")
    if N != config.N:
        raise DomainError(f"configuration holds {config.N} particles, expected {N}")
    th, p = params.theta, params.p
    e = lambda i: float(config[i])  # noqa: E731
    kill = 1.0 + th + p / (N - 1)
    if which == "f_k":
        return e(k - 1) - (1 + th) * e(k) + th * e(k + 1)
    if which == "f_kk":
        return (
            2 * (e(k - 1) * e(k) - kill * e(k) ** 2 + th * e(k) * e(k + 1))
            + e(k - 1) + (1 + th + 2 * p * N / (N - 1)) * e(k) + th * e(k + 1)
        )
    if which == "f_k_kplus1":
        return (
            -2 * kill * e(k) * e(k + 1) + e(k - 1) * e(k + 1) + th * e(k + 1) ** 2
            + e(k) ** 2 + th * e(k) * e(k + 2) - e(k) - th * e(k + 1)
        )
    if which == "f_kl":
        if l is None:
            raise DomainError("f_kl needs a second site l")
        d = (l - k) % K
        if d in (0, 1, K - 1):
            raise DomainError(f"f_kl needs sites at cyclic distance >= 2, got k={k}, l={l}")
        return (
            -2 * kill * e(k) * e(l) + e(k - 1) * e(l) + th * e(k + 1) * e(l)
            + e(k) * e(l - 1) + th * e(k) * e(l + 1)
        )
    raise DomainError(f"unknown moment kind {which!r}; expected one of {MOMENT_KINDS}")


def apply_generator(gen: FullGenerator, f_values: np.ndarray) -> np.ndarray:
    """``(L f)(eta)`` for a function tabulated on the state space."""
    return gen.matrix @ f_values


def transient_distribution(gen: FullGenerator, initial: np.ndarray, t: float, tol: float = 1e-13) -> np.ndarray:
    """``initial @ expm(t L)`` by uniformization.

    With ``Lam >= max |L_ii|`` and ``P = I + L/Lam`` the law at time ``t`` is
    a Poisson(``Lam t``) mixture of ``initial P^n``; the series is cut where
    the Poisson tail drops below ``tol``.
    """
    initial = np.asarray(initial, dtype=float)
    if t == 0:
        return initial.copy()
    L = gen.matrix
    lam = float(np.max(-L.diagonal())) * 1.02
    P = (scipy.sparse.identity(L.shape[0], format="csr") + L / lam).tocsr()
    mean = lam * t
    n_max = int(poisson.isf(tol, mean)) + 1
    weights = poisson.pmf(np.arange(n_max + 1), mean)
    out = np.zeros_like(initial, dtype=float)
    v = initial.astype(float)
    for n in range(n_max + 1):
        out += weights[n] * v
        v = P.T @ v
    return out
