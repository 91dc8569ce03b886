"""Stochastic simulation of the particle system and Monte Carlo estimators."""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .circulant import spectral_constants
from .errors import DomainError, InsufficientData
from .model import Configuration, ModelParams

SEED_MASK = (1 << 64) - 1
BLOCK = 256


@dataclass
class TrajectoryEnsemble:
    """Configurations of ``R`` replicas sampled at common times.

    ``records[r, a, k]`` is the occupation of site ``k`` in replica ``r`` at
    ``times[a]``.
    """

    seed: int
    times: np.ndarray
    records: np.ndarray
    params: ModelParams | None = None
    burn_in: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def replicas(self) -> int:
        return self.records.shape[0]

    @property
    def K(self) -> int:
        return self.records.shape[2]

    @property
    def N(self) -> int:
        return int(self.records[0, 0].sum())

    def proportions(self) -> np.ndarray:
        return self.records / self.N

    def to_csv(self, path=None) -> str:
        """Write ``replica,time,site_0,...`` rows; returns the text."""
        buf = io.StringIO()
        buf.write(",".join(["replica", "time"] + [f"site_{k}" for k in range(self.K)]) + "\n")
        tstr = ["%.17g" % t for t in self.times]
        for r in range(self.replicas):
            for a, ts in enumerate(tstr):
                row = self.records[r, a]
                buf.write(f"{r},{ts}," + ",".join(str(int(x)) for x in row) + "\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, source, seed: int = 0) -> "TrajectoryEnsemble":
        """Parse the layout produced by :meth:`to_csv` (a path or a file object)."""
        if isinstance(source, (str, os.PathLike)):
            with open(source, newline="") as fh:
                rows = list(csv.reader(fh))
        else:
            rows = list(csv.reader(source))
        header, body = rows[0], rows[1:]
        if header[:2] != ["replica", "time"]:
            raise ValueError("not a trajectory CSV")
        K = len(header) - 2
        reps = sorted({int(r[0]) for r in body})
        times = []
        for r in body:
            if int(r[0]) != reps[0]:
                break
            times.append(float(r[1]))
        rec = np.zeros((len(reps), len(times), K), dtype=np.int64)
        pos = {r: i for i, r in enumerate(reps)}
        counter = {r: 0 for r in reps}
        for r in body:
            i = pos[int(r[0])]
            rec[i, counter[i]] = [int(x) for x in r[2:]]
            counter[i] += 1
        return cls(seed, np.array(times), rec)


def thread_count() -> int:
    env = os.environ.get("CYCLEFV_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _validate(params: ModelParams, N: int, eta0) -> np.ndarray:
    cfg = eta0 if isinstance(eta0, Configuration) else Configuration(eta0)
    if cfg.K != params.K:
        raise DomainError("initial configuration does not match K")
    if N != cfg.N:
        raise DomainError(f"initial configuration holds {cfg.N} particles, expected {N}")
    return np.asarray(cfg.counts, dtype=np.int64)


def _sample_grid(t_end: float, sample_times) -> np.ndarray:
    if t_end < 0:
        raise DomainError("t_end must be nonnegative")
    if sample_times is None:
        return np.array([float(t_end)])
    times = np.asarray(sample_times, dtype=float).ravel()
    if times.size == 0 or np.any(times < 0) or np.any(np.diff(times) < 0) or times[-1] > t_end:
        raise DomainError("sample_times must be nondecreasing within [0, t_end]")
    return times


def simulate_ensemble(
    params: ModelParams,
    N: int,
    eta0,
    t_end: float,
    sample_times=None,
    replicas: int = 1,
    seed: int = 0,
    burn_in: float = 0.0,
    threads: int | None = None,
) -> TrajectoryEnsemble:
    """Independent replicas of the exact jump chain.

    Replica ``r`` draws from its own SplitMix64 stream derived from
    ``(seed, r)``, and blocks of replicas are scheduled on a thread pool, so
    the records do not depend on the number of threads. ``burn_in`` shifts
    every sample time; reported times exclude it.
    """
    if replicas < 1:
        raise DomainError("replicas must be >= 1")
    if burn_in < 0:
        raise DomainError("burn_in must be nonnegative")
    eta = _validate(params, N, eta0)
    times = _sample_grid(t_end, sample_times)
    run_times = times + burn_in
    records = np.zeros((replicas, times.size, params.K), dtype=np.int64)
    seed64 = np.uint64(int(seed) & SEED_MASK)
    starts = list(range(0, replicas, BLOCK))

    def work(first):
        chunk = records[first : first + BLOCK]
        return _kernels.run_block(eta, N, params.theta, params.p, run_times, seed64, first, chunk)

    n_threads = min(threads or thread_count(), len(starts))
    if n_threads <= 1:
        jumps = sum(work(s) for s in starts)
    else:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            jumps = sum(pool.map(work, starts))
    return TrajectoryEnsemble(int(seed), times, records, params, burn_in, {"jumps": int(jumps)})


def simulate(params: ModelParams, N: int, eta0, t_end: float, sample_times=None, seed: int = 0) -> TrajectoryEnsemble:
    """Single replica of the particle system."""
    return simulate_ensemble(params, N, eta0, t_end, sample_times, replicas=1, seed=seed, threads=1)


def stationary_burn_in(params: ModelParams, factor: float = 50.0) -> float:
    """Default burn-in ``factor / rho_K`` for stationary estimation."""
    return factor / spectral_constants(params)[0]


def simulate_literal(params: ModelParams, N: int, eta0, t_end: float, rng: np.random.Generator) -> np.ndarray:
    """Reference path following the particle description verbatim.

    Every particle carries total rate ``1 + theta + p``; a killed particle
    picks one of the other ``N - 1`` particles uniformly, including those on
    its own site. Slow, for cross-checking the compiled kernel.
    """
    K, th, p = params.K, params.theta, params.p
    pos = np.repeat(np.arange(K), _validate(params, N, eta0))
    t = rng.exponential(1.0 / (N * (1 + th + p)))
    while t <= t_end:
        a = rng.integers(N)
        u = rng.random() * (1 + th + p)
        if u < 1:
            pos[a] = (pos[a] + 1) % K
        elif u < 1 + th:
            pos[a] = (pos[a] - 1) % K
        else:
            b = rng.integers(N - 1)
            b += b >= a
            pos[a] = pos[b]
        t += rng.exponential(1.0 / (N * (1 + th + p)))
    return np.bincount(pos, minlength=K)


@dataclass(frozen=True)
class MomentEstimate:
    mean_k: np.ndarray
    mean_l: np.ndarray
    cov_kl: np.ndarray
    std_error: np.ndarray


def estimate_moments(ensemble: TrajectoryEnsemble, k: int, l: int) -> MomentEstimate:
    """Across-replica mean of ``eta(k)/N`` and covariance of ``eta(k)/N, eta(l)/N``.

    One value per sample time. The covariance uses the unbiased ``R - 1``
    normalisation; its standard error is the sample deviation of the centred
    products divided by ``sqrt(R)``.
    """
    R = ensemble.replicas
    if R < 2:
        raise InsufficientData("at least two replicas are needed")
    X = ensemble.proportions()
    x, y = X[:, :, k % ensemble.K], X[:, :, l % ensemble.K]
    mx, my = x.mean(axis=0), y.mean(axis=0)
    prod = (x - mx) * (y - my)
    cov = prod.sum(axis=0) / (R - 1)
    se = prod.std(axis=0, ddof=1) / np.sqrt(R)
    return MomentEstimate(mx, my, cov, se)


def mean_standard_error(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=float).ravel()
    if v.size < 2:
        raise InsufficientData("at least two values are needed")
    return float(v.mean()), float(v.std(ddof=1) / np.sqrt(v.size))


def batch_means(series, n_batches: int = 20) -> tuple[float, float]:
    """Mean of a correlated series and its batch-means standard error."""
    x = np.asarray(series, dtype=float).ravel()
    if n_batches < 2 or x.size < n_batches:
        raise InsufficientData("need at least two nonempty batches")
    m = x.size // n_batches
    b = x[: m * n_batches].reshape(n_batches, m).mean(axis=1)
    return float(b.mean()), float(b.std(ddof=1) / np.sqrt(n_batches))


def stationary_covariance_estimate(
    params: ModelParams,
    N: int,
    replicas: int,
    seed: int = 0,
    burn_in: float | None = None,
    threads: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """``Cov(eta(0)/N, eta(k)/N)`` under the stationary law, one sample per replica.

    Each replica starts with particles spread as evenly as possible and is
    sampled once after ``burn_in`` (default ``50 / rho_K``). The stationary
    mean ``1/K`` is known exactly, so the estimator is the mean of
    ``x_0 x_k - 1/K^2`` with its plain standard error; averaging over the
    ``K`` rotations of the site pair uses rotation invariance to reduce
    variance. Returns ``(cov, std_error)`` indexed by ``k``.
    """
    K = params.K
    eta0 = np.full(K, N // K)
    eta0[: N % K] += 1
    if burn_in is None:
        burn_in = stationary_burn_in(params)
    ens = simulate_ensemble(params, N, eta0, 0.0, [0.0], replicas, seed, burn_in, threads)
    X = ens.proportions()[:, 0, :]
    cov = np.empty(K)
    se = np.empty(K)
    for k in range(K):
        z = (X * np.roll(X, -k, axis=1)).mean(axis=1) - 1.0 / K**2
        cov[k], se[k] = mean_standard_error(z)
    return cov, se
