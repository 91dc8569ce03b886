"""Registry of numerical checks tying every component to an independent oracle.

Each check returns a :class:`CheckResult` with the measured residual and the
threshold it is held to. ``theta_offset`` is a negative-control hook: when
nonzero, one side of every cross-module comparison runs with a perturbed
``theta`` and the affected checks must fail.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import chebyshev
from .circulant import (
    build_Q,
    circ_eigenvalues,
    cloez_lambda,
    exp_action,
    expm_dense,
    q_spectrum_closed_form,
    spectral_constants,
)
from .covariance import cov_asymptotic, sk_closed_form, solve_sk_linear, stationary_covariances, stationary_moments
from .dynamics import (
    g_infinity,
    integrate_g,
    kronecker_sum,
    q2_exp,
    q2_operator,
    variance_bound,
)
from .model import ModelParams
from .particles import (
    enumerate_states,
    first_moments,
    full_generator,
    generator_moments,
    reversibility_report,
    rotation_spread,
    s_from_distribution,
    second_moments,
    stationary_distribution_exact,
    detailed_balance_residual,
    transient_distribution,
)
from .simulation import stationary_covariance_estimate


@dataclass(frozen=True)
class CheckResult:
    check_id: str
    paper_ref: str
    residual: float
    threshold: float
    passed: bool

    def to_json(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        for key in ("residual", "threshold"):
            if not math.isfinite(d[key]):
                d[key] = str(d[key])
        return d


def _result(cid, ref, residual, threshold, passed=None) -> CheckResult:
    residual = float(residual)
    if passed is None:
        passed = residual <= threshold
    return CheckResult(cid, ref, residual, float(threshold), bool(passed))


def _other(params: ModelParams, offset: float) -> ModelParams:
    return ModelParams(params.K, params.theta + offset, params.p) if offset else params


def check_spectrum(offset=0.0) -> CheckResult:
    worst = 0.0
    for K in range(3, 13):
        for th in (0.5, 1.0, 2.0):
            pr = ModelParams(K, th, 1.0)
            lam = q_spectrum_closed_form(_other(pr, offset))
            worst = max(worst, np.max(np.abs(lam - circ_eigenvalues(build_Q(pr)))))
            Q = build_Q(pr).dense()
            F = np.exp(2j * np.pi * np.outer(np.arange(K), np.arange(K)) / K)
            worst = max(worst, np.max(np.abs(Q @ F - F * lam)))
            rho, alpha = spectral_constants(pr)
            re = -lam.real
            worst = max(worst, abs(rho - np.min(re[1:])), abs(alpha - np.max(re)))
    return _result("spectrum_closed_form", "eigenvalues of the circulant walk generator", worst, 1e-10)


def check_cloez(offset=0.0) -> CheckResult:
    lams = {K: cloez_lambda(build_Q(ModelParams(K, 1.0, 1.0))) for K in range(3, 10)}
    ok = all(lams[K] > 0 for K in (3, 4, 5)) and all(abs(lams[K]) < 1e-12 for K in range(6, 10))
    return _result("cloez_coupling_constant", "coupling constant vanishes for K >= 6",
                   max(abs(lams[K]) for K in range(6, 10)), 1e-12, ok)


def check_l2_sandwich(offset=0.0) -> CheckResult:
    rng = np.random.default_rng(0)
    worst = -math.inf
    for K in range(3, 13):
        for th in (0.5, 1.0, 2.0):
            pr = ModelParams(K, th, 1.0)
            rho, alpha = spectral_constants(_other(pr, offset))
            Q = build_Q(pr)
            for _ in range(100):
                nu, mu = rng.dirichlet(np.ones(K)), rng.dirichlet(np.ones(K))
                d0 = np.linalg.norm(nu - mu)
                for t in (0.0, 0.1, 0.5, 1.0, 3.0):
                    a = np.linalg.norm(exp_action(Q, t, nu - mu))
                    worst = max(worst, math.exp(-alpha * t) * d0 - a, a - math.exp(-rho * t) * d0)
    return _result("conditioned_l2_sandwich", "exponential convergence of the conditioned walk",
                   max(worst, 0.0), 1e-10)


def check_chebyshev(offset=0.0) -> CheckResult:
    worst = 0.0
    for n in range(0, 30):
        for x in (2.0, 2.001, 2.5, 3.7):
            worst = max(worst, chebyshev.chebyshev_identity_check(n, x), chebyshev.three_term_relation_check(n, x))
    return _result("chebyshev_identities", "auxiliary polynomial families", worst, 1e-10)


def check_closed_vs_linear(offset=0.0) -> CheckResult:
    worst = 0.0
    for K in range(3, 41):
        for N in (2, 3, 10, 100, 10**4):
            for th in (0.1, 1.0, 5.0):
                for p in (0.01, 1.0, 10.0):
                    pr = ModelParams(K, th, p)
                    a = sk_closed_form(_other(pr, offset), N).s
                    b = solve_sk_linear(pr, N).s
                    worst = max(worst, np.max(np.abs(a - b)))
    return _result("covariance_closed_vs_linear", "explicit covariance formula", worst, 1e-11)


def check_enumeration(offset=0.0) -> CheckResult:
    worst = 0.0
    for K in range(3, 6):
        for N in range(2, 7):
            for th, p in ((1.0, 1.0), (2.0, 0.5)):
                pr = ModelParams(K, th, p)
                space = enumerate_states(K, N)
                nu = stationary_distribution_exact(full_generator(_other(pr, offset), space))
                s = s_from_distribution(space, nu)
                worst = max(worst, np.max(np.abs(s - sk_closed_form(pr, N).s)),
                            np.max(np.abs(s - solve_sk_linear(pr, N).s)))
    hand = [((3, 2), [1 / 4, 1 / 24, 1 / 24]), ((5, 2), [8 / 55, 1 / 55, 1 / 110, 1 / 110, 1 / 55])]
    for (K, N), ref in hand:
        worst = max(worst, np.max(np.abs(sk_closed_form(ModelParams(K, 1.0, 1.0), N).s - ref)))
    return _result("covariance_vs_enumeration", "stationary moments of the particle system", worst, 1e-10)


def check_generator_moments(offset=0.0) -> CheckResult:
    worst = 0.0
    for K in range(3, 7):
        for N in range(2, 6):
            pr = ModelParams(K, 1.5, 0.7)
            space = enumerate_states(K, N)
            L = full_generator(_other(pr, offset), space).matrix
            X = space.counts_matrix().astype(float)
            for k in range(K):
                cases = [("f_k", X[:, k], None), ("f_kk", X[:, k] ** 2, None),
                         ("f_k_kplus1", X[:, k] * X[:, (k + 1) % K], None)]
                cases += [("f_kl", X[:, k] * X[:, l], l) for l in range(K) if (l - k) % K not in (0, 1, K - 1)]
                for which, f, l in cases:
                    closed = np.array([generator_moments(pr, N, s, which, k, l) for s in space.states])
                    worst = max(worst, np.max(np.abs(L @ f - closed)))
    return _result("generator_moment_formulas", "generator applied to first and second moments", worst, 1e-10)


def check_structure(offset=0.0) -> list[CheckResult]:
    spread = mean_err = 0.0
    db_rev = 0.0
    db_min, db_where = math.inf, None
    for K in range(3, 6):
        for N in range(2, 7):
            for th in (0.5, 1.0, 2.0):
                for p in (0.1, 1.0, 3.0):
                    pr = ModelParams(K, th, p)
                    space = enumerate_states(K, N)
                    gen = full_generator(pr, space)
                    nu = stationary_distribution_exact(gen)
                    spread = max(spread, rotation_spread(space, nu))
                    mean_err = max(mean_err, np.max(np.abs(first_moments(space, nu) - 1.0 / K)))
                    r = detailed_balance_residual(gen, nu)
                    if K == 3 and th == 1.0:
                        db_rev = max(db_rev, r)
                    elif r < db_min:
                        db_min, db_where = r, (K, N, th, p)
    kolm = 0.0
    for N in range(2, 7):
        for th, p in ((1.0, 1.0), (2.0, 1.0), (0.5, 2.0)):
            rep = reversibility_report(ModelParams(3, th + offset, p), N)
            kolm = max(kolm, abs(rep["kolmogorov_violation"] - abs((p + 1) * N - N * th**2 * (p + th))))
    return [
        _result("rotation_invariance", "stationary law is invariant under rotation", spread, 1e-11),
        _result("unbiased_empirical_mean", "empirical measure is unbiased for the QSD", mean_err, 1e-11),
        _result("reversible_symmetric_triangle", "detailed balance holds for K = 3 and theta = 1", db_rev, 1e-11),
        # residual reported as the threshold minus the smallest violation, so positive means failure
        _result("nonreversible_residual_floor", f"detailed balance fails otherwise; smallest at (K,N,theta,p)={db_where}",
                1e-3 - db_min, 0.0),
        _result("kolmogorov_cycle_products", "Kolmogorov cycle criterion on three states", kolm, 1e-12),
    ]


def check_asymptotics(offset=0.0) -> list[CheckResult]:
    pr = ModelParams(3, 1.0, 1.0)
    N = 10**5
    cov0 = stationary_covariances(_other(pr, offset), N)[0]
    rel = abs(N * cov0 - 8 / 27) / (8 / 27)
    ratios = []
    for K, th, p in ((3, 1.0, 1.0), (5, 0.5, 2.0), (8, 2.0, 0.3)):
        pr2 = ModelParams(K, th, p)
        errs = []
        for N2 in (10**3, 10**4):
            cov = stationary_covariances(_other(pr2, offset), N2)
            exp2 = np.array([cov_asymptotic(pr2, N2, k)[1] for k in range(K)])
            errs.append(np.max(np.abs(cov - exp2)) * N2**2)
        ratios.append(errs[0] / errs[1])
    return [
        _result("asymptotic_first_order", "leading-order covariance in 1/N", rel, 0.01),
        _result("asymptotic_second_order", "second-order covariance expansion", 4.0 / min(ratios), 1.0),
    ]


def _exact_cov(pr, N, eta0, t):
    space = enumerate_states(pr.K, N)
    init = np.zeros(len(space))
    init[space.index[tuple(eta0)]] = 1.0
    d = transient_distribution(full_generator(pr, space), init, t)
    m = first_moments(space, d)
    return second_moments(space, d) - np.outer(m, m)


def check_dynamics(offset=0.0) -> list[CheckResult]:
    ode = triple = kron = 0.0
    for K, N in ((3, 2), (3, 3), (4, 2)):
        for th, p in ((1.0, 1.0), (2.0, 0.5)):
            pr = ModelParams(K, th, p)
            eta0 = [N] + [0] * (K - 1)
            fields = integrate_g(_other(pr, offset), N, eta0, [0.0, 0.1, 0.5, 2.0])
            for f in fields[1:]:
                ode = max(ode, np.max(np.abs(f.g - _exact_cov(pr, N, eta0, f.t))))
            g = g_infinity(pr, N).g
            cov = stationary_covariances(_other(pr, offset), N)
            space = enumerate_states(K, N)
            nu = stationary_distribution_exact(full_generator(pr, space))
            ex = second_moments(space, nu) - 1.0 / K**2
            circ = np.array([[cov[(r - k) % K] for r in range(K)] for k in range(K)])
            triple = max(triple, np.max(np.abs(g - circ)), np.max(np.abs(g - ex)), np.max(np.abs(circ - ex)))
            kron = max(kron, np.max(np.abs(q2_operator(pr) - kronecker_sum(_other(pr, offset)))),
                       np.max(np.abs(expm_dense(q2_operator(pr), 0.7) - q2_exp(_other(pr, offset), 0.7))))
    return [
        _result("covariance_ode_vs_exact", "evolution equation for the covariance field", ode, 1e-7),
        _result("g_infinity_consistency", "stationary covariance field", triple, 1e-9),
        _result("kronecker_identities", "pair generator is a Kronecker sum", kron, 1e-10),
    ]


def check_variance_bound(offset=0.0) -> CheckResult:
    worst = -math.inf
    for K, N in ((3, 2), (3, 3), (4, 2)):
        for th, p in ((1.0, 1.0), (2.0, 0.5)):
            pr = ModelParams(K, th, p)
            space = enumerate_states(K, N)
            gen = full_generator(pr, space)
            var = stationary_moments(_other(pr, offset), N).variance
            init = np.zeros(len(space))
            init[space.index[tuple([N] + [0] * (K - 1))]] = 1.0
            for t in np.linspace(0.0, 5.0, 20):
                d = transient_distribution(gen, init, t)
                m = first_moments(space, d)
                v = np.diag(second_moments(space, d)) - m**2
                worst = max(worst, np.max(np.abs(v - var)) - variance_bound(pr, N, t))
    return _result("variance_bound_dominates", "finite-time variance bound", max(worst, 0.0), 1e-9)


def check_simulator(offset=0.0, replicas: int = 100000) -> CheckResult:
    pr = ModelParams(4, 2.0, 1.0)
    N = 6
    cov, se = stationary_covariance_estimate(_other(pr, offset), N, replicas, seed=1)
    z = np.max(np.abs(cov - stationary_covariances(pr, N)) / se)
    return _result("simulator_stationary_covariance", "Monte Carlo estimate of the stationary covariances", z, 3.0)


REGISTRY: dict[str, tuple[Callable, tuple[str, ...]]] = {
    "spectrum": (check_spectrum, ("spectrum_closed_form",)),
    "cloez": (check_cloez, ("cloez_coupling_constant",)),
    "conditioned": (check_l2_sandwich, ("conditioned_l2_sandwich",)),
    "chebyshev": (check_chebyshev, ("chebyshev_identities",)),
    "covariance": (check_closed_vs_linear, ("covariance_closed_vs_linear",)),
    "enumeration": (check_enumeration, ("covariance_vs_enumeration",)),
    "moments": (check_generator_moments, ("generator_moment_formulas",)),
    "structure": (check_structure, ("rotation_invariance", "unbiased_empirical_mean", "reversible_symmetric_triangle",
                                    "nonreversible_residual_floor", "kolmogorov_cycle_products")),
    "asymptotics": (check_asymptotics, ("asymptotic_first_order", "asymptotic_second_order")),
    "dynamics": (check_dynamics, ("covariance_ode_vs_exact", "g_infinity_consistency", "kronecker_identities")),
    "bounds": (check_variance_bound, ("variance_bound_dominates",)),
    "simulator": (check_simulator, ("simulator_stationary_covariance",)),
}


def check_ids() -> list[str]:
    return [cid for _, ids in REGISTRY.values() for cid in ids]


def run_checks(only=None, theta_offset: float = 0.0) -> list[CheckResult]:
    """Run the registered checks; ``only`` filters by group name or check-id prefix."""
    if isinstance(only, str):
        only = only.split(",")
    wanted = [o.strip() for o in only or () if o.strip()] or None
    if wanted is not None:
        unknown = [w for w in wanted if w not in REGISTRY and not any(c.startswith(w) for c in check_ids())]
        if unknown:
            raise KeyError(f"unknown checks: {', '.join(unknown)}")
    results = []
    for group, (fn, ids) in REGISTRY.items():
        if wanted is not None and group not in wanted and not any(c.startswith(w) for c in ids for w in wanted):
            continue
        out = fn(theta_offset)
        out = out if isinstance(out, list) else [out]
        if wanted is not None and group not in wanted:
            out = [r for r in out if any(r.check_id.startswith(w) for w in wanted)]
        results.extend(out)
    return results
