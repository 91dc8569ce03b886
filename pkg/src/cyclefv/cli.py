"""Command-line front end.

CSV output goes to ``--out`` or standard output; human-readable summaries go
to standard error. Exit codes: 0 success, 1 verification failure, 2 usage
error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .circulant import build_Q, circ_eigenvalues, cloez_lambda, q_spectrum_closed_form, spectral_constants
from .covariance import CHECK_TOL, cov_asymptotic, sk_closed_form, solve_sk_linear
from .dynamics import empirical_distance_bound, g_infinity, integrate_g, mean_dynamics, variance_bound
from .errors import CycleFVError
from .model import ModelParams, dirac

EXACT_LIMIT = 5000


class UsageError(Exception):
    pass


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return "%.17g" % x


def _write_csv(header, rows, out) -> str:
    text = ",".join(header) + "\n" + "".join(",".join(_fmt(v) for v in r) + "\n" for r in rows)
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return text


def _say(*lines):
    for line in lines:
        print(line, file=sys.stderr)


def _params(a, need_p=True) -> ModelParams:
    if a.K is None:
        raise UsageError("--K is required")
    return ModelParams(a.K, a.theta, a.p if need_p else (a.p or 1.0))


def _need(a, *names):
    for n in names:
        if getattr(a, n) is None:
            raise UsageError(f"--{n.replace('_', '-')} is required")


def _eta0(a, K, N) -> list[int]:
    if a.eta0:
        eta = [int(x) for x in str(a.eta0).split(",")]
        if len(eta) != K or sum(eta) != N:
            raise UsageError(f"--eta0 must list {K} counts summing to {N}")
        return eta
    return [N] + [0] * (K - 1)


def cmd_spectrum(a) -> int:
    pr = _params(a, need_p=False)
    lam = q_spectrum_closed_form(pr)
    poly = circ_eigenvalues(build_Q(pr))
    rho, alpha = spectral_constants(pr)
    th = pr.theta
    c = (lam.real + 1 + th) / (1 + th)
    ellipse = np.abs(c**2 + (lam.imag / (1 - th)) ** 2 - 1) if th != 1 else np.abs(lam.imag)
    _say(
        f"rho={rho:.17g}",
        f"alpha={alpha:.17g}",
        f"closed_vs_polynomial={np.max(np.abs(lam - poly)):.3e}",
        f"ellipse_residual={np.max(ellipse):.3e}",
        f"cloez_lambda={cloez_lambda(build_Q(pr)):.17g}",
    )
    _write_csv(["k", "re_lambda", "im_lambda"], [(k, l.real, l.imag) for k, l in enumerate(lam)], a.out)
    return 0


def cmd_covariance(a) -> int:
    _need(a, "N")
    pr = _params(a)
    K, N = pr.K, a.N
    closed = sk_closed_form(pr, N).s
    linear = solve_sk_linear(pr, N).s
    exact = [math.nan] * K
    if math.comb(K + N - 1, N) <= EXACT_LIMIT:
        from .particles import s_from_distribution, solve_instance

        space, _, nu = solve_instance(pr, N)
        exact = list(s_from_distribution(space, nu))
    cov = closed - 1.0 / K**2
    rows = []
    for k in range(K):
        a1, a2 = cov_asymptotic(pr, N, k)
        rows.append((k, closed[k], linear[k], exact[k], cov[k], a1, a2))
    _write_csv(["k", "s_closed", "s_linear", "s_exact", "cov", "asym1", "asym2"], rows, a.out)
    gaps = [np.max(np.abs(closed - linear))]
    if not math.isnan(exact[0]):
        gaps.append(np.max(np.abs(closed - np.array(exact))))
    gap = float(max(gaps))
    _say(f"max_method_gap={gap:.3e}", f"N_times_cov0={N * cov[0]:.17g}")
    if a.checked and gap > CHECK_TOL:
        _say(f"FAIL: methods disagree by {gap:.3e} > {CHECK_TOL:g}")
        return 1
    return 0


def cmd_simulate(a) -> int:
    from .covariance import stationary_covariances
    from .simulation import estimate_moments, simulate_ensemble, stationary_burn_in

    _need(a, "N", "t_end")
    pr = _params(a)
    K, N = pr.K, a.N
    if a.replicas is None or a.replicas < 1:
        raise UsageError("--replicas must be a positive integer")
    if a.t_end < 0 or a.n_samples < 1:
        raise UsageError("--t-end must be >= 0 and --n-samples >= 1")
    times = np.linspace(0.0, a.t_end, a.n_samples) if a.n_samples > 1 else np.array([a.t_end])
    if a.stationary:
        eta0 = np.full(K, N // K)
        eta0[: N % K] += 1
        burn = a.burn_in if a.burn_in is not None else stationary_burn_in(pr)
    else:
        eta0 = _eta0(a, K, N)
        burn = a.burn_in or 0.0
    ens = simulate_ensemble(pr, N, eta0, a.t_end, times, a.replicas, a.seed, burn, a.threads)
    text = ens.to_csv(a.out)
    if not a.out:
        sys.stdout.write(text)
    summary = {
        "version": __version__,
        "params": {"K": K, "N": N, "theta": pr.theta, "p": pr.p},
        "seed": a.seed,
        "replicas": a.replicas,
        "burn_in": burn,
        "times": [float(t) for t in times],
    }
    ok = True
    if a.replicas >= 2:
        est = [estimate_moments(ens, 0, k) for k in range(K)]
        summary["mean_0"] = est[0].mean_k.tolist()
        summary["cov_0k"] = [e.cov_kl.tolist() for e in est]
        summary["cov_0k_se"] = [e.std_error.tolist() for e in est]
        if a.stationary:
            ref = stationary_covariances(pr, N)
            z = [float(np.max(np.abs(e.cov_kl - ref[k]) / np.maximum(e.std_error, 1e-300))) for k, e in enumerate(est)]
            ok = max(z) <= 3.0
            summary["stationary_check"] = {"closed_form": ref.tolist(), "max_z": max(z), "pass": ok}
            _say(f"stationary check: max |z| = {max(z):.3f} ({'pass' if ok else 'FAIL'})")
    if a.summary:
        with open(a.summary, "w") as fh:
            json.dump(summary, fh, indent=2)
    return 0 if ok else 1


def cmd_dynamics(a) -> int:
    _need(a, "N", "t_end")
    pr = _params(a)
    K, N = pr.K, a.N
    if a.t_end <= 0 or a.n_times < 2:
        raise UsageError("--t-end must be > 0 and --n-times >= 2")
    eta0 = _eta0(a, K, N)
    grid = np.linspace(0.0, a.t_end, a.n_times)
    fields = integrate_g(pr, N, eta0, grid)
    ginf = g_infinity(pr, N).g[0]
    mu = dirac(K, 0) if a.mu is None else np.array([float(x) for x in a.mu.split(",")])
    small = math.comb(K + N - 1, N) <= EXACT_LIMIT
    if small:
        from .particles import enumerate_states, first_moments, full_generator, second_moments, transient_distribution

        space = enumerate_states(K, N)
        gen = full_generator(pr, space)
        init = np.zeros(len(space))
        init[space.index[tuple(eta0)]] = 1.0
    from .covariance import stationary_moments

    var_nu = stationary_moments(pr, N).variance
    header = (["t"] + [f"s_{k}" for k in range(K)] + [f"g0_{k}" for k in range(K)] + [f"ginf_{k}" for k in range(K)]
              + ["var_gap_bound", "var_gap_exact", "dist_lower", "dist_upper"])
    rows = []
    violations = 0
    for f in fields:
        t = f.t
        s = mean_dynamics(pr, N, eta0, t)
        vb = variance_bound(pr, N, t)
        gap = math.nan
        if small:
            d = transient_distribution(gen, init, t)
            m = first_moments(space, d)
            gap = float(np.max(np.abs(np.diag(second_moments(space, d)) - m**2 - var_nu)))
            violations += gap > vb + 1e-9
        lo, hi = empirical_distance_bound(pr, N, t, eta0, mu)
        rows.append([t, *s, *f.g[0], *ginf, vb, gap, lo, hi])
    _write_csv(header, rows, a.out)
    drift = float(np.max(np.abs(fields[-1].g[0] - ginf)))
    _say(f"final_gap_to_g_infinity={drift:.3e}", f"bound_violations={violations}")
    return 1 if violations else 0


def cmd_verify(a) -> int:
    from .verification import run_checks

    try:
        results = run_checks(a.only, theta_offset=a.inject_theta_mismatch)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from exc
    report = {
        "version": __version__,
        "checks": [r.to_json() for r in results],
        "pass": all(r.passed for r in results),
    }
    for r in results:
        _say(f"{'PASS' if r.passed else 'FAIL'} {r.check_id}: residual={r.residual:.3e} threshold={r.threshold:.1e}")
    text = json.dumps(report, indent=2)
    if a.json:
        with open(a.json, "w") as fh:
            fh.write(text)
    else:
        print(text)
    return 0 if report["pass"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cyclefv", description="Fleming-Viot particles on the cycle with uniform killing.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, with_N=True):
        sp.add_argument("--config", help="JSON file of option values; flags override it")
        sp.add_argument("--K", type=int)
        sp.add_argument("--theta", type=float, default=1.0)
        sp.add_argument("--p", type=float, default=1.0)
        if with_N:
            sp.add_argument("--N", type=int)
        sp.add_argument("--out", help="CSV output path (default: stdout)")

    sp = sub.add_parser("spectrum", help="eigenvalues and spectral constants of the walk generator")
    common(sp, with_N=False)
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("covariance", help="stationary two-site moments by every available method")
    common(sp)
    sp.add_argument("--checked", action="store_true", help="exit 1 if methods disagree by more than 1e-10")
    sp.set_defaults(func=cmd_covariance)

    sp = sub.add_parser("simulate", help="Monte Carlo trajectories of the particle system")
    common(sp)
    sp.add_argument("--t-end", type=float)
    sp.add_argument("--n-samples", type=int, default=11, help="evenly spaced sample times in [0, t-end]")
    sp.add_argument("--replicas", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--eta0", help="comma-separated initial counts (default: all on site 0)")
    sp.add_argument("--stationary", action="store_true", help="start near uniform and apply the default burn-in")
    sp.add_argument("--burn-in", type=float)
    sp.add_argument("--threads", type=int)
    sp.add_argument("--summary", help="path for the JSON summary")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("dynamics", help="mean, covariance field and bounds on a time grid")
    common(sp)
    sp.add_argument("--t-end", type=float)
    sp.add_argument("--n-times", type=int, default=21)
    sp.add_argument("--eta0")
    sp.add_argument("--mu", help="comma-separated reference distribution (default: point mass at 0)")
    sp.set_defaults(func=cmd_dynamics)

    sp = sub.add_parser("verify", help="run the verification checks")
    sp.add_argument("--config")
    sp.add_argument("--only", help="comma-separated check groups or check-id prefixes")
    sp.add_argument("--json", help="path for the JSON report (default: stdout)")
    sp.add_argument("--inject-theta-mismatch", type=float, default=0.0, help=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_verify)
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, ValueError) as exc:
            parser.error(f"cannot read config: {exc}")
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        bad = [k for k in cfg if k.replace("-", "_") not in known]
        if bad:
            parser.error(f"unknown config keys: {', '.join(bad)}")
        sub.set_defaults(**{k.replace("-", "_"): v for k, v in cfg.items()})
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    parser = build_parser()
    args = parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        sub = parser._subparsers._group_actions[0].choices[args.command]
        sys.stderr.write(sub.format_usage())
        print(f"cyclefv {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except CycleFVError as exc:
        print(f"cyclefv {args.command}: failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
