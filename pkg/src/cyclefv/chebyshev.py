"""Chebyshev polynomials and the four auxiliary families used for the
stationary covariances.

``T_n`` and ``U_n`` follow ``p_{n+1} = 2x p_n - p_{n-1}``. The auxiliary
families ``N_even, D_even, N_odd, D_odd`` follow ``p_{n+1} = x p_n - p_{n-1}``
with initial values

    =========  =====  =======
    family     n = 0  n = 1
    =========  =====  =======
    N_even     2      x
    D_even     0      x + 2
    N_odd      1      x - 1
    D_odd      1      x + 1
    =========  =====  =======

All evaluation goes through the forward recurrence, which is stable for the
argument range ``x >= 2`` that matters here.
"""

from __future__ import annotations

import enum
import math

from .errors import DomainError

GROWTH_LIMIT = 1e300


class PolyFamily(enum.Enum):
    ChebyT = "T"
    ChebyU = "U"
    Neven = "Neven"
    Deven = "Deven"
    Nodd = "Nodd"
    Dodd = "Dodd"


AUXILIARY = (PolyFamily.Neven, PolyFamily.Deven, PolyFamily.Nodd, PolyFamily.Dodd)


def _initial(family: PolyFamily, x: float) -> tuple[float, float, float]:
    """Return ``(p_0, p_1, multiplier)`` where ``p_{n+1} = m x p_n - p_{n-1}``."""
    if family is PolyFamily.ChebyT:
        return 1.0, x, 2.0
    if family is PolyFamily.ChebyU:
        return 1.0, 2.0 * x, 2.0
    if family is PolyFamily.Neven:
        return 2.0, x, 1.0
    if family is PolyFamily.Deven:
        return 0.0, x + 2.0, 1.0
    if family is PolyFamily.Nodd:
        return 1.0, x - 1.0, 1.0
    if family is PolyFamily.Dodd:
        return 1.0, x + 1.0, 1.0
    raise DomainError(f"unknown family {family!r}")


def sequence(family: PolyFamily, n_max: int, x: float) -> list[float]:
    """Values ``p_0(x), ..., p_{n_max}(x)``.

    Raises ``OverflowError`` once an intermediate value exceeds 1e300.
    """
    if n_max < 0:
        return []
    p0, p1, m = _initial(family, float(x))
    out = [p0]
    if n_max >= 1:
        out.append(p1)
    prev, cur = p0, p1
    for _ in range(2, n_max + 1):
        prev, cur = cur, m * x * cur - prev
        if not abs(cur) <= GROWTH_LIMIT:
            raise OverflowError(f"{family.name} recurrence exceeded {GROWTH_LIMIT:g}")
        out.append(cur)
    return out


def evaluate(family: PolyFamily, n: int, x: float) -> float:
    """Evaluate ``p_n(x)`` for the given family; ``U_{-1} = 0``."""
    family = PolyFamily(family)
    if n == -1 and family is PolyFamily.ChebyU:
        return 0.0
    if n < 0:
        raise DomainError(f"{family.name}_{n} is not defined")
    return sequence(family, n, x)[n]


def chebyshev_identity_check(n: int, x: float) -> float:
    """Largest relative residual of the four Chebyshev representations of the
    auxiliary families at ``(n, x)``."""
    if n < 0:
        raise DomainError("n must be >= 0")
    h = x / 2.0
    T = evaluate(PolyFamily.ChebyT, n, h)
    Un = evaluate(PolyFamily.ChebyU, n, h)
    Um1 = evaluate(PolyFamily.ChebyU, n - 1, h)
    pairs = [
        (evaluate(PolyFamily.Neven, n, x), 2.0 * T),
        (evaluate(PolyFamily.Deven, n, x), (x + 2.0) * Um1),
        (evaluate(PolyFamily.Nodd, n, x), Un - Um1),
        (evaluate(PolyFamily.Dodd, n, x), Un + Um1),
    ]
    return max(abs(a - b) / max(1.0, abs(a)) for a, b in pairs)


def three_term_relation_check(n: int, x: float) -> float:
    """Relative residual of ``2 N_n - x N_{n+1} + (x-2) D_{n+1} = 0`` for both parities."""
    if n < 0:
        raise DomainError("n must be >= 0")
    worst = 0.0
    for Nf, Df in ((PolyFamily.Neven, PolyFamily.Deven), (PolyFamily.Nodd, PolyFamily.Dodd)):
        Ns = sequence(Nf, n + 1, x)
        D1 = evaluate(Df, n + 1, x)
        terms = (2.0 * Ns[n], x * Ns[n + 1], (x - 2.0) * D1)
        resid = abs(terms[0] - terms[1] + terms[2])
        worst = max(worst, resid / max(1.0, max(abs(t) for t in terms)))
    return worst


def taylor_at_two(family: PolyFamily, n: int) -> tuple[float, float, float]:
    """Second-order Taylor coefficients ``(c0, c1, c2)`` of an auxiliary family at ``x = 2``."""
    family = PolyFamily(family)
    if n < 0:
        raise DomainError("n must be >= 0")
    if family is PolyFamily.Neven:
        return 2.0, float(n**2), (n**4 - n**2) / 12
    if family is PolyFamily.Deven:
        return 4.0 * n, (2 * n**3 + n) / 3, (n**5 - n) / 30
    if family is PolyFamily.Nodd:
        return 1.0, (n**2 + n) / 2, (n**4 + 2 * n**3 - n**2 - 2 * n) / 24
    if family is PolyFamily.Dodd:
        return 2.0 * n + 1, (2 * n**3 + 3 * n**2 + n) / 6, (2 * n**5 + 5 * n**4 - 5 * n**2 - 2 * n) / 120
    raise DomainError(f"no expansion at x=2 is provided for {family.name}")


def ratio_table(num: PolyFamily, den: PolyFamily, n: int, x: float) -> list[float]:
    """``[num_m(x) / den_n(x) for m in 0..n]`` without forming the raw values.

    Uses the successive ratios ``q_m = p_m / p_{m-1}``, which obey
    ``q_{m+1} = x - 1/q_m`` and stay bounded, so this works for arguments and
    degrees where :func:`sequence` overflows. Requires ``x >= 2`` (all values
    positive) and ``n >= 1``.
    """
    if not x >= 2.0:
        raise DomainError("ratio path requires x >= 2")
    if n < 1:
        raise DomainError("ratio path requires n >= 1")
    n0, n1, _ = _initial(num, x)
    d0, d1, _ = _initial(den, x)
    # log of num_m for m = 0..n, relative to log(num_0)
    log_num = [math.log(n0)]
    q = n1 / n0
    log_num.append(log_num[0] + math.log(q))
    for _ in range(2, n + 1):
        q = x - 1.0 / q
        log_num.append(log_num[-1] + math.log(q))
    log_den = math.log(d1)
    qd = d1 / d0 if d0 != 0 else math.inf
    for _ in range(2, n + 1):
        qd = x - 1.0 / qd
        log_den += math.log(qd)
    return [math.exp(v - log_den) for v in log_num]
