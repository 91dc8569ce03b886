import math

import numpy as np
import pytest

from cyclefv import chebyshev
from cyclefv.chebyshev import AUXILIARY, PolyFamily, evaluate, ratio_table, sequence, taylor_at_two
from cyclefv.errors import DomainError


def test_chebyshev_closed_forms():
    for x in (-0.9, 0.2, 0.7):
        th = math.acos(x)
        for n in range(12):
            assert evaluate(PolyFamily.ChebyT, n, x) == pytest.approx(math.cos(n * th), abs=1e-12)
            assert evaluate(PolyFamily.ChebyU, n, x) == pytest.approx(math.sin((n + 1) * th) / math.sin(th), abs=1e-11)
    assert evaluate(PolyFamily.ChebyU, -1, 0.3) == 0.0
    with pytest.raises(DomainError):
        evaluate(PolyFamily.ChebyT, -1, 0.3)


def test_auxiliary_small_values():
    x = 3.0
    assert sequence(PolyFamily.Neven, 2, x) == [2, 3, 7]
    assert sequence(PolyFamily.Deven, 2, x) == [0, 5, 15]
    assert sequence(PolyFamily.Nodd, 2, x) == [1, 2, 5]
    assert sequence(PolyFamily.Dodd, 2, x) == [1, 4, 11]


@pytest.mark.parametrize("n", range(0, 25, 3))
@pytest.mark.parametrize("x", [2.0, 2.3, 5.0, -1.2])
def test_identities(n, x):
    assert chebyshev.chebyshev_identity_check(n, x) < 1e-10
    assert chebyshev.three_term_relation_check(n, x) < 1e-10


@pytest.mark.parametrize("family", AUXILIARY)
def test_taylor_at_two_by_finite_differences(family):
    h = 1e-3
    for n in range(0, 9):
        f = [evaluate(family, n, 2.0 + k * h) for k in (-2, -1, 0, 1, 2)]
        d1 = (f[3] - f[1]) / (2 * h)
        d2 = (f[3] - 2 * f[2] + f[1]) / h**2
        c0, c1, c2 = taylor_at_two(family, n)
        assert c0 == pytest.approx(f[2], abs=1e-12)
        assert c1 == pytest.approx(d1, rel=1e-4, abs=1e-6)
        assert 2 * c2 == pytest.approx(d2, rel=1e-3, abs=1e-4)
    with pytest.raises(DomainError):
        taylor_at_two(PolyFamily.ChebyT, 3)


def test_ratio_table_agrees_and_survives_overflow():
    x = 2.7
    direct = [v / evaluate(PolyFamily.Deven, 20, x) for v in sequence(PolyFamily.Neven, 20, x)]
    np.testing.assert_allclose(ratio_table(PolyFamily.Neven, PolyFamily.Deven, 20, x), direct, rtol=1e-12)
    with pytest.raises(OverflowError):
        sequence(PolyFamily.Nodd, 2000, 3.0)
    r = ratio_table(PolyFamily.Nodd, PolyFamily.Dodd, 2000, 3.0)
    assert all(np.isfinite(r)) and r[-1] < 1
    with pytest.raises(DomainError):
        ratio_table(PolyFamily.Nodd, PolyFamily.Dodd, 5, 1.5)
