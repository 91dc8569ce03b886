import numpy as np
import pytest
from scipy.linalg import expm

from cyclefv.circulant import build_Q
from cyclefv.conditioned import ConditionedLawQuery, conditioned_law, l2_sandwich, qsd, tv_distance, tv_sandwich
from cyclefv.errors import DomainError
from cyclefv.model import ModelParams, dirac


def test_conditioned_law_is_unkilled_walk():
    pr = ModelParams(5, 2.0, 3.0)
    got = conditioned_law(pr, dirac(5, 0), 0.8)
    np.testing.assert_allclose(got, (dirac(5, 0) @ expm(0.8 * build_Q(pr).dense())), atol=1e-13)
    # the killing rate does not enter
    np.testing.assert_allclose(got, conditioned_law(pr.with_p(0.01), dirac(5, 0), 0.8), atol=1e-15)


def test_qsd_is_fixed_point():
    pr = ModelParams(7, 0.5, 1.0)
    np.testing.assert_allclose(conditioned_law(pr, qsd(pr), 3.0), qsd(pr), atol=1e-14)


def test_query_validation():
    with pytest.raises(ValueError):
        ConditionedLawQuery(ModelParams(3, 1, 1), dirac(3, 0), -1)
    with pytest.raises(DomainError):
        conditioned_law(ModelParams(3, 1, 1), [0.5, 0.5, 0.5], 1.0)


def test_sandwiches():
    pr = ModelParams(6, 1.5, 1.0)
    rng = np.random.default_rng(3)
    for _ in range(20):
        nu, mu = rng.dirichlet(np.ones(6)), rng.dirichlet(np.ones(6))
        for t in (0.0, 0.5, 2.0):
            lo, mid, hi = l2_sandwich(pr, nu, mu, t)
            assert lo - 1e-12 <= mid <= hi + 1e-12
            lo, mid, hi = tv_sandwich(pr, nu, mu, t)
            assert lo - 1e-12 <= mid <= hi + 1e-12
    assert tv_distance(dirac(3, 0), dirac(3, 1)) == 1.0
