import pytest

from cyclefv.verification import REGISTRY, check_ids, run_checks


def test_ids_unique_and_descriptive():
    ids = check_ids()
    assert len(ids) == len(set(ids))
    assert all("_" in i for i in ids)


def test_filtering_by_group_and_prefix():
    res = run_checks("spectrum")
    assert [r.check_id for r in res] == ["spectrum_closed_form"]
    res = run_checks(["rotation"])
    assert [r.check_id for r in res] == ["rotation_invariance"]
    with pytest.raises(KeyError):
        run_checks("nothing_like_this")


@pytest.mark.parametrize("group", ["spectrum", "covariance", "moments", "kolmogorov", "dynamics", "bounds", "conditioned"])
def test_negative_control(group):
    clean = run_checks(group)
    assert all(r.passed for r in clean)
    broken = run_checks(group, theta_offset=0.05)
    assert not all(r.passed for r in broken)


def test_json_shape():
    r = run_checks("chebyshev")[0].to_json()
    assert set(r) == {"check_id", "paper_ref", "residual", "threshold", "pass"} and r["pass"] is True
    assert set(REGISTRY) >= {"spectrum", "simulator"}


def test_nonreversible_floor_reports_weakest_instance():
    res = {r.check_id: r for r in run_checks("structure")}
    assert res["reversible_symmetric_triangle"].passed
    floor = res["nonreversible_residual_floor"]
    # the weakest violation sits at theta = 1, p = 0.1, where the chain is
    # close to independent symmetric walkers; it falls just below 1e-3
    assert "(5, 6, 1.0, 0.1)" in floor.paper_ref
    assert 0 < floor.residual < 2e-4 and not floor.passed
