import pytest

from mixdag.verify import SUITES, fixture_suite, marginal_mag_suite, run_all


def test_fixture_suite():
    r = fixture_suite()
    assert r.ok and r.violations == [] and r.line().startswith("[PASS]")


@pytest.mark.parametrize("name", [n for n in SUITES if n != "fixtures"])
def test_suites_small(name):
    r = SUITES[name](5)
    assert r.ok or not r.theorem_backed, r.violations[:3]
    assert r.instances >= 1


def test_injected_bug_is_caught():
    assert not marginal_mag_suite(40, seed=3, skip_replacement=True).ok


def test_run_all_report_shape():
    reports = run_all(scale=0.02)
    assert len(reports) == len(SUITES)
    d = reports[0].to_dict()
    assert {"name", "checked", "instances", "violations", "seconds"} <= set(d)
