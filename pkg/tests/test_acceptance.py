"""Full verification gate: every named criterion must pass.

The criteria live in spanprog.acceptance so that the test suite and the
``spanprog verify all`` command run the identical checks.
"""
import pytest

from spanprog import acceptance


@pytest.mark.parametrize("name", sorted(acceptance.CRITERIA))
def test_criterion(name):
    acceptance.CRITERIA[name]()


def test_registry_is_complete():
    assert len(acceptance.CRITERIA) == 12


def test_run_all_reports_per_criterion():
    results = acceptance.run_all(["witness-duality"])
    assert set(results) == {"witness-duality"}
    assert results["witness-duality"] is None
