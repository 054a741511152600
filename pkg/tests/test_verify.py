import pytest

from quasargen import verify


def test_default_battery_is_green():
    results = verify.run_battery("default")
    assert len(results) == 11
    failed = [r.name for r in results if not r.passed]
    assert failed == []
    assert len({r.name for r in results}) == 11
    for r in results:
        assert r.detail


def test_perturbed_correlation_fails():
    # the canary: breaking one side of the identity must turn the check red
    results = {r.name: r for r in verify.run_battery("default",
                                                     perturb_correlation=1e-4)}
    assert not results["correlation-identity"].passed
    assert results["gradient-vs-fd"].passed


def test_unknown_level_rejected():
    with pytest.raises(ValueError):
        verify.run_battery("paranoid")
