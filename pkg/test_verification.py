"""Tests for the seeded property sweep"""

from hypothesis import given, settings
from hypothesis import strategies as st

from verification import CheckTally, SweepReport, run_property_sweep

CHECKS = {'oracle-equivalence', 'norm-bound', 'accretivity-witness', 'resolvent-decay',
          'norm-distance-duality', 'angular-triangle'}


@settings(max_examples=5, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2 ** 31 - 1))
def test_small_sweep_passes(seed):
    report = run_property_sweep(seed, 4, max_dim=8)
    assert report.passed, report.failures
    assert set(report.tallies) == CHECKS
    assert report.tallies['oracle-equivalence'].checked == 4
    assert report.tallies['oracle-equivalence'].worst <= 1e-6


def test_sweep_is_deterministic():
    first = run_property_sweep(11, 3, max_dim=6).to_dict()
    second = run_property_sweep(11, 3, max_dim=6).to_dict()
    assert first == second
    assert first['seed'] == 11 and first['count'] == 3


def test_progress_callback():
    seen = []
    run_property_sweep(5, 3, max_dim=6, progress=seen.append)
    assert seen == [0, 1, 2]


def test_report_records_failures():
    report = SweepReport(seed=0, count=1)
    report.tally('norm-bound').checked += 1
    report.fail('norm-bound', "too large")
    assert not report.passed
    data = report.to_dict()
    assert data['pass'] is False
    assert data['checks']['norm-bound'] == {'checked': 1, 'skipped': 0, 'violations': 1, 'worst': 0.0}
    assert data['failures'] == [{'module': 'verification', 'invariant': 'norm-bound', 'message': 'too large'}]


def test_failure_list_is_capped():
    report = SweepReport(seed=0, count=50)
    for k in range(30):
        report.fail('angular-triangle', f"case {k}")
    assert len(report.failures) == 20
    assert report.tallies['angular-triangle'].violations == 30


def test_tally_defaults():
    assert CheckTally().to_dict() == {'checked': 0, 'skipped': 0, 'violations': 0, 'worst': 0.0}
