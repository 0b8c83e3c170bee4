"""The numbered acceptance criteria at their stated tolerances.

Each test prints one PASS/FAIL line for its criterion, followed by any
informational reference lines, then asserts the criterion.
"""

import pytest

from annulus_rmt.verify import CRITERIA, run_suite

pytestmark = pytest.mark.acceptance


@pytest.mark.parametrize("number", [c.number for c in CRITERIA])
def test_criterion(number, capsys):
    (report,) = run_suite([str(number)])
    with capsys.disabled():
        print("\n" + report.summary_line())
        for c in report.checks:
            if c.informational:
                status = "ok" if c.passed else "off"
                print(f"      info {c.key}: {c.description} = {c.measured:.4g} (reference {c.tolerance:.3g}, {status})")
    failed = [c.key for c in report.checks if not c.informational and not c.passed]
    assert report.passed, f"criterion {number} failed checks: {failed}"
