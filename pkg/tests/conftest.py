import numpy as np
import pytest

from greenvar.geometry import ConformalImage, UnitDisk
from greenvar.green import make_kernel


@pytest.fixture(scope="session")
def disk():
    return UnitDisk()


@pytest.fixture(scope="session")
def disk_kernel(disk):
    return make_kernel(disk)


@pytest.fixture(scope="session")
def lima():
    # phi(w) = w + 0.1 w^2
    return ConformalImage([1.0, 0.1])


@pytest.fixture(scope="session")
def lima_kernel(lima):
    return make_kernel(lima)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def ones(z):
    return np.ones(np.shape(z))


_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record one acceptance criterion: print a PASS/FAIL line, then assert every check.

    ``checks`` is a list of ``(description, ok, detail)`` triples.
    """
    def report(number, title, checks):
        ok = all(bool(c[1]) for c in checks)
        lines = [f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {title}"]
        lines += [f"    [{'ok' if good else 'FAILED'}] {desc}: {detail}" for desc, good, detail in checks]
        _CRITERIA[number] = lines
        print("\n".join(lines))
        failed = [f"{desc}: {detail}" for desc, good, detail in checks if not good]
        assert ok, "; ".join(failed)
    return report


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        for line in _CRITERIA[number]:
            terminalreporter.write_line(line)
    passed = sum(lines[0].split(":")[1].strip().startswith("PASS") for lines in _CRITERIA.values())
    terminalreporter.write_line(f"{passed}/{len(_CRITERIA)} criteria passed")
