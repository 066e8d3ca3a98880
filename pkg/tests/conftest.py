import numpy as np
import pytest

# the hand-traced grid used across fpsl / loss fixtures
TOY_GRID = np.array([[0.1, 0.7, 0.9, 0.4, 0.2],
                     [0.5, 0.3, 0.2, 0.8, 0.1]])


@pytest.fixture
def toy_grid():
    return TOY_GRID.copy()


def random_instances(n=1000, seed=2024):
    """Seeded (grid, weak, thresh, win_size) tuples with C in [1, 8] and T in [1, 50]."""
    rng = np.random.default_rng(seed)
    for _ in range(n):
        c = int(rng.integers(1, 9))
        t = int(rng.integers(1, 51))
        grid = rng.random((c, t))
        if rng.random() < 0.3:
            # coarse values force exact ties and threshold hits
            grid = np.round(grid, 1)
        weak = rng.integers(0, 2, size=c)
        thresh = float(rng.choice([0.3, 0.4, 0.5, 0.6, 0.7]))
        win = int(rng.integers(0, 9))
        yield grid, weak, thresh, win


# ---------------------------------------------------------------------------
# acceptance reporting: tests marked ``criterion(n, title)`` get one summary line
# ---------------------------------------------------------------------------

_CRITERIA: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call" and not (report.when == "setup" and report.failed):
        return
    number, title = marker.args
    detail = dict(item.user_properties).get("detail", "")
    if report.failed and report.when == "setup":
        detail = "setup failed"
    _CRITERIA[number] = ("PASS" if report.passed else "FAIL", title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        status, title, detail = _CRITERIA[number]
        terminalreporter.write_line(f"[{status}] criterion {number:>2} {title}: {detail}")
