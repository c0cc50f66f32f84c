import numpy as np
import pytest

from linklab import cli


@pytest.fixture(scope="session")
def preset_csvs(tmp_path_factory):
    """All figure presets written once per session: {name: rows}."""
    out = tmp_path_factory.mktemp("presets")
    rows = {}
    for name in sorted(cli.PRESETS):
        spec = cli.preset(name)
        curves = cli.run_sweep(spec)
        assert not curves.failures, curves.failures
        path = cli.emit_csv(curves, out / f"{name}.csv")
        rows[name] = cli.read_csv(path)
    return rows


def curve_from_rows(rows, method="closed", **match):
    sel = [r for r in rows if r["method"] == method
           and all(str(r[k]) == str(v) for k, v in match.items())]
    sel.sort(key=lambda r: r["gamma_avg_db"])
    return (np.array([r["gamma_avg_db"] for r in sel]),
            np.array([r["metric"] for r in sel]))


def ks_statistic(samples, cdf, n_grid=40001):
    """Two-sided KS distance between ``samples`` and a continuous ``cdf``.

    The CDF is evaluated on a log-spaced grid spanning the sample range and
    interpolated in between; the interpolation error is returned alongside
    so callers can confirm it is far below the critical value.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    grid = np.geomspace(x[0], x[-1], n_grid)
    fg = np.asarray(cdf(grid), dtype=float)
    mid = np.sqrt(grid[:-1] * grid[1:])
    interp_err = float(np.max(np.abs(np.interp(mid, grid, fg) - np.asarray(cdf(mid)))))
    f = np.interp(x, grid, fg)
    i = np.arange(1, n + 1)
    d = max(np.max(i / n - f), np.max(f - (i - 1) / n))
    return float(d), interp_err


# asymptotic Kolmogorov critical value at 1% significance
KS_C01 = 1.6276


_CRITERIA = []


@pytest.fixture
def criterion():
    """Record and print one PASS/FAIL line, then assert."""

    def report(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} {label}: {detail}"
        _CRITERIA.append(line)
        print(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
