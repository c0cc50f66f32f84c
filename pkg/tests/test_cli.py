import io
import math
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linklab import analytic as A
from linklab import cli
from linklab.analytic import MetricKind, Method
from linklab.cli import ConfigError, CurveSet, SweepVariable, emit_config, parse_config
from linklab.linkmodel import FixedGain, make_config

MINIMAL = "regime: moderate-gg\nrelay: fixed\nN: 2\n"
EXAMPLE = Path(__file__).resolve().parents[1] / "configs" / "example.yaml"


class TestParse:
    def test_minimal_defaults(self):
        spec = parse_config(MINIMAL)
        assert spec.c == 1.0 and spec.eta == 1.0 and spec.gamma_th_db == 10.0
        assert spec.base.relay == FixedGain(1.0)
        assert spec.base.gamma_th == pytest.approx(10.0)
        assert spec.base.eta == 1.0
        assert spec.sweep_variable is SweepVariable.GAMMA_AVG_DB
        assert spec.values == tuple(float(v) for v in range(46))
        assert spec.methods == (Method.CLOSED_FORM,)
        assert spec.metric is MetricKind.OUTAGE

    def test_zero_users(self):
        with pytest.raises(ConfigError) as ei:
            parse_config("regime: moderate-gg\nrelay: fixed\nN: 0\n")
        assert ei.value.key == "N" and ei.value.line == 3

    def test_unknown_key_names_line(self):
        with pytest.raises(ConfigError) as ei:
            parse_config(MINIMAL + "colour: blue\n")
        assert ei.value.key == "colour" and ei.value.line == 4
        assert "line 4" in str(ei.value)

    def test_nested_unknown_key(self):
        with pytest.raises(ConfigError) as ei:
            parse_config(MINIMAL + "mc:\n  trials: 10\n  sed: 3\n")
        assert ei.value.key == "mc.sed" and ei.value.line == 6

    def test_missing_required(self):
        with pytest.raises(ConfigError) as ei:
            parse_config("regime: moderate-gg\nN: 2\n")
        assert ei.value.key == "relay"

    @pytest.mark.parametrize("extra,key", [
        ("C: -1\n", "C"),
        ("metric: snr\n", "metric"),
        ("methods: [closed, guess]\n", "methods"),
        ("sweep:\n  values: [10, 5]\n", "sweep.values"),
        ("mc:\n  trials: 0\n", "mc.trials"),
        ("trusted: maybe\n", "trusted"),
    ])
    def test_out_of_range(self, extra, key):
        with pytest.raises(ConfigError) as ei:
            parse_config(MINIMAL + extra)
        assert ei.value.key == key and ei.value.line is not None

    def test_bad_regime(self):
        with pytest.raises(ConfigError) as ei:
            parse_config("regime: weak\nrelay: fixed\nN: 2\n")
        assert ei.value.key == "regime" and ei.value.line == 1

    def test_malformed(self):
        with pytest.raises(ConfigError):
            parse_config("regime: [unclosed\n")

    def test_example_file(self):
        spec = parse_config(EXAMPLE.read_text())
        assert parse_config(emit_config(spec)) == spec

    @pytest.mark.parametrize("name", sorted(cli.PRESETS))
    def test_round_trip_presets(self, name):
        spec = cli.preset(name)
        assert parse_config(emit_config(spec)) == spec
        assert emit_config(parse_config(emit_config(spec))) == emit_config(spec)


_regimes = st.sampled_from(["moderate-gg", "strong-gg", "negexp-l1", "negexp-l2.5"])


@settings(max_examples=60, deadline=None)
@given(regimes=st.lists(_regimes, min_size=1, max_size=3, unique=True),
       relays=st.lists(st.sampled_from(["fixed", "adaptive"]), min_size=1, max_size=2, unique=True),
       n=st.lists(st.integers(1, 12), min_size=1, max_size=3, unique=True),
       c=st.floats(0.1, 10.0), gth=st.floats(-10.0, 20.0),
       grid=st.lists(st.integers(-20, 60), min_size=1, max_size=6, unique=True),
       seed=st.integers(0, 2**64 - 1), metric=st.sampled_from(["outage", "ber"]),
       methods=st.lists(st.sampled_from(["closed", "quad", "mc"]), min_size=1, max_size=3,
                        unique=True))
def test_round_trip_property(regimes, relays, n, c, gth, grid, seed, metric, methods):
    doc = {"regime": regimes, "relay": relays, "N": n, "C": c, "gamma_th_db": gth,
           "metric": metric, "methods": methods, "sweep": {"values": sorted(grid)},
           "mc": {"seed": seed}}
    import yaml
    spec = parse_config(yaml.safe_dump(doc))
    assert parse_config(emit_config(spec)) == spec


class TestSweep:
    def test_single_point_equals_direct_call(self):
        spec = parse_config(MINIMAL + "sweep:\n  values: [25]\nmethods: [closed, quad]\n")
        curves = cli.run_sweep(spec)
        cfg = make_config("moderate-gg", 25.0)
        closed = curves.find(method=Method.CLOSED_FORM)[0]
        quad = curves.find(method=Method.QUADRATURE)[0]
        assert len(closed.points) == 1 and len(quad.points) == 1
        assert closed.points[0].metric == A.outage_fixed_gg(cfg)
        assert quad.points[0].metric == A.outage_quadrature(cfg)

    def test_fig2_shape(self):
        spec = cli.preset("fig2", sweep={"values": [0, 20, 40]})
        curves = cli.run_sweep(spec)
        assert len(curves.curves) == 4 * len(spec.methods)
        assert {(c.regime, c.relay) for c in curves.curves} == {
            (r, s) for r in ("moderate-gg", "strong-gg") for s in ("fixed", "adaptive")}

    def test_fig5_user_ordering(self):
        spec = cli.preset("fig5", relay="fixed", methods=["closed"],
                          sweep={"values": [10, 20, 30, 40]})
        curves = cli.run_sweep(spec)
        vals = np.array([[p.metric for p in curves.find(n_users=n)[0].points] for n in (1, 2, 4)])
        assert np.all(np.diff(vals, axis=0) < 0)

    def test_user_and_lambda_sweeps(self):
        s = parse_config("regime: negexp-l1\nrelay: fixed\nN: 1\ngamma_avg_db: 20\n"
                         "sweep:\n  variable: n_users\n  values: [1, 2, 3]\n")
        c = cli.run_sweep(s)
        assert [cv.n_users for cv in c.curves] == [1, 2, 3]
        s = parse_config("regime: negexp-l1\nrelay: adaptive\nN: 2\ngamma_avg_db: 20\n"
                         "sweep:\n  variable: lambda\n  values: [1, 2]\n")
        c = cli.run_sweep(s)
        assert [cv.regime for cv in c.curves] == ["negexp-l1", "negexp-l2"]

    def test_failures_are_reported_and_sweep_continues(self, monkeypatch):
        real = A.outage_fixed_gg

        def flaky(cfg, trusted=False):
            if cfg.rf.mean_snr > 50:
                raise ArithmeticError("synthetic failure")
            return real(cfg, trusted=trusted)

        monkeypatch.setattr(A, "outage_fixed_gg", flaky)
        spec = parse_config(MINIMAL + "sweep:\n  values: [0, 10, 20, 30]\n")
        curves = cli.run_sweep(spec)
        assert len(curves.curves[0].points) == 2
        assert len(curves.failures) == 2
        assert "gamma_avg_db=20" in curves.failures[0][0]

    def test_mc_points_are_deterministic(self):
        spec = parse_config(MINIMAL + "methods: [mc]\nsweep:\n  values: [10, 20]\n"
                            "mc:\n  trials: 5000\n  seed: 4\n")
        a = cli.run_sweep(spec)
        b = cli.run_sweep(replace(spec, mc=replace(spec.mc, workers=3, chunk_size=spec.mc.chunk_size)))
        assert [p.metric for p in a.curves[0].points] == [p.metric for p in b.curves[0].points]
        assert all(p.ci_half_width > 0 for p in a.curves[0].points)


class TestCsv:
    def test_empty(self, tmp_path):
        path = cli.emit_csv(CurveSet(SweepVariable.GAMMA_AVG_DB), tmp_path / "e.csv")
        assert path.read_text() == ",".join(cli.CSV_HEADER) + "\n"

    def test_round_trip_bit_exact(self, tmp_path):
        curves = cli.run_sweep(cli.preset("fig4", methods=["closed"]))
        rows = cli.read_csv(cli.emit_csv(curves, tmp_path / "fig4.csv"))
        mem = sorted(((p.gamma_avg_db, c.regime, c.relay, float(f"{p.metric:.12g}"))
                      for c in curves.curves for p in c.points))
        disk = sorted((r["gamma_avg_db"], r["regime"], r["relay"], r["metric"]) for r in rows)
        assert mem == disk
        again = cli.emit_csv(curves, tmp_path / "again.csv")
        assert again.read_bytes() == (tmp_path / "fig4.csv").read_bytes()

    def test_sorted_by_sweep_variable(self, tmp_path):
        curves = cli.run_sweep(cli.preset("fig2", methods=["closed"], sweep={"values": [0, 5, 10]}))
        rows = cli.read_csv(cli.emit_csv(curves, tmp_path / "s.csv"))
        xs = [r["gamma_avg_db"] for r in rows]
        assert xs == sorted(xs)

    def test_twelve_significant_digits(self, tmp_path):
        curves = cli.run_sweep(parse_config(MINIMAL + "sweep:\n  values: [17]\n"))
        line = (cli.emit_csv(curves, tmp_path / "d.csv")).read_text().splitlines()[1]
        metric = line.split(",")[1]
        assert len(metric.replace(".", "").lstrip("0").split("e")[0]) <= 12

    def test_unwritable(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(OSError, match="file"):
            cli.emit_csv(CurveSet(SweepVariable.GAMMA_AVG_DB), blocker / "sub" / "out.csv")


class TestGeometry:
    def test_level_crossing_log_interpolation(self):
        db = np.array([0.0, 10.0])
        m = np.array([1e-1, 1e-3])
        assert cli.level_crossing(db, m, 1e-2) == pytest.approx(5.0)

    def test_gap(self):
        db = np.arange(0.0, 30.0, 1.0)
        a = 10 ** (-db / 10)
        b = 10 ** (-(db - 3) / 10)
        assert cli.horizontal_gap(db, a, db, b, 1e-2) == pytest.approx(3.0)

    def test_unreached(self):
        with pytest.raises(ValueError):
            cli.level_crossing([0, 1], [0.5, 0.4], 1e-3)


class TestMain:
    def _run(self, argv):
        out = io.StringIO()
        rc = cli.main(argv, stdout=out)
        return rc, out.getvalue()

    def test_run_ok(self, tmp_path):
        cfg = tmp_path / "c.yaml"
        cfg.write_text("name: small\n" + MINIMAL + "sweep:\n  values: [10, 20]\n")
        rc, out = self._run(["run", str(cfg), "--out", str(tmp_path), "--methods", "closed,quad"])
        assert rc == 0 and "small.csv" in out
        rows = cli.read_csv(tmp_path / "small.csv")
        assert len(rows) == 4

    def test_config_error_exit_code(self, tmp_path, capsys):
        cfg = tmp_path / "bad.yaml"
        cfg.write_text("regime: moderate-gg\nrelay: fixed\nN: 0\n")
        rc, _ = self._run(["run", str(cfg), "--out", str(tmp_path)])
        assert rc == 2
        assert "line 3" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        rc, _ = self._run(["run", str(tmp_path / "nope.yaml")])
        assert rc == 2

    def test_bad_methods_flag(self, tmp_path):
        cfg = tmp_path / "c.yaml"
        cfg.write_text(MINIMAL)
        rc, _ = self._run(["run", str(cfg), "--methods", "closed,magic"])
        assert rc == 2

    def test_numeric_failure_exit_code(self, tmp_path, monkeypatch):
        def boom(cfg, trusted=False):
            raise ArithmeticError("synthetic")

        monkeypatch.setattr(A, "outage_fixed_gg", boom)
        cfg = tmp_path / "c.yaml"
        cfg.write_text("name: part\n" + MINIMAL + "sweep:\n  values: [10]\n"
                       "methods: [closed, quad]\n")
        rc, _ = self._run(["run", str(cfg), "--out", str(tmp_path)])
        assert rc == 3
        assert len(cli.read_csv(tmp_path / "part.csv")) == 1

    def test_preset_print_config(self):
        rc, out = self._run(["preset", "fig3", "--print-config"])
        assert rc == 0
        assert parse_config(out) == cli.preset("fig3")

    def test_preset_flags(self):
        rc, out = self._run(["preset", "fig2", "--methods", "mc", "--trials", "500",
                             "--seed", "9", "--print-config"])
        spec = parse_config(out)
        assert rc == 0 and spec.methods == (Method.MONTE_CARLO,)
        assert spec.mc.trials == 500 and spec.mc.master_seed == 9

    def test_errata_command(self, tmp_path):
        log = tmp_path / "errata.log"
        rc, out = self._run(["errata", "--log", str(log)])
        assert rc == 0 and log.exists()
        assert out == log.read_text()
        assert "outage-fixed-gg" in out and "rytov-alpha" in out
        rc, out2 = self._run(["errata", "--log", str(log)])
        assert out2 == out


@pytest.mark.parametrize("name", sorted(cli.PRESETS))
def test_presets_run_end_to_end(preset_csvs, name):
    rows = preset_csvs[name]
    spec = cli.preset(name)
    assert len(rows) > 0
    assert all(0.0 <= r["metric"] <= 1.0 for r in rows)
    assert {r["method"] for r in rows} == {m.value for m in spec.methods}
