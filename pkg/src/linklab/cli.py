"""Scenario configs, parameter sweeps, CSV output and the ``linklab`` command.

A config is a YAML mapping; see ``configs/example.yaml`` for an annotated
instance and the README for the full schema.  Scalars for ``regime``,
``relay`` and ``N`` may be replaced by lists, in which case one curve is
produced for every combination.
"""

from __future__ import annotations

import argparse
import csv
import enum
import math
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from . import analytic
from .analytic import MetricKind, Method, PerformancePoint
from .linkmodel import (
    AdaptiveGain,
    FixedGain,
    SystemConfig,
    make_config,
    regime_params,
)
from .mcsim import CombiningMode, McOptions, run_mc
from .quadrature import QuadratureError
from .specfun import MeijerGError

__all__ = [
    "ConfigError",
    "SweepVariable",
    "SweepSpec",
    "PerformanceCurve",
    "CurveSet",
    "parse_config",
    "emit_config",
    "run_sweep",
    "emit_csv",
    "read_csv",
    "level_crossing",
    "horizontal_gap",
    "PRESETS",
    "preset",
    "main",
]

CSV_HEADER = ["gamma_avg_db", "metric", "metric_kind", "method", "ci_half_width",
              "n_users", "regime", "relay"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(ValueError):
    """Invalid scenario document; ``line`` is 1-based when known."""

    def __init__(self, message, key=None, line=None):
        self.key, self.line = key, line
        where = ""
        if key is not None:
            where += f"key '{key}'"
        if line is not None:
            where += f"{', ' if where else ''}line {line}"
        super().__init__(f"{where}: {message}" if where else message)


class SweepVariable(str, enum.Enum):
    GAMMA_AVG_DB = "gamma_avg_db"
    N_USERS = "n_users"
    LAMBDA = "lambda"
    REGIME = "regime"


@dataclass(frozen=True)
class SweepSpec:
    """A validated sweep.

    ``regimes``, ``relays`` and ``n_users`` list the curve families; the
    sweep variable, when it is one of these, replaces the matching list.
    ``base`` is the scenario of the first family at ``gamma_avg_db``.
    """

    sweep_variable: SweepVariable
    values: tuple
    base: SystemConfig
    methods: tuple
    metric: MetricKind
    mc: McOptions
    regimes: tuple = ("moderate-gg",)
    relays: tuple = ("fixed",)
    n_users: tuple = (2,)
    gamma_avg_db: float = 30.0
    gamma_th_db: float = 10.0
    c: float = 1.0
    eta: float = 1.0
    trusted: bool = False
    name: str = "sweep"


@dataclass
class PerformanceCurve:
    method: Method
    metric_kind: MetricKind
    n_users: int
    regime: str
    relay: str
    points: list = field(default_factory=list)


@dataclass
class CurveSet:
    sweep_variable: SweepVariable
    curves: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    def find(self, **match):
        """Curves whose attributes equal every keyword given."""
        return [c for c in self.curves if all(getattr(c, k) == v for k, v in match.items())]


# -- config parsing -----------------------------------------------------------

_KEYS = {"name", "metric", "regime", "relay", "N", "C", "eta", "gamma_th_db",
         "gamma_avg_db", "sweep", "methods", "mc", "trusted"}
_REQUIRED = ("regime", "relay", "N")
_SWEEP_KEYS = {"variable", "values"}
_MC_KEYS = {"trials", "seed", "chunk_size", "combining", "workers"}
_METHOD_NAMES = {m.value: m for m in Method}
_DEFAULT_GRID = {"start": 0, "stop": 45, "step": 1}


def _line_map(text):
    """Map of dotted key paths to 1-based line numbers."""
    lines = {}

    def walk(node, path):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                key = f"{path}.{k.value}" if path else str(k.value)
                lines[key] = k.start_mark.line + 1
                walk(v, key)
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                lines[f"{path}[{i}]"] = v.start_mark.line + 1
                walk(v, f"{path}[{i}]")

    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError:
        return lines
    if root is not None:
        walk(root, "")
    return lines


class _Ctx:
    def __init__(self, lines):
        self.lines = lines

    def fail(self, key, msg):
        raise ConfigError(msg, key, self.lines.get(key))


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


def _number(ctx, key, v, *, positive=False, integer=False, lo=None):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        ctx.fail(key, f"expected a number, got {v!r}")
    if integer and (not isinstance(v, int) and not float(v).is_integer()):
        ctx.fail(key, f"expected an integer, got {v!r}")
    x = int(v) if integer else float(v)
    if not math.isfinite(x):
        ctx.fail(key, "value must be finite")
    if positive and x <= 0:
        ctx.fail(key, f"must be positive, got {v!r}")
    if lo is not None and x < lo:
        ctx.fail(key, f"must be >= {lo}, got {v!r}")
    return x


def _grid(ctx, key, v):
    if isinstance(v, dict):
        extra = set(v) - {"start", "stop", "step"}
        if extra:
            ctx.fail(f"{key}.{sorted(extra)[0]}", "unknown key")
        for k in ("start", "stop", "step"):
            if k not in v:
                ctx.fail(key, f"missing '{k}' in range")
        start = _number(ctx, f"{key}.start", v["start"])
        stop = _number(ctx, f"{key}.stop", v["stop"])
        step = _number(ctx, f"{key}.step", v["step"], positive=True)
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        if n < 1:
            ctx.fail(key, "empty range")
        return [round(start + i * step, 10) for i in range(n)]
    return v


def parse_config(text: str) -> SweepSpec:
    """Validate a YAML scenario document and apply defaults.

    Raises
    ------
    ConfigError
        Naming the offending key and its line for unknown keys, missing
        required keys and out-of-range values.
    """
    lines = _line_map(text)
    ctx = _Ctx(lines)
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"malformed YAML: {getattr(exc, 'problem', exc)}",
                          line=mark.line + 1 if mark else None) from None
    if not isinstance(doc, dict):
        raise ConfigError("document must be a mapping")
    for k in doc:
        if k not in _KEYS:
            ctx.fail(str(k), "unknown key")
    for k in _REQUIRED:
        if k not in doc:
            raise ConfigError("missing required key", k)

    metric = doc.get("metric", "outage")
    if metric not in ("outage", "ber"):
        ctx.fail("metric", "must be 'outage' or 'ber'")
    metric = MetricKind(metric)

    sweep = doc.get("sweep", {})
    if not isinstance(sweep, dict):
        ctx.fail("sweep", "must be a mapping")
    for k in sweep:
        if k not in _SWEEP_KEYS:
            ctx.fail(f"sweep.{k}", "unknown key")
    var = sweep.get("variable", "gamma_avg_db")
    try:
        var = SweepVariable(var)
    except ValueError:
        ctx.fail("sweep.variable", f"must be one of {[v.value for v in SweepVariable]}")
    if "values" in sweep:
        values = _grid(ctx, "sweep.values", sweep["values"])
    elif var is SweepVariable.GAMMA_AVG_DB:
        values = _grid(ctx, "sweep.values", _DEFAULT_GRID)
    else:
        ctx.fail("sweep", "'values' is required unless sweeping gamma_avg_db")
    values = _as_list(values)
    if not values:
        ctx.fail("sweep.values", "must not be empty")

    regimes = [str(r) for r in _as_list(doc["regime"])]
    relays = _as_list(doc["relay"])
    n_list = _as_list(doc["N"])
    for i, r in enumerate(regimes):
        key = "regime" if not isinstance(doc["regime"], list) else f"regime[{i}]"
        try:
            regime_params(r)
        except ValueError as exc:
            ctx.fail(key, str(exc))
    for i, r in enumerate(relays):
        if r not in ("fixed", "adaptive"):
            ctx.fail("relay" if not isinstance(doc["relay"], list) else f"relay[{i}]",
                     "must be 'fixed' or 'adaptive'")
    n_list = [_number(ctx, "N", n, integer=True, lo=1) for n in n_list]

    if var is SweepVariable.GAMMA_AVG_DB:
        values = [_number(ctx, "sweep.values", v) for v in values]
    elif var is SweepVariable.N_USERS:
        values = [_number(ctx, "sweep.values", v, integer=True, lo=1) for v in values]
        if isinstance(doc["N"], list):
            ctx.fail("N", "cannot be a list when sweeping n_users")
    elif var is SweepVariable.LAMBDA:
        values = [_number(ctx, "sweep.values", v, positive=True) for v in values]
        if isinstance(doc["regime"], list) or not regimes[0].startswith("negexp"):
            ctx.fail("regime", "a lambda sweep needs a single negexp regime")
    else:
        for v in values:
            try:
                regime_params(str(v))
            except ValueError as exc:
                ctx.fail("sweep.values", str(exc))
        values = [str(v) for v in values]
        if isinstance(doc["regime"], list):
            ctx.fail("regime", "cannot be a list when sweeping regime")
    if var is not SweepVariable.REGIME:
        if any(b <= a for a, b in zip(values, values[1:])):
            ctx.fail("sweep.values", "must be strictly increasing")
    elif len(set(values)) != len(values):
        ctx.fail("sweep.values", "must not repeat")

    c = _number(ctx, "C", doc.get("C", 1.0), positive=True)
    eta = _number(ctx, "eta", doc.get("eta", 1.0), positive=True)
    gth = _number(ctx, "gamma_th_db", doc.get("gamma_th_db", 10.0))
    gavg = _number(ctx, "gamma_avg_db", doc.get("gamma_avg_db", 30.0))

    methods = doc.get("methods", ["closed"])
    methods = _as_list(methods)
    if not methods:
        ctx.fail("methods", "must not be empty")
    out_methods = []
    for m in methods:
        if m not in _METHOD_NAMES:
            ctx.fail("methods", f"unknown method {m!r}; use closed, quad or mc")
        if _METHOD_NAMES[m] not in out_methods:
            out_methods.append(_METHOD_NAMES[m])

    mc = doc.get("mc", {}) or {}
    if not isinstance(mc, dict):
        ctx.fail("mc", "must be a mapping")
    for k in mc:
        if k not in _MC_KEYS:
            ctx.fail(f"mc.{k}", "unknown key")
    combining = mc.get("combining", "exact")
    if combining not in ("exact", "min"):
        ctx.fail("mc.combining", "must be 'exact' or 'min'")
    seed = _number(ctx, "mc.seed", mc.get("seed", 1), integer=True, lo=0)
    if seed >= 2**64:
        ctx.fail("mc.seed", "must fit in 64 unsigned bits")
    mc_opts = McOptions(
        trials=_number(ctx, "mc.trials", mc.get("trials", 100_000), integer=True, lo=1),
        master_seed=seed,
        chunk_size=_number(ctx, "mc.chunk_size", mc.get("chunk_size", 65536), integer=True, lo=1),
        combining_mode=CombiningMode(combining),
        workers=_number(ctx, "mc.workers", mc.get("workers", 1), integer=True, lo=1),
    )
    trusted = doc.get("trusted", False)
    if not isinstance(trusted, bool):
        ctx.fail("trusted", "must be true or false")
    name = str(doc.get("name", "sweep"))

    spec = SweepSpec(
        sweep_variable=var, values=tuple(values), base=None, methods=tuple(out_methods),
        metric=metric, mc=mc_opts, regimes=tuple(regimes), relays=tuple(relays),
        n_users=tuple(n_list), gamma_avg_db=gavg, gamma_th_db=gth, c=c, eta=eta,
        trusted=trusted, name=name)
    try:
        base = _scenario(spec, regimes[0], relays[0], n_list[0], gavg)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    return replace(spec, base=base)


def _scenario(spec: SweepSpec, regime, relay, n_users, gamma_avg_db) -> SystemConfig:
    rel = FixedGain(spec.c) if relay == "fixed" else AdaptiveGain()
    return make_config(regime, gamma_avg_db, n_users=n_users, relay=rel,
                       gamma_th_db=spec.gamma_th_db, eta=spec.eta)


def emit_config(spec: SweepSpec) -> str:
    """Canonical YAML for ``spec``; ``parse_config`` of the result equals ``spec``."""

    def one(t):
        return t[0] if len(t) == 1 else list(t)

    doc = {
        "name": spec.name,
        "metric": spec.metric.value,
        "regime": one(spec.regimes),
        "relay": one(spec.relays),
        "N": one(spec.n_users),
        "C": spec.c,
        "eta": spec.eta,
        "gamma_th_db": spec.gamma_th_db,
        "gamma_avg_db": spec.gamma_avg_db,
        "sweep": {"variable": spec.sweep_variable.value, "values": list(spec.values)},
        "methods": [m.value for m in spec.methods],
        "mc": {
            "trials": spec.mc.trials,
            "seed": spec.mc.master_seed,
            "chunk_size": spec.mc.chunk_size,
            "combining": spec.mc.combining_mode.value,
            "workers": spec.mc.workers,
        },
        "trusted": spec.trusted,
    }
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None)


# -- sweeps -------------------------------------------------------------------


def _families(spec: SweepSpec):
    var = spec.sweep_variable
    regimes = spec.regimes if var not in (SweepVariable.REGIME, SweepVariable.LAMBDA) else (None,)
    n_users = spec.n_users if var is not SweepVariable.N_USERS else (None,)
    for regime in regimes:
        for relay in spec.relays:
            for n in n_users:
                yield regime, relay, n


def _point_seed(master: int, fam: int, idx: int) -> int:
    ss = np.random.SeedSequence(entropy=master, spawn_key=(fam, idx))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _evaluate(cfg, method, metric, spec, fam, idx):
    if method is Method.CLOSED_FORM:
        f = analytic.outage_closed_form if metric is MetricKind.OUTAGE else analytic.ber_closed_form
        return f(cfg, trusted=spec.trusted), 0.0
    if method is Method.QUADRATURE:
        return analytic.quadrature_value(cfg, metric), 0.0
    opts = replace(spec.mc, master_seed=_point_seed(spec.mc.master_seed, fam, idx))
    out, ber = run_mc(cfg, opts)
    est = out if metric is MetricKind.OUTAGE else ber
    return est.estimate, est.ci_half_width


def run_sweep(spec: SweepSpec) -> CurveSet:
    """Evaluate every (method, curve family, sweep value) combination.

    Failing grid points are skipped and reported in ``CurveSet.failures``
    as ``(description, message)`` pairs; the sweep always runs to the end.
    """
    result = CurveSet(spec.sweep_variable)
    var = spec.sweep_variable
    for fam, (regime, relay, n) in enumerate(_families(spec)):
        for method in spec.methods:
            curve = None
            per_value = {}
            for idx, v in enumerate(spec.values):
                r, nn, gavg = regime, n, spec.gamma_avg_db
                if var is SweepVariable.GAMMA_AVG_DB:
                    gavg = v
                elif var is SweepVariable.N_USERS:
                    nn = v
                elif var is SweepVariable.LAMBDA:
                    r = f"negexp-l{v:g}"
                else:
                    r = v
                key = (r, nn)
                if key not in per_value:
                    per_value[key] = PerformanceCurve(method, spec.metric, nn, r, relay)
                    result.curves.append(per_value[key])
                curve = per_value[key]
                cfg = _scenario(spec, r, relay, nn, gavg)
                try:
                    val, ci = _evaluate(cfg, method, spec.metric, spec, fam, idx)
                    curve.points.append(PerformancePoint(float(gavg), val, spec.metric, method, ci))
                except (MeijerGError, QuadratureError, ArithmeticError, ValueError) as exc:
                    result.failures.append(
                        (f"{method.value} {r} {relay} N={nn} gamma_avg_db={gavg:g}", str(exc)))
    return result


# -- CSV ----------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x):.12g}"


def _rows(curves: CurveSet):
    rows = []
    for ci, c in enumerate(curves.curves):
        for p in c.points:
            rows.append((ci, p, c))
    var = curves.sweep_variable
    if var is SweepVariable.GAMMA_AVG_DB:
        rows.sort(key=lambda r: (r[1].gamma_avg_db, r[0]))
    elif var is SweepVariable.N_USERS:
        rows.sort(key=lambda r: (r[2].n_users, r[0]))
    # regime and lambda sweeps keep the configured value order
    return rows


def emit_csv(curves: CurveSet, destination) -> Path:
    """Write all curves to one CSV file with the fixed header."""
    path = Path(destination)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for _, p, c in _rows(curves):
                w.writerow([_fmt(p.gamma_avg_db), _fmt(p.metric), p.metric_kind.value,
                            p.method.value, _fmt(p.ci_half_width), _fmt(c.n_users),
                            c.regime, c.relay])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def read_csv(path):
    """Rows of a CSV written by ``emit_csv`` with numeric columns converted."""
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.DictReader(fh)
        if r.fieldnames != CSV_HEADER:
            raise ValueError(f"unexpected header {r.fieldnames}")
        for row in r:
            row["gamma_avg_db"] = float(row["gamma_avg_db"])
            row["metric"] = float(row["metric"])
            row["ci_half_width"] = float(row["ci_half_width"])
            row["n_users"] = int(row["n_users"])
            out.append(row)
    return out


# -- curve geometry -----------------------------------------------------------


def level_crossing(db, metric, level: float) -> float:
    """SNR (dB) at which a decreasing curve reaches ``level``.

    Interpolation is piecewise linear in (dB, log10 metric).  Raises
    ``ValueError`` when the level is not bracketed.
    """
    db = np.asarray(db, dtype=float)
    lm = np.log10(np.maximum(np.asarray(metric, dtype=float), 1e-300))
    target = math.log10(level)
    for i in range(len(db) - 1):
        a, b = lm[i], lm[i + 1]
        if (a - target) * (b - target) <= 0 and a != b:
            return float(db[i] + (target - a) / (b - a) * (db[i + 1] - db[i]))
        if a == target:
            return float(db[i])
    raise ValueError(f"level {level:g} not reached on the curve")


def horizontal_gap(db_a, metric_a, db_b, metric_b, level: float) -> float:
    """``x_b - x_a`` where each curve crosses ``level``."""
    return level_crossing(db_b, metric_b, level) - level_crossing(db_a, metric_a, level)


# -- presets ------------------------------------------------------------------

_GRID = {"start": 0, "stop": 45, "step": 1}


def _preset_doc(**kw):
    doc = {"gamma_th_db": 10, "C": 1, "eta": 1, "methods": ["closed", "quad"],
           "sweep": {"variable": "gamma_avg_db", "values": _GRID},
           "mc": {"trials": 100_000, "seed": 1}}
    doc.update(kw)
    return doc


PRESETS = {
    "fig2": _preset_doc(name="fig2", metric="outage", regime=["moderate-gg", "strong-gg"],
                        relay=["fixed", "adaptive"], N=2),
    "fig3": _preset_doc(name="fig3", metric="outage", regime="moderate-gg",
                        relay=["fixed", "adaptive"], N=[1, 2, 3, 4]),
    "fig4": _preset_doc(name="fig4", metric="outage",
                        regime=["negexp-l1", "negexp-l3", "negexp-l5"],
                        relay=["fixed", "adaptive"], N=2),
    "fig5": _preset_doc(name="fig5", metric="outage", regime="negexp-l1",
                        relay=["fixed", "adaptive"], N=[1, 2, 3, 4]),
    "fig6": _preset_doc(name="fig6", metric="ber", regime=["moderate-gg", "strong-gg"],
                        relay=["fixed", "adaptive"], N=2),
    "fig7": _preset_doc(name="fig7", metric="ber",
                        regime=["negexp-l1", "negexp-l3", "negexp-l5"],
                        relay=["fixed", "adaptive"], N=2),
    "fig8": _preset_doc(name="fig8", metric="ber", regime="negexp-l1",
                        relay=["fixed", "adaptive"], N=[1, 2, 3, 4]),
}


def preset(name: str, **overrides) -> SweepSpec:
    """Built-in figure sweep; ``overrides`` replace top-level config keys."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    doc = dict(PRESETS[name])
    doc.update(overrides)
    return parse_config(yaml.safe_dump(doc, sort_keys=False))


# -- command line -------------------------------------------------------------


def _apply_cli(spec: SweepSpec, args) -> SweepSpec:
    kw = {}
    if getattr(args, "methods", None):
        names = [m.strip() for m in args.methods.split(",") if m.strip()]
        bad = [m for m in names if m not in _METHOD_NAMES]
        if bad or not names:
            raise ConfigError(f"unknown method {bad[0] if bad else ''!r}", "--methods")
        kw["methods"] = tuple(dict.fromkeys(_METHOD_NAMES[m] for m in names))
    mc = spec.mc
    if getattr(args, "trials", None) is not None:
        mc = replace(mc, trials=args.trials)
    if getattr(args, "seed", None) is not None:
        mc = replace(mc, master_seed=args.seed)
    if getattr(args, "workers", None) is not None:
        mc = replace(mc, workers=args.workers)
    kw["mc"] = mc
    if getattr(args, "trusted", False):
        kw["trusted"] = True
    return replace(spec, **kw)


def _run_and_write(spec: SweepSpec, out_dir, stdout) -> int:
    curves = run_sweep(spec)
    path = emit_csv(curves, Path(out_dir) / f"{spec.name}.csv")
    print(f"wrote {path} ({sum(len(c.points) for c in curves.curves)} rows)", file=stdout)
    for where, msg in curves.failures:
        print(f"failed: {where}: {msg}", file=sys.stderr)
    return EXIT_NUMERIC if curves.failures else EXIT_OK


def _reference_configs():
    for regime in ("moderate-gg", "strong-gg", "negexp-l1"):
        for relay in (FixedGain(), AdaptiveGain()):
            for db in (10.0, 30.0):
                yield make_config(regime, db, relay=relay)


def _build_parser():
    p = argparse.ArgumentParser(prog="linklab", description=(
        "Outage and DPSK BER of a dual-hop multiuser RF / FSO relay link."))
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", default=".", help="output directory (default: .)")
        sp.add_argument("--methods", help="comma-separated subset of closed,quad,mc")
        sp.add_argument("--trials", type=int, help="Monte Carlo trials per point")
        sp.add_argument("--seed", type=int, help="Monte Carlo master seed")
        sp.add_argument("--workers", type=int, help="Monte Carlo worker processes")
        sp.add_argument("--trusted", action="store_true",
                        help="replace closed forms that disagree with quadrature")

    r = sub.add_parser("run", help="run a sweep from a YAML config")
    r.add_argument("config")
    common(r)
    pr = sub.add_parser("preset", help="run a built-in figure sweep")
    pr.add_argument("name", choices=sorted(PRESETS))
    pr.add_argument("--print-config", action="store_true",
                    help="print the canonical config and exit")
    common(pr)
    e = sub.add_parser("errata", help="print the errata log")
    e.add_argument("--log", help="log path (default: $LINKLAB_ERRATA_LOG or ./errata.log)")
    e.add_argument("--refresh", action="store_true",
                   help="re-run the printed-expression audit before printing")
    return p


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            try:
                text = Path(args.config).read_text(encoding="utf-8")
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from None
            spec = _apply_cli(parse_config(text), args)
            return _run_and_write(spec, args.out, stdout)
        if args.command == "preset":
            spec = _apply_cli(preset(args.name), args)
            if args.print_config:
                stdout.write(emit_config(spec))
                return EXIT_OK
            return _run_and_write(spec, args.out, stdout)
        log = Path(args.log) if args.log else Path(os.environ.get("LINKLAB_ERRATA_LOG", "errata.log"))
        if args.refresh or not log.exists():
            analytic.errata_audit(list(_reference_configs()), log_path=log)
        stdout.write(log.read_text(encoding="utf-8"))
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
