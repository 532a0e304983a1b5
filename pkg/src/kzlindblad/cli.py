"""Command-line batch runner.

    kzlindblad quench      --config run.json --out results/
    kzlindblad sweep       --config sweep.json --out results/ --workers 4
    kzlindblad liouvillian --config spectrum.json --out results/
    kzlindblad validate    fast --out results/

A run configuration is one JSON document; command-line flags override its
top-level fields.  Every command writes ``<name>.csv`` (or a report) plus
``<name>.manifest.json`` listing the emitted files with SHA-256 checksums.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import platform
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, analytic, liouvillian, validation
from .errors import ConfigError, KZLindbladError, PreconditionError, SingularPointError, StiffnessError
from .lindblad import DissipationConfig, IntegratorConfig, default_workers
from .models import Haldane, QuenchProtocol, RiceMele, Shockley, bloch_vector, bz_grid
from .observables import COLUMNS, run_quench, sweep
from .scaling import powerlaw_fit

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_VALIDATION = 0, 2, 3, 4

MODELS = {"rice_mele": RiceMele, "shockley": Shockley, "haldane": Haldane}


@dataclass
class RunConfig:
    name: str
    model: object
    protocol: QuenchProtocol | None
    dissipation: DissipationConfig
    grid: int | None
    integrator: IntegratorConfig
    variant: str = "full"
    initial: str = "exact_ground_state"
    basis: str = "final"
    sweep: list = field(default_factory=list)
    fit_observables: list = field(default_factory=lambda: ["N_total"])
    fit_window: tuple | None = None
    out: Path = Path(".")
    workers: int = 1
    raw: dict = field(default_factory=dict)


def _num(section: dict, key: str, where: str, default=None, positive=False):
    if key not in section:
        if default is None:
            raise ConfigError("missing required field", f"{where}.{key}")
        return default
    val = section[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
        raise ConfigError(f"expected a finite number, got {val!r}", f"{where}.{key}")
    if positive and val <= 0:
        raise ConfigError(f"must be positive, got {val}", f"{where}.{key}")
    return float(val)


def _parse_model(raw) -> object:
    if not isinstance(raw, dict) or "type" not in raw:
        raise ConfigError("expected an object with a 'type' field", "model")
    kind = raw["type"]
    if kind not in MODELS:
        raise ConfigError(f"unknown model {kind!r}; choose from {sorted(MODELS)}", "model.type")
    cls = MODELS[kind]
    params = {k: _num(raw, k, "model") for k in raw if k != "type"}
    try:
        return cls(**params)
    except TypeError as exc:
        raise ConfigError(str(exc), "model") from None
    except KZLindbladError as exc:
        raise ConfigError(str(exc), "model") from None


def _parse_dissipation(raw) -> DissipationConfig:
    raw = raw or {}
    if not isinstance(raw, dict):
        raise ConfigError("expected an object", "dissipation")
    if "gamma" in raw or "delta" in raw:
        g = _num(raw, "gamma", "dissipation")
        dl = _num(raw, "delta", "dissipation", default=0.0)
        if g < 0:
            raise ConfigError(f"must be >= 0, got {g}", "dissipation.gamma")
        if abs(dl) > g:
            raise ConfigError(f"|delta| = {abs(dl)} exceeds gamma = {g}", "dissipation.delta")
        return DissipationConfig((g + dl) / 2, (g - dl) / 2)
    ga = _num(raw, "gamma_a", "dissipation", default=0.0)
    gb = _num(raw, "gamma_b", "dissipation", default=0.0)
    for k, v in (("gamma_a", ga), ("gamma_b", gb)):
        if v < 0:
            raise ConfigError(f"must be >= 0, got {v}", f"dissipation.{k}")
    return DissipationConfig(ga, gb)


def _parse_integrator(raw) -> IntegratorConfig:
    raw = raw or {}
    base = IntegratorConfig()
    kw = {}
    for k in ("rtol", "atol", "max_step", "phase_step"):
        kw[k] = _num(raw, k, "integrator", default=getattr(base, k), positive=True)
    sc = raw.get("sample_count", base.sample_count)
    if isinstance(sc, bool) or not isinstance(sc, int) or sc < 2:
        raise ConfigError(f"expected an integer >= 2, got {sc!r}", "integrator.sample_count")
    return IntegratorConfig(sample_count=sc, **kw)


def build_config(raw: dict, command: str, overrides: dict) -> RunConfig:
    """Validate a JSON document into a :class:`RunConfig`."""
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object", "<root>")
    raw = {**raw, **{k: v for k, v in overrides.items() if v is not None}}
    model = _parse_model(raw.get("model"))
    protocol = None
    if command in ("quench", "sweep"):
        p = raw.get("protocol")
        if not isinstance(p, dict):
            raise ConfigError("expected an object with u_i, u_f and tau_Q", "protocol")
        u_i, u_f = _num(p, "u_i", "protocol"), _num(p, "u_f", "protocol")
        if command == "sweep":
            tau = 1.0
        else:
            tau = _num(p, "tau_Q", "protocol", positive=True)
        if not u_i > u_f:
            raise ConfigError(f"ramp must decrease u (u_i={u_i}, u_f={u_f})", "protocol.u_f")
        try:
            protocol = QuenchProtocol(u_i, u_f, tau)
        except KZLindbladError as exc:
            raise ConfigError(str(exc), "protocol") from None
    grid = raw.get("grid")
    if grid is not None and (isinstance(grid, bool) or not isinstance(grid, int) or grid < 2):
        raise ConfigError(f"expected an integer >= 2 points per dimension, got {grid!r}", "grid")
    variant = raw.get("variant", "full")
    if variant not in ("full", "no_jump"):
        raise ConfigError(f"expected 'full' or 'no_jump', got {variant!r}", "variant")
    initial = raw.get("initial", "exact_ground_state")
    if initial not in ("exact_ground_state", "b_polarized"):
        raise ConfigError(f"expected 'exact_ground_state' or 'b_polarized', got {initial!r}", "initial")
    basis = raw.get("basis", "final")
    if basis not in ("final", "instantaneous"):
        raise ConfigError(f"expected 'final' or 'instantaneous', got {basis!r}", "basis")
    taus = raw.get("sweep", [])
    if command == "sweep":
        if not isinstance(taus, list) or not taus:
            raise ConfigError("expected a non-empty list of quench times", "sweep")
        for t in taus:
            if isinstance(t, bool) or not isinstance(t, (int, float)) or not t > 0:
                raise ConfigError(f"quench times must be positive numbers, got {t!r}", "sweep")
        taus = sorted(float(t) for t in taus)
        if len(set(taus)) != len(taus):
            raise ConfigError("quench times must be distinct", "sweep")
    fit = raw.get("fit", {}) or {}
    fit_obs = fit.get("observables", ["N_total"])
    bad = [o for o in fit_obs if o not in COLUMNS]
    if bad:
        raise ConfigError(f"unknown observables {bad}", "fit.observables")
    window = fit.get("window")
    if window is not None:
        if not (isinstance(window, list) and len(window) == 2):
            raise ConfigError("expected [tau_min, tau_max]", "fit.window")
        window = (float(window[0]), float(window[1]))
    workers = raw.get("workers", 1)
    if isinstance(workers, bool) or not isinstance(workers, int) or workers < 1:
        raise ConfigError(f"expected a positive integer, got {workers!r}", "workers")
    return RunConfig(
        name=str(raw.get("name", command)),
        model=model,
        protocol=protocol,
        dissipation=_parse_dissipation(raw.get("dissipation")),
        grid=grid,
        integrator=_parse_integrator(raw.get("integrator")),
        variant=variant,
        initial=initial,
        basis=basis,
        sweep=taus,
        fit_observables=list(fit_obs),
        fit_window=window,
        out=Path(raw.get("out", ".")),
        workers=workers,
        raw=raw,
    )


# ---------------------------------------------------------------------------
# Output helpers

def _fmt(x) -> str:
    return format(float(x), ".17g")


def write_csv(path: Path, header: list[str], columns: list) -> None:
    rows = zip(*columns)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out: Path, name: str, config: dict, files: list[Path], timings: dict,
                   started: float, extra: dict | None = None) -> Path:
    manifest = {
        "name": name,
        "artifact": "kzlindblad",
        "version": __version__,
        "python": platform.python_version(),
        "config": config,
        "wall_clock_seconds": time.perf_counter() - started,
        "timings": timings,
        "files": {p.name: {"sha256": sha256(p), "bytes": p.stat().st_size} for p in files},
    }
    if extra:
        manifest.update(extra)
    path = out / f"{name}.manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")
    return path


def _config_echo(cfg: RunConfig) -> dict:
    echo = dict(cfg.raw)
    echo["out"] = str(cfg.out)
    echo["workers"] = cfg.workers
    return echo


# ---------------------------------------------------------------------------
# Commands

def cmd_quench(cfg: RunConfig, started: float) -> int:
    timings = {}
    t0 = time.perf_counter()
    series = run_quench(cfg.model, cfg.protocol, cfg.dissipation, cfg.grid, cfg.integrator,
                        cfg.variant, cfg.initial, cfg.workers, cfg.basis)
    timings["compute"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / f"{cfg.name}.csv"
    header = ["t", "u", *COLUMNS]
    write_csv(path, header, [series.axis_values, series["u"], *(series[c] for c in COLUMNS)])
    timings["write"] = time.perf_counter() - t0
    write_manifest(cfg.out, cfg.name, _config_echo(cfg), [path], timings, started)
    return EXIT_OK


def _prediction_columns(cfg: RunConfig, taus) -> dict[str, list[float]]:
    """Closed-form columns that apply to this model and dissipation."""
    cols: dict[str, list[float]] = {}
    m, d = cfg.model, cfg.dissipation
    protos = [cfg.protocol.with_tau(t) for t in taus]
    if isinstance(m, RiceMele) and m.v == 1.0 and m.w == -1.0 and cfg.variant == "full":
        cols["pred_n"] = [analytic.n_closed_form(m, p, d) for p in protos]
        dens = [analytic.fermion_density_closed_form(m, p, d) for p in protos]
        cols["pred_N_total"] = [x[0] for x in dens]
        cols["pred_N_a"] = [x[1] for x in dens]
        cols["pred_N_b"] = [x[2] for x in dens]
    if isinstance(m, RiceMele) and m.v == 1.0 and m.w == -1.0 and cfg.variant == "no_jump":
        cols["pred_n"] = [analytic.no_jump_n(m, p, d) for p in protos]
    if d.is_lld and cfg.variant == "full":
        try:
            preds = [analytic.kz_prediction(m, p, d) for p in protos]
        except KZLindbladError:
            preds = []
        if preds:
            cols[f"pred_scaling[{preds[0].formula_id}]"] = [p.value for p in preds]
    return cols


def cmd_sweep(cfg: RunConfig, started: float) -> int:
    timings = {}
    t0 = time.perf_counter()
    grid = bz_grid(cfg.model, cfg.grid)
    series = sweep(cfg.model, cfg.protocol, cfg.dissipation, grid, cfg.sweep, cfg.integrator,
                   cfg.variant, cfg.initial, cfg.workers, skip_failures=True)
    timings["compute"] = time.perf_counter() - t0
    failures = series.metadata["failures"]
    for f in failures:
        print(f"warning: tau_Q={f['tau_Q']:g} failed: {f['message']}", file=sys.stderr)
    t0 = time.perf_counter()
    taus = series.axis_values
    preds = _prediction_columns(cfg, taus)
    timings["predictions"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    fits = {}
    for obs in cfg.fit_observables:
        try:
            fits[obs] = asdict(powerlaw_fit(series, obs, cfg.fit_window))
        except KZLindbladError as exc:
            fits[obs] = {"error": str(exc)}
    timings["fit"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    cfg.out.mkdir(parents=True, exist_ok=True)
    csv_path = cfg.out / f"{cfg.name}.csv"
    header = ["tau_Q", *COLUMNS, *preds]
    write_csv(csv_path, header, [taus, *(series[c] for c in COLUMNS), *preds.values()])
    fit_path = cfg.out / f"{cfg.name}.fit.json"
    fit_path.write_text(json.dumps(fits, indent=2, sort_keys=True) + "\n")
    timings["write"] = time.perf_counter() - t0
    write_manifest(cfg.out, cfg.name, _config_echo(cfg), [csv_path, fit_path], timings, started,
                   {"failures": failures})
    return EXIT_NUMERICAL if failures else EXIT_OK


def cmd_liouvillian(cfg: RunConfig, started: float) -> int:
    raw = cfg.raw
    q = raw.get("q", 0.0)
    try:
        q = float(q) if cfg.model.dimension == 1 else np.asarray(q, dtype=float)
        bloch_vector(cfg.model, q, 0.0)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), "q") from None
    rng = raw.get("u_range", {"u_min": -3.0, "u_max": 3.0, "points": 121})
    if not isinstance(rng, dict):
        raise ConfigError("expected an object with u_min, u_max, points", "u_range")
    lo, hi = _num(rng, "u_min", "u_range"), _num(rng, "u_max", "u_range")
    pts = rng.get("points", 121)
    if isinstance(pts, bool) or not isinstance(pts, int) or pts < 2 or not hi > lo:
        raise ConfigError("need u_max > u_min and an integer points >= 2", "u_range")
    t0 = time.perf_counter()
    us = np.linspace(lo, hi, pts)
    cols = {k: [] for k in ("u", "dz", "gap", "gap_expansion")}
    names = ["lambda0", "lambda1_plus", "lambda2_plus", "lambda2_minus", "lambda1_minus", "lambda3"]
    for n in names:
        cols[f"re_{n}"] = []
        cols[f"im_{n}"] = []
    for u in us:
        b = bloch_vector(cfg.model, q, float(u))
        spec = liouvillian.eigenvalues_closed_form(b, cfg.dissipation)
        cols["u"].append(u)
        cols["dz"].append(b.dz)
        cols["gap"].append(liouvillian.spectral_gap(b, cfg.dissipation))
        cols["gap_expansion"].append(liouvillian.gap_expansion(b, cfg.dissipation))
        for n, lam in zip(names, spec.values()):
            cols[f"re_{n}"].append(lam.real)
            cols[f"im_{n}"].append(lam.imag)
    timings = {"compute": time.perf_counter() - t0}
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / f"{cfg.name}.csv"
    write_csv(path, list(cols), list(cols.values()))
    write_manifest(cfg.out, cfg.name, _config_echo(cfg), [path], timings, started)
    return EXIT_OK


def cmd_validate(level: str, out: Path, name: str = "validate", log=None) -> int:
    started = time.perf_counter()
    t0 = time.perf_counter()
    results = validation.run_checks(level, log=log)
    timings = {"checks": time.perf_counter() - t0}
    report = {
        "level": level,
        "passed": all(r.passed for r in results),
        "checks": [r.to_dict() for r in results],
    }
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{name}.report.json"
    path.write_text(json.dumps(report, indent=2, sort_keys=True, default=str) + "\n")
    write_manifest(out, name, {"level": level}, [path], timings, started)
    return EXIT_OK if report["passed"] else EXIT_VALIDATION


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kzlindblad", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", type=Path, required=config_required, help="JSON run configuration")
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument("--workers", type=int, help="worker processes (default: available CPUs)")
        p.add_argument("--variant", choices=["full", "no_jump"], help="keep or drop the jump terms")
        p.add_argument("--grid", type=int, help="momentum points per dimension")
        p.add_argument("--seedless", action="store_true",
                       help="accepted for compatibility; all runs are deterministic")

    common(sub.add_parser("quench", help="time series of one quench"))
    common(sub.add_parser("sweep", help="end-of-ramp observables over a list of quench times"))
    common(sub.add_parser("liouvillian", help="single-mode spectrum as a function of u"))
    pv = sub.add_parser("validate", help="run the oracle checks")
    pv.add_argument("level", nargs="?", choices=["fast", "full"], default="fast")
    common(pv, config_required=False)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    if args.command == "validate":
        out = args.out or Path(".")
        return cmd_validate(args.level, out, log=lambda s: print(s, flush=True))
    try:
        try:
            raw = json.loads(args.config.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read {args.config}: {exc.strerror}", "--config") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}", "--config") from None
        overrides = {"out": str(args.out) if args.out else None, "workers": args.workers,
                     "variant": args.variant, "grid": args.grid}
        if overrides["workers"] is None and isinstance(raw, dict) and "workers" not in raw:
            overrides["workers"] = default_workers()
        if isinstance(raw, dict) and "name" not in raw:
            raw["name"] = args.config.stem
        cfg = build_config(raw, args.command, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    handler = {"quench": cmd_quench, "sweep": cmd_sweep, "liouvillian": cmd_liouvillian}[args.command]
    try:
        return handler(cfg, started)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StiffnessError, SingularPointError, PreconditionError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
