"""Parameter sweeps: configuration files, figure presets, CSV output and the CLI.

A configuration is a flat TOML table.  Scalar keys set one value for the
whole sweep; a list value on a scenario key turns it into a *series* and the
sweep runs the Cartesian product of all series, each over the full axis
grid.  Units at this boundary are dBm for powers, dB for path losses and the
residual self-interference level, and mW for ``p_th``; everything is
converted to linear SI units when the sweep is built.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import platform
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

import tomli_w

from . import analytic
from .channel import SystemParams
from .harvest import DEFAULT_ZETA_THRESHOLD, EhParams, mean_harvested_power, validity_zeta
from .montecarlo import DEFAULT_TRIALS, simulate
from .units import db_to_linear

__all__ = [
    "ConfigError",
    "SweepSpec",
    "SweepRow",
    "PRESETS",
    "METRICS",
    "MODES",
    "AXES",
    "build_spec",
    "load_config",
    "load_preset",
    "dump_config",
    "run_sweep",
    "write_csv",
    "write_manifest",
    "main",
]

AXES = ("pt_dbm", "n_elements", "rho", "p_th", "omega_db", "beta_12_db")
METRICS = ("op_d1", "op_d2", "er_d1", "er_d2", "mean_ph")
MODES = ("analytic", "mc")
TABLE1_ALPHAS = (0.9, 0.1)

# scenario keys in config units, with their defaults
SCENARIO_DEFAULTS: dict[str, Any] = {
    "pt_dbm": 10.0,
    "noise_density_dbm_hz": -96.0,
    "bandwidth_hz": 1e6,
    "n_elements": 30,
    "alpha1": 0.1,
    "alpha2": 0.9,
    "r1_target": 1.5,
    "r2_target": 0.5,
    "omega_db": -math.inf,
    "rho": 0.0,
    "m_ss": 3.5,
    "m_s1": 2.0,
    "m_s2": 1.0,
    "omega_ss": 1.0,
    "omega_s1": 1.0,
    "omega_s2": 1.0,
    "beta_ss_db": -30.0,
    "beta_s1_db": -30.0,
    "beta_s2_db": -40.0,
    "beta_12_db": -15.0,
    "eh_model": "nonlinear",
    "eh_a": 150.0,
    "eh_b": 0.014,
    "p_th": 24.0,
    "eh_eta": 0.8,
}
# present only when set: total noise power in dBm, overriding density x bandwidth
OPTIONAL_SCENARIO_KEYS = ("noise_power_dbm",)
CONTROL_KEYS = ("preset", "axis", "grid", "grid_start", "grid_stop", "grid_step", "metrics", "modes",
                "trials", "seed", "zeta_threshold", "table1_literal")

_PT_GRID = {"grid_start": -10.0, "grid_stop": 50.0, "grid_step": 5.0}
_OP = ["op_d1", "op_d2"]
_ER = ["er_d1", "er_d2"]

PRESETS: dict[str, dict[str, Any]] = {
    "fig2": {"axis": "pt_dbm", "grid_start": 0.0, "grid_stop": 50.0, "grid_step": 5.0,
             "n_elements": [30, 65, 100], "rho": [0.0, 0.2], "omega_db": -30.0, "metrics": _ER},
    "fig3": {"axis": "pt_dbm", "grid_start": 0.0, "grid_stop": 50.0, "grid_step": 5.0,
             "n_elements": [30, 65, 100], "rho": 0.8, "metrics": ["mean_ph"]},
    "fig4": {"axis": "pt_dbm", **_PT_GRID, "n_elements": [30, 65, 100], "rho": [0.0, 0.2],
             "omega_db": -math.inf, "metrics": _OP},
    "fig5": {"axis": "n_elements", "grid_start": 10, "grid_stop": 100, "grid_step": 10, "pt_dbm": 15.0,
             "rho": [0.0, 0.5], "omega_db": [-45.0, -30.0, -15.0], "metrics": _ER},
    "fig6": {"axis": "pt_dbm", **_PT_GRID, "n_elements": 100, "rho": 0.5,
             "omega_db": [-math.inf, -20.0, -15.0], "eh_model": ["nonlinear", "linear"], "metrics": _OP},
    "fig7": {"axis": "rho", "grid_start": 0.0, "grid_stop": 1.0, "grid_step": 0.05, "n_elements": 100,
             "pt_dbm": [15.0, 30.0], "omega_db": [-5.0, -15.0, -30.0], "metrics": _OP},
    "fig8": {"axis": "pt_dbm", **_PT_GRID, "n_elements": 100, "rho": 0.5,
             "omega_db": [-22.0, -15.0], "p_th": [1.0, 25.0, 50.0], "metrics": _OP},
}


class ConfigError(ValueError):
    """Invalid or unreadable sweep configuration."""


def _norm(key: str, value: Any) -> Any:
    """Coerce one scenario value to its canonical Python type."""
    if key == "eh_model":
        if not isinstance(value, str):
            raise ConfigError(f"{key}: expected a string, got {value!r}")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    if key == "n_elements":
        if int(value) != value:
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return int(value)
    return float(value)


def to_params(settings: Mapping[str, Any]) -> tuple[SystemParams, EhParams]:
    """Convert one fully specified scenario (config units) to model parameters."""
    noise = settings.get("noise_power_dbm")
    p = SystemParams(
        pt_dbm=settings["pt_dbm"],
        noise_density_dbm_hz=settings["noise_density_dbm_hz"],
        bandwidth_hz=settings["bandwidth_hz"],
        n_elements=settings["n_elements"],
        alpha1=settings["alpha1"],
        alpha2=settings["alpha2"],
        r1_target=settings["r1_target"],
        r2_target=settings["r2_target"],
        omega=db_to_linear(settings["omega_db"]),
        rho=settings["rho"],
        m_ss=settings["m_ss"], m_s1=settings["m_s1"], m_s2=settings["m_s2"],
        omega_ss=settings["omega_ss"], omega_s1=settings["omega_s1"], omega_s2=settings["omega_s2"],
        beta_ss=db_to_linear(settings["beta_ss_db"]),
        beta_s1=db_to_linear(settings["beta_s1_db"]),
        beta_s2=db_to_linear(settings["beta_s2_db"]),
        beta_12=db_to_linear(settings["beta_12_db"]),
        noise_power_w=None if noise is None else db_to_linear(noise - 30.0),
    )
    eh = EhParams(model=settings["eh_model"], a=settings["eh_a"], b=settings["eh_b"],
                  p_th=settings["p_th"] * 1e-3, eta=settings["eh_eta"])
    return p, eh


@dataclass(frozen=True)
class SweepSpec:
    """A validated sweep.  ``settings`` and ``series`` are stored in config units."""

    axis: str
    grid: tuple
    settings: tuple[tuple[str, Any], ...]
    series: tuple[tuple[str, tuple], ...]
    metrics: tuple[str, ...]
    modes: tuple[str, ...]
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    zeta_threshold: float = DEFAULT_ZETA_THRESHOLD
    table1_literal: bool = False
    preset: Optional[str] = None
    base: tuple[SystemParams, EhParams] = field(default=None, compare=False, repr=False)  # type: ignore[assignment]

    @property
    def series_keys(self) -> tuple[str, ...]:
        return tuple(k for k, _ in self.series)

    def combos(self) -> list[tuple[Any, ...]]:
        return list(itertools.product(*(v for _, v in self.series)))

    def scenario(self, combo: Sequence[Any], x: Any) -> tuple[SystemParams, EhParams]:
        s = dict(self.settings)
        s.update(zip(self.series_keys, combo))
        s[self.axis] = x
        return to_params(s)

    def columns(self) -> list[str]:
        cols = [*self.series_keys, self.axis]
        for m in self.metrics:
            for mode in self.modes:
                cols.append(f"{m}_{mode}")
                if mode == "mc":
                    cols.append(f"{m}_mc_stderr")
        cols.append("validity")
        return cols


@dataclass
class SweepRow:
    series: tuple[tuple[str, Any], ...]
    axis_value: Any
    values: dict[str, float]
    validity: str
    errors: dict[str, str] = field(default_factory=dict)


def _grid_from_range(start, stop, step, axis: str) -> tuple:
    for name, v in (("grid_start", start), ("grid_stop", stop), ("grid_step", step)):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ConfigError(f"{name} must be a finite number")
    if step == 0 or (stop - start) / step < 0:
        raise ConfigError("grid_step must be nonzero and point from grid_start towards grid_stop")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + i * step, 10) for i in range(count))


def build_spec(raw: Mapping[str, Any]) -> SweepSpec:
    """Validate a flat key/value mapping (config units) into a :class:`SweepSpec`."""
    raw = dict(raw)
    allowed = set(SCENARIO_DEFAULTS) | set(OPTIONAL_SCENARIO_KEYS) | set(CONTROL_KEYS)
    unknown = [k for k in raw if k not in allowed]
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(repr(k) for k in unknown)}")

    merged: dict[str, Any] = {}
    preset = raw.get("preset")
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")
        merged.update(PRESETS[preset])
    if "grid" in raw:
        for k in ("grid_start", "grid_stop", "grid_step"):
            merged.pop(k, None)
    if any(k in raw for k in ("grid_start", "grid_stop", "grid_step")):
        merged.pop("grid", None)
    merged.update(raw)

    axis = merged.get("axis")
    if axis not in AXES:
        raise ConfigError(f"axis must be one of {AXES}, got {axis!r}")
    if "grid" in merged:
        grid = merged["grid"]
        if not isinstance(grid, list):
            raise ConfigError("grid must be a list")
    elif all(k in merged for k in ("grid_start", "grid_stop", "grid_step")):
        grid = _grid_from_range(merged["grid_start"], merged["grid_stop"], merged["grid_step"], axis)
    else:
        raise ConfigError("give either grid or grid_start/grid_stop/grid_step")
    grid = tuple(_norm(axis, v) for v in grid)
    if not grid:
        raise ConfigError("grid must be nonempty")
    diffs = np.diff(np.asarray(grid, dtype=float))
    if not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise ConfigError("grid must be strictly monotone")

    settings: dict[str, Any] = dict(SCENARIO_DEFAULTS)
    series: list[tuple[str, tuple]] = []
    for k, v in merged.items():
        if k in CONTROL_KEYS:
            continue
        if isinstance(v, list):
            if k == axis:
                raise ConfigError(f"{k} is the sweep axis and cannot also be a series")
            if not v:
                raise ConfigError(f"series {k} is empty")
            series.append((k, tuple(_norm(k, x) for x in v)))
            settings.pop(k, None)
        else:
            settings[k] = _norm(k, v)
    settings.pop(axis, None)

    table1 = merged.get("table1_literal", False)
    if not isinstance(table1, bool):
        raise ConfigError("table1_literal must be true or false")
    if table1:
        if "alpha1" in dict(series) or "alpha2" in dict(series):
            raise ConfigError("table1_literal fixes alpha1/alpha2; they cannot be series")
        settings["alpha1"], settings["alpha2"] = TABLE1_ALPHAS

    def names(key: str, allowed_vals: tuple[str, ...]) -> tuple[str, ...]:
        v = merged.get(key, list(allowed_vals) if key == "modes" else None)
        if not isinstance(v, list) or not v:
            raise ConfigError(f"{key} must be a nonempty list")
        bad = [x for x in v if x not in allowed_vals]
        if bad:
            raise ConfigError(f"{key}: unknown entries {bad}; allowed {allowed_vals}")
        return tuple(dict.fromkeys(v))

    metrics = names("metrics", METRICS)
    modes = names("modes", MODES)

    trials = merged.get("trials", DEFAULT_TRIALS)
    seed = merged.get("seed", 0)
    zt = merged.get("zeta_threshold", DEFAULT_ZETA_THRESHOLD)
    if isinstance(trials, bool) or not isinstance(trials, int) or trials < 1:
        raise ConfigError(f"trials must be a positive integer, got {trials!r}")
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"seed must be a nonnegative integer, got {seed!r}")
    if isinstance(zt, bool) or not isinstance(zt, (int, float)) or not zt > 0:
        raise ConfigError("zeta_threshold must be positive")

    spec = SweepSpec(axis, grid, tuple(settings.items()), tuple(series), metrics, modes,
                     int(trials), int(seed), float(zt), table1, preset)
    # validate every scenario now so that bad values fail at load time
    base = None
    for combo in spec.combos():
        for x in grid:
            try:
                sc = spec.scenario(combo, x)
            except ValueError as exc:
                where = ", ".join(f"{k}={v}" for k, v in zip(spec.series_keys, combo))
                raise ConfigError(f"invalid scenario ({where}{', ' if where else ''}{axis}={x}): {exc}") from None
            base = base or sc
    object.__setattr__(spec, "base", base)
    return spec


def load_preset(name: str, **overrides: Any) -> SweepSpec:
    return build_spec({"preset": name, **overrides})


def _read_toml(path) -> dict[str, Any]:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"{path}: no such file") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def load_config(path) -> SweepSpec:
    raw = _read_toml(path)
    try:
        return build_spec(raw)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def spec_to_mapping(spec: SweepSpec) -> dict[str, Any]:
    """Explicit flat mapping that :func:`build_spec` turns back into ``spec``."""
    out: dict[str, Any] = {}
    if spec.preset is not None:
        out["preset"] = spec.preset
    out.update(axis=spec.axis, grid=list(spec.grid), metrics=list(spec.metrics), modes=list(spec.modes),
               trials=spec.trials, seed=spec.seed, zeta_threshold=spec.zeta_threshold,
               table1_literal=spec.table1_literal)
    out.update(spec.settings)
    for k, v in spec.series:
        out[k] = list(v)
    return out


def dump_config(spec: SweepSpec, path=None) -> str:
    """Serialize ``spec`` as TOML; writes to ``path`` when given."""
    text = tomli_w.dumps(spec_to_mapping(spec))
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


_RECOVERABLE = (ArithmeticError, ValueError)


def _analytic_value(metric: str, p: SystemParams, eh: EhParams, zt: float) -> float:
    if metric == "op_d1":
        return analytic.op_d1(p, eh, zeta_threshold=zt).value
    if metric == "op_d2":
        return analytic.op_d2(p, eh, zeta_threshold=zt).value
    if metric == "er_d1":
        return analytic.er_d1_upper(p, eh, zeta_threshold=zt).value
    if metric == "er_d2":
        return analytic.er_d2_upper(p, eh, zeta_threshold=zt).value
    return mean_harvested_power(p, eh, zt)


def _mc_estimate(metric: str, r):
    if metric == "op_d1":
        return r.outage("D1")
    if metric == "op_d2":
        return r.outage("D2")
    if metric == "er_d1":
        return r.rate("D1")
    if metric == "er_d2":
        return r.rate("D2")
    return r.ph.mean_estimate()


def run_sweep(spec: SweepSpec, *, workers: Optional[int] = None) -> list[SweepRow]:
    """Evaluate every (series combination, grid point); rows come back in grid order per series."""
    points = [(combo, x, spec.scenario(combo, x)) for combo in spec.combos() for x in spec.grid]
    rows = [SweepRow(tuple(zip(spec.series_keys, combo)), x, {}, "") for combo, x, _ in points]

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for row, (_, _, (p, eh)) in zip(rows, points):
            _, ok = validity_zeta(p, eh, spec.zeta_threshold)
            row.validity = "I" if ok else "II"
            if "analytic" in spec.modes:
                for m in spec.metrics:
                    try:
                        v = _analytic_value(m, p, eh, spec.zeta_threshold)
                        if not math.isfinite(v):
                            raise ArithmeticError(f"non-finite value {v}")
                        row.values[f"{m}_analytic"] = v
                    except _RECOVERABLE as exc:
                        row.errors[f"{m}_analytic"] = f"{type(exc).__name__}: {exc}"

        if "mc" in spec.modes:
            need_d2 = any(m in ("op_d2", "er_d2") for m in spec.metrics)
            results = simulate([sc for _, _, sc in points], spec.trials, spec.seed,
                               workers=workers, need_d2=need_d2)
            for row, r in zip(rows, results):
                for m in spec.metrics:
                    est = _mc_estimate(m, r)
                    row.values[f"{m}_mc"] = est.mean
                    row.values[f"{m}_mc_stderr"] = est.stderr
    return rows


def _fmt(v: Any) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return "%.10g" % v


def write_csv(rows: Sequence[SweepRow], out, spec: Optional[SweepSpec] = None) -> None:
    """Write rows as CSV to a path or text stream; failed cells are left empty."""
    if spec is not None:
        cols = spec.columns()
    elif rows:
        first = rows[0]
        cols = [k for k, _ in first.series] + ["axis"] + list(first.values) + ["validity"]
    else:
        raise ValueError("cannot infer CSV columns from zero rows without a spec")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    n_series = len(rows[0].series) if rows else 0
    for r in rows:
        cells = [_fmt(v) for _, v in r.series] + [_fmt(r.axis_value)]
        for c in cols[n_series + 1:-1]:
            cells.append(_fmt(r.values[c]) if c in r.values else "")
        cells.append(r.validity)
        w.writerow(cells)
    text = buf.getvalue()
    if hasattr(out, "write"):
        out.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {out}: {exc}") from exc


def write_manifest(spec: SweepSpec, rows: Sequence[SweepRow], path) -> None:
    from importlib import metadata

    try:
        version = metadata.version("artifact")
    except metadata.PackageNotFoundError:  # pragma: no cover
        version = "unknown"
    manifest = {
        "config": spec_to_mapping(spec),
        "seed": spec.seed,
        "trials": spec.trials,
        "rows": len(rows),
        "row_errors": {f"{i}:{k}": v for i, r in enumerate(rows) for k, v in r.errors.items()},
        "versions": {"package": version, "python": platform.python_version(), "numpy": np.__version__},
    }
    text = json.dumps(manifest, indent=2, sort_keys=True, default=str)
    Path(path).write_text(text + "\n", encoding="utf-8")


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sweep", description="Run an outage/rate/harvest sweep and write CSV.")
    ap.add_argument("--preset", choices=sorted(PRESETS), help="start from a figure preset")
    ap.add_argument("--config", help="TOML file with overrides (may itself name a preset)")
    ap.add_argument("--trials", type=int, help="Monte-Carlo trials per point")
    ap.add_argument("--seed", type=int, help="random seed")
    ap.add_argument("--out", help="CSV output path (default: stdout)")
    mode = ap.add_mutually_exclusive_group()
    mode.add_argument("--analytic-only", action="store_true")
    mode.add_argument("--mc-only", action="store_true")
    ap.add_argument("--table1-literal", action="store_true",
                    help="use alpha1=0.9, alpha2=0.1 instead of the default 0.1/0.9 split")
    ap.add_argument("--workers", type=int, default=1, help="worker processes for Monte-Carlo")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        raw = _read_toml(args.config) if args.config else {}
        if args.preset:
            raw["preset"] = args.preset
        if not raw:
            raise ConfigError("give --preset and/or --config")
        for key in ("trials", "seed"):
            if getattr(args, key) is not None:
                raw[key] = getattr(args, key)
        if args.analytic_only:
            raw["modes"] = ["analytic"]
        elif args.mc_only:
            raw["modes"] = ["mc"]
        if args.table1_literal:
            raw["table1_literal"] = True
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1")
        spec = build_spec(raw)
    except ConfigError as exc:
        print(f"sweep: config error: {exc}", file=sys.stderr)
        return 1

    a1, a2 = dict(spec.settings).get("alpha1"), dict(spec.settings).get("alpha2")
    label = "literal coefficients" if spec.table1_literal else "default cell-center/cell-edge coefficients"
    print(f"sweep: {label} alpha1={_fmt(a1) if a1 is not None else 'series'} "
          f"alpha2={_fmt(a2) if a2 is not None else 'series'}; modes={','.join(spec.modes)}; "
          f"trials={spec.trials}; seed={spec.seed}", file=sys.stderr)

    rows = run_sweep(spec, workers=args.workers)
    try:
        if args.out:
            write_csv(rows, args.out, spec)
            write_manifest(spec, rows, Path(args.out).with_suffix(".manifest.json"))
        else:
            write_csv(rows, sys.stdout, spec)
    except OSError as exc:
        print(f"sweep: {exc}", file=sys.stderr)
        return 1

    n_err = sum(len(r.errors) for r in rows)
    if n_err:
        for i, r in enumerate(rows):
            for k, v in r.errors.items():
                print(f"sweep: row {i} ({spec.axis}={_fmt(r.axis_value)}) {k}: {v}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
