"""Run pipelines behind the CLI subcommands and their file artifacts."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, to_document
from .engine import abs_r2_series, expectation_relevant
from .metrics import MetricsReport, summarize
from .model import ModelError, ObservableSpec, TimeSeries
from .oracle import N_MAX, OracleError, branch_overlap, build_initial, energies, FullState
from .recurrence import RecurrenceReport, exact_recurrence, rationalize_all
from .sampling import (
    ALPHA_DISTRIBUTION,
    GENERATOR_NAME,
    PRESETS,
    CouplingDistribution,
    EnvironmentSpec,
    Group,
    sample_environment,
)

CSV_HEADER = ("t", "re_r", "im_r", "abs_r2")
ORACLE_TOLERANCE = 1e-9

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_ORACLE = 3


def fmt(x: float) -> str:
    """17 significant digits: round-trips every double."""
    return format(float(x), ".17g")


def series_csv(series: TimeSeries) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_HEADER) + "\n")
    r = series.r_values
    for t, z, v in zip(series.times, r, series.abs_r2):
        buf.write(f"{fmt(t)},{fmt(z.real)},{fmt(z.imag)},{fmt(v)}\n")
    return buf.getvalue()


def read_series_csv(path) -> dict:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {name: data[:, k] for k, name in enumerate(CSV_HEADER)}


def _clean(obj):
    """JSON-safe copy: non-finite floats become null."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dump_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def metadata(cfg: RunConfig, command: str) -> dict:
    meta = {
        "command": command,
        "tool": "spinbath",
        "version": __version__,
        "numpy_version": np.__version__,
        "generator": GENERATOR_NAME,
        "draw_order": "group-major, particle-minor, coupling before |alpha|^2",
        "alpha_distribution": ALPHA_DISTRIBUTION,
        "seed": cfg.seed,
        "preset": cfg.preset,
        "overrides": cfg.overrides,
        "config": to_document(cfg),
    }
    if cfg.preset is not None:
        meta["preset_caption"] = PRESETS[cfg.preset].caption
        meta["preset_note"] = "|alpha_i|^2 are drawn afresh for each preset from its own seed"
    return meta


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    # newline="" keeps \n on every platform so bytes are identical
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


@dataclass
class SimulationResult:
    series: TimeSeries
    metrics: MetricsReport
    paths: dict


def simulate(cfg: RunConfig) -> tuple[TimeSeries, MetricsReport]:
    env = sample_environment(cfg.spec)
    series = abs_r2_series(env, cfg.grid)
    report = summarize(series, cfg.epsilon, cfg.sustain, cfg.peak_floor, cfg.tail_start)
    return series, report


def metrics_document(cfg: RunConfig, report: MetricsReport, recurrence: Optional[RecurrenceReport] = None) -> dict:
    doc = {"seed": cfg.seed, "preset": cfg.preset, **report.to_dict()}
    if recurrence is not None:
        rec_t = recurrence.exact_time
        doc["recurrence_time"] = rec_t if math.isfinite(rec_t) else None
        doc["recurrence_case"] = recurrence.case_label
        step = cfg.grid.step
        doc["recurrence_peaks"] = [
            {"t": t, "abs_r2": v} for t, v in report.peaks if abs(t - rec_t) <= step
        ]
    return doc


def run_simulate(cfg: RunConfig, out: Optional[Path] = None) -> SimulationResult:
    out = Path(out if out is not None else cfg.output)
    env = sample_environment(cfg.spec)
    series = abs_r2_series(env, cfg.grid)
    report = summarize(series, cfg.epsilon, cfg.sustain, cfg.peak_floor, cfg.tail_start)
    recurrence = exact_recurrence(rationalize_all(env.couplings, cfg.max_denominator))
    paths = {
        "csv": _write(out, "series.csv", series_csv(series)),
        "metrics": _write(out, "metrics.json", dump_json(metrics_document(cfg, report, recurrence))),
        "metadata": _write(out, "metadata.json", dump_json(metadata(cfg, "simulate"))),
    }
    return SimulationResult(series, report, paths)


def poincare(cfg: RunConfig, max_denominator: Optional[int] = None) -> RecurrenceReport:
    max_den = cfg.max_denominator if max_denominator is None else max_denominator
    env = sample_environment(cfg.spec)
    return exact_recurrence(rationalize_all(env.couplings, max_den))


def poincare_document(cfg: RunConfig, report: RecurrenceReport, max_denominator: int) -> dict:
    env = sample_environment(cfg.spec)
    qs = [c.q for c in rationalize_all(env.couplings, max_denominator)]
    doc = report.to_dict()
    doc.update({
        "seed": cfg.seed,
        "preset": cfg.preset,
        "max_denominator": max_denominator,
        "min_denominator": min(qs),
        "max_denominator_seen": max(qs),
    })
    return doc


def run_poincare(cfg: RunConfig, max_denominator: Optional[int] = None, out: Optional[Path] = None):
    max_den = cfg.max_denominator if max_denominator is None else max_denominator
    report = poincare(cfg, max_den)
    doc = poincare_document(cfg, report, max_den)
    out = Path(out if out is not None else cfg.output)
    _write(out, "recurrence.json", dump_json(doc))
    _write(out, "metadata.json", dump_json(metadata(replace(cfg, max_denominator=max_den), "poincare")))
    return report, doc


SWEEP_KEYS = ("N", "half_width", "seed")
SWEEP_HEADER = ("value", "n", "seed", "decoherence_time", "tail_max", "n_peaks", "max_peak",
                "case", "exact_time_over_pi", "log10_exact_time_over_pi", "log10_product_bound_over_pi")


def vary_spec(spec: EnvironmentSpec, vary: str, value) -> EnvironmentSpec:
    """Copy of ``spec`` with one sweep parameter changed.

    ``N`` resizes the first group so the total equals ``value``; ``half_width``
    sets the interval half-width of every group.
    """
    if vary == "seed":
        return spec.with_seed(int(value))
    if vary == "N":
        n = int(value)
        rest = spec.n - spec.groups[0].count
        if n - rest < 1:
            raise ConfigError(f"sweep: N = {n} leaves no particles in the first group")
        g0 = replace(spec.groups[0], count=n - rest)
        return replace(spec, groups=(g0,) + spec.groups[1:])
    if vary == "half_width":
        hw = float(value)
        groups = tuple(
            Group(g.count, CouplingDistribution.uniform(g.coupling.mean, hw), g.alpha, g.label)
            for g in spec.groups
        )
        return replace(spec, groups=groups)
    raise ConfigError(f"sweep: cannot vary {vary!r}; choose one of {', '.join(SWEEP_KEYS)}")


def sweep_rows(cfg: RunConfig, vary: str, values: Sequence) -> list[dict]:
    if vary not in SWEEP_KEYS:
        raise ConfigError(f"sweep: cannot vary {vary!r}; choose one of {', '.join(SWEEP_KEYS)}")
    if len(values) == 0:
        raise ConfigError("sweep: no values given")
    rows = []
    for value in values:
        try:
            spec = vary_spec(cfg.spec, vary, value)
        except ModelError as exc:
            raise ConfigError(f"sweep value {value!r}: {exc}") from None
        run_cfg = replace(cfg, spec=spec)
        series, report = simulate(run_cfg)
        rec = poincare(run_cfg)
        x = rec.exact_time_over_pi
        exact = f"{x.numerator}/{x.denominator}" if len(str(x.numerator)) + len(str(x.denominator)) <= 40 else ""
        rows.append({
            "value": value,
            "n": spec.n,
            "seed": spec.seed,
            "decoherence_time": report.decoherence_time,
            "tail_max": report.long_time_max,
            "n_peaks": len(report.peaks),
            "max_peak": max((v for _, v in report.peaks), default=None),
            "case": rec.case_label,
            "exact_time_over_pi": exact,
            "log10_exact_time_over_pi": rec.log10_exact,
            "log10_product_bound_over_pi": rec.log10_bound,
        })
    return rows


def sweep_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for row in rows:
        cells = []
        for key in SWEEP_HEADER:
            v = row[key]
            if v is None:
                cells.append("")
            elif isinstance(v, float):
                cells.append(fmt(v))
            else:
                cells.append(str(v))
        w.writerow(cells)
    return buf.getvalue()


def run_sweep(cfg: RunConfig, vary: str, values: Sequence, out: Optional[Path] = None):
    rows = sweep_rows(cfg, vary, values)
    out = Path(out if out is not None else cfg.output)
    meta = metadata(cfg, "sweep")
    meta["sweep"] = {"vary": vary, "values": list(values)}
    _write(out, "sweep.csv", sweep_csv(rows))
    _write(out, "metadata.json", dump_json(meta))
    return rows


def oracle_comparison(cfg: RunConfig) -> dict:
    """Max deviations between engine and full-state oracle over the grid."""
    env = sample_environment(cfg.spec)
    if env.n > N_MAX:
        raise OracleError(f"oracle limited to N <= {N_MAX}, got N = {env.n}")
    obs = cfg.observable if cfg.observable is not None else ObservableSpec.sigma_x()
    series = abs_r2_series(env, cfg.grid)
    psi0 = build_initial(cfg.system, env)
    energy = energies(env)
    has_branches = cfg.system.a != 0 and cfg.system.b != 0
    dev_r = dev_r2 = dev_obs = drift = 0.0
    o = obs.matrix()
    for k, t in enumerate(series.times):
        state = FullState(psi0.amplitudes * np.exp(-1j * energy * t), psi0.n_env, psi0.system)
        drift = max(drift, abs(state.norm - 1.0))
        psi = state.amplitudes.reshape(2, -1)
        oracle_val = complex(np.vdot(psi.ravel(), (o @ psi).ravel()))
        engine_val = complex(expectation_relevant(cfg.system, obs, series.r_values[k]))
        dev_obs = max(dev_obs, abs(oracle_val - engine_val))
        if has_branches:
            r = branch_overlap(state)
            dev_r = max(dev_r, abs(r - series.r_values[k]))
            dev_r2 = max(dev_r2, abs(abs(r) ** 2 - series.abs_r2[k]))
    doc = {
        "n_particles": env.n,
        "samples": cfg.grid.samples,
        "tolerance": ORACLE_TOLERANCE,
        "max_dev_r": dev_r if has_branches else None,
        "max_dev_abs_r2": dev_r2 if has_branches else None,
        "max_dev_expectation": dev_obs,
        "max_norm_drift": drift,
        "notes": [],
    }
    if not has_branches:
        doc["notes"].append("a = 0 or b = 0: branch overlap undefined, r(t) comparisons skipped")
    devs = [v for v in (doc["max_dev_r"], doc["max_dev_abs_r2"], dev_obs) if v is not None]
    doc["passed"] = all(v <= ORACLE_TOLERANCE for v in devs)
    return doc


def run_oracle(cfg: RunConfig, out: Optional[Path] = None) -> dict:
    doc = oracle_comparison(cfg)
    out = Path(out if out is not None else cfg.output)
    _write(out, "oracle.json", dump_json(doc))
    _write(out, "metadata.json", dump_json(metadata(cfg, "oracle")))
    return doc
