"""Run configuration and CSV/text file formats.

All numbers are written with 17 significant digits so that every float
survives a write/read cycle unchanged. Files are written atomically
(temporary file in the target directory, then ``os.replace``).
"""
from __future__ import annotations

import csv
import io as _io
import math
import os
import tempfile
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, FormatError, GridError
from .model import ModelParams, TimeGrid
from .nonmarkov import NMReport
from .tomo import GeneratorSeries, MagnetizationTrace
from .witness import WitnessReport

TRACE_HEADER = ["t_s", "re_sigma_minus", "im_sigma_minus"]
WITNESS_HEADER = ["t_s", "lq", "h1", "h2", "lg", "viol_lq", "viol_h1", "viol_h2", "viol_lg"]
GENERATOR_HEADER = ["t_s", "f_hat", "g_hat", "singular"]
NM_HEADER = ["t_s", "g", "total_rate", "sigma", "sigma_half_rate", "non_divisible", "backflow"]
GRID_TOL = 1e-9

OUT_DIR_ENV = "QML_OUT_DIR"


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def fmt_bool(b) -> str:
    return "true" if b else "false"


def parse_bool(s: str) -> bool:
    if s == "true":
        return True
    if s == "false":
        return False
    raise DataError(f"expected true/false, got {s!r}")


def atomic_write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _csv_text(header: list[str], rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _read_rows(path, header: list[str]) -> list[list[str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != header:
        got = rows[0] if rows else []
        raise FormatError(f"{path}: expected header {','.join(header)!r}, got {','.join(got)!r}")
    body = rows[1:]
    for i, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise FormatError(f"{path}:{i}: expected {len(header)} fields, got {len(r)}")
    return body


def _float(s: str, where: str) -> float:
    try:
        return float(s)
    except ValueError:
        raise DataError(f"{where}: not a number: {s!r}") from None


def grid_from_times(t: np.ndarray) -> TimeGrid:
    """Validate strictly increasing, uniformly spaced times and rebuild the grid."""
    n = t.shape[0]
    if n == 0:
        raise GridError("no samples")
    if n == 1:
        return TimeGrid(float(t[0]), 1.0, 1)
    steps = np.diff(t)
    if np.any(steps <= 0):
        raise GridError("times must be strictly increasing")
    dt = (t[-1] - t[0]) / (n - 1)
    if np.max(np.abs(t - (t[0] + dt * np.arange(n)))) > GRID_TOL:
        raise GridError(f"times are not uniformly spaced within {GRID_TOL} s")
    return TimeGrid(float(t[0]), float(dt), n)


# --- traces --------------------------------------------------------------------------

def write_trace_csv(trace: MagnetizationTrace, path) -> Path:
    rows = ([fmt(t), fmt(v.real), fmt(v.imag)] for t, v in zip(trace.times, trace.values))
    return atomic_write_text(path, _csv_text(TRACE_HEADER, rows))


def parse_trace_csv(path) -> MagnetizationTrace:
    body = _read_rows(path, TRACE_HEADER)
    data = np.array([[_float(x, f"{path}:{i + 2}") for x in r] for i, r in enumerate(body)], dtype=float)
    if data.size == 0:
        raise GridError(f"{path}: no samples")
    if np.any(np.isnan(data)):
        raise DataError(f"{path}: NaN in trace")
    grid = grid_from_times(data[:, 0])
    return MagnetizationTrace(grid, data[:, 1] + 1j * data[:, 2], source="ingested")


# --- reports ---------------------------------------------------------------------------

def witness_csv_text(report: WitnessReport) -> str:
    flags = report.flags
    n = report.grid.n
    lg = report.lg if report.lg is not None else np.full(n, np.nan)
    viol_lg = flags.get("lg", np.zeros(n, dtype=bool))
    rows = (
        [fmt(t), fmt(report.lq[i]), fmt(report.h1[i]), fmt(report.h2[i]), fmt(lg[i]),
         fmt_bool(flags["lq"][i]), fmt_bool(flags["h1"][i]), fmt_bool(flags["h2"][i]), fmt_bool(viol_lg[i])]
        for i, t in enumerate(report.grid.times)
    )
    return _csv_text(WITNESS_HEADER, rows)


def write_witness_csv(report: WitnessReport, path) -> Path:
    return atomic_write_text(path, witness_csv_text(report))


def parse_witness_csv(path) -> dict[str, np.ndarray]:
    body = _read_rows(path, WITNESS_HEADER)
    out: dict[str, np.ndarray] = {}
    for j, name in enumerate(WITNESS_HEADER):
        col = [r[j] for r in body]
        out[name] = np.array([parse_bool(x) for x in col]) if name.startswith("viol_") else np.array(
            [_float(x, str(path)) for x in col]
        )
    return out


def generator_csv_text(series: GeneratorSeries) -> str:
    rows = (
        [fmt(t), fmt(series.f_hat[i]), fmt(series.g_hat[i]), fmt_bool(series.singular[i])]
        for i, t in enumerate(series.times)
    )
    return _csv_text(GENERATOR_HEADER, rows)


def write_generator_csv(series: GeneratorSeries, path) -> Path:
    return atomic_write_text(path, generator_csv_text(series))


def parse_generator_csv(path) -> dict[str, np.ndarray]:
    body = _read_rows(path, GENERATOR_HEADER)
    return {
        "t_s": np.array([_float(r[0], str(path)) for r in body]),
        "f_hat": np.array([_float(r[1], str(path)) for r in body]),
        "g_hat": np.array([_float(r[2], str(path)) for r in body]),
        "singular": np.array([parse_bool(r[3]) for r in body], dtype=bool),
    }


def nm_csv_text(report: NMReport) -> str:
    rows = (
        [fmt(t), fmt(report.g[i]), fmt(report.total_rate[i]), fmt(report.sigma[i]), fmt(report.sigma_half_rate[i]),
         fmt_bool(report.total_rate[i] < 0), fmt_bool(report.sigma[i] > 0)]
        for i, t in enumerate(report.grid.times)
    )
    return _csv_text(NM_HEADER, rows)


def write_nm_csv(report: NMReport, path) -> Path:
    return atomic_write_text(path, nm_csv_text(report))


def parse_nm_csv(path) -> dict[str, np.ndarray]:
    body = _read_rows(path, NM_HEADER)
    out: dict[str, np.ndarray] = {}
    for j, name in enumerate(NM_HEADER):
        col = [r[j] for r in body]
        if name in ("non_divisible", "backflow"):
            out[name] = np.array([parse_bool(x) for x in col], dtype=bool)
        else:
            out[name] = np.array([_float(x, str(path)) for x in col])
    return out


# --- configuration ------------------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    J_hz: float = 215.06
    theta_rad: float = math.pi / 3
    gamma_per_s: float = 0.0
    epsilon: float = 1.0
    t_max_s: float = 10e-3
    dt_s: float = 250e-6
    prep: str = "plus"
    out: str = ""
    svg: str = "auto"
    out_dir: str = ""
    trace: str = ""
    J_eff_hz: float = 30.0
    t_s: float = 10e-3
    n_rep: int = 10
    pulse_spacing_s: float = 0.0
    sweep_command: str = "witness"
    sweep_key: str = "theta_rad"
    sweep_values: str = ""
    workers: int = 1

    def validate(self) -> "RunConfig":
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, float) and not math.isfinite(v):
                raise ConfigError(f"{f.name} must be finite")
        if not self.dt_s > 0:
            raise ConfigError("dt_s must be positive")
        if self.t_max_s < self.dt_s:
            raise ConfigError("t_max_s must be >= dt_s")
        if self.prep not in ("plus", "minus"):
            raise ConfigError("prep must be plus or minus")
        if self.n_rep < 1 or self.workers < 1:
            raise ConfigError("n_rep and workers must be >= 1")
        if self.pulse_spacing_s < 0 or self.t_s < 0:
            raise ConfigError("pulse_spacing_s and t_s must be >= 0")
        try:
            self.params
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.J_hz, self.theta_rad, self.gamma_per_s, self.epsilon)

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid.span(self.t_max_s, self.dt_s)

    def with_updates(self, updates: dict[str, str]) -> "RunConfig":
        return replace(self, **coerce(updates))


_TYPES = {f.name: f.type for f in fields(RunConfig)}
CONFIG_KEYS = frozenset(_TYPES)


def coerce(raw: dict[str, str]) -> dict:
    out = {}
    for key, text in raw.items():
        if key not in _TYPES:
            raise ConfigError(f"unknown configuration key {key!r}")
        kind = _TYPES[key]
        try:
            if kind == "float":
                out[key] = float(text)
            elif kind == "int":
                out[key] = int(text)
            else:
                out[key] = str(text)
        except ValueError:
            raise ConfigError(f"{key}: cannot parse {text!r} as {kind}") from None
    return out


def parse_config_text(text: str) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key] = value
    return out


def load_config(path=None, overrides: dict[str, str] | None = None) -> RunConfig:
    """Defaults, then the config file, then command-line overrides."""
    raw: dict[str, str] = {}
    if path:
        try:
            raw.update(parse_config_text(Path(path).read_text(encoding="utf-8")))
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
    raw.update(overrides or {})
    return RunConfig().with_updates(raw).validate()
