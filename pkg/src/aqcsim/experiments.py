"""Named presets and a deterministic runner that writes sweep and trace CSVs.

Every CSV starts with ``# key = value`` header lines holding the fully
resolved configuration (values JSON-encoded), the package version and a
wall-clock stamp. :func:`read_config` parses the header back into an
:class:`ExperimentConfig`, so any file can be regenerated from itself.
"""

from __future__ import annotations

import dataclasses
import datetime as _dt
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .evolution import EvolutionParams, evolve
from .model import GridParams, XYParams, build, split_driver_problem
from .schedules import KINDS as SCHEDULE_KINDS
from .schedules import Schedule
from .spectral import lowest_eigenvalues

KINDS = ("spectrum", "sweep", "evolve", "fidelity_surface")
MODELS = ("xy", "ising2d")


@dataclass(frozen=True)
class Sweep:
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.count < 2 or not self.start < self.stop:
            raise ValueError(f"sweep needs count >= 2 and start < stop, got {self}")

    @classmethod
    def parse(cls, text):
        """``"start:stop:count"``."""
        start, stop, count = text.split(":")
        return cls(float(start), float(stop), int(count))

    def values(self):
        # endpoints exact, interior points evenly spaced
        step = (self.stop - self.start) / (self.count - 1)
        return [self.start + i * step if i < self.count - 1 else self.stop for i in range(self.count)]


def _values(x):
    return x.values() if isinstance(x, Sweep) else [x]


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    model: str = "xy"
    n_sites: tuple = (10,)
    rows: int = 3
    cols: int = 3
    gamma: float | Sweep = 1.0
    lam: float | Sweep | None = None
    s: Sweep | None = None
    schedule: str = "linear"
    total_time: float = 20.0
    num_steps: int | None = None
    k: int = 6
    samples: int = 201
    preset: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.schedule not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule {self.schedule!r}")
        object.__setattr__(self, "n_sites", tuple(int(n) for n in self.n_sites))
        if self.kind in ("spectrum", "sweep"):
            if (self.lam is None) == (self.s is None):
                raise ValueError("spectral runs need exactly one of lambda or s")
            if self.k < 3:
                raise ValueError("spectral runs need k >= 3 to report both gaps")
        if self.kind == "spectrum" and any(isinstance(x, Sweep) for x in (self.gamma, self.lam, self.s)):
            raise ValueError("use kind 'sweep' for parameter ranges")
        if self.kind == "fidelity_surface" and not isinstance(self.gamma, Sweep):
            raise ValueError("fidelity_surface needs a gamma sweep")
        if self.kind == "evolve" and isinstance(self.gamma, Sweep):
            raise ValueError("use kind 'fidelity_surface' for a gamma sweep")

    @property
    def name(self):
        return self.preset or self.kind

    def models(self, gamma, lam=0.0):
        """Model parameter objects, one per lattice size."""
        if self.model == "ising2d":
            return [GridParams(self.rows, self.cols, lam)]
        return [XYParams(n, gamma, lam) for n in self.n_sites]

    def evolution_params(self):
        return EvolutionParams(self.total_time, self.num_steps, self.samples)

    def to_dict(self):
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            out[f.name] = dataclasses.asdict(v) if isinstance(v, Sweep) else v
        if self.kind in ("evolve", "fidelity_surface"):
            out["num_steps"] = self.evolution_params().num_steps
        return out

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        for key in ("gamma", "lam", "s"):
            if isinstance(d.get(key), dict):
                d[key] = Sweep(**d[key])
        d["n_sites"] = tuple(d.get("n_sites", (10,)))
        return cls(**d)


PRESETS = {
    "fig1b": dict(kind="sweep", n_sites=(12,), gamma=Sweep(0.0, 1.0, 41), lam=Sweep(0.0, 2.0, 41), k=3),
    "fig2a": dict(kind="sweep", n_sites=(8, 10, 12), gamma=1.0, s=Sweep(0.0, 1.0, 101), schedule="linear", k=3),
    "fig2b": dict(kind="sweep", n_sites=(8, 10, 12), gamma=Sweep(0.0, 1.0, 41), lam=0.1, k=3),
    "fig3a": dict(kind="evolve", n_sites=(12,), gamma=0.75, schedule="linear", total_time=20.0, k=6),
    "fig3b": dict(kind="evolve", n_sites=(12,), gamma=0.75, schedule="square", total_time=20.0, k=6),
    "fig4": dict(kind="fidelity_surface", n_sites=(10,), gamma=Sweep(0.0, 1.0, 21), schedule="square",
                 total_time=20.0, k=0),
    "fig5": dict(kind="evolve", n_sites=(10,), gamma=0.8, schedule="roundtrip", total_time=200.0, k=4),
    "fig6": dict(kind="evolve", model="ising2d", rows=3, cols=3, schedule="linear", total_time=100.0,
                 num_steps=20000, k=6),
}


def preset(name):
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return ExperimentConfig(preset=name, **PRESETS[name])


def fmt(x):
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def write_csv(path, config, columns, rows, extra_header=None):
    lines = [f"# {key} = {json.dumps(value)}" for key, value in config.to_dict().items()]
    for key, value in (extra_header or {}).items():
        lines.append(f"# {key} = {json.dumps(value)}")
    lines.append(f"# artifact_version = {json.dumps(__version__)}")
    lines.append(f"# wall_clock = {json.dumps(_dt.datetime.now(_dt.timezone.utc).isoformat())}")
    lines.append(",".join(columns))
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")
    return Path(path)


def read_config(path):
    """Rebuild the ExperimentConfig recorded in a CSV header."""
    names = {f.name for f in dataclasses.fields(ExperimentConfig)}
    d = {}
    for line in Path(path).read_text().splitlines():
        if not line.startswith("#"):
            break
        key, _, value = line[1:].partition("=")
        key = key.strip()
        if key in names:
            d[key] = json.loads(value)
    return ExperimentConfig.from_dict(d)


def read_rows(path):
    """Column names and data lines of a CSV written by :func:`write_csv`."""
    lines = [x for x in Path(path).read_text().splitlines() if not x.startswith("#")]
    return lines[0].split(","), lines[1:]


def _spectrum_task(task):
    config, model, s = task
    if s is None:
        h = build(model)
    else:
        h0, hp = split_driver_problem(model)
        f, g = Schedule(config.schedule).coefficients(s)
        h = f * h0 + g * hp
    return list(lowest_eigenvalues(h, config.k))


def _trace_task(task):
    config, model = task
    h0, hp = split_driver_problem(model)
    return evolve(h0, hp, Schedule(config.schedule), config.evolution_params(), k=config.k)


def _map(fn, tasks, jobs):
    if jobs == 1 or len(tasks) == 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map yields in submission order regardless of completion order
        return list(pool.map(fn, tasks))


def _spectral_rows(config, jobs):
    sched = Schedule(config.schedule)
    tasks, keys = [], []
    gammas = [1.0] if config.model == "ising2d" else _values(config.gamma)
    for n_index in range(len(config.n_sites) if config.model == "xy" else 1):
        for gamma in gammas:
            for x in _values(config.lam if config.s is None else config.s):
                lam = x if config.s is None else sched.lambda_of_s(x)
                model = config.models(gamma, 0.0 if config.s is not None else x)[n_index]
                tasks.append((config, model, None if config.s is None else x))
                keys.append((gamma, lam, x, model.num_sites))
    results = _map(_spectrum_task, tasks, jobs)
    columns = ["gamma", "lambda"] + (["s"] if config.s is not None else []) + ["n"]
    columns += [f"E{i}" for i in range(config.k)] + ["delta01", "delta12", "delta01_per_n"]
    rows = []
    for (gamma, lam, x, n), e in zip(keys, results):
        d01, d12 = e[1] - e[0], e[2] - e[1]
        rows.append([gamma, lam] + ([x] if config.s is not None else []) + [n] + e + [d01, d12, d01 / n])
    return columns, rows


def _trace_columns(k):
    return (["s", "lambda", "f", "g"] + [f"E{i}" for i in range(k)]
            + (["delta_even"] if k else [])
            + ["energy", "F_GHZ", "F_P", "F_ferro", "norm_error"])


def _trace_rows(trace, k):
    rows = []
    for x in trace.samples:
        row = [x.s, x.lam, x.f, x.g] + list(x.energies) + ([x.delta_even] if k else [])
        rows.append(row + [x.energy, x.fidelity_ghz, x.fidelity_p, x.ferro_weight, x.norm_error])
    return rows


def run_experiment(config, out_dir=".", jobs=None):
    """Run ``config`` and write its CSV files into ``out_dir``; returns their paths."""
    jobs = jobs or os.cpu_count() or 1
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if config.kind in ("spectrum", "sweep"):
        columns, rows = _spectral_rows(config, jobs)
        return [write_csv(out_dir / f"{config.name}.csv", config, columns, rows)]

    if config.kind == "fidelity_surface":
        gammas = _values(config.gamma)
        models = [m for g in gammas for m in config.models(g)]
        traces = _map(_trace_task, [(config, m) for m in models], jobs)
        columns = ["gamma", "n", "s", "lambda", "F_GHZ", "F_P", "F_ferro", "norm_error"]
        rows = [
            [m.gamma, m.num_sites, x.s, x.lam, x.fidelity_ghz, x.fidelity_p, x.ferro_weight, x.norm_error]
            for m, tr in zip(models, traces)
            for x in tr.samples
        ]
        return [write_csv(out_dir / f"{config.name}.csv", config, columns, rows)]

    models = config.models(config.gamma)
    traces = _map(_trace_task, [(config, m) for m in models], jobs)
    paths = []
    for model, trace in zip(models, traces):
        suffix = "" if len(models) == 1 else f"_n{model.num_sites}"
        header = {"transitions": list(trace.transitions), "max_norm_error": trace.max_norm_error}
        paths.append(write_csv(
            out_dir / f"{config.name}{suffix}.csv", config, _trace_columns(config.k),
            _trace_rows(trace, config.k), header,
        ))
    return paths
