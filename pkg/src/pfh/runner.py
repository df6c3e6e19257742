"""Execute a parsed configuration and record what was written."""
from __future__ import annotations

import csv
import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    stochastic_discrepancy,
    voids_counterexample_energy,
    voids_energy_closed_form,
    voids_leading_constant,
)
from .config import ConfigError, ParsedConfig
from .dynamics import initial_field, run_flow, FlowConfig
from .energy import EnergyTrace, energy, energy_tv
from .grid import ScalarField, write_pfh1
from .potentials import (
    RandomTile,
    Sum,
    Tabulated,
    c_hom,
    homogenize,
    optimal_profile,
    write_tabulated_csv,
)

__all__ = ["RunManifest", "config_hash", "run", "thread_limit"]


def config_hash(document: dict) -> str:
    """64-bit BLAKE2b digest (hex) of the canonical JSON form of ``document``."""
    canon = json.dumps(document, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    return hashlib.blake2b(canon.encode("utf-8"), digest_size=8).hexdigest()


def thread_limit() -> int:
    """Worker cap from ``PFH_THREADS`` (default 1)."""
    raw = os.environ.get("PFH_THREADS", "1")
    try:
        k = int(raw)
    except ValueError:
        raise ConfigError(f"PFH_THREADS must be a positive integer, got {raw!r}") from None
    if k < 1:
        raise ConfigError(f"PFH_THREADS must be a positive integer, got {raw!r}")
    return k


@dataclass
class RunManifest:
    """Summary of one run.  ``outputs`` holds ``(kind, path)`` with paths relative to the output directory."""

    config_hash: str
    tool_version: str
    mode: str
    outputs: list = field(default_factory=list)
    wall_time: float = 0.0
    threads: int = 1
    results: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "tool_version": self.tool_version,
            "mode": self.mode,
            "outputs": [{"kind": k, "path": p} for k, p in self.outputs],
            "wall_time": self.wall_time,
            "threads": self.threads,
            "results": self.results,
            "config": self.config,
        }


def _random_tiles(spec):
    if isinstance(spec, RandomTile):
        return [spec]
    if isinstance(spec, Sum):
        return [t for term in spec.terms for t in _random_tiles(term)]
    return []


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return path


def _run_flow(cfg: FlowConfig, out: Path, outputs: list) -> dict:
    for i, tile in enumerate(_random_tiles(cfg.spec)):
        name = "random_weight.pfh" if i == 0 else f"random_weight_{i}.pfh"
        write_pfh1(ScalarField(cfg.grid, tile.weight(cfg.grid.coords())), out / name)
        outputs.append(("random_weight", name))
    result = run_flow(cfg, out_dir=out)
    result.trace.to_csv(out / "trace.csv")
    outputs.append(("energy_trace", "trace.csv"))
    outputs.extend(("snapshot", p.name) for p in result.snapshots)
    last = result.trace.records[-1].energy
    return {
        "terminal_normalized_energy": last.normalized,
        "terminal_total_energy": last.total,
        "records": len(result.trace),
        "stiffness": cfg.stiffness(),
    }


def _homogenized(spec, n, u_grid=None):
    if isinstance(spec, Tabulated) and u_grid is None:
        return homogenize(spec, n, np.asarray(spec.u_samples))
    return homogenize(spec, n, u_grid)


def _run_homogenize(job, out, outputs):
    W = _homogenized(job.spec, job.cell_quadrature_n, np.linspace(job.u_min, job.u_max, job.u_points))
    write_tabulated_csv(W, out / "whom.csv")
    outputs.append(("homogenized_potential", "whom.csv"))
    std = (W.u_samples**2 - 1.0) ** 2 / 4.0
    return {
        "c_hom": c_hom(W),
        "whom_at_minus_one": float(W(np.array([-1.0]))[0]),
        "whom_at_plus_one": float(W(np.array([1.0]))[0]),
        "sup_deviation_from_standard_well": float(np.max(np.abs(W.values - std))),
    }


def _run_profile(job, out, outputs):
    W = _homogenized(job.spec, job.cell_quadrature_n)
    x = np.linspace(job.x_min, job.x_max, job.x_points)
    phi = optimal_profile(W, x)
    _write_rows(out / "profile.csv", ["x", "phi"], zip(map(float, x), map(float, phi)))
    outputs.append(("optimal_profile", "profile.csv"))
    return {"c_hom": c_hom(W)}


def _run_counterexample(cfg, out, outputs):
    e = voids_counterexample_energy(cfg)
    scaled = e * cfg.eps**3 / cfg.delta**2
    _write_rows(out / "counterexample.csv", ["eps", "delta", "energy", "scaled_energy"], [(cfg.eps, cfg.delta, e, scaled)])
    outputs.append(("counterexample", "counterexample.csv"))
    return {
        "energy": e,
        "scaled_energy": scaled,
        "closed_form_energy": voids_energy_closed_form(cfg),
        "leading_constant": voids_leading_constant(cfg.alpha, cfg.psi_sign),
    }


def _run_stochastic(job, out, outputs, threads):
    stats = stochastic_discrepancy(
        job.n, job.m, job.d, job.dist, job.trials, job.seed, p=job.p, workers=threads
    )
    _write_rows(out / "discrepancy.csv", ["trial", "D"], ((t, float(v)) for t, v in enumerate(stats.samples)))
    outputs.append(("discrepancy_samples", "discrepancy.csv"))
    return {
        "n_cells": stats.n_cells,
        "m_sub": stats.m_sub,
        "trials": stats.trials,
        "empirical_mean": stats.empirical_mean,
        "empirical_tail_freq": stats.empirical_tail_freq,
        "bound_mean": stats.bound_mean,
        "bound_tail": stats.bound_tail,
        "std_error": stats.std_error,
    }


def _run_energy(job, out, outputs):
    probe = FlowConfig(eps=job.eps, spec=job.spec, grid=job.grid, initial=job.initial, seed=job.seed, steps=0)
    u = initial_field(probe)
    if job.tv:
        e = energy_tv(u, job.eps, job.delta, job.spec, job.gradient)
    else:
        e = energy(u, job.eps, job.spec, job.gradient)
    trace = EnergyTrace()
    trace.append(0, 0.0, e)
    trace.to_csv(out / "energy.csv")
    outputs.append(("energy", "energy.csv"))
    return {
        "gradient_part": e.gradient_part,
        "potential_part": e.potential_part,
        "tv_part": e.tv_part,
        "total": e.total,
        "normalized": e.normalized,
    }


def run(config: ParsedConfig, out_dir, threads: int | None = None) -> RunManifest:
    """Run ``config``, writing every output and ``manifest.json`` under ``out_dir``."""
    threads = thread_limit() if threads is None else int(threads)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    outputs: list = []
    t0 = time.perf_counter()
    target = config.target
    if config.mode == "flow":
        results = _run_flow(target, out, outputs)
    elif config.mode == "homogenize":
        results = _run_homogenize(target, out, outputs)
    elif config.mode == "profile":
        results = _run_profile(target, out, outputs)
    elif config.mode == "counterexample":
        results = _run_counterexample(target, out, outputs)
    elif config.mode == "stochastic":
        results = _run_stochastic(target, out, outputs, threads)
    elif config.mode == "energy":
        results = _run_energy(target, out, outputs)
    else:  # parse_config only admits the modes above
        raise ConfigError(f"mode: unknown value {config.mode!r}")
    manifest = RunManifest(
        config_hash=config_hash(config.document),
        tool_version=__version__,
        mode=config.mode,
        outputs=outputs,
        wall_time=time.perf_counter() - t0,
        threads=threads,
        results=results,
        config=config.document,
    )
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest
