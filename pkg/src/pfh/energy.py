"""Discrete inhomogeneous Modica-Mortola energies and compatibility diagnostics.

All integrals are node sums ``sum f(x_j) h^d``, which on a periodic grid is
both the trapezoid and the midpoint rule.  The gradient term uses centered
differences by default; ``gradient="spectral"`` evaluates the same term as
the exact quadratic form of the trigonometric interpolant, which is the
energy whose L2 gradient the spectral stepper follows.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .grid import GridSpec, ScalarField, forward_transform, gradient_components, laplacian_symbol
from .potentials import HomogenizedPotential, PotentialSpec

__all__ = [
    "EnergyBreakdown",
    "EnergyRecord",
    "EnergyTrace",
    "CellPartition",
    "LowerBoundReport",
    "ResolutionWarning",
    "energy",
    "energy_tv",
    "gradient_energy",
    "compatibility_gap",
    "homogenization_lower_bound",
    "poincare_constant",
    "lipschitz_cell_moment",
    "homogenized_well_checks",
]


class ResolutionWarning(UserWarning):
    """Grid spacing too coarse for the transition layer width."""


@dataclass(frozen=True)
class EnergyBreakdown:
    gradient_part: float
    potential_part: float
    tv_part: float
    total: float
    normalized: float

    @property
    def raw(self) -> float:
        return self.total


def _check_resolution(grid: GridSpec, eps: float):
    if grid.h > eps / 2:
        warnings.warn(
            f"grid spacing h={grid.h:.4g} exceeds eps/2={eps / 2:.4g}; the transition layer is under-resolved",
            ResolutionWarning,
            stacklevel=3,
        )


def gradient_energy(u: ScalarField, scheme: str = "fd") -> float:
    """``int |grad u|^2 dx`` with centered differences or the spectral quadratic form."""
    grid = u.grid
    if scheme == "fd":
        comps = gradient_components(u)
        return float(sum(np.sum(c * c) for c in comps) * grid.cell_volume)
    if scheme == "spectral":
        c = forward_transform(u).coefficients
        return float(np.sum(-laplacian_symbol(grid) * np.abs(c) ** 2) * grid.volume)
    raise ValueError(f"unknown gradient scheme {scheme!r}; expected 'fd' or 'spectral'")


def _breakdown(grid, grad, pot, tv) -> EnergyBreakdown:
    total = grad + pot + tv
    return EnergyBreakdown(grad, pot, tv, total, total / grid.L ** (grid.dim - 1))


def energy(u: ScalarField, eps: float, spec: PotentialSpec, gradient: str = "fd") -> EnergyBreakdown:
    """Discrete ``int (eps/2)|grad u|^2 + W(x, u)/eps dx``.

    ``normalized`` divides the raw total by ``L^(d-1)`` so that two straight
    interfaces across the periodic square report ``2 c_hom``.
    """
    if not eps > 0:
        raise ValueError("eps must be > 0")
    grid = u.grid
    _check_resolution(grid, eps)
    grad = 0.5 * eps * gradient_energy(u, gradient)
    pot = float(np.sum(spec.W(grid.coords(), u.values)) * grid.cell_volume / eps)
    return _breakdown(grid, grad, pot, 0.0)


def energy_tv(
    u: ScalarField, eps: float, delta: float, spec: PotentialSpec, gradient: str = "fd"
) -> EnergyBreakdown:
    """Energy with the added total-variation term ``sqrt(delta/eps) int |grad u| dx``."""
    if not delta > 0:
        raise ValueError("delta must be > 0")
    base = energy(u, eps, spec, gradient)
    comps = gradient_components(u)
    tv_raw = float(np.sum(np.sqrt(sum(c * c for c in comps))) * u.grid.cell_volume)
    tv = np.sqrt(delta / eps) * tv_raw
    return _breakdown(u.grid, base.gradient_part, base.potential_part, tv)


# -- traces -----------------------------------------------------------------

_TRACE_HEADER = ["step", "time", "gradient_part", "potential_part", "tv_part", "total", "normalized"]


@dataclass(frozen=True)
class EnergyRecord:
    step: int
    time: float
    energy: EnergyBreakdown


@dataclass
class EnergyTrace:
    records: list = field(default_factory=list)

    def append(self, step: int, time: float, e: EnergyBreakdown):
        self.records.append(EnergyRecord(step, time, e))

    def __len__(self):
        return len(self.records)

    @property
    def steps(self) -> np.ndarray:
        return np.array([r.step for r in self.records])

    @property
    def normalized(self) -> np.ndarray:
        return np.array([r.energy.normalized for r in self.records])

    @property
    def total(self) -> np.ndarray:
        return np.array([r.energy.total for r in self.records])

    def to_csv(self, path) -> Path:
        path = Path(path)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(_TRACE_HEADER)
            for r in self.records:
                e = r.energy
                w.writerow(
                    [r.step]
                    + [repr(float(v)) for v in (r.time, e.gradient_part, e.potential_part, e.tv_part, e.total, e.normalized)]
                )
        return path

    @classmethod
    def from_csv(cls, path) -> "EnergyTrace":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header != _TRACE_HEADER:
                raise ValueError(f"{path}: unexpected header {header}")
            trace = cls()
            for row in reader:
                vals = [float(v) for v in row[1:]]
                trace.append(int(row[0]), vals[0], EnergyBreakdown(*vals[1:]))
        return trace


# -- cell partitions and compatibility ----------------------------------------


class CellPartition:
    """Tiling of the periodic grid by axis-aligned squares of side ``side``.

    Cell ``i`` along an axis owns nodes ``i*m, ..., (i+1)*m - 1`` with
    ``m = side / h``, i.e. the pixels ``[x_j, x_j + h)`` of its nodes.
    """

    def __init__(self, grid: GridSpec, side: float):
        m = side / grid.h
        per_axis = grid.L / side
        if abs(m - round(m)) > 1e-9 * max(m, 1) or round(m) < 1:
            raise ValueError(f"cell side {side} is not a whole number of grid spacings h={grid.h}")
        if abs(per_axis - round(per_axis)) > 1e-9 * per_axis:
            raise ValueError(f"cell side {side} does not divide the period L={grid.L}")
        self.grid = grid
        self.side = float(side)
        self.m = int(round(m))
        self.per_axis = int(round(per_axis))

    @property
    def n_cells(self) -> int:
        return self.per_axis**self.grid.dim

    @property
    def diameter(self) -> float:
        return np.sqrt(self.grid.dim) * self.side

    @property
    def R(self) -> float:
        """Diameter bound in units of the cell side."""
        return np.sqrt(self.grid.dim)

    @property
    def cell_volume(self) -> float:
        return self.side**self.grid.dim

    def node_ranges(self, i: int) -> list[range]:
        """Node index ranges (one per axis) of the cell with flat index ``i``."""
        idx = np.unravel_index(i, (self.per_axis,) * self.grid.dim)
        return [range(k * self.m, (k + 1) * self.m) for k in idx]

    def cell_ids(self) -> np.ndarray:
        """Flat cell index of every node."""
        ax = np.arange(self.grid.n) // self.m
        grids = np.meshgrid(*([ax] * self.grid.dim), indexing="ij")
        return np.ravel_multi_index(grids, (self.per_axis,) * self.grid.dim)

    def reduce_sum(self, values: np.ndarray) -> np.ndarray:
        """Per-cell sums of a nodal array, shape ``(per_axis,)*dim`` flattened."""
        P, m = self.per_axis, self.m
        if self.grid.dim == 1:
            return values.reshape(P, m).sum(axis=1)
        return values.reshape(P, m, P, m).sum(axis=(1, 3)).ravel()

    def reduce_mean(self, values: np.ndarray) -> np.ndarray:
        return self.reduce_sum(values) / self.m**self.grid.dim

    def broadcast(self, per_cell: np.ndarray) -> np.ndarray:
        """Expand per-cell values back to the nodes."""
        P, m = self.per_axis, self.m
        if self.grid.dim == 1:
            return np.repeat(per_cell, m)
        return np.repeat(np.repeat(per_cell.reshape(P, P), m, axis=0), m, axis=1)


def compatibility_gap(
    spec: PotentialSpec,
    W: HomogenizedPotential,
    part: CellPartition,
    u_probe=None,
    M: float = 1.5,
    points: str = "midpoint",
) -> float:
    """``sum_i max_u |int_{Q_i} W(x, u) - W_hom(u) dx|`` over constant probes ``u``.

    The supremum over cell-wise constant functions decouples into a maximum
    per cell.  ``points="midpoint"`` evaluates ``W`` at the pixel centres
    ``x_j + h/2``; ``points="nodes"`` uses the grid nodes themselves.
    """
    grid = part.grid
    u_probe = np.linspace(-M, M, 101) if u_probe is None else np.asarray(u_probe, dtype=float)
    if np.any(np.abs(u_probe) > M + 1e-12):
        raise ValueError("probe values must lie in [-M, M]")
    if points == "midpoint":
        x = grid.coords() + 0.5 * grid.h
    elif points == "nodes":
        x = grid.coords()
    else:
        raise ValueError(f"unknown quadrature points {points!r}")
    w_hom = W(u_probe)
    best = np.zeros(part.n_cells)
    for ui, wh in zip(u_probe, w_hom):
        integrals = part.reduce_sum(spec.W(x, ui) - wh) * grid.cell_volume
        np.maximum(best, np.abs(integrals), out=best)
    return float(best.sum())


def poincare_constant(u: ScalarField, part: CellPartition, length: float | None = None) -> float:
    """Worst-cell ratio ``int |u - <u>|^2 / (length^2 int |grad u|^2)`` for this ``u``.

    Raises if a cell carries oscillation invisible to the centered difference
    (zero discrete gradient but non-zero variance).
    """
    length = part.side if length is None else length
    vals = u.values
    mean = part.broadcast(part.reduce_mean(vals))
    var = part.reduce_sum((vals - mean) ** 2)
    grad = part.reduce_sum(sum(c * c for c in gradient_components(u)))
    flat = grad <= 0
    if np.any(var[flat] > 1e-28 * max(1.0, float(np.max(var)))):
        raise ValueError("Poincare inequality fails on a cell: zero discrete gradient with non-zero variance")
    ratio = np.where(flat, 0.0, var / np.where(flat, 1.0, grad * length**2))
    return float(ratio.max())


def lipschitz_cell_moment(spec: PotentialSpec, part: CellPartition, M: float, p: float = 2.0) -> float:
    """``max_i <L(x)^p>_{Q_i}`` for the pointwise Lipschitz bound on ``[-M, M]``."""
    L = spec.lipschitz_field(part.grid.coords(), M)
    return float(part.reduce_mean(L**p).max())


def homogenized_well_checks(W: HomogenizedPotential, tol: float = 1e-8, gamma: float = 0.9) -> dict:
    """Runtime checks of the structural conditions on ``W_hom``.

    Keys: ``wells_zero`` (``W(+-1) ~ 0``), ``min_at_wells`` (no sample below
    ``-tol``), ``positive_inside`` (``W > 0`` on samples in ``(-1, 1)``),
    ``monotone_near_wells`` (decreasing on ``(gamma, 1)`` and increasing on
    ``(-1, -gamma)``) and ``lipschitz`` (finite slope bound on ``[-1, 1]``).
    """
    u = np.linspace(-1.0, 1.0, 4001)
    w = W(u)
    inner = (u > -1) & (u < 1)
    right = u[(u > gamma) & (u < 1)]
    left = u[(u > -1) & (u < -gamma)]
    slope = W.derivative(u)
    return {
        "wells_zero": bool(abs(float(W(np.array([-1.0]))[0])) <= tol and abs(float(W(np.array([1.0]))[0])) <= tol),
        "min_at_wells": bool(np.min(W.values) >= -tol),
        "positive_inside": bool(np.all(w[inner] > 0)),
        "monotone_near_wells": bool(np.all(np.diff(W(right)) <= tol) and np.all(np.diff(W(left)) >= -tol)),
        "lipschitz": float(np.max(np.abs(slope))),
    }


@dataclass(frozen=True)
class LowerBoundReport:
    """Both sides of the cell-wise lower bound, summed over cells."""

    lhs: float
    rhs: float
    slack: float
    min_cell_slack: float
    C_P: float
    C: float
    lipschitz_hom: float
    gradient_integral: float
    penalty: float
    compatibility: float


def homogenization_lower_bound(
    u: ScalarField,
    eps: float,
    delta: float,
    alpha: float,
    spec: PotentialSpec,
    W: HomogenizedPotential,
    part: CellPartition,
    M: float | None = None,
) -> LowerBoundReport:
    """Evaluate the inhomogeneous cell energy against its homogenized lower bound.

    Per cell ``Q_i`` the bound reads

        int (eps/2)|grad u|^2 + W(x,u)/eps
            >= int (1 - C_P alpha)(eps/2)|grad u|^2 + W_hom(u)/eps
               - C (delta/eps)^2 |Q_i| / (alpha eps)
               - |int W(x,<u>) - W_hom(<u>)| / eps

    ``C_P`` is the worst-cell Poincare ratio of ``u`` at length ``delta`` and
    ``C = max_i <(L(x) + L_hom)^2>_{Q_i} / 2`` with ``L`` the pointwise
    Lipschitz bound of ``W`` and ``L_hom`` that of ``W_hom`` on ``[-M, M]``.
    With these measured constants every step of the bound holds for the
    discrete sums, so the slack is non-negative up to rounding.
    """
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    if not eps > 0 or not delta > 0:
        raise ValueError("eps and delta must be > 0")
    grid = part.grid
    if u.grid != grid:
        raise ValueError("field grid does not match the partition grid")
    vals = u.values
    M = max(1.0, float(np.max(np.abs(vals)))) if M is None else float(M)
    if np.max(np.abs(vals)) > M:
        raise ValueError("field exceeds [-M, M]")
    x = grid.coords()
    dv = grid.cell_volume

    grad_cell = part.reduce_sum(sum(c * c for c in gradient_components(u))) * dv
    w_delta = part.reduce_sum(spec.W(x, vals)) * dv
    w_hom = part.reduce_sum(W(vals)) * dv
    means = part.reduce_mean(vals)
    mean_nodes = part.broadcast(means)
    compat = np.abs(part.reduce_sum(spec.W(x, mean_nodes)) * dv - W(means) * part.cell_volume)

    C_P = poincare_constant(u, part, delta)
    us = np.unique(np.concatenate([np.linspace(-M, M, 8001), W.u_samples[np.abs(W.u_samples) <= M]]))
    L_hom = float(np.max(np.abs(W.derivative(us))))
    L_x = spec.lipschitz_field(x, M)
    C = 0.5 * float(part.reduce_mean((L_x + L_hom) ** 2).max())

    penalty = C * (delta / eps) ** 2 / (alpha * eps) * part.cell_volume
    lhs_cell = 0.5 * eps * grad_cell + w_delta / eps
    rhs_cell = (1.0 - C_P * alpha) * 0.5 * eps * grad_cell + w_hom / eps - penalty - compat / eps
    lhs, rhs = float(lhs_cell.sum()), float(rhs_cell.sum())
    return LowerBoundReport(
        lhs=lhs,
        rhs=rhs,
        slack=lhs - rhs,
        min_cell_slack=float(np.min(lhs_cell - rhs_cell)),
        C_P=C_P,
        C=C,
        lipschitz_hom=L_hom,
        gradient_integral=float(grad_cell.sum()),
        penalty=float(penalty * part.n_cells),
        compatibility=float(compat.sum() / eps),
    )
