"""Spatially inhomogeneous double-well potentials and their homogenization.

Every potential is evaluated as ``W(x, u)`` where ``x`` holds physical
coordinates with the axis index first (shape ``(dim, ...)``, as returned by
:meth:`pfh.grid.GridSpec.coords`) and ``u`` broadcasts against ``x[0]``.
A single point is passed as ``x = (x1, x2)`` or ``x = (x1,)``.

Periodic families are written as ``W_delta(x, u) = W(x / delta, u)`` with a
unit periodic cell ``[0, 1]^d`` in the fast variable ``z = x / delta``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np
from scipy.interpolate import CubicSpline

__all__ = [
    "PotentialSpec",
    "Homogeneous",
    "HexWeight",
    "RandomTile",
    "VaryingWells",
    "VaryingExponent",
    "Tabulated",
    "Sum",
    "HomogenizedPotential",
    "eval_W",
    "eval_dW_du",
    "homogenize",
    "c_hom",
    "optimal_profile",
    "keyed_uniform",
    "write_tabulated_csv",
    "read_tabulated_csv",
    "C0",
]

#: Surface tension of the standard well ``(u^2 - 1)^2 / 4``.
C0 = 2.0 * np.sqrt(2.0) / 3.0

DEFAULT_U_GRID = np.linspace(-1.5, 1.5, 1201)


def _components(x):
    """Return ``(x1, x2)`` from a coordinate stack; ``x2 = 0`` in 1D."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        return x, np.zeros_like(x)
    if x.shape[0] == 1:
        return x[0], np.zeros_like(x[0])
    if x.shape[0] == 2:
        return x[0], x[1]
    raise ValueError(f"coordinates must have leading axis of length 1 or 2, got shape {x.shape}")


def _double_well(u):
    return 0.25 * (u * u - 1.0) ** 2


def _double_well_du(u):
    return u * (u * u - 1.0)


def _well_lipschitz(M):
    # max |u^3 - u| on [-M, M]
    return max(abs(M**3 - M), 2.0 / (3.0 * np.sqrt(3.0)) if M >= 1 / np.sqrt(3.0) else M - M**3)


class PotentialSpec:
    """Base class.  Subclasses are frozen dataclasses."""

    family: ClassVar[str] = ""

    def W(self, x, u):
        raise NotImplementedError

    def dW(self, x, u):
        raise NotImplementedError

    @property
    def x_dependent(self) -> bool:
        return True

    def cell_average(self, u, n: int) -> np.ndarray:
        """Midpoint-rule average of ``W(z, u)`` over the unit cell in ``z = x/delta``."""
        z = (np.arange(n) + 0.5) / n
        zz = np.stack(np.meshgrid(z, z, indexing="ij")).reshape(2, -1)
        x = self._cell_scale() * zz
        u = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.empty(u.shape)
        for i, ui in enumerate(u):
            out[i] = self.W(x, ui).mean()
        return out

    def _cell_scale(self) -> float:
        return self.delta

    def lipschitz_field(self, x, M: float) -> np.ndarray:
        """``L(x) >= sup_{|u| <= M} |dW/du(x, u)|`` evaluated at ``x``."""
        x1, _ = _components(x)
        us = np.linspace(-M, M, 2001)
        out = np.zeros(np.shape(x1))
        for ui in us:
            np.maximum(out, np.abs(self.dW(x, ui)), out=out)
        return out

    def max_curvature(self, M: float, n: int = 64) -> float:
        """Estimate of ``sup |d^2W/du^2|`` over a cell and ``|u| <= M``."""
        z = (np.arange(n) + 0.5) / n
        x = self._cell_scale() * np.stack(np.meshgrid(z, z, indexing="ij")).reshape(2, -1)
        us = np.linspace(-M, M, 241)
        hu = 1e-4
        best = 0.0
        for ui in us:
            d2 = (self.dW(x, ui + hu) - self.dW(x, ui - hu)) / (2 * hu)
            best = max(best, float(np.max(np.abs(d2))))
        return best


def eval_W(spec: PotentialSpec, x, u):
    """Potential value ``W_delta(x, u)``."""
    return spec.W(x, u)


def eval_dW_du(spec: PotentialSpec, x, u):
    """Derivative of the potential with respect to the phase ``u``."""
    return spec.dW(x, u)


@dataclass(frozen=True)
class Homogeneous(PotentialSpec):
    """The standard double well ``(u^2 - 1)^2 / 4``."""

    family: ClassVar[str] = "homogeneous"

    def W(self, x, u):
        x1, _ = _components(x)
        return _double_well(np.asarray(u, dtype=float)) + np.zeros_like(x1)

    def dW(self, x, u):
        x1, _ = _components(x)
        return _double_well_du(np.asarray(u, dtype=float)) + np.zeros_like(x1)

    @property
    def x_dependent(self) -> bool:
        return False

    def cell_average(self, u, n=256):
        return _double_well(np.atleast_1d(np.asarray(u, dtype=float)))

    def lipschitz_field(self, x, M):
        x1, _ = _components(x)
        return np.full(np.shape(x1), _well_lipschitz(M))

    def max_curvature(self, M, n=64):
        return max(abs(3 * M * M - 1), 1.0)


class _WeightedWell(PotentialSpec):
    """Shared code for ``weight(x) * (u^2 - 1)^2 / 4``."""

    def weight(self, x):
        raise NotImplementedError

    def W(self, x, u):
        return self.weight(x) * _double_well(np.asarray(u, dtype=float))

    def dW(self, x, u):
        return self.weight(x) * _double_well_du(np.asarray(u, dtype=float))

    def lipschitz_field(self, x, M):
        return self.weight(x) * _well_lipschitz(M)


@dataclass(frozen=True)
class HexWeight(_WeightedWell):
    """Double well scaled by a weight with hexagonal symmetry.

    ``w~(z) = a + b * sum_i sin^2(pi z_i)`` along the three directions
    ``z1 = x1``, ``z2 = (x1 + sqrt(3) x2)/2``, ``z3 = (x1 - sqrt(3) x2)/2``,
    normalized by its mean ``a + 3b/2`` so the homogenized potential is the
    standard well.  The unit square is not a period of ``w`` but its
    average over any unit square is exactly ``a + 3b/2``: the cross term
    ``cos(pi x1) cos(pi sqrt(3) x2)`` integrates to zero in ``x1``.
    """

    family: ClassVar[str] = "hex"
    a: float = 0.228
    b: float = -0.1
    delta: float = 0.1

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be > 0")
        if not self.mean_raw > 0:
            raise ValueError(f"a + 1.5*b must be positive, got {self.mean_raw}")

    @property
    def mean_raw(self) -> float:
        return self.a + 1.5 * self.b

    def raw_weight(self, x):
        x1, x2 = _components(x)
        z1 = x1 / self.delta
        z2 = x2 / self.delta
        s3 = np.sqrt(3.0)
        total = (
            np.sin(np.pi * z1) ** 2
            + np.sin(np.pi * 0.5 * (z1 + s3 * z2)) ** 2
            + np.sin(np.pi * 0.5 * (z1 - s3 * z2)) ** 2
        )
        return self.a + self.b * total

    def weight(self, x):
        return self.raw_weight(x) / self.mean_raw

    def cell_average(self, u, n=256):
        z = (np.arange(n) + 0.5) / n
        zz = self.delta * np.stack(np.meshgrid(z, z, indexing="ij"))
        return self.weight(zz).mean() * _double_well(np.atleast_1d(np.asarray(u, dtype=float)))

    def max_curvature(self, M, n=64):
        # the sine sum ranges over [0, 9/4]
        wmax = max(self.a, self.a + 2.25 * self.b) / self.mean_raw
        return wmax * max(abs(3 * M * M - 1), 1.0)


def keyed_uniform(seed: int, keys: np.ndarray) -> np.ndarray:
    """Uniform [0, 1) variates, one per row of integer ``keys``.

    Each value depends only on ``(seed, key)`` through
    :class:`numpy.random.SeedSequence` hashing, so a tile's draw does not
    depend on how many other tiles exist or in which order they are made.
    """
    keys = np.atleast_2d(np.asarray(keys, dtype=np.int64))
    out = np.empty(len(keys))
    for r, key in enumerate(keys):
        state = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)).generate_state(
            1, np.uint64
        )[0]
        out[r] = float(state >> np.uint64(11)) * 2.0**-53
    return out


@dataclass(frozen=True)
class RandomTile(_WeightedWell):
    """Double well scaled by i.i.d. uniform weights on squares of side ``delta``.

    The weight table has ``m_sub`` tiles per axis and repeats periodically;
    tile ``(i, j)`` covers ``[i delta, (i+1) delta) x [j delta, (j+1) delta)``
    in absolute coordinates (indices taken mod ``m_sub``).
    """

    family: ClassVar[str] = "random"
    delta: float = 0.1
    m_sub: int = 40
    low: float = 0.0
    high: float = 2.0
    seed: int = 0
    dim: int = 2
    table: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be > 0")
        if self.m_sub < 1:
            raise ValueError("m_sub must be >= 1")
        if not self.high >= self.low:
            raise ValueError("high must be >= low")
        idx = np.indices((self.m_sub,) * self.dim).reshape(self.dim, -1).T
        q = self.low + (self.high - self.low) * keyed_uniform(self.seed, idx)
        q = q.reshape((self.m_sub,) * self.dim)
        q.flags.writeable = False
        object.__setattr__(self, "table", q)

    def tile_index(self, x):
        # small shift so nodes sitting on a tile edge go to the tile on their right
        comps = _components(x)[: self.dim]
        return tuple(np.floor(np.asarray(c) / self.delta + 1e-9).astype(np.int64) % self.m_sub for c in comps)

    def weight(self, x):
        return self.table[self.tile_index(x)]

    def cell_average(self, u, n=256):
        return self.table.mean() * _double_well(np.atleast_1d(np.asarray(u, dtype=float)))

    def max_curvature(self, M, n=64):
        return float(self.table.max()) * max(abs(3 * M * M - 1), 1.0)


@dataclass(frozen=True)
class VaryingWells(PotentialSpec):
    """Wells at ``u^2 = b(x/delta)``: ``W = ((u^2 - b)^2 + c) / 4`` with ``c = 1 - b^2``.

    ``b(z) = 1 + 0.5 cos(2 pi (z1 + 2 z2))`` averages to 1 and ``c``
    averages to ``-1/8``, so the homogenized potential is the standard well
    even though ``W`` is negative near the shifted wells.
    """

    family: ClassVar[str] = "wells"
    delta: float = 0.1

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be > 0")

    def b(self, x):
        x1, x2 = _components(x)
        return 1.0 + 0.5 * np.cos(2.0 * np.pi * (x1 + 2.0 * x2) / self.delta)

    def c(self, x):
        return 1.0 - self.b(x) ** 2

    def W(self, x, u):
        u = np.asarray(u, dtype=float)
        b = self.b(x)
        return 0.25 * ((u * u - b) ** 2 + 1.0 - b * b)

    def dW(self, x, u):
        u = np.asarray(u, dtype=float)
        return u * (u * u - self.b(x))

    def cell_average(self, u, n=256):
        z = (np.arange(n) + 0.5) / n
        zz = self.delta * np.stack(np.meshgrid(z, z, indexing="ij"))
        b = self.b(zz)
        mb, mb2, mc = b.mean(), (b * b).mean(), (1.0 - b * b).mean()
        u = np.atleast_1d(np.asarray(u, dtype=float))
        return 0.25 * (u**4 - 2.0 * mb * u**2 + mb2 + mc)

    def lipschitz_field(self, x, M):
        b = self.b(x)
        # |u^3 - b u| on [0, M]: endpoint or interior critical point u^2 = b/3
        crit = np.where(b / 3.0 <= M * M, 2.0 * b / 3.0 * np.sqrt(b / 3.0), 0.0)
        return np.maximum(np.abs(M**3 - b * M), crit)

    def max_curvature(self, M, n=64):
        return max(3 * M * M - 0.5, 1.5)


@dataclass(frozen=True)
class VaryingExponent(PotentialSpec):
    """``W = |u^2 - 1|^p(x/delta)`` with ``p(z) = 1.5 + 8.5 cos^2(2 pi (z2 - sin(2 pi z1)))``."""

    family: ClassVar[str] = "exponent"
    delta: float = 0.1

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be > 0")

    def p(self, x):
        x1, x2 = _components(x)
        z1, z2 = x1 / self.delta, x2 / self.delta
        return 1.5 + 8.5 * np.cos(2.0 * np.pi * (z2 - np.sin(2.0 * np.pi * z1))) ** 2

    def W(self, x, u):
        u = np.asarray(u, dtype=float)
        return np.abs(u * u - 1.0) ** self.p(x)

    def dW(self, x, u):
        u = np.asarray(u, dtype=float)
        p = self.p(x)
        s = u * u - 1.0
        a = np.abs(s)
        # p >= 1.5 > 1, so the derivative vanishes at u = +-1; avoid 0**(p-1) warnings
        safe = np.where(a > 0, a, 1.0)
        return np.where(a > 0, p * safe ** (p - 1.0) * np.sign(s) * 2.0 * u, 0.0)


@dataclass(frozen=True)
class Tabulated(PotentialSpec):
    """x-independent potential given by samples, interpolated with a cubic spline on the sample grid."""

    family: ClassVar[str] = "tabulated"
    u_samples: tuple = ()
    values: tuple = ()
    _interp: CubicSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        u = np.asarray(self.u_samples, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if u.ndim != 1 or u.shape != v.shape or len(u) < 2:
            raise ValueError("u_samples and values must be 1D arrays of equal length >= 2")
        if np.any(np.diff(u) <= 0):
            raise ValueError("u_samples must be strictly increasing")
        object.__setattr__(self, "u_samples", tuple(u.tolist()))
        object.__setattr__(self, "values", tuple(v.tolist()))
        object.__setattr__(self, "_interp", CubicSpline(u, v, extrapolate=False))

    @property
    def x_dependent(self) -> bool:
        return False

    @property
    def u_range(self) -> tuple[float, float]:
        return self.u_samples[0], self.u_samples[-1]

    def _check(self, u):
        lo, hi = self.u_range
        if np.any(u < lo) or np.any(u > hi):
            raise ValueError(f"u outside tabulated range [{lo}, {hi}]; extrapolation is not supported")

    def W(self, x, u):
        x1, _ = _components(x)
        u = np.asarray(u, dtype=float)
        self._check(u)
        return self._interp(u) + np.zeros_like(x1)

    def dW(self, x, u):
        x1, _ = _components(x)
        u = np.asarray(u, dtype=float)
        self._check(u)
        return self._interp.derivative()(u) + np.zeros_like(x1)

    def cell_average(self, u, n=256):
        return np.atleast_1d(self.W((0.0,), np.asarray(u, dtype=float)))

    def lipschitz_field(self, x, M):
        x1, _ = _components(x)
        us = np.linspace(-M, M, 4001)
        return np.full(np.shape(x1), float(np.max(np.abs(self.dW((0.0,), us)))))

    def max_curvature(self, M, n=64):
        us = np.linspace(-M, M, 4001)
        return float(np.max(np.abs(self._interp.derivative(2)(us))))


@dataclass(frozen=True)
class Sum(PotentialSpec):
    """Pointwise sum of potentials (each keeps its own length scale)."""

    family: ClassVar[str] = "sum"
    terms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValueError("Sum needs at least one term")

    @property
    def x_dependent(self) -> bool:
        return any(t.x_dependent for t in self.terms)

    def W(self, x, u):
        return sum(t.W(x, u) for t in self.terms)

    def dW(self, x, u):
        return sum(t.dW(x, u) for t in self.terms)

    def cell_average(self, u, n=256):
        return sum(t.cell_average(u, n) for t in self.terms)

    def lipschitz_field(self, x, M):
        return sum(t.lipschitz_field(x, M) for t in self.terms)

    def max_curvature(self, M, n=64):
        return sum(t.max_curvature(M, n) for t in self.terms)


# -- homogenization -----------------------------------------------------------


class HomogenizedPotential:
    """Tabulated cell average ``W_hom(u)`` with a cubic spline interpolant."""

    def __init__(self, u_samples, values, cell_quadrature_n: int = 256):
        self.u_samples = np.asarray(u_samples, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.cell_quadrature_n = int(cell_quadrature_n)
        if np.any(np.diff(self.u_samples) <= 0):
            raise ValueError("u_samples must be strictly increasing")
        self._interp = CubicSpline(self.u_samples, self.values, extrapolate=False)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        lo, hi = self.u_samples[0], self.u_samples[-1]
        if np.any(u < lo) or np.any(u > hi):
            raise ValueError(f"u outside tabulated range [{lo}, {hi}]")
        return self._interp(u)

    def derivative(self, u):
        return self._interp.derivative()(np.asarray(u, dtype=float))

    def as_potential(self) -> Tabulated:
        return Tabulated(self.u_samples, self.values)

    def __repr__(self):
        return (
            f"HomogenizedPotential(u in [{self.u_samples[0]}, {self.u_samples[-1]}], "
            f"{len(self.u_samples)} samples, cell_quadrature_n={self.cell_quadrature_n})"
        )


def homogenize(spec: PotentialSpec, cell_quadrature_n: int = 256, u_grid=None) -> HomogenizedPotential:
    """Cell average of ``W(z, u)`` over one periodic cell, tabulated on ``u_grid``.

    Uses the midpoint rule with ``cell_quadrature_n`` points per axis.
    """
    if cell_quadrature_n < 32:
        raise ValueError("cell_quadrature_n must be >= 32")
    u_grid = DEFAULT_U_GRID if u_grid is None else np.asarray(u_grid, dtype=float)
    if isinstance(spec, Tabulated):
        lo, hi = spec.u_range
        if u_grid[0] < lo or u_grid[-1] > hi:
            raise ValueError(f"u_grid exceeds the tabulated range [{lo}, {hi}]")
    vals = spec.cell_average(u_grid, cell_quadrature_n)
    return HomogenizedPotential(u_grid, vals, cell_quadrature_n)


def c_hom(W, n_points: int = 10_000) -> float:
    """Surface tension ``int_{-1}^{1} sqrt(2 W_hom(u)) du`` by the midpoint rule.

    The midpoint nodes never touch ``u = +-1`` where the square root is not
    differentiable.
    """
    hu = 2.0 / n_points
    u = -1.0 + hu * (np.arange(n_points) + 0.5)
    vals = np.asarray(W(u), dtype=float)
    if vals.min() < -1e-9:
        raise ValueError(f"W_hom is negative on [-1, 1] (min {vals.min():.3e})")
    return float(np.sum(np.sqrt(2.0 * np.clip(vals, 0.0, None))) * hu)


def optimal_profile(W, x_grid, max_step: float = 1e-2, stop: float = 1e-10) -> np.ndarray:
    """Solve ``phi' = sqrt(2 W(phi))``, ``phi(0) = 0`` at the points ``x_grid``.

    Classical RK4 with steps no longer than ``max_step``; once
    ``|phi| >= 1 - stop`` the profile is clamped at the well.
    """
    x_grid = np.asarray(x_grid, dtype=float)
    if float(W(np.array([0.0]))[0]) <= 0.0:
        raise ValueError("W(0) must be positive (degenerate third well at u = 0)")

    def rhs(phi):
        p = min(max(phi, -1.0), 1.0)
        return np.sqrt(2.0 * max(float(W(np.array([p]))[0]), 0.0))

    out = np.empty_like(x_grid)
    for sign in (1.0, -1.0):
        mask = x_grid >= 0 if sign > 0 else x_grid < 0
        if not np.any(mask):
            continue
        idx = np.nonzero(mask)[0]
        order = idx[np.argsort(sign * x_grid[idx])]
        x_prev, phi, done = 0.0, 0.0, False
        for i in order:
            target = x_grid[i]
            if not done:
                dist = abs(target - x_prev)
                steps = max(int(np.ceil(dist / max_step)), 1) if dist > 0 else 0
                dx = sign * dist / steps if steps else 0.0
                for _ in range(steps):
                    k1 = rhs(phi)
                    k2 = rhs(phi + 0.5 * dx * k1)
                    k3 = rhs(phi + 0.5 * dx * k2)
                    k4 = rhs(phi + dx * k3)
                    phi = phi + dx * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
                    if abs(phi) >= 1.0 - stop:
                        phi, done = float(np.sign(phi)), True
                        break
                x_prev = target
            out[i] = phi
    return out


# -- CSV exchange for tabulated potentials -----------------------------------


def write_tabulated_csv(pot, path) -> None:
    """Write ``(u, W)`` pairs from a :class:`Tabulated` or :class:`HomogenizedPotential`."""
    u = np.asarray(pot.u_samples, dtype=float)
    v = np.asarray(pot.values, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["u", "W"])
        for ui, vi in zip(u, v):
            w.writerow([repr(float(ui)), repr(float(vi))])


def read_tabulated_csv(path) -> Tabulated:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["u", "W"]:
        raise ValueError(f"{path}: expected header 'u,W'")
    data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    return Tabulated(data[:, 0], data[:, 1])
