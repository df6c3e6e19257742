"""Periodic uniform grids, discrete Fourier transforms and difference operators.

Coordinates follow ``indexing='ij'``: axis 0 of a 2D array is ``x1`` and
axis 1 is ``x2``.  Spectral coefficients use the convention

    f(x) = sum_k c_k exp(2 pi i k . (x - origin) / L)

so a constant field ``c`` has ``c_0 = c`` and all other modes zero.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

__all__ = [
    "GridSpec",
    "ScalarField",
    "Spectrum",
    "forward_transform",
    "inverse_transform",
    "wavenumbers",
    "laplacian_symbol",
    "central_difference_symbol",
    "gradient_components",
    "gradient_squared",
    "write_pfh1",
    "read_pfh1",
]


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid with ``n`` nodes per axis on ``[origin, origin + L)``."""

    n: int
    L: float = 4.0
    dim: int = 2
    origin: float = -2.0

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if self.n < 8 or self.n & (self.n - 1):
            raise ValueError(f"n must be a power of two >= 8, got {self.n}")
        if not self.L > 0:
            raise ValueError(f"L must be > 0, got {self.L}")
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "origin", float(self.origin))

    @property
    def h(self) -> float:
        return self.L / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def cell_volume(self) -> float:
        """Quadrature weight ``h**dim`` of a single node."""
        return self.h**self.dim

    @property
    def volume(self) -> float:
        return self.L**self.dim

    def axis(self) -> np.ndarray:
        """Node coordinates ``origin + j*h`` along one axis."""
        return self.origin + self.h * np.arange(self.n)

    def coords(self) -> np.ndarray:
        """Node coordinates as an array of shape ``(dim, n, ..., n)`` (read-only)."""
        return _coords(self)


@lru_cache(maxsize=32)
def _coords(grid: GridSpec) -> np.ndarray:
    ax = grid.axis()
    out = np.stack(np.meshgrid(*([ax] * grid.dim), indexing="ij"))
    out.flags.writeable = False
    return out


class ScalarField:
    """Immutable real field sampled at the nodes of a :class:`GridSpec`."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: GridSpec, values):
        arr = np.array(values, dtype=np.float64)
        if arr.size != grid.n**grid.dim:
            raise ValueError(f"expected {grid.n**grid.dim} values, got {arr.size}")
        arr = arr.reshape(grid.shape)
        if not np.all(np.isfinite(arr)):
            raise ValueError("field contains non-finite values")
        arr.flags.writeable = False
        self.grid = grid
        self.values = arr

    @classmethod
    def from_function(cls, grid: GridSpec, func) -> "ScalarField":
        """Sample ``func(*coords)`` at the grid nodes."""
        return cls(grid, func(*grid.coords()))

    def with_values(self, values) -> "ScalarField":
        return ScalarField(self.grid, values)

    def __repr__(self):
        return f"ScalarField(grid={self.grid!r}, min={self.values.min():.4g}, max={self.values.max():.4g})"


@dataclass(frozen=True)
class Spectrum:
    """Fourier coefficients stored in FFT order (index ``k mod n`` per axis)."""

    grid: GridSpec
    coefficients: np.ndarray

    def coefficient(self, *k: int) -> complex:
        """Coefficient at integer wavenumber ``k`` with ``-n/2 <= k_j < n/2``."""
        if len(k) != self.grid.dim:
            raise ValueError(f"expected {self.grid.dim} wavenumber indices")
        n = self.grid.n
        for kj in k:
            if not -n // 2 <= kj < n // 2:
                raise IndexError(f"wavenumber {kj} outside [-{n // 2}, {n // 2})")
        return complex(self.coefficients[tuple(kj % n for kj in k)])


def forward_transform(f: ScalarField) -> Spectrum:
    grid = f.grid
    return Spectrum(grid, np.fft.fftn(f.values) / grid.n**grid.dim)


def inverse_transform(s: Spectrum) -> ScalarField:
    grid = s.grid
    vals = np.fft.ifftn(s.coefficients * grid.n**grid.dim).real
    return ScalarField(grid, vals)


def wavenumbers(grid: GridSpec) -> list[np.ndarray]:
    """Integer wavenumbers per axis, broadcast to the full spectral shape."""
    k = np.fft.fftfreq(grid.n, d=1.0 / grid.n)
    return list(np.meshgrid(*([k] * grid.dim), indexing="ij"))


@lru_cache(maxsize=32)
def _laplacian_symbol(grid: GridSpec) -> np.ndarray:
    ksq = sum(k**2 for k in wavenumbers(grid))
    out = -4.0 * np.pi**2 * ksq / grid.L**2
    out.flags.writeable = False
    return out


def laplacian_symbol(grid: GridSpec) -> np.ndarray:
    """Fourier symbol ``-4 pi^2 |xi|^2`` of the Laplacian with ``xi = k / L``."""
    return _laplacian_symbol(grid)


@lru_cache(maxsize=32)
def _central_difference_symbol(grid: GridSpec) -> np.ndarray:
    theta = [2.0 * np.pi * k / grid.n for k in wavenumbers(grid)]
    out = -sum(np.sin(t) ** 2 for t in theta) / grid.h**2
    out.flags.writeable = False
    return out


def central_difference_symbol(grid: GridSpec) -> np.ndarray:
    """Symbol of ``-D^T D`` for the centered difference ``D`` used in the energy.

    This is the exact L2 gradient of ``0.5 * sum |D u|^2 h^d`` and plays the
    role of the Laplacian when an iteration must descend the finite
    difference energy rather than its spectral counterpart.
    """
    return _central_difference_symbol(grid)


def gradient_components(f: ScalarField) -> list[np.ndarray]:
    """Second-order centered periodic differences along every axis."""
    h = f.grid.h
    return [
        (np.roll(f.values, -1, axis=j) - np.roll(f.values, 1, axis=j)) / (2.0 * h)
        for j in range(f.grid.dim)
    ]


def gradient_squared(f: ScalarField) -> ScalarField:
    """Pointwise ``|grad f|^2`` from centered differences."""
    comps = gradient_components(f)
    return ScalarField(f.grid, sum(c * c for c in comps))


# -- PFH1 snapshot format -------------------------------------------------

_MAGIC = b"PFH1"


def write_pfh1(field: ScalarField, path) -> Path:
    """Write ``field`` as an ASCII header line followed by little-endian float64 data."""
    g = field.grid
    header = f"PFH1 {g.dim} {g.n} {g.L!r} {g.origin!r}\n".encode("ascii")
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())
    return path


def read_pfh1(path) -> ScalarField:
    with open(path, "rb") as fh:
        header = fh.readline()
        payload = fh.read()
    parts = header.decode("ascii").split()
    if len(parts) != 5 or parts[0].encode() != _MAGIC:
        raise ValueError(f"{path}: not a PFH1 file")
    dim, n = int(parts[1]), int(parts[2])
    L, origin = float(parts[3]), float(parts[4])
    grid = GridSpec(n=n, L=L, dim=dim, origin=origin)
    expected = n**dim * 8
    if len(payload) != expected:
        raise ValueError(f"{path}: expected {expected} data bytes, got {len(payload)}")
    return ScalarField(grid, np.frombuffer(payload, dtype="<f8"))
