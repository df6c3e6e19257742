"""Desk-scale verification experiments.

* the one-dimensional shifting-wells ansatz whose energy turns negative when
  ``eps^{3/2} << delta << eps``;
* Monte-Carlo concentration of the cell-average discrepancy of i.i.d. tile
  weights;
* transverse min/max envelopes of a 2D phase field.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .grid import ScalarField

__all__ = [
    "CounterexampleConfig",
    "DiscrepancyStats",
    "voids_counterexample_energy",
    "voids_energy_closed_form",
    "voids_leading_constant",
    "stochastic_discrepancy",
    "interface_envelope",
]


@dataclass(frozen=True)
class CounterexampleConfig:
    """Ansatz ``phi(x) = 1 - (delta/eps)^2 psi(x/delta)`` on ``(0, 1)``.

    ``psi(z) = psi_sign * alpha * sin(2 pi z)``.  The potential is
    ``W(z, u) = (u^2 - b(z))^2 - 1/4`` with ``b = 1/2`` on ``(0, 1/2)`` and
    ``b = 3/2`` on ``(1/2, 1)`` (period 1).  With ``psi_sign = +1`` the
    perturbation pulls ``phi`` below 1 where the well sits at
    ``sqrt(1/2)`` and above 1 where it sits at ``sqrt(3/2)``, which is the
    orientation that lowers the energy.
    """

    eps: float = 0.01
    delta: float = 0.005
    alpha: float = 0.03
    n_1d: int = 200_000
    psi_sign: int = 1

    def __post_init__(self):
        if not (self.eps > 0 and self.delta > 0 and self.alpha >= 0):
            raise ValueError("eps and delta must be > 0 and alpha >= 0")
        if not self.delta < 1:
            raise ValueError("delta must be < 1")
        if self.psi_sign not in (1, -1):
            raise ValueError("psi_sign must be +1 or -1")
        if self.n_1d * self.delta < 16:
            raise ValueError(
                f"n_1d={self.n_1d} resolves delta={self.delta} with fewer than 16 nodes per period"
            )


def voids_counterexample_energy(cfg: CounterexampleConfig) -> float:
    """Midpoint-rule value of ``int_0^1 (eps/2)|phi'|^2 + W(x/delta, phi)/eps dx``."""
    eps, delta = cfg.eps, cfg.delta
    amp = cfg.psi_sign * cfg.alpha
    eta = (delta / eps) ** 2
    x = (np.arange(cfg.n_1d) + 0.5) / cfg.n_1d
    z = x / delta
    frac = z - np.floor(z)
    b = np.where(frac < 0.5, 0.5, 1.5)
    phi = 1.0 - eta * amp * np.sin(2 * np.pi * z)
    dphi = -eta * amp * 2 * np.pi * np.cos(2 * np.pi * z) / delta
    integrand = 0.5 * eps * dphi**2 + ((phi**2 - b) ** 2 - 0.25) / eps
    return float(integrand.mean())


def voids_leading_constant(alpha: float, psi_sign: int = 1) -> float:
    """``int_0^1 |psi'|^2/2 - 4 (1 - b) psi dz`` for ``psi = psi_sign alpha sin(2 pi z)``.

    Equals ``alpha^2 pi^2 - 4 psi_sign alpha / pi``; multiplied by
    ``delta^2/eps^3`` this is the leading term of the ansatz energy.
    """
    return alpha**2 * np.pi**2 - 4.0 * psi_sign * alpha / np.pi


def voids_energy_closed_form(cfg: CounterexampleConfig) -> float:
    """Exact continuum energy of the ansatz when ``1/delta`` is an integer.

    Expanding ``W(z, 1 - s) = 2 (1 - b)(s^2 - 2 s) + s^2 (s - 2)^2`` with
    ``s = eta psi`` and integrating term by term over one period gives

        delta^2/eps^3 (alpha^2 pi^2 - 4 sign alpha / pi)
            + (2 eta^2 alpha^2 + 3/8 eta^4 alpha^4) / eps,   eta = (delta/eps)^2.
    """
    eps, delta, a = cfg.eps, cfg.delta, cfg.alpha
    eta = (delta / eps) ** 2
    lead = delta**2 / eps**3 * voids_leading_constant(a, cfg.psi_sign)
    return lead + (2 * eta**2 * a**2 + 0.375 * eta**4 * a**4) / eps


@dataclass(frozen=True)
class DiscrepancyStats:
    n_cells: int
    m_sub: int
    trials: int
    empirical_mean: float
    empirical_tail_freq: float
    bound_mean: float
    bound_tail: float
    std_error: float
    samples: np.ndarray


def _draw(rng, dist, p, shape):
    if dist == "uniform01":
        return rng.random(shape)
    if dist == "bernoulli":
        return (rng.random(shape) < p).astype(float)
    raise ValueError(f"unknown distribution {dist!r}; expected 'uniform01' or 'bernoulli'")


def stochastic_discrepancy(
    n: int,
    m: int,
    d: int = 2,
    dist: str = "uniform01",
    trials: int = 200,
    seed: int = 0,
    p: float | None = None,
    workers: int = 1,
) -> DiscrepancyStats:
    """Monte-Carlo law of ``D = n^-d sum_i |m^-d sum_j q_ij - p|``.

    ``n^d`` cells each hold ``m^d`` i.i.d. weights in ``[0, 1]`` with mean
    ``p`` (``1/2`` for ``uniform01``; the success probability for
    ``bernoulli``).  Trial ``t`` draws from a stream spawned from ``seed``
    with key ``t``, so results do not depend on trial order or on how many
    ``workers`` threads share the trials.
    """
    if n < 1 or m < 1 or d < 1 or trials < 1 or workers < 1:
        raise ValueError("n, m, d, trials and workers must be >= 1")
    if dist == "uniform01":
        mean = 0.5
    elif dist == "bernoulli":
        if p is None or not 0 <= p <= 1:
            raise ValueError("bernoulli needs 0 <= p <= 1")
        mean = p
    else:
        raise ValueError(f"unknown distribution {dist!r}; expected 'uniform01' or 'bernoulli'")
    streams = np.random.SeedSequence(seed).spawn(trials)

    def one_trial(ss):
        q = _draw(np.random.default_rng(ss), dist, mean, (n**d, m**d))
        return np.mean(np.abs(q.mean(axis=1) - mean))

    if workers == 1:
        D = np.array([one_trial(ss) for ss in streams])
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            D = np.array(list(pool.map(one_trial, streams)))
    threshold = m ** (-d / 2)
    return DiscrepancyStats(
        n_cells=n**d,
        m_sub=m,
        trials=trials,
        empirical_mean=float(D.mean()),
        empirical_tail_freq=float(np.mean(D >= threshold)),
        bound_mean=threshold,
        bound_tail=float(np.exp(-0.3 * n**d)),
        std_error=float(D.std(ddof=1) / np.sqrt(trials)) if trials > 1 else float("nan"),
        samples=D,
    )


def interface_envelope(u: ScalarField, axis: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Min and max of ``u`` over the transverse direction, for each index along ``axis``."""
    if u.grid.dim != 2:
        raise ValueError("interface_envelope needs a 2D field")
    if axis not in (0, 1):
        raise ValueError("axis must be 0 or 1")
    other = 1 - axis
    return u.values.min(axis=other), u.values.max(axis=other)
