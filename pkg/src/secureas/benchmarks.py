"""Reference schemes: random and energy-based selection with FP beamforming,
and MRT beamforming with greedy selection."""
from __future__ import annotations

import numpy as np

from .beamforming import mrt_directions
from .model import SelectionState, wssr
from .so import SOResult, fp_beamforming, greedy_select

__all__ = ["random_subset", "energy_subset", "random_scheme", "energy_scheme", "mrt_scheme"]


def random_subset(num_antennas, num_rf_chains, rng_seed):
    """Uniformly random ``N``-subset of the antennas, as a binary selection."""
    rng = np.random.default_rng(rng_seed)
    idx = rng.choice(num_antennas, size=num_rf_chains, replace=False)
    return SelectionState.from_indices(np.sort(idx), num_antennas)


def energy_subset(cfg, ch):
    """The ``N`` antennas with the largest legitimate-channel energy ``sum_k |H[m, k]|^2``."""
    energy = np.sum(np.abs(ch.H) ** 2, axis=1)
    order = np.argsort(-energy, kind="stable")
    return SelectionState.from_indices(np.sort(order[: cfg.N]), cfg.M)


def _fp_on(cfg, ch, selection, tol, max_iters):
    # zero the rows the selection switched off (numerical residue only)
    W = selection.s[:, None] * fp_beamforming(cfg, ch, inner_tol=tol, max_iters=max_iters, s=selection.s)
    return SOResult(W, selection, wssr(cfg, ch, W, selection.s))


def random_scheme(cfg, ch, rng_seed, tol=1e-7, max_iters=500) -> SOResult:
    ch.check(cfg)
    return _fp_on(cfg, ch, random_subset(cfg.M, cfg.N, rng_seed), tol, max_iters)


def energy_scheme(cfg, ch, tol=1e-7, max_iters=500) -> SOResult:
    ch.check(cfg)
    return _fp_on(cfg, ch, energy_subset(cfg, ch), tol, max_iters)


def mrt_scheme(cfg, ch) -> SOResult:
    """MRT beams ``sqrt(p / K) h_k / ||h_k||`` over the full array, then greedy selection."""
    ch.check(cfg)
    W = mrt_directions(cfg, ch)
    selection = greedy_select(cfg, ch, W)
    return SOResult(W, selection, wssr(cfg, ch, W, selection.s))
