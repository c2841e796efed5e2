"""
Monte Carlo harness: Rayleigh channel generation and paired evaluation of
every scheme over power or RF-chain sweeps.

Channels depend only on ``(rng_seed, realization_index)``, so every scheme
and every sweep point sees the same draws (paired design).  Random
selections use a separate stream keyed additionally by the sweep index.
"""
from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .benchmarks import energy_scheme, mrt_scheme, random_scheme
from .errors import ConfigError, SecureASError
from .model import ChannelSet, SystemConfig, dbm_to_watts, watts_to_dbm
from .pdd import PddConfig, PddTrace, pdd_solve
from .so import so_solve

__all__ = [
    "SCHEMES",
    "ScenarioSpec",
    "CellResult",
    "AggregateResult",
    "gen_channels",
    "run_scenario",
    "desk_profile",
    "full_profile",
]

log = logging.getLogger(__name__)

SCHEMES = ("pdd", "so", "random", "energy", "mrt")
SWEEPS = ("none", "power", "rf")

_CHANNEL_STREAM = 0
_SCHEME_STREAM = 1


@dataclass(frozen=True)
class ScenarioSpec:
    """A Monte Carlo experiment.

    ``sweep_values`` are powers in dBm for ``sweep="power"`` and RF-chain
    counts for ``sweep="rf"``; they are ignored for ``sweep="none"``.
    """

    base: SystemConfig
    path_loss_db: float = -120.0
    sweep: str = "none"
    sweep_values: tuple = ()
    num_realizations: int = 500
    rng_seed: int = 0
    schemes: tuple = SCHEMES
    pdd: PddConfig = field(default_factory=PddConfig)
    fp_tol: float = 1e-7
    fp_max_iters: int = 500
    so_refine: bool = False

    def __post_init__(self):
        if self.sweep not in SWEEPS:
            raise ConfigError(f"sweep must be one of {SWEEPS}, got {self.sweep!r}", "sweep")
        object.__setattr__(self, "sweep_values", tuple(self.sweep_values))
        object.__setattr__(self, "schemes", tuple(self.schemes))
        unknown = set(self.schemes) - set(SCHEMES)
        if unknown or not self.schemes:
            raise ConfigError(f"schemes must be a nonempty subset of {SCHEMES}", "schemes")
        if int(self.num_realizations) != self.num_realizations or self.num_realizations < 1:
            raise ConfigError("num_realizations must be a positive integer", "num_realizations")
        if self.sweep != "none" and not self.sweep_values:
            raise ConfigError(f"a {self.sweep} sweep needs sweep_values", "sweep_values")
        if self.sweep == "rf":
            for n in self.sweep_values:
                if int(n) != n or not 1 <= n < self.base.num_antennas:
                    raise ConfigError(
                        f"every swept N must satisfy 1 <= N < M={self.base.num_antennas}, got {n}",
                        "sweep_values",
                    )
        if self.sweep == "power":
            for v in self.sweep_values:
                if not np.isfinite(v):
                    raise ConfigError("swept powers must be finite dBm values", "sweep_values")

    def points(self):
        """``(sweep_value, SystemConfig)`` for every sweep point."""
        if self.sweep == "power":
            return [(float(v), self.base.replace(power_budget=float(dbm_to_watts(v)))) for v in self.sweep_values]
        if self.sweep == "rf":
            return [(int(n), self.base.replace(num_rf_chains=int(n))) for n in self.sweep_values]
        return [(float(watts_to_dbm(self.base.power_budget)), self.base)]


@dataclass
class CellResult:
    sweep_index: int
    sweep_value: float
    scheme: str
    values: list
    seconds: list
    errors: list = field(default_factory=list)

    @property
    def ok(self):
        return np.array([v for v in self.values if np.isfinite(v)])

    @property
    def n_ok(self):
        return int(self.ok.size)

    @property
    def n_fail(self):
        return len(self.values) - self.n_ok

    @property
    def mean(self):
        return float(self.ok.mean()) if self.n_ok else float("nan")

    @property
    def stderr(self):
        if self.n_ok < 2:
            return 0.0
        return float(self.ok.std(ddof=1) / np.sqrt(self.n_ok))


@dataclass
class AggregateResult:
    spec: ScenarioSpec
    cells: list
    pdd_traces: list
    channel_digests: dict
    paired: bool = True

    def cell(self, sweep_value, scheme) -> CellResult:
        for c in self.cells:
            if c.scheme == scheme and c.sweep_value == sweep_value:
                return c
        raise KeyError((sweep_value, scheme))

    def rows(self):
        """One row per (sweep point, scheme), in sweep then scheme order."""
        return [
            dict(sweep_value=c.sweep_value, scheme=c.scheme, mean_wssr=c.mean, stderr=c.stderr,
                 n_ok=c.n_ok, n_fail=c.n_fail)
            for c in self.cells
        ]

    def same_numbers(self, other: "AggregateResult") -> bool:
        """Equality of every reported number, ignoring wall-clock timings."""
        if len(self.cells) != len(other.cells) or self.channel_digests != other.channel_digests:
            return False
        for a, b in zip(self.cells, other.cells):
            if (a.sweep_value, a.scheme) != (b.sweep_value, b.scheme):
                return False
            if not np.array_equal(np.asarray(a.values), np.asarray(b.values), equal_nan=True):
                return False
        for (ia, ra, ta), (ib, rb, tb) in zip(self.pdd_traces, other.pdd_traces):
            if (ia, ra) != (ib, rb) or ta.objective_per_outer_iter != tb.objective_per_outer_iter:
                return False
        return len(self.pdd_traces) == len(other.pdd_traces)


def gen_channels(cfg: SystemConfig, path_loss_db, rng_seed, realization_index) -> ChannelSet:
    """I.i.d. circularly-symmetric Gaussian channels with variance ``10^(PL/10)``.

    Deterministic in ``(rng_seed, realization_index)``.
    """
    seq = np.random.SeedSequence(int(rng_seed), spawn_key=(_CHANNEL_STREAM, int(realization_index)))
    rng = np.random.default_rng(seq)
    scale = np.sqrt(10.0 ** (path_loss_db / 10.0) / 2.0)

    def draw(cols):
        return scale * (rng.standard_normal((cfg.M, cols)) + 1j * rng.standard_normal((cfg.M, cols)))

    H = draw(cfg.K)
    G = draw(cfg.J)
    return ChannelSet(H, G)


def scheme_seed(rng_seed, sweep_index, realization_index):
    return np.random.SeedSequence(int(rng_seed), spawn_key=(_SCHEME_STREAM, int(sweep_index), int(realization_index)))


def _solve(scheme, cfg, ch, spec, sweep_index, r):
    if scheme == "pdd":
        res = pdd_solve(cfg, ch, spec.pdd)
        return res.report.wssr, res.trace
    if scheme == "so":
        return so_solve(cfg, ch, tol=spec.fp_tol, max_iters=spec.fp_max_iters, refine=spec.so_refine).report.wssr, None
    if scheme == "random":
        seed = scheme_seed(spec.rng_seed, sweep_index, r)
        return random_scheme(cfg, ch, seed, tol=spec.fp_tol, max_iters=spec.fp_max_iters).report.wssr, None
    if scheme == "energy":
        return energy_scheme(cfg, ch, tol=spec.fp_tol, max_iters=spec.fp_max_iters).report.wssr, None
    return mrt_scheme(cfg, ch).report.wssr, None


def _run_realization(spec: ScenarioSpec, r: int):
    """All sweep points and schemes for realization ``r``."""
    out = []
    ch = gen_channels(spec.base, spec.path_loss_db, spec.rng_seed, r)
    digest = ch.digest()
    for i, (_, cfg) in enumerate(spec.points()):
        for scheme in spec.schemes:
            t0 = time.perf_counter()
            try:
                value, trace = _solve(scheme, cfg, ch, spec, i, r)
                error = None
            except (SecureASError, np.linalg.LinAlgError, FloatingPointError, ValueError) as exc:
                value, trace, error = float("nan"), None, f"{type(exc).__name__}: {exc}"
                log.warning("realization %d, point %d, %s failed: %s", r, i, scheme, error)
            out.append((i, scheme, value, time.perf_counter() - t0, trace, error, digest))
    return r, out


def run_scenario(spec: ScenarioSpec, workers=1) -> AggregateResult:
    """Run every requested scheme on every realization and sweep point.

    ``workers > 1`` fans realizations out over processes; aggregation order
    is always (sweep index, scheme, realization index), so the result does
    not depend on ``workers``.
    """
    points = spec.points()
    cells = {
        (i, scheme): CellResult(i, value, scheme, [], [])
        for i, (value, _) in enumerate(points)
        for scheme in spec.schemes
    }
    traces, digests = [], {}
    realizations = range(spec.num_realizations)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_realization, [spec] * len(realizations), realizations))
    else:
        results = [_run_realization(spec, r) for r in realizations]
    for r, records in results:
        for i, scheme, value, seconds, trace, error, digest in records:
            cell = cells[(i, scheme)]
            cell.values.append(value)
            cell.seconds.append(seconds)
            if error:
                cell.errors.append((r, error))
            digests[(i, r, scheme)] = digest
            if isinstance(trace, PddTrace):
                traces.append((i, r, trace))
    traces.sort(key=lambda t: (t[0], t[1]))
    ordered = [cells[(i, scheme)] for i in range(len(points)) for scheme in spec.schemes]
    return AggregateResult(spec, ordered, traces, digests)


def desk_profile(**overrides) -> ScenarioSpec:
    """M=12, N=4, K=3, J=2 at 10 dBm with -120 dBm noise and -120 dB path loss, 50 draws."""
    base = SystemConfig(12, 4, 3, 2, float(dbm_to_watts(10.0)), 1.0,
                        float(dbm_to_watts(-120.0)), float(dbm_to_watts(-120.0)))
    kwargs = dict(base=base, path_loss_db=-120.0, num_realizations=50, rng_seed=0)
    kwargs.update(overrides)
    return ScenarioSpec(**kwargs)


def full_profile(**overrides) -> ScenarioSpec:
    """M=24, N=6, K=6, J=4, 500 draws; meant to run offline."""
    base = SystemConfig(24, 6, 6, 4, float(dbm_to_watts(10.0)), 1.0,
                        float(dbm_to_watts(-120.0)), float(dbm_to_watts(-120.0)))
    kwargs = dict(base=base, path_loss_db=-120.0, num_realizations=500, rng_seed=0)
    kwargs.update(overrides)
    return ScenarioSpec(**kwargs)
