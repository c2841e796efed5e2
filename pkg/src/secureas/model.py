"""
System model of the multiuser MIMO wiretap downlink with antenna selection.

A base station with ``M`` antennas and ``N < M`` RF chains serves ``K``
single-antenna users while ``J`` single-antenna eavesdroppers listen.  The
selection vector ``s`` enters every expression as the diagonal matrix
``diag(s)``; here it is only ever applied as an elementwise row mask on the
beamforming matrix.

Conventions
-----------
* ``H`` is ``M x K`` (column ``k`` is the channel of user ``k``), ``G`` is
  ``M x J`` (column ``j`` is the channel of eavesdropper ``j``).
* ``W`` is ``M x K`` (column ``k`` carries user ``k``'s stream).
* Powers are linear (watts); rates are reported in bits/s/Hz.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import ConfigError, DimensionError

__all__ = [
    "SystemConfig",
    "ChannelSet",
    "SelectionState",
    "SecrecyReport",
    "dbm_to_watts",
    "watts_to_dbm",
    "as_mask",
    "power",
    "is_power_feasible",
    "effective_gains",
    "sinr_ut",
    "eve_snr",
    "sinr_all",
    "eve_snr_all",
    "secrecy_rate",
    "wssr",
    "g_bound",
]

POWER_SLACK = 1e-6


def dbm_to_watts(value_dbm):
    """Convert dBm to watts, ``10 ** ((dBm - 30) / 10)``.

    Evaluated element by element with the C library ``pow`` so the result
    does not depend on whether the input is a scalar or an array (numpy's
    vectorized power can differ in the last bit).
    """
    arr = np.asarray(value_dbm, dtype=float)
    out = np.array([math.pow(10.0, (v - 30.0) / 10.0) for v in arr.reshape(-1)])
    return out.reshape(arr.shape) if arr.ndim else out[0]


def watts_to_dbm(value_w):
    return 10.0 * np.log10(np.asarray(value_w, dtype=float)) + 30.0


def _vector(value, length, name):
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(length, float(arr))
    arr = arr.reshape(-1)
    if arr.shape != (length,):
        raise ConfigError(f"{name} must have length {length}, got {arr.shape[0]}", name)
    return arr


@dataclass(frozen=True)
class SystemConfig:
    """Dimensions, power budget, QoS weights and noise powers.

    Scalars given for ``weights``, ``noise_ut`` or ``noise_eve`` are broadcast
    to the matching length.
    """

    num_antennas: int
    num_rf_chains: int
    num_users: int
    num_eves: int
    power_budget: float
    weights: np.ndarray = 1.0
    noise_ut: np.ndarray = 1.0
    noise_eve: np.ndarray = 1.0

    def __post_init__(self):
        for name in ("num_antennas", "num_rf_chains", "num_users", "num_eves"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}", name)
            object.__setattr__(self, name, int(value))
        if self.num_rf_chains >= self.num_antennas:
            raise ConfigError(
                "num_rf_chains must satisfy N < M "
                f"(got N={self.num_rf_chains}, M={self.num_antennas})",
                "num_rf_chains",
            )
        if not np.isfinite(self.power_budget) or self.power_budget <= 0:
            raise ConfigError("power_budget must be positive", "power_budget")
        object.__setattr__(self, "power_budget", float(self.power_budget))

        weights = _vector(self.weights, self.num_users, "weights")
        noise_ut = _vector(self.noise_ut, self.num_users, "noise_ut")
        noise_eve = _vector(self.noise_eve, self.num_eves, "noise_eve")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise ConfigError("weights must be finite and nonnegative", "weights")
        if np.any(noise_ut <= 0) or not np.all(np.isfinite(noise_ut)):
            raise ConfigError("noise_ut must be positive", "noise_ut")
        if np.any(noise_eve <= 0) or not np.all(np.isfinite(noise_eve)):
            raise ConfigError("noise_eve must be positive", "noise_eve")
        for name, arr in (("weights", weights), ("noise_ut", noise_ut), ("noise_eve", noise_eve)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    # short aliases used throughout the solvers
    @property
    def M(self):
        return self.num_antennas

    @property
    def N(self):
        return self.num_rf_chains

    @property
    def K(self):
        return self.num_users

    @property
    def J(self):
        return self.num_eves

    def replace(self, **changes) -> "SystemConfig":
        kwargs = dict(
            num_antennas=self.num_antennas,
            num_rf_chains=self.num_rf_chains,
            num_users=self.num_users,
            num_eves=self.num_eves,
            power_budget=self.power_budget,
            weights=self.weights,
            noise_ut=self.noise_ut,
            noise_eve=self.noise_eve,
        )
        kwargs.update(changes)
        return SystemConfig(**kwargs)

    def __eq__(self, other):
        if not isinstance(other, SystemConfig):
            return NotImplemented
        return (
            (self.M, self.N, self.K, self.J, self.power_budget)
            == (other.M, other.N, other.K, other.J, other.power_budget)
            and np.array_equal(self.weights, other.weights)
            and np.array_equal(self.noise_ut, other.noise_ut)
            and np.array_equal(self.noise_eve, other.noise_eve)
        )

    __hash__ = None


@dataclass(frozen=True)
class ChannelSet:
    """Legitimate (``H``, M x K) and eavesdropper (``G``, M x J) channels."""

    H: np.ndarray
    G: np.ndarray

    def __post_init__(self):
        H = np.array(self.H, dtype=complex, ndmin=2)
        G = np.array(self.G, dtype=complex, ndmin=2)
        if H.ndim != 2 or G.ndim != 2 or H.shape[0] != G.shape[0]:
            raise DimensionError(f"H {H.shape} and G {G.shape} must both be M x (.)")
        if not (np.all(np.isfinite(H)) and np.all(np.isfinite(G))):
            raise DimensionError("channel entries must be finite")
        H.setflags(write=False)
        G.setflags(write=False)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "G", G)

    def check(self, cfg: SystemConfig) -> None:
        if self.H.shape != (cfg.M, cfg.K):
            raise DimensionError(f"H has shape {self.H.shape}, expected {(cfg.M, cfg.K)}")
        if self.G.shape != (cfg.M, cfg.J):
            raise DimensionError(f"G has shape {self.G.shape}, expected {(cfg.M, cfg.J)}")

    def digest(self) -> str:
        """SHA-256 of the raw channel bytes, used to audit paired designs."""
        import hashlib

        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.H).tobytes())
        h.update(np.ascontiguousarray(self.G).tobytes())
        return h.hexdigest()


@dataclass(frozen=True)
class SelectionState:
    """Antenna selection vector with its mode.

    In ``"binary"`` mode the entries are exactly 0/1; the RF-chain count is
    checked against a config with :meth:`check`.
    """

    s: np.ndarray
    mode: Literal["relaxed", "binary"] = "binary"

    def __post_init__(self):
        s = np.array(self.s, dtype=float).reshape(-1)
        if not np.all(np.isfinite(s)):
            raise DimensionError("selection entries must be finite")
        if self.mode not in ("relaxed", "binary"):
            raise ValueError(f"unknown selection mode {self.mode!r}")
        if self.mode == "binary" and not np.all((s == 0.0) | (s == 1.0)):
            raise ValueError("binary selection must contain only 0 and 1")
        s.setflags(write=False)
        object.__setattr__(self, "s", s)

    @classmethod
    def from_indices(cls, indices, num_antennas):
        s = np.zeros(num_antennas)
        s[list(indices)] = 1.0
        return cls(s, "binary")

    @property
    def indices(self):
        return np.flatnonzero(self.s == 1.0) if self.mode == "binary" else None

    def check(self, cfg: SystemConfig) -> None:
        if self.s.shape != (cfg.M,):
            raise DimensionError(f"s has length {self.s.size}, expected {cfg.M}")
        if self.mode == "binary" and int(self.s.sum()) != cfg.N:
            raise ValueError(f"binary selection activates {int(self.s.sum())} antennas, expected {cfg.N}")

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.s, dtype=dtype)

    def __eq__(self, other):
        if not isinstance(other, SelectionState):
            return NotImplemented
        return self.mode == other.mode and np.array_equal(self.s, other.s)

    __hash__ = None


@dataclass(frozen=True)
class SecrecyReport:
    """Per-user SINR, aggregated eavesdropper SNR, secrecy rate, and WSSR."""

    gamma: np.ndarray
    gamma_bar: np.ndarray
    rates: np.ndarray
    wssr: float
    weights: np.ndarray = field(repr=False, default=None)


def as_mask(s, num_antennas=None):
    """Return the selection as a float vector, accepting arrays or SelectionState."""
    if isinstance(s, SelectionState):
        s = s.s
    s = np.asarray(s, dtype=float).reshape(-1)
    if num_antennas is not None and s.shape != (num_antennas,):
        raise DimensionError(f"s has length {s.size}, expected {num_antennas}")
    return s


def _check_W(cfg, W):
    W = np.asarray(W, dtype=complex)
    if W.ndim == 1 and cfg.K == 1:
        W = W.reshape(-1, 1)
    if W.shape != (cfg.M, cfg.K):
        raise DimensionError(f"W has shape {W.shape}, expected {(cfg.M, cfg.K)}")
    return W


def power(W):
    """Total transmit power ``tr(W W^H)``."""
    return float(np.sum(np.abs(W) ** 2))


def is_power_feasible(W, p, slack=POWER_SLACK):
    return power(W) <= p * (1.0 + slack)


def effective_gains(cfg: SystemConfig, ch: ChannelSet, W, s):
    """Return ``(HW, GW)`` with ``HW[k, i] = h_k^H diag(s) w_i`` and
    ``GW[j, k] = g_j^H diag(s) w_k``."""
    ch.check(cfg)
    W = _check_W(cfg, W)
    masked = as_mask(s, cfg.M)[:, None] * W
    return ch.H.conj().T @ masked, ch.G.conj().T @ masked


def _sinr_from_gains(cfg, HW):
    power_matrix = np.abs(HW) ** 2
    signal = np.diag(power_matrix).copy()
    interference = power_matrix.sum(axis=1) - signal
    return signal / (cfg.noise_ut + interference)


def _eve_snr_from_gains(cfg, GW):
    return (np.abs(GW) ** 2 / cfg.noise_eve[:, None]).sum(axis=0)


def sinr_all(cfg, ch, W, s):
    """SINR of every legitimate user, length ``K``."""
    HW, _ = effective_gains(cfg, ch, W, s)
    return _sinr_from_gains(cfg, HW)


def eve_snr_all(cfg, ch, W, s):
    """Aggregated eavesdropper SNR on every user's stream, length ``K``."""
    _, GW = effective_gains(cfg, ch, W, s)
    return _eve_snr_from_gains(cfg, GW)


def _user(cfg, k):
    if not 0 <= k < cfg.K:
        raise DimensionError(f"user index {k} out of range [0, {cfg.K})")
    return k


def sinr_ut(cfg, ch, W, s, k):
    """SINR at user ``k`` (zero-based)."""
    return float(sinr_all(cfg, ch, W, s)[_user(cfg, k)])


def eve_snr(cfg, ch, W, s, k):
    """Colluding-eavesdropper SNR on the stream of user ``k`` (zero-based).

    Worst case: the eavesdroppers combine coherently and cancel the other
    users' interference, so only ``w_k`` appears.
    """
    return float(eve_snr_all(cfg, ch, W, s)[_user(cfg, k)])


def _rates(gamma, gamma_bar):
    return np.maximum(np.log2(1.0 + gamma) - np.log2(1.0 + gamma_bar), 0.0)


def secrecy_rate(cfg, ch, W, s, k):
    """Secrecy rate of user ``k`` in bits/s/Hz, clamped at zero."""
    HW, GW = effective_gains(cfg, ch, W, s)
    k = _user(cfg, k)
    return float(_rates(_sinr_from_gains(cfg, HW), _eve_snr_from_gains(cfg, GW))[k])


def wssr(cfg, ch, W, s) -> SecrecyReport:
    """Evaluate the weighted secrecy sum-rate and its per-user ingredients."""
    HW, GW = effective_gains(cfg, ch, W, s)
    gamma = _sinr_from_gains(cfg, HW)
    gamma_bar = _eve_snr_from_gains(cfg, GW)
    rates = _rates(gamma, gamma_bar)
    return SecrecyReport(gamma, gamma_bar, rates, float(cfg.weights @ rates), cfg.weights)


def g_bound(cfg, ch):
    """Upper bound ``sum_j p ||g_j||^2 / delta_j^2`` on every eavesdropper SNR.

    Holds for any power-feasible ``W`` and any selection with entries in
    ``[0, 1]``.
    """
    ch.check(cfg)
    return float(np.sum(cfg.power_budget * np.sum(np.abs(ch.G) ** 2, axis=0) / cfg.noise_eve))
