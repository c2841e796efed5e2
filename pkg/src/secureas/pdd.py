"""
Penalty dual decomposition (PDD) for joint beamforming and antenna selection.

The binary selection constraint is lifted with a copy ``s_bar`` and the
equalities ``1^T s = N``, ``s_bar = s`` and ``s (1 - s_bar) = 0`` are moved
into an augmented-Lagrangian penalty.  The inner loop runs block coordinate
ascent over ``W, s, s_bar, b, alpha, beta, eta``, each block in closed form;
the outer loop either updates the duals or shrinks the penalty parameter,
depending on how much the constraint violation dropped.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .beamforming import fp_iterate, mrt_directions, update_W
from .errors import NumericsError
from .fp import AuxState, secrecy_surrogate, surrogate_terms, tight_aux, update_alpha, update_b, update_beta, update_eta
from .model import SecrecyReport, SelectionState, g_bound, wssr
from .numerics import solve_spd

__all__ = [
    "DualState",
    "PddConfig",
    "PddTrace",
    "PrimalState",
    "PddResult",
    "penalty_term",
    "constraint_violation",
    "s_quadratic",
    "update_s",
    "update_s_bar",
    "update_duals",
    "al_objective",
    "initial_state",
    "bcd_sweep",
    "bcd_inner_loop",
    "binarize",
    "pdd_solve",
]

log = logging.getLogger(__name__)

FINAL_VIOLATION = 1e-4


@dataclass(frozen=True)
class DualState:
    """Duals of ``1^T s = N`` (``xi``), ``s_bar = s`` (``mu``) and
    ``s (1 - s_bar) = 0`` (``lam``), plus the penalty parameter ``rho``."""

    xi: float
    mu: np.ndarray
    lam: np.ndarray
    rho: float

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")

    @classmethod
    def zeros(cls, num_antennas, rho=1.0):
        return cls(0.0, np.zeros(num_antennas), np.zeros(num_antennas), float(rho))


@dataclass(frozen=True)
class PddConfig:
    """Algorithm parameters.  Defaults are threshold 1, rho 1, chi 0.1.

    ``rho_min`` floors the penalty parameter: once shrinking ``rho`` would go
    below it, the outer step updates the duals instead.  Without the floor
    the relaxed selection can freeze at a non-binary minimizer of the penalty
    (e.g. ``N + 1`` equal entries) while ``rho`` underflows.
    """

    violation_threshold_init: float = 1.0
    rho_init: float = 1.0
    chi: float = 0.1
    inner_tol: float = 1e-6
    inner_max_iters: int = 200
    outer_max_iters: int = 300
    bisect_tol: float = 1e-10
    final_violation: float = FINAL_VIOLATION
    rho_min: float = 1e-2
    polish_tol: float = 1e-7
    polish_max_iters: int = 500
    init: str = "mrt"

    def __post_init__(self):
        if not 0 < self.chi < 1:
            raise ValueError("chi must lie in (0, 1)")
        if self.rho_init <= 0 or self.violation_threshold_init <= 0:
            raise ValueError("rho_init and violation_threshold_init must be positive")
        if not 0 < self.rho_min <= self.rho_init:
            raise ValueError("rho_min must lie in (0, rho_init]")
        if self.inner_tol <= 0 or self.bisect_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.inner_max_iters < 1 or self.outer_max_iters < 1:
            raise ValueError("iteration caps must be positive")
        if self.init not in ("mrt", "random"):
            raise ValueError("init must be 'mrt' or 'random'")


@dataclass
class PddTrace:
    """Convergence history.

    ``objective_per_inner_iter[i]`` is the AL objective (nats) after the
    ``i``-th inner sweep overall and ``inner_outer_index[i]`` the outer
    iteration it belongs to.  The first entry of each outer iteration is the
    objective before its first sweep.
    """

    objective_per_inner_iter: list = field(default_factory=list)
    inner_outer_index: list = field(default_factory=list)
    violation_per_outer_iter: list = field(default_factory=list)
    inner_iters_per_outer: list = field(default_factory=list)
    objective_per_outer_iter: list = field(default_factory=list)
    rho_per_outer_iter: list = field(default_factory=list)
    outer_iters_used: int = 0
    converged: bool = False

    def inner_segments(self):
        """Objective traces split per outer iteration."""
        idx = np.asarray(self.inner_outer_index)
        obj = np.asarray(self.objective_per_inner_iter)
        return [obj[idx == t] for t in range(self.outer_iters_used)]


@dataclass(frozen=True)
class PrimalState:
    W: np.ndarray
    s: np.ndarray
    s_bar: np.ndarray
    aux: AuxState

    def replace(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class PddResult:
    W: np.ndarray
    selection: SelectionState
    trace: PddTrace
    report: SecrecyReport
    relaxed_s: np.ndarray


def penalty_term(s, s_bar, dual: DualState, N):
    """Augmented-Lagrangian penalty ``f_rho`` (nonnegative)."""
    s = np.asarray(s, dtype=float)
    s_bar = np.asarray(s_bar, dtype=float)
    rho = dual.rho
    total = (s.sum() - N + rho * dual.xi) ** 2
    total += np.sum((s - s_bar + rho * dual.mu) ** 2)
    total += np.sum((s * (1.0 - s_bar) + rho * dual.lam) ** 2)
    return float(total / (2.0 * rho))


def constraint_violation(s, s_bar, N):
    """``max(|1^T s - N|, max_m |s_bar_m - s_m|, max_m |s_m (1 - s_bar_m)|)``."""
    s = np.asarray(s, dtype=float)
    s_bar = np.asarray(s_bar, dtype=float)
    return float(max(abs(s.sum() - N), np.max(np.abs(s_bar - s)), np.max(np.abs(s * (1.0 - s_bar)))))


def s_quadratic(cfg, ch, W, s_bar, aux: AuxState, dual: DualState, g):
    """Return ``(Q, lin)`` such that the ``s``-block minimizes ``s^T Q s - s^T lin``.

    The quadratic is read off the negated AL objective as a function of the
    real vector ``s``.  Channel terms carry the activity weights ``b_k`` and
    the ``1 / delta_j^2`` eavesdropper noise scaling.
    """
    s_bar = np.asarray(s_bar, dtype=float)
    M, N, rho = cfg.M, cfg.N, dual.rho
    # C[m, k, i] = conj(h_km) w_im, so that h_k^H diag(s) w_i = C[:, k, i] @ s
    C = ch.H.conj()[:, :, None] * W[:, None, :]
    D = ch.G.conj()[:, :, None] * W[:, None, :]  # D[m, j, k]
    user_coef = aux.b * (1.0 + aux.alpha) * np.abs(aux.eta) ** 2
    eve_coef = aux.b * (1.0 + aux.beta) / (1.0 + g)
    Q = np.real(np.einsum("mki,nki,k->mn", C.conj(), C, user_coef))
    Q += np.real(np.einsum("mjk,njk,j,k->mn", D.conj(), D, 1.0 / cfg.noise_eve, eve_coef))
    Q += (np.ones((M, M)) + np.eye(M) + np.diag((1.0 - s_bar) ** 2)) / (2.0 * rho)
    Q = 0.5 * (Q + Q.T)

    direct = np.einsum("mkk->mk", C)
    q = np.real(np.conj(aux.eta) * direct) @ (aux.b * (1.0 + aux.alpha))
    lin = 2.0 * q - ((rho * dual.xi - N) + (rho * dual.mu - s_bar) + rho * (1.0 - s_bar) * dual.lam) / rho
    return Q, lin


def update_s(cfg, ch, W, s_bar, aux, dual, g):
    """Unconstrained minimizer ``s = Q^{-1} lin / 2`` of the ``s``-block."""
    Q, lin = s_quadratic(cfg, ch, W, s_bar, aux, dual, g)
    return 0.5 * solve_spd(Q, lin, context="pdd.s_quadratic")


def update_s_bar(s, dual: DualState):
    """Per-antenna minimizer of the penalty over ``s_bar``."""
    s = np.asarray(s, dtype=float)
    a_bar = 1.0 + s**2
    b_bar = s + dual.rho * dual.mu + s**2 + s * dual.rho * dual.lam
    return b_bar / a_bar


def update_duals(s, s_bar, dual: DualState, N) -> DualState:
    s = np.asarray(s, dtype=float)
    s_bar = np.asarray(s_bar, dtype=float)
    inv = 1.0 / dual.rho
    return DualState(
        dual.xi + inv * (s.sum() - N),
        dual.mu + inv * (s - s_bar),
        dual.lam + inv * s * (1.0 - s_bar),
        dual.rho,
    )


def al_objective(cfg, ch, state: PrimalState, dual: DualState, g):
    """AL objective ascended by the inner loop (nats): secrecy surrogate minus penalty."""
    return secrecy_surrogate(cfg, ch, state.W, state.s, state.aux, g) - penalty_term(
        state.s, state.s_bar, dual, cfg.N
    )


def initial_state(cfg, ch, g, init="mrt", rng=None) -> PrimalState:
    """Starting point of the PDD iterations.

    ``"mrt"``: MRT beams over all antennas at full power and the uniform
    relaxed selection ``s = N / M``.  ``"random"``: complex Gaussian beams at
    full power and ``s`` uniform on ``[0, 1]`` rescaled to sum to ``N``.
    """
    if init == "mrt":
        W = mrt_directions(cfg, ch)
        s = np.full(cfg.M, cfg.N / cfg.M)
    else:
        rng = np.random.default_rng(rng)
        W = rng.standard_normal((cfg.M, cfg.K)) + 1j * rng.standard_normal((cfg.M, cfg.K))
        W *= np.sqrt(cfg.power_budget / np.sum(np.abs(W) ** 2))
        s = rng.uniform(size=cfg.M)
        s *= cfg.N / s.sum()
    aux = tight_aux(cfg, ch, W, s, g, b=cfg.weights, relaxed=True)
    return PrimalState(W, s, s.copy(), aux)


def bcd_sweep(cfg, ch, state: PrimalState, dual: DualState, g, bisect_tol=1e-10, freeze_b=False):
    """One pass over the blocks ``W, s, s_bar, b, alpha, beta, eta``."""
    aux = state.aux
    W = update_W(cfg, ch, state.s, aux, g, bisect_tol).W
    s = update_s(cfg, ch, W, state.s_bar, aux, dual, g)
    s_bar = update_s_bar(s, dual)
    if not freeze_b:
        g1, f2 = surrogate_terms(cfg, ch, W, s, aux, g)
        aux = aux.replace(b=update_b(g1, f2 - np.log1p(g), cfg.weights))
    aux = AuxState(
        aux.b,
        update_alpha(cfg, ch, W, s),
        update_beta(cfg, ch, W, s, g, relaxed=True),
        update_eta(cfg, ch, W, s),
    )
    return PrimalState(W, s, s_bar, aux)


def bcd_inner_loop(state, cfg, ch, dual, pdd_cfg: PddConfig, g=None, freeze_b=False):
    """Repeat :func:`bcd_sweep` until the AL objective settles.

    Returns ``(state, objectives, converged)``; ``objectives[0]`` is the
    value at the incoming state.
    """
    if g is None:
        g = g_bound(cfg, ch)
    objectives = [al_objective(cfg, ch, state, dual, g)]
    converged = False
    for _ in range(pdd_cfg.inner_max_iters):
        state = bcd_sweep(cfg, ch, state, dual, g, pdd_cfg.bisect_tol, freeze_b)
        objectives.append(al_objective(cfg, ch, state, dual, g))
        if abs(objectives[-1] - objectives[-2]) <= pdd_cfg.inner_tol * max(1.0, abs(objectives[-1])):
            converged = True
            break
    return state, objectives, converged


def binarize(s, N):
    """Indicator of the ``N`` largest entries (ties go to the lower index)."""
    s = np.asarray(s, dtype=float)
    order = np.argsort(-s, kind="stable")
    out = np.zeros_like(s)
    out[order[:N]] = 1.0
    return out


def pdd_solve(cfg, ch, pdd_cfg: PddConfig | None = None, rng_seed=None) -> PddResult:
    """Run the PDD double loop, then binarize ``s`` and refine ``W`` on it.

    The refinement reruns the fixed-selection beamforming iterations, once
    from the masked PDD beamformer and once from MRT beams on the selected
    antennas; the best of the masked and refined beamformers by exact WSSR is
    returned.  ``rng_seed`` only matters for ``init="random"``.
    """
    pdd_cfg = pdd_cfg or PddConfig()
    ch.check(cfg)
    g = g_bound(cfg, ch)
    state = initial_state(cfg, ch, g, pdd_cfg.init, rng_seed)
    dual = DualState.zeros(cfg.M, pdd_cfg.rho_init)
    threshold = pdd_cfg.violation_threshold_init
    trace = PddTrace()

    for t in range(pdd_cfg.outer_max_iters):
        state, objectives, inner_ok = bcd_inner_loop(state, cfg, ch, dual, pdd_cfg, g)
        h = constraint_violation(state.s, state.s_bar, cfg.N)
        trace.objective_per_inner_iter.extend(objectives)
        trace.inner_outer_index.extend([t] * len(objectives))
        trace.inner_iters_per_outer.append(len(objectives) - 1)
        trace.objective_per_outer_iter.append(objectives[-1])
        trace.violation_per_outer_iter.append(h)
        trace.rho_per_outer_iter.append(dual.rho)
        trace.outer_iters_used = t + 1
        if h <= pdd_cfg.final_violation and inner_ok:
            trace.converged = True
            break
        shrunk = pdd_cfg.chi * dual.rho
        if h < threshold or shrunk < pdd_cfg.rho_min * (1.0 - 1e-12):
            dual = update_duals(state.s, state.s_bar, dual, cfg.N)
        else:
            dual = replace(dual, rho=shrunk)
        threshold = pdd_cfg.chi * h
    if not trace.converged:
        log.info("PDD stopped after %d outer iterations with violation %.3e", trace.outer_iters_used, h)

    s_bin = binarize(state.s, cfg.N)
    selection = SelectionState(s_bin, "binary")
    W_masked = s_bin[:, None] * state.W
    # a user switched off during the relaxed phase has w_k = 0 and can never
    # come back from a warm start, hence the second start from MRT beams
    candidates = [W_masked]
    for W0 in (W_masked, mrt_directions(cfg, ch, s_bin)):
        try:
            W_ref, _, _ = fp_iterate(cfg, ch, s_bin, W0=W0, g=g, tol=pdd_cfg.polish_tol,
                                     max_iters=pdd_cfg.polish_max_iters, bisect_tol=pdd_cfg.bisect_tol)
        except NumericsError as exc:  # pragma: no cover - defensive
            log.warning("beamformer refinement failed: %s", exc)
            continue
        candidates.append(s_bin[:, None] * W_ref)
    reports = [wssr(cfg, ch, W, s_bin) for W in candidates]
    best = int(np.argmax([r.wssr for r in reports]))
    return PddResult(candidates[best], selection, trace, reports[best], np.asarray(state.s).copy())
