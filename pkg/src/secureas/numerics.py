"""Dense linear algebra and root finding used by the solvers."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
import scipy.linalg

from .errors import BisectionWarning, BracketError, NumericsError

__all__ = [
    "HermitianEig",
    "BisectionSpec",
    "hermitian_eig",
    "solve_spd",
    "bisect_monotone",
    "PowerQPSolution",
    "solve_power_qp",
]


class HermitianEig(NamedTuple):
    """Eigenvalues (ascending) and unitary eigenvector matrix (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class BisectionSpec:
    lower: float
    upper: float
    tolerance: float = 1e-10
    max_iters: int = 200

    def __post_init__(self):
        if not self.upper >= self.lower:
            raise BracketError(f"empty bracket [{self.lower}, {self.upper}]")
        if self.tolerance <= 0 or self.max_iters < 1:
            raise ValueError("tolerance must be positive and max_iters >= 1")


def hermitian_eig(A, psd=False) -> HermitianEig:
    """Spectral decomposition of a Hermitian matrix.

    The input is symmetrized as ``(A + A^H) / 2`` before factorization.  With
    ``psd=True`` eigenvalues that are negative only by round-off
    (``>= -1e-10 * ||A||``) are clamped to zero; larger negative eigenvalues
    raise :class:`NumericsError`.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NumericsError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NumericsError("matrix has non-finite entries")
    scale = np.linalg.norm(A, 2) if A.size else 0.0
    if np.linalg.norm(A - A.conj().T) > 1e-8 * max(scale, np.finfo(float).tiny):
        raise NumericsError("matrix is not Hermitian")
    A = 0.5 * (A + A.conj().T)
    try:
        lam, V = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericsError(f"eigendecomposition did not converge: {exc}") from exc
    if psd:
        if lam.size and lam[0] < -1e-10 * scale:
            raise NumericsError(f"matrix is not PSD (min eigenvalue {lam[0]:.3e})")
        lam = np.maximum(lam, 0.0)
    return HermitianEig(lam, V)


def solve_spd(Q, rhs, context="solve_spd"):
    """Solve ``Q x = rhs`` for a real symmetric positive-definite ``Q``.

    ``context`` names the caller that assembled ``Q`` and is included in the
    error raised when the Cholesky factorization fails.
    """
    Q = np.asarray(Q, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if not (np.all(np.isfinite(Q)) and np.all(np.isfinite(rhs))):
        raise NumericsError(f"{context}: non-finite entries in the linear system")
    try:
        factor = scipy.linalg.cho_factor(0.5 * (Q + Q.T), lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NumericsError(f"{context}: matrix is not positive definite") from exc
    return scipy.linalg.cho_solve(factor, rhs, check_finite=False)


def bisect_monotone(f: Callable[[float], float], spec: BisectionSpec) -> float:
    """Root of a nonincreasing function on ``[spec.lower, spec.upper]``.

    Requires ``f(lower) >= 0 >= f(upper)``.  Iterates until the bracket is
    narrower than ``spec.tolerance`` or ``|f| <= spec.tolerance`` and returns
    the end of the final bracket on which ``f <= 0``.  If ``max_iters`` runs
    out first, that same end is returned and a :class:`BisectionWarning` is
    emitted.
    """
    lo, hi = float(spec.lower), float(spec.upper)
    f_lo, f_hi = f(lo), f(hi)
    if np.isnan(f_lo) or np.isnan(f_hi) or f_lo < 0 or f_hi > 0:
        raise BracketError(f"no sign change: f({lo})={f_lo}, f({hi})={f_hi}")
    if f_lo == 0:
        return lo
    if f_hi == 0 or hi - lo <= spec.tolerance:
        return hi
    for _ in range(spec.max_iters):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if f_mid > 0:
            lo = mid
        else:
            hi = mid
            if -f_mid <= spec.tolerance:
                return hi
        if hi - lo <= spec.tolerance:
            return hi
    warnings.warn(
        f"bisection hit max_iters={spec.max_iters} with bracket width {hi - lo:.3e}",
        BisectionWarning,
        stacklevel=2,
    )
    return hi


class PowerQPSolution(NamedTuple):
    W: np.ndarray
    lam: float
    degenerate: bool


def solve_power_qp(A, a, p, tol=1e-10, null_rtol=1e-12) -> PowerQPSolution:
    """Minimize ``sum_k w_k^H A_k w_k - 2 Re{w_k^H a_k}`` s.t. ``sum_k ||w_k||^2 <= p``.

    Parameters
    ----------
    A : ndarray, shape (K, M, M)
        Hermitian PSD matrices, one per column of ``W``.
    a : ndarray, shape (M, K)
        Linear terms.
    p : float
        Power budget.
    tol : float
        Relative tolerance on the power equation, ``|P(lam)/p - 1|``, and on
        the bisection bracket width.

    Returns
    -------
    PowerQPSolution
        ``W = [(A_k + lam I)^+ a_k]_k`` with ``lam = 0`` when the minimum-norm
        unconstrained minimizer already meets the budget, otherwise the
        ``lam > 0`` for which the budget is met with equality.  ``degenerate``
        is set (and ``W = 0``) when every ``a_k`` vanishes.
    """
    A = np.asarray(A, dtype=complex)
    a = np.asarray(a, dtype=complex)
    K = a.shape[1]
    if not np.any(a):
        return PowerQPSolution(np.zeros_like(a), 0.0, True)

    lams, coords = [], []
    for k in range(K):
        lam_k, U_k = hermitian_eig(A[k], psd=True)
        lams.append(lam_k)
        coords.append(U_k)
    lam_all = np.array(lams)  # (K, M)
    c = np.stack([coords[k].conj().T @ a[:, k] for k in range(K)])  # (K, M)
    c2 = np.abs(c) ** 2

    # pseudo-inverse branch: components of a_k in the numerical null space of
    # A_k make the unconstrained problem unbounded
    cutoff = null_rtol * max(float(lam_all.max()), np.finfo(float).tiny)
    null = lam_all <= cutoff
    if np.any(c2[null] > null_rtol * c2.sum()):
        unconstrained = np.inf
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            unconstrained = float(np.sum(np.where(null, 0.0, c2 / lam_all**2)))

    if unconstrained <= p:
        with np.errstate(divide="ignore", invalid="ignore"):
            scaled = np.where(null, 0.0, c / lam_all)
        lam = 0.0
    else:
        live = c2 > 0

        def excess(x):
            with np.errstate(divide="ignore", invalid="ignore"):
                return float(np.sum(np.where(live, c2 / (lam_all + x) ** 2, 0.0))) / p - 1.0

        upper = np.sqrt(c2.sum() / p)
        lam = bisect_monotone(excess, BisectionSpec(0.0, upper, tolerance=tol))
        scaled = c / (lam_all + lam)

    W = np.stack([coords[k] @ scaled[k] for k in range(K)], axis=1)
    return PowerQPSolution(W, float(lam), False)
