"""Walk-operator spectra, the one-step contraction check, and Cheeger bounds.

Eigenvalues are computed on the degree-symmetrized operator
N = D^{-1/2} A D^{-1/2} restricted to vertices of nonzero degree; the simple
walk Q is similar to N there, and the lazy walk satisfies P = (I + Q)/2.
Isolated vertices contribute eigenvalue-1 blocks to both walk operators and
are appended to the spectrum after the solve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix

from .errors import DomainError
from .graphs import GraphState, is_connected
from .rng import generator
from .walks import Distribution, WalkKind, dense_transition, l2pi_sq, stationary_dist

__all__ = [
    "SpectralSummary",
    "spectrum",
    "cheeger_lambda2",
    "cheeger_lower_bound",
    "check_contraction",
    "check_cheeger",
]

_SLACK = 1e-9


@dataclass(frozen=True)
class SpectralSummary:
    lambda2_lazy: float
    lambda_abs_simple: float
    method: str                # "dense" or "power"
    residual: float
    converged: bool


def _restricted_normalized(g: GraphState) -> tuple[np.ndarray, np.ndarray]:
    """(N, active_index) for the subgraph of nonzero-degree vertices, dense."""
    deg = g.degrees
    active = np.flatnonzero(deg > 0)
    remap = np.full(g.n, -1, dtype=np.int64)
    remap[active] = np.arange(active.size)
    us, vs = g.endpoints
    inv_sqrt = 1.0 / np.sqrt(deg[active].astype(np.float64))
    N = np.zeros((active.size, active.size), dtype=np.float64)
    ru, rv = remap[us], remap[vs]
    w = inv_sqrt[ru] * inv_sqrt[rv]
    N[ru, rv] = w
    N[rv, ru] = w
    return N, active


def spectrum(g: GraphState, n_dense: int = 2000, tol: float = 1e-8,
             max_iter: int = 100_000) -> SpectralSummary:
    """Extreme nontrivial eigenvalues of the walk operators on g.

    Dense symmetric solve when the nonzero-degree subgraph has at most
    n_dense vertices, otherwise power iteration with deflation against the
    sqrt-degree top eigenvector. Non-convergence is reported through the
    residual and the converged flag rather than raised.
    """
    if g.n == 1:
        return SpectralSummary(0.0, 0.0, "dense", 0.0, True)
    deg = g.degrees
    n_active = int((deg > 0).sum())
    n_iso = g.n - n_active
    if n_active == 0:
        return SpectralSummary(1.0, 1.0, "dense", 0.0, True)
    if n_active <= n_dense:
        N, _ = _restricted_normalized(g)
        w = np.linalg.eigvalsh(N)        # ascending
        lam2_q = 1.0 if n_iso > 0 else float(w[-2])
        lam_n = float(w[0])
        lam2_lazy = min(1.0, max(0.0, 0.5 * (1.0 + lam2_q)))
        lam_abs = min(1.0, max(abs(lam2_q), abs(lam_n)))
        return SpectralSummary(lam2_lazy, lam_abs, "dense", 0.0, True)
    lam2_q, res2, ok2 = _power_extreme(g, top=True, tol=tol, max_iter=max_iter)
    lam_n, resn, okn = _power_extreme(g, top=False, tol=tol, max_iter=max_iter)
    if n_iso > 0:
        lam2_q = 1.0
    lam2_lazy = min(1.0, max(0.0, 0.5 * (1.0 + lam2_q)))
    lam_abs = min(1.0, max(abs(lam2_q), abs(lam_n)))
    return SpectralSummary(lam2_lazy, lam_abs, "power", max(res2, resn), ok2 and okn)


def _power_extreme(g: GraphState, top: bool, tol: float, max_iter: int
                   ) -> tuple[float, float, bool]:
    """Second-largest (top=True) or smallest (top=False) eigenvalue of N.

    Iterates the shifted PSD operator N + I (resp. I - N) and deflates the
    known top eigenvector sqrt(deg); the Rayleigh quotient with respect to N
    is returned together with its residual.
    """
    deg = g.degrees
    active = np.flatnonzero(deg > 0)
    remap = np.full(g.n, -1, dtype=np.int64)
    remap[active] = np.arange(active.size)
    us, vs = g.endpoints
    ru, rv = remap[us], remap[vs]
    inv_sqrt = 1.0 / np.sqrt(deg[active].astype(np.float64))
    w = inv_sqrt[ru] * inv_sqrt[rv]
    na = active.size
    rows = np.concatenate([ru, rv])
    cols = np.concatenate([rv, ru])
    vals = np.concatenate([w, w])
    N = csr_matrix((vals, (rows, cols)), shape=(na, na))
    v1 = np.sqrt(deg[active].astype(np.float64))
    v1 /= np.linalg.norm(v1)
    rng = generator(0x5EED, na)
    x = rng.standard_normal(na)
    x -= (v1 @ x) * v1
    nx = np.linalg.norm(x)
    if nx == 0.0:
        return (1.0 if top else -1.0), 0.0, False
    x /= nx
    sign = 1.0 if top else -1.0
    lam = 0.0
    residual = np.inf
    for it in range(1, max_iter + 1):
        y = x + sign * (N @ x)
        y -= (v1 @ y) * v1
        ny = np.linalg.norm(y)
        if ny == 0.0:
            break
        x = y / ny
        if it % 8 == 0 or it == max_iter:
            Nx = N @ x
            lam = float(x @ Nx)
            residual = float(np.linalg.norm(Nx - lam * x))
            if residual <= tol:
                return lam, residual, True
    Nx = N @ x
    lam = float(x @ Nx)
    residual = float(np.linalg.norm(Nx - lam * x))
    return lam, residual, residual <= tol


def cheeger_lambda2(g: GraphState, n_dense: int = 2000) -> float:
    """lambda2 of the lazy walk restricted to nonzero-degree vertices.

    This is the operator the Cheeger inequality speaks about: isolated
    vertices change neither cut boundaries nor volumes, so they are dropped
    rather than contributing spurious eigenvalue-1 blocks. Returns 1.0 for
    an edgeless graph (paired with conductance 0).
    """
    deg = g.degrees
    n_active = int((deg > 0).sum())
    if n_active == 0:
        return 1.0
    if n_active <= n_dense:
        N, _ = _restricted_normalized(g)
        w = np.linalg.eigvalsh(N)
        lam2_q = float(w[-2]) if n_active >= 2 else 1.0
    else:
        lam2_q, _, _ = _power_extreme(g, top=True, tol=1e-10, max_iter=100_000)
    return min(1.0, max(0.0, 0.5 * (1.0 + lam2_q)))


def cheeger_lower_bound(g: GraphState, n_dense: int = 2000) -> float:
    """1 - lambda2(P), a certified lower bound on the conductance."""
    return 1.0 - cheeger_lambda2(g, n_dense)


def check_contraction(f: Distribution, g: GraphState) -> tuple[float, float, bool]:
    """One-step l2(pi) contraction of the lazy walk, evaluated densely.

    Returns (lhs, rhs, holds) for
    ||fP/pi - 1||^2_{2,pi} <= lambda2(P)^2 ||f/pi - 1||^2_{2,pi}.
    """
    if g.n > 64:
        raise DomainError("dense contraction check capped at n <= 64")
    if not is_connected(g):
        raise DomainError("contraction check requires a connected graph")
    if f.n != g.n:
        raise DomainError("distribution and graph sizes differ")
    pi = stationary_dist(g).values
    if g.n == 1:
        return 0.0, 0.0, True
    P = dense_transition(g, WalkKind.LAZY)
    fP = f.values @ P
    N, _ = _restricted_normalized(g)
    lam2 = 0.5 * (1.0 + float(np.linalg.eigvalsh(N)[-2]))
    lhs = l2pi_sq(fP, pi)
    rhs = lam2 * lam2 * l2pi_sq(f.values, pi)
    return lhs, rhs, bool(lhs <= rhs + _SLACK)


def check_cheeger(g: GraphState, exact_limit: int = 20) -> tuple[float, float, bool]:
    """Exact conductance against exact lambda2: 1-l2 <= phi <= 2 sqrt(1-l2)."""
    if g.n > exact_limit:
        raise DomainError(f"exact Cheeger check capped at n <= {exact_limit}")
    from .conductance import conductance_exact

    phi, _ = conductance_exact(g, cap=exact_limit)
    lam2 = cheeger_lambda2(g)
    gap = max(0.0, 1.0 - lam2)
    holds = bool(gap <= phi + _SLACK and phi <= 2.0 * np.sqrt(gap) + _SLACK)
    return phi, lam2, holds
