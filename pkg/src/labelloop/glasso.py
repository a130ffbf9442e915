"""Sparse inverse covariance estimation (graphical lasso).

Maximizes log det(Theta) - tr(S Theta) - lambda * sum_{i != j} |Theta_ij|
by primal block coordinate descent: each column of Theta is updated by an
L1-penalized quadratic subproblem solved with cyclic coordinate descent.
The penalty is off-diagonal only, so S = I has the exact solution
Theta = I. The solver maintains W = Theta^{-1} via rank-structured block
updates, which keeps every subproblem's curvature matrix exact and the
primal objective non-decreasing across sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RIDGE = 1e-6
ZERO_VAR = 1e-12
INNER_MAX_SWEEPS = 1000


@dataclass(frozen=True)
class CovMatrix:
    """Standardized empirical covariance with dropped-column bookkeeping."""

    S: np.ndarray
    kept: np.ndarray  # original column indices that survived
    dropped: np.ndarray  # zero-variance column indices
    names: tuple[str, ...] | None = None

    @property
    def p(self) -> int:
        return self.S.shape[0]


@dataclass(frozen=True)
class PrecisionMatrix:
    theta: np.ndarray
    cov: np.ndarray  # companion estimate W = theta^{-1} maintained by the solver
    converged: bool
    n_sweeps: int
    objectives: tuple[float, ...]  # per-sweep objective values


def empirical_cov(Z: np.ndarray, names: list[str] | None = None) -> CovMatrix:
    """Standardize columns and form S = Z'Z / n with a small diagonal ridge.

    Zero-variance columns cannot be standardized; they are excluded and
    reported through `dropped` so the caller can handle them.
    """
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2:
        raise ValueError("input must be a 2-D matrix")
    n = Z.shape[0]
    if n < 2:
        raise ValueError(f"need at least 2 rows for a covariance, got {n}")
    std = Z.std(axis=0)
    kept = np.flatnonzero(std > ZERO_VAR)
    dropped = np.flatnonzero(std <= ZERO_VAR)
    Zs = (Z[:, kept] - Z[:, kept].mean(axis=0)) / std[kept]
    S = Zs.T @ Zs / n
    S = (S + S.T) / 2.0
    S[np.diag_indices_from(S)] += RIDGE
    kept_names = None
    if names is not None:
        if len(names) != Z.shape[1]:
            raise ValueError("one name per column required")
        kept_names = tuple(names[i] for i in kept)
    return CovMatrix(S=S, kept=kept, dropped=dropped, names=kept_names)


def objective(S: np.ndarray, lam: float, theta: np.ndarray) -> float:
    """log det(theta) - tr(S theta) - lam * l1(off-diagonal of theta)."""
    sign, logdet = np.linalg.slogdet(theta)
    if sign <= 0:
        return -np.inf
    off_l1 = np.abs(theta).sum() - np.abs(np.diag(theta)).sum()
    return float(logdet - np.trace(S @ theta) - lam * off_l1)


def _soft(z: float, lam: float) -> float:
    if z > lam:
        return z - lam
    if z < -lam:
        return z + lam
    return 0.0


def _lasso_cd(
    A: np.ndarray, b: np.ndarray, lam: float, x: np.ndarray, tol: float
) -> np.ndarray:
    """Minimize 0.5 x'Ax + b'x + lam*|x|_1 by coordinate descent.

    A must be positive definite. Warm-started at the caller's x so each
    call can only improve on the incoming objective value. Alternates
    full passes with passes over the active (nonzero) set.
    """
    p = len(b)
    diag = np.ascontiguousarray(np.diag(A))
    r = A @ x  # maintained as A x
    full_pass = True
    for _ in range(INNER_MAX_SWEEPS):
        coords = range(p) if full_pass else np.flatnonzero(x)
        max_change = 0.0
        for k in coords:
            old = x[k]
            z = -(b[k] + r[k] - diag[k] * old)
            new = _soft(z, lam) / diag[k]
            if new != old:
                x[k] = new
                r += A[:, k] * (new - old)
                change = abs(new - old)
                if change > max_change:
                    max_change = change
        if max_change < tol:
            if full_pass:
                break  # full pass clean: converged
            full_pass = True  # active set stable: verify with a full pass
        else:
            full_pass = False
    return x


def graphical_lasso(
    S: np.ndarray, lam: float, tol: float = 1e-5, max_iter: int = 200
) -> PrecisionMatrix:
    """Block coordinate descent over columns of the precision matrix.

    Convergence: the largest absolute change in W over a full sweep falls
    below tol scaled by the mean absolute off-diagonal of S (floored at
    1e-12). On sweep exhaustion the best iterate is returned with
    converged=False.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError("S must be square")
    if np.abs(S - S.T).max(initial=0.0) > 1e-9:
        raise ValueError("S must be symmetric")
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    p = S.shape[0]
    if np.any(np.diag(S) <= 0):
        raise ValueError("S must have a positive diagonal")
    S = (S + S.T) / 2.0

    if p == 1:
        theta = np.array([[1.0 / S[0, 0]]])
        return PrecisionMatrix(
            theta=theta,
            cov=S.copy(),
            converged=True,
            n_sweeps=0,
            objectives=(objective(S, lam, theta),),
        )

    off_mask = ~np.eye(p, dtype=bool)
    thresh = tol * max(float(np.abs(S[off_mask]).mean()), 1e-12)
    inner_tol = thresh / 10.0

    theta = np.diag(1.0 / np.diag(S))
    W = np.diag(np.diag(S))  # exact inverse of the diagonal start
    trace: list[float] = []
    converged = False
    sweeps = 0
    for sweeps in range(1, max_iter + 1):
        W_prev = W.copy()
        for j in range(p):
            idx = np.concatenate([np.arange(j), np.arange(j + 1, p)])
            s12 = S[idx, j]
            s22 = S[j, j]
            w12 = W[idx, j]
            # inverse of theta's (p-1)-block from the maintained W blocks
            theta11_inv = W[np.ix_(idx, idx)] - np.outer(w12, w12) / W[j, j]
            A = s22 * theta11_inv
            th = _lasso_cd(A, s12, lam, theta[idx, j].copy(), inner_tol)
            u = theta11_inv @ th
            theta[idx, j] = th
            theta[j, idx] = th
            theta[j, j] = 1.0 / s22 + th @ u
            W[np.ix_(idx, idx)] = theta11_inv + s22 * np.outer(u, u)
            W[idx, j] = -s22 * u
            W[j, idx] = -s22 * u
            W[j, j] = s22
        trace.append(objective(S, lam, theta))
        if np.abs(W - W_prev).max() < thresh:
            converged = True
            break
    theta = (theta + theta.T) / 2.0
    return PrecisionMatrix(
        theta=theta, cov=W, converged=converged, n_sweeps=sweeps, objectives=tuple(trace)
    )


def kkt_residual(S: np.ndarray, lam: float, theta: np.ndarray) -> float:
    """Largest off-diagonal violation of the stationarity conditions.

    Nonzero entries must satisfy (theta^{-1})_ij - S_ij = lam*sign;
    zero entries need |(theta^{-1})_ij - S_ij| <= lam.
    """
    S = np.asarray(S, dtype=float)
    theta = np.asarray(theta, dtype=float)
    try:
        np.linalg.cholesky(theta)
    except np.linalg.LinAlgError:
        raise np.linalg.LinAlgError("theta is not positive definite") from None
    G = np.linalg.inv(theta) - S
    p = theta.shape[0]
    if p == 1:
        return 0.0
    off = ~np.eye(p, dtype=bool)
    nonzero = (theta != 0.0) & off
    zero = (theta == 0.0) & off
    residuals = []
    if nonzero.any():
        residuals.append(np.abs(G[nonzero] - lam * np.sign(theta[nonzero])).max())
    if zero.any():
        residuals.append(max(0.0, np.abs(G[zero]).max() - lam))
    return float(max(residuals))
