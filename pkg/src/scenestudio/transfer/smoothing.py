"""Affinity-graph smoothing of stylized colors, guided by the input image.

Pixels are graph nodes; 8-neighbors are connected with Gaussian weights in
guide-color distance. Smoothing solves R = (1-alpha)(I - alpha*Wbar)^{-1} Y
per channel, where Wbar is the row-normalized weight matrix. Rather than
solving the unsymmetric system directly, we solve the equivalent symmetric
positive-definite form (D - alpha*W) R = (1-alpha) D Y (D the degree matrix)
with Jacobi-preconditioned conjugate gradients, then verify the original
equation's residual.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import cg

from ..errors import ContractError, SolverError

OFFSETS_8 = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))
MAX_ITERATIONS = 10_000
RESIDUAL_TOL = 1e-6


@dataclass
class AffinityGraph:
    weights: sparse.csr_matrix      # W: symmetric, non-negative, zero diagonal
    degrees: np.ndarray             # row sums of W

    @property
    def normalized(self) -> sparse.csr_matrix:
        """Row-stochastic Wbar = D^{-1} W."""
        inv = sparse.diags(1.0 / self.degrees)
        return inv @ self.weights


def build_affinity_graph(guide: np.ndarray, sigma: float = 0.2) -> AffinityGraph:
    """8-neighborhood graph with w_pq = exp(-||g_p - g_q||^2 / (2 sigma^2))."""
    if guide.ndim == 2:
        guide = guide[..., None]
    if sigma <= 0:
        raise ContractError("affinity sigma must be positive")
    guide = np.asarray(guide, dtype=np.float64)
    h, w = guide.shape[:2]
    n = h * w
    ids = np.arange(n).reshape(h, w)
    rows, cols, vals = [], [], []
    for di, dj in OFFSETS_8:
        src = ids[max(0, -di):h - max(0, di), max(0, -dj):w - max(0, dj)]
        dst = ids[max(0, di):h + min(0, di), max(0, dj):w + min(0, dj)]
        diff = (guide.reshape(n, -1)[src.ravel()] - guide.reshape(n, -1)[dst.ravel()])
        weight = np.exp(-np.sum(diff * diff, axis=1) / (2.0 * sigma * sigma))
        rows.append(src.ravel())
        cols.append(dst.ravel())
        vals.append(weight)
    weights = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n)).tocsr()
    degrees = np.asarray(weights.sum(axis=1)).ravel()
    if np.any(degrees <= 0):
        raise ContractError("affinity graph has an isolated pixel")
    return AffinityGraph(weights=weights, degrees=degrees)


def smooth_affinity(stylized: np.ndarray, guide: np.ndarray, alpha: float,
                    sigma: float = 0.2) -> np.ndarray:
    """Solve the ranking smoother per channel; alpha=0 returns the input exactly."""
    if not 0.0 <= alpha < 1.0:
        raise ContractError(f"alpha must lie in [0, 1), got {alpha}")
    if stylized.shape[:2] != guide.shape[:2]:
        raise ContractError("stylized image and guide must share a resolution")
    if alpha == 0.0:
        return np.array(stylized, dtype=np.float64, copy=True)

    graph = build_affinity_graph(guide, sigma)
    h, w = stylized.shape[:2]
    n = h * w
    channels = stylized.reshape(n, -1).astype(np.float64)
    d = graph.degrees
    system = sparse.diags(d) - alpha * graph.weights        # SPD for alpha < 1
    precondition = sparse.diags(1.0 / system.diagonal())
    out = np.empty_like(channels)
    for c in range(channels.shape[1]):
        y = channels[:, c]
        rhs = (1.0 - alpha) * d * y
        solution, info = cg(system, rhs, x0=y, M=precondition,
                            maxiter=MAX_ITERATIONS, rtol=1e-12, atol=1e-14)
        residual = _equation_residual(graph, solution, y, alpha)
        if info != 0 or residual >= RESIDUAL_TOL:
            raise SolverError(
                f"smoothing solve did not converge on channel {c}: "
                f"cg info={info}, equation residual={residual:.3e}")
        out[:, c] = solution
    return out.reshape(stylized.shape)


def _equation_residual(graph: AffinityGraph, solution: np.ndarray,
                       y: np.ndarray, alpha: float) -> float:
    """Max-norm residual of (I - alpha*Wbar) R - (1 - alpha) Y."""
    lhs = solution - alpha * (graph.normalized @ solution)
    return float(np.abs(lhs - (1.0 - alpha) * y).max())
