"""Sample-quality and conditioning-fidelity metrics.

All four metrics are numpy-pure: they consume probability rows, feature
vectors, or predictions that the surrogate networks produce elsewhere. The
surrogates stand in for the third-party pretrained networks used at full
scale, so absolute values are comparable only within this codebase; orderings
between model variants are the meaningful signal.
"""

from __future__ import annotations

import numpy as np

from ..errors import ContractError

PROB_ROW_TOL = 1e-6
COVARIANCE_EPS = 1e-6


def inception_score(prob_rows: np.ndarray, splits: int = 10) -> tuple[float, float]:
    """exp(mean KL(p(y|x) || p_bar)) per split; returns (mean, std) over splits.

    Rows are split in order (no shuffling), so callers control grouping by
    ordering the rows; each split uses its own marginal distribution.
    """
    rows = np.asarray(prob_rows, dtype=np.float64)
    if rows.ndim != 2:
        raise ContractError(f"probability rows must be 2-D, got shape {rows.shape}")
    if np.any(rows < -PROB_ROW_TOL):
        raise ContractError("probability rows must be non-negative")
    sums = rows.sum(axis=1)
    worst = float(np.abs(sums - 1.0).max())
    if worst > PROB_ROW_TOL:
        raise ContractError(f"probability rows must sum to 1 (worst deviation {worst:.2e})")
    if splits < 1:
        raise ContractError("splits must be >= 1")
    if rows.shape[0] < splits:
        raise ContractError(f"need at least {splits} rows for {splits} splits, got {rows.shape[0]}")

    scores = []
    for chunk in np.array_split(rows, splits):
        marginal = chunk.mean(axis=0)
        mask = chunk > 0
        kl_terms = np.zeros_like(chunk)
        kl_terms[mask] = chunk[mask] * (
            np.log(chunk[mask]) - np.log(np.broadcast_to(marginal, chunk.shape)[mask]))
        scores.append(np.exp(kl_terms.sum(axis=1).mean()))
    scores = np.array(scores)
    return float(scores.mean()), float(scores.std())


def _sqrtm_trace(product_root: np.ndarray, other: np.ndarray) -> float:
    """Tr((A B)^{1/2}) computed as the eigenvalue sum of A^{1/2} B A^{1/2}."""
    symmetric = product_root @ other @ product_root
    eigenvalues = np.linalg.eigvalsh((symmetric + symmetric.T) / 2.0)
    return float(np.sqrt(np.clip(eigenvalues, 0.0, None)).sum())


def _psd_root(matrix: np.ndarray) -> np.ndarray:
    values, vectors = np.linalg.eigh((matrix + matrix.T) / 2.0)
    return (vectors * np.sqrt(np.clip(values, 0.0, None))) @ vectors.T


def frechet_distance(feats_a: np.ndarray, feats_b: np.ndarray) -> float:
    """||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a S_b)^{1/2}) over feature rows.

    Covariances are regularized with COVARIANCE_EPS * I (applied consistently
    to both the trace terms and the matrix square root, so identical feature
    sets score exactly zero) and the square root uses the symmetric
    eigen-method with small negative eigenvalues clipped at zero.
    """
    a = np.atleast_2d(np.asarray(feats_a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(feats_b, dtype=np.float64))
    if a.shape[1] != b.shape[1]:
        raise ContractError(
            f"feature dimensions differ: {a.shape[1]} vs {b.shape[1]}")
    if a.shape[0] < 2 or b.shape[0] < 2:
        raise ContractError("need at least 2 feature rows per side")
    mu_a, mu_b = a.mean(axis=0), b.mean(axis=0)
    eye = COVARIANCE_EPS * np.eye(a.shape[1])
    cov_a = np.cov(a, rowvar=False) + eye
    cov_b = np.cov(b, rowvar=False) + eye
    mean_term = float(((mu_a - mu_b) ** 2).sum())
    trace_term = float(np.trace(cov_a) + np.trace(cov_b))
    cross = _sqrtm_trace(_psd_root(cov_a), cov_b)
    return max(mean_term + trace_term - 2.0 * cross, 0.0)


def attribute_mse(predictor, images: np.ndarray, target_attributes: np.ndarray) -> float:
    """Mean squared error of predicted vs target attribute vectors."""
    targets = np.asarray(target_attributes, dtype=np.float64)
    if len(images) != len(targets):
        raise ContractError(
            f"{len(images)} images vs {len(targets)} target attribute vectors")
    predictions = np.asarray(predictor.predict(images), dtype=np.float64)
    if predictions.shape != targets.shape:
        raise ContractError(
            f"predictor returned {predictions.shape}, targets are {targets.shape}")
    return float(((predictions - targets) ** 2).mean())


def segmentation_accuracy(segmenter, images: np.ndarray, layouts: np.ndarray) -> float:
    """Pixel accuracy (percent) of predicted labels against conditioning layouts."""
    labels = np.asarray(layouts)
    if len(images) != len(labels):
        raise ContractError(f"{len(images)} images vs {len(labels)} layouts")
    predicted = np.asarray(segmenter.predict(images))
    if predicted.shape != labels.shape:
        raise ContractError(
            f"segmenter returned {predicted.shape}, layouts are {labels.shape}")
    return float((predicted == labels).mean() * 100.0)
