"""Adversarial and feature-matching losses.

Each discriminator sees three kinds of triples per step: a real matched
triple (pulled toward 1), a generated triple (pushed toward 0), and a real
image paired with deliberately wrong conditions (also pushed toward 0 — this
is what makes the discriminators match-aware rather than royalty-free real/fake
judges). The generator minimizes the negated log scores of its samples across
all scales plus a weighted mean-squared distance between frozen encoder
features of the real and generated images.
"""

from __future__ import annotations

from collections.abc import Sequence

import torch

SCORE_EPS = 1e-7


def _log(scores: torch.Tensor) -> torch.Tensor:
    return torch.log(torch.clamp(scores, SCORE_EPS, 1.0 - SCORE_EPS))


def _log1m(scores: torch.Tensor) -> torch.Tensor:
    return torch.log(torch.clamp(1.0 - scores, SCORE_EPS, 1.0 - SCORE_EPS))


def discriminator_loss(real_scores: torch.Tensor, fake_scores: torch.Tensor,
                       mismatch_scores: torch.Tensor) -> torch.Tensor:
    """-(log D(real) + log(1 - D(fake)) + log(1 - D(real, wrong conditions))), batch-averaged."""
    return -(_log(real_scores).mean()
             + _log1m(fake_scores).mean()
             + _log1m(mismatch_scores).mean())


def generator_adversarial_loss(fake_scores: Sequence[torch.Tensor]) -> torch.Tensor:
    """-sum_k log D_k(generated triple), batch-averaged per scale."""
    total = None
    for scores in fake_scores:
        term = -_log(scores).mean()
        total = term if total is None else total + term
    if total is None:
        raise ValueError("generator loss needs at least one discriminator scale")
    return total


def perceptual_loss(real_features: torch.Tensor, fake_features: torch.Tensor) -> torch.Tensor:
    """Mean squared difference over all feature elements."""
    if real_features.shape != fake_features.shape:
        raise ValueError(f"feature shapes differ: {tuple(real_features.shape)} "
                         f"vs {tuple(fake_features.shape)}")
    return (real_features - fake_features).square().mean()


def generator_loss(fake_scores: Sequence[torch.Tensor],
                   real_features: torch.Tensor | None = None,
                   fake_features: torch.Tensor | None = None,
                   weight: float = 10.0) -> torch.Tensor:
    loss = generator_adversarial_loss(fake_scores)
    if real_features is not None:
        loss = loss + weight * perceptual_loss(real_features, fake_features)
    return loss
