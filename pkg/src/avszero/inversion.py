"""Pseudo-token embedding inversion.

Gradient ascent on a small matrix of token embeddings so that a frozen,
differentiable text encoder's output aligns (in cosine similarity) with a
target audio embedding. Ships a seeded toy encoder for desk-scale runs; any
object with ``encode``/``encode_grad`` and an ``output_dim`` works.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Tuple

import numpy as np

from .errors import DimensionMismatch, NonFiniteGradient, ZeroVector


@dataclass(frozen=True)
class InversionConfig:
    num_tokens: int = 4
    step_size: float = 0.2
    max_iters: int = 500
    tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.step_size <= 0 or self.tol <= 0:
            raise ValueError("step_size and tol must be positive")


class DifferentiableEncoder(Protocol):
    token_dim: int
    output_dim: int

    def encode(self, tokens: np.ndarray) -> np.ndarray: ...

    def encode_grad(self, tokens: np.ndarray, target: np.ndarray) -> np.ndarray: ...


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("cosine similarity undefined for zero vectors")
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


class ToyEncoder:
    """Seeded linear encoder: L2-normalized W @ mean(token rows).

    ``W`` is a fixed pseudo-random output_dim x token_dim projection generated
    from the seed, so runs are reproducible bit-for-bit.
    """

    def __init__(self, token_dim: int = 16, output_dim: int = 8, seed: int = 7):
        self.token_dim = token_dim
        self.output_dim = output_dim
        rng = np.random.default_rng(seed)
        self.weight = rng.standard_normal((output_dim, token_dim))

    def _pre_normalized(self, tokens: np.ndarray) -> np.ndarray:
        tokens = np.asarray(tokens, dtype=np.float64)
        if tokens.ndim != 2 or tokens.shape[1] != self.token_dim:
            raise DimensionMismatch(
                f"tokens shape {tokens.shape} incompatible with token_dim {self.token_dim}"
            )
        return self.weight @ tokens.mean(axis=0)

    def encode(self, tokens: np.ndarray) -> np.ndarray:
        v = self._pre_normalized(tokens)
        norm = np.linalg.norm(v)
        if norm == 0.0:
            raise ZeroVector("encoder output collapsed to the zero vector")
        return v / norm

    def encode_grad(self, tokens: np.ndarray, target: np.ndarray) -> np.ndarray:
        """Gradient of cos(target, encode(tokens)) with respect to the token matrix."""
        tokens = np.asarray(tokens, dtype=np.float64)
        target = np.asarray(target, dtype=np.float64)
        if target.shape != (self.output_dim,):
            raise DimensionMismatch(f"target shape {target.shape} != ({self.output_dim},)")
        v = self._pre_normalized(tokens)
        norm = np.linalg.norm(v)
        if norm == 0.0:
            raise ZeroVector("encoder output collapsed to the zero vector")
        y = v / norm
        t_hat = target / np.linalg.norm(target)
        d_v = (t_hat - (t_hat @ y) * y) / norm
        d_mean = self.weight.T @ d_v
        m = tokens.shape[0]
        return np.tile(d_mean / m, (m, 1))


def invert(
    target: np.ndarray,
    encoder: DifferentiableEncoder,
    config: InversionConfig = InversionConfig(),
) -> Tuple[np.ndarray, float, int]:
    """Fit token embeddings maximizing cosine similarity with the target.

    Returns (best token matrix, similarity of its encoding, iterations run).
    Initialization is N(0, 0.02^2) from config.seed; the best iterate seen is
    returned, so the reported similarity is monotone in iteration count.
    """
    target = np.asarray(target, dtype=np.float64)
    if target.shape != (encoder.output_dim,):
        raise DimensionMismatch(f"target shape {target.shape} != ({encoder.output_dim},)")
    rng = np.random.default_rng(config.seed)
    tokens = 0.02 * rng.standard_normal((config.num_tokens, encoder.token_dim))

    best_tokens = tokens.copy()
    best_sim = cosine_similarity(target, encoder.encode(tokens))
    prev_sim = best_sim
    iters = 0
    for _ in range(config.max_iters):
        grad = encoder.encode_grad(tokens, target)
        if not np.isfinite(grad).all():
            raise NonFiniteGradient("encoder gradient contains non-finite values")
        tokens = tokens + config.step_size * grad
        # The objective is scale-invariant; pinning the mean-token norm keeps
        # the gradient magnitude from decaying as the iterates grow.
        mean_norm = np.linalg.norm(tokens.mean(axis=0))
        if mean_norm > 0.0:
            tokens = tokens / mean_norm
        iters += 1
        sim = cosine_similarity(target, encoder.encode(tokens))
        if sim > best_sim:
            best_sim = sim
            best_tokens = tokens.copy()
        if abs(sim - prev_sim) < config.tol:
            break
        prev_sim = sim
    return best_tokens, best_sim, iters


def check_gradient(
    encoder: DifferentiableEncoder,
    point: np.ndarray,
    target: np.ndarray,
    h: float = 1e-4,
    max_coords: int = 64,
    seed: int = 0,
) -> float:
    """Max relative error between encode_grad and central finite differences.

    Checks every coordinate, or a seeded random subset of ``max_coords`` when
    the token matrix is larger. Near-zero gradients fall back to absolute error.
    """
    point = np.asarray(point, dtype=np.float64)
    analytic = encoder.encode_grad(point, target)

    def objective(p):
        return cosine_similarity(target, encoder.encode(p))

    flat_idx = np.arange(point.size)
    if point.size > max_coords:
        flat_idx = np.random.default_rng(seed).choice(point.size, size=max_coords, replace=False)

    max_err = 0.0
    for idx in flat_idx:
        i, j = divmod(int(idx), point.shape[1])
        bumped = point.copy()
        bumped[i, j] += h
        plus = objective(bumped)
        bumped[i, j] -= 2 * h
        minus = objective(bumped)
        numeric = (plus - minus) / (2 * h)
        diff = abs(analytic[i, j] - numeric)
        denom = max(abs(analytic[i, j]), abs(numeric))
        max_err = max(max_err, diff if denom < 1e-8 else diff / denom)
    return max_err
