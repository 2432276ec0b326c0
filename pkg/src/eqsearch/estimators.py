"""Score-function estimator of the entropy gradient of a categorical policy.

For ``pi = softmax(theta)`` the estimator averages
``-(1 + log pi(a)) * grad_theta log pi(a)`` over draws ``a ~ pi``; it is
unbiased for ``grad_theta H(pi)`` and needs only samples and their
log-probabilities.
"""
from dataclasses import dataclass

import numpy as np

from .errors import ContractError


class CategoricalModel:
    def __init__(self, logits):
        self.logits = np.asarray(logits, dtype=float)
        if self.logits.ndim != 1 or self.logits.size < 1:
            raise ContractError("logits must be a nonempty vector")
        z = self.logits - self.logits.max()
        self.log_probs = z - np.log(np.exp(z).sum())
        self.probs = np.exp(self.log_probs)

    @property
    def size(self):
        return self.logits.size

    def entropy(self):
        return float(-(self.probs * self.log_probs).sum())


@dataclass
class GradientEstimate:
    mean: np.ndarray
    stderr: np.ndarray
    num_samples: int


def exact_entropy_grad(model):
    """Closed-form ``sum_a pi(a) * -(1 + log pi(a)) * (e_a - pi)``."""
    if model.size < 2:
        raise ContractError("need at least two outcomes")
    p, lp = model.probs, model.log_probs
    c = p * (1.0 + lp)
    return -(c - p * c.sum())


def sample_terms(model, actions):
    """Per-sample estimator terms, shape (len(actions), K)."""
    actions = np.asarray(actions)
    weight = -(1.0 + model.log_probs[actions])
    score = -np.broadcast_to(model.probs, (actions.size, model.size)).copy()
    score[np.arange(actions.size), actions] += 1.0
    return weight[:, None] * score


def entropy_grad_estimate(model, num_samples, rng):
    if num_samples < 1:
        raise ContractError("num_samples must be >= 1")
    actions = rng.choice(model.size, size=num_samples, p=model.probs)
    # Each term depends only on the drawn outcome, so reduce through counts.
    counts = np.bincount(actions, minlength=model.size).astype(float)
    table = sample_terms(model, np.arange(model.size))
    mean = counts @ table / num_samples
    if num_samples > 1:
        second = counts @ (table * table) / num_samples
        var = np.maximum(second - mean * mean, 0.0) * num_samples / (num_samples - 1)
        stderr = np.sqrt(var / num_samples)
    else:
        stderr = np.full(model.size, np.nan)
    return GradientEstimate(mean, stderr, num_samples)


def check_unbiasedness(models, num_batches, batch_size, seed=0):
    """Batch-mean z-scores against the exact gradient.

    Returns rows ``(model_id, coordinate, exact, estimate, stderr, z)`` where
    ``estimate`` is the mean of the batch means and ``stderr`` its standard
    error across batches.
    """
    root = np.random.SeedSequence(seed)
    rows = []
    for mid, (model, child) in enumerate(zip(models, root.spawn(len(models)))):
        rng = np.random.default_rng(child)
        batch_means = np.array([entropy_grad_estimate(model, batch_size, rng).mean
                                for _ in range(num_batches)])
        exact = exact_entropy_grad(model)
        est = batch_means.mean(axis=0)
        se = batch_means.std(axis=0, ddof=1) / np.sqrt(num_batches)
        for k in range(model.size):
            z = (est[k] - exact[k]) / se[k] if se[k] > 0 else 0.0
            rows.append((mid, k, float(exact[k]), float(est[k]), float(se[k]), float(z)))
    return rows


def random_models(count, size, seed=0, scale=1.5):
    rng = np.random.default_rng(seed)
    return [CategoricalModel(rng.normal(0.0, scale, size)) for _ in range(count)]
