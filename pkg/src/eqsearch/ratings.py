"""Pairwise-outcome ratings fit by gradient descent on a regularized logistic loss.

For every pair ``(i, j)`` meaning player ``i`` finished ahead of player ``j``
the loss is ``-log sigmoid(s_i - s_j)``; the penalty is ``lam * ||s||_2``
(Euclidean norm, not squared, unless ``squared=True``).
"""
import csv
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ContractError, DivergenceError

DEFAULT_LAMBDA = 0.1
DEFAULT_LEARNING_RATE = 0.01
DEFAULT_STEPS = 5000


@dataclass
class OutcomeDataset:
    pairs: np.ndarray  # (P, 2) int: winner, loser
    num_players: int
    names: list = None

    def __post_init__(self):
        self.pairs = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        if self.pairs.size and (self.pairs.min() < 0 or self.pairs.max() >= self.num_players):
            raise ContractError("player id out of range")
        if np.any(self.pairs[:, 0] == self.pairs[:, 1]):
            raise ContractError("a pair must involve two different players")
        if self.names is None:
            self.names = [str(i) for i in range(self.num_players)]

    @classmethod
    def from_rank_rows(cls, rows):
        """Build pairs from ``(game_id, player_id, outcome_rank)`` rows; lower rank is better."""
        games = defaultdict(list)
        names = []
        index = {}
        for game, player, rank in rows:
            player = str(player)
            if player not in index:
                index[player] = len(names)
                names.append(player)
            games[str(game)].append((float(rank), index[player]))
        pairs = []
        for game in sorted(games):
            entries = games[game]
            for ra, a in entries:
                for rb, b in entries:
                    if ra < rb:
                        pairs.append((a, b))
        return cls(np.array(pairs, dtype=np.int64).reshape(-1, 2), len(names), names)

    @classmethod
    def load(cls, path):
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            rows = [(r["game_id"], r["player_id"], r["outcome_rank"]) for r in reader]
        return cls.from_rank_rows(rows)


@dataclass
class RatingVector:
    s: np.ndarray
    lam: float
    losses: list = None

    def save(self, path, names=None):
        names = names or [str(i) for i in range(len(self.s))]
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["player_id", "rating"])
            for name, r in zip(names, self.s):
                w.writerow([name, repr(float(r))])


def _penalty(s, lam, squared):
    return lam * (s @ s if squared else np.sqrt(s @ s))


def rating_loss(s, dataset, lam, squared=False):
    s = np.asarray(s, dtype=float)
    if lam < 0:
        raise ContractError("lambda must be >= 0")
    p = dataset.pairs
    diff = s[p[:, 0]] - s[p[:, 1]]
    # -log sigmoid(x) == log(1 + exp(-x))
    return float(np.logaddexp(0.0, -diff).sum() + _penalty(s, lam, squared))


def rating_grad(s, dataset, lam, squared=False):
    s = np.asarray(s, dtype=float)
    p = dataset.pairs
    diff = s[p[:, 0]] - s[p[:, 1]]
    w = 1.0 / (1.0 + np.exp(diff))  # 1 - sigmoid(diff)
    g = np.zeros_like(s)
    np.add.at(g, p[:, 0], -w)
    np.add.at(g, p[:, 1], w)
    if squared:
        g += 2.0 * lam * s
    else:
        norm = np.sqrt(s @ s)
        if norm > 0:
            g += lam * s / norm
    return g


def fit_ratings(dataset, lam=DEFAULT_LAMBDA, learning_rate=DEFAULT_LEARNING_RATE,
                steps=DEFAULT_STEPS, squared=False, record_loss=False):
    """Plain gradient descent from ``s = 0``."""
    if steps < 1:
        raise ContractError("steps must be >= 1")
    if lam < 0:
        raise ContractError("lambda must be >= 0")
    s = np.zeros(dataset.num_players)
    losses = [] if record_loss else None
    for step in range(steps):
        # overflow is reported as a DivergenceError below, not as a warning
        with np.errstate(over="ignore", invalid="ignore"):
            s = s - learning_rate * rating_grad(s, dataset, lam, squared)
            finite = bool(np.all(np.isfinite(s)))
            loss = rating_loss(s, dataset, lam, squared) if record_loss or not finite else None
        if loss is not None:
            if not np.isfinite(loss):
                raise DivergenceError(step, loss)
            if record_loss:
                losses.append(loss)
    return RatingVector(s, lam, losses)


def outcome_ranks(final_state):
    """Per-player rank (1 = best) of a finished GridConquest game.

    Survivors beat eliminated players; within each group higher score is
    better. Equal outcomes share a rank and so produce no pair.
    """
    from .games.gridconquest import state_value
    score = state_value(final_state)
    alive = set(final_state.alive())
    keys = [(i in alive, round(float(score[i]), 12)) for i in range(len(score))]
    return [1 + sum(k2 > k for k2 in keys) for k in keys]
