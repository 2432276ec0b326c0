"""Explicit normal-form games stored as dense payoff tensors."""
import json
from pathlib import Path

import numpy as np

from ..errors import ContractError


class MatrixGame:
    """An N-player normal-form game.

    ``payoffs`` has shape ``(*action_counts, num_players)``; the last axis
    holds the utility vector of a joint action.
    """

    def __init__(self, payoffs, labels=None):
        payoffs = np.asarray(payoffs, dtype=float)
        if payoffs.ndim < 2 or payoffs.shape[-1] != payoffs.ndim - 1:
            raise ContractError(
                f"payoff tensor of shape {payoffs.shape} must be (*action_counts, num_players)")
        if min(payoffs.shape[:-1]) < 1:
            raise ContractError("every player needs at least one action")
        self.payoffs = payoffs
        self.payoffs.setflags(write=False)
        if labels is None:
            labels = [[str(a) for a in range(k)] for k in self.action_counts]
        if [len(l) for l in labels] != list(self.action_counts):
            raise ContractError("labels do not match action counts")
        self.labels = [list(l) for l in labels]

    @property
    def num_players(self):
        return self.payoffs.shape[-1]

    @property
    def action_counts(self):
        return tuple(self.payoffs.shape[:-1])

    def utility(self, joint):
        """Utility vector of ``joint`` (one action index per player)."""
        joint = tuple(joint)
        if len(joint) != self.num_players:
            raise ContractError(f"expected {self.num_players} actions, got {len(joint)}")
        for a, k in zip(joint, self.action_counts):
            if not 0 <= a < k:
                raise ContractError(f"action index {a} out of range [0, {k})")
        return self.payoffs[joint].copy()

    def player_matrix(self, player):
        """Payoff tensor of one player, shape ``action_counts``."""
        return self.payoffs[..., player]

    def to_dict(self):
        return {
            "num_players": self.num_players,
            "action_counts": list(self.action_counts),
            "payoffs": [self.payoffs[..., i].ravel().tolist() for i in range(self.num_players)],
            "labels": self.labels,
        }

    @classmethod
    def from_dict(cls, doc):
        try:
            n = int(doc["num_players"])
            counts = tuple(int(k) for k in doc["action_counts"])
            per_player = doc["payoffs"]
        except KeyError as exc:
            raise ContractError(f"matrix game document missing field {exc}") from None
        if len(counts) != n or len(per_player) != n:
            raise ContractError("num_players disagrees with action_counts/payoffs")
        arrays = []
        for i, p in enumerate(per_player):
            arr = np.asarray(p, dtype=float)
            if arr.size != int(np.prod(counts)):
                raise ContractError(f"player {i} payoff array has {arr.size} entries, "
                                    f"expected {int(np.prod(counts))}")
            arrays.append(arr.reshape(counts))
        return cls(np.stack(arrays, axis=-1), labels=doc.get("labels"))

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))

    def __eq__(self, other):
        return (isinstance(other, MatrixGame) and self.payoffs.shape == other.payoffs.shape
                and bool(np.array_equal(self.payoffs, other.payoffs)))

    def __repr__(self):
        return f"MatrixGame(action_counts={self.action_counts})"


def random_zero_sum_game(n, m, seed):
    """Two-player zero-sum game with row payoffs i.i.d. uniform on [0, 1)."""
    if n < 1 or m < 1:
        raise ContractError("a random game needs n, m >= 1")
    rng = np.random.default_rng(seed)
    a = rng.random((n, m))
    return MatrixGame(np.stack([a, -a], axis=-1))


def matching_pennies():
    a = np.array([[1.0, -1.0], [-1.0, 1.0]])
    return MatrixGame(np.stack([a, -a], axis=-1), labels=[["H", "T"], ["H", "T"]])


def rock_paper_scissors():
    a = np.array([[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]])
    names = ["R", "P", "S"]
    return MatrixGame(np.stack([a, -a], axis=-1), labels=[names, names])
