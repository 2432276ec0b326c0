"""One-shot subgames: per-player action lists plus a joint-action utility oracle."""
import itertools

import numpy as np

from .errors import ContractError, UnsupportedOracleError
from .games.matrix import MatrixGame


class SubgameSpec:
    """A normal-form game given by action lists and a utility oracle.

    ``oracle(joint)`` maps a tuple of action indices to a utility vector.
    Matrix-backed specs keep their payoff tensor; other specs can be
    enumerated only when ``deterministic`` is true.
    """

    def __init__(self, actions, oracle=None, *, tensor=None, deterministic=False, kind="custom"):
        actions = [list(a) for a in actions]
        if not actions:
            raise ContractError("a subgame needs at least one player")
        for i, acts in enumerate(actions):
            if not acts:
                raise ContractError(f"player {i} has no actions")
            if len(set(map(_key, acts))) != len(acts):
                raise ContractError(f"player {i} has duplicate actions")
        self.actions = actions
        self.kind = kind
        if tensor is not None:
            tensor = np.asarray(tensor, dtype=float)
            if tensor.shape != (*self.action_counts, self.num_players):
                raise ContractError(f"tensor shape {tensor.shape} does not match action counts")
            self._tensor = tensor
            self.deterministic = True
            self.oracle = lambda joint: tensor[tuple(joint)].copy()
        else:
            if oracle is None:
                raise ContractError("need an oracle or a payoff tensor")
            self._tensor = None
            self.oracle = oracle
            self.deterministic = deterministic

    @classmethod
    def from_matrix(cls, game: MatrixGame):
        return cls(game.labels, tensor=game.payoffs, kind="matrix")

    @property
    def num_players(self):
        return len(self.actions)

    @property
    def action_counts(self):
        return tuple(len(a) for a in self.actions)

    @property
    def is_matrix(self):
        return self._tensor is not None

    def utility(self, joint):
        joint = tuple(int(a) for a in joint)
        if len(joint) != self.num_players or any(
                not 0 <= a < k for a, k in zip(joint, self.action_counts)):
            raise ContractError(f"joint action {joint} out of range for {self.action_counts}")
        return np.asarray(self.oracle(joint), dtype=float)

    def own_action_utilities(self, player, joint):
        """``v_i(a_i, a_-i)`` for every own action ``a_i``, others fixed by ``joint``."""
        if self._tensor is not None:
            index = list(joint)
            index[player] = slice(None)
            return self._tensor[tuple(index) + (player,)].copy()
        out = np.empty(self.action_counts[player])
        joint = list(joint)
        for a in range(len(out)):
            joint[player] = a
            out[a] = self.utility(joint)[player]
        return out

    def payoff_tensor(self):
        """Dense ``(*action_counts, num_players)`` utilities; enumerates if needed."""
        if self._tensor is not None:
            return self._tensor
        if not self.deterministic:
            raise UnsupportedOracleError(
                f"{self.kind} oracle is stochastic; matrixize it before exact analysis")
        out = np.empty((*self.action_counts, self.num_players))
        for joint in itertools.product(*(range(k) for k in self.action_counts)):
            out[joint] = self.utility(joint)
        self._tensor = out
        return out


def _key(action):
    try:
        hash(action)
        return action
    except TypeError:
        return repr(action)


def action_values(tensor, policies, player):
    """Expected utility of each of ``player``'s actions against the others' mixes."""
    u = tensor[..., player]
    for j in reversed(range(tensor.ndim - 1)):
        if j != player:
            u = np.tensordot(u, np.asarray(policies[j], dtype=float), axes=([j], [0]))
    return u


def policy_value(tensor, policies, player):
    return float(action_values(tensor, policies, player) @ np.asarray(policies[player]))


def exploitability_gains(tensor, policies):
    """Per-player (best-response value, policy value) pairs."""
    out = []
    for i in range(tensor.ndim - 1):
        vals = action_values(tensor, policies, i)
        out.append((float(vals.max()), float(vals @ np.asarray(policies[i], dtype=float))))
    return out


def total_exploitability(tensor, policies, normalized=False):
    total = sum(br - v for br, v in exploitability_gains(tensor, policies))
    return total / (tensor.ndim - 1) if normalized else total
