"""Sampled regret matching with linear weighting and optimism.

Each iteration every player forms its acting policy from its regrets,
samples one action, and then updates the regret of every own action against
the sampled actions of the others. The compiled kernel in ``_rm_kernel``
handles two-player matrix subgames; everything else runs the generic loop
below, which calls the subgame oracle once per own action.
"""
import os
from dataclasses import dataclass, field

import numpy as np

from . import _rm_py
from .errors import ContractError
from .subgame import SubgameSpec, total_exploitability

if os.environ.get("EQSEARCH_PURE_PYTHON"):
    _kernel = None
else:
    try:
        from . import _rm_kernel as _kernel
    except ImportError:
        _kernel = None

BACKEND = "cython" if _kernel is not None else "python"

POLICY_ATOL = 1e-9


def policy_from_regrets(regrets):
    """Normalize the positive part of ``regrets``; uniform if none is positive."""
    r = np.asarray(regrets, dtype=float)
    if r.ndim != 1 or r.size == 0:
        raise ContractError("regret vector must be nonempty and 1-d")
    pos = np.maximum(r, 0.0)
    total = pos.sum()
    if total > 0.0:
        return pos / total
    return np.full(r.size, 1.0 / r.size)


def sample_index(policy, u):
    """Inverse-CDF draw: first index whose cumulative mass exceeds ``u``."""
    idx = int(np.searchsorted(np.cumsum(policy), u, side="right"))
    return min(idx, len(policy) - 1)


@dataclass
class RmConfig:
    iterations: int = 256
    linear: bool = True
    optimism: bool = True
    seed: int = 0
    trace_every: int = 0
    backend: str = "auto"  # auto | python | cython

    def __post_init__(self):
        if self.iterations < 1:
            raise ContractError("RM needs at least one iteration")
        if self.trace_every < 0:
            raise ContractError("trace_every must be >= 0")
        if self.backend not in ("auto", "python", "cython"):
            raise ContractError(f"unknown backend {self.backend!r}")


@dataclass
class PlayerRegrets:
    regrets: np.ndarray
    avg_weights: np.ndarray
    last_instant: np.ndarray
    utility_sums: np.ndarray
    iteration: int = 0

    @classmethod
    def zeros(cls, k):
        return cls(np.zeros(k), np.zeros(k), np.zeros(k), np.zeros(k))


@dataclass
class RegretState:
    players: list
    linear: bool = True
    optimism: bool = True

    @classmethod
    def zeros(cls, action_counts, linear=True, optimism=True):
        return cls([PlayerRegrets.zeros(k) for k in action_counts], linear, optimism)

    @property
    def iteration(self):
        return min(p.iteration for p in self.players)


def acting_policy(state, player):
    """Policy used to sample at the current iteration.

    With optimism the latest instantaneous regret is counted a second time.
    """
    pr = state.players[player]
    if pr.iteration == 0:
        return np.full(pr.regrets.size, 1.0 / pr.regrets.size)
    if state.optimism:
        return policy_from_regrets(pr.regrets + pr.last_instant)
    return policy_from_regrets(pr.regrets)


def rm_update(state, player, sampled_opponent_actions, utilities, policy=None):
    """Apply one sampled regret update for ``player`` in place and return ``state``.

    ``utilities[a]`` is the player's payoff for own action ``a`` against
    ``sampled_opponent_actions``. ``policy`` defaults to the acting policy.
    """
    pr = state.players[player]
    u = np.asarray(utilities, dtype=float)
    if u.shape != pr.regrets.shape:
        raise ContractError(f"expected {pr.regrets.size} utilities, got shape {u.shape}")
    if policy is None:
        policy = acting_policy(state, player)
    t = pr.iteration
    if state.linear:
        f = t / (t + 1.0)
        pr.regrets *= f
        pr.avg_weights *= f
    instant = u - policy @ u
    pr.regrets += instant
    pr.last_instant = instant
    pr.avg_weights += policy
    pr.utility_sums += u
    pr.iteration = t + 1
    return state


@dataclass
class EquilibriumResult:
    actions: list
    final_policies: list
    average_policies: list
    avg_utilities: list
    iterations: int
    trace: list = field(default_factory=list)
    trace_oracle: str = "none"
    config: RmConfig = None
    blueprint_probs: list = None

    @property
    def num_players(self):
        return len(self.actions)

    def to_dict(self):
        players = []
        for i in range(self.num_players):
            entry = {
                "actions": [_label(a) for a in self.actions[i]],
                "final_policy": self.final_policies[i].tolist(),
                "average_policy": self.average_policies[i].tolist(),
                "avg_utility": self.avg_utilities[i].tolist(),
            }
            if self.blueprint_probs is not None:
                entry["blueprint_prob"] = list(map(float, self.blueprint_probs[i]))
            players.append(entry)
        return {
            "iterations": self.iterations,
            "config": None if self.config is None else vars(self.config).copy(),
            "players": players,
            "trace_oracle": self.trace_oracle,
            "trace": [[int(t), float(e)] for t, e in self.trace],
        }


def _label(action):
    if isinstance(action, tuple):
        return [str(o) for o in action]
    return str(action)


def _trace_points(iterations, every):
    if every <= 0:
        return []
    pts = {1, iterations}
    pts.update(range(every, iterations + 1, every))
    return sorted(pts)


def _normalize(w):
    total = w.sum()
    if total <= 0:
        return np.full(w.size, 1.0 / w.size)
    return w / total


def _state_policies(state):
    final = [acting_policy(state, i) for i in range(len(state.players))]
    avg = [_normalize(p.avg_weights) for p in state.players]
    return final, avg


def _use_kernel(spec, config):
    if config.backend == "python" or not spec.is_matrix or spec.num_players != 2:
        return False
    if config.backend == "cython" and _kernel is None:
        raise ContractError("compiled kernel requested but not built")
    return True


def draw_uniforms(seed, iterations, num_players):
    return np.random.default_rng(seed).random((iterations, num_players))


def run_matrix2_batch(U1, U2, seeds, config):
    """Run one RM per seed on a bimatrix game; returns the raw kernel output."""
    uniforms = np.stack([draw_uniforms(s, config.iterations, 2) for s in seeds])
    points = _trace_points(config.iterations, config.trace_every)
    impl = _rm_py if (_kernel is None or config.backend == "python") else _kernel
    out = impl.rm_matrix2_batch(U1, U2, uniforms, bool(config.linear), bool(config.optimism),
                                np.asarray(points, dtype=np.int64))
    out["trace_points"] = points
    return out


def batch_policies(out, optimism):
    """Final and average policies, each a pair of (seeds, k) arrays."""
    final, avg = [], []
    for R, L, W in zip(out["regrets"], out["last_instant"], out["weights"]):
        final.append(_rm_py._policies(R + L if optimism else R))
        avg.append(W / W.sum(axis=1, keepdims=True))
    return final, avg


def run_rm(spec: SubgameSpec, config: RmConfig) -> EquilibriumResult:
    """Sampled RM on ``spec`` for ``config.iterations`` iterations."""
    n = spec.num_players
    T = config.iterations
    if _use_kernel(spec, config):
        tensor = spec.payoff_tensor()
        out = run_matrix2_batch(tensor[..., 0], tensor[..., 1], [config.seed], config)
        final, avg = batch_policies(out, config.optimism)
        return EquilibriumResult(
            actions=spec.actions,
            final_policies=[final[0][0], final[1][0]],
            average_policies=[avg[0][0], avg[1][0]],
            avg_utilities=[g[0] / T for g in out["utility_sums"]],
            iterations=T,
            trace=list(zip(out["trace_points"], out["trace"][0].tolist())),
            trace_oracle="matrix" if out["trace_points"] else "none",
            config=config,
        )

    uniforms = draw_uniforms(config.seed, T, n)
    state = RegretState.zeros(spec.action_counts, config.linear, config.optimism)
    points = set(_trace_points(T, config.trace_every))
    tensor = None
    trace_oracle = "none"
    if points:
        if spec.deterministic:
            tensor = spec.payoff_tensor()
            trace_oracle = "matrix" if spec.kind == "matrix" else "enumerated"
        else:
            points = set()
            trace_oracle = "unavailable: stochastic oracle"
    trace = []
    for t in range(T):
        policies = [acting_policy(state, i) for i in range(n)]
        joint = [sample_index(policies[i], uniforms[t, i]) for i in range(n)]
        utilities = [spec.own_action_utilities(i, joint) for i in range(n)]
        for i in range(n):
            opponents = joint[:i] + joint[i + 1:]
            rm_update(state, i, opponents, utilities[i], policies[i])
        if t + 1 in points:
            _, avg = _state_policies(state)
            trace.append((t + 1, total_exploitability(tensor, avg)))
    final, avg = _state_policies(state)
    return EquilibriumResult(
        actions=spec.actions,
        final_policies=final,
        average_policies=avg,
        avg_utilities=[p.utility_sums / T for p in state.players],
        iterations=T,
        trace=trace,
        trace_oracle=trace_oracle,
        config=config,
    )


def sample_final_action(result, player, rng):
    """Draw the played action index from the final iteration's policy."""
    policy = result.final_policies[player]
    if len(policy) == 0:
        raise ContractError("empty policy")
    return sample_index(policy, rng.random())
