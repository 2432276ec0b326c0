"""One-ply equilibrium search over blueprint candidates.

Each player's subgame actions are the blueprint's top ``ceil(M * k)``
actions, where ``k`` is the player's unit count. A joint subgame action is
scored by applying it and rolling the blueprint forward for a few movement
phases, then reading the value of the reached state.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError
from .regret import RmConfig, run_rm, sample_final_action
from .subgame import SubgameSpec

EQUILIBRIUM = "equilibrium"
BEST_RESPONSE = "best-response"


@dataclass
class SearchConfig:
    M: float = 5
    rollout_horizon: int = 2
    rm: RmConfig = field(default_factory=lambda: RmConfig(iterations=256))
    mode: str = EQUILIBRIUM
    rollouts_per_query: int = 1
    br_rollouts: int = 64

    def __post_init__(self):
        if isinstance(self.rm, dict):
            self.rm = RmConfig(**self.rm)
        if self.M <= 0:
            raise ContractError("M must be positive")
        if self.rollout_horizon < 0:
            raise ContractError("rollout_horizon must be >= 0")
        if self.mode not in (EQUILIBRIUM, BEST_RESPONSE):
            raise ContractError(f"unknown search mode {self.mode!r}")
        if self.rollouts_per_query < 1 or self.br_rollouts < 1:
            raise ContractError("rollout counts must be >= 1")

    def to_dict(self):
        d = dict(vars(self))
        d["rm"] = dict(vars(self.rm))
        return d


def propose_actions(bp, env, state, player, M):
    """``(action, blueprint probability)`` pairs for the player's subgame actions."""
    k = env.unit_count(state, player)
    if k < 1:
        raise ContractError(f"player {player} controls no units and is out of the subgame")
    return bp.candidates(state, player, math.ceil(M * k))


def rollout_value(env, state, joint, bp, horizon, rng):
    """Apply ``joint``, then let every player follow the blueprint for ``horizon`` phases."""
    s = env.step(state, joint)
    for _ in range(horizon):
        if env.is_terminal(s):
            break
        s = env.step(s, tuple(bp.sample_action(s, p, rng) for p in range(env.num_players)))
    if env.is_terminal(s):
        return np.asarray(env.terminal_value(s), dtype=float)
    return np.asarray(env.value(s), dtype=float)


def _child_rng(rng):
    return np.random.default_rng(int(rng.integers(2 ** 63)))


def build_subgame(env, bp, state, cfg, rng):
    """Subgame spec backed by rollouts, plus each action's blueprint probability."""
    actions, probs = [], []
    for p in range(env.num_players):
        if env.unit_count(state, p) == 0:
            actions.append([()])
            probs.append([1.0])
            continue
        cands = propose_actions(bp, env, state, p, cfg.M)
        actions.append([a for a, _ in cands])
        probs.append([pr for _, pr in cands])
    oracle_rng = _child_rng(rng)
    horizon = cfg.rollout_horizon
    reps = cfg.rollouts_per_query

    def oracle(joint):
        chosen = tuple(actions[i][a] for i, a in enumerate(joint))
        total = rollout_value(env, state, chosen, bp, horizon, oracle_rng)
        for _ in range(reps - 1):
            total = total + rollout_value(env, state, chosen, bp, horizon, oracle_rng)
        return total / reps

    spec = SubgameSpec(actions, oracle, deterministic=False, kind="rollout")
    return spec, probs


def search_act(env, bp, state, agent, cfg, rng):
    """Pick ``agent``'s action; returns ``(action, EquilibriumResult or None)``."""
    if cfg.mode == BEST_RESPONSE:
        return best_response_act(env, bp, state, agent, cfg, rng), None
    if env.unit_count(state, agent) < 1:
        raise ContractError(f"player {agent} controls no units")
    spec, probs = build_subgame(env, bp, state, cfg, rng)
    rm_cfg = RmConfig(**{**vars(cfg.rm), "seed": int(rng.integers(2 ** 63)), "trace_every": 0})
    result = run_rm(spec, rm_cfg)
    result.blueprint_probs = probs
    idx = sample_final_action(result, agent, rng)
    return spec.actions[agent][idx], result


def best_response_act(env, bp, state, agent, cfg, rng):
    """Action with the highest mean rollout value against blueprint opponents.

    Opponent samples are shared across candidates (common random numbers).
    Ties go to the lexicographically smallest action.
    """
    cands = [a for a, _ in propose_actions(bp, env, state, agent, cfg.M)]
    if len(cands) == 1:
        return cands[0]
    opponents = [
        [bp.sample_action(state, p, rng) if p != agent else None for p in range(env.num_players)]
        for _ in range(cfg.br_rollouts)
    ]
    roll_rng = _child_rng(rng)
    means = []
    for a in cands:
        total = 0.0
        for joint in opponents:
            joint = list(joint)
            joint[agent] = a
            total += rollout_value(env, state, tuple(joint), bp, cfg.rollout_horizon,
                                   roll_rng)[agent]
        means.append(total / cfg.br_rollouts)
    best = max(means)
    return min(a for a, m in zip(cands, means) if m == best)


def format_result(result, player_names=None, action_format=None):
    """Human-readable policy listing with columns probs / bp_p / avg_u / orders."""
    fmt = action_format or _default_action_format
    lines = []
    for i in range(result.num_players):
        name = player_names[i] if player_names else f"P{i}"
        final = result.final_policies[i]
        avg_u = result.avg_utilities[i]
        bp = result.blueprint_probs[i] if result.blueprint_probs else [float("nan")] * len(final)
        lines.append(f"{name} avg_utility={float(final @ avg_u):.5f}")
        lines.append("  probs     bp_p      avg_u      orders")
        order = sorted(range(len(final)), key=lambda a: (-final[a], a))
        for a in order:
            lines.append(f"  {final[a]:.5f}   {bp[a]:.5f}   {avg_u[a]:.5f}  "
                         f"{fmt(result.actions[i][a])}")
    return "\n".join(lines)


def _default_action_format(action):
    if isinstance(action, tuple):
        return "(" + ", ".join(f"'{o}'" for o in action) + ")"
    return str(action)


class BlueprintAgent:
    kind = "blueprint"

    def __init__(self, bp):
        self.bp = bp

    def act(self, env, state, player, rng):
        return self.bp.sample_action(state, player, rng), None


class SearchAgent:
    kind = "searchbot"

    def __init__(self, bp, cfg=None):
        self.bp = bp
        self.cfg = cfg or SearchConfig()

    def act(self, env, state, player, rng):
        if env.unit_count(state, player) == 0:
            return (), None
        return search_act(env, self.bp, state, player, self.cfg, rng)


class BestResponseAgent(SearchAgent):
    kind = "brbot"

    def act(self, env, state, player, rng):
        if env.unit_count(state, player) == 0:
            return (), None
        return best_response_act(env, self.bp, state, player, self.cfg, rng), None
