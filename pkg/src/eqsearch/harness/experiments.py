"""Game playing, 1-vs-rest evaluations and parameter sweeps on GridConquest."""
import copy
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, ContractError
from ..games import gridconquest as gc


def game_seed(master_seed, index):
    """Per-game seed derived from the master seed and the game index."""
    return int(np.random.SeedSequence([master_seed, index]).generate_state(1)[0])


def play_game(env, agents, seed, keep_log=True, player_names=None):
    """Play one game to completion; each seat draws from its own seeded stream.

    Returns ``(final_state, log)`` where ``log`` is a list of per-phase
    records (empty when ``keep_log`` is false).
    """
    if len(agents) != env.num_players:
        raise ContractError(f"need {env.num_players} agents, got {len(agents)}")
    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(len(agents))]
    state = env.initial_state()
    log = []
    while not env.is_terminal(state):
        joint, searches = [], {}
        for p, agent in enumerate(agents):
            action, result = agent.act(env, state, p, rngs[p])
            joint.append(action)
            if result is not None and keep_log:
                searches[str(p)] = result.to_dict()
        joint = tuple(joint)
        if keep_log:
            log.append({
                "year": state.year,
                "orders": [[str(o) for o in action] for action in joint],
                "sc_counts": state.sc_counts(),
                "search": searches,
            })
        state = env.step(state, joint)
    return state, log


def replay(initial_state, log):
    """Re-adjudicate a game log from ``initial_state``; returns the final state."""
    state = initial_state
    for record in log:
        joint = tuple(tuple(gc.UnitOrder.parse(o) for o in action) for action in record["orders"])
        state = gc.adjudicate(state, joint)
    return state


@dataclass
class MatchReport:
    agent_a: str
    agent_b: str
    seats: list
    scores: list                      # per-game score vectors
    master_seed: int
    game_seeds: list = field(default_factory=list)

    @property
    def num_games(self):
        return len(self.scores)

    @property
    def num_players(self):
        return len(self.scores[0]) if self.scores else 0

    def a_scores(self):
        return np.array([s[seat] for s, seat in zip(self.scores, self.seats)])

    def b_scores(self):
        """Mean score of the B seats in each game."""
        out = []
        for s, seat in zip(self.scores, self.seats):
            others = [v for i, v in enumerate(s) if i != seat]
            out.append(float(np.mean(others)))
        return np.array(out)

    @property
    def mean_a(self):
        return float(self.a_scores().mean())

    @property
    def stderr_a(self):
        a = self.a_scores()
        return float(a.std(ddof=1) / np.sqrt(len(a))) if len(a) > 1 else float("nan")

    @property
    def mean_b(self):
        return float(self.b_scores().mean())

    @property
    def stderr_b(self):
        b = self.b_scores()
        return float(b.std(ddof=1) / np.sqrt(len(b))) if len(b) > 1 else float("nan")

    @property
    def null_score(self):
        return 1.0 / self.num_players

    def summary(self):
        return {
            "agent_a": self.agent_a, "agent_b": self.agent_b, "games": self.num_games,
            "mean_a": self.mean_a, "stderr_a": self.stderr_a,
            "mean_b": self.mean_b, "stderr_b": self.stderr_b,
            "null": self.null_score,
        }


def evaluate_1v6(env, make_a, make_b, num_games, seed, on_game=None):
    """Seat one A agent (rotating seats) against B agents in every other seat.

    ``make_a`` / ``make_b`` are zero-argument factories so that agents carry
    no state between games.
    """
    if num_games < 1:
        raise ContractError("num_games must be >= 1")
    n = env.num_players
    if n < 2:
        raise ContractError("1-vs-rest evaluation needs at least two seats")
    try:
        probe_a, probe_b = make_a(), make_b()
    except Exception as exc:
        raise ConfigError(f"agent construction failed: {exc}") from exc
    seats, scores, seeds = [], [], []
    for g in range(num_games):
        seat = g % n
        agents = [make_a() if i == seat else make_b() for i in range(n)]
        gs = game_seed(seed, g)
        final, log = play_game(env, agents, gs, keep_log=on_game is not None)
        value = env.terminal_value(final)
        seats.append(seat)
        scores.append([float(v) for v in value])
        seeds.append(gs)
        if on_game is not None:
            on_game(g, seat, gs, final, log)
    return MatchReport(probe_a.kind, probe_b.kind, seats, scores, seed, seeds)


SWEEP_AXES = ("M", "iterations", "rollout_horizon")


def sweep(env, axis, values, make_a_for, make_b, num_games, seed):
    """One evaluation per value of ``axis``; every point reuses the same game seeds.

    ``make_a_for(axis, value)`` returns an A-agent factory.
    """
    if axis not in SWEEP_AXES:
        raise ContractError(f"sweep axis must be one of {SWEEP_AXES}, not {axis!r}")
    if not values:
        raise ContractError("sweep needs at least one value")
    return [(v, evaluate_1v6(env, make_a_for(axis, v), make_b, num_games, seed)) for v in values]


def with_axis(search_cfg, axis, value):
    cfg = copy.deepcopy(search_cfg)
    if axis == "iterations":
        cfg.rm.iterations = int(value)
    elif axis == "rollout_horizon":
        cfg.rollout_horizon = int(value)
    else:
        cfg.M = float(value)
    cfg.__post_init__()
    return cfg
