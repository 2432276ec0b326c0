"""Best responses, exploitability reports and the seed-averaging experiment."""
import itertools
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ContractError
from .games.matrix import random_zero_sum_game
from .regret import RmConfig, batch_policies, run_matrix2_batch, run_rm
from .subgame import SubgameSpec, action_values

GAIN_EPS = 1e-9


def best_response_value(spec: SubgameSpec, policies, player):
    """Best pure-response value and action index (lowest index wins ties)."""
    vals = action_values(spec.payoff_tensor(), policies, player)
    a = int(np.argmax(vals))
    return float(vals[a]), a


@dataclass
class ExploitabilityReport:
    best_response_values: list
    policy_values: list
    gains: list
    total: float
    normalized: bool = False
    clipped: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def exploitability(spec: SubgameSpec, policies, normalized=False, clip_noise=False):
    """Sum over players of the best-response gain; divided by N if ``normalized``.

    With ``clip_noise`` negative gains (possible with Monte Carlo utilities)
    are set to zero and the affected players listed in ``clipped``.
    """
    tensor = spec.payoff_tensor()
    if len(policies) != spec.num_players:
        raise ContractError(f"need {spec.num_players} policies, got {len(policies)}")
    brs, vals, gains, clipped = [], [], [], []
    for i in range(spec.num_players):
        pol = np.asarray(policies[i], dtype=float)
        if pol.shape != (spec.action_counts[i],):
            raise ContractError(f"policy {i} has shape {pol.shape}")
        av = action_values(tensor, policies, i)
        br, v = float(av.max()), float(av @ pol)
        gain = br - v
        if clip_noise and gain < 0:
            clipped.append(i)
            gain = 0.0
        brs.append(br)
        vals.append(v)
        gains.append(gain)
    total = float(sum(gains))
    if normalized:
        total /= spec.num_players
    return ExploitabilityReport(brs, vals, gains, total, normalized, clipped)


def average_policies(results, which="final"):
    """Per-player arithmetic mean of the final or average policies of ``results``."""
    if which not in ("final", "average"):
        raise ContractError(f"which must be 'final' or 'average', not {which!r}")
    if not results:
        raise ContractError("no results to average")
    attr = "final_policies" if which == "final" else "average_policies"
    shapes = [tuple(len(p) for p in getattr(r, attr)) for r in results]
    if len(set(shapes)) != 1:
        raise ContractError(f"results have mismatched action counts: {sorted(set(shapes))}")
    out = []
    for i in range(len(shapes[0])):
        mean = np.mean([getattr(r, attr)[i] for r in results], axis=0)
        out.append(mean / mean.sum())
    return out


def matrixize(spec: SubgameSpec, rollouts=64):
    """Dense utilities of a stochastic subgame, each joint averaged over ``rollouts`` queries."""
    out = np.zeros((*spec.action_counts, spec.num_players))
    for joint in itertools.product(*(range(k) for k in spec.action_counts)):
        out[joint] = np.mean([spec.utility(joint) for _ in range(rollouts)], axis=0)
    return SubgameSpec(spec.actions, tensor=out, kind=f"matrixized({spec.kind}, R={rollouts})")


@dataclass
class SeedAverageReport:
    single_final: float
    single_avg: float
    avg_of_avg: float
    avg_of_final: float
    seeds: int
    games: int
    rows: int
    cols: int
    iterations: int
    rm: dict
    master_seed: int
    per_game: list = field(default_factory=list)

    QUANTITIES = ("single_final", "single_avg", "avg_of_avg", "avg_of_final")

    def stderr(self, quantity):
        vals = np.array([g[quantity] for g in self.per_game])
        if len(vals) < 2:
            return float("nan")
        return float(vals.std(ddof=1) / np.sqrt(len(vals)))

    def to_dict(self):
        d = asdict(self)
        d["stderr"] = {q: self.stderr(q) for q in self.QUANTITIES}
        return d

    def rows_table(self):
        """Flat rows: (game, seed, iteration, quantity, value); seed -1 = aggregated."""
        out = []
        for g in self.per_game:
            for q in self.QUANTITIES:
                out.append((g["game"], -1, self.iterations, q, g[q]))
        for q in self.QUANTITIES:
            out.append(("mean", -1, self.iterations, q, getattr(self, q)))
        return out


def _zero_sum_gap(A, p, q):
    # p, q may be batched along a leading axis
    return (q @ A.T).max(axis=-1) - (p @ A).min(axis=-1)


def game_seed(master_seed, game):
    return int(np.random.SeedSequence([master_seed, game]).generate_state(1)[0])


def run_seed(master_seed, game, seed):
    return int(np.random.SeedSequence([master_seed, game, seed]).generate_state(1)[0])


def seed_average_experiment(n, m, rm_config=None, num_seeds=1000, num_games=20, master_seed=0):
    """Exploitability of final vs average policies, single runs vs seed averages.

    Runs ``num_seeds`` independent RM runs on each of ``num_games`` random
    zero-sum games and averages the four quantities over games.
    """
    if num_seeds < 1 or num_games < 1:
        raise ContractError("need at least one seed and one game")
    cfg = rm_config or RmConfig(iterations=256, linear=False, optimism=False)
    per_game = []
    for g in range(num_games):
        A = random_zero_sum_game(n, m, game_seed(master_seed, g)).payoffs[..., 0]
        seeds = [run_seed(master_seed, g, s) for s in range(num_seeds)]
        out = run_matrix2_batch(A, -A, seeds, RmConfig(**{**vars(cfg), "trace_every": 0}))
        final, avg = batch_policies(out, cfg.optimism)
        per_game.append({
            "game": g,
            "single_final": float(_zero_sum_gap(A, *final).mean()),
            "single_avg": float(_zero_sum_gap(A, *avg).mean()),
            "avg_of_avg": float(_zero_sum_gap(A, avg[0].mean(0), avg[1].mean(0))),
            "avg_of_final": float(_zero_sum_gap(A, final[0].mean(0), final[1].mean(0))),
        })
    means = {q: float(np.mean([g[q] for g in per_game])) for q in SeedAverageReport.QUANTITIES}
    return SeedAverageReport(**means, seeds=num_seeds, games=num_games, rows=n, cols=m,
                             iterations=cfg.iterations, rm=vars(cfg).copy(),
                             master_seed=master_seed, per_game=per_game)


def convergence_trace(spec, config):
    """(iteration, exploitability of the average policy) pairs for one RM run."""
    if config.trace_every <= 0:
        raise ContractError("trace_every must be positive for a convergence trace")
    return run_rm(spec, config).trace
