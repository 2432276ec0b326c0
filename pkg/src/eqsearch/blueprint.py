"""Blueprint policies: candidate proposal and rollout sampling.

``GridConquestBlueprint`` is a per-unit softmax over a few handcrafted order
features; a player's action probability is the product of its units' order
probabilities. ``FixedBlueprint`` assigns fixed mixed strategies over a
matrix game's actions.
"""
import bisect
import heapq
import math
from functools import lru_cache

import numpy as np

from .errors import ContractError
from .games import gridconquest as gc

DEFAULT_ROLLOUT_TEMPERATURE = 0.75

W_APPROACH = 1.0
W_ENTER_SC = 0.5
W_SUPPORT_FRIEND = 0.3


def _softmax(scores, temperature):
    z = np.asarray(scores, dtype=float) / temperature
    z -= z.max()
    e = np.exp(z)
    return e / e.sum()


class GridConquestBlueprint:
    def __init__(self, temperature=DEFAULT_ROLLOUT_TEMPERATURE, cache_size=65536):
        if temperature <= 0:
            raise ContractError("blueprint temperature must be positive")
        self.temperature = temperature
        self._unit_table = lru_cache(maxsize=cache_size)(self._unit_table_uncached)

    def order_scores(self, state, province):
        """Orders for the unit in ``province`` and their feature scores."""
        player = state.units[province]
        board = state.board
        targets = [p for p in board.supply_centers if state.owner[p] != player]
        dist = board.distance
        orders = gc.unit_orders(state, province)

        def gap(p):
            return min((int(dist[p, t]) for t in targets), default=0)

        here = gap(province)
        scores = []
        for o in orders:
            if o.kind == gc.MOVE:
                s = W_APPROACH * (here - gap(o.target))
                if board.is_sc[o.target] and state.owner[o.target] != player:
                    s += W_ENTER_SC
            elif o.kind == gc.SUPPORT_MOVE and state.units[o.supported] == player:
                s = W_SUPPORT_FRIEND
            else:
                s = 0.0
            scores.append(s)
        return orders, np.array(scores)

    def _unit_table_uncached(self, units, owner, board, province):
        state = gc.GameState(board, owner, units)
        orders, scores = self.order_scores(state, province)
        probs = _softmax(scores, 1.0)
        cdf = np.cumsum(_softmax(scores, self.temperature)).tolist()
        return orders, probs, cdf

    def unit_distribution(self, state, province):
        orders, probs, _ = self._unit_table(state.units, state.owner, state.board, province)
        return orders, probs

    def sample_action(self, state, player, rng):
        """One order per unit, each drawn at the rollout temperature."""
        provinces = state.unit_provinces(player)
        if not provinces:
            return ()
        draws = rng.random(len(provinces)).tolist()
        out = []
        for p, u in zip(provinces, draws):
            orders, _, cdf = self._unit_table(state.units, state.owner, state.board, p)
            i = bisect.bisect_right(cdf, u * cdf[-1])
            out.append(orders[min(i, len(orders) - 1)])
        return tuple(out)

    def action_prob(self, state, player, action):
        prob = 1.0
        for order in action:
            orders, probs = self.unit_distribution(state, order.source)
            prob *= float(probs[orders.index(order)])
        return prob

    def candidates(self, state, player, limit):
        """Up to ``limit`` highest-probability actions via beam search.

        Beam width is ``4 * limit``; the result is sorted by probability
        descending, then lexicographically by action.
        """
        provinces = state.unit_provinces(player)
        if not provinces:
            return []
        width = 4 * limit
        beam = [(0.0, ())]  # (negative log prob, partial action)
        for p in provinces:
            orders, probs = self.unit_distribution(state, p)
            logp = np.log(probs)
            grown = []
            for nlp, partial in beam:
                for o, lp in zip(orders, logp):
                    grown.append((nlp - lp, partial + (o,)))
            beam = heapq.nsmallest(width, grown)
        ranked = sorted(((math.exp(-nlp), a) for nlp, a in beam),
                        key=lambda x: (-round(x[0], 14), x[1]))
        return [(a, p) for p, a in ranked[:limit]]


class FixedBlueprint:
    """Fixed per-player mixed strategies over integer actions of a one-shot game."""

    def __init__(self, policies, temperature=1.0):
        self.policies = [np.asarray(p, dtype=float) / np.sum(p) for p in policies]
        self.temperature = temperature

    def candidates(self, state, player, limit):
        pol = self.policies[player]
        ranked = sorted(((float(pol[a]), a) for a in range(len(pol)) if pol[a] > 0),
                        key=lambda x: (-x[0], x[1]))
        return [(a, p) for p, a in ranked[:limit]]

    def sample_action(self, state, player, rng):
        pol = self.policies[player]
        if self.temperature != 1.0:
            w = pol ** (1.0 / self.temperature)
            pol = w / w.sum()
        i = int(np.searchsorted(np.cumsum(pol), rng.random(), side="right"))
        return min(i, len(pol) - 1)

    def action_prob(self, state, player, action):
        return float(self.policies[player][action])
