"""GridConquest: a small simultaneous-move territory game.

Players order units on a toroidal grid of provinces, some of which are supply
centers (SCs). A year is one movement phase followed by an automatic
adjustment phase. Convoys, retreats and coasts do not exist; a dislodged unit
is destroyed.
"""
from collections import deque
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..errors import ContractError, InvalidOrderError
from .scoring import sos_scores

HOLD = "hold"
MOVE = "move"
SUPPORT_HOLD = "support-hold"
SUPPORT_MOVE = "support-move"
ORDER_KINDS = (HOLD, MOVE, SUPPORT_HOLD, SUPPORT_MOVE)

MOVEMENT = "movement"
ADJUSTMENT = "adjustment"

NOBODY = -1


class UnitOrder(NamedTuple):
    """One unit's order. Unused province fields are -1.

    ``target`` is the destination (move), the supported unit's province
    (support-hold) or the supported move's destination (support-move);
    ``supported`` is the moving unit's province for support-move.
    """
    kind: str
    source: int
    target: int = -1
    supported: int = -1

    def __str__(self):
        if self.kind == HOLD:
            return f"U{self.source} H"
        if self.kind == MOVE:
            return f"U{self.source} - {self.target}"
        if self.kind == SUPPORT_HOLD:
            return f"U{self.source} S {self.target}"
        return f"U{self.source} S {self.supported} - {self.target}"

    @classmethod
    def parse(cls, text):
        parts = text.split()
        src = int(parts[0].lstrip("U"))
        if parts[1] == "H":
            return cls(HOLD, src)
        if parts[1] == "-":
            return cls(MOVE, src, int(parts[2]))
        if len(parts) == 3:
            return cls(SUPPORT_HOLD, src, int(parts[2]))
        return cls(SUPPORT_MOVE, src, int(parts[4]), int(parts[2]))


def hold(p):
    return UnitOrder(HOLD, p)


def move(p, q):
    return UnitOrder(MOVE, p, q)


def support_hold(p, q):
    return UnitOrder(SUPPORT_HOLD, p, q)


def support_move(p, src, dst):
    return UnitOrder(SUPPORT_MOVE, p, dst, src)


class Board:
    """Static map data: adjacency, supply centers, home centers, horizon."""

    def __init__(self, adjacency, supply_centers, homes, horizon):
        self.adjacency = tuple(tuple(sorted(a)) for a in adjacency)
        self.num_provinces = len(self.adjacency)
        for p, nbrs in enumerate(self.adjacency):
            for q in nbrs:
                if p not in self.adjacency[q]:
                    raise ContractError(f"adjacency not symmetric between {p} and {q}")
        self.supply_centers = tuple(sorted(supply_centers))
        self.is_sc = tuple(p in set(self.supply_centers) for p in range(self.num_provinces))
        self.homes = tuple(tuple(sorted(h)) for h in homes)
        for h in self.homes:
            if not all(self.is_sc[p] for p in h):
                raise ContractError("every home province must be a supply center")
        self.num_players = len(self.homes)
        if horizon < 1:
            raise ContractError("horizon must be at least one year")
        self.horizon = int(horizon)
        self.distance = self._all_pairs_distance()
        self._hash = hash((self.adjacency, self.supply_centers, self.homes, self.horizon))

    def _all_pairs_distance(self):
        n = self.num_provinces
        dist = np.full((n, n), n + 1, dtype=np.int64)
        for s in range(n):
            dist[s, s] = 0
            queue = deque([s])
            while queue:
                p = queue.popleft()
                for q in self.adjacency[p]:
                    if dist[s, q] > dist[s, p] + 1:
                        dist[s, q] = dist[s, p] + 1
                        queue.append(q)
        dist.setflags(write=False)
        return dist

    @property
    def majority(self):
        return len(self.supply_centers) // 2 + 1

    def to_dict(self):
        return {
            "adjacency": [list(a) for a in self.adjacency],
            "supply_centers": list(self.supply_centers),
            "homes": [list(h) for h in self.homes],
            "horizon": self.horizon,
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(doc["adjacency"], doc["supply_centers"], doc["homes"], doc["horizon"])

    def __eq__(self, other):
        return self is other or (isinstance(other, Board) and self.to_dict() == other.to_dict())

    def __hash__(self):
        return self._hash


def torus_board(rows=4, cols=4, horizon=10):
    """The default 4-player board.

    Homes for player 0 are (0,0) and (0,1); the other players' homes are the
    translates by (0, cols/2), (rows/2, 0) and (rows/2, cols/2), so every seat
    is equivalent up to a symmetry of the torus.
    """
    if rows % 2 or cols % 2 or cols < 4 or rows < 2:
        raise ContractError("torus_board needs even rows >= 2 and even cols >= 4")

    def pid(r, c):
        return (r % rows) * cols + (c % cols)

    adjacency = []
    for r in range(rows):
        for c in range(cols):
            adjacency.append({pid(r - 1, c), pid(r + 1, c), pid(r, c - 1), pid(r, c + 1)})
    homes = []
    for dr, dc in ((0, 0), (0, cols // 2), (rows // 2, 0), (rows // 2, cols // 2)):
        homes.append([pid(dr, dc), pid(dr, dc + 1)])
    scs = sorted(p for h in homes for p in h)
    return Board(adjacency, scs, homes, horizon)


@dataclass(frozen=True)
class GameState:
    """A position. ``owner`` and ``units`` are indexed by province; -1 = nobody."""
    board: Board
    owner: tuple
    units: tuple
    year: int = 1
    season: str = MOVEMENT

    def unit_provinces(self, player):
        return tuple(p for p, u in enumerate(self.units) if u == player)

    def sc_counts(self):
        counts = [0] * self.board.num_players
        for p in self.board.supply_centers:
            if self.owner[p] != NOBODY:
                counts[self.owner[p]] += 1
        return counts

    def unit_counts(self):
        counts = [0] * self.board.num_players
        for u in self.units:
            if u != NOBODY:
                counts[u] += 1
        return counts

    def majority_holder(self):
        need = self.board.majority
        for i, c in enumerate(self.sc_counts()):
            if c >= need:
                return i
        return None

    def is_terminal(self):
        return self.season == ADJUSTMENT or self.majority_holder() is not None

    def alive(self):
        """Players still holding a unit or an SC."""
        sc = self.sc_counts()
        un = self.unit_counts()
        return [i for i in range(self.board.num_players) if sc[i] or un[i]]

    def to_dict(self):
        return {
            "board": self.board.to_dict(),
            "owner": list(self.owner),
            "units": list(self.units),
            "year": self.year,
            "season": self.season,
        }

    @classmethod
    def from_dict(cls, doc, board=None):
        board = board or Board.from_dict(doc["board"])
        return cls(board, tuple(doc["owner"]), tuple(doc["units"]), doc["year"], doc["season"])


def initial_state(board=None):
    board = board or torus_board()
    owner = [NOBODY] * board.num_provinces
    units = [NOBODY] * board.num_provinces
    for player, home in enumerate(board.homes):
        for p in home:
            owner[p] = player
            units[p] = player
    return GameState(board, tuple(owner), tuple(units))


def unit_orders(state, province):
    """All legal orders for the unit in ``province``, in sorted order."""
    adj = state.board.adjacency
    units = state.units
    out = [hold(province)]
    out.extend(move(province, q) for q in adj[province])
    out.extend(support_hold(province, q) for q in adj[province] if units[q] != NOBODY)
    for t in adj[province]:
        for x in adj[t]:
            if x != province and units[x] != NOBODY:
                out.append(support_move(province, x, t))
    out.sort()
    return out


def check_order(state, player, order):
    adj = state.board.adjacency
    n = state.board.num_provinces
    src = order.source
    if not 0 <= src < n or state.units[src] != player:
        raise InvalidOrderError(f"player {player} has no unit in province {src}")
    kind = order.kind
    if kind == HOLD:
        return
    if kind not in ORDER_KINDS:
        raise InvalidOrderError(f"unknown order kind {kind!r}")
    if order.target not in adj[src]:
        raise InvalidOrderError(f"{order}: target not adjacent to {src}")
    if kind == SUPPORT_HOLD and state.units[order.target] == NOBODY:
        raise InvalidOrderError(f"{order}: no unit to support")
    if kind == SUPPORT_MOVE:
        x = order.supported
        if x == src or not 0 <= x < n or state.units[x] == NOBODY:
            raise InvalidOrderError(f"{order}: no unit to support")
        if order.target not in adj[x]:
            raise InvalidOrderError(f"{order}: supported unit cannot reach {order.target}")


def validate_joint(state, joint):
    """Check ``joint`` (one tuple of orders per player) and index it by province."""
    if state.is_terminal():
        raise ContractError("cannot adjudicate a terminal state")
    if len(joint) != state.board.num_players:
        raise InvalidOrderError(f"expected {state.board.num_players} actions, got {len(joint)}")
    orders = {}
    for player, action in enumerate(joint):
        for order in action:
            check_order(state, player, order)
            if order.source in orders:
                raise InvalidOrderError(f"two orders for the unit in {order.source}")
            orders[order.source] = order
        missing = set(state.unit_provinces(player)) - {o.source for o in action}
        if missing:
            raise InvalidOrderError(f"player {player} gave no order to units in {sorted(missing)}")
    return orders


def resolve_movement(state, orders):
    """Return the set of successful move sources and the dislodged provinces."""
    moves = {p: o.target for p, o in orders.items() if o.kind == MOVE}
    attackers = {}
    for src, dst in moves.items():
        attackers.setdefault(dst, []).append(src)

    move_strength = dict.fromkeys(moves, 1)
    hold_strength = {p: 1 for p in orders if p not in moves}
    for p, o in orders.items():
        if o.kind == SUPPORT_HOLD:
            helped = o.target
        elif o.kind == SUPPORT_MOVE:
            helped = o.supported
        else:
            continue
        if any(a != helped for a in attackers.get(p, ())):
            continue  # cut
        if o.kind == SUPPORT_HOLD and helped not in moves:
            hold_strength[helped] += 1
        elif o.kind == SUPPORT_MOVE and moves.get(helped) == o.target:
            move_strength[helped] += 1

    status = {}
    candidates = []
    for dst, srcs in attackers.items():
        best = max(move_strength[s] for s in srcs)
        top = [s for s in srcs if move_strength[s] == best]
        for s in srcs:
            if len(top) > 1 or s != top[0]:
                status[s] = False
        if len(top) == 1:
            candidates.append(top[0])

    pending = set(candidates)
    while pending:
        progress = False
        for src in sorted(pending):
            if src in status:
                continue
            dst = moves[src]
            occupant = state.units[dst]
            strength = move_strength[src]
            if occupant == NOBODY:
                status[src] = True
            elif dst not in moves:
                status[src] = strength > hold_strength[dst]
            elif moves[dst] == src:
                other = status.get(dst)
                if other is False:
                    status[src] = strength > 1
                elif dst in pending:
                    theirs = move_strength[dst]
                    status[src] = strength > theirs
                    status[dst] = theirs > strength
                else:
                    status[src] = strength > 1
            else:
                other = status.get(dst)
                if other is None:
                    continue
                status[src] = True if other else strength > 1
            progress = True
        pending = {s for s in pending if s not in status}
        if pending and not progress:
            # What is left waits on itself: circular movement, all succeed.
            start = min(pending)
            cycle = [start]
            nxt = moves[start]
            while nxt != start and nxt in pending and nxt not in cycle:
                cycle.append(nxt)
                nxt = moves[nxt]
            for s in cycle:
                status[s] = True
            pending -= set(cycle)

    succeeded = {s for s in moves if status.get(s)}
    dislodged = set()
    for src in succeeded:
        dst = moves[src]
        if state.units[dst] != NOBODY and dst not in succeeded:
            dislodged.add(dst)
    return succeeded, dislodged


def _adjust(board, owner, units):
    """Disband surplus units and build on vacant owned home centers, in place."""
    dist = board.distance
    for player in range(board.num_players):
        owned = [p for p in board.supply_centers if owner[p] == player]
        mine = [p for p, u in enumerate(units) if u == player]
        surplus = len(mine) - len(owned)
        if surplus > 0:
            far = board.num_provinces + 1

            def key(p):
                d = min((int(dist[p, s]) for s in owned), default=far)
                return (-d, p)

            for p in sorted(mine, key=key)[:surplus]:
                units[p] = NOBODY
        elif surplus < 0:
            slots = [p for p in board.homes[player] if owner[p] == player and units[p] == NOBODY]
            for p in slots[:-surplus]:
                units[p] = player


def adjudicate(state, joint):
    """Resolve one movement phase plus the following adjustment phase.

    Pure: returns a new GameState and never mutates ``state``.
    """
    orders = validate_joint(state, joint)
    succeeded, dislodged = resolve_movement(state, orders)
    units = list(state.units)
    for s in succeeded:
        units[s] = NOBODY
    for p in dislodged:
        units[p] = NOBODY
    for s in succeeded:
        units[orders[s].target] = state.units[s]
    board = state.board
    owner = list(state.owner)
    for p in board.supply_centers:
        if units[p] != NOBODY:
            owner[p] = units[p]
    _adjust(board, owner, units)
    nxt = GameState(board, tuple(owner), tuple(units), state.year, ADJUSTMENT)
    if state.year < board.horizon and nxt.majority_holder() is None:
        nxt = GameState(board, nxt.owner, nxt.units, state.year + 1, MOVEMENT)
    return nxt


def terminal_value(state):
    """Outcome scores: one-hot for a majority holder, else sum-of-squares."""
    if not state.is_terminal():
        raise ContractError("terminal_value called on a non-terminal state")
    return state_value(state)


def state_value(state):
    """Score vector of any state; used as the value estimate at truncation."""
    winner = state.majority_holder()
    if winner is not None:
        out = np.zeros(state.board.num_players)
        out[winner] = 1.0
        return out
    return sos_scores(state.sc_counts())
