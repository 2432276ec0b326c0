"""Adapters giving search a uniform view of a game: step, terminal test, values."""
import numpy as np

from .games import gridconquest as gc
from .games.matrix import MatrixGame


class GridConquestEnv:
    def __init__(self, board=None):
        self.board = board or gc.torus_board()

    @property
    def num_players(self):
        return self.board.num_players

    def initial_state(self):
        return gc.initial_state(self.board)

    def step(self, state, joint):
        return gc.adjudicate(state, joint)

    def is_terminal(self, state):
        return state.is_terminal()

    def terminal_value(self, state):
        return gc.terminal_value(state)

    def value(self, state):
        return gc.state_value(state)

    def unit_count(self, state, player):
        return len(state.unit_provinces(player))


class MatrixEnv:
    """A one-shot game: the root state is ``None``; stepping returns the joint."""

    def __init__(self, game: MatrixGame):
        self.game = game

    @property
    def num_players(self):
        return self.game.num_players

    def initial_state(self):
        return None

    def step(self, state, joint):
        return tuple(int(a) for a in joint)

    def is_terminal(self, state):
        return state is not None

    def terminal_value(self, state):
        return self.game.utility(state)

    def value(self, state):
        if state is None:
            return np.full(self.num_players, np.nan)
        return self.game.utility(state)

    def unit_count(self, state, player):
        return 1
