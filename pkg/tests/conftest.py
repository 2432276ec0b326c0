import numpy as np
import pytest

from eqsearch.games import gridconquest as gc


@pytest.fixture
def board():
    return gc.torus_board()


def position(board, units, owner=None, year=1):
    """State with ``units`` ({province: player}); SC owners default to the home layout."""
    if owner is None:
        owner = {p: i for i, home in enumerate(board.homes) for p in home}
    u = [gc.NOBODY] * board.num_provinces
    o = [gc.NOBODY] * board.num_provinces
    for p, pl in units.items():
        u[p] = pl
    for p, pl in owner.items():
        o[p] = pl
    return gc.GameState(board, tuple(o), tuple(u), year)


def holds_for(state, overrides=()):
    """Joint action where every unit holds except for the given orders."""
    given = {o.source: o for o in overrides}
    joint = []
    for pl in range(state.board.num_players):
        joint.append(tuple(given.get(p, gc.hold(p)) for p in state.unit_provinces(pl)))
    return tuple(joint)


def random_joint(state, rng):
    joint = []
    for pl in range(state.board.num_players):
        acts = []
        for p in state.unit_provinces(pl):
            orders = gc.unit_orders(state, p)
            acts.append(orders[rng.integers(len(orders))])
        joint.append(tuple(acts))
    return tuple(joint)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# --- acceptance reporting ---------------------------------------------------
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES, key=lambda x: x[0]):
            terminalreporter.write_line(line)
