import numpy as np

from ..errors import UndefinedScoreError


def sos_scores(counts):
    """Sum-of-squares scores: ``C_i**2 / sum_j C_j**2``.

    Raises UndefinedScoreError when every count is zero.
    """
    c = np.asarray(counts, dtype=float)
    if c.ndim != 1 or c.size == 0:
        raise UndefinedScoreError("counts must be a nonempty 1-d sequence")
    if np.any(c < 0):
        raise UndefinedScoreError("supply-center counts must be nonnegative")
    sq = c * c
    total = sq.sum()
    if total == 0:
        raise UndefinedScoreError("all supply-center counts are zero")
    return sq / total
