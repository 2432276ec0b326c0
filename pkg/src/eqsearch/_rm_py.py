"""Pure-numpy fallback for the two-player matrix RM kernel.

Vectorized over the seed axis. Semantics must match ``_rm_kernel.pyx``
exactly; tests compare the two on the same uniforms.
"""
import numpy as np


def _policies(regrets):
    pos = np.maximum(regrets, 0.0)
    total = pos.sum(axis=1, keepdims=True)
    k = regrets.shape[1]
    safe = np.where(total > 0.0, total, 1.0)
    return np.where(total > 0.0, pos / safe, 1.0 / k)


def _sample(policies, u):
    cum = np.cumsum(policies, axis=1)
    idx = (cum <= u[:, None]).sum(axis=1)
    return np.minimum(idx, policies.shape[1] - 1)


def _exploitability(U1, U2, w1, w2):
    p = w1 / w1.sum(axis=1, keepdims=True)
    q = w2 / w2.sum(axis=1, keepdims=True)
    v1 = q @ U1.T            # (S, n): row payoffs vs q
    v2 = p @ U2              # (S, m): column payoffs vs p
    base1 = np.einsum("sn,sn->s", p, v1)
    base2 = np.einsum("sm,sm->s", q, v2)
    return v1.max(axis=1) - base1 + v2.max(axis=1) - base2


def rm_matrix2_batch(U1, U2, uniforms, linear, optimism, trace_iters):
    """Run sampled RM on a bimatrix game once per row of ``uniforms``.

    ``uniforms`` has shape (seeds, iterations, 2). Returns a dict of the
    final per-seed state arrays plus the exploitability trace of the
    average policy at each entry of ``trace_iters`` (1-based).
    """
    U1 = np.ascontiguousarray(U1, dtype=float)
    U2 = np.ascontiguousarray(U2, dtype=float)
    uniforms = np.asarray(uniforms, dtype=float)
    S, T, _ = uniforms.shape
    n, m = U1.shape
    R1, R2 = np.zeros((S, n)), np.zeros((S, m))
    L1, L2 = np.zeros((S, n)), np.zeros((S, m))
    W1, W2 = np.zeros((S, n)), np.zeros((S, m))
    G1, G2 = np.zeros((S, n)), np.zeros((S, m))
    trace_iters = [int(t) for t in trace_iters]
    trace = np.zeros((S, len(trace_iters)))
    slot = {t: j for j, t in enumerate(trace_iters)}

    for t in range(T):
        p = _policies(R1 + L1 if optimism else R1)
        q = _policies(R2 + L2 if optimism else R2)
        if linear:
            f = t / (t + 1.0)
            R1 *= f
            R2 *= f
            W1 *= f
            W2 *= f
        a = _sample(p, uniforms[:, t, 0])
        b = _sample(q, uniforms[:, t, 1])
        u1 = U1[:, b].T
        u2 = U2[a, :]
        L1 = u1 - np.einsum("sn,sn->s", p, u1)[:, None]
        L2 = u2 - np.einsum("sm,sm->s", q, u2)[:, None]
        R1 += L1
        R2 += L2
        W1 += p
        W2 += q
        G1 += u1
        G2 += u2
        j = slot.get(t + 1)
        if j is not None:
            trace[:, j] = _exploitability(U1, U2, W1, W2)

    return {
        "regrets": (R1, R2),
        "last_instant": (L1, L2),
        "weights": (W1, W2),
        "utility_sums": (G1, G2),
        "trace": trace,
    }
