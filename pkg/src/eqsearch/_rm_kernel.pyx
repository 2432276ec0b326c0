# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled two-player matrix RM kernel; mirrors ``eqsearch._rm_py``."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef void _policy(double[::1] r, double[::1] last, bint optimism, double[::1] out) noexcept nogil:
    cdef Py_ssize_t k = r.shape[0], i
    cdef double total = 0.0, x
    for i in range(k):
        x = r[i] + last[i] if optimism else r[i]
        x = x if x > 0.0 else 0.0
        out[i] = x
        total += x
    if total > 0.0:
        for i in range(k):
            out[i] = out[i] / total
    else:
        for i in range(k):
            out[i] = 1.0 / k


cdef Py_ssize_t _sample(double[::1] p, double u) noexcept nogil:
    cdef Py_ssize_t k = p.shape[0], i
    cdef double c = 0.0
    for i in range(k):
        c += p[i]
        if c > u:
            return i
    return k - 1


cdef double _exploitability(double[:, ::1] U1, double[:, ::1] U2,
                            double[::1] w1, double[::1] w2,
                            double[::1] p, double[::1] q) noexcept nogil:
    cdef Py_ssize_t n = U1.shape[0], m = U1.shape[1], i, j
    cdef double s1 = 0.0, s2 = 0.0, v, best1, best2, base1 = 0.0, base2 = 0.0
    for i in range(n):
        s1 += w1[i]
    for j in range(m):
        s2 += w2[j]
    for i in range(n):
        p[i] = w1[i] / s1
    for j in range(m):
        q[j] = w2[j] / s2
    for i in range(n):
        v = 0.0
        for j in range(m):
            v += U1[i, j] * q[j]
        base1 += p[i] * v
        if i == 0 or v > best1:
            best1 = v
    for j in range(m):
        v = 0.0
        for i in range(n):
            v += U2[i, j] * p[i]
        base2 += q[j] * v
        if j == 0 or v > best2:
            best2 = v
    return best1 - base1 + best2 - base2


def rm_matrix2_batch(U1, U2, uniforms, bint linear, bint optimism, trace_iters):
    cdef double[:, ::1] A = np.ascontiguousarray(U1, dtype=np.float64)
    cdef double[:, ::1] B = np.ascontiguousarray(U2, dtype=np.float64)
    cdef double[:, :, ::1] unif = np.ascontiguousarray(uniforms, dtype=np.float64)
    cdef Py_ssize_t S = unif.shape[0], T = unif.shape[1]
    cdef Py_ssize_t n = A.shape[0], m = A.shape[1]
    cdef Py_ssize_t s, t, i, j, a, b, slot
    cdef double f, e1, e2

    tr = np.asarray(trace_iters, dtype=np.int64)
    cdef Py_ssize_t ntrace = tr.shape[0]
    slots_np = np.full(T + 1, -1, dtype=np.int64)
    for j in range(ntrace):
        if 1 <= tr[j] <= T:
            slots_np[tr[j]] = j
    cdef long long[::1] slots = slots_np

    R1_np, R2_np = np.zeros((S, n)), np.zeros((S, m))
    L1_np, L2_np = np.zeros((S, n)), np.zeros((S, m))
    W1_np, W2_np = np.zeros((S, n)), np.zeros((S, m))
    G1_np, G2_np = np.zeros((S, n)), np.zeros((S, m))
    trace_np = np.zeros((S, ntrace))
    cdef double[:, ::1] R1 = R1_np, R2 = R2_np, L1 = L1_np, L2 = L2_np
    cdef double[:, ::1] W1 = W1_np, W2 = W2_np, G1 = G1_np, G2 = G2_np
    cdef double[:, ::1] trace = trace_np
    cdef double[::1] p = np.zeros(n), q = np.zeros(m)
    cdef double[::1] pa = np.zeros(n), qa = np.zeros(m)

    with nogil:
        for s in range(S):
            for t in range(T):
                _policy(R1[s], L1[s], optimism, p)
                _policy(R2[s], L2[s], optimism, q)
                if linear:
                    f = t / (t + 1.0)
                    for i in range(n):
                        R1[s, i] *= f
                        W1[s, i] *= f
                    for j in range(m):
                        R2[s, j] *= f
                        W2[s, j] *= f
                a = _sample(p, unif[s, t, 0])
                b = _sample(q, unif[s, t, 1])
                e1 = 0.0
                for i in range(n):
                    e1 += p[i] * A[i, b]
                e2 = 0.0
                for j in range(m):
                    e2 += q[j] * B[a, j]
                for i in range(n):
                    L1[s, i] = A[i, b] - e1
                    R1[s, i] += L1[s, i]
                    W1[s, i] += p[i]
                    G1[s, i] += A[i, b]
                for j in range(m):
                    L2[s, j] = B[a, j] - e2
                    R2[s, j] += L2[s, j]
                    W2[s, j] += q[j]
                    G2[s, j] += B[a, j]
                slot = slots[t + 1]
                if slot >= 0:
                    trace[s, slot] = _exploitability(A, B, W1[s], W2[s], pa, qa)

    return {
        "regrets": (R1_np, R2_np),
        "last_instant": (L1_np, L2_np),
        "weights": (W1_np, W2_np),
        "utility_sums": (G1_np, G2_np),
        "trace": trace_np,
    }
