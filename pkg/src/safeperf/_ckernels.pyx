# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled trial-counting kernels.

Both kernels consume a block of uniforms ``u`` of shape (trials, n) drawn by
the caller, so the compiled and the numpy kernels see identical randomness
and return identical counts.  A frame is a miss when its uniform falls below
the current miss probability.
"""

cimport cython


def iid_block(const double[:, ::1] u, double p_miss, Py_ssize_t y_min):
    """Return (rejected vectors, total misses) for IID frames."""
    cdef Py_ssize_t trials = u.shape[0], n = u.shape[1]
    cdef Py_ssize_t i, j, m
    cdef long long rejects = 0, misses = 0
    with nogil:
        for i in range(trials):
            m = 0
            for j in range(n):
                if u[i, j] < p_miss:
                    m += 1
            misses += m
            if m >= y_min:
                rejects += 1
    return rejects, misses


def markov_block(const double[:, ::1] u, double p_miss, double p_mm, double p_hm,
                 Py_ssize_t y_min):
    """Return (rejected vectors, total misses) for a two-state miss chain.

    The first frame is drawn from the stationary law (miss w.p. ``p_miss``);
    afterwards a miss follows a miss w.p. ``p_mm`` and a hit w.p. ``p_hm``.
    """
    cdef Py_ssize_t trials = u.shape[0], n = u.shape[1]
    cdef Py_ssize_t i, j, m
    cdef bint miss
    cdef long long rejects = 0, misses = 0
    with nogil:
        for i in range(trials):
            miss = u[i, 0] < p_miss
            m = miss
            for j in range(1, n):
                if miss:
                    miss = u[i, j] < p_mm
                else:
                    miss = u[i, j] < p_hm
                m += miss
            misses += m
            if m >= y_min:
                rejects += 1
    return rejects, misses
