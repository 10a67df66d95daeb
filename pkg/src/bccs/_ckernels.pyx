# cython: language_level=3, boundscheck=False, wraparound=False
"""Bitmask kernels behind the trace-set comparisons.

Trace sets are encoded as bitmasks over a small per-query universe
(at most 63 traces); wider masks take a slower Python-integer path.
"""

from libc.stdlib cimport malloc, free

ctypedef unsigned long long u64


cdef u64* _load(object masks, Py_ssize_t* n) except NULL:
    cdef Py_ssize_t k = len(masks), i
    cdef u64* buf = <u64*> malloc((k + 1) * sizeof(u64))
    if buf == NULL:
        raise MemoryError()
    for i in range(k):
        buf[i] = <u64> masks[i]
    n[0] = k
    return buf


def dominated(p_masks, q_masks):
    """Every p-mask has some q-mask that is a subset of it."""
    cdef Py_ssize_t np_, nq, i, j
    cdef u64* ps
    try:
        ps = _load(list(p_masks), &np_)
    except OverflowError:
        return _wide_dominated(p_masks, q_masks)
    cdef u64* qs
    cdef u64 inv
    cdef bint found
    try:
        try:
            qs = _load(list(q_masks), &nq)
        except OverflowError:
            return _wide_dominated(p_masks, q_masks)
        try:
            for i in range(np_):
                inv = ~ps[i]
                found = False
                for j in range(nq):
                    if (qs[j] & inv) == 0:
                        found = True
                        break
                if not found:
                    return False
            return True
        finally:
            free(qs)
    finally:
        free(ps)


def _wide_dominated(p_masks, q_masks):
    # masks beyond 64 bits: plain Python integers
    return all(any(not (qm & ~pm) for qm in q_masks) for pm in p_masks)


def refuting_subset(p_masks, q_masks, int nbits):
    """Least B in [0, 2**nbits) missed by some p-mask but hit by every q-mask, else -1."""
    if nbits > 63:
        raise ValueError("universe too large for the bitmask kernel")
    cdef Py_ssize_t np_, nq, i
    cdef u64* ps = _load(list(p_masks), &np_)
    cdef u64* qs
    cdef u64 b, top = (<u64> 1) << nbits
    cdef bint p_hit, q_all
    try:
        qs = _load(list(q_masks), &nq)
        try:
            b = 0
            while b < top:
                p_hit = False
                for i in range(np_):
                    if (ps[i] & b) == 0:
                        p_hit = True
                        break
                if p_hit:
                    q_all = True
                    for i in range(nq):
                        if (qs[i] & b) == 0:
                            q_all = False
                            break
                    if q_all:
                        return <long long> b
                b += 1
            return -1
        finally:
            free(qs)
    finally:
        free(ps)
