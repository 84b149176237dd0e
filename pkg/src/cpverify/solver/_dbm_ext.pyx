# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Difference-bound matrix, compiled kernel. Same interface as ``_dbm_py``."""

from libc.stdlib cimport malloc, free
from libc.string cimport memcpy

DEF C_INF = 4611686018427387904   # 1 << 62
DEF C_LIMIT = 1099511627776       # 1 << 40

INF = C_INF
LIMIT = C_LIMIT


cdef class DBM:
    cdef long long *d
    cdef readonly int n

    def __cinit__(self, int n, _d=None):
        cdef Py_ssize_t k
        self.n = n
        self.d = <long long *> malloc(sizeof(long long) * n * n if n > 0 else 1)
        if self.d == NULL:
            raise MemoryError()
        if _d is None:
            for k in range(n * n):
                self.d[k] = C_INF
            for k in range(n):
                self.d[k * n + k] = 0
        else:
            for k in range(n * n):
                self.d[k] = _d[k]

    def __dealloc__(self):
        if self.d != NULL:
            free(self.d)

    def __reduce__(self):
        return (DBM, (self.n, [self.d[k] for k in range(self.n * self.n)]))

    cpdef DBM copy(self):
        cdef DBM out = DBM.__new__(DBM, self.n)
        memcpy(out.d, self.d, sizeof(long long) * self.n * self.n)
        return out

    cpdef long long get(self, int i, int j):
        return self.d[i * self.n + j]

    cpdef int add_edge(self, int i, int j, long long w):
        cdef int n = self.n
        cdef long long *d = self.d
        cdef long long back, dai, base, v
        cdef int a, b, off, jn
        if w >= C_LIMIT:
            return 0
        if w <= -C_LIMIT:
            w = -C_LIMIT
        if w >= d[i * n + j]:
            return 0
        back = d[j * n + i]
        if back < C_INF and back + w < 0:
            return -1
        jn = j * n
        for a in range(n):
            dai = d[a * n + i]
            if dai >= C_INF:
                continue
            base = dai + w
            off = a * n
            for b in range(n):
                if d[jn + b] >= C_INF:
                    continue
                v = base + d[jn + b]
                if v < d[off + b]:
                    d[off + b] = v
        return 1

    cpdef void join_with(self, DBM other):
        cdef Py_ssize_t k
        cdef long long *d = self.d
        cdef long long *o = other.d
        for k in range(self.n * self.n):
            if o[k] > d[k]:
                d[k] = o[k]

    cpdef int meet_with(self, DBM other):
        cdef int n = self.n
        cdef long long *d = self.d
        cdef long long *o = other.d
        cdef Py_ssize_t k, cnt = 0
        cdef int a, b, kk, off, kn
        cdef long long dak, v
        for k in range(n * n):
            if o[k] < d[k]:
                cnt += 1
        if cnt == 0:
            return 0
        if cnt < n:
            for k in range(n * n):
                if o[k] < d[k]:
                    if self.add_edge(<int>(k // n), <int>(k % n), o[k]) < 0:
                        return -1
            return 1
        for k in range(n * n):
            if o[k] < d[k]:
                d[k] = o[k]
        for kk in range(n):
            kn = kk * n
            for a in range(n):
                dak = d[a * n + kk]
                if dak >= C_INF:
                    continue
                off = a * n
                for b in range(n):
                    if d[kn + b] >= C_INF:
                        continue
                    v = dak + d[kn + b]
                    if v < d[off + b]:
                        d[off + b] = v
        for a in range(n):
            if d[a * n + a] < 0:
                return -1
        return 1

    def upper_row(self):
        return [self.d[k] for k in range(self.n)]

    def lower_col(self):
        return [self.d[k * self.n] for k in range(self.n)]
