"""Difference-bound matrix over integer nodes, pure-Python kernel.

``D[i][j]`` bounds ``x_j - x_i`` from above. Node 0 stands for the constant
zero, so ``D[0][j]`` is the upper bound of ``x_j`` and ``-D[j][0]`` its lower
bound. The matrix is kept closed (all-pairs shortest paths) at all times.
"""

INF = 1 << 62
LIMIT = 1 << 40  # weights beyond this magnitude are dropped (kept as INF)


class DBM:
    __slots__ = ("n", "d")

    def __init__(self, n: int, _d=None):
        self.n = n
        if _d is None:
            d = [INF] * (n * n)
            for i in range(n):
                d[i * n + i] = 0
            self.d = d
        else:
            self.d = _d

    def copy(self) -> "DBM":
        return DBM(self.n, self.d[:])

    def get(self, i: int, j: int) -> int:
        return self.d[i * self.n + j]

    def add_edge(self, i: int, j: int, w: int) -> int:
        """Tighten ``x_j - x_i <= w``; 1 if changed, 0 if not, -1 on a negative cycle."""
        if w >= LIMIT:
            return 0
        if w <= -LIMIT:
            w = -LIMIT
        n = self.n
        d = self.d
        if w >= d[i * n + j]:
            return 0
        back = d[j * n + i]
        if back < INF and back + w < 0:
            return -1
        rowj = d[j * n:(j + 1) * n]
        cols = [b for b in range(n) if rowj[b] < INF]
        for a in range(n):
            dai = d[a * n + i]
            if dai >= INF:
                continue
            base = dai + w
            off = a * n
            for b in cols:
                v = base + rowj[b]
                if v < d[off + b]:
                    d[off + b] = v
        return 1

    def join_with(self, other: "DBM") -> None:
        """Pointwise maximum; the join of closed matrices is closed."""
        self.d = [a if a >= b else b for a, b in zip(self.d, other.d)]

    def meet_with(self, other: "DBM") -> int:
        """Conjoin the constraints of ``other``; same return codes as ``add_edge``."""
        n = self.n
        d = self.d
        od = other.d
        better = [k for k in range(n * n) if od[k] < d[k]]
        if not better:
            return 0
        if len(better) < n:
            for k in better:
                w = od[k]
                if w < d[k] and self.add_edge(k // n, k % n, w) < 0:
                    return -1
            return 1
        for k in better:
            d[k] = od[k]
        for k in range(n):
            rowk = d[k * n:(k + 1) * n]
            cols = [b for b in range(n) if rowk[b] < INF]
            for a in range(n):
                dak = d[a * n + k]
                if dak >= INF:
                    continue
                off = a * n
                for b in cols:
                    v = dak + rowk[b]
                    if v < d[off + b]:
                        d[off + b] = v
        for i in range(n):
            if d[i * n + i] < 0:
                return -1
        return 1

    def upper_row(self) -> list:
        return self.d[0:self.n]

    def lower_col(self) -> list:
        n = self.n
        return self.d[0::n][:n]
