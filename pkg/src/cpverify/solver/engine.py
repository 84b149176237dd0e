"""Propagation engine: domains, difference constraints and propagators.

A :class:`Space` owns one copy of every domain plus a difference-bound
matrix over the variables that take part in difference atoms or element
reads. Spaces are cloned for search; nothing is shared mutably.
"""
from __future__ import annotations

from ..ast import tdiv
from .dbm import DBM, INF

SMALL = 512          # operand pairs enumerated exactly by product/division
HOLE_RANGE = 4096    # largest range on which value holes are recorded


class Inconsistent(Exception):
    pass


def _cdiv(a, b):
    return -((-a) // b)


def _quot_range(zl, zh, yl, yh):
    """Hull of real ``z / y`` for ``z`` in [zl, zh], ``y`` in [yl, yh] minus 0.

    ``None`` means no information (both ranges contain 0).
    """
    if zl <= 0 <= zh and yl <= 0 <= yh:
        return None
    parts = []
    if yl <= -1:
        parts.append((yl, min(yh, -1)))
    if yh >= 1:
        parts.append((max(yl, 1), yh))
    if not parts:
        raise Inconsistent()
    lo = hi = None
    for a, b in parts:
        for z in (zl, zh):
            for y in (a, b):
                c, f = _cdiv(z, y), z // y
                lo = c if lo is None or c < lo else lo
                hi = f if hi is None or f > hi else hi
    return lo, hi


def _isqrt_floor(n):
    if n < 0:
        return -1
    r = int(n ** 0.5)
    while r * r > n:
        r -= 1
    while (r + 1) * (r + 1) <= n:
        r += 1
    return r


class Space:
    __slots__ = ("pb", "lo", "hi", "holes", "dbm", "props", "dead", "mod", "seen",
                 "tick", "dbm_tick", "pending", "stats")

    def __init__(self, pb, prims=None, stats=None):
        self.pb = pb
        self.lo = list(pb.lo)
        self.hi = list(pb.hi)
        self.holes = {}
        self.dbm = DBM(len(pb.node_var)) if len(pb.node_var) > 1 else None
        self.props = []
        self.dead = set()
        self.mod = [0] * pb.nvars
        self.seen = {}
        self.tick = 1
        self.dbm_tick = 0
        self.pending = []
        self.stats = stats if stats is not None else {"propagations": 0}
        for k in range(1, len(pb.node_var)):
            v = pb.node_var[k]
            self.pending.append((0, k, self.hi[v]))
            self.pending.append((k, 0, -self.lo[v]))
        self.post_all(pb.top if prims is None else prims)

    def clone(self) -> "Space":
        s = Space.__new__(Space)
        s.pb = self.pb
        s.lo = self.lo[:]
        s.hi = self.hi[:]
        s.holes = dict(self.holes)
        s.dbm = None if self.dbm is None else self.dbm.copy()
        s.props = self.props[:]
        s.dead = set(self.dead)
        s.mod = self.mod[:]
        s.seen = dict(self.seen)
        s.tick = self.tick
        s.dbm_tick = self.dbm_tick
        s.pending = self.pending[:]
        s.stats = self.stats
        return s

    # -- domains ---------------------------------------------------------------

    def _touch(self, v):
        self.tick += 1
        self.mod[v] = self.tick

    def set_lo(self, v, x):
        if x <= self.lo[v]:
            return
        if x > self.hi[v]:
            raise Inconsistent()
        h = self.holes.get(v)
        if h:
            while x in h:
                x += 1
            if x > self.hi[v]:
                raise Inconsistent()
        self.lo[v] = x
        self._touch(v)
        k = self.pb.node[v]
        if k:
            self.pending.append((k, 0, -x))

    def set_hi(self, v, x):
        if x >= self.hi[v]:
            return
        if x < self.lo[v]:
            raise Inconsistent()
        h = self.holes.get(v)
        if h:
            while x in h:
                x -= 1
            if x < self.lo[v]:
                raise Inconsistent()
        self.hi[v] = x
        self._touch(v)
        k = self.pb.node[v]
        if k:
            self.pending.append((0, k, x))

    def fix(self, v, x):
        self.set_lo(v, x)
        self.set_hi(v, x)
        if self.lo[v] != x or self.hi[v] != x:
            raise Inconsistent()

    def remove(self, v, x):
        lo, hi = self.lo[v], self.hi[v]
        if x < lo or x > hi:
            return
        if x == lo:
            self.set_lo(v, x + 1)
        elif x == hi:
            self.set_hi(v, x - 1)
        else:
            h = self.holes.get(v)
            if h is not None and x in h:
                return
            self.holes[v] = (h or frozenset()) | {x}
            self._touch(v)

    def contains(self, v, x) -> bool:
        if x < self.lo[v] or x > self.hi[v]:
            return False
        h = self.holes.get(v)
        return not (h and x in h)

    def size(self, v) -> int:
        lo, hi = self.lo[v], self.hi[v]
        n = hi - lo + 1
        h = self.holes.get(v)
        if h:
            n -= sum(1 for x in h if lo <= x <= hi)
        return n

    def values(self, v):
        h = self.holes.get(v)
        if not h:
            return range(self.lo[v], self.hi[v] + 1)
        return [x for x in range(self.lo[v], self.hi[v] + 1) if x not in h]

    def restrict(self, v, allowed):
        """Shrink the domain of ``v`` to the values in ``allowed``."""
        if not allowed:
            raise Inconsistent()
        self.set_lo(v, min(allowed))
        self.set_hi(v, max(allowed))
        if self.hi[v] - self.lo[v] <= HOLE_RANGE:
            for x in range(self.lo[v] + 1, self.hi[v]):
                if x not in allowed:
                    self.remove(v, x)

    def fixed(self, v) -> bool:
        return self.lo[v] == self.hi[v]

    # -- differences -----------------------------------------------------------

    def diff_bounds(self, x, y):
        """Bounds of ``x - y``."""
        lb = self.lo[x] - self.hi[y]
        ub = self.hi[x] - self.lo[y]
        if self.dbm is not None:
            nx, ny = self.pb.node[x], self.pb.node[y]
            if nx and ny:
                u = self.dbm.get(ny, nx)
                if u < ub:
                    ub = u
                l = self.dbm.get(nx, ny)
                if l < INF and -l > lb:
                    lb = -l
        return lb, ub

    def add_diff(self, x, y, c):
        """Post ``x - y <= c``."""
        nx, ny = self.pb.node[x], self.pb.node[y]
        if nx and ny:
            self.pending.append((ny, nx, c))
        else:
            self.set_hi(x, self.hi[y] + c)
            self.set_lo(y, self.lo[x] - c)
            self.props.append(_DiffLe(x, y, c))

    def flush(self):
        pending = self.pending
        d = self.dbm
        while pending:
            changed = False
            batch = pending[:]
            del pending[:]
            for i, j, w in batch:
                r = d.add_edge(i, j, w)
                if r < 0:
                    raise Inconsistent()
                if r:
                    changed = True
            if not changed:
                continue
            self.tick += 1
            self.dbm_tick = self.tick
            up = d.upper_row()
            lc = d.lower_col()
            nv = self.pb.node_var
            for k in range(1, len(nv)):
                v = nv[k]
                u = up[k]
                if u < self.hi[v]:
                    self.set_hi(v, u)
                l = lc[k]
                if l < INF and -l > self.lo[v]:
                    self.set_lo(v, -l)

    def reread_bounds(self):
        """Pull bounds out of the matrix after it was changed wholesale."""
        self.tick += 1
        self.dbm_tick = self.tick
        d = self.dbm
        up, lc = d.upper_row(), d.lower_col()
        nv = self.pb.node_var
        for k in range(1, len(nv)):
            v = nv[k]
            if up[k] < self.hi[v]:
                self.set_hi(v, up[k])
            if lc[k] < INF and -lc[k] > self.lo[v]:
                self.set_lo(v, -lc[k])
        self.flush()

    # -- posting ---------------------------------------------------------------

    def post(self, p):
        kind = p.kind
        if kind == "bnd":
            op, x, c = p.op, p.x, p.c
            if op == "le":
                self.set_hi(x, c)
            elif op == "ge":
                self.set_lo(x, c)
            elif op == "eq":
                self.fix(x, c)
            else:
                self.remove(x, c)
        elif kind == "dif" and p.op != "ne":
            self.add_diff(p.x, p.y, p.c)
            if p.op == "eq":
                self.add_diff(p.y, p.x, -p.c)
        elif kind == "false":
            raise Inconsistent()
        else:
            self.props.append(p)

    def post_all(self, prims):
        for p in prims:
            self.post(p)

    # -- fixpoint --------------------------------------------------------------

    def propagate(self, cap: int = 200000):
        """Run propagators to a fixpoint, or until ``cap`` runs (sound either way)."""
        runs = 0
        if self.pending:
            self.flush()
        while True:
            ran = False
            i = 0
            props = self.props
            while i < len(props):
                p = props[i]
                i += 1
                pid = id(p)
                if pid in self.dead:
                    continue
                last = self.seen.get(pid, -1)
                if last >= self.tick:
                    continue
                if not (p.kind in _READS_DBM and self.dbm_tick > last):
                    mod = self.mod
                    for v in p.vars:
                        if mod[v] > last:
                            break
                    else:
                        self.seen[pid] = self.tick
                        continue
                self.seen[pid] = self.tick
                _RUN[p.kind](self, p)
                if self.pending:
                    self.flush()
                runs += 1
                ran = True
            if not ran or runs > cap:
                break
        self.stats["propagations"] += runs

    # -- status of a primitive (used for disjunctions and leaves) --------------

    def status(self, p) -> int:
        """-1 if ``p`` cannot hold, 1 if it must hold, 0 otherwise."""
        kind = p.kind
        if kind == "bnd":
            lo, hi, c = self.lo[p.x], self.hi[p.x], p.c
            if p.op == "le":
                return 1 if hi <= c else (-1 if lo > c else 0)
            if p.op == "ge":
                return 1 if lo >= c else (-1 if hi < c else 0)
            inside = self.contains(p.x, c)
            if p.op == "eq":
                return -1 if not inside else (1 if lo == hi else 0)
            return 1 if not inside else (-1 if lo == hi else 0)
        if kind == "dif":
            lb, ub = self.diff_bounds(p.x, p.y)
            c = p.c
            if p.op == "le":
                return 1 if ub <= c else (-1 if lb > c else 0)
            if p.op == "eq":
                return -1 if c < lb or c > ub else (1 if lb == ub else 0)
            return 1 if c < lb or c > ub else (-1 if lb == ub else 0)
        if kind == "or":
            ent = False
            for alt in p.alts:
                s = self.alt_status(alt)
                if s == 1:
                    return 1
                if s == 0:
                    ent = True
            return 0 if ent else -1
        if kind == "false":
            return -1
        if kind == "elem":
            return self._elem_status(p)
        if kind == "alldiff":
            vals = set()
            allfixed = True
            for x in p.xs:
                if self.lo[x] == self.hi[x]:
                    if self.lo[x] in vals:
                        return -1
                    vals.add(self.lo[x])
                else:
                    allfixed = False
            return 1 if allfixed else 0
        if kind == "lin":
            if all(self.lo[v] == self.hi[v] for v in p.vars):
                total = p.c + sum(a * self.lo[x] for a, x in p.terms)
                return 1 if total == self.lo[p.s] else -1
            return 0
        if kind == "prod":
            if all(self.lo[v] == self.hi[v] for v in p.vars):
                return 1 if self.lo[p.x] * self.lo[p.y] == self.lo[p.z] else -1
            return 0
        if kind == "div":
            lo, hi = self.lo, self.hi
            if lo[p.y] == hi[p.y] == 0:
                return -1
            if lo[p.x] == hi[p.x] and lo[p.y] == hi[p.y]:
                q = tdiv(lo[p.x], lo[p.y])
                if not self.contains(p.z, q):
                    return -1
                return 1 if lo[p.z] == hi[p.z] else 0
            return 0
        if kind == "difle":
            lb, ub = self.lo[p.x] - self.hi[p.y], self.hi[p.x] - self.lo[p.y]
            return 1 if ub <= p.c else (-1 if lb > p.c else 0)
        raise TypeError(kind)

    def alt_status(self, alt) -> int:
        ent = True
        for q in alt:
            s = self.status(q)
            if s < 0:
                return -1
            if s == 0:
                ent = False
        return 1 if ent else 0

    def _elem_compatible(self, z, c) -> bool:
        if self.lo[c] > self.hi[z] or self.lo[z] > self.hi[c]:
            return False
        lb, ub = self.diff_bounds(z, c)
        if lb > 0 or ub < 0:
            return False
        if self.lo[z] == self.hi[z] and not self.contains(c, self.lo[z]):
            return False
        if self.lo[c] == self.hi[c] and not self.contains(z, self.lo[c]):
            return False
        return True

    def _elem_candidates(self, p):
        n = len(p.cells)
        lo, hi = max(self.lo[p.idx], 0), min(self.hi[p.idx], n - 1)
        return [j for j in range(lo, hi + 1)
                if self.contains(p.idx, j) and self._elem_compatible(p.z, p.cells[j])]

    def _elem_status(self, p) -> int:
        cands = self._elem_candidates(p)
        if not cands:
            return -1
        if len(cands) == 1 and self.lo[p.idx] == self.hi[p.idx]:
            lb, ub = self.diff_bounds(p.z, p.cells[cands[0]])
            if lb == ub == 0:
                return 1
        return 0

    def is_solution(self) -> bool:
        """All variables fixed and every live primitive satisfied."""
        for p in self.props:
            if id(p) in self.dead:
                continue
            if self.status(p) != 1:
                return False
        return True


class _DiffLe:
    """``x - y <= c`` for variables outside the difference matrix."""
    __slots__ = ("x", "y", "c", "vars")
    kind = "difle"

    def __init__(self, x, y, c):
        self.x, self.y, self.c = x, y, c
        self.vars = (x, y)


# -- propagators ------------------------------------------------------------

def _run_difle(s: Space, p):
    s.set_hi(p.x, s.hi[p.y] + p.c)
    s.set_lo(p.y, s.lo[p.x] - p.c)


def _run_dif(s: Space, p):
    # only disequalities live as propagators
    x, y, c = p.x, p.y, p.c
    lb, ub = s.diff_bounds(x, y)
    if c < lb or c > ub:
        s.dead.add(id(p))
        return
    if lb == ub:
        raise Inconsistent()
    if ub == c:
        s.add_diff(x, y, c - 1)
        s.dead.add(id(p))
    elif lb == c:
        s.add_diff(y, x, -c - 1)
        s.dead.add(id(p))
    elif s.lo[y] == s.hi[y]:
        s.remove(x, s.lo[y] + c)
    elif s.lo[x] == s.hi[x]:
        s.remove(y, s.lo[x] - c)


def _run_lin(s: Space, p):
    lo, hi = s.lo, s.hi
    contrib = []
    smin = smax = p.c
    for a, x in p.terms:
        if a > 0:
            cl, ch = a * lo[x], a * hi[x]
        else:
            cl, ch = a * hi[x], a * lo[x]
        contrib.append((cl, ch))
        smin += cl
        smax += ch
    s.set_lo(p.s, smin)
    s.set_hi(p.s, smax)
    sl, sh = lo[p.s], hi[p.s]
    if sl == smin and sh == smax:
        return
    for (a, x), (cl, ch) in zip(p.terms, contrib):
        lower = sl - (smax - ch)
        upper = sh - (smin - cl)
        if a > 0:
            s.set_lo(x, _cdiv(lower, a))
            s.set_hi(x, upper // a)
        else:
            s.set_lo(x, _cdiv(upper, a))
            s.set_hi(x, lower // a)


def _support(s: Space, z, x, y, fn):
    sx, sy, sz = set(), set(), set()
    contains = s.contains
    for a in s.values(x):
        for b in s.values(y):
            r = fn(a, b)
            if r is not None and contains(z, r):
                sx.add(a)
                sy.add(b)
                sz.add(r)
    s.restrict(x, sx)
    s.restrict(y, sy)
    s.restrict(z, sz)


def _run_prod(s: Space, p):
    z, x, y = p.z, p.x, p.y
    lo, hi = s.lo, s.hi
    if x == y:
        if s.size(x) <= SMALL:
            sx, sz = set(), set()
            for a in s.values(x):
                if s.contains(z, a * a):
                    sx.add(a)
                    sz.add(a * a)
            s.restrict(x, sx)
            s.restrict(z, sz)
            return
        xl, xh = lo[x], hi[x]
        sq = (xl * xl, xh * xh)
        s.set_lo(z, 0 if xl <= 0 <= xh else min(sq))
        s.set_hi(z, max(sq))
        r = _isqrt_floor(hi[z])
        s.set_lo(x, -r)
        s.set_hi(x, r)
        if lo[z] > 0:
            r = _isqrt_floor(lo[z] - 1) + 1
            if lo[x] > -r:
                s.set_lo(x, r)
            if hi[x] < r:
                s.set_hi(x, -r)
        return
    if s.size(x) * s.size(y) <= SMALL:
        _support(s, z, x, y, lambda a, b: a * b)
        return
    corners = [a * b for a in (lo[x], hi[x]) for b in (lo[y], hi[y])]
    s.set_lo(z, min(corners))
    s.set_hi(z, max(corners))
    r = _quot_range(lo[z], hi[z], lo[y], hi[y])
    if r is not None:
        s.set_lo(x, r[0])
        s.set_hi(x, r[1])
    r = _quot_range(lo[z], hi[z], lo[x], hi[x])
    if r is not None:
        s.set_lo(y, r[0])
        s.set_hi(y, r[1])


def _run_div(s: Space, p):
    z, x, y = p.z, p.x, p.y
    s.remove(y, 0)
    if s.size(x) * s.size(y) <= SMALL:
        _support(s, z, x, y, lambda a, b: tdiv(a, b) if b else None)
        return
    lo, hi = s.lo, s.hi
    qs = []
    for yl, yh in ((lo[y], min(hi[y], -1)), (max(lo[y], 1), hi[y])):
        if yl <= yh:
            qs.extend(tdiv(a, b) for a in (lo[x], hi[x]) for b in (yl, yh))
    if not qs:
        raise Inconsistent()
    s.set_lo(z, min(qs))
    s.set_hi(z, max(qs))
    # |x| < (|z| + 1) * |y|
    m = (max(abs(lo[z]), abs(hi[z])) + 1) * max(abs(lo[y]), abs(hi[y])) - 1
    s.set_lo(x, -m)
    s.set_hi(x, m)
    if lo[z] > 0:
        # x / y > 0: x and y share a sign and |x| >= |y|
        if lo[y] > 0:
            s.set_lo(x, lo[y])
        elif hi[y] < 0:
            s.set_hi(x, hi[y])


def _run_elem(s: Space, p):
    n = len(p.cells)
    s.set_lo(p.idx, 0)
    s.set_hi(p.idx, n - 1)
    cands = s._elem_candidates(p)
    s.restrict(p.idx, cands)
    z = p.z
    s.set_lo(z, min(s.lo[p.cells[j]] for j in cands))
    s.set_hi(z, max(s.hi[p.cells[j]] for j in cands))
    if len(cands) == 1:
        c = p.cells[cands[0]]
        s.add_diff(z, c, 0)
        s.add_diff(c, z, 0)
        if s.pb.node[z] and s.pb.node[c]:
            s.dead.add(id(p))
        else:
            s.set_lo(c, s.lo[z])
            s.set_hi(c, s.hi[z])


def _run_alldiff(s: Space, p):
    xs = p.xs
    lo, hi = s.lo, s.hi
    changed = True
    while changed:
        changed = False
        seen = {}
        for x in xs:
            if lo[x] == hi[x]:
                v = lo[x]
                if v in seen:
                    raise Inconsistent()
                seen[v] = x
        for v, owner in seen.items():
            for x in xs:
                if x != owner and s.contains(x, v):
                    s.remove(x, v)
                    changed = True
    # Hall intervals on bounds
    n = len(xs)
    los = sorted({lo[x] for x in xs})
    his = sorted({hi[x] for x in xs})
    for a in los:
        for b in his:
            if b < a:
                continue
            inside = [x for x in xs if lo[x] >= a and hi[x] <= b]
            cap = b - a + 1
            if len(inside) > cap:
                raise Inconsistent()
            if len(inside) == cap and len(inside) < n:
                for x in xs:
                    if lo[x] >= a and hi[x] <= b:
                        continue
                    if a <= lo[x] <= b:
                        s.set_lo(x, b + 1)
                    if a <= hi[x] <= b:
                        s.set_hi(x, a - 1)
    if all(s.size(x) <= 64 for x in xs):
        union = set()
        for x in xs:
            union.update(s.values(x))
        if len(union) < n:
            raise Inconsistent()


def _run_or(s: Space, p):
    live = []
    for alt in p.alts:
        st = s.alt_status(alt)
        if st == 1:
            s.dead.add(id(p))
            return
        if st == 0:
            live.append(alt)
    if not live:
        raise Inconsistent()
    if len(live) == 1:
        s.dead.add(id(p))
        s.post_all(live[0])


def _run_false(s: Space, p):
    raise Inconsistent()


_RUN = {
    "dif": _run_dif, "difle": _run_difle, "lin": _run_lin, "prod": _run_prod,
    "div": _run_div, "elem": _run_elem, "alldiff": _run_alldiff, "or": _run_or,
    "false": _run_false,
}
_READS_DBM = frozenset({"dif", "elem", "or"})


# -- constructive disjunction at the root -----------------------------------

def _alternatives(s: Space, p):
    if p.kind == "or":
        return list(p.alts)
    from .flatten import Bnd, Dif
    out = []
    for j in s._elem_candidates(p):
        out.append((Bnd(p.idx, "eq", j), Dif(p.z, p.cells[j], "eq", 0)))
    return out


def shave(s: Space, limit: int = 4000, rounds: int = 8) -> int:
    """Root-level constructive disjunction over open disjunctions and element indices.

    Each alternative is tried in a clone; the union of the surviving clones
    (bounds hull and pointwise difference-matrix join) is then conjoined
    back. Returns the number of hypothetical propagations spent.
    """
    spent = 0
    for _ in range(rounds):
        before = (s.lo[:], s.hi[:], s.dbm_tick)
        for p in list(s.props):
            if id(p) in s.dead or p.kind not in ("or", "elem"):
                continue
            if p.kind == "elem" and s.lo[p.idx] == s.hi[p.idx]:
                continue
            alts = _alternatives(s, p)
            if len(alts) < 2:
                continue
            survivors = []
            for alt in alts:
                if spent >= limit:
                    return spent
                spent += 1
                t = s.clone()
                try:
                    t.dead.add(id(p))
                    t.post_all(alt)
                    t.propagate()
                except Inconsistent:
                    continue
                survivors.append((alt, t))
            if not survivors:
                raise Inconsistent()
            if len(survivors) == 1:
                s.dead.add(id(p))
                s.post_all(survivors[0][0])
                s.propagate()
                continue
            for v in range(s.pb.nvars):
                s.set_lo(v, min(t.lo[v] for _, t in survivors))
                s.set_hi(v, max(t.hi[v] for _, t in survivors))
            if s.dbm is not None:
                joined = survivors[0][1].dbm.copy()
                for _, t in survivors[1:]:
                    joined.join_with(t.dbm)
                r = s.dbm.meet_with(joined)
                if r < 0:
                    raise Inconsistent()
                if r:
                    s.reread_bounds()
            s.propagate()
        if (s.lo, s.hi, s.dbm_tick) == before:
            break
    return spent
