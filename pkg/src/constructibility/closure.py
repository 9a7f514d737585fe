"""Finite configurations with provenance and their closure under construction steps."""

from __future__ import annotations

import heapq
import itertools
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction

from . import projective as pj
from .numbers import BudgetExceeded, approx, node_budget, real
from .projective import Conic, GeometryError, HLine, HPoint

__all__ = [
    "OpSet",
    "Budget",
    "Provenance",
    "Configuration",
    "DepthStats",
    "ProbeResult",
    "closure_step",
    "closure_to_depth",
    "contains",
    "generic_quadruple_check",
    "density_probe",
    "compute",
    "stats_csv",
]


@dataclass(frozen=True)
class OpSet:
    """Enabled construction operations.

    ``projective`` lets points at infinity (and the line at infinity)
    take part; with it off, meets of parallel lines are dropped.
    """

    join: bool = True
    meet: bool = True
    line_conic: bool = True
    conic_conic: bool = True
    compass: bool = False
    projective: bool = True

    def __post_init__(self):
        if not (self.join or self.meet or self.line_conic or self.conic_conic or self.compass):
            raise ValueError("OpSet needs at least one operation")

    @classmethod
    def straightedge(cls, projective=True):
        return cls(projective=projective)

    @classmethod
    def with_compass(cls, projective=True):
        return cls(compass=True, projective=projective)

    @classmethod
    def joins_meets(cls, projective=True):
        return cls(line_conic=False, conic_conic=False, projective=projective)

    @classmethod
    def parse(cls, text):
        """Comma separated flags, e.g. ``join,meet`` or ``straightedge`` / ``compass``."""
        names = {t.strip() for t in text.split(",") if t.strip()}
        if names == {"straightedge"}:
            return cls.straightedge()
        if names == {"compass"}:
            return cls.with_compass()
        known = {"join", "meet", "line_conic", "conic_conic", "compass", "affine"}
        unknown = names - known
        if unknown:
            raise ValueError(f"unknown operation flags: {sorted(unknown)}")
        return cls(
            join="join" in names,
            meet="meet" in names,
            line_conic="line_conic" in names,
            conic_conic="conic_conic" in names,
            compass="compass" in names,
            projective="affine" not in names,
        )


def _env_int(name, default):
    return int(os.environ.get(name, default))


@dataclass
class Budget:
    max_objects: int = field(default_factory=lambda: _env_int("CONSTRUCTIBILITY_MAX_OBJECTS", 20000))
    max_nodes: int = field(default_factory=lambda: _env_int("CONSTRUCTIBILITY_MAX_NODES", 250000))


@dataclass(frozen=True)
class Provenance:
    op: str
    parents: tuple = ()
    step: int = 0
    index: int = 0

    def to_str(self):
        parts = [self.op, *map(str, self.parents), f"@{self.step}"]
        if self.index:
            parts.append(f"#{self.index}")
        return " ".join(parts)

    @classmethod
    def parse(cls, text):
        fields = text.split()
        op, parents, step, index = fields[0], [], 0, 0
        for f in fields[1:]:
            if f.startswith("@"):
                step = int(f[1:])
            elif f.startswith("#"):
                index = int(f[1:])
            else:
                parents.append(int(f))
        return cls(op, tuple(parents), step, index)


GIVEN = "given"
_BUCKET_BITS = 24
_EDGE = Fraction(1, 16)


def _kind(obj):
    if isinstance(obj, HPoint):
        return "point"
    if isinstance(obj, HLine):
        return "line"
    if isinstance(obj, Conic):
        return "conic"
    raise TypeError(f"not a geometric object: {obj!r}")


def _values(obj):
    return obj.entries if isinstance(obj, Conic) else obj.coords


def _bucket_keys(obj):
    """Primary bucket plus neighbours for coordinates that sit near a bucket edge."""
    options = []
    primary = []
    for v in _values(obj):
        scaled = approx(v, _BUCKET_BITS + 8).mid * (1 << _BUCKET_BITS)
        k = math.floor(scaled)
        frac = scaled - k
        primary.append(k)
        opts = [k]
        if frac < _EDGE:
            opts.append(k - 1)
        elif frac > 1 - _EDGE:
            opts.append(k + 1)
        options.append(opts)
    kind = _kind(obj)
    primary_key = (kind, *primary)
    if all(len(o) == 1 for o in options):
        return primary_key, [primary_key]
    return primary_key, [(kind, *combo) for combo in itertools.product(*options)]


class Configuration:
    """Deduplicated, provenance-tracked collection of points, lines and conics.

    Object ids are insertion positions. Closure functions never modify their
    input; they work on a copy.
    """

    def __init__(self, objects=()):
        self._objs = []
        self._prov = []
        self._depth = []
        self._buckets = {}
        for obj in objects:
            self.add(obj, Provenance(GIVEN))

    def copy(self):
        out = Configuration()
        out._objs = list(self._objs)
        out._prov = list(self._prov)
        out._depth = list(self._depth)
        out._buckets = {k: list(v) for k, v in self._buckets.items()}
        return out

    def find(self, obj):
        _, keys = _bucket_keys(obj)
        for key in keys:
            for i in self._buckets.get(key, ()):
                if self._objs[i] == obj:
                    return i
        return None

    def add(self, obj, prov=Provenance(GIVEN)):
        """Insert obj unless an equal object exists; returns (id, is_new)."""
        primary, keys = _bucket_keys(obj)
        for key in keys:
            for i in self._buckets.get(key, ()):
                if self._objs[i] == obj:
                    return i, False
        if any(p >= len(self._objs) for p in prov.parents):
            raise ValueError("provenance parents must precede the child")
        self._objs.append(obj)
        self._prov.append(prov)
        self._depth.append(1 + max(self._depth[p] for p in prov.parents) if prov.parents else 0)
        self._buckets.setdefault(primary, []).append(len(self._objs) - 1)
        return len(self._objs) - 1, True

    def __contains__(self, obj):
        return self.find(obj) is not None

    def __len__(self):
        return len(self._objs)

    def __iter__(self):
        return iter(enumerate(self._objs))

    def __getitem__(self, i):
        return self._objs[i]

    def provenance(self, i):
        return self._prov[i]

    def of_kind(self, cls):
        return [(i, o) for i, o in enumerate(self._objs) if isinstance(o, cls)]

    def points(self):
        return self.of_kind(HPoint)

    def lines(self):
        return self.of_kind(HLine)

    def conics(self):
        return self.of_kind(Conic)

    def counts(self):
        p = sum(isinstance(o, HPoint) for o in self._objs)
        l = sum(isinstance(o, HLine) for o in self._objs)
        return p, l, len(self._objs) - p - l

    def depth(self, i):
        """Length of the longest provenance chain from given objects to i."""
        return self._depth[i]

    def chain(self, i):
        """All ids i depends on (including i), in increasing order."""
        seen = set()
        stack = [i]
        while stack:
            j = stack.pop()
            if j not in seen:
                seen.add(j)
                stack.extend(self._prov[j].parents)
        return sorted(seen)

    def rebuild(self, i):
        """Recompute object i from its parents' objects."""
        prov = self._prov[i]
        if prov.op == GIVEN or not prov.parents:
            return self._objs[i]
        results = compute(prov.op, [self._objs[p] for p in prov.parents])
        return results[prov.index]

    def same_objects(self, other):
        """Set equality up to projective equality of objects."""
        return len(self) == len(other) and all(other.find(o) is not None for _, o in self)

    # -- text format ---------------------------------------------------------------

    def to_text(self):
        lines = ["configuration v1"]
        lines += [f"{i} {o.to_str()}" for i, o in enumerate(self._objs)]
        lines.append("provenance")
        lines += [f"{i} {p.to_str()}" for i, p in enumerate(self._prov)]
        lines.append("end")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        rows = [r.strip() for r in text.splitlines()]
        rows = [r for r in rows if r and not r.startswith("#")]
        if not rows or rows[0] != "configuration v1":
            raise ValueError("missing 'configuration v1' header")
        out = cls()
        objs, provs = [], {}
        section = "objects"
        for r in rows[1:]:
            if r == "provenance":
                section = "provenance"
                continue
            if r == "end":
                break
            idx, _, rest = r.partition(" ")
            if section == "objects":
                if int(idx) != len(objs):
                    raise ValueError(f"object ids must be consecutive, got {idx}")
                objs.append(pj.parse_object(rest))
            else:
                provs[int(idx)] = Provenance.parse(rest)
        for i, o in enumerate(objs):
            _, new = out.add(o, provs.get(i, Provenance(GIVEN)))
            if not new:
                raise ValueError(f"duplicate object at id {i}")
        return out


# -- single operations ---------------------------------------------------------------


def compute(op, objs):
    """Results of one construction operation, as a list (possibly empty)."""
    if op == "join":
        return [pj.join(*objs)]
    if op == "meet":
        return [pj.meet(*objs)]
    if op == "intersect":
        a, b = objs
        if isinstance(a, HLine) and isinstance(b, HLine):
            return [pj.meet(a, b)]
        if isinstance(a, Conic) and isinstance(b, HLine):
            a, b = b, a
        if isinstance(a, HLine):
            return pj.line_conic_intersections(a, b)
        return pj.circle_circle_intersections(a, b)
    if op == "circle":
        return [pj.circle_from(*objs)]
    raise ValueError(f"unknown operation {op!r}")


def _candidates(cfg, ops, start):
    """Deterministic (op, parent ids) pairs with at least one parent id >= start."""
    objs = cfg._objs
    n = len(objs)
    pts = [i for i in range(n) if isinstance(objs[i], HPoint)]
    lns = [i for i in range(n) if isinstance(objs[i], HLine)]
    cns = [i for i in range(n) if isinstance(objs[i], Conic)]
    if not ops.projective:
        pts = [i for i in pts if objs[i].is_finite]
        lns = [i for i in lns if not objs[i].is_at_infinity]
    if ops.join:
        for a, b in itertools.combinations(pts, 2):
            if b >= start:
                yield "join", (a, b)
    if ops.meet:
        for a, b in itertools.combinations(lns, 2):
            if b >= start:
                yield "meet", (a, b)
    if ops.line_conic:
        for l in lns:
            for c in cns:
                if l >= start or c >= start:
                    yield "intersect", (l, c)
    if ops.conic_conic:
        circles = [c for c in cns if pj.is_circle(objs[c])]
        for a, b in itertools.combinations(circles, 2):
            if b >= start:
                yield "intersect", (a, b)
    if ops.compass:
        finite = [i for i in pts if objs[i].is_finite]
        for o in finite:
            for a, b in itertools.combinations(finite, 2):
                if o >= start or b >= start:
                    yield "circle", (o, a, b)


def _expand(src, ops, step, budget, start=0):
    out = src.copy()
    objs = src._objs
    with node_budget(budget.max_nodes):
        for op, parents in _candidates(src, ops, start):
            try:
                results = compute(op, [objs[p] for p in parents])
            except GeometryError:
                continue
            for idx, obj in enumerate(results):
                if not ops.projective and isinstance(obj, HPoint) and not obj.is_finite:
                    continue
                _, new = out.add(obj, Provenance(op, parents, step, idx))
                if new and len(out) > budget.max_objects:
                    raise BudgetExceeded(f"configuration exceeded {budget.max_objects} objects")
    return out


def closure_step(cfg, ops=None, budget=None):
    """One round of every enabled operation on cfg. Returns (new_cfg, fixed_point)."""
    ops = ops or OpSet()
    budget = budget or Budget()
    step = 1 + max((p.step for p in cfg._prov), default=0)
    out = _expand(cfg, ops, step, budget)
    return out, len(out) == len(cfg)


@dataclass(frozen=True)
class DepthStats:
    depth: int
    points: int
    lines: int
    conics: int


def stats_csv(stats):
    rows = ["depth,points,lines,conics"]
    rows += [f"{s.depth},{s.points},{s.lines},{s.conics}" for s in stats]
    return "\n".join(rows) + "\n"


def closure_to_depth(cfg, d, ops=None, budget=None):
    """d rounds of closure_step; returns (config, per-depth object counts).

    Only pairs involving an object added in the previous round are tried,
    which yields the same set as repeating closure_step."""
    if d < 0:
        raise ValueError("depth must be >= 0")
    ops = ops or OpSet()
    budget = budget or Budget()
    cur = cfg.copy()
    stats = [DepthStats(0, *cur.counts())]
    start = 0
    for k in range(1, d + 1):
        nxt = _expand(cur, ops, k, budget, start)
        start = len(cur)
        cur = nxt
        stats.append(DepthStats(k, *cur.counts()))
    return cur, stats


def contains(cfg, obj):
    return cfg.find(obj) is not None


def generic_quadruple_check(p1, p2, p3, p4):
    """No three collinear and no two of the six connecting lines parallel."""
    pts = (p1, p2, p3, p4)
    if not all(p.is_finite for p in pts):
        raise pj.InfinitePoint("generic quadruple needs finite points")
    for a, b, c in itertools.combinations(pts, 3):
        if pj.incident(c, pj.join(a, b)):
            return False
    lines = [pj.join(a, b) for a, b in itertools.combinations(pts, 2)]
    for l, m in itertools.combinations(lines, 2):
        if not pj.meet(l, m).is_finite:
            return False
    return True


# -- density probing --------------------------------------------------------------


@dataclass
class ProbeResult:
    """Outcome of a density probe; ``witness`` is None when nothing was found."""

    witness: HPoint | None
    witness_id: int | None
    depth: int | None
    config: Configuration
    method: str
    explored: int

    @property
    def found(self):
        return self.witness is not None


def _in_box(p, tx, ty, eps):
    if not p.is_finite:
        return False
    x, y = p.affine()
    return (abs(x - tx) - eps).sign() < 0 and (abs(y - ty) - eps).sign() < 0


def _float_point(p):
    x, y, z = p.floats()
    if abs(z) < 1e-300:
        return None
    return x / z, y / z


def _line_dist(l, t):
    a, b, c = l
    n = math.hypot(a, b)
    if n == 0:
        return math.inf
    return abs(a * t[0] + b * t[1] + c) / n


def _meet_dist(l, m, t):
    x = l[1] * m[2] - l[2] * m[1]
    y = l[2] * m[0] - l[0] * m[2]
    z = l[0] * m[1] - l[1] * m[0]
    scale = max(abs(x), abs(y), abs(z))
    if scale == 0 or abs(z) <= 1e-12 * scale:
        return math.inf
    return math.hypot(x / z - t[0], y / z - t[1])


def density_probe(cfg, target, epsilon, ops=None, budget=None):
    """Search the closure of cfg for a point within epsilon of target (both coordinates).

    Best-first: candidate joins and meets are ranked by how close their
    result passes to the target, using float estimates only for ordering;
    membership in the box is decided exactly.  Falls back to plain
    breadth-first closure when the best-first budget runs out.  A miss is
    inconclusive.
    """
    ops = ops or OpSet.joins_meets()
    budget = budget or Budget(max_objects=4000)
    eps = real(epsilon)
    if eps.sign() <= 0:
        raise ValueError("epsilon must be positive")
    if not target.is_finite:
        raise pj.InfinitePoint("density probe target must be finite")
    tx, ty = target.affine()
    for i, obj in cfg:
        if isinstance(obj, HPoint) and _in_box(obj, tx, ty, eps):
            return ProbeResult(obj, i, cfg.depth(i), cfg, "given", 0)
    try:
        res = _best_first(cfg, tx, ty, eps, ops, budget)
    except BudgetExceeded:
        res = None
    if res is not None:
        return res
    work, start = cfg.copy(), 0
    try:
        for d in itertools.count(1):
            nxt = _expand(work, ops, d, budget, start)
            for i in range(len(work), len(nxt)):
                obj = nxt[i]
                if isinstance(obj, HPoint) and _in_box(obj, tx, ty, eps):
                    return ProbeResult(obj, i, nxt.depth(i), nxt, "breadth-first", len(nxt))
            if len(nxt) == len(work):
                return ProbeResult(None, None, None, nxt, "closure-finite", len(nxt))
            start, work = len(work), nxt
    except BudgetExceeded:
        pass
    return ProbeResult(None, None, None, cfg, "not-found", budget.max_objects)


def _best_first(cfg, tx, ty, eps, ops, budget):
    work = cfg.copy()
    t = (float(tx), float(ty))
    fl = {}
    heap = []
    counter = itertools.count()
    done = set()

    def floats(i):
        if i not in fl:
            o = work[i]
            if isinstance(o, HPoint):
                fl[i] = _float_point(o) if (ops.projective or o.is_finite) else None
            elif isinstance(o, HLine):
                fl[i] = o.floats()
            else:
                fl[i] = None
        return fl[i]

    def push_for(i):
        obj = work[i]
        if isinstance(obj, HPoint) and ops.join:
            pi = floats(i)
            if pi is None:
                return
            for j, other in work.points():
                if j == i:
                    continue
                pj_ = floats(j)
                if pj_ is None:
                    continue
                a, b = pi[1] - pj_[1], pj_[0] - pi[0]
                c = -(a * pi[0] + b * pi[1])
                score = _line_dist((a, b, c), t)
                heapq.heappush(heap, (score, next(counter), "join", (min(i, j), max(i, j))))
        elif isinstance(obj, HLine):
            li = floats(i)
            if ops.meet:
                for j, _ in work.lines():
                    if j != i:
                        score = _meet_dist(li, floats(j), t)
                        if score < math.inf:
                            heapq.heappush(heap, (score, next(counter), "meet", (min(i, j), max(i, j))))
            if ops.line_conic:
                for j, _ in work.conics():
                    heapq.heappush(heap, (_line_dist(li, t), next(counter), "intersect", (i, j)))

    for i, _ in list(work):
        push_for(i)
    explored = 0
    with node_budget(budget.max_nodes):
        while heap:
            _, _, op, parents = heapq.heappop(heap)
            if (op, parents) in done:
                continue
            done.add((op, parents))
            explored += 1
            try:
                results = compute(op, [work[p] for p in parents])
            except GeometryError:
                continue
            for idx, obj in enumerate(results):
                if not ops.projective and isinstance(obj, HPoint) and not obj.is_finite:
                    continue
                step = 1 + max(work.depth(p) for p in parents)
                i, new = work.add(obj, Provenance(op, parents, step, idx))
                if not new:
                    continue
                if isinstance(obj, HPoint) and _in_box(obj, tx, ty, eps):
                    return ProbeResult(obj, i, work.depth(i), work, "best-first", explored)
                if len(work) > budget.max_objects:
                    raise BudgetExceeded(f"probe exceeded {budget.max_objects} objects")
                push_for(i)
    return None
