"""The construction game: Alice issues requests, Bob answers arbitrary-point requests.

Alice is either a parsed Script or any callable taking a GameContext.  The
context exposes one method per request kind; every call is recorded as a
Move and the win condition is checked after each one.  Bob is an Adversary
with a ``choose_point(region, cfg)`` method.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import lang
from . import projective as pj
from .closure import Configuration, Provenance, compute
from .numbers import ZERO, approx, real, sqrt
from .projective import Conic, GeometryError, HLine, HPoint, ProjMap

__all__ = [
    "AdversaryViolation",
    "SearchBudgetExceeded",
    "ScriptRuntimeError",
    "DiscAtom",
    "HalfPlaneAtom",
    "region_contains",
    "region_str",
    "parse_region",
    "Move",
    "TestRecord",
    "OutputRecord",
    "Trace",
    "GameContext",
    "Adversary",
    "ImageSearchAdversary",
    "ReplayAdversary",
    "rational_adversary",
    "pullback_adversary",
    "simplest_rational",
    "play",
    "replay",
    "ScriptStrategy",
    "force_point_on_curve",
    "force_generic_quadruple",
    "quadruple_radius",
    "quadruple_radius_certified",
    "QUADRUPLE_SEEDS",
    "DEFAULT_MAX_MOVES",
]

DEFAULT_MAX_MOVES = 1000


class AdversaryViolation(RuntimeError):
    """Bob answered with a point outside the requested open set."""


class SearchBudgetExceeded(RuntimeError):
    """Bob could not find a point in the requested set within his search budget."""


class ScriptRuntimeError(RuntimeError):
    pass


# -- open sets ------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscAtom:
    """Open disc around a finite point with positive rational radius."""

    center: HPoint
    radius: Fraction

    def __post_init__(self):
        if not self.center.is_finite:
            raise pj.InfinitePoint("disc center must be finite")
        if self.radius <= 0:
            raise ValueError("disc radius must be positive")

    def contains(self, p):
        if not p.is_finite:
            return False
        x, y = p.affine()
        cx, cy = self.center.affine()
        return ((x - cx) ** 2 + (y - cy) ** 2 - real(self.radius) ** 2).sign() < 0

    def to_str(self):
        return f"disc({self.center.to_str()}, {self.radius})"


@dataclass(frozen=True)
class HalfPlaneAtom:
    """Strict side of a line: side * (a*x + b*y + c) > 0 for the stored coefficients."""

    line: HLine
    side: int

    def __post_init__(self):
        if self.line.is_at_infinity:
            raise GeometryError("the line at infinity bounds no half-plane")
        if self.side not in (1, -1):
            raise ValueError("side must be +1 or -1")

    def contains(self, p):
        if not p.is_finite:
            return False
        x, y = p.affine()
        a, b, c = self.line.coords
        return self.side * (a * x + b * y + c).sign() > 0

    def to_str(self):
        return f"halfplane({self.line.to_str()}, {'+' if self.side > 0 else '-'})"


def region_contains(region, p):
    return all(atom.contains(p) for atom in region)


def region_str(region):
    return " and ".join(atom.to_str() for atom in region)


def parse_region(text):
    atoms = []
    for part in text.split(" and "):
        part = part.strip()
        if not part.endswith(")"):
            raise ValueError(f"malformed set atom {part!r}")
        if part.startswith("disc("):
            obj, _, rad = part[5:-1].rpartition(",")
            atoms.append(DiscAtom(pj.parse_object(obj), Fraction(rad.strip())))
        elif part.startswith("halfplane("):
            obj, _, side = part[10:-1].rpartition(",")
            atoms.append(HalfPlaneAtom(pj.parse_object(obj), 1 if side.strip() == "+" else -1))
        else:
            raise ValueError(f"unknown set atom {part!r}")
    return tuple(atoms)


# -- simplest rationals ---------------------------------------------------------------

_MAX_ORACLE_CALLS = 20000


def simplest_rational(oracle):
    """Rational with least denominator (then least |numerator|) in a convex set of reals.

    ``oracle(q)`` returns -1 if q lies below the set, 0 inside, +1 above.
    Stern-Brocot descent with galloping, so long runs cost O(log) calls.
    """
    calls = [0]

    def ask(q):
        calls[0] += 1
        if calls[0] > _MAX_ORACLE_CALLS:
            raise SearchBudgetExceeded("rational search did not converge")
        return oracle(q)

    r0 = ask(Fraction(0))
    if r0 == 0:
        return Fraction(0)
    if r0 < 0:
        return _stern_brocot(ask)
    return -_stern_brocot(lambda q: -ask(-q))


def _stern_brocot(ask):
    a, b, c, d = 0, 1, 1, 0  # left bound a/b, right bound c/d (1/0 = infinity)
    while True:
        m = Fraction(a + c, b + d)
        r = ask(m)
        if r == 0:
            return m
        if r < 0:
            # left bound walks right: (a + k c) / (b + k d) while still below the set
            k = _gallop(lambda k: ask(Fraction(a + k * c, b + k * d)) < 0)
            a, b = a + k * c, b + k * d
        else:
            k = _gallop(lambda k: ask(Fraction(k * a + c, k * b + d)) > 0)
            c, d = k * a + c, k * b + d


def _gallop(still):
    """Largest k >= 1 with still(k) true, given still(1) is true and still is monotone."""
    lo, hi = 1, 2
    while still(hi):
        lo, hi = hi, hi * 2
        if hi > 1 << 200:
            raise SearchBudgetExceeded("unbounded rational search")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if still(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _simpler(p, q):
    if p is None:
        return q
    if q is None:
        return p
    return p if (p.denominator, abs(p), p) <= (q.denominator, abs(q), q) else q


def _interval_oracle(lo, hi):
    def oracle(q):
        v = real(q)
        if lo is not None and (v - lo).sign() <= 0:
            return -1
        if hi is not None and (v - hi).sign() >= 0:
            return 1
        return 0

    return oracle


# -- adversaries ----------------------------------------------------------------------


class Adversary:
    name = "adversary"

    def choose_point(self, region, cfg):
        raise NotImplementedError


def _linear_set(alpha, beta):
    """{y : alpha + beta*y > 0} as a list of open intervals."""
    s = beta.sign()
    if s == 0:
        return [(None, None)] if alpha.sign() > 0 else []
    root = -alpha / beta
    return [(root, None)] if s > 0 else [(None, root)]


def _quadratic_neg_set(a, b, c):
    """{y : a*y^2 + 2*b*y + c < 0} as a list of open intervals."""
    if a.sign() == 0:
        return _linear_set(-c, -2 * b)
    disc = b * b - a * c
    ds = disc.sign()
    if a.sign() > 0:
        if ds <= 0:
            return []
        r = sqrt(disc)
        return [((-b - r) / a, (-b + r) / a)]
    if ds < 0:
        return [(None, None)]
    if ds == 0:
        root = -b / a
        return [(None, root), (root, None)]
    r = sqrt(disc)
    lo, hi = (-b + r) / a, (-b - r) / a  # a < 0 so this order is increasing
    return [(None, lo), (hi, None)]


def _lt(x, y):
    """x < y for endpoints where None stands for -inf (as lower) handled by caller."""
    return (x - y).sign() < 0


def _intersect_sets(s1, s2):
    out = []
    for lo1, hi1 in s1:
        for lo2, hi2 in s2:
            lo = lo2 if lo1 is None else lo1 if lo2 is None else (lo1 if _lt(lo2, lo1) else lo2)
            hi = hi2 if hi1 is None else hi1 if hi2 is None else (hi1 if _lt(hi1, hi2) else hi2)
            if lo is None or hi is None or _lt(lo, hi):
                out.append((lo, hi))
    return out


def _split_at(intervals, y):
    out = []
    for lo, hi in intervals:
        inside = (lo is None or _lt(lo, y)) and (hi is None or _lt(y, hi))
        if inside:
            out += [(lo, y), (y, hi)]
        else:
            out.append((lo, hi))
    return out


def _sample_points(region):
    """Deterministic candidate points for locating some interior point of region."""
    discs = [a for a in region if isinstance(a, DiscAtom)]
    if discs:
        cx, cy = discs[0].center.affine()
        rho = real(discs[0].radius)
        yield pj.point(cx, cy)
        for k in range(1, 7):
            n = 1 << k
            step = rho / n
            cells = [(i, j) for i in range(-n, n + 1) for j in range(-n, n + 1) if 0 < i * i + j * j < n * n]
            cells.sort(key=lambda ij: (ij[0] ** 2 + ij[1] ** 2, ij))
            for i, j in cells:
                if k > 1 and i % 2 == 0 and j % 2 == 0:
                    continue
                yield pj.point(cx + step * i, cy + step * j)
    else:
        for s in range(0, 24):
            scale = Fraction(1 << s, 16)
            for i in range(-4, 5):
                for j in range(-4, 5):
                    yield pj.point(scale * i, scale * j)


class ImageSearchAdversary(Adversary):
    """Answers with T^-1(r) for the simplest rational point r of T(U).

    Simplest means: least-denominator x coordinate over the x-range of the
    image set, then least-denominator y on that vertical slice.  With T the
    identity this is the minimal-denominator rational adversary.

    ``avoid`` is an optional image point that is never returned.  With
    ``guard_lines`` set, r is also kept off every line joining ``avoid`` to
    the image of a point already in the configuration, so no join of Bob's
    point with an existing point passes through ``avoid``.
    """

    def __init__(self, transform=None, avoid=None, guard_lines=False, name="rational", max_samples=6000):
        self._identity = transform is None
        self.T = transform or ProjMap.identity()
        self.avoid = avoid
        self.guard_lines = guard_lines and avoid is not None
        self.name = name
        self.max_samples = max_samples
        self._adj = self.T.adjugate()
        self._inverse = ProjMap(self._adj)
        self._det_sign = self.T.det().sign()

    def _row3(self, p):
        return sum((a * b for a, b in zip(self.T.m[2], p.coords)), ZERO)

    def _interior_point(self, region):
        for count, p in enumerate(_sample_points(region)):
            if count >= self.max_samples:
                break
            if region_contains(region, p) and self._row3(p).sign() != 0:
                return p
        raise SearchBudgetExceeded(f"no interior point found for {region_str(region)}")

    def _slice(self, region, c, s):
        adj = self._adj
        A = [adj[i][0] * c + adj[i][2] for i in range(3)]
        B = [adj[i][1] for i in range(3)]
        sets = [_linear_set(s * A[2], s * B[2])]
        for atom in region:
            if isinstance(atom, DiscAtom):
                cx, cy = atom.center.affine()
                r2 = real(atom.radius) ** 2
                u0, u1 = A[0] - cx * A[2], B[0] - cx * B[2]
                v0, v1 = A[1] - cy * A[2], B[1] - cy * B[2]
                qa = u1 * u1 + v1 * v1 - r2 * B[2] * B[2]
                qb = u0 * u1 + v0 * v1 - r2 * A[2] * B[2]
                qc = u0 * u0 + v0 * v0 - r2 * A[2] * A[2]
                sets.append(_quadratic_neg_set(qa, qb, qc))
            else:
                a, b, cc = atom.line.coords
                k = atom.side * s
                alpha = k * (a * A[0] + b * A[1] + cc * A[2])
                beta = k * (a * B[0] + b * B[1] + cc * B[2])
                sets.append(_linear_set(alpha, beta))
            if not sets[-1]:
                return []
        out = sets[0]
        for other in sets[1:]:
            out = _intersect_sets(out, other)
            if not out:
                return []
        return out

    def _guards(self, cfg):
        """Lines through the avoided image point and each existing point's image."""
        if not self.guard_lines or cfg is None:
            return []
        out = []
        for _, p in cfg.points():
            img = pj.apply_map(self.T, p)
            if img != self.avoid:
                out.append(pj.join(self.avoid, img))
        return out

    def choose_point(self, region, cfg=None):
        if not region:
            raise ValueError("empty set expression")
        p0 = self._interior_point(region)
        sigma = self._row3(p0).sign() * p0[2].sign()
        s = sigma * self._det_sign
        x0, _ = pj.apply_map(self.T, p0).affine()
        guards = self._guards(cfg)
        vertical = [g for g in guards if g[1].sign() == 0]
        slanted = [g for g in guards if g[1].sign() != 0]

        def excluded_x(q):
            v = real(q)
            return any((g[0] * v + g[2]).sign() == 0 for g in vertical)

        def pick_x(lo, hi, depth=0):
            def oracle(q):
                if lo is not None and q <= lo:
                    return -1
                if hi is not None and q >= hi:
                    return 1
                if self._slice(region, real(q), s):
                    return 0
                return -1 if (real(q) - x0).sign() < 0 else 1

            q = simplest_rational(oracle)
            if not excluded_x(q):
                return q
            if depth > 8:
                raise SearchBudgetExceeded("too many excluded abscissae")
            return _simpler(pick_x(lo, q, depth + 1), pick_x(q, hi, depth + 1))

        cx = pick_x(None, None)
        cxr = real(cx)
        intervals = self._slice(region, cxr, s)
        if self.avoid is not None and self.avoid.is_finite:
            ax, ay = self.avoid.affine()
            if (ax - cxr).sign() == 0:
                intervals = _split_at(intervals, ay)
        for g in slanted:
            intervals = _split_at(intervals, -(g[0] * cxr + g[2]) / g[1])
        best = None
        for lo, hi in intervals:
            best = _simpler(best, simplest_rational(_interval_oracle(lo, hi)))
        r = pj.point(cx, best)
        p = r if self._identity else pj.apply_map(self._inverse, r)
        if not region_contains(region, p):
            raise AdversaryViolation(f"{self.name}: internal search returned {p.to_str()} outside the set")
        return p


def rational_adversary() -> ImageSearchAdversary:
    return ImageSearchAdversary(name="rational")


def pullback_adversary(T: ProjMap, name=None) -> ImageSearchAdversary:
    """Answers only with points whose T-images are rational and never the center.

    Bob also keeps his answers off every line through T(center) and the
    image of an existing point (see ImageSearchAdversary)."""
    avoid = pj.apply_map(T, pj.point(0, 0))
    return ImageSearchAdversary(T, avoid, guard_lines=True, name=name or f"pullback:{T.to_str()}")


def pullback_from_params(u, t) -> ImageSearchAdversary:
    T = pj.circle_preserving_map(u, t)
    return pullback_adversary(T, name=f"pullback:{real(u).to_str()},{real(t).to_str()}")


class ReplayAdversary(Adversary):
    """Returns pre-recorded points in order, without searching."""

    def __init__(self, points, name="replay", check=True):
        self.points = list(points)
        self.name = name
        self.check = check
        self._next = 0

    def choose_point(self, region, cfg=None):
        if self._next >= len(self.points):
            raise SearchBudgetExceeded("replay adversary ran out of recorded points")
        p = self.points[self._next]
        self._next += 1
        return p


def adversary_from_spec(text):
    """``rational`` or ``pullback:u,t``."""
    if text == "rational":
        return rational_adversary()
    if text.startswith("pullback:"):
        u, _, t = text[len("pullback:"):].partition(",")
        from .numbers import parse_real

        return pullback_from_params(parse_real(u.strip()), parse_real((t or "0").strip()))
    raise ValueError(f"unknown adversary {text!r}")


# -- moves and traces -----------------------------------------------------------------

_KIND = {"join": "i", "meet": "ii", "intersect": "ii", "request": "iii", "circle": "compass"}


@dataclass(frozen=True)
class Move:
    number: int
    kind: str
    op: str
    args: tuple
    response: tuple
    region: Optional[tuple] = None


@dataclass(frozen=True)
class TestRecord:
    name: str
    args: tuple
    value: bool
    after_move: int
    where: tuple = (0, 0)


@dataclass(frozen=True)
class OutputRecord:
    obj_id: int
    after_move: int


class _Stop(Exception):
    def __init__(self, outcome, message=""):
        super().__init__(message)
        self.outcome = outcome
        self.message = message


@dataclass
class Trace:
    initial: Configuration
    events: list
    final: Configuration
    outcome: str
    message: str = ""
    adversary: str = ""
    max_moves: int = DEFAULT_MAX_MOVES
    target: object = None
    compass: bool = False
    transform: Optional[ProjMap] = None

    @property
    def moves(self):
        return [e for e in self.events if isinstance(e, Move)]

    @property
    def tests(self):
        return [e for e in self.events if isinstance(e, TestRecord)]

    @property
    def outputs(self):
        return [e.obj_id for e in self.events if isinstance(e, OutputRecord)]

    @property
    def won(self):
        return self.outcome == "won"

    def bob_points(self):
        return [self.final[m.response[0]] for m in self.moves if m.kind == "iii"]

    def to_text(self):
        out = ["trace v1", f"adversary {self.adversary or '-'}", f"max_moves {self.max_moves}"]
        out.append(f"compass {'yes' if self.compass else 'no'}")
        out.append(f"target {self.target.to_str() if self.target is not None else '-'}")
        if self.transform is not None:
            out.append(f"transform {self.transform.to_str()}")
        out.append("initial")
        out += self.initial.to_text().splitlines()
        out.append("events")
        for e in self.events:
            if isinstance(e, Move):
                out.append(" ".join(["move", str(e.number), e.kind, e.op, *map(str, e.args)]))
                if e.kind == "iii":
                    out.append("  region " + (region_str(e.region) if e.region is not None else "-"))
                for i in e.response:
                    out.append(f"  + {i} {self.final[i].to_str()}")
            elif isinstance(e, TestRecord):
                val = "true" if e.value else "false"
                out.append(" ".join(["test", str(e.after_move), e.name, *map(str, e.args), "=", val]))
            else:
                out.append(f"output {e.after_move} {e.obj_id}")
        out.append("final")
        out += self.final.to_text().splitlines()
        out.append(f"outcome {self.outcome}")
        if self.message:
            out.append(f"message {self.message}")
        out.append("end trace")
        return "\n".join(out) + "\n"

    @classmethod
    def from_text(cls, text):
        rows = text.splitlines()
        if not rows or rows[0].strip() != "trace v1":
            raise ValueError("missing 'trace v1' header")
        meta = {}
        i = 1
        while rows[i].strip() != "initial":
            key, _, val = rows[i].strip().partition(" ")
            meta[key] = val
            i += 1
        i += 1
        j = rows.index("events", i)
        initial = Configuration.from_text("\n".join(rows[i:j]))
        k = rows.index("final", j)
        events = []
        cur = None
        for r in rows[j + 1:k]:
            s = r.strip()
            if s.startswith("move "):
                f = s.split()
                cur = {"number": int(f[1]), "kind": f[2], "op": f[3], "args": tuple(map(int, f[4:])),
                       "response": [], "region": None}
                events.append(cur)
            elif s.startswith("region "):
                body = s[len("region "):]
                cur["region"] = None if body == "-" else parse_region(body)
            elif s.startswith("+ "):
                cur["response"].append(int(s.split()[1]))
            elif s.startswith("test "):
                f = s.split()
                eq = f.index("=")
                events.append(TestRecord(f[2], tuple(map(int, f[3:eq])), f[eq + 1] == "true", int(f[1])))
            elif s.startswith("output "):
                f = s.split()
                events.append(OutputRecord(int(f[2]), int(f[1])))
        events = [Move(**{**e, "response": tuple(e["response"])}) if isinstance(e, dict) else e for e in events]
        end = next(n for n in range(k, len(rows)) if rows[n].startswith("outcome "))
        final = Configuration.from_text("\n".join(rows[k + 1:end]))
        outcome = rows[end].split(" ", 1)[1]
        message = ""
        if end + 1 < len(rows) and rows[end + 1].startswith("message "):
            message = rows[end + 1][len("message "):]
        target = None if meta.get("target", "-") == "-" else pj.parse_object(meta["target"])
        transform = pj.parse_object(meta["transform"]) if "transform" in meta else None
        return cls(initial, events, final, outcome, message, meta.get("adversary", "-"),
                   int(meta.get("max_moves", DEFAULT_MAX_MOVES)), target, meta.get("compass") == "yes", transform)


# -- the game -------------------------------------------------------------------------


class GameContext:
    """What a strategy sees: the current configuration and the request methods."""

    def __init__(self, initial, adversary, target=None, max_moves=DEFAULT_MAX_MOVES, compass=False,
                 on_move=None):
        if max_moves < 1:
            raise ValueError("max_moves must be at least 1")
        self.config = initial.copy()
        self.adversary = adversary
        self.target = target
        self.max_moves = max_moves
        self.compass = compass
        self.on_move = on_move
        self.events = []
        self.move_count = 0

    def __getitem__(self, i):
        return self.config[i]

    def _start(self):
        if self.move_count >= self.max_moves:
            raise _Stop("budget", f"move budget of {self.max_moves} exhausted")

    def _finish(self, op, args, objs, region=None):
        self.move_count += 1
        ids = []
        for idx, obj in enumerate(objs):
            i, _ = self.config.add(obj, Provenance(op, tuple(args) if op != "request" else (), self.move_count, idx))
            ids.append(i)
        move = Move(self.move_count, _KIND[op], op, tuple(args), tuple(ids), region)
        self.events.append(move)
        if self.on_move is not None:
            self.on_move(self, move)
        if self.target is not None and self.config.find(self.target) is not None:
            raise _Stop("won", f"target constructed at move {self.move_count}")
        return ids

    def _get(self, i, cls, what):
        obj = self.config[i]
        if not isinstance(obj, cls):
            raise ScriptRuntimeError(f"{what} needs a {cls.__name__}, object {i} is {obj.to_str()}")
        return obj

    def join(self, p, q):
        self._start()
        res = compute("join", [self._get(p, HPoint, "join"), self._get(q, HPoint, "join")])
        return self._finish("join", (p, q), res)[0]

    def meet(self, l, m):
        self._start()
        res = compute("meet", [self._get(l, HLine, "meet"), self._get(m, HLine, "meet")])
        return self._finish("meet", (l, m), res)[0]

    def intersect(self, a, b):
        """All common points of two curves, in the documented coordinate order."""
        self._start()
        objs = [self.config[a], self.config[b]]
        if not all(isinstance(o, (HLine, Conic)) for o in objs):
            raise ScriptRuntimeError("intersect needs lines or conics")
        if all(isinstance(o, Conic) for o in objs) and not self.compass:
            raise ScriptRuntimeError("two-conic intersection needs compass mode")
        return self._finish("intersect", (a, b), compute("intersect", objs))

    def circle(self, center, a, b):
        if not self.compass:
            raise ScriptRuntimeError("circle needs compass mode")
        self._start()
        pts = [self._get(i, HPoint, "circle") for i in (center, a, b)]
        return self._finish("circle", (center, a, b), compute("circle", pts))[0]

    def request(self, region):
        self._start()
        region = tuple(region)
        p = self.adversary.choose_point(region, self.config)
        if not getattr(self.adversary, "check", True):
            # points supplied from elsewhere (e.g. images of another run's answers)
            return self._finish("request", (), [p], None)[0]
        if not region_contains(region, p):
            raise AdversaryViolation(f"{self.adversary.name} answered {p.to_str()} outside {region_str(region)}")
        return self._finish("request", (), [p], region)[0]

    def evaluate(self, name, args, where=(0, 0)):
        value = evaluate_test(name, [self.config[i] for i in args])
        self.events.append(TestRecord(name, tuple(args), value, self.move_count, where))
        return value

    def output(self, i):
        self.events.append(OutputRecord(i, self.move_count))


def evaluate_test(name, objs):
    """Exact truth value of a named test on concrete objects."""
    if name == "incident":
        p, c = objs
        if not isinstance(p, HPoint) or not isinstance(c, (HLine, Conic)):
            raise ScriptRuntimeError("incident needs a point and a line or conic")
        return pj.incident(p, c)
    if name == "equal":
        a, b = objs
        return type(a) is type(b) and a == b
    if name == "parallel":
        l, m = objs
        if not isinstance(l, HLine) or not isinstance(m, HLine):
            raise ScriptRuntimeError("parallel needs two lines")
        return pj.is_parallel(l, m)
    if name == "between":
        p, q, r = objs
        for o in objs:
            if not isinstance(o, HPoint) or not o.is_finite:
                raise ScriptRuntimeError("between needs three finite points")
        if p == r:
            raise ScriptRuntimeError("between needs distinct end points")
        if not pj.incident(q, pj.join(p, r)):
            raise ScriptRuntimeError("between needs collinear points")
        (px, py), (qx, qy), (rx, ry) = p.affine(), q.affine(), r.affine()
        if q == p or q == r:
            return False
        return ((qx - px) * (rx - qx) + (qy - py) * (ry - qy)).sign() > 0
    if name == "sameside":
        p, q, l = objs
        if not (isinstance(p, HPoint) and isinstance(q, HPoint) and isinstance(l, HLine)):
            raise ScriptRuntimeError("sameside needs two points and a line")
        if not (p.is_finite and q.is_finite) or l.is_at_infinity:
            raise ScriptRuntimeError("sameside needs finite points and an affine line")
        sp = l.value_at(p).sign() * p[2].sign()
        sq = l.value_at(q).sign() * q[2].sign()
        return sp * sq > 0
    raise ValueError(f"unknown test {name!r}")


def play(strategy, adversary, initial, target=None, max_moves=DEFAULT_MAX_MOVES, compass=False,
         on_move=None) -> Trace:
    """Run one game and return its Trace.

    Outcomes: ``won`` (target appeared), ``lost`` (strategy finished
    without it), ``budget`` (move limit reached) or ``error`` (an invalid
    request, a failed adversary search or an adversary violation).
    """
    if isinstance(strategy, lang.Script):
        strategy = ScriptStrategy(strategy)
    ctx = GameContext(initial, adversary, target, max_moves, compass, on_move)
    outcome, message = "lost", "strategy finished"
    if target is not None and ctx.config.find(target) is not None:
        outcome, message = "won", "target given initially"
    else:
        try:
            strategy(ctx)
        except _Stop as stop:
            outcome, message = stop.outcome, stop.message
        except (ScriptRuntimeError, GeometryError, SearchBudgetExceeded, AdversaryViolation) as exc:
            outcome, message = "error", f"{type(exc).__name__}: {exc}"
    return Trace(initial.copy(), ctx.events, ctx.config, outcome, message.replace("\n", " "),
                 getattr(adversary, "name", "-"), max_moves, target, compass)


@dataclass
class ReplayReport:
    ok: bool
    mismatches: list = field(default_factory=list)
    trace: Optional[Trace] = None


def replay(trace: Trace) -> ReplayReport:
    """Re-execute a trace from its initial snapshot using its recorded Bob points.

    Deterministic moves are recomputed, Bob points are re-checked against
    their sets, tests re-evaluated, and the regenerated trace text must be
    byte-identical to the original."""
    bob = []
    for m in trace.moves:
        if m.kind == "iii":
            bob.append(trace.final[m.response[0]])
    adv = ReplayAdversary(bob, name=trace.adversary)
    mismatches = []

    def strategy(ctx):
        for e in trace.events:
            if isinstance(e, Move):
                if e.op == "request":
                    adv.check = e.region is not None
                    got = [ctx.request(e.region or ())]
                elif e.op == "intersect":
                    got = ctx.intersect(*e.args)
                else:
                    got = [getattr(ctx, e.op)(*e.args)]
                if tuple(got) != e.response:
                    mismatches.append(f"move {e.number}: response ids {tuple(got)} != {e.response}")
            elif isinstance(e, TestRecord):
                v = ctx.evaluate(e.name, e.args)
                if v != e.value:
                    mismatches.append(f"test {e.name} {e.args}: {v} != {e.value}")
            else:
                ctx.output(e.obj_id)

    again = play(strategy, adv, trace.initial, trace.target, trace.max_moves, trace.compass)
    again.adversary = trace.adversary
    again.transform = trace.transform
    if again.outcome != trace.outcome and not (trace.outcome == "error" and again.outcome == "lost"):
        mismatches.append(f"outcome {again.outcome} != {trace.outcome}")
    if trace.outcome == "error":
        again.outcome, again.message = trace.outcome, trace.message
    else:
        again.message = trace.message
    if again.to_text() != trace.to_text():
        mismatches.append("regenerated trace text differs")
    return ReplayReport(not mismatches, mismatches, again)


# -- scripts as strategies --------------------------------------------------------------

_UNBOUND = object()


class ScriptStrategy:
    """Interprets a parsed Script against a GameContext."""

    def __init__(self, script: lang.Script):
        self.script = script

    def __call__(self, ctx):
        givens = self.script.givens
        if len(givens) > len(ctx.config):
            raise ScriptRuntimeError(f"script needs {len(givens)} givens, configuration has {len(ctx.config)}")
        self._run(ctx, self.script.body, [dict(zip(givens, range(len(givens))))])

    def _lookup(self, scope, name):
        for frame in reversed(scope):
            if name in frame:
                v = frame[name]
                if v is _UNBOUND:
                    raise ScriptRuntimeError(f"{name!r} has no value (the intersection had fewer points)")
                return v
        raise ScriptRuntimeError(f"undefined identifier {name!r}")

    def _region(self, ctx, scope, region):
        atoms = []
        for a in region.atoms:
            if isinstance(a, lang.Disc):
                if isinstance(a.center, str):
                    center = ctx.config[self._lookup(scope, a.center)]
                    if not isinstance(center, HPoint):
                        raise ScriptRuntimeError(f"disc center {a.center!r} is not a point")
                else:
                    center = pj.point(a.center.x, a.center.y)
                atoms.append(DiscAtom(center, a.radius))
            else:
                ln = ctx.config[self._lookup(scope, a.line)]
                if not isinstance(ln, HLine):
                    raise ScriptRuntimeError(f"halfplane needs a line, {a.line!r} is not one")
                atoms.append(HalfPlaneAtom(ln, 1 if a.side == "+" else -1))
        return tuple(atoms)

    def _test(self, ctx, scope, t):
        if isinstance(t, lang.Incident):
            name, names = "incident", (t.point, t.carrier)
        elif isinstance(t, lang.Equal):
            name, names = "equal", (t.a, t.b)
        elif isinstance(t, lang.Parallel):
            name, names = "parallel", (t.l, t.m)
        elif isinstance(t, lang.Between):
            name, names = "between", (t.p, t.q, t.r)
        else:
            name, names = "sameside", (t.p, t.q, t.line)
        return ctx.evaluate(name, [self._lookup(scope, n) for n in names], t.pos)

    def _run(self, ctx, body, scope):
        for s in body:
            frame = scope[-1]
            if isinstance(s, lang.LetJoin):
                frame[s.name] = ctx.join(self._lookup(scope, s.p), self._lookup(scope, s.q))
            elif isinstance(s, lang.LetMeet):
                frame[s.name] = ctx.meet(self._lookup(scope, s.l), self._lookup(scope, s.m))
            elif isinstance(s, lang.LetIntersections):
                ids = ctx.intersect(self._lookup(scope, s.a), self._lookup(scope, s.b))
                if s.index is not None:
                    frame[s.names[0]] = ids[s.index] if s.index < len(ids) else _UNBOUND
                else:
                    for k, name in enumerate(s.names):
                        frame[name] = ids[k] if k < len(ids) else _UNBOUND
            elif isinstance(s, lang.LetCircle):
                frame[s.name] = ctx.circle(*(self._lookup(scope, n) for n in (s.center, s.a, s.b)))
            elif isinstance(s, lang.Request):
                frame[s.name] = ctx.request(self._region(ctx, scope, s.region))
            elif isinstance(s, lang.If):
                if self._test(ctx, scope, s.test):
                    self._run(ctx, s.then, scope + [{}])
                elif s.orelse is not None:
                    self._run(ctx, s.orelse, scope + [{}])
            elif isinstance(s, lang.Repeat):
                for _ in range(s.count):
                    self._run(ctx, s.body, scope + [{}])
            elif isinstance(s, lang.Output):
                ctx.output(self._lookup(scope, s.name))
            elif isinstance(s, lang.Assert):
                if not self._test(ctx, scope, s.test):
                    raise ScriptRuntimeError(f"assertion failed at {s.pos[0]}:{s.pos[1]}")


# -- forcing fragments ------------------------------------------------------------------


def _rational_bounds(x, bits=16):
    iv = approx(x, bits)
    return Fraction(iv.lo), Fraction(iv.hi)


def force_point_on_curve(ctx: GameContext, curve_id: int) -> int:
    """Four moves: a point on each side of the curve, their join, the intersection.

    Returns the id of the first intersection point, which lies exactly on the curve."""
    curve = ctx.config[curve_id]
    if isinstance(curve, HLine):
        if curve.is_at_infinity:
            raise GeometryError("cannot force a point on the line at infinity")
        a, b, c = curve.coords
        base = pj.point(-c / a, 0) if a.sign() != 0 else pj.point(0, -c / b)
        inner = (DiscAtom(base, Fraction(1)), HalfPlaneAtom(curve, 1))
        outer = (DiscAtom(base, Fraction(1)), HalfPlaneAtom(curve, -1))
    elif isinstance(curve, Conic) and pj.is_circle(curve):
        center = pj.circle_center(curve)
        cx, cy = center.affine()
        r_lo, _ = _rational_bounds(sqrt(pj.circle_radius_sq(curve)))
        _, r_hi = _rational_bounds(sqrt(pj.circle_radius_sq(curve)))
        if r_lo <= 0:
            raise GeometryError("circle too small to force a point on")
        inner = (DiscAtom(center, r_lo / 2),)
        outer = (DiscAtom(pj.point(cx + r_hi + 1, cy), Fraction(1, 2)),)
    else:
        raise GeometryError("can only force points on lines and circles")
    p = ctx.request(inner)
    q = ctx.request(outer)
    l = ctx.join(p, q)
    pts = ctx.intersect(l, curve_id)
    return pts[0]


QUADRUPLE_SEEDS = ((0, 0), (1, 0), (0, 1), (2, 3))


def _box(c, r):
    return (Fraction(c[0]) - r, Fraction(c[0]) + r), (Fraction(c[1]) - r, Fraction(c[1]) + r)


def _isub(a, b):
    return a[0] - b[1], a[1] - b[0]


def _imul(a, b):
    ps = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
    return min(ps), max(ps)


def _excludes_zero(iv):
    return iv[0] > 0 or iv[1] < 0


def quadruple_radius_certified(radius, seeds=QUADRUPLE_SEEDS) -> bool:
    """Interval proof that any points within `radius` of the seeds form a generic quadruple.

    Every point of a disc lies in its bounding box; the orientation of each
    triple and the direction cross product of each pair of connecting lines
    are bounded with rational interval arithmetic over those boxes."""
    r = Fraction(radius)
    boxes = [_box(c, r) for c in seeds]

    def cross(d1, d2):
        return _isub(_imul(d1[0], d2[1]), _imul(d1[1], d2[0]))

    def direction(i, j):
        return _isub(boxes[j][0], boxes[i][0]), _isub(boxes[j][1], boxes[i][1])

    for i, j, k in itertools.combinations(range(4), 3):
        if not _excludes_zero(cross(direction(i, j), direction(i, k))):
            return False
    pairs = list(itertools.combinations(range(4), 2))
    for (a, b), (c, d) in itertools.combinations(pairs, 2):
        if len({a, b, c, d}) == 4 and not _excludes_zero(cross(direction(a, b), direction(c, d))):
            return False
    return True


def quadruple_radius(seeds=QUADRUPLE_SEEDS) -> Fraction:
    """Largest radius 2^-k (k >= 1) certified by quadruple_radius_certified."""
    for k in range(1, 40):
        r = Fraction(1, 1 << k)
        if quadruple_radius_certified(r, seeds):
            return r
    raise ValueError("seeds are not in general position")


def force_generic_quadruple(ctx: GameContext, radius=None) -> list:
    """Four requests around (0,0), (1,0), (0,1), (2,3); any answers are generic.

    A custom radius must pass quadruple_radius_certified."""
    if radius is None:
        r = quadruple_radius()
    else:
        r = Fraction(radius)
        if r <= 0 or not quadruple_radius_certified(r):
            raise ValueError(f"radius {r} does not certify a generic quadruple")
    return [ctx.request((DiscAtom(pj.point(*c), r),)) for c in QUADRUPLE_SEEDS]
