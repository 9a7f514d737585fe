"""Checkable demonstrations about transformed constructions.

* transform_trace: map a played construction by a projective map and check
  that every deterministic step still produces the image of the original.
* find_test_divergence: run a script on a configuration and on its image
  and report the first test whose answer changes.
* defeat_strategy: play a center-finding script against the pullback
  adversary and check the invariants that keep the center out of reach.
* rational_plane_derivability: breadth-first search for a rational point
  from four rational seeds using joins and meets only.

Everything here is about finite plays; a report never certifies more than
the moves it actually ran.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import projective as pj
from .closure import Budget, Configuration, OpSet, Provenance, _expand, compute
from .game import (
    DEFAULT_MAX_MOVES,
    Move,
    OutputRecord,
    ReplayAdversary,
    ScriptRuntimeError,
    Trace,
    evaluate_test,
    play,
    pullback_from_params,
)
from .numbers import BudgetExceeded, approx
from .projective import GeometryError, HPoint, ProjMap

__all__ = [
    "StepInvalid",
    "OutputMismatch",
    "InvariantViolation",
    "TransformReport",
    "transform_trace",
    "transform_config",
    "Divergence",
    "NotFound",
    "find_test_divergence",
    "DefeatReport",
    "defeat_strategy",
    "Derivation",
    "rational_plane_derivability",
]

FINITE_NOTE = "finite play only: this run checks the moves it made, not every possible continuation"


class StepInvalid(RuntimeError):
    pass


class OutputMismatch(RuntimeError):
    pass


class InvariantViolation(RuntimeError):
    pass


def _decimal(obj, bits=40):
    vals = obj.entries if isinstance(obj, pj.Conic) else obj.coords
    return "[" + ", ".join(f"{float(approx(v, bits).mid):.10g}" for v in vals) + "]"


def _describe(obj):
    return f"{obj.to_str()}  # ~{_decimal(obj)}"


def transform_config(cfg: Configuration, T: ProjMap) -> Configuration:
    """Image of every object, same ids and provenance."""
    out = Configuration()
    for i, obj in cfg:
        _, new = out.add(pj.apply_map(T, obj), cfg.provenance(i))
        if not new:
            raise StepInvalid(f"object {i} collapsed onto an earlier one under {T.to_str()}")
    return out


# -- transform and replay -----------------------------------------------------------


@dataclass
class TransformReport:
    trace: Trace
    mismatches: list = field(default_factory=list)
    checked: int = 0

    @property
    def ok(self):
        return not self.mismatches

    def to_text(self):
        lines = [f"transform {self.trace.transform.to_str()}", f"steps checked {self.checked}"]
        lines += [f"mismatch {m}" for m in self.mismatches]
        lines.append("verdict " + ("valid: every step commutes with the map" if self.ok else "INVALID"))
        lines.append(f"note tests are not re-evaluated; {FINITE_NOTE}")
        return "\n".join(lines) + "\n"


def transform_trace(trace: Trace, T: ProjMap) -> TransformReport:
    """Replay trace on T(initial) with Bob's points replaced by their T-images.

    Each deterministic step is recomputed from the mapped inputs and compared
    (as a set, since coordinate ordering is not preserved by T) with the
    T-image of the original result.  Tests are not re-evaluated."""
    initial = transform_config(trace.initial, T)
    cfg = initial.copy()
    idmap = {i: i for i in range(len(initial))}
    events, mismatches = [], []
    checked = 0
    for e in trace.events:
        if isinstance(e, Move):
            expected = [pj.apply_map(T, trace.final[r]) for r in e.response]
            if e.op == "request":
                results = expected
            else:
                try:
                    results = compute(e.op, [cfg[idmap[a]] for a in e.args])
                except GeometryError as exc:
                    raise StepInvalid(f"move {e.number}: {exc}") from exc
                checked += 1
                if len(results) != len(expected) or not all(any(r == x for r in results) for x in expected):
                    mismatches.append(f"move {e.number} {e.op}: replayed result differs from the mapped original")
            new_ids = []
            for idx, obj in enumerate(results):
                parents = tuple(idmap[a] for a in e.args) if e.op != "request" else ()
                i, _ = cfg.add(obj, Provenance(e.op, parents, e.number, idx))
                new_ids.append(i)
            for r, x in zip(e.response, expected):
                match = next((i for i in new_ids if cfg[i] == x), None)
                if match is None:
                    mismatches.append(f"move {e.number}: image of object {r} was not produced")
                else:
                    idmap[r] = match
            events.append(Move(e.number, e.kind, e.op, tuple(idmap[a] for a in e.args), tuple(new_ids), None))
        elif isinstance(e, OutputRecord):
            events.append(OutputRecord(idmap[e.obj_id], e.after_move))
    target = pj.apply_map(T, trace.target) if trace.target is not None else None
    outcome, message = trace.outcome, trace.message
    if target is not None and outcome != "error":
        present = cfg.find(target) is not None
        if present != (outcome == "won"):
            mismatches.append("win status changed under the map")
    out = Trace(initial, events, cfg, outcome, message, f"{trace.adversary} (mapped)", trace.max_moves,
                target, trace.compass, T)
    return TransformReport(out, mismatches, checked)


# -- divergence of tests -----------------------------------------------------------------


@dataclass
class Divergence:
    """First test whose value differs between a run and its transformed run."""

    index: int
    name: str
    where: tuple
    original: list
    transformed: list
    original_value: object
    transformed_value: object
    provenance: list

    def reverify(self):
        """Recompute both values exactly; True when they still differ."""
        a = evaluate_test(self.name, self.original)
        try:
            b = evaluate_test(self.name, self.transformed)
        except ScriptRuntimeError as exc:
            b = f"error: {exc}"
        return a != b

    def to_text(self):
        lines = [f"divergence in test #{self.index} {self.name} at {self.where[0]}:{self.where[1]}",
                 f"original value {self.original_value}", f"transformed value {self.transformed_value}"]
        for k, (o, t) in enumerate(zip(self.original, self.transformed)):
            lines.append(f"operand {k} original {_describe(o)}")
            lines.append(f"operand {k} mapped   {_describe(t)}")
        lines += [f"provenance {p}" for p in self.provenance]
        return "\n".join(lines) + "\n"


@dataclass
class NotFound:
    reason: str
    explored: int = 0

    def to_text(self):
        return f"not found: {self.reason}\n"


def find_test_divergence(script, T: ProjMap, adversary, initial: Configuration,
                         max_moves=DEFAULT_MAX_MOVES):
    """Run script on initial and on T(initial) (Bob's answers mapped by T) and compare tests.

    Tests are compared in execution order; the first differing value wins."""
    first = play(script, adversary, initial, None, max_moves)
    images = [pj.apply_map(T, p) for p in first.bob_points()]
    second = play(script, ReplayAdversary(images, name="mapped", check=False), transform_config(initial, T),
                  None, max_moves)
    t1, t2 = first.tests, second.tests
    for k, a in enumerate(t1):
        objs1 = [first.final[i] for i in a.args]
        if k >= len(t2):
            if second.outcome == "error":
                objs2 = [pj.apply_map(T, o) for o in objs1]
                return Divergence(k, a.name, a.where, objs1, objs2, a.value, second.message,
                                  _provenance(first.final, a.args))
            break
        b = t2[k]
        if a.value != b.value:
            objs2 = [second.final[i] for i in b.args]
            return Divergence(k, a.name, a.where, objs1, objs2, a.value, b.value, _provenance(first.final, a.args))
    return NotFound(f"all {len(t1)} tests agree under {T.to_str()}", len(t1))


def _provenance(cfg, ids):
    out = []
    for root in ids:
        for i in cfg.chain(root):
            out.append(f"{i} {cfg[i].to_str()} <- {cfg.provenance(i).to_str()}")
    seen, uniq = set(), []
    for line in out:
        if line not in seen:
            seen.add(line)
            uniq.append(line)
    return uniq


# -- defeating center-finding strategies -------------------------------------------------


@dataclass
class DefeatReport:
    trace: Trace
    transform: ProjMap
    checks: int
    violations: list
    center_absent: bool
    bob_images_rational: bool

    @property
    def won(self):
        return self.trace.won

    def to_text(self):
        lines = [
            f"adversary {self.trace.adversary}",
            f"transform {self.transform.to_str()}",
            f"moves {len(self.trace.moves)}",
            f"outcome {self.trace.outcome}" + ("" if self.won else " (not won)"),
            f"invariant checks {self.checks}",
            f"violations {len(self.violations)}",
        ]
        lines += [f"violation {v}" for v in self.violations]
        lines.append(f"center image absent from mapped configuration: {'yes' if self.center_absent else 'no'}")
        lines.append(f"all Bob points have rational images: {'yes' if self.bob_images_rational else 'no'}")
        lines.append(f"note {FINITE_NOTE}")
        return "\n".join(lines) + "\n"


def _is_rational_point(p):
    return p.is_finite and all(c.is_rational() for c in p.coords)


def defeat_strategy(script, u, t, max_moves=200, target=None, initial=None, strict=True) -> DefeatReport:
    """Play script against the pullback adversary for circle_preserving_map(u, t).

    After every move: a Bob point must have a rational T-image; a
    deterministic step must commute with T (the step applied to the images
    of its inputs gives the images of its outputs).  With ``strict`` any
    failed check raises InvariantViolation."""
    T = pj.circle_preserving_map(u, t)
    adversary = pullback_from_params(u, t)
    initial = initial or Configuration([pj.unit_circle()])
    center = pj.point(0, 0)
    target = center if target is None else target
    violations = []
    counter = [0]

    def check(ctx, move):
        counter[0] += 1
        if move.kind == "iii":
            img = pj.apply_map(T, ctx.config[move.response[0]])
            if not _is_rational_point(img):
                violations.append(f"move {move.number}: Bob point image {img.to_str()} is not rational")
            return
        images = [pj.apply_map(T, ctx.config[a]) for a in move.args]
        derived = compute(move.op, images)
        mapped = [pj.apply_map(T, ctx.config[r]) for r in move.response]
        if len(derived) != len(mapped) or not all(any(d == m for d in derived) for m in mapped):
            violations.append(f"move {move.number}: {move.op} does not commute with the map")

    trace = play(script, adversary, initial, target, max_moves, on_move=check)
    center_img = pj.apply_map(T, center)
    center_absent = all(pj.apply_map(T, p) != center_img for _, p in trace.final.points())
    rational = all(_is_rational_point(pj.apply_map(T, p)) for p in trace.bob_points())
    if not trace.won and target == center and not center_absent:
        violations.append("center present in a configuration reported as not won")
    report = DefeatReport(trace, T, counter[0], violations, center_absent, rational)
    if strict and violations:
        raise InvariantViolation("; ".join(violations))
    return report


# -- derivability in the rational plane ----------------------------------------------------


@dataclass
class Derivation:
    target_id: int
    depth: int
    chain: list
    config: Configuration

    def to_text(self):
        lines = [f"derived at depth {self.depth}"]
        for i in self.chain:
            lines.append(f"{i} {self.config[i].to_str()} <- {self.config.provenance(i).to_str()}")
        return "\n".join(lines) + "\n"


def rational_plane_derivability(points, target: HPoint, budget: Optional[Budget] = None, max_depth=12):
    """Breadth-first joins and meets in the affine plane (parallel lines do not meet).

    Returns a Derivation with the shortest-depth chain found, or NotFound
    when the closure stops growing, the depth limit is hit, or the budget
    runs out (the last two are inconclusive)."""
    budget = budget or Budget(max_objects=20000)
    if not target.is_finite or not all(p.is_finite for p in points):
        raise pj.InfinitePoint("derivability works with finite points")
    cfg = Configuration(points)
    ops = OpSet.joins_meets(projective=False)
    found = cfg.find(target)
    if found is not None:
        return Derivation(found, 0, [found], cfg)
    start = 0
    try:
        for d in range(1, max_depth + 1):
            nxt = _expand(cfg, ops, d, budget, start)
            start = len(cfg)
            found = nxt.find(target)
            if found is None:
                # two lines through the target already settle the next level
                through = [i for i, ln in nxt.lines() if pj.incident(target, ln)]
                if len(through) >= 2:
                    through.sort(key=lambda i: (nxt.depth(i), i))
                    a, b = sorted(through[:2])
                    found, _ = nxt.add(pj.meet(nxt[a], nxt[b]), Provenance("meet", (a, b), d + 1))
            if found is not None:
                return Derivation(found, nxt.depth(found), nxt.chain(found), nxt)
            if len(nxt) == len(cfg):
                return NotFound(f"closure is finite ({len(cfg)} objects) and misses the target", len(cfg))
            cfg = nxt
    except BudgetExceeded as exc:
        return NotFound(f"inconclusive: {exc}", budget.max_objects)
    return NotFound(f"inconclusive: depth limit {max_depth} reached with {len(cfg)} objects", len(cfg))
