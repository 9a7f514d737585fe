"""Command-line entry point: ``constructibility <command> ...``.

Exit status: 0 on success, 1 for domain errors or negative results, 2 for
usage errors.  Default budgets come from CONSTRUCTIBILITY_MAX_OBJECTS and
CONSTRUCTIBILITY_MAX_NODES and can be overridden with --max-objects and
--max-nodes.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources

from . import lang, lab
from . import projective as pj
from .closure import Budget, Configuration, OpSet, closure_to_depth, density_probe, stats_csv
from .game import DEFAULT_MAX_MOVES, Trace, adversary_from_spec, play, replay
from .numbers import BudgetExceeded, parse_real
from .projective import GeometryError
from .svg import render_svg


class CliError(Exception):
    pass


def _read(path):
    if path.startswith("bundled:"):
        return resources.files("constructibility").joinpath("scripts", path[len("bundled:"):]).read_text()
    with open(path) as fh:
        return fh.read()


def _write(path, text):
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def _script(path):
    return lang.parse(_read(path), path)


def _config(path):
    if path is None:
        return Configuration([pj.unit_circle()])
    text = _read(path)
    if text.lstrip().startswith("trace v1"):
        return Trace.from_text(text).final
    return Configuration.from_text(text)


def _budget(args):
    b = Budget()
    if getattr(args, "max_objects", None):
        b.max_objects = args.max_objects
    if getattr(args, "max_nodes", None):
        b.max_nodes = args.max_nodes
    return b


def cmd_check(args):
    try:
        script = _script(args.script)
    except lang.ScriptSyntaxError as exc:
        for e in exc.errors:
            print(f"{args.script}:{e}")
        return 1
    inputs = _config(args.config) if args.config else None
    diags = lang.check(script, inputs)
    for d in diags:
        print(f"{args.script}:{d}")
    if any(d.severity == "error" for d in diags):
        return 1
    print(f"{args.script}: ok ({len(script.body)} statements)")
    return 0


def cmd_play(args):
    script = _script(args.script)
    target = pj.parse_object(args.target) if args.target else None
    trace = play(script, adversary_from_spec(args.adversary), _config(args.config), target,
                 args.max_moves, compass=args.compass)
    if args.trace:
        _write(args.trace, trace.to_text())
    won = "won" if trace.won else "not won"
    print(f"outcome: {trace.outcome} ({won})")
    print(f"moves: {len(trace.moves)}")
    print(f"message: {trace.message}")
    return 1 if trace.outcome == "error" else 0


def cmd_closure(args):
    cfg = _config(args.config)
    out, stats = closure_to_depth(cfg, args.depth, OpSet.parse(args.ops), _budget(args))
    csv = stats_csv(stats)
    if args.stats:
        _write(args.stats, csv)
    else:
        sys.stdout.write(csv)
    if args.output:
        _write(args.output, out.to_text())
    return 0


def cmd_probe(args):
    cfg = _config(args.config)
    res = density_probe(cfg, pj.parse_object(args.target), parse_real(args.eps), OpSet.parse(args.ops),
                        _budget(args) if args.max_objects else None)
    if res.found:
        print(f"found {res.witness.to_str()} at depth {res.depth} ({res.method}, {res.explored} explored)")
        return 0
    print("not found within budget (inconclusive)")
    return 1


def cmd_replay(args):
    rep = replay(Trace.from_text(_read(args.trace)))
    if rep.ok:
        print("replay: identical")
        return 0
    for m in rep.mismatches:
        print(f"mismatch: {m}")
    return 1


def cmd_transform(args):
    trace = Trace.from_text(_read(args.trace))
    T = pj.circle_preserving_map(parse_real(args.u), parse_real(args.t))
    rep = lab.transform_trace(trace, T)
    sys.stdout.write(rep.to_text())
    if args.output:
        _write(args.output, rep.trace.to_text())
    return 0 if rep.ok else 1


def cmd_diverge(args):
    script = _script(args.script)
    T = pj.circle_preserving_map(parse_real(args.u), parse_real(args.t))
    res = lab.find_test_divergence(script, T, adversary_from_spec(args.adversary), _config(args.config),
                                   args.max_moves)
    sys.stdout.write(res.to_text())
    return 0


def cmd_defeat(args):
    script = _script(args.script)
    rep = lab.defeat_strategy(script, parse_real(args.u), parse_real(args.t), args.max_moves, strict=False)
    sys.stdout.write(rep.to_text())
    if args.trace:
        _write(args.trace, rep.trace.to_text())
    return 1 if rep.violations else 0


def cmd_derive(args):
    if len(args.points) != 4:
        raise CliError("derive needs exactly four points")
    pts = [pj.parse_object(p) for p in args.points]
    res = lab.rational_plane_derivability(pts, pj.parse_object(args.target), _budget(args), args.max_depth)
    sys.stdout.write(res.to_text())
    return 0 if isinstance(res, lab.Derivation) else 1


def cmd_render(args):
    cfg = _config(args.input)
    _write(args.svg, render_svg(cfg, args.precision, box=parse_real(args.box).as_fraction()))
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="constructibility", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def budget_flags(sp):
        sp.add_argument("--max-objects", type=int, help="object budget (default from environment)")
        sp.add_argument("--max-nodes", type=int, help="arithmetic node budget")

    sp = sub.add_parser("check", help="parse and statically check a strategy script")
    sp.add_argument("script")
    sp.add_argument("--config", help="configuration whose objects bind the givens")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("play", help="play a script against an adversary")
    sp.add_argument("script")
    sp.add_argument("--adversary", default="rational", help="rational | pullback:u,t")
    sp.add_argument("--target", help='target object, e.g. "(0, 0)" or "line [0:1:0]"')
    sp.add_argument("--max-moves", type=int, default=DEFAULT_MAX_MOVES)
    sp.add_argument("--trace", help="write the trace here")
    sp.add_argument("--config", help="initial configuration (default: the unit circle)")
    sp.add_argument("--compass", action="store_true", help="allow compass steps")
    sp.set_defaults(func=cmd_play)

    sp = sub.add_parser("closure", help="closure statistics up to a depth")
    sp.add_argument("config")
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--ops", default="straightedge", help="straightedge | compass | join,meet,line_conic,...")
    sp.add_argument("--stats", help="write per-depth CSV here (default stdout)")
    sp.add_argument("--output", help="write the closed configuration here")
    budget_flags(sp)
    sp.set_defaults(func=cmd_closure)

    sp = sub.add_parser("probe", help="search the closure for a point near a target")
    sp.add_argument("config")
    sp.add_argument("--target", required=True)
    sp.add_argument("--eps", required=True)
    sp.add_argument("--ops", default="join,meet")
    budget_flags(sp)
    sp.set_defaults(func=cmd_probe)

    sp = sub.add_parser("replay", help="re-execute a trace and compare byte for byte")
    sp.add_argument("trace")
    sp.set_defaults(func=cmd_replay)

    sp = sub.add_parser("transform", help="map a trace by a circle-preserving map and check every step")
    sp.add_argument("trace")
    sp.add_argument("--u", required=True)
    sp.add_argument("--t", default="0")
    sp.add_argument("--output", help="write the mapped trace here")
    sp.set_defaults(func=cmd_transform)

    sp = sub.add_parser("diverge", help="first test whose value changes under a map")
    sp.add_argument("script")
    sp.add_argument("--u", required=True)
    sp.add_argument("--t", default="0")
    sp.add_argument("--config")
    sp.add_argument("--adversary", default="rational")
    sp.add_argument("--max-moves", type=int, default=DEFAULT_MAX_MOVES)
    sp.set_defaults(func=cmd_diverge)

    sp = sub.add_parser("defeat", help="play a center script against the pullback adversary with checks")
    sp.add_argument("script")
    sp.add_argument("--u", default="3/5")
    sp.add_argument("--t", default="0")
    sp.add_argument("--max-moves", type=int, default=200)
    sp.add_argument("--trace")
    sp.set_defaults(func=cmd_defeat)

    sp = sub.add_parser("derive", help="derive a rational point from four rational points")
    sp.add_argument("points", nargs="+", help='four points such as "(0, 0)"')
    sp.add_argument("--target", required=True)
    sp.add_argument("--max-depth", type=int, default=12)
    budget_flags(sp)
    sp.set_defaults(func=cmd_derive)

    sp = sub.add_parser("render", help="SVG snapshot of a configuration or trace")
    sp.add_argument("input")
    sp.add_argument("--svg", required=True)
    sp.add_argument("--precision", type=int, default=32)
    sp.add_argument("--box", default="3", help="half-width of the drawn square")
    sp.set_defaults(func=cmd_render)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, lang.ScriptSyntaxError, GeometryError, BudgetExceeded, ValueError, OSError,
            RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
