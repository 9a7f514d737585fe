"""The eleven acceptance criteria, each reported as one pass/fail line.

Run ``pytest tests/test_acceptance.py -s`` or read the "acceptance criteria"
section at the end of any pytest run.
"""

import os
import random
import subprocess
import sys
import time
from fractions import Fraction as F
from importlib import resources
from pathlib import Path


from constructibility import lab, lang
from constructibility import projective as pj
from constructibility.closure import (
    Configuration,
    OpSet,
    closure_to_depth,
    density_probe,
    generic_quadruple_check,
)
from constructibility.game import (
    OutputRecord,
    force_generic_quadruple,
    play,
    pullback_from_params,
    quadruple_radius,
    quadruple_radius_certified,
    rational_adversary,
)
from constructibility.numbers import real, sqrt
from exprs import eval_exact, oracle_sign, trees
from mutations import mutations
from traces import random_strategy

CIRCLE = Configuration([pj.unit_circle()])
SEED = [pj.point(0, 0), pj.point(1, 0), pj.point(0, 1), pj.point(2, 3)]
CENTER_SCRIPTS = ["diameter_chord.cst", "trapezoid_axes.cst", "polar_pole.cst"]
CORPUS = sorted(Path(__file__).parent.joinpath("data", "corpus").glob("*.cst"))


def bundled(name):
    return resources.files("constructibility").joinpath("scripts", name).read_text()


def report(log, n, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}"
    log.append(line)
    print(line)
    assert ok, line


def test_criterion_1_sign_oracle(acceptance_log):
    start = time.perf_counter()
    agree = disagree = uncertified = undefined = 0
    bad = []
    for t in trees(10**4, seed=2024):
        v = eval_exact(t)
        if v is None:
            undefined += 1
            continue
        want = oracle_sign(t, 1024)
        if want is None:
            uncertified += 1
            continue
        if v.sign() == want:
            agree += 1
        else:
            disagree += 1
            bad.append(t)
    elapsed = time.perf_counter() - start
    ok = disagree == 0 and agree > 9000 and elapsed < 60
    report(acceptance_log, 1, ok,
           f"{agree} signs agree, {disagree} disagree, {uncertified} uncertified at 1024 bits, "
           f"{undefined} divide by zero; {elapsed:.1f}s (limit 60s)")


def test_criterion_2_circle_preservation(acceptance_log):
    D = ((1, 0, 0), (0, 1, 0), (0, 0, -1))
    u = F(3, 5)
    results = []
    for t in (F(0), F(1), F(1, 2)):
        M = pj.circle_preserving_map(u, t).m
        prod = [[sum((M[k][i] * D[k][k] * M[k][j] for k in range(3)), real(0)) for j in range(3)] for i in range(3)]
        scaled = all((prod[i][j] - (1 - real(u) ** 2) * D[i][j]).sign() == 0 for i in range(3) for j in range(3))
        conic = pj.Conic(prod[0][0], prod[0][1], prod[0][2], prod[1][1], prod[1][2], prod[2][2])
        results.append(scaled and conic == pj.unit_circle())
    report(acceptance_log, 2, all(results),
           f"T^T diag(1,1,-1) T = (1-u^2) diag(1,1,-1) exactly for u=3/5, t in 0, 1, 1/2: {results}")


def test_criterion_3_transform_replay(acceptance_log):
    start = time.perf_counter()
    H = pj.hyperbolic_map(F(3, 5))
    maps = {"H(3/5)": H, "H(3/5)R(1/2)": H @ pj.rotation_map(F(1, 2))}
    mismatches, steps, outputs, moves = 0, 0, 0, []
    for seed in range(100):
        trace = play(random_strategy(seed, moves=11), rational_adversary(), CIRCLE)
        assert trace.outcome == "lost", trace.message
        moves.append(len(trace.moves))
        for T in maps.values():
            rep = lab.transform_trace(trace, T)
            mismatches += len(rep.mismatches)
            steps += rep.checked
            a = [e for e in trace.events if isinstance(e, OutputRecord)]
            b = [e for e in rep.trace.events if isinstance(e, OutputRecord)]
            for x, y in zip(a, b):
                outputs += 1
                if rep.trace.final[y.obj_id] != pj.apply_map(T, trace.final[x.obj_id]):
                    mismatches += 1
            if rep.trace.final[0] != pj.unit_circle():
                mismatches += 1
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 300 and max(moves) <= 15
    report(acceptance_log, 3, ok,
           f"100 traces ({min(moves)}-{max(moves)} moves) under {', '.join(maps)}: {steps} steps, "
           f"{outputs} outputs, {mismatches} mismatches; {elapsed:.1f}s (limit 300s)")


def test_criterion_4_divergence(acceptance_log):
    H = pj.hyperbolic_map(F(3, 5))
    adv = rational_adversary()
    par = lab.find_test_divergence(lang.parse(bundled("parallel_flip.cst")), H, adv,
                                   Configuration.from_text(bundled("parallel_flip.cfg")))
    btw = lab.find_test_divergence(lang.parse(bundled("between_flip.cst")), H, adv,
                                   Configuration.from_text(bundled("between_flip.cfg")))
    ctl = lab.find_test_divergence(lang.parse(bundled("between_flip.cst")), H, adv,
                                   Configuration.from_text(bundled("between_control.cfg")))
    ok = (isinstance(par, lab.Divergence) and par.name == "parallel" and par.reverify()
          and isinstance(btw, lab.Divergence) and btw.name == "between" and btw.reverify()
          and btw.transformed == [pj.point(3, 0), pj.point(7, 0), pj.point(F(3, 5), 0)]
          and isinstance(ctl, lab.NotFound))
    report(acceptance_log, 4, ok,
           f"parallel flip {type(par).__name__}, between flip {type(btw).__name__}, "
           f"control {type(ctl).__name__}")


def test_criterion_5_defeat(acceptance_log):
    start = time.perf_counter()
    summary, ok = [], True
    for name in CENTER_SCRIPTS:
        rep = lab.defeat_strategy(lang.parse(bundled(name), name), F(3, 5), 0, 200, strict=False)
        good = (not rep.won and not rep.violations and rep.center_absent and rep.bob_images_rational
                and rep.checks == len(rep.trace.moves) and rep.trace.final.find(pj.point(0, 0)) is None)
        ok = ok and good
        summary.append(f"{name} {rep.trace.outcome} after {len(rep.trace.moves)} moves, "
                       f"{len(rep.violations)} violations")
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 600
    report(acceptance_log, 5, ok, "; ".join(summary) + f"; {elapsed:.1f}s (limit 600s)")


def test_criterion_6_density_probe(acceptance_log):
    res = density_probe(Configuration(SEED), pj.point(F(1, 3), F(1, 7)), F(1, 1000))
    ok = res.found and res.depth == 18
    if res.found:
        x, y = res.witness.affine()
        ok = ok and (abs(x - F(1, 3)) - F(1, 1000)).sign() < 0 and (abs(y - F(1, 7)) - F(1, 1000)).sign() < 0
    report(acceptance_log, 6, ok,
           f"witness {res.witness.to_str() if res.found else None} at depth {res.depth} (golden 18), "
           f"{res.explored} objects explored")


def test_criterion_7_triviality(acceptance_log):
    cfg, stats = closure_to_depth(CIRCLE, 10, OpSet.straightedge())
    ok = cfg.same_objects(CIRCLE) and all((s.points, s.lines, s.conics) == (0, 0, 1) for s in stats)
    report(acceptance_log, 7, ok, "straightedge closure of the circle alone unchanged at depths 0-10")


def test_criterion_8_generic_quadruple(acceptance_log):
    rng = random.Random(8)
    bound = quadruple_radius()
    passed = {"rational": 0, "pullback": 0}
    for _ in range(100):
        r = bound / rng.randint(1, 64)
        assert quadruple_radius_certified(r)
        u = F(rng.randint(-19, 19), 20)
        t = F(rng.randint(-20, 20), rng.randint(1, 10))
        for name, adv in (("rational", rational_adversary()), ("pullback", pullback_from_params(u, t))):
            ids = []
            trace = play(lambda ctx: ids.extend(force_generic_quadruple(ctx, r)), adv, CIRCLE)
            if trace.outcome == "lost" and generic_quadruple_check(*(trace.final[i] for i in ids)):
                passed[name] += 1
    ok = passed == {"rational": 100, "pullback": 100}
    report(acceptance_log, 8, ok,
           f"generic responses: rational {passed['rational']}/100, pullback {passed['pullback']}/100 "
           f"(radii up to {bound}, random u and t)")


def test_criterion_9_parser(acceptance_log):
    sources = [p.read_text() for p in CORPUS]
    round_trips = sum(lang.parse(lang.pretty_print(lang.parse(s))) == lang.parse(s) for s in sources)
    mutated = located = 0
    for s in sources + [bundled(n) for n in CENTER_SCRIPTS]:
        for line, m in mutations(s):
            try:
                lang.parse(m)
            except lang.ScriptSyntaxError as exc:
                mutated += 1
                located += exc.errors[0].line == line
    ok = len(sources) >= 20 and round_trips == len(sources) and mutated >= 20 and located == mutated
    report(acceptance_log, 9, ok,
           f"{round_trips}/{len(sources)} corpus scripts round-trip; {located}/{mutated} mutations "
           f"report an error on the mutated statement")


def test_criterion_10_compass(acceptance_log):
    c = pj.circle_from(pj.point(0, 0), pj.point(0, 0), pj.point(1, 0))
    other = pj.circle_from(pj.point(1, 0), pj.point(0, 0), pj.point(1, 0))
    pts = pj.circle_circle_intersections(pj.unit_circle(), other)

    want = [pj.point(F(1, 2), sqrt(3) / 2), pj.point(F(1, 2), -sqrt(3) / 2)]
    ok = c == pj.unit_circle() and len(pts) == 2 and all(any(p == w for p in pts) for w in want)
    report(acceptance_log, 10, ok, f"circle_from gives {c.to_str()}; intersections {[p.to_str() for p in pts]}")


def _run(args, tmp, seed):
    env = dict(os.environ, PYTHONHASHSEED=str(seed))
    subprocess.run([sys.executable, "-m", "constructibility", *args], cwd=tmp, env=env, check=False,
                   capture_output=True, timeout=300)


def test_criterion_11_determinism(acceptance_log, tmp_path):
    seed_cfg = tmp_path / "seed.cfg"
    seed_cfg.write_text(Configuration(SEED).to_text())
    traces, stats = [], []
    for k in range(3):
        _run(["play", "bundled:trapezoid_axes.cst", "--adversary", "pullback:3/5,0", "--target", "(0, 0)",
              "--max-moves", "60", "--trace", f"t{k}.trace"], tmp_path, k)
        _run(["closure", "seed.cfg", "--depth", "5", "--ops", "join,meet", "--stats", f"s{k}.csv",
              "--output", f"c{k}.cfg"], tmp_path, 100 + k)
        traces.append((tmp_path / f"t{k}.trace").read_bytes())
        stats.append((tmp_path / f"s{k}.csv").read_bytes() + (tmp_path / f"c{k}.cfg").read_bytes())
    ok = len(set(traces)) == 1 and len(set(stats)) == 1 and traces[0] and stats[0]
    report(acceptance_log, 11, bool(ok),
           f"3 runs each (different hash seeds): {len(set(traces))} distinct trace files, "
           f"{len(set(stats))} distinct closure outputs")
