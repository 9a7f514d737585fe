# Bob answers with preimages of rational points under a circle-preserving
# map T.  Every deterministic step then commutes with T, so T(center),
# which is not rational-reachable from his answers, never shows up.
from fractions import Fraction
from importlib import resources

from constructibility import lab, lang

scripts = resources.files("constructibility").joinpath("scripts")

for name in ["diameter_chord", "trapezoid_axes", "polar_pole"]:
    script = lang.parse(scripts.joinpath(name + ".cst").read_text())
    rep = lab.defeat_strategy(script, Fraction(3, 5), 0, max_moves=200)
    print("==", name)
    print(rep.to_text())

# The adversary blocks the center, not everything: a forced point on the
# circle is a perfectly good target.
force = lang.parse(scripts.joinpath("force_on_circle.cst").read_text())
first = lab.defeat_strategy(force, Fraction(3, 5), 0, max_moves=20)
on_circle = first.trace.final[first.trace.outputs[0]]
again = lab.defeat_strategy(force, Fraction(3, 5), 0, max_moves=20, target=on_circle)
print("forced point", on_circle.to_str(), "as target ->", again.trace.outcome)
