# A construction that "finds" the center only because Bob was helpful.
# Play the diameter-chord script against the rational Bob, then push the
# whole figure through H(3/5): every step still checks out, but the
# output lands on (3/5, 0).
from fractions import Fraction
from importlib import resources

from constructibility import lab, lang
from constructibility import projective as pj
from constructibility.closure import Configuration
from constructibility.game import play, rational_adversary

src = resources.files("constructibility").joinpath("scripts", "diameter_chord.cst").read_text()
script = lang.parse(src)
circle = Configuration([pj.unit_circle()])

trace = play(script, rational_adversary(), circle, target=pj.point(0, 0))
print("outcome against the rational Bob:", trace.outcome, "after", len(trace.moves), "move(s)")
print("his first answer:", trace.final[trace.moves[0].response[0]].to_str())

H = pj.hyperbolic_map(Fraction(3, 5))
rep = lab.transform_trace(trace, H)
print()
print(rep.to_text())
last = rep.trace.final[rep.trace.moves[-1].response[-1]]
print("image of the 'center':", last.to_str(), "-> affine", [c.to_str() for c in last.affine()])
print("unit circle still there:", rep.trace.final[0] == pj.unit_circle())
