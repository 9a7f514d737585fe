# Parallelism and betweenness are not projective notions.  Run the same
# script on a figure and on its H(3/5) image and report the first test
# that answers differently.
from fractions import Fraction
from importlib import resources

from constructibility import lab, lang
from constructibility import projective as pj
from constructibility.closure import Configuration
from constructibility.game import rational_adversary

scripts = resources.files("constructibility").joinpath("scripts")
H = pj.hyperbolic_map(Fraction(3, 5))

for name, cfg in [("parallel_flip", "parallel_flip"), ("between_flip", "between_flip"),
                  ("between_flip", "between_control")]:
    script = lang.parse(scripts.joinpath(name + ".cst").read_text())
    initial = Configuration.from_text(scripts.joinpath(cfg + ".cfg").read_text())
    res = lab.find_test_divergence(script, H, rational_adversary(), initial)
    print(f"== {name} on {cfg}.cfg")
    print(res.to_text())
    if isinstance(res, lab.Divergence):
        print("re-verified exactly:", res.reverify())
        print()
