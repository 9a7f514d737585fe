# How fast straightedge closures grow from four generic points, how deep a
# best-first probe has to go to land near (1/3, 1/7), and how many steps a
# midpoint takes in the rational plane.
from fractions import Fraction

from constructibility import lab
from constructibility import projective as pj
from constructibility.closure import Configuration, OpSet, closure_to_depth, density_probe, stats_csv

seed = [pj.point(0, 0), pj.point(1, 0), pj.point(0, 1), pj.point(2, 3)]

cfg, stats = closure_to_depth(Configuration(seed), 6, OpSet.joins_meets())
print(stats_csv(stats))

res = density_probe(Configuration(seed), pj.point(Fraction(1, 3), Fraction(1, 7)), Fraction(1, 1000))
print("probe:", res.witness.to_str(), "depth", res.depth, f"({res.method}, {res.explored} objects)")

# the circle alone gives a straightedge nothing to work with
lonely, _ = closure_to_depth(Configuration([pj.unit_circle()]), 5, OpSet.straightedge())
print("circle alone after 5 rounds:", len(lonely), "object")

print()
print(lab.rational_plane_derivability(seed, pj.point(Fraction(1, 2), 0)).to_text())

square = [pj.point(0, 0), pj.point(1, 0), pj.point(0, 1), pj.point(1, 1)]
print("square, center:", lab.rational_plane_derivability(square, pj.point(Fraction(1, 2), Fraction(1, 2))).to_text().strip().splitlines()[0])
print("square, (1/2, 0):", lab.rational_plane_derivability(square, pj.point(Fraction(1, 2), 0)).to_text().strip())
