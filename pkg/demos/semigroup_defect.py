"""How far two AB integrals of order 1/3 are from one of order 2/3."""

from mlkcalc import SemigroupCase, semigroup_defect, semigroup_sides

iterated, direct = semigroup_sides(SemigroupCase(1 / 3, 1 / 3))
fmt = lambda ps: " + ".join(f"{c:.10f} t^{e:.4f}" for c, e in ps.terms)
print("iterated:", fmt(iterated))
print("direct:  ", fmt(direct))
print("defect:  ", fmt(semigroup_defect(SemigroupCase(1 / 3, 1 / 3))))
