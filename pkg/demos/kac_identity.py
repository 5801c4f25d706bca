"""The sl2 Kac identity at one point, on a coarse grid (about a minute).

The right-hand side comes out as exactly 1/b times the left-hand side, so
the identity holds with the measure b d tau.

Run with ``python3 demos/kac_identity.py``.
"""
from qgv import analytic_engine as ae

spec = ae.KacCheckSpec(0.3, 0.5, 0.4, h=0.2, half_width=5.0)
res = ae.kac_evaluate(spec)
print("LHS              ", res.lhs)
print("RHS (residue)    ", res.rhs_residue_split)
print("RHS (detour)     ", res.rhs_detour)
print("RHS (line only)  ", res.rhs_line_only)
print("RHS / LHS        ", res.ratio, " 1/b =", 1 / spec.b)
print("deviation with b d tau:", res.deviation(spec.b))
