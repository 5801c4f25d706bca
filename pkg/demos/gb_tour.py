"""A short tour of the double sine evaluator.

Run with ``python3 demos/gb_tour.py``.
"""
import cmath

import mpmath

from qgv import analytic_engine as ae
from qgv.special_functions import gb_eval, mp_new

mp = mp_new(0.75)
print(f"b = {float(mp.b)}, Q = {float(mp.Q):.12f}")

with mpmath.workprec(192):
    for z in (0.5, 1.0 + 0.3j, -0.4 + 1.2j):
        g = gb_eval(mp, mpmath.mpc(z)).value
        print(f"G_b({z}) = {mpmath.nstr(g, 25)}")

    # shift by b multiplies by (1 - e^{2 pi i b z})
    z = mpmath.mpc(0.3, 0.2)
    lhs = gb_eval(mp, z + mp.b).value
    rhs = (1 - mpmath.exp(2j * mpmath.pi * mp.b * z)) * gb_eval(mp, z).value
    print("shift residual:", mpmath.nstr(abs(lhs / rhs - 1), 5))

reps, ph = ae.inversion_constant_check(mp)
c = complex(reps[0].details["constant"])
print(f"g_b(x) g_b(1/x) e^(-i log^2 x / (4 pi b^2)) = {c:.15f}  ->  {ph}")
print("exp(pi i (b^2 + b^-2)/12) =", cmath.exp(1j * cmath.pi * (0.75 ** 2 + 0.75 ** -2) / 12))
