"""Which density makes the Phi_lambda transform an isometry?

Compares 4 sinh(pi b l) sinh(pi l/b) with 4 sinh(2 pi b l) sinh(2 pi l/b)
for three Gaussians (about three minutes).

Run with ``python3 demos/isometry_measure.py``.
"""
from qgv import analytic_engine as ae

spec = ae.TransformSpec(n_lam=401)
for a, c, s in ((1.0, 0.1, 0.2), (0.5, -0.3, 0.0), (2.0, 0.4, -0.5)):
    reps = {r.check_id: r for r in ae.isometry_check(ae.gaussian(a, c, s), spec)}
    lit = reps["isometry.norm_ratio"].details["ratio"]
    dbl = reps["isometry.norm_ratio.doubled_measure"].details["ratio"]
    print(f"f = exp(-pi {a} (u - {c})^2 + {s} u):  printed {lit:.6f}   doubled {dbl:.10f}")
