"""Non-compact quantum dilogarithm, q-Weyl operator calculus and positive representations of U_q(sl2), U_q(sl3)."""

__version__ = "0.1.0"
