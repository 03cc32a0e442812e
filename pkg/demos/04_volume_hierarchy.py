"""
Upper bounds on a volume
========================

At degree d the hierarchy minimizes the integral over X of a polynomial p
with p - 1 certified nonnegative on K and p certified nonnegative on X.  The
optimal values decrease towards vol K.  Every level is re-checked: the Gram
matrices must reproduce p coefficientwise.
"""

# %%
import math

from sosvol import hierarchy
from sosvol.poly import CHEBYSHEV, Polynomial
from sosvol.semialg import Ball, Box, SemialgebraicSet

x = Polynomial.variable(1, 0)
K = SemialgebraicSet(1, [0.25 - x * x])  # [-1/2, 1/2], volume 1
X = Box([1.0])
seq = hierarchy.run(K, X, 2, 20, reference_volume=1.0)
for lv in seq.levels:
    note = " (solved in Chebyshev basis after a monomial stall)" if lv.retried else ""
    print("d=%2d  v_d=%.8f  certificate residual %.1e%s" % (lv.d, lv.v_d, lv.cert_residual, note))
print("monotone:", seq.is_monotone(), " above vol K:", seq.above_reference())

# %%
# The Chebyshev basis keeps the problem well conditioned up to degree 100.
lv = hierarchy.solve_level(K, X, 100, CHEBYSHEV)
print("d=100: %s, v_100 = %.6f, %.2f s" % (lv.status, lv.v_d, lv.seconds))

# %%
# The same in two dimensions: a disk of radius 1/2 inside the unit disk.
disk = SemialgebraicSet(2, [Polynomial.ball(2, 0.5)])
seq = hierarchy.run(disk, Ball(2), 2, 10, reference_volume=math.pi / 4)
print([round(v, 5) for v in seq.values], "vs pi/4 = %.5f" % (math.pi / 4))
