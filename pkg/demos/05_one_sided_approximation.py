"""
How fast can the bounds converge?
=================================

The hierarchy gap at degree d is at least the error e(d) of the best
polynomial upper approximation of the indicator of K in L1(X).  e(d) is an LP;
for an interval it decays like c/d.  Its speed is governed by how much volume
lies near the boundary of K, which we estimate with tubes.
"""

# %%
import math

from sosvol import approx, hierarchy
from sosvol.poly import Polynomial
from sosvol.semialg import Ball, Box, SemialgebraicSet

x = Polynomial.variable(1, 0)
K, X = SemialgebraicSet(1, [0.25 - x * x]), Box([1.0])
for d in (4, 8, 16, 32, 64):
    a = approx.best_upper_L1(K, X, d, vol_ref=1.0)
    print("d=%2d  e(d)=%.5f  d*e(d)=%.3f  max p=%.3f" % (d, a.e_d, d * a.e_d, a.sup_norm))

# %%
# The SOS feasible set is smaller than the LP one, so v_d - vol K >= e(d).
for d in (4, 8):
    v = hierarchy.solve_level(K, X, d).v_d
    print("d=%d: v_d - 1 = %.8f >= e(d) = %.8f" % (d, v - 1, approx.best_upper_L1(K, X, d, vol_ref=1.0).e_d))

# %%
# Tubes around the boundary circle of the disk grow linearly in t.
disk = SemialgebraicSet(2, [Polynomial.ball(2, 0.5)])
cloud = approx.boundary_cloud(disk, Ball(2))
for t in (0.05, 0.1):
    tube = approx.tube_volume(disk, Ball(2), t, cloud=cloud)
    mod = approx.avg_modulus(disk, Ball(2), t, 50_000, 32, cloud=cloud)
    print("t=%.2f  tube %.4f +- %.4f  (2 pi t = %.4f)  averaged modulus %.4f" % (
        t, tube.value, tube.std_error, 2 * math.pi * t, mod.omega_bar))
