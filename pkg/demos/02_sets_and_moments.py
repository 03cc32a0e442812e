"""
Sets, standing checks and Lebesgue moments
==========================================

K is the set whose volume we bound; X is a box or ball containing it.  Before
any optimization the origin must be interior to K and K must sit inside X and
the unit ball.  Moments of X are closed-form.
"""

# %%
import math

from sosvol import montecarlo
from sosvol.poly import Polynomial
from sosvol.semialg import Ball, SemialgebraicSet, certify_assumptions, lebesgue_moment

K = SemialgebraicSet(2, [Polynomial.ball(2, 0.5)])
X = Ball(2)
geo = certify_assumptions(K, X)
print("interior margin:", geo.interior_margin)
print("largest inscribed box half-width s* = %.5f (exact 0.5/sqrt 2 = %.5f)" % (geo.inner_box_half_width, 0.5 / math.sqrt(2)))
print("r = 1/s* = %.4f" % geo.r)

# %%
# The unit-ball constraint is appended once when missing.
print(len(K.inequalities), "->", len(K.normalized().inequalities))

# %%
# Closed-form ball moment versus a Monte Carlo estimate.
pts = montecarlo.sample(X, 1_000_000, seed=1)
mc = X.volume * (pts[:, 0] ** 2).mean()
print("int_B2 x1^2: closed form %.6f, Monte Carlo %.6f" % (lebesgue_moment(X, (2, 0)), mc))
