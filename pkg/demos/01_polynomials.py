"""
Polynomials in monomial and Chebyshev bases
===========================================

Every polynomial carries its basis.  Arithmetic stays in that basis, and
conversion tables are exact rationals, so degree-100 conversions are lossless
when asked for exactly.
"""

# %%
import numpy as np

from sosvol.poly import CHEBYSHEV, MONOMIAL, Polynomial, graded_basis, to_basis

x1, x2 = Polynomial.variable(2, 0), Polynomial.variable(2, 1)
g = 0.25 - x1 * x1 - x2 * x2  # the disk of radius 1/2
print(g)
print("g(0, 0) =", g((0.0, 0.0)))

# %%
# Graded order: degree first, then lexicographically decreasing exponents.
print(graded_basis(2, 2))

# %%
# T_1 * T_1 = (T_0 + T_2) / 2 in the Chebyshev basis.
t1 = Polynomial.variable(1, 0, CHEBYSHEV)
print(t1 * t1)

# x^2 = (T_0 + T_2) / 2 as well, seen from the monomial side.
print(to_basis(Polynomial.from_terms(1, {(2,): 1.0}), CHEBYSHEV))

# %%
# Monomial coefficients of high-degree Chebyshev polynomials are huge and
# alternate in sign, which is why the hierarchy prefers Chebyshev in 1-D.
t40 = Polynomial.from_terms(1, {(40,): 1.0}, CHEBYSHEV)
mono = to_basis(t40, MONOMIAL)
print("largest monomial coefficient of T_40: %.3e" % np.max(np.abs(mono.coeffs)))

# Exact conversion round-trips bit for bit even at degree 100.
rng = np.random.default_rng(0)
p = Polynomial(1, rng.standard_normal(101))
back = to_basis(to_basis(p, CHEBYSHEV, exact=True), MONOMIAL, exact=True)
print("exact round trip identical:", [float(c) for c in back.coeffs] == list(p.coeffs))
