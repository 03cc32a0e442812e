"""
Closed-form degree bounds and empirical rates
=============================================

The worst-case guarantee is doubly exponential in 1/eps and is evaluated in
the log domain.  Observed sequences are far kinder; `rate_fit` compares
power-law, 1/log d and 1/log log d models on them.
"""

# %%
from sosvol import approx, hierarchy
from sosvol.poly import CHEBYSHEV, Polynomial
from sosvol.semialg import Box, SemialgebraicSet

for eps in (2.0, 1.0, 0.5, 0.25):
    b = approx.eval_degree_bound(approx.DegreeBoundInputs(eps, c1=1, c2=1, c_G=1, r=2, n=1))
    print("eps=%-5g log10(degree) = %.4g" % (eps, b.log10))

# %%
x = Polynomial.variable(1, 0)
K, X = SemialgebraicSet(1, [0.25 - x * x]), Box([1.0])
seq = hierarchy.run(K, X, 4, 60, step=4, basis=CHEBYSHEV)
print(approx.format_rate_report(approx.rate_fit(seq, vol_ref=1.0), 1.0))
