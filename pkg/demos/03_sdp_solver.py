"""
The interior-point SDP solver
=============================

Problems read: maximize b.y subject to C - sum y_j A_j PSD.  The solver
reports a status, and `residuals` recomputes feasibility and gap from scratch
so that no number is taken on trust.
"""

# %%
import numpy as np

from sosvol.sdp import SdpProblem, residuals, solve

# maximize y subject to [[1, y], [y, 1]] PSD: the optimum is y = 1.
P = SdpProblem([2], np.array([1.0]), [np.eye(2)], [np.array([[[0.0, -1.0], [-1.0, 0.0]]])])
sol = solve(P)
print(sol.status, sol.y, "iterations:", sol.iterations)
print(residuals(P, sol))

# %%
# Convergence trace: the complementarity gap shrinks every iteration.
for row in sol.trace:
    print("%2d  gap %.2e  pinf %.1e  dinf %.1e" % (row["iter"], row["gap"], row["pinf"], row["dinf"]))

# %%
# Blocks with negative size are diagonal, so a linear program is a special case.
A = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
lp = SdpProblem([-3], np.array([1.0, 1.0]), [np.array([1.0, 2.0, 4.0])], [A])
print("LP optimum:", solve(lp).y)
