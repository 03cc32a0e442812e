"""Upper bounds on the volume of a semialgebraic set by the moment-SOS hierarchy.

Modules:

* ``poly``: dense multivariate polynomials in monomial or Chebyshev bases.
* ``semialg``: the sets K and X, standing-assumption checks, Lebesgue moments.
* ``sdp``: a dense primal-dual interior-point solver for block SDPs.
* ``hierarchy``: assembly, solution and certificate checking of each level.
* ``approx``: one-sided L1 approximation, modulus and tube estimates, degree
  bounds and rate fitting.
* ``montecarlo``: seeded sampling and reference volumes.
* ``cli``: the ``sosvol`` command.
"""
from .approx import (
    DegreeBoundInputs,
    ModulusEstimate,
    OneSidedApprox,
    RateFit,
    avg_modulus,
    best_upper_L1,
    eval_degree_bound,
    gibbs_probe,
    k_factor,
    nie_bound,
    rate_fit,
    tube_volume,
)
from .hierarchy import HierarchySequence, LevelResult, assemble, certify, run, solve_level
from .montecarlo import VolumeEstimate, sample, volume
from .poly import CHEBYSHEV, MONOMIAL, Polynomial, to_basis
from .sdp import SdpProblem, SdpSolution, SolverOptions, residuals, solve
from .semialg import Ball, Box, SemialgebraicSet, certify_assumptions, integrate, membership

__version__ = "0.1.0"

__all__ = [
    "Ball", "Box", "CHEBYSHEV", "DegreeBoundInputs", "HierarchySequence", "LevelResult",
    "MONOMIAL", "ModulusEstimate", "OneSidedApprox", "Polynomial", "RateFit", "SdpProblem",
    "SdpSolution", "SemialgebraicSet", "SolverOptions", "VolumeEstimate", "assemble",
    "avg_modulus", "best_upper_L1", "certify", "certify_assumptions", "eval_degree_bound",
    "gibbs_probe", "integrate", "k_factor", "membership", "nie_bound", "rate_fit", "residuals",
    "run", "sample", "solve", "solve_level", "to_basis", "tube_volume", "volume",
]
