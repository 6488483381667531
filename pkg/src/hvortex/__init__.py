"""Numerical laboratory for equivariant Ginzburg-Landau vortices on the
hyperbolic plane and their Schroedinger-type perturbation dynamics.

The pieces, roughly in dependency order:

- grid: cell-centered radial grids with the sinh-weighted calculus.
- vortex: self-dual profiles (Q, A_theta) by matched two-sided shooting.
- linops: the first-order factorization operators, their adjoints, and
  the second-order Hamiltonians built from them.
- spectra: spectral-gap and threshold-resonance certification, plus the
  half-line fundamental system and Green kernel.
- gauge: the nonlocal gauge potentials and the Darboux transform in
  both directions.
- evolve: Crank-Nicolson time stepping in three equivalent
  formulations, with conservation and stability diagnostics.
- lemmas: randomized verification of the spatial-norm inequalities.
- verify: the end-to-end pass/fail suite; cli: the vortexctl driver.
"""

__version__ = "0.1.0"

from .grid import (
    RadialGrid,
    ComplexRadialField,
    lp_norm,
    h1m_norm,
    inner_sh,
)
from .vortex import VortexProfile, solve_profile, profile_asymptotics
from .linops import PotentialTable, OperatorHandle
from .spectra import (
    SpectralReport,
    FundamentalSystem,
    gap_eigenvalues_RQ,
    resonance_test_RQ,
    fundamental_system_H,
    green_solve_H,
    fundamental_asymptotics,
)
from .gauge import (
    GaugeState,
    ReconstructionResult,
    compute_a_theta,
    compute_A0,
    darboux_forward,
    reconstruct_epsilon,
)
from .evolve import (
    EvolutionConfig,
    EvolutionTrace,
    evolve,
    evolve_pair,
    gaussian_bump_data,
    run_stability_experiment,
    conservation_refinement_study,
    total_mass,
    total_energy,
)
from .lemmas import InequalityCase, run_lemma_suite
from .verify import VerifyParams, CheckResult, run_all

__all__ = [
    "__version__",
    "RadialGrid",
    "ComplexRadialField",
    "lp_norm",
    "h1m_norm",
    "inner_sh",
    "VortexProfile",
    "solve_profile",
    "profile_asymptotics",
    "PotentialTable",
    "OperatorHandle",
    "SpectralReport",
    "FundamentalSystem",
    "gap_eigenvalues_RQ",
    "resonance_test_RQ",
    "fundamental_system_H",
    "green_solve_H",
    "fundamental_asymptotics",
    "GaugeState",
    "ReconstructionResult",
    "compute_a_theta",
    "compute_A0",
    "darboux_forward",
    "reconstruct_epsilon",
    "EvolutionConfig",
    "EvolutionTrace",
    "evolve",
    "evolve_pair",
    "gaussian_bump_data",
    "run_stability_experiment",
    "conservation_refinement_study",
    "total_mass",
    "total_energy",
    "InequalityCase",
    "run_lemma_suite",
    "VerifyParams",
    "CheckResult",
    "run_all",
]
