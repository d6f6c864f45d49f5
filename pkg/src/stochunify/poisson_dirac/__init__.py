"""Telegraph process, checkerboard lattice and the relativistic wave equations it continues to."""

from .checkerboard import CheckerboardLattice, checkerboard_propagate, mixing_matrix, path_sum
from .dirac import (
    DiracSpectral,
    WeylSpinor,
    checkerboard_vs_dirac,
    dirac_evolve,
    dirac_frequency,
    dirac_spectral_step,
    lattice_from_weyl,
    weyl_from_lattice,
    weyl_hamiltonian,
)
from .rs_photon import (
    RSDiracState,
    beta_matrix,
    default_rs_packet,
    helicity_sigma,
    massless_limit_study,
    rs_dirac_step,
    rs_hamiltonian,
)
from .telegraph import (
    TelegraphState,
    WalkerSample,
    coarse_l1,
    flip_relaxation,
    telegraph_evolve,
    telegraph_monte_carlo,
    telegraph_pde_step,
)
