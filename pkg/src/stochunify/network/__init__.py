"""Helicity dynamics on spin networks, foam amplitudes and vertex matter."""

from .dynamics import (
    ConstraintReport,
    EdgeAmplitudes,
    TransportResult,
    chain_vs_checkerboard,
    continued_step,
    equilibrium_residual,
    evolve,
    exact_equilibrium_residual,
    fit_relaxation_rate,
    flip_closed_form,
    master_step,
    transport_term,
    write_constraint_report,
    write_time_series,
)
from .foam import Face, FoamSpec, FoamVertex, foam_amplitude, load_foam, random_foam
from .graph import Edge, SpinNetwork, chain_network, load_network, save_network
from .matter import MatterLayer, matter_source
