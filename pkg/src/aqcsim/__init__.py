"""Matrix-free adiabatic sweeps of transverse-field spin lattices."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    GridParams,
    Hamiltonian,
    PauliTerm,
    XYParams,
    apply,
    build_ising_grid,
    build_xy_chain,
    split_driver_problem,
    to_dense,
)
from .schedules import Schedule, coefficients, lambda_of_s  # noqa: E402
from .states import (  # noqa: E402
    energy_expectation,
    fidelity,
    make_ferromagnet,
    make_ghz,
    make_ghz_2d,
    make_paramagnetic,
    single_site_entropy,
)
from .spectral import SpectrumSlice, gaps, lowest_eigenvalues  # noqa: E402
from .evolution import EvolutionParams, EvolutionTrace, evolve, evolve_roundtrip  # noqa: E402
