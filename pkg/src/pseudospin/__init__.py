"""Pseudospin decomposition and dynamics of N identical qubits in one cavity mode.

The collective qubit space splits into spin-j multiplets; each multiplet with
a fixed excitation number gives a small tridiagonal block.  Submodules:

- :mod:`pseudospin.linalg`: Hermitian eigensolver, propagators, Kronecker helpers
- :mod:`pseudospin.symmetry`: multiplet counts, collective operators, symmetry basis
- :mod:`pseudospin.blocks`: block Hamiltonians, splittings, closed-form propagators
- :mod:`pseudospin.dynamics`: population time series, full-space oracle
- :mod:`pseudospin.gates`: conditional phase circuits that switch multiplets
- :mod:`pseudospin.decay`: single-qubit decay and its recovery protocol
- :mod:`pseudospin.dephasing`: pure dephasing in the doubled space
"""

from .blocks import (SystemParams, asymptotic_report, block_hamiltonian, numeric_splittings,
                     parity_recursion_check, propagator_closed_form_3half, propagator_numeric,
                     rabi_splittings)
from .decay import decay_recovery_protocol, decay_spectroscopy
from .dephasing import (DephasingParams, char_poly_roots, closed_form_propagator,
                        dephasing_generator, dephasing_steady_state, evolve_doubled)
from .dynamics import InitialState, TimeSeries, full_space_evolve, population_000, populations_block
from .errors import (DimensionError, DomainError, PseudospinError, ResourceError, ShapeError,
                     SwitchSearchError, UnsupportedParameterError)
from .gates import (Circuit, ConditionalPhaseGate, dft_switch_k1, fixture_circuit, kernel_dimension,
                    solve_switch, switch_protocol)
from .linalg import eig_hermitian, expm_i, kron
from .symmetry import (SymmetryBasis, abundance, block_diagonalize, build_symmetry_basis,
                       collective_operators, interaction_hamiltonian, multiplet_table)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
