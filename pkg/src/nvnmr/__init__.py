"""Simulation of single-molecule NMR detection through a shallow NV centre.

Subpackage map:

- ``quantum``: dense operator algebra, density matrices, Lindblad evolution
- ``system``: constants, spin sites, built-in molecular geometries
- ``hamiltonian``: couplings, drives, frame-dependent Hamiltonian assembly
- ``dynamics``: pulse sequences and NV readout signals
- ``spectroscopy``: drive-frequency sweeps and peak extraction
- ``detection``: shot-noise detectability and acquisition-time optimization
- ``config`` / ``cli``: YAML scene description and the command-line runner
"""

__version__ = "0.1.0"

from . import (  # noqa: F401
    cli,
    config,
    detection,
    dynamics,
    hamiltonian,
    quantum,
    spectroscopy,
    system,
)
