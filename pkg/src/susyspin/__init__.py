"""Supersymmetric quantum mechanics of a spin-1/2 particle on a line.

The particle moves in a magnetic field rotating in the x-y plane with pitch
``k`` and strength ``b0``, optionally with a superpotential ``W(z)``.
Closed-form bands, zero modes and breaking conditions live in
:mod:`susyspin.analytic`; :mod:`susyspin.operators` and
:mod:`susyspin.solver` discretize the partner Hamiltonians and diagonalize
them; :mod:`susyspin.susylab` combines both into phase diagnostics.
"""

__version__ = "0.1.0"

from .qmcore import (  # noqa: E402
    Boundary, DecayRate, FieldConfig, Grid, ModelError, ModelSpec, Sector, SpinorField,
    TabulatedW, TanhW, ZeroW, make_spin_operators, validate_model,
)
from .analytic import (  # noqa: E402
    SusyPhase, decay_rate, dispersion, susy_phase_asymptotic, susy_phase_free,
    tanh_ground_state, zero_mode_spinor, zero_mode_wavevector,
)
from .susylab import NumericSettings, classify  # noqa: E402
