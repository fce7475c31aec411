"""Three-cavity, two-resonator optomechanical transmission model.

Steady state, linearized probe response, port transmissions, a time-domain
oracle and parameter sweeps.  All rates are angular frequencies.
"""

from .model import (
    BranchPolicy,
    Convention,
    SystemParams,
    UnitMode,
    coupling_from_geometry,
    get_value,
    make_params,
    normalize_units,
    set_value,
    swap_ports,
    validate_params,
)
from .presets import PRESETS, get_preset, list_presets
from .response import (
    SingularResponseError,
    Spectrum,
    TransmissionPoint,
    closed_form_delta_a,
    solve_fluctuation_system,
    spectrum,
    spectrum_arrays,
    transmission_point,
)
from .steady_state import SteadyStateError, bare_from_effective, solve_intensity_cubic, steady_state
from .sweep import SweepAxis, SweepGrid, find_peaks, sweep_1d, sweep_2d

__version__ = "0.1.0"

__all__ = [
    "BranchPolicy",
    "Convention",
    "PRESETS",
    "SingularResponseError",
    "Spectrum",
    "SteadyStateError",
    "SweepAxis",
    "SweepGrid",
    "SystemParams",
    "TransmissionPoint",
    "UnitMode",
    "bare_from_effective",
    "closed_form_delta_a",
    "coupling_from_geometry",
    "find_peaks",
    "get_preset",
    "get_value",
    "list_presets",
    "make_params",
    "normalize_units",
    "set_value",
    "solve_fluctuation_system",
    "solve_intensity_cubic",
    "spectrum",
    "spectrum_arrays",
    "steady_state",
    "swap_ports",
    "sweep_1d",
    "sweep_2d",
    "transmission_point",
    "validate_params",
]
