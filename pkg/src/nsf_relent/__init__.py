"""1-D compressible Navier-Stokes-Fourier toolkit with relative entropy diagnostics.

The package couples a finite-difference method-of-lines solver for a viscous,
heat-conducting compressible gas (with thermal radiation terms) to manufactured
smooth reference solutions, and measures the distance between the two
trajectories with the relative entropy generated by the ballistic free energy.
The headline experiment: that distance obeys an exponential Gronwall bound and
vanishes with the initial distance, so the numerical trajectory started on the
smooth solution stays on it to discretization accuracy.
"""

__version__ = "0.1.0"

from .structural import DefaultFamily, StructuralFamily, make_family
from .thermo import (
    EssResBands,
    GasModel,
    ThermoEval,
    ballistic_free_energy,
    entropy,
    eval_structural_P,
    internal_energy,
    pressure,
    relative_entropy,
    temperature_from_internal_energy,
    thermo_eval,
    transport,
)
from .audit import AuditReport, stability_audit
from .reference import ReferenceSolution, WaveMode, eval_reference, mms_sources
from .solver1d import (
    FieldState,
    Grid1D,
    PrimitiveFields,
    advance,
    budget_residuals,
    recover_primitives,
    simulate,
    spatial_rhs,
)
from .relent import (
    GronwallFit,
    RelEntReport,
    bands_from_reference,
    d8_ledger,
    distance,
    ess_res_mask,
    gronwall_fit,
)

__all__ = [
    "__version__",
    "DefaultFamily",
    "StructuralFamily",
    "make_family",
    "GasModel",
    "ThermoEval",
    "EssResBands",
    "eval_structural_P",
    "pressure",
    "internal_energy",
    "entropy",
    "thermo_eval",
    "ballistic_free_energy",
    "relative_entropy",
    "temperature_from_internal_energy",
    "transport",
    "AuditReport",
    "stability_audit",
    "ReferenceSolution",
    "WaveMode",
    "eval_reference",
    "mms_sources",
    "Grid1D",
    "FieldState",
    "PrimitiveFields",
    "spatial_rhs",
    "advance",
    "recover_primitives",
    "simulate",
    "budget_residuals",
    "RelEntReport",
    "GronwallFit",
    "bands_from_reference",
    "ess_res_mask",
    "distance",
    "d8_ledger",
    "gronwall_fit",
]
