"""Second-microlocal calculus on the flat torus: exact spectral quantization,
h-sweep order regression, wavefront estimators and integrable models."""
from .errors import *  # noqa: F401,F403
from .grid import (FourierCoefficients, Grid, GridFunction, SparseModeFunction, fourier, l2_norm,
                   make_mode, random_field)
from .symbols import (LocalizerSpec, Symbol, SymbolOrder, blowup_coords, make_bump_symbol,
                      make_localizer, moyal_expand, poisson_bracket, principal_symbol_at,
                      subprincipal_of)
from .quantize import (OperatorRep, QuantizationKind, adjoint, apply, operator_norm, quantize,
                       recover_symbol)
from .calculus import HSweep, RegressionResult, commutator, convert_quantization, order_regression
from .microlocal import (RegularityProfile, SemiclassicalFamily, WavefrontReport,
                         iterated_regularity_profile, wf2_scan, wf_decay_order)
from .integrable import (ActionAngleModel, IsoenergeticMatrix, SNPoint, flat_hamiltonian, flat_model,
                         h1_flow, h2_flow, isoenergetic, linear_model, modulate_to_zero_section,
                         orbit_closure, uk_quasimode, wkb_state)

__version__ = "0.1.0"
