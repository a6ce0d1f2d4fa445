"""Quantum light from energy-modulated free electrons coupled to one optical mode."""

from .electron import (ElectronPulse, IELSStage, ModulationSpectrum, PreFilter,
                       coherence_factor, coherence_factor_closed_drift,
                       electron_wigner, iels_modulate, prefilter_cf,
                       projected_coherence_factor)
from .emission import (CatClosedForm, EmissionStats, ExactFilter, FilterOutcome,
                       NoFilter, WindowFilter, cat_closed_form, emission_stats,
                       emit_exact, emit_no_filter, emit_single_window,
                       expectation_field, single_electron_state)
from .errors import (EmptyPreFilterError, EmptySelectionError, FelightError,
                     ResolutionError, TruncationError, UnphysicalInputError)
from .fock import (Cat, Custom, PhotonicState, SqueezedVacuum, TriangularCat,
                   WignerGrid, coherent_amplitude, default_n_max, expectation,
                   fidelity, purity, target_factory, trace_distance, wigner)
from .synthesis import (RingProfile, SynthesisProblem, SynthesisResult,
                        objective, optimize, ring_coefficients)

__version__ = "0.1.0"
