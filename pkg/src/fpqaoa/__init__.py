"""Fixed-parameter QAOA: exact simulation, training, and shots-to-solution benchmarks."""

__version__ = "0.1.0"

from .encoding import AngleSchedule, FourierParams, decode, decode_sincos
from .qubo import (Ensemble, EnsembleSpec, FeasibleSet, NormKind, QuboInstance, Spectrum,
                   compute_spectrum, cost_evaluate, feasible_set, generate_mixed,
                   generate_normal)
from .normalization import norm_value, rescale
from .simulator import (EvalRecord, apply_cost_phase, apply_mixer, ar_expectation,
                        energy_expectation, prepare_plus, run_qaoa, success_probability)

__all__ = [
    "AngleSchedule", "FourierParams", "decode", "decode_sincos",
    "Ensemble", "EnsembleSpec", "FeasibleSet", "NormKind", "QuboInstance", "Spectrum",
    "compute_spectrum", "cost_evaluate", "feasible_set", "generate_mixed", "generate_normal",
    "norm_value", "rescale",
    "EvalRecord", "apply_cost_phase", "apply_mixer", "ar_expectation", "energy_expectation",
    "prepare_plus", "run_qaoa", "success_probability",
]
