"""Exact state-vector QAOA with the X mixer.

A state is a plain ``complex128`` array of length ``2**n``, indexed by
bitstring (qubit 1 = least significant bit). Layer kernels mutate the array
in place and also return it.
"""

from dataclasses import asdict, dataclass

import numpy as np

from . import _kernels
from .qubo import ENUMERATION_LIMIT, EnumerationLimitError, QuboError


def _n_of(state):
    dim = state.shape[-1]
    n = dim.bit_length() - 1
    if dim != 1 << n or n < 1:
        raise QuboError(f"state length {dim} is not a power of two >= 2")
    return n


def prepare_plus(n, limit=ENUMERATION_LIMIT):
    """Uniform superposition ``|+>^n``."""
    if n < 1:
        raise QuboError("n must be >= 1")
    if n > limit:
        raise EnumerationLimitError(f"n={n} exceeds the state-vector limit {limit}")
    return np.full(1 << n, 2.0 ** (-n / 2), dtype=np.complex128)


def _costs(spectrum, state):
    costs = spectrum.costs if hasattr(spectrum, "costs") else np.asarray(spectrum, dtype=np.float64)
    if costs.shape[-1] != state.shape[-1]:
        raise QuboError(f"state has {state.shape[-1]} amplitudes, spectrum has {costs.shape[-1]}")
    return costs


def apply_cost_phase(state, spectrum, gamma, backend=None):
    """Multiply amplitude ``z`` by ``exp(-i gamma C(z))``."""
    _n_of(state)
    return _kernels.get_backend(backend).apply_phase(state, _costs(spectrum, state), gamma)


def apply_mixer(state, beta, backend=None):
    """Apply ``exp(-i beta X)`` to every qubit, one butterfly pass per qubit."""
    return _kernels.get_backend(backend).apply_mixer(state, beta, _n_of(state))


def run_qaoa(instance, spectrum, schedule, backend=None, norm_log=None):
    """Prepare ``|+>^n`` and apply the ``p`` alternating layers of ``schedule``.

    If ``norm_log`` is a list, the largest post-layer deviation of the squared
    norm from 1 is appended to it.
    """
    if len(spectrum.costs) != 1 << instance.n:
        raise QuboError("spectrum size does not match instance")
    state = prepare_plus(instance.n)
    worst = _kernels.get_backend(backend).evolve(
        state, spectrum.costs, schedule.gamma, schedule.beta, instance.n)
    if norm_log is not None:
        norm_log.append(float(worst))
    return state


def probabilities(state):
    return state.real**2 + state.imag**2


def success_probability(state, fs):
    """Probability mass on the feasible set; exactly 1 for a degenerate spectrum."""
    if fs.mask.shape != state.shape:
        raise QuboError("feasible set size does not match state")
    if fs.trivial:
        return 1.0
    return float(np.sum(probabilities(state)[fs.mask]))


def energy_expectation(state, spectrum):
    return float(np.dot(probabilities(state), _costs(spectrum, state)))


def ar_from_energy(energy, c_min, c_max):
    """``(c_max - E) / (c_max - c_min)``, or 1 when the range is empty."""
    energy = np.asarray(energy, dtype=np.float64)
    c_min = np.asarray(c_min, dtype=np.float64)
    c_max = np.asarray(c_max, dtype=np.float64)
    span = c_max - c_min
    safe = np.where(span > 0, span, 1.0)
    out = np.where(span > 0, (c_max - energy) / safe, 1.0)
    return out if out.ndim else float(out)


def ar_expectation(state, spectrum):
    return ar_from_energy(energy_expectation(state, spectrum), spectrum.c_min, spectrum.c_max)


@dataclass
class EvalRecord:
    """Metrics of one fixed schedule on one instance."""

    n: int
    index: int
    seed: int
    alpha: float
    p_alpha: float
    sts: float
    energy: float
    ar_expect: float
    c_min: float
    c_max: float
    feasible_count: int
    degenerate: bool = False
    norm_dev: float = 0.0
    ensemble: str = "custom"
    norm: str = "none"

    def to_dict(self):
        d = asdict(self)
        if np.isinf(d["sts"]):
            d["sts"] = "inf"
        return d


def sts_of(p_alpha):
    return 1.0 / p_alpha if p_alpha > 0 else float("inf")


class SpectrumBatch:
    """Same-size spectra and feasible sets stacked for repeated evaluation."""

    def __init__(self, spectra, feasible_sets):
        if len(spectra) != len(feasible_sets):
            raise QuboError("need one feasible set per spectrum")
        if not spectra:
            raise QuboError("empty batch")
        self.costs = np.stack([sp.costs for sp in spectra])
        self.masks = np.stack([fs.mask for fs in feasible_sets])
        if self.costs.shape != self.masks.shape:
            raise QuboError("spectra and feasible sets disagree in size")
        self.n = self.costs.shape[1].bit_length() - 1
        self.c_min = np.array([sp.c_min for sp in spectra])
        self.c_max = np.array([sp.c_max for sp in spectra])
        self.trivial = np.array([fs.trivial for fs in feasible_sets])

    def __len__(self):
        return self.costs.shape[0]

    def evaluate(self, schedule, backend=None):
        """Return arrays ``(p_alpha, energy, ar_expect, norm_dev)``.

        Degenerate spectra get ``p_alpha = ar_expect = 1``.
        """
        p, energy, dev = _kernels.get_backend(backend).evaluate_batch(
            self.costs, self.masks, schedule.gamma, schedule.beta, self.n)
        p = np.where(self.trivial, 1.0, p)
        ar = np.atleast_1d(ar_from_energy(energy, self.c_min, self.c_max))
        return p, energy, ar, dev


def batch_metrics(spectra, feasible_sets, schedule, backend=None):
    """Run one schedule on many same-size spectra; see :meth:`SpectrumBatch.evaluate`."""
    if not spectra:
        empty = np.empty(0)
        return empty, empty, empty, empty
    return SpectrumBatch(spectra, feasible_sets).evaluate(schedule, backend)
