"""QUBO problems in Ising form, random ensembles, and exact spectra.

Conventions shared by every module in the package:

* The coefficient matrix ``s`` is upper triangular (diagonal included); entry
  ``s[i, j]`` with ``i < j`` multiplies ``z_i z_j`` and ``s[i, i]`` multiplies
  ``z_i``. Indices are 0-based in memory and 1-based in instance files.
* Bitstring ``b`` maps to spins by ``z_k = +1`` if bit ``k`` of ``b`` is 0 and
  ``z_k = -1`` otherwise. Qubit 1 is the least significant bit.

Randomness
----------
All generators draw from numpy's PCG64 bit generator. The seed of instance
``k`` in an ensemble with base seed ``B`` is the first 64-bit word of
``numpy.random.SeedSequence(B, spawn_key=(k,))``. Normal variates come from
``Generator.standard_normal`` (numpy's ziggurat method), uniforms from
``Generator.random``/``Generator.uniform``.
"""

import enum
import hashlib
import json
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels

ENUMERATION_LIMIT = 26


class QuboError(ValueError):
    """Invalid QUBO input."""


class EnumerationLimitError(QuboError):
    pass


class Ensemble(str, enum.Enum):
    NORMAL = "normal"
    MIXED = "mixed"
    CUSTOM = "custom"


class NormKind(str, enum.Enum):
    NONE = "none"
    FROBENIUS = "frobenius"
    MAXABS = "maxabs"
    WNORM = "wnorm"


def _frozen(a):
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class QuboInstance:
    """An ``n``-spin Ising cost with upper-triangular coefficients ``s``."""

    n: int
    s: np.ndarray
    ensemble: Ensemble = Ensemble.CUSTOM
    seed: int = 0
    norm: NormKind = NormKind.NONE

    def __post_init__(self):
        s = np.asarray(self.s, dtype=np.float64)
        if self.n < 1 or s.shape != (self.n, self.n):
            raise QuboError(f"coefficient matrix must be {self.n}x{self.n}, got {s.shape}")
        if np.any(np.tril(s, -1) != 0):
            raise QuboError("coefficients below the diagonal must be zero")
        if not np.all(np.isfinite(s)):
            raise QuboError("coefficients must be finite")
        object.__setattr__(self, "s", _frozen(s))
        object.__setattr__(self, "ensemble", Ensemble(self.ensemble))
        object.__setattr__(self, "norm", NormKind(self.norm))
        object.__setattr__(self, "seed", int(self.seed))

    @classmethod
    def from_entries(cls, n, entries, **meta):
        """Build from ``(i, j, value)`` triples with 1-based ``i <= j``."""
        s = np.zeros((n, n))
        for i, j, value in entries:
            i, j = int(i), int(j)
            if not 1 <= i <= j <= n:
                raise QuboError(f"entry ({i}, {j}) outside 1 <= i <= j <= {n}")
            s[i - 1, j - 1] = float(value)
        return cls(n, s, **meta)

    def entries(self):
        """Nonzero coefficients as 1-based ``(i, j, value)`` triples, row-major."""
        rows, cols = np.nonzero(self.s)
        return [(int(i) + 1, int(j) + 1, float(self.s[i, j])) for i, j in zip(rows, cols)]

    def upper_values(self):
        """All ``n(n+1)/2`` upper-triangular slots, row-major."""
        return self.s[np.triu_indices(self.n)]

    @property
    def is_zero(self):
        return not np.any(self.s)

    def scaled(self, factor, norm=None):
        return replace(self, s=self.s * factor, norm=self.norm if norm is None else norm)

    def digest(self):
        """sha256 of the coefficient bytes; equal digests mean equal matrices."""
        h = hashlib.sha256()
        h.update(np.int64(self.n).tobytes())
        h.update(np.ascontiguousarray(self.s).tobytes())
        return h.hexdigest()

    def to_dict(self):
        return {
            "n": self.n,
            "entries": [[i, j, v] for i, j, v in self.entries()],
            "ensemble": self.ensemble.value,
            "seed": self.seed,
            "norm": self.norm.value,
        }

    @classmethod
    def from_dict(cls, d):
        try:
            return cls.from_entries(
                int(d["n"]), d.get("entries", []),
                ensemble=d.get("ensemble", "custom"),
                seed=int(d.get("seed", 0)),
                norm=d.get("norm", "none"),
            )
        except (KeyError, TypeError) as exc:
            raise QuboError(f"malformed instance: {exc}") from exc

    def dumps(self):
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Exact cost of every bitstring, with extrema and the argmin set."""

    costs: np.ndarray
    c_min: float
    c_max: float
    argmin: np.ndarray

    @property
    def n(self):
        return int(self.costs.shape[0]).bit_length() - 1

    @property
    def degenerate(self):
        return self.c_max == self.c_min


@dataclass(frozen=True, eq=False)
class FeasibleSet:
    """Bitstrings whose cost is within a ``1 - alpha`` fraction of the range above the optimum."""

    alpha: float
    mask: np.ndarray
    threshold: float
    trivial: bool = False

    @property
    def members(self):
        return np.flatnonzero(self.mask)

    @property
    def size(self):
        return int(np.count_nonzero(self.mask))


@dataclass(frozen=True)
class EnsembleSpec:
    kind: Ensemble
    n: int
    count: int
    base_seed: int = 0
    normalization: NormKind = NormKind.NONE

    def __post_init__(self):
        if self.count < 1:
            raise QuboError("ensemble count must be >= 1")
        if self.n < 1:
            raise QuboError("n must be >= 1")
        object.__setattr__(self, "kind", Ensemble(self.kind))
        object.__setattr__(self, "normalization", NormKind(self.normalization))

    def seeds(self):
        return [child_seed(self.base_seed, k) for k in range(self.count)]


def child_seed(base_seed, *keys):
    """Deterministic 64-bit seed derived from ``base_seed`` and integer ``keys``."""
    ss = np.random.SeedSequence(int(base_seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, np.uint64)[0])


def _rng(seed):
    return np.random.Generator(np.random.PCG64(int(seed)))


def cost_evaluate(instance, z):
    """Cost of the spin assignment ``z`` (entries +1/-1)."""
    z = np.asarray(z)
    if z.shape != (instance.n,):
        raise QuboError(f"expected {instance.n} spins, got shape {z.shape}")
    if not np.all(np.abs(z) == 1):
        raise QuboError("spins must be +1 or -1")
    s = instance.s
    z = z.astype(np.float64)
    acc = 0.0
    for i in range(instance.n):
        for j in range(i + 1, instance.n):
            acc += s[i, j] * z[i] * z[j]
    for i in range(instance.n):
        acc += s[i, i] * z[i]
    return float(acc)


def spins_of(b, n):
    """Spin vector for bitstring index ``b``."""
    return np.array([1 - 2 * ((b >> k) & 1) for k in range(n)], dtype=np.int8)


def _check_limit(n, limit):
    if n > limit:
        raise EnumerationLimitError(f"n={n} exceeds the enumeration limit {limit}")


def spectrum_from_costs(costs):
    costs = _frozen(costs)
    c_min = float(costs.min())
    c_max = float(costs.max())
    argmin = np.flatnonzero(costs == c_min)
    argmin.setflags(write=False)
    return Spectrum(costs, c_min, c_max, argmin)


def compute_spectrum(instance, limit=ENUMERATION_LIMIT, backend=None):
    _check_limit(instance.n, limit)
    k = _kernels.get_backend(backend)
    return spectrum_from_costs(k.cost_table(instance.s))


def compute_spectra(instances, limit=ENUMERATION_LIMIT, backend=None):
    """Spectra for many same-size instances in one kernel call."""
    if not instances:
        return []
    n = instances[0].n
    if any(inst.n != n for inst in instances):
        raise QuboError("compute_spectra needs instances of a single size")
    _check_limit(n, limit)
    k = _kernels.get_backend(backend)
    table = k.cost_tables(np.stack([inst.s for inst in instances]))
    return [spectrum_from_costs(row) for row in table]


def feasibility_slack(spectrum):
    return 1e-9 * (abs(spectrum.c_min) + abs(spectrum.c_max) + 1.0)


def feasible_set(spectrum, alpha):
    """Bitstrings ``z`` with ``(C(z) - c_min) / (c_max - c_min) <= 1 - alpha``.

    A degenerate spectrum (``c_max == c_min``) makes every bitstring feasible.
    At ``alpha == 1`` the set is exactly the argmin set; otherwise the threshold
    comparison carries a small relative slack so boundary states survive
    round-off.
    """
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise QuboError(f"alpha must lie in [0, 1], got {alpha}")
    costs = spectrum.costs
    threshold = spectrum.c_min + (1.0 - alpha) * (spectrum.c_max - spectrum.c_min)
    if spectrum.degenerate or alpha == 0.0:
        mask = np.ones(costs.shape, dtype=bool)
    elif alpha == 1.0:
        mask = costs == spectrum.c_min
    else:
        mask = costs <= threshold + feasibility_slack(spectrum)
    mask.setflags(write=False)
    return FeasibleSet(alpha, mask, threshold, trivial=spectrum.degenerate)


def generate_normal(n, seed):
    """Every ``s_ij`` (``i <= j``) drawn independently from N(0, 1)."""
    if n < 1:
        raise QuboError("n must be >= 1")
    rng = _rng(seed)
    s = np.zeros((n, n))
    s[np.triu_indices(n)] = rng.standard_normal(n * (n + 1) // 2)
    return QuboInstance(n, s, Ensemble.NORMAL, seed)


def generate_mixed(n, seed):
    """Normal plus biased-uniform matrix, half the entries zeroed, upper triangle kept.

    Draw order: the n*n normal matrix, the bias ``b ~ U[-1/2, 1/2]``, the n*n
    uniform matrix on ``[b - 1/2, b + 1/2]``, then the n*n keep/drop mask.
    """
    if n < 1:
        raise QuboError("n must be >= 1")
    rng = _rng(seed)
    normal = rng.standard_normal((n, n))
    bias = rng.uniform(-0.5, 0.5)
    uniform = rng.uniform(bias - 0.5, bias + 0.5, size=(n, n))
    drop = rng.random((n, n)) < 0.5
    full = np.where(drop, 0.0, normal + uniform)
    return QuboInstance(n, np.triu(full), Ensemble.MIXED, seed)


GENERATORS = {Ensemble.NORMAL: generate_normal, Ensemble.MIXED: generate_mixed}


def generate(kind, n, seed):
    try:
        gen = GENERATORS[Ensemble(kind)]
    except (KeyError, ValueError):
        raise QuboError(f"no generator for ensemble {kind!r}") from None
    return gen(n, seed)


def generate_ensemble(spec):
    """Instances of ``spec`` in index order, normalized per ``spec.normalization``."""
    from .normalization import rescale_or_keep

    out = []
    for seed in spec.seeds():
        inst = generate(spec.kind, spec.n, seed)
        out.append(rescale_or_keep(inst, spec.normalization))
    return out
