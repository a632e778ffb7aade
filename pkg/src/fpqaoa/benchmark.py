"""Fixed-parameter evaluation suites: shots-to-solution statistics per size.

Percentiles use linear interpolation between order statistics (Hyndman-Fan
type 7, numpy's default ``linear`` method); ``+inf`` values take part in the
ordering like any other value. Records outside ``[p01, p99]`` count as
outliers.
"""

import csv
import enum
import io
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .encoding import AngleSchedule, FourierParams, decode
from .normalization import rescale_or_keep
from .qubo import (ENUMERATION_LIMIT, Ensemble, EnsembleSpec, NormKind, QuboError,
                   child_seed, compute_spectra, feasible_set, generate_ensemble)
from .simulator import EvalRecord, SpectrumBatch, run_qaoa, sts_of, success_probability
from .simulator import ar_expectation, energy_expectation
from .training import TrainConfig, depth_for, train

log = logging.getLogger(__name__)

CSV_HEADER = ["n", "median_sts", "q1", "q3", "p01", "p99", "outliers",
              "median_ar_expect", "mean_p_alpha"]

DESK_N_RANGE = tuple(range(5, 17))
FULL_N_RANGE = tuple(range(5, 25))

# amplitudes evaluated per kernel call; bounds the stacked cost tables
_CHUNK_AMPLITUDES = 1 << 22


class Ablation(str, enum.Enum):
    NO_M1 = "no-m1"
    NO_M2 = "no-m2"
    NO_M3 = "no-m3"


ABLATION_FIXED_DEPTH = 8


@dataclass
class RunConfig:
    params: FourierParams | None = None
    schedule: AngleSchedule | None = None
    alpha: float = 0.95
    n_range: tuple = DESK_N_RANGE
    count: int = 1000
    kind: Ensemble = Ensemble.NORMAL
    norm: NormKind = NormKind.FROBENIUS
    depth: int | None = None
    base_seed: int = 1

    def __post_init__(self):
        self.kind = Ensemble(self.kind)
        self.norm = NormKind(self.norm)
        self.n_range = tuple(int(n) for n in self.n_range)
        if (self.params is None) == (self.schedule is None):
            raise QuboError("give exactly one of params or schedule")
        if not self.n_range:
            raise QuboError("n_range is empty")
        if min(self.n_range) < 1 or max(self.n_range) > ENUMERATION_LIMIT:
            raise QuboError(f"n_range must lie within 1..{ENUMERATION_LIMIT}")
        if not 0.0 <= self.alpha <= 1.0:
            raise QuboError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.count < 1:
            raise QuboError("count must be >= 1")

    def to_dict(self):
        return {
            "params": self.params.to_dict() if self.params is not None else None,
            "schedule": self.schedule.to_dict() if self.schedule is not None else None,
            "alpha": self.alpha,
            "n_range": list(self.n_range),
            "count": self.count,
            "kind": self.kind.value,
            "norm": self.norm.value,
            "depth": self.depth,
            "base_seed": self.base_seed,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if d.get("params") is not None:
            d["params"] = FourierParams.from_dict(d["params"])
        if d.get("schedule") is not None:
            d["schedule"] = AngleSchedule.from_dict(d["schedule"])
        return cls(**d)

    def ensemble(self, n):
        """Instances at size ``n`` are seeded from ``child_seed(base_seed, n)``."""
        return EnsembleSpec(self.kind, n, self.count, child_seed(self.base_seed, n), self.norm)

    def schedule_for(self, n):
        if self.schedule is not None:
            return self.schedule
        return decode(self.params, depth_for(n, self.depth))


@dataclass
class SummaryRow:
    n: int
    median_sts: float
    q1_sts: float
    q3_sts: float
    p01_sts: float
    p99_sts: float
    outlier_count: int
    median_ar_expect: float
    mean_p_alpha: float

    def csv_fields(self):
        return [self.n, self.median_sts, self.q1_sts, self.q3_sts, self.p01_sts,
                self.p99_sts, self.outlier_count, self.median_ar_expect, self.mean_p_alpha]


def percentile(values, q):
    """Type-7 percentile (``q`` in [0, 100]) that tolerates ``+inf``."""
    x = np.sort(np.asarray(values, dtype=np.float64))
    if x.size == 0:
        raise ValueError("percentile of an empty sample")
    h = (x.size - 1) * q / 100.0
    lo = int(math.floor(h))
    hi = min(lo + 1, x.size - 1)
    frac = h - lo
    if frac == 0.0 or x[lo] == x[hi]:
        return float(x[lo])
    return float(x[lo] + frac * (x[hi] - x[lo]))


def summarize(n, records):
    sts = np.array([r.sts for r in records])
    p01, q1, med, q3, p99 = (percentile(sts, q) for q in (1, 25, 50, 75, 99))
    outliers = int(np.count_nonzero((sts < p01) | (sts > p99)))
    ar = np.array([r.ar_expect for r in records])
    p = np.array([r.p_alpha for r in records])
    return SummaryRow(n, med, q1, q3, p01, p99, outliers, percentile(ar, 50), float(np.mean(p)))


def brute_force_baseline(spectrum, alpha):
    """Expected uniform-random samples until one lands in the feasible set."""
    fs = feasible_set(spectrum, alpha)
    return float(fs.mask.size / fs.size)


def tts_model(sts, n, p):
    """Shots times a per-shot cost of ``n`` per layer over ``p`` layers."""
    return sts * n * p


def evaluate_instance(instance, params_or_schedule, alpha, depth=None,
                      normalization=NormKind.FROBENIUS, index=0, backend=None):
    """Normalize, enumerate, simulate, and score a single instance."""
    inst = rescale_or_keep(instance, normalization)
    spectra = compute_spectra([inst], backend=backend)
    sp = spectra[0]
    fs = feasible_set(sp, alpha)
    if isinstance(params_or_schedule, AngleSchedule):
        schedule = params_or_schedule
    else:
        schedule = decode(params_or_schedule, depth_for(inst.n, depth))
    norm_log = []
    state = run_qaoa(inst, sp, schedule, backend=backend, norm_log=norm_log)
    p = success_probability(state, fs)
    return EvalRecord(
        n=inst.n, index=index, seed=inst.seed, alpha=float(alpha), p_alpha=p, sts=sts_of(p),
        energy=energy_expectation(state, sp), ar_expect=ar_expectation(state, sp),
        c_min=sp.c_min, c_max=sp.c_max, feasible_count=fs.size, degenerate=sp.degenerate,
        norm_dev=norm_log[0], ensemble=inst.ensemble.value, norm=inst.norm.value)


def _records_for(instances, schedule, alpha, offset=0, backend=None):
    spectra = compute_spectra(instances, backend=backend)
    sets = [feasible_set(sp, alpha) for sp in spectra]
    p, energy, ar, dev = SpectrumBatch(spectra, sets).evaluate(schedule, backend)
    out = []
    for k, (inst, sp, fs) in enumerate(zip(instances, spectra, sets)):
        pk = float(p[k])
        out.append(EvalRecord(
            n=inst.n, index=offset + k, seed=inst.seed, alpha=float(alpha), p_alpha=pk,
            sts=sts_of(pk), energy=float(energy[k]), ar_expect=float(ar[k]),
            c_min=sp.c_min, c_max=sp.c_max, feasible_count=fs.size,
            degenerate=sp.degenerate, norm_dev=float(dev[k]),
            ensemble=inst.ensemble.value, norm=inst.norm.value))
    return out


def evaluate_size(cfg, n, backend=None):
    """Per-instance records at size ``n``, sorted by instance index."""
    instances = generate_ensemble(cfg.ensemble(n))
    schedule = cfg.schedule_for(n)
    chunk = max(1, _CHUNK_AMPLITUDES >> n)
    records = []
    for start in range(0, len(instances), chunk):
        try:
            records += _records_for(instances[start:start + chunk], schedule, cfg.alpha,
                                    offset=start, backend=backend)
        except QuboError as exc:
            seeds = [inst.seed for inst in instances[start:start + chunk]]
            raise QuboError(f"n={n}, instance seeds {seeds[0]}..{seeds[-1]}: {exc}") from exc
    return records


def evaluate_suite(cfg, backend=None):
    """``{n: [EvalRecord, ...]}`` over ``cfg.n_range``."""
    out = {}
    for n in cfg.n_range:
        out[n] = evaluate_size(cfg, n, backend)
        log.info("n=%d: median STS %.4g", n, percentile([r.sts for r in out[n]], 50))
    return out


def summarize_suite(records_by_n):
    return [summarize(n, recs) for n, recs in sorted(records_by_n.items())]


def run_suite(cfg, backend=None):
    return summarize_suite(evaluate_suite(cfg, backend))


def brute_force_suite(cfg, backend=None):
    """Rows for uniform random sampling on the same instances as ``cfg``."""
    rows = []
    for n in cfg.n_range:
        instances = generate_ensemble(cfg.ensemble(n))
        records = []
        for k, (inst, sp) in enumerate(zip(instances, compute_spectra(instances, backend=backend))):
            fs = feasible_set(sp, cfg.alpha)
            p = 1.0 if fs.trivial else fs.size / fs.mask.size
            energy = float(np.mean(sp.costs))
            span = sp.c_max - sp.c_min
            ar = (sp.c_max - energy) / span if span > 0 else 1.0
            records.append(EvalRecord(n, k, inst.seed, cfg.alpha, p, brute_force_baseline(sp, cfg.alpha),
                                      energy, ar, sp.c_min, sp.c_max, fs.size, sp.degenerate))
        rows.append(summarize(n, records))
    return rows


def default_train_config(cfg, **overrides):
    """Training setup matching ``cfg`` (ensemble, alpha, norm, depth, q)."""
    q = cfg.params.q if cfg.params is not None else 1
    base = TrainConfig(alpha=cfg.alpha, kind=cfg.kind, norm=cfg.norm, depth=cfg.depth, q=q)
    return replace(base, **overrides)


def ablate_configs(cfg, train_cfg, which):
    """Apply one ablation to both the run and the training configuration."""
    which = Ablation(which)
    if which is Ablation.NO_M1:
        change = {"alpha": 1.0}
    elif which is Ablation.NO_M2:
        change = {"depth": ABLATION_FIXED_DEPTH}
    else:
        change = {"norm": NormKind.MAXABS}
    run = replace(cfg, **change)
    tr = replace(train_cfg, **change) if train_cfg is not None else None
    return run, tr


def config_diff(a, b):
    """Names of the RunConfig fields that differ between ``a`` and ``b``."""
    da, db = a.to_dict(), b.to_dict()
    return sorted(k for k in da if da[k] != db[k])


@dataclass
class ArmResult:
    rows: list
    config: RunConfig
    train_result: object = None
    records: dict = field(default_factory=dict)


def _run_arm(cfg, train_cfg, retrain, ensemble_seed, keep_records, backend):
    trained = None
    if retrain:
        trained = train(train_cfg, ensemble_seed)
        cfg = replace(cfg, params=trained.params, schedule=None)
    records = evaluate_suite(cfg, backend)
    return ArmResult(summarize_suite(records), cfg, trained, records if keep_records else {})


def ablation_suite(base_cfg, which, retrain=True, train_cfg=None, ensemble_seed=0,
                   keep_records=False, backend=None):
    """Run ``base_cfg`` with one modification removed.

    By default the arm trains its own parameters under the ablated setup;
    ``retrain=False`` reuses ``base_cfg.params``.
    """
    if retrain and base_cfg.params is None:
        raise QuboError("retraining needs Fourier params in the base config")
    if train_cfg is None and retrain:
        train_cfg = default_train_config(base_cfg)
    cfg, tr = ablate_configs(base_cfg, train_cfg, which)
    return _run_arm(cfg, tr, retrain, ensemble_seed, keep_records, backend)


def alpha_sweep(cfg, alphas, backend=None):
    """``{alpha: rows}`` on shared instances and shared parameters."""
    for a in alphas:
        if not 0.0 <= a <= 1.0:
            raise QuboError(f"alpha must lie in [0, 1], got {a}")
    return {float(a): run_suite(replace(cfg, alpha=float(a)), backend) for a in alphas}


def norm_comparison_suite(cfg, kinds, retrain=True, train_cfg=None, ensemble_seed=0,
                          keep_records=False, backend=None):
    """``{kind: ArmResult}`` on shared instance seeds.

    The arm whose normalization equals ``cfg.norm`` reuses ``cfg``'s
    parameters; the others train their own when ``retrain`` is set.
    """
    if train_cfg is None and retrain:
        train_cfg = default_train_config(cfg)
    out = {}
    for kind in kinds:
        kind = NormKind(kind)
        arm_cfg = replace(cfg, norm=kind)
        redo = retrain and kind is not cfg.norm
        arm_train = replace(train_cfg, norm=kind) if redo else None
        out[kind] = _run_arm(arm_cfg, arm_train, redo, ensemble_seed, keep_records, backend)
    return out


def exp_fit(rows):
    """Least-squares fit ``median_sts ~ A * B**n``; returns ``(A, B)`` or None."""
    pts = [(r.n, r.median_sts) for r in rows if np.isfinite(r.median_sts) and r.median_sts > 0]
    if len(pts) < 2:
        return None
    ns, med = np.array(pts, dtype=np.float64).T
    slope, icpt = np.polyfit(ns, np.log(med), 1)
    return float(np.exp(icpt)), float(np.exp(slope))


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, float) else v for v in r.csv_fields()])
    return buf.getvalue()


def rows_from_csv(text):
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header}")
    rows = []
    for rec in reader:
        rows.append(SummaryRow(int(rec[0]), *map(float, rec[1:6]), int(rec[6]),
                               float(rec[7]), float(rec[8])))
    return rows


def state_memory_bytes(n):
    return 16 * (1 << n)
