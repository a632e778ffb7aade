"""Search for fixed QAOA parameters on a training ensemble.

The optimizer is a random-mutations hill climber with restarts:

* each restart draws a start point uniformly from the box ``[-bound, bound]^(2q)``;
* a proposal adds ``sigma * g`` (``g`` standard normal) and is clipped to the box;
* a proposal is accepted only if it strictly improves the loss;
* after ``patience`` consecutive rejections ``sigma`` is multiplied by ``shrink``;
* ``sigma`` resets at every restart; each restart spends ``budget`` proposals.

With ``budget == 0`` no search happens: the first start point is returned.
"""

import enum
import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .encoding import FourierParams, decode
from .qubo import (Ensemble, EnsembleSpec, NormKind, QuboError, child_seed,
                   compute_spectra, feasible_set, generate_ensemble)
from .simulator import SpectrumBatch

log = logging.getLogger(__name__)

# spawn key for the optimizer's random stream; instance indices stay below it
OPTIMIZER_STREAM = 2**32


class LossKind(str, enum.Enum):
    MIN_P_ALPHA = "min-palpha"
    MEAN_AR_EXPECT = "ar-expect"


def depth_for(n, depth=None):
    """Circuit depth: ``n`` layers unless a fixed ``depth`` is given."""
    return n if depth is None else int(depth)


@dataclass
class TrainConfig:
    train_n: int = 6
    train_count: int = 200
    alpha: float = 0.95
    loss: LossKind = LossKind.MIN_P_ALPHA
    kind: Ensemble = Ensemble.NORMAL
    q: int = 1
    depth: int | None = None
    norm: NormKind = NormKind.FROBENIUS
    restarts: int = 16
    budget: int = 2000
    sigma: float = 0.5
    shrink: float = 0.9
    patience: int = 20
    bound: float = 4.0
    seed: int = 0

    def __post_init__(self):
        self.loss = LossKind(self.loss)
        self.kind = Ensemble(self.kind)
        self.norm = NormKind(self.norm)
        if not 0.0 <= self.alpha <= 1.0:
            raise QuboError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.train_count < 1:
            raise QuboError("train_count must be >= 1")
        if self.q < 1 or self.restarts < 1 or self.budget < 0:
            raise QuboError("q and restarts must be >= 1, budget >= 0")

    def to_dict(self):
        d = asdict(self)
        d["loss"] = self.loss.value
        d["kind"] = self.kind.value
        d["norm"] = self.norm.value
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class TrainResult:
    params: FourierParams
    loss: float
    evals: int
    trace: list = field(default_factory=list)
    config: TrainConfig | None = None
    ensemble_seed: int = 0

    def to_dict(self):
        return {
            "params": self.params.to_dict(),
            "loss": self.loss,
            "loss_kind": self.config.loss.value if self.config else None,
            "evals": self.evals,
            "ensemble_seed": self.ensemble_seed,
            "config": self.config.to_dict() if self.config else None,
            "trace": [[int(i), float(v)] for i, v in self.trace],
        }

    @classmethod
    def from_dict(cls, d):
        cfg = TrainConfig.from_dict(d["config"]) if d.get("config") else None
        return cls(FourierParams.from_dict(d["params"]), float(d["loss"]), int(d.get("evals", 0)),
                   [tuple(t) for t in d.get("trace", [])], cfg, int(d.get("ensemble_seed", 0)))


class TrainingSet:
    """Spectra and feasible sets of a same-size ensemble, computed once."""

    def __init__(self, instances, alpha):
        if not instances:
            raise QuboError("empty training set")
        n = instances[0].n
        if any(inst.n != n for inst in instances):
            raise QuboError("training instances must share n")
        self.n = n
        self.alpha = float(alpha)
        self.instances = list(instances)
        self.spectra = compute_spectra(self.instances)
        self.feasible = [feasible_set(sp, alpha) for sp in self.spectra]
        self.batch = SpectrumBatch(self.spectra, self.feasible)

    def __len__(self):
        return len(self.instances)

    @classmethod
    def from_config(cls, cfg, ensemble_seed):
        spec = EnsembleSpec(cfg.kind, cfg.train_n, cfg.train_count, ensemble_seed, cfg.norm)
        return cls(generate_ensemble(spec), cfg.alpha)

    def metrics(self, params, depth=None):
        schedule = decode(params, depth_for(self.n, depth))
        return self.batch.evaluate(schedule)


def loss_min_p_alpha(params, train_set, cfg):
    """Smallest success probability over the training set."""
    p, _, _, _ = train_set.metrics(params, cfg.depth)
    return float(np.min(p))


def loss_ar_expect(params, train_set, cfg):
    """Mean expected approximation ratio over the training set."""
    _, _, ar, _ = train_set.metrics(params, cfg.depth)
    # np.sum reduces pairwise
    return float(np.sum(ar) / ar.size)


LOSSES = {LossKind.MIN_P_ALPHA: loss_min_p_alpha, LossKind.MEAN_AR_EXPECT: loss_ar_expect}


def random_mutations(objective, dim, *, restarts, budget, sigma, shrink, patience, bound, rng):
    """Maximize ``objective`` over the box; returns ``(x, value, evals, trace)``.

    ``trace`` holds ``(eval_index, best_value)`` each time the global best
    improves, so its values are strictly increasing.
    """
    best_x, best_val = None, -np.inf
    evals = 0
    trace = []
    for r in range(restarts):
        x = rng.uniform(-bound, bound, size=dim)
        val = objective(x)
        evals += 1
        if val > best_val:
            best_x, best_val = x.copy(), val
            trace.append((evals, best_val))
        if budget == 0:
            break
        step = sigma
        rejected = 0
        for _ in range(budget):
            cand = np.clip(x + step * rng.standard_normal(dim), -bound, bound)
            cand_val = objective(cand)
            evals += 1
            if cand_val > val:
                x, val = cand, cand_val
                rejected = 0
                if val > best_val:
                    best_x, best_val = x.copy(), val
                    trace.append((evals, best_val))
            else:
                rejected += 1
                if rejected >= patience:
                    step *= shrink
                    rejected = 0
        log.debug("restart %d: %.6f (best %.6f)", r, val, best_val)
    return best_x, best_val, evals, trace


def train(cfg, ensemble_seed=0, train_set=None):
    """Fit ``2q`` Fourier coefficients maximizing the configured loss."""
    if train_set is None:
        train_set = TrainingSet.from_config(cfg, ensemble_seed)
    loss_fn = LOSSES[cfg.loss]

    def objective(x):
        return loss_fn(FourierParams.from_vector(x), train_set, cfg)

    rng = np.random.Generator(np.random.PCG64(child_seed(cfg.seed, OPTIMIZER_STREAM)))
    x, val, evals, trace = random_mutations(
        objective, 2 * cfg.q, restarts=cfg.restarts, budget=cfg.budget, sigma=cfg.sigma,
        shrink=cfg.shrink, patience=cfg.patience, bound=cfg.bound, rng=rng)
    params = FourierParams.from_vector(x)
    if params.u[0] < 0:
        # negating every angle conjugates the state, so the loss is unchanged up to
        # round-off; report the representative with u_1 >= 0 and its own loss
        params = -1.0 * params
        val = objective(params.vector())
    log.info("trained %s: loss=%.6f u=%s v=%s after %d evaluations",
             cfg.loss.value, val, params.u, params.v, evals)
    return TrainResult(params, float(val), evals, trace, cfg, int(ensemble_seed))
