"""Command-line entry point: ``fpqaoa <subcommand> ...``.

Exit codes: 0 on success, 1 on usage errors, 2 on runtime or config errors.
Every run that writes files also writes ``config.json`` next to them, holding
the resolved configuration needed to reproduce the run.
"""

import argparse
import json
import logging
import os
import re
import sys
from dataclasses import replace

import numpy as np

from . import __version__, _kernels
from .benchmark import (DESK_N_RANGE, Ablation, RunConfig, ablation_suite,
                        brute_force_suite, config_diff, evaluate_suite, exp_fit,
                        norm_comparison_suite, rows_to_csv, state_memory_bytes,
                        summarize_suite, default_train_config)
from .encoding import FourierParams
from .normalization import rescale_or_keep
from .qubo import (ENUMERATION_LIMIT, Ensemble, EnsembleSpec, NormKind, QuboError,
                   QuboInstance, compute_spectrum, feasible_set, generate_ensemble)
from .training import LossKind, TrainConfig, TrainResult, train

log = logging.getLogger("fpqaoa")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


_RANGE = re.compile(r"^(\d+)(?:\.\.(\d+))?$")


def parse_range(text):
    """``"A..B"`` (inclusive) or ``"A"``."""
    m = _RANGE.match(text.strip())
    if not m:
        raise argparse.ArgumentTypeError(f"expected A..B or A, got {text!r}")
    lo = int(m.group(1))
    hi = int(m.group(2)) if m.group(2) else lo
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"empty or invalid range {text!r}")
    return tuple(range(lo, hi + 1))


def parse_depth(text):
    if text == "n":
        return None
    try:
        p = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"depth must be 'n' or a positive integer, got {text!r}")
    if p < 1:
        raise argparse.ArgumentTypeError("depth must be >= 1")
    return p


def parse_floats(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def parse_norms(text):
    try:
        return [NormKind(t.strip()) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown normalization in {text!r}")


def _write(path, text):
    with open(path, "w") as fh:
        fh.write(text)


def _dump(path, obj):
    _write(path, json.dumps(obj, indent=1, sort_keys=True) + "\n")


def _echo(out_dir, args, **resolved):
    echo = {
        "version": __version__,
        "kernels": _kernels.active.NAME,
        "command": args.command,
        "args": {k: v for k, v in sorted(vars(args).items()) if k != "func"},
        **resolved,
    }
    _dump(os.path.join(out_dir, "config.json"), _jsonable(echo))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (Ensemble, NormKind, LossKind, Ablation)):
        return obj.value
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


# argument groups -----------------------------------------------------------

def _add_ensemble(p, n_default, count_default, n_type=int):
    p.add_argument("--kind", type=Ensemble, default=Ensemble.NORMAL, choices=[Ensemble.NORMAL, Ensemble.MIXED],
                   metavar="{normal,mixed}")
    p.add_argument("--n", type=n_type, default=n_default)
    p.add_argument("--count", type=int, default=count_default)
    p.add_argument("--seed", type=int, default=0)


def _add_training(p, prefix=""):
    p.add_argument(f"--{prefix}loss", dest="loss", type=LossKind, default=LossKind.MIN_P_ALPHA,
                   metavar="{min-palpha,ar-expect}")
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--budget", type=int, default=2000, help="mutations per restart")
    p.add_argument("--sigma", type=float, default=0.5)


def _add_run(p):
    _add_ensemble(p, DESK_N_RANGE, 1000, n_type=parse_range)
    p.add_argument("--params", help="TrainResult JSON file")
    p.add_argument("--u", type=float)
    p.add_argument("--v", type=float)
    p.add_argument("--alpha", type=float, default=0.95)
    p.add_argument("--norm", type=NormKind, default=NormKind.FROBENIUS,
                   metavar="{frobenius,maxabs,wnorm,none}")
    p.add_argument("--depth", type=parse_depth, default=None, help="'n' (default) or a fixed depth")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--full", action="store_true", help="also write per-instance records")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--force", action="store_true",
                   help=f"allow n above {max(DESK_N_RANGE)}")


def _add_retrain(p):
    p.add_argument("--reuse-params", action="store_true",
                   help="evaluate with the given params instead of retraining per arm")
    p.add_argument("--train-n", type=int, default=6)
    p.add_argument("--train-count", type=int, default=200)
    _add_training(p, prefix="train-")


def build_parser():
    parser = _Parser(prog="fpqaoa", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("generate", help="write random instances")
    _add_ensemble(p, 6, 1)
    p.add_argument("--norm", type=NormKind, default=NormKind.NONE)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train fixed parameters")
    _add_ensemble(p, 6, 200)
    _add_training(p)
    p.add_argument("--alpha", type=float, default=0.95)
    p.add_argument("--norm", type=NormKind, default=NormKind.FROBENIUS)
    p.add_argument("--depth", type=parse_depth, default=None)
    p.add_argument("--out", required=True, help="output JSON file")
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="STS statistics for fixed parameters")
    _add_run(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="remove one modification and rerun")
    _add_run(p)
    p.add_argument("--which", type=Ablation, required=True, metavar="{no-m1,no-m2,no-m3}")
    _add_retrain(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("sweep-alpha", help="STS statistics for several target ratios")
    _add_run(p)
    p.add_argument("--alphas", type=parse_floats, default=[0.9, 0.95, 0.99, 1.0])
    p.set_defaults(func=cmd_sweep_alpha)

    p = sub.add_parser("compare-norms", help="STS statistics under several normalizations")
    _add_run(p)
    p.add_argument("--kinds", type=parse_norms,
                   default=[NormKind.FROBENIUS, NormKind.MAXABS, NormKind.WNORM])
    _add_retrain(p)
    p.set_defaults(func=cmd_compare_norms)

    p = sub.add_parser("spectrum", help="exact spectrum summary of one instance file")
    p.add_argument("--instance", required=True)
    p.add_argument("--alpha", type=float, default=0.95)
    p.add_argument("--norm", type=NormKind, default=NormKind.NONE)
    p.set_defaults(func=cmd_spectrum)
    return parser


# commands ------------------------------------------------------------------

def cmd_generate(args):
    spec = EnsembleSpec(args.kind, args.n, args.count, args.seed, args.norm)
    os.makedirs(args.out, exist_ok=True)
    instances = generate_ensemble(spec)
    width = max(5, len(str(args.count - 1)))
    files = []
    zeros = 0
    slots = args.n * (args.n + 1) // 2
    for k, inst in enumerate(instances):
        name = f"instance_{k:0{width}d}.json"
        _write(os.path.join(args.out, name), inst.dumps() + "\n")
        z = int(np.count_nonzero(inst.upper_values() == 0))
        zeros += z
        files.append({"file": name, "index": k, "seed": inst.seed, "zero_coefficients": z})
    manifest = {
        "kind": spec.kind.value, "n": spec.n, "count": spec.count, "base_seed": spec.base_seed,
        "norm": spec.normalization.value, "slots_per_instance": slots,
        "zero_fraction": zeros / (slots * len(instances)), "instances": files,
    }
    _dump(os.path.join(args.out, "manifest.json"), manifest)
    _echo(args.out, args, ensemble={"kind": spec.kind.value, "n": spec.n, "count": spec.count,
                                    "base_seed": spec.base_seed, "norm": spec.normalization.value})
    print(f"wrote {len(files)} instances to {args.out} (zero fraction {manifest['zero_fraction']:.4f})")


def _train_config(args, **extra):
    return TrainConfig(train_n=args.n, train_count=args.count, alpha=args.alpha, loss=args.loss,
                       kind=args.kind, q=args.q, depth=args.depth, norm=args.norm,
                       restarts=args.restarts, budget=args.budget, sigma=args.sigma,
                       seed=args.seed, **extra)


def cmd_train(args):
    _kernels.set_threads(args.jobs)
    cfg = _train_config(args)
    result = train(cfg, ensemble_seed=args.seed)
    out = result.to_dict()
    out["command"] = {"version": __version__, "kernels": _kernels.active.NAME, "argv": sys.argv[1:]}
    parent = os.path.dirname(os.path.abspath(args.out))
    os.makedirs(parent, exist_ok=True)
    _dump(args.out, out)
    print(f"loss ({cfg.loss.value}) = {result.loss:.6f}")
    print(f"u = {result.params.u.tolist()}  v = {result.params.v.tolist()}")


def _params_from(args):
    if args.params:
        if args.u is not None or args.v is not None:
            raise UsageError("give either --params or --u/--v, not both")
        with open(args.params) as fh:
            return TrainResult.from_dict(json.load(fh)).params
    if args.u is None or args.v is None:
        raise UsageError("need --params FILE or both --u and --v")
    return FourierParams.sincos(args.u, args.v)


def _check_sizes(args):
    top = max(args.n)
    if top > ENUMERATION_LIMIT:
        raise QuboError(f"n={top} exceeds the enumeration limit {ENUMERATION_LIMIT}")
    desk = max(DESK_N_RANGE)
    est = state_memory_bytes(top) / 2**20
    if top > desk and not args.force:
        raise QuboError(f"n={top} needs about {est:.0f} MiB per state vector and is above the "
                        f"default limit {desk}; pass --force to run it")
    if top > desk:
        print(f"memory estimate: {est:.0f} MiB per state vector at n={top}", file=sys.stderr)


def _run_config(args, params):
    return RunConfig(params=params, alpha=args.alpha, n_range=args.n, count=args.count,
                     kind=args.kind, norm=args.norm, depth=args.depth, base_seed=args.seed)


def _retrain_config(args, cfg):
    return default_train_config(cfg, train_n=args.train_n, train_count=args.train_count,
                                loss=args.loss, q=args.q, restarts=args.restarts,
                                budget=args.budget, sigma=args.sigma, seed=args.seed)


def _emit_rows(out_dir, name, rows):
    _write(os.path.join(out_dir, name), rows_to_csv(rows))
    fit = exp_fit(rows)
    if fit is not None:
        print(f"{name}: median STS ~ {fit[0]:.4g} * {fit[1]:.4g}^n (log-linear fit)")


def _emit_records(out_dir, name, records):
    flat = [r.to_dict() for n in sorted(records) for r in records[n]]
    _dump(os.path.join(out_dir, name), flat)


def _prepare_run(args):
    _check_sizes(args)
    _kernels.set_threads(args.jobs)
    os.makedirs(args.out, exist_ok=True)
    return _run_config(args, _params_from(args))


def cmd_eval(args):
    cfg = _prepare_run(args)
    records = evaluate_suite(cfg)
    rows = summarize_suite(records)
    _emit_rows(args.out, "summary.csv", rows)
    if args.full:
        _emit_records(args.out, "records.json", records)
    _echo(args.out, args, run=cfg.to_dict())
    sys.stdout.write(rows_to_csv(rows))


def cmd_ablate(args):
    base = _prepare_run(args)
    tr = None if args.reuse_params else _retrain_config(args, base)
    arm = ablation_suite(base, args.which, retrain=not args.reuse_params, train_cfg=tr,
                         ensemble_seed=args.seed, keep_records=args.full)
    _emit_rows(args.out, "summary.csv", arm.rows)
    _emit_rows(args.out, "brute_force.csv", brute_force_suite(arm.config))
    if args.full:
        _emit_records(args.out, "records.json", arm.records)
    if arm.train_result is not None:
        _dump(os.path.join(args.out, "params.json"), arm.train_result.to_dict())
    _echo(args.out, args, ablation=args.which.value, base_run=base.to_dict(),
          run=arm.config.to_dict(), changed=config_diff(base, arm.config),
          training=arm.train_result.config.to_dict() if arm.train_result else None)
    sys.stdout.write(rows_to_csv(arm.rows))


def cmd_sweep_alpha(args):
    cfg = _prepare_run(args)
    for a in args.alphas:
        if not 0.0 <= a <= 1.0:
            raise QuboError(f"alpha must lie in [0, 1], got {a}")
    files = {}
    for a in args.alphas:
        arm_cfg = replace(cfg, alpha=a)
        records = evaluate_suite(arm_cfg)
        name = f"alpha_{a!r}.csv"
        _emit_rows(args.out, name, summarize_suite(records))
        if args.full:
            _emit_records(args.out, f"records_alpha_{a!r}.json", records)
        files[name] = a
    _echo(args.out, args, run=cfg.to_dict(), alphas=args.alphas, files=files)
    print(f"wrote {len(files)} curves to {args.out}")


def cmd_compare_norms(args):
    cfg = _prepare_run(args)
    tr = None if args.reuse_params else _retrain_config(args, cfg)
    arms = norm_comparison_suite(cfg, args.kinds, retrain=not args.reuse_params, train_cfg=tr,
                                 ensemble_seed=args.seed, keep_records=args.full)
    arms_echo = {}
    for kind, arm in arms.items():
        _emit_rows(args.out, f"norm_{kind.value}.csv", arm.rows)
        if args.full:
            _emit_records(args.out, f"records_{kind.value}.json", arm.records)
        if arm.train_result is not None:
            _dump(os.path.join(args.out, f"params_{kind.value}.json"), arm.train_result.to_dict())
        arms_echo[kind.value] = arm.config.to_dict()
    _echo(args.out, args, base_run=cfg.to_dict(), arms=arms_echo)
    print(f"wrote {len(arms)} curves to {args.out}")


def cmd_spectrum(args):
    inst = QuboInstance.load(args.instance)
    inst = rescale_or_keep(inst, args.norm)
    sp = compute_spectrum(inst)
    fs = feasible_set(sp, args.alpha)
    out = {
        "n": inst.n, "norm": inst.norm.value, "c_min": sp.c_min, "c_max": sp.c_max,
        "argmin": sp.argmin.tolist(), "alpha": args.alpha, "threshold": fs.threshold,
        "feasible_count": fs.size, "brute_force_sts": fs.mask.size / fs.size,
    }
    print(json.dumps(out, indent=1))


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"fpqaoa: error: {exc}", file=sys.stderr)
        return 1
    except (QuboError, ValueError, OSError, KeyError) as exc:
        print(f"fpqaoa: error: {exc}", file=sys.stderr)
        return 2
    return 0
