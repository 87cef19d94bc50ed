"""Command line interface.

Subcommands: solve (fixed point), region (confidence band sweep),
lambda-star (limiting fraction), simulate (trajectory batch), exp
(named experiment recipes). Exit codes: 0 success, 1 configuration
error (bad arguments, files, JSON), 2 runtime failure.

Comma-separated --sigma/--gap lists are per arm with arm 1 optimal;
--gap takes either K-1 suboptimal gaps or K entries starting with 0.
UCBVLAB_OUT_DIR sets the default output directory.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from . import asymptotics as A
from . import csvio
from . import distributions as D
from . import experiments as E
from . import montecarlo as M
from .policies import PolicyConfig


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; the CLI contract wants 1
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok != ""]
    except ValueError as exc:
        raise ConfigError(f"bad float list {text!r}") from exc


def _gaps_for(sigmas: list[float], gap_text: str) -> list[float]:
    gaps = _floats(gap_text)
    k = len(sigmas)
    if len(gaps) == k - 1:
        gaps = [0.0] + gaps
    elif len(gaps) == k:
        if gaps[0] != 0.0:
            raise ConfigError("with K gap entries the first (optimal arm) must be 0")
    else:
        raise ConfigError(f"expected {k - 1} or {k} gap entries, got {len(gaps)}")
    if any(g < 0.0 for g in gaps):
        raise ConfigError("gaps must be >= 0")
    return gaps


def _default_out_dir(value: str | None) -> Path:
    if value is not None:
        return Path(value)
    return Path(os.environ.get("UCBVLAB_OUT_DIR", "."))


def _emit(path_or_none, header, rows, config):
    if path_or_none is None:
        import io

        buf = io.StringIO()
        if config is not None:
            buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
        import csv as _csv

        writer = _csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([csvio.format_cell(v) for v in row])
        sys.stdout.write(buf.getvalue())
    else:
        csvio.write_csv(path_or_none, header, rows, config=config)
        print(path_or_none)


def _progress_printer():
    def show(done, total):
        sys.stderr.write(f"\r{done}/{total}")
        sys.stderr.flush()
        if done >= total:
            sys.stderr.write("\n")

    return show


def _setting(args, key: str, file_config: dict, default=None, required=False):
    """Effective value for one setting: flag beats config file beats default."""
    value = getattr(args, key.replace("-", "_"), None)
    if value is None:
        value = file_config.get(key, default)
    if value is None and required:
        raise ConfigError(f"missing required setting {key!r} (flag or config file)")
    return value


def _float_list(value) -> list[float]:
    if isinstance(value, str):
        return _floats(value)
    try:
        return [float(v) for v in value]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad float list {value!r}") from exc


def _cmd_solve(args) -> int:
    file_config = _load_json(args.config) if args.config is not None else {}
    horizon = int(_setting(args, "T", file_config, required=True))
    rho = float(_setting(args, "rho", file_config, default=2.0))
    sigmas = _float_list(_setting(args, "sigma", file_config, required=True))
    gaps = _gaps_for(sigmas, _setting(args, "gap", file_config, required=True))
    problem = A.FpeProblem.from_arms(sigmas, gaps, rho, horizon)
    solution = A.solve_fpe(problem)
    header, rows = A.solution_rows([problem], [solution])
    config = {
        "command": "solve",
        "T": horizon,
        "rho": rho,
        "sigma": sigmas,
        "gap": gaps,
    }
    _emit(args.out, header, rows, config)
    return 0


def _cmd_region(args) -> int:
    file_config = _load_json(args.config) if args.config is not None else {}
    horizon = int(_setting(args, "T", file_config, required=True))
    rho = float(_setting(args, "rho", file_config, default=2.0))
    sigmas = _float_list(_setting(args, "sigma", file_config, required=True))
    if len(sigmas) != 2:
        raise ConfigError("region expects exactly two sigma entries")
    lambdas = _float_list(_setting(args, "lambdas", file_config, required=True))
    slack = _setting(args, "slack", file_config)
    slack = float(slack) if slack is not None else 1.0 / math.log(horizon)
    rows = A.region_sweep(horizon, rho, sigmas[0], sigmas[1], lambdas, slack)
    header = ["lambda", "gap", "phi_star", "n1_star", "n1_low", "n1_high", "residual"]
    table = [[r[h] for h in header] for r in rows]
    config = {
        "command": "region",
        "T": horizon,
        "rho": rho,
        "sigma": sigmas,
        "lambdas": lambdas,
        "slack": slack,
    }
    _emit(args.out, header, table, config)
    return 0


def _cmd_lambda_star(args) -> int:
    file_config = _load_json(args.config) if args.config is not None else {}
    horizon = int(_setting(args, "T", file_config, required=True))
    rho = float(_setting(args, "rho", file_config, default=2.0))
    regime = _setting(args, "regime", file_config, required=True)
    sigma1 = float(_setting(args, "sigma1", file_config, default=0.0))
    sigma2 = float(_setting(args, "sigma2", file_config, required=True))
    thetas = _float_list(_setting(args, "theta", file_config, required=True))
    rows = []
    for theta in thetas:
        lam = A.lambda_star(theta, regime, sigma1, sigma2, rho, horizon)
        rows.append([theta, lam])
    config = {
        "command": "lambda-star",
        "T": horizon,
        "rho": rho,
        "regime": regime,
        "sigma1": sigma1,
        "sigma2": sigma2,
        "theta": thetas,
    }
    _emit(args.out, ["theta", "lambda_star"], rows, config)
    return 0


_POLICY_ALIASES = {
    "ucbv": "UcbV",
    "ucb": "CanonicalUcb",
    "ucbv-oracle": "UcbVOracle",
    "UcbV": "UcbV",
    "CanonicalUcb": "CanonicalUcb",
    "UcbVOracle": "UcbVOracle",
}


def _load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc


def _build_run_config(args) -> M.RunConfig:
    if args.config is not None:
        payload = _load_json(args.config)
        try:
            instance = D.from_json(json.dumps(payload["instance"]))
            pol = payload["policy"]
            policy = PolicyConfig(
                kind=_POLICY_ALIASES.get(pol["kind"], pol["kind"]),
                rho=pol["rho"],
                horizon=pol["horizon"],
                oracle_variances=tuple(pol["oracle_variances"])
                if pol.get("oracle_variances") is not None
                else None,
            )
            reps = payload["repetitions"]
            base_seed = payload["base_seed"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad run config: {exc}") from exc
        if args.reps is not None:
            reps = args.reps
        if args.seed is not None:
            base_seed = args.seed
        return M.RunConfig(
            instance=instance, policy=policy, repetitions=reps, base_seed=base_seed
        )
    if args.T is None or args.sigma is None or args.gap is None:
        raise ConfigError("simulate needs --config or all of --T/--sigma/--gap")
    sigmas = _floats(args.sigma)
    gaps = _gaps_for(sigmas, args.gap)
    dists = []
    mu_opt = E.BASE_MEAN + max(gaps)
    if mu_opt > 1.0:
        raise ConfigError("largest gap pushes the optimal mean past 1")
    for s, g in zip(sigmas, gaps):
        mu = mu_opt - g
        dists.append(D.make_symmetric_two_point(mu, E.clamp_sigma(mu, s)))
    instance = D.make_instance(dists)
    kind = _POLICY_ALIASES.get(args.policy)
    if kind is None:
        raise ConfigError(f"unknown policy {args.policy!r}")
    oracle = None
    if kind == "UcbVOracle":
        oracle = tuple(a.variance for a in instance.arms)
    policy = PolicyConfig(kind=kind, rho=args.rho, horizon=args.T, oracle_variances=oracle)
    return M.RunConfig(
        instance=instance,
        policy=policy,
        repetitions=args.reps if args.reps is not None else 1,
        base_seed=args.seed if args.seed is not None else 0,
    )


def _cmd_simulate(args) -> int:
    config = _build_run_config(args)
    out_dir = _default_out_dir(args.out_dir)
    tag = args.tag if args.tag is not None else f"seed{config.base_seed}"
    path = Path(out_dir) / f"trajectories_{tag}.csv"
    progress = None if args.quiet else _progress_printer()
    workers = args.threads if args.threads is not None else os.cpu_count() or 1
    records = M.run_batch(config, workers=workers, progress=progress)
    comment = {
        "command": "simulate",
        "instance": json.loads(D.to_json(config.instance)),
        "policy": {
            "kind": config.policy.kind,
            "rho": config.policy.rho,
            "horizon": config.policy.horizon,
            "oracle_variances": list(config.policy.oracle_variances)
            if config.policy.oracle_variances is not None
            else None,
        },
        "repetitions": config.repetitions,
        "base_seed": config.base_seed,
    }
    M.write_trajectories(path, records, config=comment)
    print(path)
    return 0


_EXPERIMENTS = {
    "arm-dist": E.exp_arm_distribution,
    "phase-sweep": E.exp_phase_sweep,
    "regret": E.exp_regret,
    "zstat": E.exp_zstat,
    "instability": E.exp_instability,
    "coverage": E.exp_coverage,
    "anticoncentration": E.exp_anticoncentration,
    "kl-check": E.exp_kl_check,
}

# recipes that run batches and accept a worker pool
_THREADED = {"arm-dist", "phase-sweep", "regret", "zstat", "instability"}


def _cmd_exp(args) -> int:
    if args.name not in _EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {args.name!r}; choose from {', '.join(sorted(_EXPERIMENTS))}"
        )
    params = {}
    if args.config is not None:
        params.update(_load_json(args.config))
    if args.seed is not None:
        params["seed"] = args.seed
    if args.reps is not None:
        params["reps"] = args.reps
    params["out_dir"] = _default_out_dir(args.out_dir)
    if args.tag is not None:
        params["tag"] = args.tag
    if args.name in _THREADED:
        params["workers"] = (
            args.threads if args.threads is not None else os.cpu_count() or 1
        )
    if not args.quiet and args.name != "kl-check":
        params["progress"] = _progress_printer()
    func = _EXPERIMENTS[args.name]
    try:
        path = func(**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {args.name}: {exc}") from exc
    print(path)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="ucbvlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("solve", help="solve the pull-count fixed point")
    p.add_argument("--config", default=None, help="JSON with T/rho/sigma/gap")
    p.add_argument("--T", type=int, default=None)
    p.add_argument("--rho", type=float, default=None, help="default 2.0")
    p.add_argument("--sigma", default=None, help="comma-separated per-arm sds")
    p.add_argument("--gap", default=None, help="comma-separated gaps (see module doc)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("region", help="confidence band across an instability-index grid")
    p.add_argument("--config", default=None, help="JSON with T/rho/sigma/lambdas/slack")
    p.add_argument("--T", type=int, default=None)
    p.add_argument("--rho", type=float, default=None, help="default 2.0")
    p.add_argument("--sigma", default=None, help="sigma1,sigma2")
    p.add_argument("--lambdas", default=None, help="comma-separated instability indices")
    p.add_argument("--slack", type=float, default=None, help="default 1/log T")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_region)

    p = sub.add_parser("lambda-star", help="limiting optimal-arm fraction")
    p.add_argument("--config", default=None, help="JSON with theta/regime/sigmas/rho/T")
    p.add_argument("--theta", default=None, help="comma-separated gap scales")
    p.add_argument("--regime", choices=A.LAMBDA_REGIMES, default=None)
    p.add_argument("--sigma1", type=float, default=None, help="default 0.0")
    p.add_argument("--sigma2", type=float, default=None)
    p.add_argument("--rho", type=float, default=None, help="default 2.0")
    p.add_argument("--T", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_lambda_star)

    p = sub.add_parser("simulate", help="run a trajectory batch")
    p.add_argument("--config", default=None, help="RunConfig JSON")
    p.add_argument("--T", type=int, default=None)
    p.add_argument("--rho", type=float, default=2.0)
    p.add_argument("--policy", default="ucbv", help="ucbv | ucb | ucbv-oracle")
    p.add_argument("--sigma", default=None)
    p.add_argument("--gap", default=None)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out-dir", default=None)
    p.add_argument("--tag", default=None)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("exp", help="run a named experiment recipe")
    p.add_argument("name", help=", ".join(sorted(_EXPERIMENTS)))
    p.add_argument("--config", default=None, help="experiment parameter JSON")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out-dir", default=None)
    p.add_argument("--tag", default=None)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=_cmd_exp)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        print(f"ucbvlab: {exc}", file=sys.stderr)
        return 1
    if getattr(args, "func", None) is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"ucbvlab: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        # constructor/validation failures are configuration problems
        print(f"ucbvlab: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure
        print(f"ucbvlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
