"""Command-line front end.

Subcommands: ``offline``, ``greedy``, ``hybrid`` run one planner over
profile CSVs; ``experiment`` regenerates a whole study.  Exit codes:
0 success, 2 validation/input error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .experiments import EXPERIMENT_IDS, default_spec, run_experiment, write_result
from .greedy import MODES, GammaOutOfRange, run_greedy
from .hybrid import DecomposedProfile, run_hybrid_stream
from .lp import SolverError
from .model import ModelError, SystemParams, save_trajectory, total_cost
from .offline import plan_offline
from .profiles import ParseError, add_gaussian_noise, load_profile

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, default=0.9,
                        help="storage efficiency in [0, 1]")
    parser.add_argument("--beta", type=float, default=0.8,
                        help="transfer efficiency in [0, 1]")
    parser.add_argument("--smax", type=float, default=None,
                        help="per-BS storage capacity (default 1.0; for "
                             "experiments: a one-point storage grid)")
    parser.add_argument("--n", type=int, default=None,
                        help="horizon override (defaults to profile length)")
    parser.add_argument("--seed", type=int, default=0,
                        help="noise seed where applicable")
    parser.add_argument("--gamma", type=float, default=None,
                        help="storage price of the one-slot LP oracle "
                             "(default alpha*beta/2; recorded in metadata)")
    parser.add_argument("--out", type=Path, default=None,
                        help="output CSV path (default: stdout summary only)")


def _params(args, n_slots: int) -> SystemParams:
    n = args.n if args.n is not None else n_slots
    if n != n_slots:
        raise ValueError(
            f"--n {n} does not match the profile length {n_slots}")
    s_max = args.smax if args.smax is not None else 1.0
    return SystemParams(args.alpha, args.beta, s_max, n)


def _emit(traj, profile, args, with_cases: bool = False) -> None:
    print(f"slots={traj.n_slots} total_cost={total_cost(traj):.9g}")
    if args.out is not None:
        save_trajectory(traj, profile, args.out, with_cases=with_cases)
        print(f"wrote {args.out}")


def _cmd_offline(args) -> int:
    profile = load_profile(args.profile)
    traj = plan_offline(_params(args, profile.n_slots), profile)
    _emit(traj, profile, args)
    return EXIT_OK


def _cmd_greedy(args) -> int:
    profile = load_profile(args.profile)
    traj = run_greedy(_params(args, profile.n_slots), profile,
                      mode=args.mode)
    _emit(traj, profile, args, with_cases=args.debug_cases)
    return EXIT_OK


def _cmd_hybrid(args) -> int:
    deterministic = load_profile(args.det)
    if args.realized is not None:
        realized = load_profile(args.realized)
    else:
        realized = add_gaussian_noise(deterministic, args.noise_scale,
                                      args.seed)
    decomposed = DecomposedProfile(deterministic, realized)
    params = _params(args, deterministic.n_slots)
    result = run_hybrid_stream(
        params, deterministic,
        zip(decomposed.realized.e1, decomposed.realized.e2))
    _emit(result.combined, realized, args, with_cases=args.debug_components)
    if args.debug_components and args.out is not None:
        off_path = args.out.with_suffix(".offline.csv")
        gre_path = args.out.with_suffix(".greedy.csv")
        save_trajectory(result.offline, deterministic, off_path)
        save_trajectory(result.greedy, result.greedy_profile, gre_path,
                        with_cases=True)
        print(f"wrote {off_path} and {gre_path}")
    return EXIT_OK


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(","))


def _cmd_experiment(args) -> int:
    overrides: dict = {}
    if args.thetas:
        overrides["thetas"] = _floats(args.thetas)
    if args.smax_grid:
        overrides["s_max_grid"] = _floats(args.smax_grid)
    elif args.smax is not None:
        overrides["s_max_grid"] = (args.smax,)
    if args.seeds:
        overrides["seeds"] = tuple(int(v) for v in args.seeds.split(","))
    if args.n is not None:
        overrides["n_slots"] = args.n
    overrides.update(alpha=args.alpha, beta=args.beta, gamma=args.gamma,
                     out_path=str(args.out))
    spec = default_spec(args.id, **overrides)
    workers = 1 if args.serial else args.workers
    result = run_experiment(spec, workers=workers)
    write_result(result)
    print(f"wrote {args.out} ({len(result.rows)} rows)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="energycoop",
        description="Energy cooperation planners for two base stations")
    sub = parser.add_subparsers(dest="command", required=True)

    p_off = sub.add_parser("offline", help="full-knowledge two-stage plan")
    p_off.add_argument("--profile", type=Path, required=True,
                       help="net-energy profile CSV")
    _add_common(p_off)
    p_off.set_defaults(fn=_cmd_offline)

    p_gre = sub.add_parser("greedy", help="online greedy rollout")
    p_gre.add_argument("--profile", type=Path, required=True)
    p_gre.add_argument("--mode", choices=MODES, default="standard")
    p_gre.add_argument("--debug-cases", action="store_true",
                       help="append the per-slot decision case column")
    _add_common(p_gre)
    p_gre.set_defaults(fn=_cmd_greedy)

    p_hyb = sub.add_parser("hybrid", help="offline plan plus greedy residual")
    p_hyb.add_argument("--det", type=Path, required=True,
                       help="deterministic component CSV")
    p_hyb.add_argument("--realized", type=Path, default=None,
                       help="realized profile CSV (default: add noise)")
    p_hyb.add_argument("--noise-scale", type=float, default=0.125)
    p_hyb.add_argument("--debug-components", action="store_true",
                       help="also write the offline and greedy components")
    _add_common(p_hyb)
    p_hyb.set_defaults(fn=_cmd_hybrid)

    p_exp = sub.add_parser("experiment", help="regenerate a study CSV")
    p_exp.add_argument("id", choices=EXPERIMENT_IDS)
    p_exp.add_argument("--thetas", default=None,
                       help="comma-separated theta grid (radians)")
    p_exp.add_argument("--smax-grid", default=None,
                       help="comma-separated storage grid")
    p_exp.add_argument("--seeds", default=None,
                       help="comma-separated noise seeds")
    p_exp.add_argument("--workers", type=int, default=None)
    p_exp.add_argument("--serial", action="store_true",
                       help="single-threaded debug mode")
    _add_common(p_exp)
    p_exp.set_defaults(fn=_cmd_experiment)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "experiment" and args.out is None:
        parser.error("experiment requires --out")
    try:
        return args.fn(args)
    except (ValueError, ModelError, ParseError, GammaOutOfRange,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
