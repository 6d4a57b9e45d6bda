"""Command line front end.

Subcommands mirror the library layers: analytic bound tables, code
spectra, the four Monte Carlo scenarios, and named figure recipes.
Simulation flags override values from --config files; every run is fully
determined by the printed config plus the master seed.
"""

from __future__ import annotations

import argparse
import sys

from .convolutional import NONRECURSIVE_CODE, RECURSIVE_CODE, enumerate_spectrum, free_distance
from .harness import (
    ExperimentConfig,
    emit_bounds_csv,
    emit_csv,
    evaluate_bounds,
    run_experiment,
)
from .recipes import figure_recipes, run_recipe

_CODE_OBJS = {"nonrecursive": NONRECURSIVE_CODE, "recursive": RECURSIVE_CODE}

_DEFAULT_GRIDS = {
    "bounds": "0,0.5,1,1.5,2,2.5,3,3.5,4,4.5,5,5.5,6,6.5,7,7.5,8",
    "uncoded": "0,1,2,3,4,5,6,7,8,9",
    "conv": "0,1,2,3,4,5,6,7",
    "turbo": "0.5,1,1.5,2,2.5",
    "jscd": "0.5,1,1.5,2,2.5,3",
    "dsc": "0.5,1,1.5,2,2.5,3",
}


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value config file; flags override it")
    p.add_argument("--grid", help="comma separated gamma_b (or SNR) grid in dB")
    p.add_argument("--rhos", help="comma separated true reliabilities")
    p.add_argument("--rho-ests", help="comma separated estimated reliabilities (default: match rhos)")
    p.add_argument("--code", choices=sorted(_CODE_OBJS))
    p.add_argument("--k", type=int, help="information bits per frame")
    p.add_argument("--interleaver", choices=("random", "s_random"), dest="interleaver_kind")
    p.add_argument("--interleaver-seed", type=int)
    p.add_argument("--punctured", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--iterations", type=int, help="decoder iterations per frame")
    p.add_argument("--fading", choices=("none", "block_rayleigh"))
    p.add_argument("--min-bit-errors", type=int)
    p.add_argument("--max-bits", type=float)
    p.add_argument("--chunk-frames", type=int)
    p.add_argument("--seed", type=int, help="master seed", dest="master_seed")
    p.add_argument("--workers", type=int)


_FLAG_KEYS = (
    ("grid", "grid_db"),
    ("rhos", "rhos"),
    ("rho_ests", "rho_ests"),
    ("code", "code"),
    ("k", "k"),
    ("interleaver_kind", "interleaver_kind"),
    ("interleaver_seed", "interleaver_seed"),
    ("punctured", "punctured"),
    ("iterations", "iterations"),
    ("fading", "fading"),
    ("min_bit_errors", "min_bit_errors"),
    ("max_bits", "max_bits"),
    ("chunk_frames", "chunk_frames"),
    ("master_seed", "master_seed"),
    ("workers", "workers"),
)


def _config_from_args(args, scenario: str) -> ExperimentConfig:
    mapping: dict = {}
    if args.config:
        mapping.update(ExperimentConfig.read_mapping(args.config))
    for attr, key in _FLAG_KEYS:
        val = getattr(args, attr, None)
        if val is not None:
            mapping[key] = val
    mapping["scenario"] = scenario
    mapping.setdefault("grid_db", _DEFAULT_GRIDS[scenario])
    return ExperimentConfig.from_mapping(mapping)


def _out_stream(args):
    if args.out:
        return open(args.out, "w")
    return sys.stdout


def _cmd_bounds(args) -> int:
    cfg = _config_from_args(args, "bounds")
    rows = evaluate_bounds(cfg)
    stream = _out_stream(args)
    try:
        emit_bounds_csv(rows, stream)
    finally:
        if stream is not sys.stdout:
            stream.close()
    return 0


def _cmd_spectrum(args) -> int:
    code = _CODE_OBJS[args.code or "nonrecursive"]
    spectrum = enumerate_spectrum(code, d_max=args.d_max, w_max=args.w_max)
    d_free, w_free = free_distance(code)
    print(f"# free distance {d_free} at input weight {w_free}", file=sys.stderr)
    lines = ["w,d,beta"] + [f"{w},{d},{beta}" for w, d, beta in spectrum.records]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _make_sim_cmd(scenario: str):
    def run(args) -> int:
        actual = scenario
        if scenario == "jscd" and getattr(args, "baseline", False):
            actual = "dsc"
        cfg = _config_from_args(args, actual)
        records = run_experiment(cfg)
        stream = _out_stream(args)
        try:
            emit_csv(records, stream)
        finally:
            if stream is not sys.stdout:
                stream.close()
        return 0

    return run


def _cmd_recipe(args) -> int:
    recipes = figure_recipes()
    if args.name == "list":
        for name in sorted(recipes):
            print(f"{name}: {recipes[name].description}")
        return 0
    if args.name not in recipes:
        print(f"error: unknown recipe {args.name!r}; try 'recipe list'", file=sys.stderr)
        return 1
    written = run_recipe(recipes[args.name], args.out, master_seed=args.master_seed,
                         workers=args.workers)
    for path in written:
        print(path)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="apriorilab",
        description="Error bounds and decoding simulations with a-priori information",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="analytic BER bound tables")
    _add_config_flags(p)
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("spectrum", help="code distance spectrum")
    p.add_argument("--code", choices=sorted(_CODE_OBJS), default="nonrecursive")
    p.add_argument("--d-max", type=int, default=16)
    p.add_argument("--w-max", type=int, default=12)
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.set_defaults(func=_cmd_spectrum)

    for scenario, help_text in (
        ("uncoded", "uncoded transmission with side information"),
        ("conv", "convolutional code with API-aware Viterbi decoding"),
        ("turbo", "punctured turbo code with API-aware iterative decoding"),
        ("jscd", "joint decoding of two correlated sources"),
    ):
        p = sub.add_parser(f"{scenario}-sim", help=help_text)
        _add_config_flags(p)
        p.add_argument("--out", help="output CSV path (default stdout)")
        if scenario == "jscd":
            p.add_argument("--baseline", action="store_true",
                           help="run the separate-decoding baseline instead")
        p.set_defaults(func=_make_sim_cmd(scenario))

    p = sub.add_parser("recipe", help="run a named figure recipe ('list' to enumerate)")
    p.add_argument("name")
    p.add_argument("--out", default="recipe_out", help="output directory")
    p.add_argument("--seed", type=int, dest="master_seed")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=_cmd_recipe)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
