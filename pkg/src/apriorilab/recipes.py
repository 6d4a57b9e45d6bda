"""Named experiment presets bundling simulation configs and analytic curves.

Each recipe reproduces one figure-style study at desk scale: the grids
are coarse and the stopping targets modest so a full recipe runs in
minutes.  Tighten min_bit_errors / max_bits via dataclasses.replace for
publication-grade curves.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

from scipy.special import erfcinv

from .bounds import (
    a_factor,
    conv_union_bound,
    cutoff_threshold,
    db_to_linear,
    eta_factor,
    invert_bound_for_gamma,
    turbo_error_floor,
)
from .convolutional import NONRECURSIVE_CODE, RECURSIVE_CODE, enumerate_spectrum
from .harness import (
    ExperimentConfig,
    emit_bounds_csv,
    emit_csv,
    evaluate_bounds,
    run_experiment,
)

__all__ = ["Recipe", "figure_recipes", "run_recipe", "delta_p_conv_db", "delta_p_floor_db", "delta_p_random_coding_db"]

_CODE_OBJS = {"nonrecursive": NONRECURSIVE_CODE, "recursive": RECURSIVE_CODE}


def delta_p_conv_db(code: str, rho: float, rho_est: float, target: float = 1e-4) -> float:
    """Power gain of the API in dB at a target union-bound BER.

    Ratio of the gamma_b needed without side information (A = 1, read off
    the same bound at rho = 0.5) to the gamma_b needed with it.
    """
    spectrum = enumerate_spectrum(_CODE_OBJS[code], d_max=16, w_max=12)

    def with_api(g: float) -> float:
        return conv_union_bound(spectrum, 0.5, g, rho, rho_est, mode="exact")

    def without(g: float) -> float:
        return conv_union_bound(spectrum, 0.5, g, 0.5, 0.5, mode="exact")

    g_api = invert_bound_for_gamma(with_api, target)
    g_no = invert_bound_for_gamma(without, target)
    return 10.0 * math.log10(g_no / g_api)


def delta_p_floor_db(k: int, rho: float, rho_est: float, target: float = 1e-5,
                     d2t: int = 8, r: float = 0.5) -> float:
    """API power gain on the turbo error floor, solved in closed form."""
    A = a_factor(rho, rho_est)

    def gamma_for(a_val: float) -> float:
        arg = target * k / (2.0 * a_val**2)
        if not 0.0 < arg < 2.0:
            raise ValueError("target not reachable on the floor formula")
        return float(erfcinv(arg)) ** 2 / (r * d2t)

    return 10.0 * math.log10(gamma_for(1.0) / gamma_for(A))


def delta_p_random_coding_db(rho: float, rho_est: float, r: float = 0.5) -> float:
    """API power gain of the random-coding cutoff threshold."""
    eta = eta_factor(a_factor(rho, rho_est))
    return 10.0 * math.log10(cutoff_threshold(r, 0.0) / cutoff_threshold(r, eta))


@dataclass(frozen=True)
class Recipe:
    """Outputs: (filename, config) pairs plus named analytic tables."""

    name: str
    description: str
    simulations: tuple = ()
    bound_tables: tuple = ()
    analytic_tables: tuple = ()  # (filename, header, row_fn) triples


def _write_table(path: Path, header: tuple[str, ...], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format(v, ".17g") if isinstance(v, float) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def run_recipe(recipe: Recipe, out_dir, master_seed: int | None = None,
               workers: int | None = None) -> list[Path]:
    """Run every part of a recipe, writing CSVs under out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for fname, cfg in recipe.simulations:
        if master_seed is not None:
            cfg = dataclasses.replace(cfg, master_seed=master_seed)
        if workers is not None:
            cfg = dataclasses.replace(cfg, workers=workers)
        records = run_experiment(cfg)
        path = out / fname
        emit_csv(records, path)
        written.append(path)
    for fname, cfg in recipe.bound_tables:
        path = out / fname
        emit_bounds_csv(evaluate_bounds(cfg), path)
        written.append(path)
    for fname, header, row_fn in recipe.analytic_tables:
        path = out / fname
        _write_table(path, header, row_fn())
        written.append(path)
    return written


def _rho_est_grid() -> tuple[float, ...]:
    return tuple(round(0.55 + 0.02 * i, 2) for i in range(23))  # 0.55 .. 0.99


def _delta_p_fig8_rows(rhos: tuple[float, ...], ks: tuple[int, ...]):
    def rows():
        for rho in rhos:
            for re_ in _rho_est_grid():
                for k in ks:
                    yield (rho, re_, k, delta_p_floor_db(k, rho, re_))
                yield (rho, re_, 0, delta_p_random_coding_db(rho, re_))  # k=0: ensemble limit
    return rows


def _turbo_floor_rows(rhos: tuple[float, ...], grid_db: tuple[float, ...],
                      k: int, d2t: int):
    def rows():
        for rho in rhos:
            A = a_factor(rho, rho)
            for g in grid_db:
                yield (g, rho, k, d2t, turbo_error_floor(k, 0.5, db_to_linear(g), d2t, A))
    return rows


def _conv_fig(num: int, rho: float) -> Recipe:
    grid = tuple(float(g) for g in range(0, 8))
    fine = tuple(0.5 * i for i in range(0, 17))
    mc = ExperimentConfig(
        scenario="conv", code="nonrecursive", grid_db=grid, rhos=(rho,),
        k=1000, min_bit_errors=200, max_bits=2e6,
    )
    bounds = ExperimentConfig(
        scenario="bounds", code="nonrecursive", grid_db=fine, rhos=(rho,),
    )
    return Recipe(
        name=f"fig{num}",
        description=f"Convolutional code BER vs gamma_b with side information, rho={rho}",
        simulations=((f"fig{num}_sim.csv", mc),),
        bound_tables=((f"fig{num}_bounds.csv", bounds),),
    )


def figure_recipes() -> dict[str, Recipe]:
    recipes: dict[str, Recipe] = {}

    uncoded = ExperimentConfig(
        scenario="uncoded", grid_db=tuple(float(g) for g in range(0, 10)),
        rhos=(0.5, 0.7, 0.9, 0.95), k=10000, min_bit_errors=200, max_bits=2e6,
    )
    uncoded_bounds = ExperimentConfig(
        scenario="bounds", grid_db=tuple(0.5 * i for i in range(0, 21)),
        rhos=(0.5, 0.7, 0.9, 0.95),
    )
    recipes["fig1"] = Recipe(
        name="fig1",
        description="Uncoded BER vs gamma_b for several reliabilities",
        simulations=(("fig1_sim.csv", uncoded),),
        bound_tables=(("fig1_bounds.csv", uncoded_bounds),),
    )

    for num, rho in ((2, 0.7), (3, 0.8), (4, 0.9), (5, 0.95)):
        recipes[f"fig{num}"] = _conv_fig(num, rho)

    recipes["fig6"] = Recipe(
        name="fig6",
        description="API power gain vs estimated reliability, union bound at 1e-4",
        analytic_tables=(
            ("fig6_delta_p.csv", ("code", "rho", "rho_est", "delta_p_db"),
             _delta_p_conv_rows_all()),
        ),
    )

    turbo_grid = tuple(0.5 + 0.25 * i for i in range(0, 9))
    turbo_common = dict(
        scenario="turbo", grid_db=turbo_grid, rhos=(0.5, 0.9), k=1000,
        iterations=10, min_bit_errors=100, max_bits=2e6,
    )
    recipes["fig7"] = Recipe(
        name="fig7",
        description="Punctured turbo BER with API, random and S-random interleavers",
        simulations=(
            ("fig7_random.csv", ExperimentConfig(interleaver_kind="random", **turbo_common)),
            ("fig7_srandom.csv", ExperimentConfig(interleaver_kind="s_random", **turbo_common)),
        ),
        analytic_tables=(
            ("fig7_floors.csv", ("gamma_b_db", "rho", "k", "d2t", "floor"),
             _turbo_floor_rows((0.5, 0.9), turbo_grid, 1000, 8)),
        ),
    )

    recipes["fig8"] = Recipe(
        name="fig8",
        description="API power gain on the turbo floor at 1e-5 vs estimated reliability",
        analytic_tables=(
            ("fig8_delta_p.csv", ("rho", "rho_est", "k", "delta_p_db"),
             _delta_p_fig8_rows((0.7, 0.9), (100, 1000, 100000))),
        ),
    )

    awgn_grid = tuple(0.5 + 0.5 * i for i in range(0, 6))
    ray_grid = tuple(float(g) for g in range(9, 31, 3))
    jscd_common = dict(rhos=(0.939,), k=1000, min_bit_errors=100, max_bits=2e6)
    recipes["fig9"] = Recipe(
        name="fig9",
        description="Joint source-channel decoding vs separate decoding, AWGN and block fading",
        simulations=(
            ("fig9_jscd_awgn.csv", ExperimentConfig(scenario="jscd", grid_db=awgn_grid, **jscd_common)),
            ("fig9_dsc_awgn.csv", ExperimentConfig(scenario="dsc", grid_db=awgn_grid, **jscd_common)),
            ("fig9_jscd_rayleigh.csv", ExperimentConfig(
                scenario="jscd", grid_db=ray_grid, fading="block_rayleigh", **jscd_common)),
            ("fig9_dsc_rayleigh.csv", ExperimentConfig(
                scenario="dsc", grid_db=ray_grid, fading="block_rayleigh", **jscd_common)),
        ),
    )
    return recipes


def _delta_p_conv_rows_all():
    def rows():
        for code in ("recursive", "nonrecursive"):
            for rho in (0.7, 0.9):
                for re_ in _rho_est_grid():
                    yield (code, rho, re_, delta_p_conv_db(code, rho, re_))
    return rows
