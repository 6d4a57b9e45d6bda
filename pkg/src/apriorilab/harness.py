"""Monte Carlo experiment runner with reproducible per-frame seeding.

Every frame is seeded from SeedSequence((master_seed, point_id,
frame_index)) and frames are processed in fixed-size chunks.  Stopping is
decided strictly in chunk order, so the results for a given config are
bit-identical whether chunks run serially or speculatively on a process
pool.  Kernels hold no state across frames.

Record columns are the same for every scenario.  For jscd/dsc points the
grid value is the mean channel SNR in dB and is stored in the gamma_b_db
column; jscd rows report the mean final reliability estimate in rho_est.
"""

from __future__ import annotations

import dataclasses
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .apriori import reliability_to_llr
from .bounds import (
    PairwiseParams,
    a_factor,
    conv_union_bound,
    db_to_linear,
    pairwise_approx,
    pairwise_chernoff,
    uncoded_exact,
)
from .channel import ChannelConfig, channel_llrs, transmit
from .convolutional import (
    NONRECURSIVE_CODE,
    RECURSIVE_CODE,
    encode,
    enumerate_spectrum,
    viterbi_decode_api,
)
from .jscd import ScenarioConfig, simulate_dsc_frames, simulate_jscd_frames
from .turbo import TurboSpec, build_interleaver, turbo_decode, turbo_encode

__all__ = [
    "ExperimentConfig",
    "BerRecord",
    "run_experiment",
    "evaluate_bounds",
    "emit_csv",
    "parse_csv",
    "emit_bounds_csv",
]

_SCENARIOS = ("bounds", "uncoded", "conv", "turbo", "jscd", "dsc")
_CODES = {"nonrecursive": NONRECURSIVE_CODE, "recursive": RECURSIVE_CODE}
_TUPLE_FIELDS = ("grid_db", "rhos", "rho_ests")


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: a scenario swept over a gamma_b (or SNR) grid.

    rhos and rho_ests are paired per point (rho_ests None means matched
    estimates).  min_bit_errors is the stopping target per point and
    max_bits caps the spend when errors are too rare.
    """

    scenario: str
    grid_db: tuple[float, ...]
    rhos: tuple[float, ...] = (0.9,)
    rho_ests: tuple[float, ...] | None = None
    code: str = "nonrecursive"
    k: int = 1000
    interleaver_kind: str = "random"
    interleaver_seed: int = 0
    punctured: bool = True
    iterations: int = 10
    fading: str = "none"
    min_bit_errors: int = 200
    max_bits: float = 1e8
    chunk_frames: int = 64
    master_seed: int = 12345
    workers: int = 1

    def __post_init__(self) -> None:
        for name in _TUPLE_FIELDS:
            val = getattr(self, name)
            if val is not None and not isinstance(val, tuple):
                object.__setattr__(self, name, tuple(float(v) for v in val))
        if self.scenario not in _SCENARIOS:
            raise ValueError(f"scenario must be one of {_SCENARIOS}")
        if self.code not in _CODES:
            raise ValueError(f"code must be one of {tuple(_CODES)}")
        if not self.grid_db:
            raise ValueError("grid_db must be non-empty")
        if not self.rhos:
            raise ValueError("rhos must be non-empty")
        if self.rho_ests is not None and len(self.rho_ests) != len(self.rhos):
            raise ValueError("rho_ests must pair one estimate per rho")
        if self.min_bit_errors < 50:
            raise ValueError("min_bit_errors below 50 gives meaningless BER points")
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if self.max_bits < self.k:
            raise ValueError("max_bits must cover at least one frame")
        if self.chunk_frames < 1 or self.workers < 1:
            raise ValueError("chunk_frames and workers must be positive")
        if self.iterations < 1:
            raise ValueError("iterations must be positive")

    @staticmethod
    def read_mapping(path) -> dict:
        """Parse a flat key=value file into raw strings; '#' starts a comment."""
        kwargs: dict = {}
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, val = (part.strip() for part in line.split("=", 1))
            kwargs[key] = val
        return kwargs

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        return cls.from_mapping(cls.read_mapping(path))

    @classmethod
    def from_mapping(cls, mapping: dict) -> "ExperimentConfig":
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        kwargs: dict = {}
        for key, val in mapping.items():
            if key not in types:
                raise ValueError(f"unknown config key {key!r}")
            if not isinstance(val, str):
                kwargs[key] = val
                continue
            if key in _TUPLE_FIELDS:
                if val.lower() == "none":
                    kwargs[key] = None
                else:
                    kwargs[key] = tuple(float(v) for v in val.split(","))
            elif key in ("punctured",):
                if val.lower() not in ("true", "false"):
                    raise ValueError(f"{key} must be true or false, got {val!r}")
                kwargs[key] = val.lower() == "true"
            elif key in ("scenario", "code", "interleaver_kind", "fading"):
                kwargs[key] = val
            elif key == "max_bits":
                kwargs[key] = float(val)
            else:
                kwargs[key] = int(val)
        return cls(**kwargs)

    def effective_rho_ests(self) -> tuple[float, ...]:
        return self.rho_ests if self.rho_ests is not None else self.rhos

    def points(self) -> list[tuple[int, float, float, float]]:
        """(point_id, grid_value_db, rho, rho_est) in emission order."""
        out = []
        pid = 0
        for rho, rho_est in zip(self.rhos, self.effective_rho_ests()):
            for g in self.grid_db:
                out.append((pid, g, rho, rho_est))
                pid += 1
        return out


@dataclass(frozen=True)
class BerRecord:
    point_id: int
    gamma_b_db: float
    rho: float
    rho_est: float
    bits_simulated: int
    bit_errors: int
    frame_errors: int
    ber: float
    converged: bool
    seed: int


def _frame_rng(cfg: ExperimentConfig, point_id: int, frame_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence((cfg.master_seed, point_id, frame_index))
    return np.random.default_rng(ss)


def _side_api(rng, info, rho: float, rho_est: float):
    flips = (rng.random(info.shape[0]) < (1.0 - rho)).astype(np.int8)
    side = info ^ flips
    llr = reliability_to_llr(rho_est)
    return llr * (1.0 - 2.0 * side.astype(np.float64))


def _chunk_uncoded(cfg, point_id, gamma_db, rho, rho_est, start, n_frames):
    ch = ChannelConfig(gamma_b_db=gamma_db, rate=1.0, fading=cfg.fading)
    k = cfg.k
    errs = ferrs = 0
    for f in range(start, start + n_frames):
        rng = _frame_rng(cfg, point_id, f)
        info = rng.integers(0, 2, size=k, dtype=np.int8)
        api = _side_api(rng, info, rho, rho_est)
        llr = channel_llrs(transmit(info, ch, rng)) + api
        e = int(np.count_nonzero((llr < 0).astype(np.int8) != info))
        errs += e
        ferrs += e > 0
    return {"bits": n_frames * k, "errs": errs, "ferrs": ferrs, "rho_sum": 0.0}


def _chunk_conv(cfg, point_id, gamma_db, rho, rho_est, start, n_frames):
    code = _CODES[cfg.code]
    ch = ChannelConfig(gamma_b_db=gamma_db, rate=0.5, fading=cfg.fading)
    k = cfg.k
    infos = np.zeros((n_frames, k), dtype=np.int8)
    apis = np.zeros((n_frames, k))
    llrs = None
    for i, f in enumerate(range(start, start + n_frames)):
        rng = _frame_rng(cfg, point_id, f)
        infos[i] = rng.integers(0, 2, size=k, dtype=np.int8)
        apis[i] = _side_api(rng, infos[i], rho, rho_est)
        row = channel_llrs(transmit(encode(code, infos[i]), ch, rng))
        if llrs is None:
            llrs = np.zeros((n_frames, row.shape[0]))
        llrs[i] = row
    hat = viterbi_decode_api(code, llrs, apis, terminated=True)
    per_frame = np.count_nonzero(hat != infos, axis=1)
    return {
        "bits": n_frames * k,
        "errs": int(per_frame.sum()),
        "ferrs": int(np.count_nonzero(per_frame)),
        "rho_sum": 0.0,
    }


def _chunk_turbo(cfg, point_id, gamma_db, rho, rho_est, start, n_frames):
    il = build_interleaver(cfg.interleaver_kind, cfg.k, seed=cfg.interleaver_seed)
    spec = TurboSpec(interleaver=il, punctured=cfg.punctured)
    ch = ChannelConfig(gamma_b_db=gamma_db, rate=spec.rate, fading=cfg.fading)
    k = cfg.k
    infos = np.zeros((n_frames, k), dtype=np.int8)
    apis = np.zeros((n_frames, k))
    llrs = np.zeros((n_frames, spec.n_coded))
    for i, f in enumerate(range(start, start + n_frames)):
        rng = _frame_rng(cfg, point_id, f)
        infos[i] = rng.integers(0, 2, size=k, dtype=np.int8)
        apis[i] = _side_api(rng, infos[i], rho, rho_est)
        llrs[i] = channel_llrs(transmit(turbo_encode(spec, infos[i]), ch, rng))
    hat, _ = turbo_decode(spec, llrs, apis, max_iters=cfg.iterations)
    per_frame = np.count_nonzero(hat != infos, axis=1)
    return {
        "bits": n_frames * k,
        "errs": int(per_frame.sum()),
        "ferrs": int(np.count_nonzero(per_frame)),
        "rho_sum": 0.0,
    }


def _jscd_scenario(cfg: ExperimentConfig, snr_db: float, rho: float) -> ScenarioConfig:
    return ScenarioConfig(
        k=cfg.k,
        rho_source=rho,
        snr_db=snr_db,
        fading=cfg.fading,
        iterations=cfg.iterations,
        interleaver_kind=cfg.interleaver_kind,
        interleaver_seed=cfg.interleaver_seed,
    )


def _chunk_jscd(cfg, point_id, snr_db, rho, rho_est, start, n_frames):
    sc = _jscd_scenario(cfg, snr_db, rho)
    rngs = [_frame_rng(cfg, point_id, f) for f in range(start, start + n_frames)]
    res = simulate_jscd_frames(sc, rngs)
    per_frame = res["bit_errors_x"] + res["bit_errors_y"]
    return {
        "bits": n_frames * 2 * cfg.k,
        "errs": int(per_frame.sum()),
        "ferrs": int(np.count_nonzero(per_frame)),
        "rho_sum": float(res["rho_trajectory"][:, -1].sum()),
    }


def _chunk_dsc(cfg, point_id, snr_db, rho, rho_est, start, n_frames):
    sc = _jscd_scenario(cfg, snr_db, rho)
    rngs = [_frame_rng(cfg, point_id, f) for f in range(start, start + n_frames)]
    res = simulate_dsc_frames(sc, rngs)
    per_frame = res["bit_errors_x"] + res["bit_errors_y"]
    return {
        "bits": n_frames * 2 * cfg.k,
        "errs": int(per_frame.sum()),
        "ferrs": int(np.count_nonzero(per_frame)),
        "rho_sum": rho_est * n_frames,
    }


_CHUNK_FNS = {
    "uncoded": _chunk_uncoded,
    "conv": _chunk_conv,
    "turbo": _chunk_turbo,
    "jscd": _chunk_jscd,
    "dsc": _chunk_dsc,
}


def _simulate_chunk(cfg, point_id, grid_db, rho, rho_est, start, n_frames):
    """Top-level so process pools can pickle it."""
    return _CHUNK_FNS[cfg.scenario](cfg, point_id, grid_db, rho, rho_est, start, n_frames)


def _finish_point(cfg, pid, grid_db, rho, rho_est, bits, errs, ferrs, rho_sum, frames):
    if cfg.scenario == "jscd" and frames > 0:
        rho_out = rho_sum / frames
    else:
        rho_out = rho_est
    return BerRecord(
        point_id=pid,
        gamma_b_db=grid_db,
        rho=rho,
        rho_est=rho_out,
        bits_simulated=bits,
        bit_errors=errs,
        frame_errors=ferrs,
        ber=errs / bits if bits else 0.0,
        converged=errs >= cfg.min_bit_errors,
        seed=cfg.master_seed,
    )


def _run_point_serial(cfg, pid, grid_db, rho, rho_est) -> BerRecord:
    bits = errs = ferrs = frames = 0
    rho_sum = 0.0
    chunk = 0
    while True:
        res = _simulate_chunk(cfg, pid, grid_db, rho, rho_est, chunk * cfg.chunk_frames, cfg.chunk_frames)
        bits += res["bits"]
        errs += res["errs"]
        ferrs += res["ferrs"]
        rho_sum += res["rho_sum"]
        frames += cfg.chunk_frames
        chunk += 1
        if errs >= cfg.min_bit_errors or bits >= cfg.max_bits:
            break
    return _finish_point(cfg, pid, grid_db, rho, rho_est, bits, errs, ferrs, rho_sum, frames)


def _run_point_pool(pool, cfg, pid, grid_db, rho, rho_est) -> BerRecord:
    # speculative chunks; results folded in strictly by chunk index, so
    # extra completed chunks are simply discarded and cannot change stats
    window = cfg.workers + 2
    futures: dict[int, object] = {}
    next_chunk = 0

    def submit():
        nonlocal next_chunk
        futures[next_chunk] = pool.submit(
            _simulate_chunk, cfg, pid, grid_db, rho, rho_est,
            next_chunk * cfg.chunk_frames, cfg.chunk_frames,
        )
        next_chunk += 1

    for _ in range(window):
        submit()
    bits = errs = ferrs = frames = 0
    rho_sum = 0.0
    consume = 0
    try:
        while True:
            res = futures.pop(consume).result()
            consume += 1
            bits += res["bits"]
            errs += res["errs"]
            ferrs += res["ferrs"]
            rho_sum += res["rho_sum"]
            frames += cfg.chunk_frames
            if errs >= cfg.min_bit_errors or bits >= cfg.max_bits:
                break
            submit()
    finally:
        for fut in futures.values():
            fut.cancel()
        futures.clear()
    return _finish_point(cfg, pid, grid_db, rho, rho_est, bits, errs, ferrs, rho_sum, frames)


def run_experiment(cfg: ExperimentConfig) -> list[BerRecord]:
    """Run every point of a Monte Carlo scenario; see module docstring."""
    if cfg.scenario == "bounds":
        raise ValueError("analytic scenario: use evaluate_bounds")
    points = cfg.points()
    if cfg.workers <= 1:
        return [_run_point_serial(cfg, *pt) for pt in points]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        return [_run_point_pool(pool, cfg, *pt) for pt in points]


BOUND_FIELDS = ("gamma_b_db", "p_exact", "p_approx", "p_chernoff", "bound_name", "rho", "rho_est")


def evaluate_bounds(cfg: ExperimentConfig) -> list[dict]:
    """Analytic curves for the config grid: uncoded and the union bound."""
    code = _CODES[cfg.code]
    spectrum = enumerate_spectrum(code, d_max=16, w_max=12)
    rows = []
    for rho, rho_est in zip(cfg.rhos, cfg.effective_rho_ests()):
        A = a_factor(rho, rho_est)
        for g in cfg.grid_db:
            gamma = db_to_linear(g)
            p1 = PairwiseParams(d=1, w=1, r=1.0, gamma_b=gamma)
            rows.append({
                "gamma_b_db": g,
                "p_exact": uncoded_exact(gamma, rho, rho_est),
                "p_approx": pairwise_approx(p1, A),
                "p_chernoff": pairwise_chernoff(p1, A),
                "bound_name": "uncoded",
                "rho": rho,
                "rho_est": rho_est,
            })
        for g in cfg.grid_db:
            gamma = db_to_linear(g)
            rows.append({
                "gamma_b_db": g,
                "p_exact": conv_union_bound(spectrum, 0.5, gamma, rho, rho_est, mode="exact"),
                "p_approx": conv_union_bound(spectrum, 0.5, gamma, rho, rho_est, mode="approx"),
                "p_chernoff": conv_union_bound(spectrum, 0.5, gamma, rho, rho_est, mode="chernoff"),
                "bound_name": f"conv_{cfg.code}",
                "rho": rho,
                "rho_est": rho_est,
            })
    return rows


def _fmt(value) -> str:
    if isinstance(value, bool) or isinstance(value, np.bool_):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def emit_csv(records: list[BerRecord], path_or_file) -> None:
    """Write records; floats use repr-exact formatting for round-trips."""
    fields = [f.name for f in dataclasses.fields(BerRecord)]
    lines = [",".join(fields)]
    for rec in records:
        lines.append(",".join(_fmt(getattr(rec, name)) for name in fields))
    text = "\n".join(lines) + "\n"
    if isinstance(path_or_file, (str, os.PathLike)):
        Path(path_or_file).write_text(text)
    else:
        path_or_file.write(text)


def parse_csv(path_or_file) -> list[BerRecord]:
    if isinstance(path_or_file, (str, os.PathLike)):
        text = Path(path_or_file).read_text()
    else:
        text = path_or_file.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    fields = [f.name for f in dataclasses.fields(BerRecord)]
    if not lines or lines[0].split(",") != fields:
        raise ValueError("unrecognized CSV header")
    casts = {
        "point_id": int, "gamma_b_db": float, "rho": float, "rho_est": float,
        "bits_simulated": int, "bit_errors": int, "frame_errors": int,
        "ber": float, "converged": lambda s: s == "true", "seed": int,
    }
    out = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(fields):
            raise ValueError(f"malformed CSV row: {ln!r}")
        out.append(BerRecord(**{name: casts[name](val) for name, val in zip(fields, parts)}))
    return out


def emit_bounds_csv(rows: list[dict], path_or_file) -> None:
    lines = [",".join(BOUND_FIELDS)]
    for row in rows:
        lines.append(",".join(_fmt(row[name]) for name in BOUND_FIELDS))
    text = "\n".join(lines) + "\n"
    if isinstance(path_or_file, (str, os.PathLike)):
        Path(path_or_file).write_text(text)
    else:
        path_or_file.write(text)
