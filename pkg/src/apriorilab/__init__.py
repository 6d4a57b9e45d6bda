"""Channel coding with a-priori information: bounds, decoders, experiments.

The package follows one LLR convention throughout: natural-log ratios
ln(P(bit=0) / P(bit=1)), so positive values favor bit 0 and hard
decisions are bit = (llr < 0).
"""

from .apriori import (
    Reliability,
    SideInfo,
    a_factor,
    apriori_llrs,
    estimate_correlation,
    generate_side_info,
    reliability_to_llr,
)
from .bounds import (
    BoundCurve,
    PairwiseParams,
    ber_crossing_db,
    conv_union_bound,
    cutoff_threshold,
    db_to_linear,
    design_metric,
    eta_factor,
    invert_bound_for_gamma,
    linear_to_db,
    pairwise_approx,
    pairwise_chernoff,
    pairwise_exact,
    r1_rate,
    random_code_bound,
    slepian_wolf_rates,
    turbo_error_floor,
    uncoded_exact,
    union_floor_from_spectrum,
)
from .channel import ChannelConfig, ReceivedFrame, channel_llrs, transmit
from .convolutional import (
    NONRECURSIVE_CODE,
    RECURSIVE_CODE,
    TURBO_CONSTITUENT,
    CodeSpec,
    Trellis,
    WeightSpectrum,
    build_trellis,
    encode,
    encode_with_tail,
    enumerate_spectrum,
    free_distance,
    viterbi_decode_api,
)
from .harness import (
    BOUND_FIELDS,
    BerRecord,
    ExperimentConfig,
    emit_bounds_csv,
    emit_csv,
    evaluate_bounds,
    parse_csv,
    run_experiment,
)
from .jscd import (
    JscdResult,
    ScenarioConfig,
    diversity_slope,
    run_dsc_baseline,
    run_jscd_frame,
    simulate_dsc_frames,
    simulate_jscd_frames,
)
from .recipes import Recipe, figure_recipes, run_recipe
from .turbo import (
    DecoderState,
    Interleaver,
    TurboSpec,
    bcjr_decode,
    build_interleaver,
    enumerate_turbo_floor_spectrum,
    turbo_decode,
    turbo_encode,
)

__version__ = "0.1.0"

__all__ = [
    "Reliability", "SideInfo", "a_factor", "apriori_llrs", "estimate_correlation",
    "generate_side_info", "reliability_to_llr",
    "BoundCurve", "PairwiseParams", "ber_crossing_db", "conv_union_bound",
    "cutoff_threshold", "db_to_linear", "design_metric", "eta_factor",
    "invert_bound_for_gamma", "linear_to_db", "pairwise_approx", "pairwise_chernoff",
    "pairwise_exact", "r1_rate", "random_code_bound", "slepian_wolf_rates",
    "turbo_error_floor", "uncoded_exact", "union_floor_from_spectrum",
    "ChannelConfig", "ReceivedFrame", "channel_llrs", "transmit",
    "NONRECURSIVE_CODE", "RECURSIVE_CODE", "TURBO_CONSTITUENT", "CodeSpec", "Trellis",
    "WeightSpectrum", "build_trellis", "encode", "encode_with_tail",
    "enumerate_spectrum", "free_distance", "viterbi_decode_api",
    "BOUND_FIELDS", "BerRecord", "ExperimentConfig", "emit_bounds_csv", "emit_csv",
    "evaluate_bounds", "parse_csv", "run_experiment",
    "JscdResult", "ScenarioConfig", "diversity_slope", "run_dsc_baseline",
    "run_jscd_frame", "simulate_dsc_frames", "simulate_jscd_frames",
    "Recipe", "figure_recipes", "run_recipe",
    "DecoderState", "Interleaver", "TurboSpec", "bcjr_decode", "build_interleaver",
    "enumerate_turbo_floor_spectrum", "turbo_decode", "turbo_encode",
    "__version__",
]
