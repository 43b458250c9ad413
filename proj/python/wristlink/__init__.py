"""Python bindings for the wristlink C++ library."""

from ._core import (
    WristlinkError,
    audible_distance,
    beta,
    binom_tail,
    clock_page,
    cluster_symbols,
    decode_haptic,
    dtheta_dalpha,
    encode_haptic,
    extract_features,
    feature_names,
    log10_binom_tail,
    log10_mu,
    prefers_attack,
    render_clock,
    run_pipeline,
    simulate_exam,
    synth_symbol,
    theta_threshold,
)

__all__ = [
    "WristlinkError",
    "audible_distance",
    "beta",
    "binom_tail",
    "clock_page",
    "cluster_symbols",
    "decode_haptic",
    "dtheta_dalpha",
    "encode_haptic",
    "extract_features",
    "feature_names",
    "log10_binom_tail",
    "log10_mu",
    "prefers_attack",
    "render_clock",
    "run_pipeline",
    "simulate_exam",
    "synth_symbol",
    "theta_threshold",
]
