"""Annotation-budget power analysis (items N versus responses per item K)."""

from ._core import (
    accuracy,
    calibrate_null,
    comparison_statistic,
    confidence_interval,
    default_k_schedule,
    default_nk_budgets,
    effect_size,
    fit_counts,
    fit_csv,
    generate,
    kl_divergence,
    p_value,
    p_value_against_mean,
    presets,
    resolve_preset,
    run_sweep,
    score_distributions,
    total_variation,
    wins,
    within_item_variance,
)

__all__ = [
    "accuracy",
    "calibrate_null",
    "comparison_statistic",
    "confidence_interval",
    "default_k_schedule",
    "default_nk_budgets",
    "effect_size",
    "fit_counts",
    "fit_csv",
    "generate",
    "kl_divergence",
    "p_value",
    "p_value_against_mean",
    "presets",
    "resolve_preset",
    "run_sweep",
    "score_distributions",
    "total_variation",
    "wins",
    "within_item_variance",
]
