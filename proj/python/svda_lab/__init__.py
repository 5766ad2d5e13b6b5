"""Spectral attention laboratory: deterministic toy depth transformer core.

Everything here is implemented in C++ and exposed through the `_core`
extension; this package is a thin, stable import surface over it.
"""

from svda_lab._core import (
    SvdaError,
    baseline_attention,
    compute_metrics,
    effective_rank,
    generate_scene,
    l2_normalize_rows,
    model_param_count,
    selectivity,
    softmax_rows,
    spectral_entropy,
    spectral_sparsity,
    svda_attention,
)

__all__ = [
    "SvdaError",
    "baseline_attention",
    "compute_metrics",
    "effective_rank",
    "generate_scene",
    "l2_normalize_rows",
    "model_param_count",
    "selectivity",
    "softmax_rows",
    "spectral_entropy",
    "spectral_sparsity",
    "svda_attention",
]
