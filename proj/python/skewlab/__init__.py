"""Skew products with hyperbolic fibers on the 2-torus.

Exact simulation of rotation- and Sturmian-driven systems, a constructive
shadowing solver for orbit specifications, separated-set entropy estimators,
and the orbit-gluing constructions of oscillating (historic) points.
"""

from skewlab._core import (  # noqa: F401
    NumericsContext,
    Specification,
    SkewSystem,
    affine_system,
    birkhoff_trace,
    bowen_distance,
    cocycle_system,
    construct_dense_variant,
    construct_irregular,
    deviation_count,
    eigen_split,
    entropy_rate,
    gap_function,
    iterate,
    lyapunov_exponent,
    max_separated,
    solve_specification,
    sturmian_word,
    verify_shadowing,
)

__all__ = [
    "NumericsContext",
    "Specification",
    "SkewSystem",
    "affine_system",
    "birkhoff_trace",
    "bowen_distance",
    "cocycle_system",
    "construct_dense_variant",
    "construct_irregular",
    "deviation_count",
    "eigen_split",
    "entropy_rate",
    "gap_function",
    "iterate",
    "lyapunov_exponent",
    "max_separated",
    "solve_specification",
    "sturmian_word",
    "verify_shadowing",
]
