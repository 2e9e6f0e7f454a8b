"""Diophantine approximation on planar star bodies."""

from ._core import (
    NumericError,
    Psi,
    StarBody,
    StarkitError,
    ValidationError,
    analytic_verdict,
    continued_fraction,
    euler_phi_sum,
    prop5,
    series_partial_sums,
    tail_measure,
    three_distance,
    transfer,
    ubiquity_sequence,
)

__all__ = [
    "NumericError",
    "Psi",
    "StarBody",
    "StarkitError",
    "ValidationError",
    "analytic_verdict",
    "continued_fraction",
    "euler_phi_sum",
    "prop5",
    "series_partial_sums",
    "tail_measure",
    "three_distance",
    "transfer",
    "ubiquity_sequence",
]
