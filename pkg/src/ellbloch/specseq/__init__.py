"""Exact couples and spectral sequences over Q."""

from .acyclic import (
    AcyclicityData,
    RowComplexes,
    build_acyclic_F,
    check_acyclicity_hypotheses,
    quotient_by_acyclic,
    quotient_filtered,
    tensor_quasi_iso_check,
)
from .couple import BigradedModule, ExactCouple, GradedMap, check_exact, derive, pages
from .filtered import FilteredComplex, couple_from_filtered, page_dims_direct, random_filtered_complex
from .split import CoupleMorphism, split_mono_quotient

__all__ = [
    "AcyclicityData",
    "BigradedModule",
    "CoupleMorphism",
    "ExactCouple",
    "FilteredComplex",
    "GradedMap",
    "RowComplexes",
    "build_acyclic_F",
    "check_acyclicity_hypotheses",
    "check_exact",
    "couple_from_filtered",
    "derive",
    "page_dims_direct",
    "pages",
    "quotient_by_acyclic",
    "quotient_filtered",
    "random_filtered_complex",
    "split_mono_quotient",
    "tensor_quasi_iso_check",
]
