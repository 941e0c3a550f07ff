"""Semigroups of entire maps: word algebra, subsemigroup indices, and
pixel approximations of escaping, Fatou and Julia sets."""

__version__ = "0.1.0"

from .words import (IDENTITY, Alphabet, ComplementOfFinite, GeneratedBy, IndexVerdict,
                    LengthMultiple, NotApplicableError, Oracle, OracleError, PrefixIs,
                    cofinite_index, finite_index, min_length, rees_index, translate, whole)
from .expr import EntireMap, FormulaError, parse
from .orbit import OrbitVerdict, iterate
from .dynamics import (GridSpec, Mask, ResourceError, Semigroup, WordBudget, escaping_mask,
                       fatou_julia_masks, label_components, mask_compare)
from .verification import Experiment, TheoremReport, Tolerances, run_experiment

__all__ = [
    "IDENTITY", "Alphabet", "ComplementOfFinite", "GeneratedBy", "IndexVerdict",
    "LengthMultiple", "NotApplicableError", "Oracle", "OracleError", "PrefixIs",
    "cofinite_index", "finite_index", "min_length", "rees_index", "translate", "whole",
    "EntireMap", "FormulaError", "parse", "OrbitVerdict", "iterate",
    "GridSpec", "Mask", "ResourceError", "Semigroup", "WordBudget", "escaping_mask",
    "fatou_julia_masks", "label_components", "mask_compare",
    "Experiment", "TheoremReport", "Tolerances", "run_experiment",
]
