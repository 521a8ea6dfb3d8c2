"""Schwartz value profiles from discussion text, value-conflict metrics,
JZS Bayes factor tests against disagreement, and value-aware agreement
prediction features."""

from __future__ import annotations

__version__ = "0.1.0"

from .bayes import BayesFactorResult, interpret, jzs_bf10
from .corpus import AgreementInstance, Comment, FilterConfig, apply_filters, load_agreement, load_comments
from .extraction import ValueLabels, ValueLexicon, classify_dictionary, preprocess
from .profiles import ValueProfile, aggregate_profiles, normalize, threshold_filter
from .similarity import SimilarityResult, similarity
from .values import CircumplexKernel, Value, build_kernel, circular_distance

__all__ = [
    "AgreementInstance",
    "BayesFactorResult",
    "CircumplexKernel",
    "Comment",
    "FilterConfig",
    "SimilarityResult",
    "Value",
    "ValueLabels",
    "ValueLexicon",
    "ValueProfile",
    "aggregate_profiles",
    "apply_filters",
    "build_kernel",
    "circular_distance",
    "classify_dictionary",
    "interpret",
    "jzs_bf10",
    "load_agreement",
    "load_comments",
    "normalize",
    "preprocess",
    "similarity",
    "threshold_filter",
]
