"""Similarity between value profiles: Kendall tau, Manhattan, cosine,
circumplex-weighted cosine and Spearman rho.

The ``*_batch`` functions score row-aligned (m, 10) arrays; the scalar
functions wrap them and raise on undefined inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import rankdata

from .values import N_VALUES, CircumplexKernel, build_kernel

METRICS = ("tau", "md", "co", "wc", "rho")
DEFAULT_METRICS = ("tau", "md", "co", "wc")
N_PAIRS = N_VALUES * (N_VALUES - 1) // 2
_I, _J = np.triu_indices(N_VALUES, k=1)

_DEFAULT_KERNEL: CircumplexKernel | None = None


def default_kernel() -> CircumplexKernel:
    global _DEFAULT_KERNEL
    if _DEFAULT_KERNEL is None:
        _DEFAULT_KERNEL = build_kernel(1.0)
    return _DEFAULT_KERNEL


class UndefinedSimilarity(ValueError):
    pass


@dataclass(frozen=True)
class SimilarityResult:
    metric: str
    score: float
    higher_means_conflict: bool = False
    flags: frozenset[str] = frozenset()


def _as_matrix(x) -> np.ndarray:
    arr = np.asarray(getattr(x, "vector", x), dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.shape[-1] != N_VALUES:
        raise ValueError(f"profiles must have {N_VALUES} entries, got shape {arr.shape}")
    return arr


def kendall_tau_batch(V, W, variant: str = "a") -> np.ndarray:
    """``1 - 2 * discordant / 45``; a pair tied in either profile is not discordant.

    ``variant="b"`` gives tau-b instead, which is NaN for a constant profile.
    """
    V, W = _as_matrix(V), _as_matrix(W)
    sv = np.sign(V[:, _I] - V[:, _J])
    sw = np.sign(W[:, _I] - W[:, _J])
    prod = sv * sw
    discordant = (prod < 0).sum(axis=1)
    if variant == "a":
        return 1.0 - 2.0 * discordant / N_PAIRS
    if variant != "b":
        raise ValueError(f"unknown tau variant {variant!r}")
    concordant = (prod > 0).sum(axis=1)
    untied_v = (sv != 0).sum(axis=1)
    untied_w = (sw != 0).sum(axis=1)
    denom = np.sqrt(untied_v * untied_w.astype(float))
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(denom > 0, (concordant - discordant) / denom, np.nan)


def manhattan_batch(V, W) -> np.ndarray:
    V, W = _as_matrix(V), _as_matrix(W)
    return np.abs(V - W).sum(axis=1)


def cosine_batch(V, W) -> np.ndarray:
    V, W = _as_matrix(V), _as_matrix(W)
    denom = np.linalg.norm(V, axis=1) * np.linalg.norm(W, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(denom > 0, (V * W).sum(axis=1) / denom, np.nan)


def weighted_cosine_batch(V, W, kernel: CircumplexKernel | None = None) -> np.ndarray:
    """``v'Bw / sqrt(v'Bv * w'Bw)`` with B the circumplex kernel."""
    V, W = _as_matrix(V), _as_matrix(W)
    B = (kernel or default_kernel()).B
    VB = V @ B
    vv = (VB * V).sum(axis=1)
    ww = ((W @ B) * W).sum(axis=1)
    vw = (VB * W).sum(axis=1)
    ok = (vv > 0) & (ww > 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = vw / np.sqrt(np.where(ok, vv * ww, np.nan))
    # rounding can push |S| a hair past 1 for near-parallel inputs
    return np.clip(out, -1.0, 1.0)


def spearman_rho_batch(V, W) -> np.ndarray:
    """Pearson correlation of average ranks; NaN when a profile is constant."""
    RV = rankdata(_as_matrix(V), axis=1)
    RW = rankdata(_as_matrix(W), axis=1)
    RV -= RV.mean(axis=1, keepdims=True)
    RW -= RW.mean(axis=1, keepdims=True)
    denom = np.sqrt((RV**2).sum(axis=1) * (RW**2).sum(axis=1))
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(denom > 0, (RV * RW).sum(axis=1) / denom, np.nan)


def score_batch(
    metric: str,
    V,
    W,
    kernel: CircumplexKernel | None = None,
    tau_variant: str = "a",
) -> np.ndarray:
    """Score row-aligned profile arrays with one metric; undefined pairs are NaN."""
    if metric == "tau":
        return kendall_tau_batch(V, W, tau_variant)
    if metric == "md":
        return manhattan_batch(V, W)
    if metric == "co":
        return cosine_batch(V, W)
    if metric == "wc":
        return weighted_cosine_batch(V, W, kernel)
    if metric == "rho":
        return spearman_rho_batch(V, W)
    raise ValueError(f"unknown metric {metric!r}; expected one of {', '.join(METRICS)}")


def higher_means_conflict(metric: str) -> bool:
    return metric == "md"


def kendall_tau(v, w, variant: str = "a") -> SimilarityResult:
    score = float(kendall_tau_batch(v, w, variant)[0])
    flags = set()
    if np.ptp(_as_matrix(v)) == 0 or np.ptp(_as_matrix(w)) == 0:
        flags.add("constant_profile")
    if np.isnan(score):
        flags.add("undefined")
    return SimilarityResult("tau", score, False, frozenset(flags))


def manhattan(v, w) -> SimilarityResult:
    return SimilarityResult("md", float(manhattan_batch(v, w)[0]), True)


def cosine(v, w) -> SimilarityResult:
    score = float(cosine_batch(v, w)[0])
    if np.isnan(score):
        raise UndefinedSimilarity("undefined cosine: zero-norm profile")
    return SimilarityResult("co", score)


def weighted_cosine(v, w, kernel: CircumplexKernel | None = None) -> SimilarityResult:
    score = float(weighted_cosine_batch(v, w, kernel)[0])
    if np.isnan(score):
        raise UndefinedSimilarity("undefined weighted cosine: non-positive B-norm")
    return SimilarityResult("wc", score)


def spearman_rho(v, w) -> SimilarityResult:
    score = float(spearman_rho_batch(v, w)[0])
    flags = frozenset({"undefined"}) if np.isnan(score) else frozenset()
    return SimilarityResult("rho", score, False, flags)


SCALAR: dict[str, Callable[..., SimilarityResult]] = {
    "tau": kendall_tau,
    "md": manhattan,
    "co": cosine,
    "wc": weighted_cosine,
    "rho": spearman_rho,
}


def similarity(metric: str, v, w, kernel: CircumplexKernel | None = None) -> SimilarityResult:
    if metric not in SCALAR:
        raise ValueError(f"unknown metric {metric!r}")
    if metric == "wc":
        return weighted_cosine(v, w, kernel)
    return SCALAR[metric](v, w)
