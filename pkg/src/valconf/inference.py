"""Value conflict vs. disagreement: group statistics, the BF test grid,
and the value covariance / MDS diagnostic."""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .bayes import DEFAULT_R, BayesFactorError, interpret, jzs_bf10
from .corpus import AgreementInstance
from .profiles import ValueProfile, normalize, threshold_filter
from .similarity import DEFAULT_METRICS, kendall_tau_batch, score_batch
from .values import N_VALUES, VALUE_NAMES, CircumplexKernel

log = logging.getLogger(__name__)

DEFAULT_THRESHOLDS = (1, 10, 50, 200, 500)
BF_BIN_EDGES = (0.0, 1 / 10, 1 / 3, 1.0, 3.0, 10.0, math.inf)

Pair = tuple[str, str]


class EmptyGroupError(ValueError):
    pass


def split_groups(instances: Iterable[AgreementInstance]) -> tuple[list[Pair], list[Pair]]:
    """(disagree pairs, agree pairs) as (parent_author, child_author); neutral dropped."""
    minus: list[Pair] = []
    plus: list[Pair] = []
    for inst in instances:
        if inst.label == "disagree":
            minus.append((inst.parent_author, inst.child_author))
        elif inst.label == "agree":
            plus.append((inst.parent_author, inst.child_author))
    return minus, plus


@dataclass(frozen=True, eq=False)
class GroupStats:
    theta: float
    used: int
    skipped: int
    scores: np.ndarray = field(repr=False)


def prepare_profiles(profiles: Mapping[str, ValueProfile], l: int) -> dict[str, np.ndarray]:
    """Threshold at ``l`` mentions and normalize; returns user -> score vector."""
    out = {}
    for user, p in threshold_filter(profiles, l).items():
        if p.is_raw and p.total_mentions == 0:
            continue
        out[user] = normalize(p).vector
    return out


def pair_scores(
    group: Sequence[Pair],
    vectors: Mapping[str, np.ndarray],
    metric: str,
    kernel: CircumplexKernel | None = None,
) -> tuple[np.ndarray, int]:
    """Scores for pairs whose two users both have a vector; also the skip count."""
    kept = [(a, b) for a, b in group if a in vectors and b in vectors]
    if not kept:
        return np.empty(0), len(group)
    V = np.array([vectors[a] for a, _ in kept])
    W = np.array([vectors[b] for _, b in kept])
    scores = score_batch(metric, V, W, kernel)
    finite = np.isfinite(scores)
    return scores[finite], len(group) - int(finite.sum())


def group_mean(
    group: Sequence[Pair],
    profiles: Mapping[str, ValueProfile],
    metric: str,
    l: int = 1,
    kernel: CircumplexKernel | None = None,
) -> GroupStats:
    """Mean pairwise similarity in a group after thresholding at ``l``.

    Pairs with a missing or sub-threshold profile (or an undefined score) are
    skipped and counted.
    """
    scores, skipped = pair_scores(group, prepare_profiles(profiles, l), metric, kernel)
    if scores.size == 0:
        raise EmptyGroupError("empty group after filtering")
    return GroupStats(float(scores.mean()), int(scores.size), skipped, scores)


def default_tail(metric: str) -> str:
    return "higher" if metric == "md" else "lower"


@dataclass(frozen=True)
class GridCell:
    forum: str
    metric: str
    threshold: int
    status: str = "ok"
    reason: str = ""
    n_minus: int = 0
    n_plus: int = 0
    theta_minus: float = math.nan
    theta_plus: float = math.nan
    t: float = math.nan
    bf10: float = math.nan
    tail: str = ""

    @property
    def bin(self) -> str:
        return interpret(self.bf10) if self.status == "ok" else ""

    def row(self) -> dict[str, str]:
        def fmt(x: float) -> str:
            return "" if math.isnan(x) else f"{x:.10g}"

        return {
            "forum": self.forum,
            "metric": self.metric,
            "threshold": str(self.threshold),
            "n_minus": str(self.n_minus),
            "n_plus": str(self.n_plus),
            "theta_minus": fmt(self.theta_minus),
            "theta_plus": fmt(self.theta_plus),
            "t": fmt(self.t),
            "bf10": fmt(self.bf10),
            "bin": self.bin,
            "status": self.status,
            "reason": self.reason,
        }


GRID_COLUMNS = (
    "forum", "metric", "threshold", "n_minus", "n_plus",
    "theta_minus", "theta_plus", "t", "bf10", "bin", "status", "reason",
)  # fmt: skip


def _run_cell(
    forum: str,
    metric: str,
    threshold: int,
    groups: tuple[list[Pair], list[Pair]],
    vectors: Mapping[str, np.ndarray],
    tail: str,
    r: float,
    kernel: CircumplexKernel | None,
) -> GridCell:
    minus, plus = groups
    base = dict(forum=forum, metric=metric, threshold=threshold, tail=tail)
    x, _ = pair_scores(minus, vectors, metric, kernel)
    y, _ = pair_scores(plus, vectors, metric, kernel)
    if x.size < 2 or y.size < 2:
        return GridCell(
            **base, status="skipped", n_minus=int(x.size), n_plus=int(y.size),
            reason=f"too few scored pairs (disagree={x.size}, agree={y.size}; need 2 each)",
        )
    try:
        res = jzs_bf10(x, y, tail=tail, r=r)
    except BayesFactorError as exc:
        return GridCell(**base, status="skipped", n_minus=int(x.size), n_plus=int(y.size), reason=str(exc))
    return GridCell(
        **base, n_minus=res.n_minus, n_plus=res.n_plus, theta_minus=res.theta_minus,
        theta_plus=res.theta_plus, t=res.t_stat, bf10=res.bf10,
    )


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("VALCONF_THREADS", "1")))
    except ValueError:
        return 1


def run_grid(
    instances: Sequence[AgreementInstance],
    profiles: Mapping[str, ValueProfile],
    forums: Sequence[str] | None = None,
    metrics: Sequence[str] = DEFAULT_METRICS,
    thresholds: Sequence[int] = DEFAULT_THRESHOLDS,
    tail_policy: str | Mapping[str, str] = "auto",
    r: float = DEFAULT_R,
    kernel: CircumplexKernel | None = None,
) -> list[GridCell]:
    """One BF test per (forum, metric, threshold); empty cells are kept as skipped.

    ``tail_policy`` is ``"auto"`` (higher for md, lower otherwise), a tail name
    applied to every metric, or a per-metric mapping.
    """
    if forums is None:
        forums = sorted({i.forum for i in instances})
    by_forum = {f: split_groups(i for i in instances if i.forum == f) for f in forums}
    vectors = {l: prepare_profiles(profiles, l) for l in sorted(set(thresholds))}

    def tail_for(metric: str) -> str:
        if isinstance(tail_policy, Mapping):
            return tail_policy.get(metric, default_tail(metric))
        return default_tail(metric) if tail_policy == "auto" else tail_policy

    jobs = [
        (f, m, l, by_forum[f], vectors[l], tail_for(m), r, kernel)
        for f in forums
        for m in metrics
        for l in thresholds
    ]
    n_threads = _threads()
    if n_threads > 1:
        with ThreadPoolExecutor(n_threads) as pool:
            cells = list(pool.map(lambda job: _run_cell(*job), jobs))
    else:
        cells = [_run_cell(*job) for job in jobs]
    return sorted(cells, key=lambda c: (c.forum, c.metric, c.threshold))


def bf_histogram(bfs: Iterable[float], edges: Sequence[float] = BF_BIN_EDGES) -> list[tuple[float, float, int]]:
    """Counts per BF bin. Bins below 1 are [lo, hi); bins from 1 up are (lo, hi],
    except the first such bin [1, 3]; so 1/3 and 3 fall in inconclusive bins."""
    values = [b for b in bfs if not math.isnan(b)]
    out = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= 1.0:
            n = sum(lo <= b < hi for b in values)
        elif lo == 1.0:
            n = sum(lo <= b <= hi for b in values)
        else:
            n = sum(lo < b <= hi for b in values)
        out.append((lo, hi, n))
    return out


def ranked_cells(cells: Iterable[GridCell]) -> list[GridCell]:
    """Computed cells by decreasing BF10."""
    return sorted((c for c in cells if c.status == "ok"), key=lambda c: (-c.bf10, c.forum, c.metric, c.threshold))


def value_covariance(profiles: Iterable[ValueProfile | np.ndarray]) -> np.ndarray:
    """Sample covariance (n-1) of the ten value dimensions across users."""
    X = np.array([np.asarray(getattr(p, "vector", p), dtype=float) for p in profiles])
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("value covariance needs at least 2 profiles")
    Xc = X - X.mean(axis=0)
    # constant columns are exactly zero, not rounding residue of the mean
    Xc[:, np.ptp(X, axis=0) == 0] = 0.0
    C = Xc.T @ Xc / (X.shape[0] - 1)
    return (C + C.T) / 2


@dataclass(frozen=True, eq=False)
class MdsResult:
    coords: np.ndarray
    eigenvalues: np.ndarray
    flags: frozenset[str] = frozenset()
    labels: tuple[str, ...] = VALUE_NAMES


def classical_mds(C: np.ndarray, dims: int = 2) -> MdsResult:
    """Torgerson MDS of a similarity (covariance) matrix.

    Similarities become squared distances d2_ij = C_ii + C_jj - 2 C_ij, which
    are double-centered and eigendecomposed.
    """
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError("similarity matrix must be square")
    if not np.allclose(C, C.T, atol=1e-12 * max(1.0, np.abs(C).max())):
        raise ValueError("similarity matrix must be symmetric")
    diag = np.diag(C)
    d2 = diag[:, None] + diag[None, :] - 2 * C
    return mds_from_squared_distances(d2, dims)


def mds_from_squared_distances(d2: np.ndarray, dims: int = 2) -> MdsResult:
    n = d2.shape[0]
    flags = set()
    if np.all(np.abs(d2) == 0):
        return MdsResult(np.zeros((n, dims)), np.zeros(n), frozenset({"all_zero_distances"}), _labels(n))
    J = np.eye(n) - np.full((n, n), 1.0 / n)
    G = -0.5 * J @ d2 @ J
    G = (G + G.T) / 2
    evals, evecs = np.linalg.eigh(G)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    top = evals[:dims]
    tol = 1e-12 * max(1.0, abs(evals[0]))
    if (top < -tol).any():
        log.warning("clamping negative MDS eigenvalues %s to zero", top[top < -tol])
        flags.add("negative_eigenvalues_clamped")
    # fix each axis' sign so that its largest-magnitude loading is positive
    vecs = evecs[:, :dims].copy()
    for k in range(vecs.shape[1]):
        if vecs[np.argmax(np.abs(vecs[:, k])), k] < 0:
            vecs[:, k] *= -1
    coords = vecs * np.sqrt(np.clip(top, 0.0, None))
    coords -= coords.mean(axis=0)
    return MdsResult(coords, evals, frozenset(flags), _labels(n))


def _labels(n: int) -> tuple[str, ...]:
    return VALUE_NAMES if n == N_VALUES else tuple(str(i) for i in range(n))


@dataclass(frozen=True)
class DomainSummary:
    forum: str
    n_users: int
    n_profiles: int
    top_values: tuple[str, ...]
    mean_tau: float


def domain_summary(
    instances: Sequence[AgreementInstance],
    profiles: Mapping[str, ValueProfile],
    l: int = 1,
    max_pairs: int = 2_000_000,
    seed: int = 0,
) -> list[DomainSummary]:
    """Per forum: users, profiled users, two most-mentioned values, mean pairwise tau.

    When a forum has more than ``max_pairs`` user pairs, a seeded sample of
    pairs is used for the tau mean.
    """
    out = []
    for forum in sorted({i.forum for i in instances}):
        users = sorted(
            {i.parent_author for i in instances if i.forum == forum}
            | {i.child_author for i in instances if i.forum == forum}
        )
        kept = [u for u in users if u in profiles and profiles[u].total_mentions >= max(l, 1)]
        totals = np.zeros(N_VALUES)
        for u in kept:
            totals += profiles[u].vector
        order = sorted(range(N_VALUES), key=lambda i: (-totals[i], i))
        X = np.array([normalize(profiles[u]).vector for u in kept]).reshape(-1, N_VALUES)
        n = len(kept)
        mean_tau = math.nan
        if n >= 2:
            n_pairs = n * (n - 1) // 2
            if n_pairs <= max_pairs:
                I, J = np.triu_indices(n, k=1)
            else:
                rng = np.random.default_rng(seed)
                I = rng.integers(0, n, max_pairs)
                J = (I + rng.integers(1, n, max_pairs)) % n
            taus = np.concatenate(
                [kendall_tau_batch(X[I[s : s + 100_000]], X[J[s : s + 100_000]]) for s in range(0, len(I), 100_000)]
            )
            mean_tau = float(taus.mean())
        out.append(
            DomainSummary(forum, len(users), n, tuple(VALUE_NAMES[i] for i in order[:2]) if n else (), mean_tau)
        )
    return out
