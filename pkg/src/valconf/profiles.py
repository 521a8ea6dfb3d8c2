"""Per-user value profiles: aggregation, thresholding, normalization and I/O."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .corpus import Reject
from .extraction import ValueLabels, ValueLexicon
from .values import N_VALUES, VALUE_NAMES, VALUES

SOURCES = ("vpe", "survey")


class EmptyProfileError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ValueProfile:
    """Ten numbers in circumplex order.

    Raw VPE profiles hold integer counts with ``normalized=False``; normalized
    and survey profiles hold real scores.
    """

    user: str
    vector: np.ndarray = field(repr=False)
    total_mentions: int = 0
    source: str = "vpe"
    normalized: bool = False
    flags: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        vec = np.asarray(self.vector, dtype=float)
        if vec.shape != (N_VALUES,):
            raise ValueError(f"profile for {self.user!r} must have 10 entries")
        if self.source not in SOURCES:
            raise ValueError(f"unknown profile source {self.source!r}")
        vec = vec.copy()
        vec.setflags(write=False)
        object.__setattr__(self, "vector", vec)

    @property
    def counts(self) -> np.ndarray:
        if self.normalized or self.source != "vpe":
            raise AttributeError("counts are only defined for raw VPE profiles")
        return self.vector.astype(np.int64)

    @property
    def is_raw(self) -> bool:
        return self.source == "vpe" and not self.normalized

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ValueProfile):
            return NotImplemented
        return (
            self.user == other.user
            and self.total_mentions == other.total_mentions
            and self.source == other.source
            and self.normalized == other.normalized
            and bool(np.array_equal(self.vector, other.vector))
        )

    __hash__ = None  # type: ignore[assignment]


def raw_profile(user: str, counts: Iterable[int]) -> ValueProfile:
    arr = np.asarray(list(counts), dtype=np.int64)
    if (arr < 0).any():
        raise ValueError("counts must be non-negative")
    return ValueProfile(user, arr, int(arr.sum()))


def aggregate_profiles(
    labels: Iterable[ValueLabels],
    authorship: Mapping[str, str],
    rejects: list[Reject] | None = None,
) -> dict[str, ValueProfile]:
    """Count, per user, the comments in which each value is relevant.

    Every author in ``authorship`` gets a profile, even without labelled
    comments. Labels for unknown comment ids go to ``rejects`` (``line_no``
    is the 1-based position in the label stream).
    """
    counts: dict[str, np.ndarray] = {u: np.zeros(N_VALUES, np.int64) for u in sorted(set(authorship.values()))}
    for pos, lab in enumerate(labels, start=1):
        user = authorship.get(lab.comment_id)
        if user is None:
            if rejects is not None:
                rejects.append(Reject(pos, f"unknown comment_id {lab.comment_id!r}"))
            continue
        for v in lab.relevant:
            counts[user][v.position] += 1
    return {u: ValueProfile(u, c, int(c.sum())) for u, c in counts.items()}


def threshold_filter(profiles: Mapping[str, ValueProfile], l: int) -> dict[str, ValueProfile]:
    """Keep raw profiles with at least ``l`` value mentions.

    Survey and already-normalized profiles pass through untouched.
    """
    return {
        u: p for u, p in profiles.items() if not p.is_raw or p.total_mentions >= l
    }


def normalize(profile: ValueProfile) -> ValueProfile:
    if not profile.is_raw:
        return profile
    if profile.total_mentions <= 0:
        raise EmptyProfileError(f"empty profile for {profile.user!r}")
    return replace(profile, vector=profile.vector / profile.total_mentions, normalized=True)


def weighted_dictionary_profile(profile: ValueProfile, lex: ValueLexicon) -> ValueProfile:
    """Reweight counts by 1/|terms(v)| and rescale to sum to one."""
    w = np.array([lex.weights[v] for v in VALUES])
    z = profile.vector * w
    total = z.sum()
    if not total > 0:
        raise EmptyProfileError(f"empty profile for {profile.user!r}")
    return replace(profile, vector=z / total, normalized=True)


def top_values(profiles: Iterable[ValueProfile], k: int = 2) -> list[str]:
    """Values with the most mentions summed over users (ties by circumplex order)."""
    total = np.zeros(N_VALUES)
    for p in profiles:
        total += p.vector
    order = sorted(range(N_VALUES), key=lambda i: (-total[i], i))
    return [VALUE_NAMES[i] for i in order[:k]]


PROFILE_HEADER = ("user", "source", "total_mentions", *VALUE_NAMES)


def write_profiles(profiles: Mapping[str, ValueProfile] | Iterable[ValueProfile], path: str | Path) -> None:
    items = profiles.values() if isinstance(profiles, Mapping) else profiles
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PROFILE_HEADER)
        for p in sorted(items, key=lambda p: p.user):
            if p.is_raw:
                cells = [str(int(x)) for x in p.vector]
            else:
                cells = [repr(float(x)) for x in p.vector]
            writer.writerow([p.user, p.source, p.total_mentions, *cells])


def read_profiles(path: str | Path) -> dict[str, ValueProfile]:
    """Read the profile CSV. Rows whose value cells are all integers are raw VPE."""
    out: dict[str, ValueProfile] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != PROFILE_HEADER:
            raise ValueError(f"{path}: header must be {','.join(PROFILE_HEADER)}")
        for row in reader:
            if not row:
                continue
            user, source, total, *cells = row
            if len(cells) != N_VALUES:
                raise ValueError(f"{path}: row for {user!r} has {len(cells)} values")
            raw = source == "vpe" and all(c.strip().lstrip("-").isdigit() for c in cells)
            vec = np.array([float(c) for c in cells])
            out[user] = ValueProfile(
                user, vec, int(total), source=source, normalized=not raw
            )
    return out
