"""PVQ-21 self-report scoring (MRAT centering) and Cronbach's alpha."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy import stats

from .profiles import ValueProfile
from .values import N_VALUES, VALUES, Value

N_ITEMS = 21
LIKERT_MIN, LIKERT_MAX = 1, 6

# Official PVQ-21 (ESS) key, 1-based item numbers. Universalism has three items.
PVQ21_KEY: dict[int, Value] = {
    1: Value.SELF_DIRECTION, 11: Value.SELF_DIRECTION,
    2: Value.POWER, 17: Value.POWER,
    3: Value.UNIVERSALISM, 8: Value.UNIVERSALISM, 19: Value.UNIVERSALISM,
    4: Value.ACHIEVEMENT, 13: Value.ACHIEVEMENT,
    5: Value.SECURITY, 14: Value.SECURITY,
    6: Value.STIMULATION, 15: Value.STIMULATION,
    7: Value.CONFORMITY, 16: Value.CONFORMITY,
    9: Value.TRADITION, 20: Value.TRADITION,
    10: Value.HEDONISM, 21: Value.HEDONISM,
    12: Value.BENEVOLENCE, 18: Value.BENEVOLENCE,
}  # fmt: skip

ZERO_PROFILE = "zero_profile"


class MalformedResponse(ValueError):
    """The response itself is structurally invalid."""


@dataclass(frozen=True)
class AttentionCheck:
    item_index: int
    required: int
    answer: int

    @property
    def passed(self) -> bool:
        return self.answer == self.required


@dataclass(frozen=True)
class PvqResponse:
    respondent: str
    item_scores: tuple[int, ...]
    attention: tuple[AttentionCheck, ...] = ()

    def validate(self) -> None:
        if len(self.item_scores) != N_ITEMS:
            raise MalformedResponse(
                f"{self.respondent}: expected {N_ITEMS} items, got {len(self.item_scores)}"
            )
        for i, s in enumerate(self.item_scores, start=1):
            if not LIKERT_MIN <= s <= LIKERT_MAX:
                raise MalformedResponse(f"{self.respondent}: item {i} out of range ({s})")

    @property
    def passed_attention(self) -> bool:
        return all(a.passed for a in self.attention)


@dataclass(frozen=True)
class Rejected:
    respondent: str
    reason: str


def _items_by_value(item_map: Mapping[int, Value]) -> dict[Value, list[int]]:
    by_value: dict[Value, list[int]] = {v: [] for v in VALUES}
    for item, value in item_map.items():
        if not 1 <= item <= N_ITEMS:
            raise ValueError(f"item index {item} outside 1..{N_ITEMS}")
        by_value[value].append(item)
    empty = [v.value for v, items in by_value.items() if not items]
    if empty:
        raise ValueError(f"item map assigns no items to {', '.join(empty)}")
    return {v: sorted(items) for v, items in by_value.items()}


def centered_value_scores(
    resp: PvqResponse, item_map: Mapping[int, Value] = PVQ21_KEY
) -> np.ndarray:
    """Per-value mean of MRAT-centered item scores, before scaling."""
    by_value = _items_by_value(item_map)
    scores = np.asarray(resp.item_scores, dtype=float)
    centered = scores - scores.mean()
    return np.array([centered[[i - 1 for i in by_value[v]]].mean() for v in VALUES])


def score_pvq(
    resp: PvqResponse, item_map: Mapping[int, Value] = PVQ21_KEY
) -> ValueProfile | Rejected:
    """Self-reported profile: centered per-value means scaled to unit L1 norm.

    Respondents failing an attention check are returned as ``Rejected``; an
    all-flat response yields the zero profile flagged ``zero_profile``.
    """
    resp.validate()
    if not resp.passed_attention:
        return Rejected(resp.respondent, "failed attention check")
    per_value = centered_value_scores(resp, item_map)
    norm = np.abs(per_value).sum()
    # centered scores are exact multiples of 1/(21*k); tiny norms are rounding noise
    if norm < 1e-12:
        return ValueProfile(
            resp.respondent, np.zeros(N_VALUES), 0, source="survey",
            normalized=True, flags=frozenset({ZERO_PROFILE}),
        )
    return ValueProfile(
        resp.respondent, per_value / norm, 0, source="survey", normalized=True
    )


@dataclass(frozen=True)
class AlphaResult:
    alpha: float
    ci95: tuple[float, float]
    n: int
    k: int
    defined: bool = True


def cronbach_alpha_items(items: np.ndarray, confidence: float = 0.95) -> AlphaResult:
    """Alpha for an (n respondents, k items) matrix with a Feldt F-based interval."""
    items = np.asarray(items, dtype=float)
    n, k = items.shape
    if n < 3:
        raise ValueError("Cronbach's alpha needs at least 3 respondents")
    if k < 2:
        raise ValueError("Cronbach's alpha needs at least 2 items")
    total_var = items.sum(axis=1).var(ddof=1)
    if total_var == 0:
        nan = float("nan")
        return AlphaResult(nan, (nan, nan), n, k, defined=False)
    alpha = k / (k - 1) * (1 - items.var(axis=0, ddof=1).sum() / total_var)
    df1, df2 = n - 1, (n - 1) * (k - 1)
    tail = (1 - confidence) / 2
    lower = 1 - (1 - alpha) * stats.f.isf(tail, df1, df2)
    upper = 1 - (1 - alpha) * stats.f.ppf(tail, df1, df2)
    return AlphaResult(float(alpha), (float(lower), float(upper)), n, k)


def cronbach_alpha(
    responses: Sequence[PvqResponse],
    value: Value,
    item_map: Mapping[int, Value] = PVQ21_KEY,
) -> AlphaResult:
    """Alpha over the items of one value, using attention-passing responses only."""
    items = _items_by_value(item_map)[value]
    accepted = []
    for r in responses:
        r.validate()
        if r.passed_attention:
            accepted.append([r.item_scores[i - 1] for i in items])
    return cronbach_alpha_items(np.array(accepted, dtype=float).reshape(-1, len(items)))


PVQ_HEADER = (
    "respondent",
    *(f"item_{i}" for i in range(1, N_ITEMS + 1)),
    "att_idx1", "att_req1", "att_ans1",
    "att_idx2", "att_req2", "att_ans2",
)  # fmt: skip


def read_pvq(path: str | Path) -> list[PvqResponse]:
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [h for h in PVQ_HEADER if h not in (reader.fieldnames or [])]
        if missing:
            raise MalformedResponse(f"{path}: PVQ header lacks {', '.join(missing)}")
        for row in reader:
            try:
                items = tuple(int(row[f"item_{i}"]) for i in range(1, N_ITEMS + 1))
                checks = tuple(
                    AttentionCheck(int(row[f"att_idx{j}"]), int(row[f"att_req{j}"]), int(row[f"att_ans{j}"]))
                    for j in (1, 2)
                )
            except (TypeError, ValueError) as exc:
                raise MalformedResponse(
                    f"{path}: bad row for {row.get('respondent')!r} (line {reader.line_num}): {exc}"
                ) from exc
            out.append(PvqResponse(row["respondent"], items, checks))
    return out
