"""Loading and filtering of background comments and labelled agreement pairs."""

from __future__ import annotations

import csv
import json
import logging
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Iterator

log = logging.getLogger(__name__)

LABELS = ("agree", "neutral", "disagree")
AGREEMENT_FIELDS = (
    "id",
    "forum",
    "parent_author",
    "child_author",
    "parent_text",
    "child_text",
    "label",
    "timestamp",
)


@dataclass(frozen=True)
class Comment:
    id: str
    author: str
    forum: str
    timestamp: int
    text: str
    lang: str | None = None

    def to_dict(self) -> dict[str, Any]:
        row = {
            "id": self.id,
            "author": self.author,
            "forum": self.forum,
            "timestamp": self.timestamp,
            "text": self.text,
        }
        if self.lang is not None:
            row["lang"] = self.lang
        return row


@dataclass(frozen=True)
class AgreementInstance:
    id: str
    forum: str
    parent_author: str
    child_author: str
    parent_text: str
    child_text: str
    label: str
    timestamp: int

    @property
    def self_reply(self) -> bool:
        return self.parent_author == self.child_author


@dataclass(frozen=True)
class Reject:
    line_no: int
    reason: str

    def to_dict(self) -> dict[str, Any]:
        return {"line_no": self.line_no, "reason": self.reason}


class DataError(Exception):
    """Input data is unreadable or structurally invalid."""


def _as_int(value: Any, name: str) -> int:
    if isinstance(value, bool):
        raise ValueError(f"{name} must be an integer")
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, str) and value.strip().lstrip("-").isdigit():
        return int(value.strip())
    raise ValueError(f"{name} must be an integer")


def _required_str(row: dict, name: str, allow_empty: bool = False) -> str:
    if name not in row or row[name] is None:
        raise ValueError(f"missing field {name!r}")
    value = row[name]
    if not isinstance(value, str):
        raise ValueError(f"field {name!r} must be a string")
    if not value and not allow_empty:
        raise ValueError(f"empty field {name!r}")
    return value


def parse_comment(row: Any, allow_empty_text: bool = False) -> Comment:
    if not isinstance(row, dict):
        raise ValueError("line is not a JSON object")
    lang = row.get("lang")
    if lang is not None and not isinstance(lang, str):
        raise ValueError("field 'lang' must be a string")
    if "timestamp" not in row:
        raise ValueError("missing field 'timestamp'")
    return Comment(
        id=_required_str(row, "id"),
        author=_required_str(row, "author"),
        forum=_required_str(row, "forum"),
        timestamp=_as_int(row["timestamp"], "timestamp"),
        text=_required_str(row, "text", allow_empty=allow_empty_text),
        lang=lang or None,
    )


def _open_text(path: str | Path):
    try:
        return open(path, encoding="utf-8", errors="replace", newline="")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def load_comments(
    path: str | Path,
    rejects: list[Reject] | None = None,
    allow_empty_text: bool = False,
) -> Iterator[Comment]:
    """Stream comments from a JSONL file in file order.

    Malformed lines and duplicate ids are appended to ``rejects`` (when given)
    instead of stopping the stream. Blank lines are ignored.
    """
    seen: set[str] = set()
    with _open_text(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                comment = parse_comment(json.loads(line), allow_empty_text)
                if comment.id in seen:
                    raise ValueError(f"duplicate id {comment.id!r}")
            except (ValueError, json.JSONDecodeError) as exc:
                if rejects is not None:
                    rejects.append(Reject(line_no, str(exc)))
                continue
            seen.add(comment.id)
            yield comment


def write_comments(comments: Iterable[Comment], path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for c in comments:
            fh.write(json.dumps(c.to_dict(), ensure_ascii=False, sort_keys=True) + "\n")
            n += 1
    return n


def write_rejects(rejects: Iterable[Reject], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for r in rejects:
            fh.write(json.dumps(r.to_dict(), sort_keys=True) + "\n")


@dataclass(frozen=True)
class FilterConfig:
    exclusion_list: frozenset[str] = frozenset()
    min_forum_posts: int = 50
    english_only: bool = True
    drop_user_forums_prefix: str = "u_"

    def __post_init__(self) -> None:
        if self.min_forum_posts < 0:
            raise ValueError("min_forum_posts must be >= 0")
        object.__setattr__(
            self, "exclusion_list", frozenset(f.casefold() for f in self.exclusion_list)
        )


def read_exclusion_list(path: str | Path) -> frozenset[str]:
    """One forum name per line; ``#`` starts a comment."""
    names = set()
    with _open_text(path) as fh:
        for line in fh:
            name = line.split("#", 1)[0].strip()
            if name:
                names.add(name.removeprefix("r/"))
    return frozenset(names)


@dataclass
class FilterReport:
    """Per-rule removal counts. Merging is plain addition, hence associative."""

    input: int = 0
    kept: int = 0
    excluded: int = 0
    user_forum: int = 0
    non_english: int = 0
    low_frequency: int = 0
    untagged_lang_kept: int = 0
    rejects: int = 0

    @property
    def removed(self) -> int:
        return self.excluded + self.user_forum + self.non_english + self.low_frequency

    def merge(self, other: FilterReport) -> FilterReport:
        return FilterReport(
            **{k: getattr(self, k) + getattr(other, k) for k in self.__dataclass_fields__}
        )

    def to_dict(self) -> dict[str, int]:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def apply_filters(
    comments: Iterable[Comment], cfg: FilterConfig
) -> tuple[list[Comment], FilterReport]:
    """Drop comments from excluded, user-profile and low-volume forums.

    Rules run in the order exclusion list, ``u_`` prefix, language, forum
    volume. The volume rule counts what survived the earlier rules, so a
    second pass over the output removes nothing.
    """
    report = FilterReport()
    prefix = cfg.drop_user_forums_prefix.casefold()
    survivors: list[Comment] = []
    for c in comments:
        report.input += 1
        forum = c.forum.casefold()
        if forum in cfg.exclusion_list:
            report.excluded += 1
        elif prefix and forum.startswith(prefix):
            report.user_forum += 1
        elif cfg.english_only and c.lang is not None and c.lang.lower() != "en":
            report.non_english += 1
        else:
            if cfg.english_only and c.lang is None:
                report.untagged_lang_kept += 1
            survivors.append(c)

    per_forum = Counter(c.forum for c in survivors)
    kept = []
    for c in survivors:
        if per_forum[c.forum] < cfg.min_forum_posts:
            report.low_frequency += 1
            if cfg.english_only and c.lang is None:
                report.untagged_lang_kept -= 1
        else:
            kept.append(c)
    report.kept = len(kept)
    return kept, report


def normalize_label(label: Any) -> str:
    key = str(label).strip().lower()
    if key not in LABELS:
        raise ValueError(f"unknown label {label!r}")
    return key


def parse_agreement(row: dict) -> AgreementInstance:
    missing = [f for f in AGREEMENT_FIELDS if f not in row or row[f] is None]
    if missing:
        raise ValueError(f"missing field(s) {', '.join(missing)}")
    return AgreementInstance(
        id=str(row["id"]),
        forum=str(row["forum"]),
        parent_author=str(row["parent_author"]),
        child_author=str(row["child_author"]),
        parent_text=str(row["parent_text"]),
        child_text=str(row["child_text"]),
        label=normalize_label(row["label"]),
        timestamp=_as_int(row["timestamp"], "timestamp"),
    )


def load_agreement(
    path: str | Path,
    format: str | None = None,
    rejects: list[Reject] | None = None,
) -> list[AgreementInstance]:
    """Read labelled parent/child pairs from CSV (with header) or JSONL.

    Line numbers in rejects are physical lines (the CSV header is line 1).
    """
    fmt = format or ("jsonl" if str(path).endswith((".jsonl", ".json")) else "csv")
    out: list[AgreementInstance] = []

    def reject(line_no: int, reason: str) -> None:
        if rejects is not None:
            rejects.append(Reject(line_no, reason))

    with _open_text(path) as fh:
        if fmt == "jsonl":
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    row = json.loads(line)
                    if not isinstance(row, dict):
                        raise ValueError("line is not a JSON object")
                    out.append(parse_agreement(row))
                except (ValueError, json.JSONDecodeError) as exc:
                    reject(line_no, str(exc))
        elif fmt == "csv":
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            absent = [f for f in AGREEMENT_FIELDS if f not in header]
            if absent:
                raise DataError(f"{path}: CSV header lacks {', '.join(absent)}")
            for row in reader:
                try:
                    out.append(parse_agreement(row))
                except ValueError as exc:
                    reject(reader.line_num, str(exc))
        else:
            raise ValueError(f"unsupported agreement format {fmt!r}")
    return out


def write_agreement_csv(instances: Iterable[AgreementInstance], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(AGREEMENT_FIELDS)
        for a in instances:
            writer.writerow([getattr(a, f) for f in AGREEMENT_FIELDS])
