"""Per-comment value relevance: dictionary matching or external predictions."""

from __future__ import annotations

import bisect
import csv
import json
import logging
import re
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Iterator, Mapping

from .corpus import Reject
from .values import VALUES, Value, parse_value

log = logging.getLogger(__name__)

URL_TOKEN = "[URL]"
_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_TOKEN_RE = re.compile(r"\[URL\]|\w+(?:'\w+)?", re.UNICODE)
_CONTROL_RE = re.compile(r"[\x00-\x08\x0b\x0c\x0e-\x1f\x7f�]")

_VOWELS = frozenset("aeiouy")
# stems that usually lost a silent e: valued, believing, forced, judging
_RESTORE_E = ("v", "u", "c", "z", "dg")


def _strip_suffix(word: str) -> str:
    if len(word) <= 3 or not word.isalpha():
        return word
    if word.endswith("ies") and len(word) > 4:
        return word[:-3] + "y"
    if word.endswith("sses"):
        return word[:-2]
    if word.endswith("s") and not word.endswith(("ss", "us", "is")):
        return word[:-1]
    for suffix in ("ing", "ed"):
        if not word.endswith(suffix):
            continue
        stem = word[: -len(suffix)]
        if len(stem) < 3 or not _VOWELS.intersection(stem):
            return word
        if suffix == "ed" and stem.endswith("i"):
            return stem[:-1] + "y"
        if suffix == "ed" and stem.endswith("e"):
            return word[:-1]
        if len(stem) >= 4 and stem[-1] == stem[-2] and stem[-1] not in "lsz" + "aeiou":
            return stem[:-1]
        if stem.endswith(_RESTORE_E):
            return stem + "e"
        return stem
    return word


def lemmatize(word: str) -> str:
    """Rule-based English lemma: plural -s/-es/-ies, -ing and -ed.

    Rules are applied until nothing changes, so the result is a fixed point and
    lemmatizing a lemma is a no-op.
    """
    while True:
        nxt = _strip_suffix(word)
        if nxt == word:
            return word
        word = nxt


def preprocess(
    text: str | bytes, lemmatizer: Callable[[str], str] = lemmatize
) -> list[str]:
    """URLs become ``[URL]``; words are lowercased and lemmatized."""
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="ignore")
    # lowercase before tokenizing: a few characters change length when lowered
    text = _CONTROL_RE.sub(" ", text).lower()
    text = _URL_RE.sub(f" {URL_TOKEN} ", text)
    return [tok if tok == URL_TOKEN else lemmatizer(tok) for tok in _TOKEN_RE.findall(text)]


@dataclass(frozen=True)
class ValueLabels:
    comment_id: str
    relevant: frozenset[Value]

    def to_dict(self) -> dict:
        return {
            "comment_id": self.comment_id,
            "values": [v.value for v in VALUES if v in self.relevant],
        }


class ValueLexicon:
    """Value dictionary: exact lemmas plus ``prefix*`` wildcard terms per value."""

    def __init__(self, entries: Mapping[Value | str, Iterable[str]]):
        terms: dict[Value, tuple[str, ...]] = {}
        for key, raw_terms in entries.items():
            value = parse_value(key)
            uniq = tuple(dict.fromkeys(t.strip().lower() for t in raw_terms if t.strip()))
            terms[value] = tuple(dict.fromkeys(terms.get(value, ()) + uniq))
        missing = [v.value for v in VALUES if not terms.get(v)]
        if missing:
            raise ValueError(f"lexicon has no terms for: {', '.join(missing)}")
        self.entries: dict[Value, tuple[str, ...]] = {v: terms[v] for v in VALUES}
        self.weights: dict[Value, float] = {v: 1.0 / len(t) for v, t in self.entries.items()}
        self._exact: dict[str, set[Value]] = {}
        prefixes: dict[str, set[Value]] = {}
        for value, ts in self.entries.items():
            for t in ts:
                if t.endswith("*"):
                    prefixes.setdefault(t.rstrip("*"), set()).add(value)
                else:
                    self._exact.setdefault(t, set()).add(value)
        self._prefix_keys = sorted(prefixes)
        self._prefix_values = [frozenset(prefixes[k]) for k in self._prefix_keys]

    def __repr__(self) -> str:
        n = sum(len(t) for t in self.entries.values())
        return f"ValueLexicon({n} terms)"

    def match(self, token: str) -> set[Value]:
        """Values whose terms match a single token."""
        found = set(self._exact.get(token, ()))
        # any prefix of token sorts <= token, so scan backwards from its slot
        i = bisect.bisect_right(self._prefix_keys, token)
        while i > 0:
            i -= 1
            key = self._prefix_keys[i]
            if token.startswith(key):
                found |= self._prefix_values[i]
            elif key[:1] != token[:1]:
                break
        return found

    def contains_term(self, tokens: Iterable[str]) -> bool:
        return any(self.match(t) for t in tokens)

    @classmethod
    def load(cls, path: str | Path) -> ValueLexicon:
        """JSON ``{value: [terms]}`` or two-column CSV ``value,term``."""
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
            data = json.loads(text)
            if not isinstance(data, dict):
                raise ValueError("lexicon JSON must be an object")
            return cls(data)
        entries: dict[str, list[str]] = {}
        for row in csv.reader(text.splitlines()):
            if not row or row[0].strip().lower() == "value":
                continue
            if len(row) < 2:
                raise ValueError(f"bad lexicon row: {row}")
            entries.setdefault(row[0], []).append(row[1])
        return cls(entries)

    def to_json(self) -> str:
        return json.dumps({v.value: list(t) for v, t in self.entries.items()}, indent=2)


def classify_dictionary(tokens: Iterable[str], lex: ValueLexicon, comment_id: str = "") -> ValueLabels:
    """A value is relevant when any token matches any of its terms."""
    relevant: set[Value] = set()
    for tok in set(tokens):
        relevant |= lex.match(tok)
    return ValueLabels(comment_id, frozenset(relevant))


def extract_labels(comments, lex: ValueLexicon) -> Iterator[ValueLabels]:
    for c in comments:
        yield classify_dictionary(preprocess(c.text), lex, c.id)


def load_predictions(
    path: str | Path, rejects: list[Reject] | None = None
) -> Iterator[ValueLabels]:
    """Group classifier output rows into one ``ValueLabels`` per comment.

    Accepts per-value rows ``{comment_id, value, relevant}`` and set rows
    ``{comment_id, values}``. Duplicates are OR-ed together with a warning.
    Output follows first appearance of each comment id.
    """
    grouped: OrderedDict[str, set[Value]] = OrderedDict()
    seen_pairs: dict[tuple[str, Value], int] = {}
    seen_sets: set[str] = set()

    def reject(line_no: int, reason: str) -> None:
        if rejects is not None:
            rejects.append(Reject(line_no, reason))

    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                cid = row["comment_id"]
                if not isinstance(cid, str) or not cid:
                    raise ValueError("comment_id must be a non-empty string")
                if "values" in row:
                    vals = {parse_value(v) for v in row["values"]}
                    if cid in seen_sets:
                        log.warning("duplicate prediction rows for %s; OR-ing", cid)
                    seen_sets.add(cid)
                    grouped.setdefault(cid, set()).update(vals)
                else:
                    value = parse_value(row["value"])
                    flag = int(row["relevant"])
                    if flag not in (0, 1):
                        raise ValueError(f"relevant must be 0 or 1, got {flag}")
                    prev = seen_pairs.get((cid, value))
                    if prev is not None and prev != flag:
                        log.warning("conflicting predictions for %s/%s; OR-ing", cid, value)
                    seen_pairs[(cid, value)] = max(flag, prev or 0)
                    bucket = grouped.setdefault(cid, set())
                    if flag:
                        bucket.add(value)
            except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
                reason = f"missing field {exc}" if isinstance(exc, KeyError) else str(exc)
                reject(line_no, reason)
    for cid, vals in grouped.items():
        yield ValueLabels(cid, frozenset(vals))


def write_labels(labels: Iterable[ValueLabels], path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for lab in labels:
            fh.write(json.dumps(lab.to_dict(), sort_keys=True) + "\n")
            n += 1
    return n
