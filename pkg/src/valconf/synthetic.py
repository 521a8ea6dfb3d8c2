"""Seeded synthetic data: planted-effect cohorts, kernel-correlated
profiles, and a small end-to-end fixture corpus."""

from __future__ import annotations

import csv
import json
from dataclasses import replace
from pathlib import Path

import numpy as np

from .corpus import AGREEMENT_FIELDS, LABELS, AgreementInstance, Comment, write_comments
from .profiles import ValueProfile, raw_profile
from .pvq import N_ITEMS, PVQ_HEADER
from .values import N_VALUES, VALUE_NAMES, build_kernel

FORUMS = ("Brexit", "BlackLivesMatter", "Republican", "climate", "democrats")


def _bump_counts(rng: np.random.Generator, center: int, mentions: float, B: np.ndarray) -> np.ndarray:
    return rng.poisson(mentions * B[center] / B[center].sum())


def planted_cohort(
    seed: int,
    n_pairs: int = 200,
    mentions: float = 40.0,
    forum: str = "planted",
) -> tuple[list[AgreementInstance], dict[str, ValueProfile]]:
    """Disagree pairs get circumplex-opposed profiles; agree pairs share a
    profile up to Poisson count noise. Profiles are raw counts."""
    rng = np.random.default_rng(seed)
    B = build_kernel(1.0).B
    instances: list[AgreementInstance] = []
    profiles: dict[str, ValueProfile] = {}
    for k in range(2 * n_pairs):
        label = "disagree" if k < n_pairs else "agree"
        center = int(rng.integers(N_VALUES))
        other = (center + N_VALUES // 2) % N_VALUES if label == "disagree" else center
        p, c = f"p{k}", f"c{k}"
        profiles[p] = raw_profile(p, _bump_counts(rng, center, mentions, B) + (np.arange(N_VALUES) == center))
        profiles[c] = raw_profile(c, _bump_counts(rng, other, mentions, B) + (np.arange(N_VALUES) == other))
        instances.append(AgreementInstance(f"i{k}", forum, p, c, "", "", label, k))
    return instances, profiles


def permute_labels(instances: list[AgreementInstance], seed: int) -> list[AgreementInstance]:
    rng = np.random.default_rng(seed)
    labels = [i.label for i in instances]
    order = rng.permutation(len(labels))
    return [replace(inst, label=labels[j]) for inst, j in zip(instances, order)]


def kernel_correlated_profiles(seed: int, n_users: int = 500, sigma: float = 1.0) -> np.ndarray:
    """Normalized profiles softmax(z) with z ~ N(0, B): neighbouring values co-vary."""
    rng = np.random.default_rng(seed)
    B = build_kernel(sigma).B
    z = rng.multivariate_normal(np.zeros(N_VALUES), B, size=n_users, method="eigh")
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


# -- fixture corpus ---------------------------------------------------------

FIXTURE_LEXICON: dict[str, list[str]] = {
    "self-direction": ["freedom", "independent", "creativ*", "curious"],
    "stimulation": ["adventure", "excit*", "daring"],
    "hedonism": ["pleasure", "enjoy*", "fun"],
    "achievement": ["success*", "ambiti*", "capable"],
    "power": ["wealth", "authority", "power*", "control"],
    "security": ["safe*", "secur*", "order"],
    "conformity": ["obedien*", "polite", "discipline"],
    "tradition": ["tradition*", "faith", "custom*", "heritage"],
    "benevolence": ["help*", "loyal*", "forgiv*", "honest"],
    "universalism": ["equal*", "justice", "environment*", "nature", "peace"],
}
_FILLER = ("the", "we", "people", "think", "about", "really", "this", "that", "today", "policy", "vote", "government")
_AGREE_WORDS = ("agree", "exactly", "yes", "right", "true")
_DISAGREE_WORDS = ("wrong", "no", "disagree", "nonsense", "false")


def _sentence(rng: np.random.Generator, center: int, B: np.ndarray, n_terms: int) -> str:
    words = list(rng.choice(_FILLER, size=6))
    weights = B[center] / B[center].sum()
    for v in rng.choice(N_VALUES, size=n_terms, p=weights):
        term = str(rng.choice(FIXTURE_LEXICON[VALUE_NAMES[v]])).rstrip("*")
        words.insert(int(rng.integers(len(words) + 1)), term)
    return " ".join(words)


def write_fixture(out_dir: str | Path, seed: int = 0, n_users: int = 60, posts_per_user: int = 12, n_pairs: int = 300) -> dict[str, Path]:
    """Write a small self-consistent corpus: comments, lexicon, exclusion list,
    agreement pairs, user features and PVQ responses. Returns name -> path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    B = build_kernel(1.0).B
    users = [f"user{k:03d}" for k in range(n_users)]
    centers = {u: int(rng.integers(N_VALUES)) for u in users}

    comments = []
    ts = 1_600_000_000
    for u in users:
        for j in range(posts_per_user):
            forum = FORUMS[int(rng.integers(len(FORUMS)))]
            n_terms = int(rng.integers(0, 3))
            ts += int(rng.integers(1, 600))
            comments.append(Comment(f"{u}-{j}", u, forum, ts, _sentence(rng, centers[u], B, n_terms), "en"))
    # rows removed by the filters: excluded forum, user forum, non-English, tiny forum
    for j in range(8):
        u = users[j]
        comments.append(Comment(f"x{j}", u, "pics", ts + j, "look at this picture", "en"))
        comments.append(Comment(f"y{j}", u, f"u_{u}", ts + j, "my own profile page", None))
        comments.append(Comment(f"z{j}", u, FORUMS[j % len(FORUMS)], ts + j, "das ist meine meinung", "de"))
        comments.append(Comment(f"w{j}", u, "tinyforum", ts + j, "freedom matters here", "en"))
    order = rng.permutation(len(comments))
    paths = {
        "comments": out / "comments.jsonl",
        "lexicon": out / "lexicon.json",
        "exclude": out / "exclude.txt",
        "agreement": out / "agreement.csv",
        "user_features": out / "user_features.csv",
        "pvq": out / "pvq.csv",
    }
    write_comments((comments[i] for i in order), paths["comments"])
    paths["lexicon"].write_text(json.dumps(FIXTURE_LEXICON, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    paths["exclude"].write_text("pics\n# image forums\n", encoding="utf-8")

    with open(paths["agreement"], "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGREEMENT_FIELDS)
        for k in range(n_pairs):
            a, b = rng.choice(n_users, size=2, replace=False)
            pa, pb = users[a], users[b]
            d = min(abs(centers[pa] - centers[pb]), N_VALUES - abs(centers[pa] - centers[pb]))
            probs = np.array([0.7, 0.2, 0.1]) if d <= 1 else np.array([0.1, 0.2, 0.7]) if d >= 4 else np.ones(3) / 3
            label = LABELS[int(rng.choice(3, p=probs))]
            cue = _AGREE_WORDS if label == "agree" else _DISAGREE_WORDS if label == "disagree" else _FILLER
            child = f"{rng.choice(cue)} {_sentence(rng, centers[pb], B, 1)}"
            forum = FORUMS[k % len(FORUMS)]
            w.writerow([f"pair{k:04d}", forum, pa, pb, _sentence(rng, centers[pa], B, 1), child, label, ts + 1000 + k])

    with open(paths["user_features"], "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["user", "comment_karma", "link_karma", "date_created", "gold_status", "mod_status",
                    "employee_status", "num_gilded", "num_comments", "num_links"])  # fmt: skip
        for u in users[: n_users - 5]:
            w.writerow([u, int(rng.integers(0, 50_000)), int(rng.integers(0, 5_000)),
                        1_300_000_000 + int(rng.integers(0, 10**8)), str(bool(rng.random() < 0.1)).lower(),
                        str(bool(rng.random() < 0.05)).lower(), "false", int(rng.integers(0, 5)),
                        int(rng.integers(10, 1000)), int(rng.integers(0, 50))])  # fmt: skip

    with open(paths["pvq"], "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PVQ_HEADER)
        for k, u in enumerate(users[:30]):
            items = np.clip(rng.integers(1, 7, N_ITEMS), 1, 6)
            answer2 = 2 if k % 10 else 5
            w.writerow([u, *items.tolist(), 3, 3, 3, 7, 2, answer2])
    return paths
