"""Agreement prediction with user context: TF-IDF text features, user
contexts (noise, post centroids, account features, value profiles), a
time-ordered split, multinomial logistic regression and macro metrics."""

from __future__ import annotations

import csv
import json
import logging
import math
import zlib
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence, TypeVar

import numpy as np
from scipy import sparse

from .corpus import LABELS, AgreementInstance, Comment
from .extraction import ValueLexicon, preprocess
from .profiles import ValueProfile, normalize

log = logging.getLogger(__name__)

VOCAB_SIZE = 768
NOISE_DIM = 768
CONTEXT_KINDS = ("noise", "centroid", "user_features", "value_profile")
USER_FEATURES = (
    "comment_karma",
    "link_karma",
    "date_created",
    "gold_status",
    "mod_status",
    "employee_status",
    "num_gilded",
    "num_comments",
    "num_links",
)
_BOOL_FEATURES = {"gold_status", "mod_status", "employee_status"}
LABEL_INDEX = {lab: i for i, lab in enumerate(LABELS)}


# -- TF-IDF ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TfidfModel:
    vocabulary: dict[str, int]
    idf: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.vocabulary)

    def transform(self, texts: Iterable[str]) -> sparse.csr_matrix:
        """L2-normalized tf*idf rows; unseen terms are ignored."""
        rows, cols, vals = [], [], []
        n = 0
        for n, text in enumerate(texts, start=1):
            counts = Counter(t for t in preprocess(text) if t in self.vocabulary)
            if not counts:
                continue
            idx = np.array(sorted(self.vocabulary[t] for t in counts))
            inv = {self.vocabulary[t]: c for t, c in counts.items()}
            w = np.array([inv[i] for i in idx], dtype=float) * self.idf[idx]
            w /= np.linalg.norm(w)
            rows.extend([n - 1] * len(idx))
            cols.extend(idx.tolist())
            vals.extend(w.tolist())
        return sparse.csr_matrix((vals, (rows, cols)), shape=(n, self.dim))

    def transform_one(self, text: str) -> np.ndarray:
        return self.transform([text]).toarray()[0]


def fit_tfidf(corpus: Sequence[str], vocab_size: int = VOCAB_SIZE) -> TfidfModel:
    """Keep the ``vocab_size`` terms with highest document frequency (ties
    alphabetical); idf = ln((1 + N) / (1 + df)) + 1."""
    if not corpus:
        raise ValueError("cannot fit TF-IDF on an empty corpus")
    df: Counter[str] = Counter()
    for text in corpus:
        df.update(set(preprocess(text)))
    ranked = sorted(df.items(), key=lambda kv: (-kv[1], kv[0]))[:vocab_size]
    terms = sorted(t for t, _ in ranked)
    vocabulary = {t: i for i, t in enumerate(terms)}
    n_docs = len(corpus)
    idf = np.array([math.log((1 + n_docs) / (1 + df[t])) + 1 for t in terms])
    return TfidfModel(vocabulary, idf)


# -- user contexts --------------------------------------------------------


class MissingContext(KeyError):
    pass


@dataclass(frozen=True)
class UserFeatures:
    comment_karma: float
    link_karma: float
    date_created: float
    gold_status: float
    mod_status: float
    employee_status: float
    num_gilded: float
    num_comments: float
    num_links: float

    @property
    def vector(self) -> np.ndarray:
        return np.array([getattr(self, f) for f in USER_FEATURES], dtype=float)


def _feature_value(name: str, raw: str) -> float:
    raw = raw.strip()
    if name in _BOOL_FEATURES:
        low = raw.lower()
        if low in ("true", "1", "yes"):
            return 1.0
        if low in ("false", "0", "no", ""):
            return 0.0
        raise ValueError(f"{name} must be boolean, got {raw!r}")
    return float(raw)


def read_user_features(path: str | Path) -> dict[str, UserFeatures]:
    """CSV ``user`` + the nine account features; date_created in epoch seconds."""
    out = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [f for f in ("user", *USER_FEATURES) if f not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"{path}: user feature header lacks {', '.join(missing)}")
        for row in reader:
            out[row["user"]] = UserFeatures(**{f: _feature_value(f, row[f]) for f in USER_FEATURES})
    return out


@dataclass(frozen=True, eq=False)
class Centroid:
    vector: np.ndarray
    n_posts: int

    @property
    def empty(self) -> bool:
        return self.n_posts == 0


def user_centroid(user_posts: Sequence[str], lex: ValueLexicon, vec: TfidfModel) -> Centroid:
    """Mean TF-IDF vector of the posts containing at least one lexicon term.

    A user without such posts gets the zero vector (``empty`` is true).
    """
    qualifying = [p for p in user_posts if lex.contains_term(preprocess(p))]
    if not qualifying:
        return Centroid(np.zeros(vec.dim), 0)
    X = vec.transform(qualifying)
    return Centroid(np.asarray(X.mean(axis=0)).ravel(), len(qualifying))


def fit_centroids(
    comments: Iterable[Comment], lex: ValueLexicon, users: Iterable[str] | None = None, vocab_size: int = VOCAB_SIZE
) -> tuple[TfidfModel, dict[str, Centroid]]:
    """Fit a vectorizer on value-bearing background posts and average per user."""
    wanted = set(users) if users is not None else None
    posts: dict[str, list[str]] = {}
    for c in comments:
        if wanted is None or c.author in wanted:
            posts.setdefault(c.author, []).append(c.text)
    qualifying = [p for ps in posts.values() for p in ps if lex.contains_term(preprocess(p))]
    if not qualifying:
        raise ValueError("no background post contains a lexicon term")
    model = fit_tfidf(qualifying, vocab_size)
    return model, {u: user_centroid(ps, lex, model) for u, ps in sorted(posts.items())}


def noise_context(user: str, seed: int, dim: int = NOISE_DIM) -> np.ndarray:
    """Uniform [0, 1) vector, reproducible per (seed, user)."""
    rng = np.random.default_rng([seed, zlib.crc32(user.encode("utf-8"))])
    return rng.random(dim)


def make_context(
    kind: str,
    user: str,
    *,
    seed: int = 0,
    profiles: Mapping[str, ValueProfile] | None = None,
    user_features: Mapping[str, UserFeatures] | None = None,
    centroids: Mapping[str, Centroid] | None = None,
) -> np.ndarray:
    """Unstandardized context vector for one user; ``MissingContext`` if absent."""
    if kind == "noise":
        return noise_context(user, seed)
    if kind == "value_profile":
        p = (profiles or {}).get(user)
        if p is None or (p.is_raw and p.total_mentions == 0):
            raise MissingContext(user)
        return normalize(p).vector.copy()
    if kind == "user_features":
        feats = (user_features or {}).get(user)
        if feats is None:
            raise MissingContext(user)
        return feats.vector
    if kind == "centroid":
        c = (centroids or {}).get(user)
        if c is None or c.empty:
            raise MissingContext(user)
        return c.vector.copy()
    raise ValueError(f"unknown context kind {kind!r}; expected one of {', '.join(CONTEXT_KINDS)}")


# -- split and standardization -------------------------------------------

T = TypeVar("T")


def time_split(instances: Sequence[T], ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)) -> tuple[list[T], list[T], list[T]]:
    """Oldest share for training, then validation, newest for test (ties by id)."""
    if len(ratios) != 3 or any(r < 0 for r in ratios) or not math.isclose(sum(ratios), 1.0):
        raise ValueError(f"ratios must be three non-negative numbers summing to 1, got {ratios}")
    ordered = sorted(instances, key=lambda i: (i.timestamp, i.id))
    n = len(ordered)
    n_train = round(n * ratios[0])
    n_val = round(n * (ratios[0] + ratios[1])) - n_train
    return ordered[:n_train], ordered[n_train : n_train + n_val], ordered[n_train + n_val :]


@dataclass(frozen=True, eq=False)
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    @property
    def constant(self) -> np.ndarray:
        return self.std == 0

    @classmethod
    def fit(cls, X: np.ndarray) -> Standardizer:
        X = np.asarray(X, dtype=float)
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        # treat rounding-level spread as constant
        std = np.where(std <= 1e-12 * np.maximum(1.0, np.abs(mean)), 0.0, std)
        return cls(mean, std)

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        safe = np.where(self.constant, 1.0, self.std)
        out = (X - self.mean) / safe
        out[:, self.constant] = 0.0
        return out


# -- logistic regression ---------------------------------------------------


class TrainingDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    l2: float = 1e-4
    lr: float = 0.1
    epochs: int = 500
    seed: int = 0
    init_scale: float = 0.0


def _softmax(Z: np.ndarray) -> np.ndarray:
    Z = Z - Z.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


def _one_hot(y: np.ndarray, k: int) -> np.ndarray:
    Y = np.zeros((len(y), k))
    Y[np.arange(len(y)), y] = 1.0
    return Y


def loss_and_grad(W: np.ndarray, b: np.ndarray, X, y: np.ndarray, l2: float) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean cross-entropy plus (l2 / 2) * ||W||^2, and its gradient."""
    n, k = X.shape[0], W.shape[1]
    P = _softmax(np.asarray(X @ W) + b)
    Y = _one_hot(y, k)
    loss = -np.log(np.clip(P[np.arange(n), y], 1e-300, None)).mean() + 0.5 * l2 * (W * W).sum()
    D = (P - Y) / n
    gW = np.asarray(X.T @ D) + l2 * W
    gb = D.sum(axis=0)
    return float(loss), gW, gb


@dataclass(eq=False)
class LogisticRegression:
    W: np.ndarray
    b: np.ndarray
    history: list[float] = field(default_factory=list, repr=False)

    def predict_proba(self, X) -> np.ndarray:
        return _softmax(np.asarray(X @ self.W) + self.b)

    def predict(self, X) -> np.ndarray:
        return self.predict_proba(X).argmax(axis=1)


def init_model(n_features: int, n_classes: int, config: TrainConfig) -> LogisticRegression:
    rng = np.random.default_rng(config.seed)
    W = config.init_scale * rng.standard_normal((n_features, n_classes))
    return LogisticRegression(W, np.zeros(n_classes))


def train_logreg(X, y: Sequence[int], config: TrainConfig = TrainConfig(), n_classes: int = len(LABELS)) -> LogisticRegression:
    """Full-batch gradient descent on the L2-regularized softmax loss."""
    y = np.asarray(y, dtype=int)
    if len(np.unique(y)) < 2:
        raise ValueError("training labels must contain at least 2 classes")
    model = init_model(X.shape[1], n_classes, config)
    for epoch in range(config.epochs):
        # overflow shows up as a non-finite loss, reported below
        with np.errstate(over="ignore", invalid="ignore"):
            loss, gW, gb = loss_and_grad(model.W, model.b, X, y, config.l2)
        if not math.isfinite(loss):
            raise TrainingDiverged(
                f"loss became {loss} at epoch {epoch}; try a smaller learning rate (e.g. lr={config.lr / 10:g})"
            )
        model.history.append(loss)
        model.W -= config.lr * gW
        model.b -= config.lr * gb
    return model


def gradient_check(W: np.ndarray, b: np.ndarray, X, y: np.ndarray, l2: float, eps: float = 1e-6) -> float:
    """Max relative error between the analytic gradient and central differences."""
    _, gW, gb = loss_and_grad(W, b, X, y, l2)
    analytic = np.concatenate([gW.ravel(), gb])
    theta = np.concatenate([W.ravel(), b])
    numeric = np.empty_like(theta)
    for i in range(theta.size):
        up, down = theta.copy(), theta.copy()
        up[i] += eps
        down[i] -= eps
        lu = loss_and_grad(up[: W.size].reshape(W.shape), up[W.size :], X, y, l2)[0]
        ld = loss_and_grad(down[: W.size].reshape(W.shape), down[W.size :], X, y, l2)[0]
        numeric[i] = (lu - ld) / (2 * eps)
    denom = np.maximum(np.abs(analytic) + np.abs(numeric), 1e-8)
    return float((np.abs(analytic - numeric) / denom).max())


@dataclass(frozen=True)
class MajorityBaseline:
    label: int

    @classmethod
    def fit(cls, y: Sequence[int]) -> MajorityBaseline:
        counts = Counter(int(v) for v in y)
        if not counts:
            raise ValueError("cannot fit a majority baseline without labels")
        return cls(min(counts, key=lambda k: (-counts[k], k)))

    def predict(self, X) -> np.ndarray:
        return np.full(X.shape[0], self.label)


# -- evaluation ---------------------------------------------------------------


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    f1: float
    accuracy: float
    per_class: tuple[tuple[float, float, float], ...] = ()


def confusion_matrix(y_true: Sequence[int], y_pred: Sequence[int], k: int = len(LABELS)) -> np.ndarray:
    M = np.zeros((k, k), dtype=np.int64)
    np.add.at(M, (np.asarray(y_true, int), np.asarray(y_pred, int)), 1)
    return M


def classification_metrics(y_true: Sequence[int], y_pred: Sequence[int], k: int = len(LABELS)) -> Metrics:
    """Macro precision/recall/F1 over all ``k`` classes; 0 for empty denominators."""
    if len(y_true) == 0:
        raise ValueError("cannot evaluate an empty split")
    M = confusion_matrix(y_true, y_pred, k)
    tp = np.diag(M).astype(float)
    pred = M.sum(axis=0)
    true = M.sum(axis=1)
    prec = np.divide(tp, pred, out=np.zeros(k), where=pred > 0)
    rec = np.divide(tp, true, out=np.zeros(k), where=true > 0)
    f1 = np.divide(2 * prec * rec, prec + rec, out=np.zeros(k), where=(prec + rec) > 0)
    return Metrics(
        float(prec.mean()),
        float(rec.mean()),
        float(f1.mean()),
        float(tp.sum() / M.sum()),
        tuple(zip(prec.tolist(), rec.tolist(), f1.tolist())),
    )


def evaluate(model, X, y: Sequence[int]) -> Metrics:
    return classification_metrics(y, model.predict(X))


def delta_symbol(delta_f1: float) -> str:
    """Change marker relative to text-only: ``--``, ``-``, ``=`` or ``+``."""
    if delta_f1 > 0:
        return "+"
    if delta_f1 == 0:
        return "="
    return "--" if delta_f1 < -0.1 else "-"


# -- feature bundles -------------------------------------------------------


@dataclass(eq=False)
class FeatureBundle:
    id: str
    label: str
    timestamp: int
    split: str
    kind: str
    text_parent: dict[int, float]
    text_child: dict[int, float]
    ctx_parent: list[float]
    ctx_child: list[float]

    def to_json(self) -> str:
        d = asdict(self)
        d["text_parent"] = {str(k): v for k, v in sorted(self.text_parent.items())}
        d["text_child"] = {str(k): v for k, v in sorted(self.text_child.items())}
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> FeatureBundle:
        d = json.loads(line)
        d["text_parent"] = {int(k): float(v) for k, v in d["text_parent"].items()}
        d["text_child"] = {int(k): float(v) for k, v in d["text_child"].items()}
        return cls(**d)


@dataclass
class BundleReport:
    kind: str
    input: int = 0
    kept: int = 0
    dropped_missing_context: int = 0
    text_vocab: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def _sparse_row(M: sparse.csr_matrix, i: int) -> dict[int, float]:
    start, end = M.indptr[i], M.indptr[i + 1]
    return {int(j): float(v) for j, v in zip(M.indices[start:end], M.data[start:end])}


def build_bundles(
    instances: Sequence[AgreementInstance],
    kind: str,
    *,
    seed: int = 0,
    vocab_size: int = VOCAB_SIZE,
    profiles: Mapping[str, ValueProfile] | None = None,
    user_features: Mapping[str, UserFeatures] | None = None,
    centroids: Mapping[str, Centroid] | None = None,
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
) -> tuple[list[FeatureBundle], BundleReport]:
    """Drop pairs lacking context for either user, split by time, fit TF-IDF
    on training texts and emit one bundle per remaining pair."""
    report = BundleReport(kind, input=len(instances))
    contexts: dict[str, np.ndarray] = {}
    kept: list[AgreementInstance] = []

    def ctx(user: str) -> np.ndarray:
        if user not in contexts:
            contexts[user] = make_context(
                kind, user, seed=seed, profiles=profiles, user_features=user_features, centroids=centroids
            )
        return contexts[user]

    for inst in instances:
        try:
            ctx(inst.parent_author)
            ctx(inst.child_author)
        except MissingContext:
            report.dropped_missing_context += 1
            continue
        kept.append(inst)
    train, val, test = time_split(kept, ratios)
    if not train:
        raise ValueError("no training instances left after dropping missing contexts")
    tfidf = fit_tfidf([t for i in train for t in (i.parent_text, i.child_text)], vocab_size)
    report.text_vocab = tfidf.dim
    bundles = []
    for split_name, part in (("train", train), ("val", val), ("test", test)):
        if not part:
            continue
        P = tfidf.transform(i.parent_text for i in part)
        C = tfidf.transform(i.child_text for i in part)
        for row, inst in enumerate(part):
            bundles.append(
                FeatureBundle(
                    id=inst.id,
                    label=inst.label,
                    timestamp=inst.timestamp,
                    split=split_name,
                    kind=kind,
                    text_parent=_sparse_row(P, row),
                    text_child=_sparse_row(C, row),
                    ctx_parent=ctx(inst.parent_author).tolist(),
                    ctx_child=ctx(inst.child_author).tolist(),
                )
            )
    report.kept = len(bundles)
    return bundles, report


def write_bundles(bundles: Iterable[FeatureBundle], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for b in bundles:
            fh.write(b.to_json() + "\n")


def read_bundles(path: str | Path) -> list[FeatureBundle]:
    with open(path, encoding="utf-8") as fh:
        return [FeatureBundle.from_json(line) for line in fh if line.strip()]


def _text_matrix(bundles: Sequence[FeatureBundle], dim: int) -> sparse.csr_matrix:
    blocks = []
    for attr in ("text_parent", "text_child"):
        rows, cols, vals = [], [], []
        for r, b in enumerate(bundles):
            for j, v in getattr(b, attr).items():
                rows.append(r)
                cols.append(j)
                vals.append(v)
        blocks.append(sparse.csr_matrix((vals, (rows, cols)), shape=(len(bundles), dim)))
    return sparse.hstack(blocks, format="csr")


def _context_matrix(bundles: Sequence[FeatureBundle]) -> np.ndarray:
    return np.array([b.ctx_parent + b.ctx_child for b in bundles], dtype=float)


@dataclass(frozen=True)
class ResultRow:
    model: str
    metrics: Metrics
    delta_f1: float | None = None

    def cells(self) -> list[str]:
        m = self.metrics
        delta = "" if self.delta_f1 is None else f"{self.delta_f1:.4f}"
        return [self.model, f"{m.precision:.4f}", f"{m.recall:.4f}", f"{m.f1:.4f}", f"{m.accuracy:.4f}", delta]


RESULT_COLUMNS = ("model", "P", "R", "F1", "Acc", "dF1")


def run_agreement_experiment(
    bundles: Sequence[FeatureBundle], config: TrainConfig = TrainConfig(), eval_split: str = "test"
) -> list[ResultRow]:
    """Majority, context-only, text-only and text+context rows for one context kind.

    Contexts are standardized with training-split statistics only.
    """
    train = [b for b in bundles if b.split == "train"]
    held = [b for b in bundles if b.split == eval_split]
    if not train or not held:
        raise ValueError(f"need non-empty train and {eval_split} splits")
    kind = train[0].kind
    dim = 1 + max(
        (j for b in bundles for d in (b.text_parent, b.text_child) for j in d), default=-1
    )
    dim = max(dim, 1)
    y_tr = np.array([LABEL_INDEX[b.label] for b in train])
    y_te = np.array([LABEL_INDEX[b.label] for b in held])
    T_tr, T_te = _text_matrix(train, dim), _text_matrix(held, dim)
    scaler = Standardizer.fit(_context_matrix(train))
    C_tr = scaler.transform(_context_matrix(train))
    C_te = scaler.transform(_context_matrix(held))

    rows = [ResultRow("majority", evaluate(MajorityBaseline.fit(y_tr), T_te, y_te))]
    ctx_model = train_logreg(C_tr, y_tr, config)
    rows.append(ResultRow(f"context_only[{kind}]", evaluate(ctx_model, C_te, y_te)))
    text_model = train_logreg(T_tr, y_tr, config)
    text_metrics = evaluate(text_model, T_te, y_te)
    rows.append(ResultRow("tfidf_logreg", text_metrics, 0.0))
    both_tr = sparse.hstack([T_tr, sparse.csr_matrix(C_tr)], format="csr")
    both_te = sparse.hstack([T_te, sparse.csr_matrix(C_te)], format="csr")
    both = evaluate(train_logreg(both_tr, y_tr, config), both_te, y_te)
    rows.append(ResultRow(f"tfidf_logreg+{kind}", both, both.f1 - text_metrics.f1))
    return rows
