"""``valconf`` command line: one subcommand per pipeline stage.

Exit codes: 0 success, 1 usage error, 2 data error. Each subcommand reads
and validates all inputs before writing anything, then writes its outputs
plus a JSON run manifest next to the first output.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .agreement import (
    CONTEXT_KINDS,
    RESULT_COLUMNS,
    TrainConfig,
    build_bundles,
    fit_centroids,
    read_bundles,
    read_user_features,
    run_agreement_experiment,
    write_bundles,
)
from .bayes import DEFAULT_R, TAILS
from .corpus import (
    DataError,
    FilterConfig,
    Reject,
    apply_filters,
    load_agreement,
    load_comments,
    read_exclusion_list,
    write_comments,
    write_rejects,
)
from .extraction import ValueLexicon, extract_labels, load_predictions, write_labels
from .inference import (
    DEFAULT_THRESHOLDS,
    GRID_COLUMNS,
    bf_histogram,
    classical_mds,
    domain_summary,
    prepare_profiles,
    ranked_cells,
    run_grid,
    value_covariance,
)
from .profiles import aggregate_profiles, read_profiles, weighted_dictionary_profile, write_profiles
from .pvq import ZERO_PROFILE, Rejected, cronbach_alpha, read_pvq, score_pvq
from .similarity import METRICS, DEFAULT_METRICS, higher_means_conflict, score_batch
from .svg import render_plots
from .values import VALUES, build_kernel

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("valconf")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with status 2
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# -- run bookkeeping ----------------------------------------------------------


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class Run:
    """Collects inputs and deferred outputs so nothing is written until the
    whole computation has succeeded."""

    def __init__(self, command: str, args: argparse.Namespace):
        self.command = command
        self.args = args
        self.inputs: list[Path] = []
        self.outputs: list[tuple[Path, Callable[[Path], object]]] = []

    def input(self, path: str | Path) -> Path:
        p = Path(path)
        if not p.is_file():
            raise DataError(f"input file not found: {p}")
        if p not in self.inputs:
            self.inputs.append(p)
        return p

    def output(self, path: str | Path, writer: Callable[[Path], object]) -> None:
        self.outputs.append((Path(path), writer))

    def text(self, path: str | Path, content: str) -> None:
        self.output(path, lambda p: p.write_text(content, encoding="utf-8", newline="\n"))

    def commit(self) -> Path | None:
        for path, writer in self.outputs:
            path.parent.mkdir(parents=True, exist_ok=True)
            writer(path)
        if not self.outputs:
            return None
        config = {
            k: (str(v) if isinstance(v, Path) else v)
            for k, v in sorted(vars(self.args).items())
            if k not in ("func", "command")
        }
        manifest = {
            "subcommand": self.command,
            "version": __version__,
            "inputs": [{"path": str(p), "sha256": _sha256(p)} for p in self.inputs],
            "config": config,
            "outputs": [{"path": str(p), "sha256": _sha256(p)} for p, _ in self.outputs],
            "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        }
        target = self.outputs[0][0].with_name(self.outputs[0][0].name + ".manifest.json")
        target.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return target


def _require(args: argparse.Namespace, *names: str) -> None:
    missing = ["--" + n.replace("_", "-") for n in names if getattr(args, n, None) in (None, "")]
    if missing:
        raise UsageError(f"valconf {args.command}: missing required option(s): {', '.join(missing)}")


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(x: float) -> str:
    return "" if math.isnan(x) else f"{x:.10g}"


def _split_list(raw: str, name: str) -> list[str]:
    items = [s.strip() for s in str(raw).split(",") if s.strip()]
    if not items:
        raise UsageError(f"--{name} must list at least one item")
    return items


def _metrics(raw: str) -> list[str]:
    items = _split_list(raw, "metrics")
    bad = [m for m in items if m not in METRICS]
    if bad:
        raise UsageError(f"unknown metric(s) {', '.join(bad)}; choose from {', '.join(METRICS)}")
    return items


def _thresholds(raw: str) -> list[int]:
    try:
        values = [int(s) for s in _split_list(raw, "thresholds")]
    except ValueError as exc:
        raise UsageError(f"--thresholds must be integers: {exc}") from exc
    if any(v < 0 for v in values):
        raise UsageError("--thresholds must be non-negative")
    return values


def _rejects_writer(rejects: list[Reject]) -> Callable[[Path], None]:
    return lambda p: write_rejects(rejects, p)


# -- subcommands -----------------------------------------------------------


def cmd_kernel(args, run: Run) -> None:
    kernel = build_kernel(args.sigma, check_psd=not args.allow_indefinite)
    text = kernel.to_csv()
    if args.out:
        run.text(args.out, text)
    else:
        sys.stdout.write(text)


def cmd_filter(args, run: Run) -> None:
    _require(args, "input", "out")
    rejects: list[Reject] = []
    comments = list(load_comments(run.input(args.input), rejects, args.allow_empty_text))
    exclusion = read_exclusion_list(run.input(args.exclude)) if args.exclude else frozenset()
    cfg = FilterConfig(exclusion, args.min_forum_posts, not args.keep_non_english, args.user_prefix)
    kept, report = apply_filters(comments, cfg)
    report.rejects = len(rejects)
    report.input += len(rejects)
    run.output(args.out, lambda p: write_comments(kept, p))
    run.text(args.report or f"{args.out}.report.json", report.to_json())
    if args.rejects:
        run.output(args.rejects, _rejects_writer(rejects))


def cmd_extract(args, run: Run) -> None:
    _require(args, "out")
    if bool(args.lexicon) == bool(args.predictions):
        raise UsageError("valconf extract: give exactly one of --lexicon (with --in) or --predictions")
    rejects: list[Reject] = []
    if args.lexicon:
        _require(args, "input")
        lex = ValueLexicon.load(run.input(args.lexicon))
        labels = list(extract_labels(load_comments(run.input(args.input), rejects), lex))
    else:
        labels = list(load_predictions(run.input(args.predictions), rejects))
    run.output(args.out, lambda p: write_labels(labels, p))
    if args.rejects:
        run.output(args.rejects, _rejects_writer(rejects))
    elif rejects:
        log.warning("%d input rows rejected (pass --rejects to save them)", len(rejects))


def _read_labels(path: Path):
    # labels written by ``extract`` use the same schema as set-style predictions
    rejects: list[Reject] = []
    labels = list(load_predictions(path, rejects))
    if rejects:
        raise DataError(f"{path}: {len(rejects)} malformed label rows (first: line {rejects[0].line_no}: {rejects[0].reason})")
    return labels


def cmd_profile(args, run: Run) -> None:
    _require(args, "labels", "comments", "out")
    labels = _read_labels(run.input(args.labels))
    comment_rejects: list[Reject] = []
    authorship = {c.id: c.author for c in load_comments(run.input(args.comments), comment_rejects)}
    rejects: list[Reject] = []
    profiles = aggregate_profiles(labels, authorship, rejects)
    if args.weighted:
        _require(args, "lexicon")
        lex = ValueLexicon.load(run.input(args.lexicon))
        profiles = {u: weighted_dictionary_profile(p, lex) for u, p in profiles.items() if p.total_mentions > 0}
    run.output(args.out, lambda p: write_profiles(profiles, p))
    if args.rejects:
        run.output(args.rejects, _rejects_writer(rejects))


def cmd_pvq(args, run: Run) -> None:
    _require(args, "input", "out")
    responses = read_pvq(run.input(args.input))
    profiles, rejected = [], []
    for resp in responses:
        res = score_pvq(resp)
        if isinstance(res, Rejected):
            rejected.append(res)
        else:
            profiles.append(res)
            if ZERO_PROFILE in res.flags:
                log.warning("respondent %s gave flat answers; zero profile", res.user)
    run.output(args.out, lambda p: write_profiles(profiles, p))
    if args.alpha_out:
        rows = []
        for v in VALUES:
            a = cronbach_alpha(responses, v)
            rows.append([v.value, _fmt(a.alpha), _fmt(a.ci95[0]), _fmt(a.ci95[1]), a.n, a.k, str(a.defined).lower()])
        run.text(args.alpha_out, _csv_text(("value", "alpha", "ci_low", "ci_high", "n", "k", "defined"), rows))
    if args.rejected_out:
        run.text(args.rejected_out, _csv_text(("respondent", "reason"), [[r.respondent, r.reason] for r in rejected]))


def _read_pairs(path: Path) -> list[tuple[str, str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if not {"user_a", "user_b"} <= set(reader.fieldnames or []):
            raise DataError(f"{path}: pairs CSV needs columns user_a,user_b")
        return [(row["user_a"], row["user_b"]) for row in reader]


def cmd_similarity(args, run: Run) -> None:
    _require(args, "metric", "profiles", "pairs", "out")
    kernel = build_kernel(args.sigma)
    vectors = prepare_profiles(read_profiles(run.input(args.profiles)), args.threshold)
    pairs = _read_pairs(run.input(args.pairs))
    present = [(a, b) for a, b in pairs if a in vectors and b in vectors]
    scores = iter(
        score_batch(args.metric, np.array([vectors[a] for a, _ in present]).reshape(-1, 10),
                    np.array([vectors[b] for _, b in present]).reshape(-1, 10), kernel, args.tau_variant)
    )  # fmt: skip
    rows = []
    hmc = str(higher_means_conflict(args.metric)).lower()
    for a, b in pairs:
        if a in vectors and b in vectors:
            s = float(next(scores))
            rows.append([a, b, args.metric, _fmt(s), hmc, "ok" if math.isfinite(s) else "undefined"])
        else:
            rows.append([a, b, args.metric, "", hmc, "missing_profile"])
    run.text(args.out, _csv_text(("user_a", "user_b", "metric", "score", "higher_means_conflict", "status"), rows))


def _ranked_text(cells) -> str:
    rows = [[_fmt(c.bf10), c.forum, c.metric, c.threshold, c.bin] for c in ranked_cells(cells)]
    return _csv_text(("bf10", "forum", "metric", "threshold", "bin"), rows)


def _hist_text(bfs) -> str:
    return _csv_text(("bf_low", "bf_high", "count"), [[_fmt(lo), _fmt(hi), n] for lo, hi, n in bf_histogram(bfs)])


def cmd_bftest(args, run: Run) -> None:
    _require(args, "agreement", "profiles", "out")
    metrics = _metrics(args.metrics)
    thresholds = _thresholds(args.thresholds)
    if args.tail != "auto" and args.tail not in TAILS:
        raise UsageError(f"--tail must be auto or one of {', '.join(TAILS)}")
    rejects: list[Reject] = []
    instances = load_agreement(run.input(args.agreement), rejects=rejects)
    if rejects:
        log.warning("%d agreement rows rejected", len(rejects))
    profiles = read_profiles(run.input(args.profiles))
    forums = _split_list(args.forums, "forums") if args.forums else None
    kernel = build_kernel(args.sigma)
    cells = run_grid(instances, profiles, forums, metrics, thresholds, args.tail, args.prior_r, kernel)
    run.text(args.out, _csv_text(GRID_COLUMNS, [[c.row()[k] for k in GRID_COLUMNS] for c in cells]))
    stem = Path(args.out).with_suffix("")
    run.text(args.ranked or f"{stem}_ranked.csv", _ranked_text(cells))
    bfs = [c.bf10 for c in cells if c.status == "ok"]
    run.text(args.hist or f"{stem}_hist.csv", _hist_text(bfs))
    if args.plot:
        if not bfs:
            raise DataError("no computed grid cell to plot")
        run.text(args.plot, render_plots(bfs, "bf_hist"))


def cmd_mds(args, run: Run) -> None:
    _require(args, "profiles", "out")
    vectors = prepare_profiles(read_profiles(run.input(args.profiles)), args.threshold)
    C = value_covariance([vectors[u] for u in sorted(vectors)])
    result = classical_mds(C, 2)
    rows = [[name, f"{x:.10g}", f"{y:.10g}"] for name, (x, y) in zip(result.labels, result.coords)]
    run.text(args.out, _csv_text(("value", "x", "y"), rows))
    if args.cov_out:
        run.text(args.cov_out, _csv_text(("value", *result.labels), [[n, *(f"{x:.10g}" for x in row)] for n, row in zip(result.labels, C)]))
    if args.plot:
        run.text(args.plot, render_plots(result, "mds_scatter"))
    for flag in sorted(result.flags):
        log.warning("mds: %s", flag)


def cmd_agree_features(args, run: Run) -> None:
    _require(args, "agreement", "kind", "out")
    instances = load_agreement(run.input(args.agreement))
    inputs: dict = {}
    if args.kind == "value_profile":
        _require(args, "profiles")
        inputs["profiles"] = read_profiles(run.input(args.profiles))
    elif args.kind == "user_features":
        _require(args, "user_features")
        inputs["user_features"] = read_user_features(run.input(args.user_features))
    elif args.kind == "centroid":
        _require(args, "comments", "lexicon")
        lex = ValueLexicon.load(run.input(args.lexicon))
        users = {i.parent_author for i in instances} | {i.child_author for i in instances}
        _, inputs["centroids"] = fit_centroids(load_comments(run.input(args.comments)), lex, users, args.vocab_size)
    bundles, report = build_bundles(instances, args.kind, seed=args.seed, vocab_size=args.vocab_size, **inputs)
    run.output(args.out, lambda p: write_bundles(bundles, p))
    run.text(args.report or f"{args.out}.report.json", json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")


def cmd_agree_train(args, run: Run) -> None:
    _require(args, "bundles", "out")
    config = TrainConfig(l2=args.l2, lr=args.lr, epochs=args.epochs, seed=args.seed)
    rows, bars = [], []
    for path in _split_list(args.bundles, "bundles"):
        bundles = read_bundles(run.input(path))
        if not bundles:
            raise DataError(f"{path}: no feature bundles")
        kind = bundles[0].kind
        for r in run_agreement_experiment(bundles, config, args.eval_split):
            rows.append([kind, *r.cells()])
            if r.model != "majority":
                bars.append((r.model, r.metrics.f1, r.delta_f1 if "+" in r.model else None))
    run.text(args.out, _csv_text(("kind", *RESULT_COLUMNS), rows))
    if args.plot:
        run.text(args.plot, render_plots(bars, "f1_bars"))


def _read_grid(path: Path):
    from .inference import GridCell

    cells = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in ("forum", "metric", "threshold", "bf10") if c not in (reader.fieldnames or [])]
        if missing:
            raise DataError(f"{path}: grid CSV lacks {', '.join(missing)}")
        for row in reader:
            bf = float(row["bf10"]) if row["bf10"] else math.nan
            status = row.get("status") or ("ok" if row["bf10"] else "skipped")
            cells.append(GridCell(row["forum"], row["metric"], int(row["threshold"]), status=status, bf10=bf))
    return cells


def cmd_report(args, run: Run) -> None:
    _require(args, "grid", "out")
    cells = _read_grid(run.input(args.grid))
    run.text(args.out, _ranked_text(cells))
    bfs = [c.bf10 for c in cells if c.status == "ok"]
    if args.plot:
        if not bfs:
            raise DataError("no computed grid cell to plot")
        run.text(args.plot, render_plots(bfs, "bf_hist"))
    if args.summary_out:
        _require(args, "agreement", "profiles")
        summary = domain_summary(load_agreement(run.input(args.agreement)), read_profiles(run.input(args.profiles)), args.threshold)
        rows = [[s.forum, s.n_users, s.n_profiles, ";".join(s.top_values), _fmt(s.mean_tau)] for s in summary]
        run.text(args.summary_out, _csv_text(("forum", "n_users", "n_profiles", "top_values", "mean_tau"), rows))


# -- parser ----------------------------------------------------------------


def build_parser() -> tuple[_Parser, dict[str, _Parser]]:
    parser = _Parser(prog="valconf", description="Value profiles, value conflict and disagreement analysis.")
    parser.add_argument("--version", action="version", version=f"valconf {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    subs: dict[str, _Parser] = {}

    def add(name: str, func, help: str) -> _Parser:
        p = sub.add_parser(name, help=help, description=help)
        p.add_argument("--config", help="TOML file with option defaults; command-line flags win")
        p.set_defaults(func=func)
        subs[name] = p
        return p

    p = add("kernel", cmd_kernel, "Write the 10x10 circumplex kernel as CSV.")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--allow-indefinite", action="store_true", help="skip the positive semi-definite check")
    p.add_argument("--out", help="CSV path (default: stdout, no manifest)")

    p = add("filter", cmd_filter, "Filter a JSONL comment corpus by forum and language rules.")
    p.add_argument("--in", dest="input", help="comments JSONL")
    p.add_argument("--out", help="filtered comments JSONL")
    p.add_argument("--exclude", help="forum exclusion list, one name per line")
    p.add_argument("--min-forum-posts", type=int, default=50)
    p.add_argument("--keep-non-english", action="store_true")
    p.add_argument("--user-prefix", default="u_")
    p.add_argument("--allow-empty-text", action="store_true")
    p.add_argument("--report", help="filter report JSON (default: <out>.report.json)")
    p.add_argument("--rejects", help="rejected lines JSONL")

    p = add("extract", cmd_extract, "Label comments with relevant values (dictionary or predictions).")
    p.add_argument("--lexicon", help="value lexicon (JSON or value,term CSV)")
    p.add_argument("--in", dest="input", help="comments JSONL (with --lexicon)")
    p.add_argument("--predictions", help="classifier predictions JSONL")
    p.add_argument("--out", help="labels JSONL")
    p.add_argument("--rejects", help="rejected lines JSONL")

    p = add("profile", cmd_profile, "Aggregate comment labels into per-user value profiles.")
    p.add_argument("--labels", help="labels JSONL from extract")
    p.add_argument("--comments", help="comments JSONL giving authorship")
    p.add_argument("--out", help="profiles CSV")
    p.add_argument("--weighted", action="store_true", help="apply 1/|terms| lexicon weights and normalize")
    p.add_argument("--lexicon", help="lexicon for --weighted")
    p.add_argument("--rejects", help="labels with unknown comment ids (JSONL)")

    p = add("pvq", cmd_pvq, "Score PVQ-21 survey responses into self-reported profiles.")
    p.add_argument("--in", dest="input", help="PVQ responses CSV")
    p.add_argument("--out", help="survey profiles CSV")
    p.add_argument("--alpha-out", help="Cronbach alpha per value (CSV)")
    p.add_argument("--rejected-out", help="respondents failing attention checks (CSV)")

    p = add("similarity", cmd_similarity, "Score user pairs with one similarity metric.")
    p.add_argument("--metric", choices=METRICS)
    p.add_argument("--profiles", help="profiles CSV")
    p.add_argument("--pairs", help="CSV with user_a,user_b")
    p.add_argument("--out", help="scores CSV")
    p.add_argument("--threshold", type=int, default=1, help="minimum value mentions for raw profiles")
    p.add_argument("--sigma", type=float, default=1.0, help="kernel width for wc")
    p.add_argument("--tau-variant", choices=("a", "b"), default="a")

    p = add("bftest", cmd_bftest, "Run the JZS Bayes factor grid: conflict in disagree vs agree pairs.")
    p.add_argument("--agreement", help="agreement pairs CSV/JSONL")
    p.add_argument("--profiles", help="profiles CSV")
    p.add_argument("--metrics", default=",".join(DEFAULT_METRICS))
    p.add_argument("--thresholds", default=",".join(map(str, DEFAULT_THRESHOLDS)))
    p.add_argument("--forums", help="comma-separated forums (default: all in the agreement file)")
    p.add_argument("--tail", default="auto", help="auto, lower, higher or two_sided")
    p.add_argument("--prior-r", type=float, default=DEFAULT_R)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--out", help="grid CSV")
    p.add_argument("--ranked", help="cells ranked by BF10 (default: <out>_ranked.csv)")
    p.add_argument("--hist", help="BF10 bin counts (default: <out>_hist.csv)")
    p.add_argument("--plot", help="BF10 histogram SVG")

    p = add("mds", cmd_mds, "Embed the ten values by MDS of their covariance across users.")
    p.add_argument("--profiles", help="profiles CSV")
    p.add_argument("--threshold", type=int, default=1)
    p.add_argument("--out", help="coordinates CSV")
    p.add_argument("--cov-out", help="covariance matrix CSV")
    p.add_argument("--plot", help="scatter SVG")

    p = add("agree-features", cmd_agree_features, "Build agreement feature bundles for one context kind.")
    p.add_argument("--agreement", help="agreement pairs CSV/JSONL")
    p.add_argument("--kind", choices=CONTEXT_KINDS)
    p.add_argument("--profiles", help="profiles CSV (value_profile)")
    p.add_argument("--user-features", help="user features CSV (user_features)")
    p.add_argument("--comments", help="background comments JSONL (centroid)")
    p.add_argument("--lexicon", help="value lexicon (centroid)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--vocab-size", type=int, default=768)
    p.add_argument("--out", help="bundles JSONL")
    p.add_argument("--report", help="drop report JSON (default: <out>.report.json)")

    p = add("agree-train", cmd_agree_train, "Train and evaluate agreement classifiers on feature bundles.")
    p.add_argument("--bundles", help="comma-separated bundle files, one per context kind")
    p.add_argument("--out", help="metrics CSV")
    p.add_argument("--plot", help="F1 bar chart SVG")
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eval-split", choices=("val", "test"), default="test")

    p = add("report", cmd_report, "Rank a BF grid and optionally summarize forums.")
    p.add_argument("--grid", help="grid CSV from bftest")
    p.add_argument("--out", help="ranked CSV")
    p.add_argument("--plot", help="BF10 histogram SVG")
    p.add_argument("--agreement", help="agreement pairs (for --summary-out)")
    p.add_argument("--profiles", help="profiles CSV (for --summary-out)")
    p.add_argument("--threshold", type=int, default=1)
    p.add_argument("--summary-out", help="per-forum summary CSV")
    return parser, subs


def _config_defaults(path: str, command: str, sub: _Parser) -> dict:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise DataError(f"invalid TOML in {path}: {exc}") from exc
    known = {a.dest for a in sub._actions} - {"config", "help"}
    out = {}
    # top-level keys are shared, so ones this command lacks are skipped
    for key, value in data.items():
        dest = {"in": "input"}.get(key, key.replace("-", "_"))
        if not isinstance(value, dict) and dest in known:
            out[dest] = value
    for key, value in data.get(command, {}).items():
        dest = {"in": "input"}.get(key, key.replace("-", "_"))
        if dest not in known:
            raise UsageError(f"{path}: unknown option {key!r} for {command}")
        out[dest] = value
    return {k: ",".join(map(str, v)) if isinstance(v, list) else v for k, v in out.items()}


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subs = build_parser()
    try:
        try:
            args = parser.parse_args(argv)
            if args.command is None:
                parser.print_help(sys.stderr)
                return 1
            if args.config:
                subs[args.command].set_defaults(**_config_defaults(args.config, args.command, subs[args.command]))
                args = parser.parse_args(argv)
        except SystemExit as exc:  # --help / --version
            return int(exc.code or 0)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
        run = Run(args.command, args)
        args.func(args, run)
        run.commit()
        return 0
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (DataError, ValueError, KeyError, OSError) as exc:
        print(f"valconf {argv[0] if argv else ''}: data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
