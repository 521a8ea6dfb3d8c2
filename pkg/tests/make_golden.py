"""Regenerate tests/golden from the fixture pipeline.

Run only after a deliberate, reviewed change to pipeline output:
    python tests/make_golden.py
"""

from __future__ import annotations

import hashlib
import shutil
import sys
from pathlib import Path

from valconf.cli import main
from valconf.synthetic import write_fixture

GOLDEN_DIR = Path(__file__).parent / "golden"
# small outputs stored verbatim; large ones as sha256 digests
VERBATIM = ("filtered.jsonl.report.json", "profiles.csv", "grid.csv", "grid_ranked.csv", "grid_hist.csv", "hist.svg")
DIGESTED = ("filtered.jsonl", "labels.jsonl")


def run_pipeline(workdir: Path) -> dict[str, Path]:
    """filter -> extract -> profile -> bftest on the seed-0 fixture inside ``workdir``."""
    src = write_fixture(workdir / "input", seed=0)
    out = workdir / "out"
    steps = [
        ["filter", "--in", str(src["comments"]), "--exclude", str(src["exclude"]), "--out", str(out / "filtered.jsonl")],
        ["extract", "--lexicon", str(src["lexicon"]), "--in", str(out / "filtered.jsonl"), "--out", str(out / "labels.jsonl")],
        ["profile", "--labels", str(out / "labels.jsonl"), "--comments", str(out / "filtered.jsonl"),
         "--out", str(out / "profiles.csv")],  # fmt: skip
        ["bftest", "--agreement", str(src["agreement"]), "--profiles", str(out / "profiles.csv"),
         "--out", str(out / "grid.csv"), "--plot", str(out / "hist.svg")],  # fmt: skip
    ]
    for argv in steps:
        code = main(argv)
        if code != 0:
            raise RuntimeError(f"valconf {' '.join(argv)} exited {code}")
    return {name: out / name for name in VERBATIM + DIGESTED}


def digest_lines(outputs: dict[str, Path]) -> str:
    return "".join(f"{hashlib.sha256(outputs[n].read_bytes()).hexdigest()}  {n}\n" for n in DIGESTED)


def regenerate(tmp: Path) -> None:
    outputs = run_pipeline(tmp)
    GOLDEN_DIR.mkdir(exist_ok=True)
    for name in VERBATIM:
        shutil.copyfile(outputs[name], GOLDEN_DIR / name)
    (GOLDEN_DIR / "SHA256SUMS").write_text(digest_lines(outputs), encoding="utf-8")


if __name__ == "__main__":
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        regenerate(Path(tmp))
    print(f"wrote golden files to {GOLDEN_DIR}", file=sys.stderr)
