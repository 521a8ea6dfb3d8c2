"""The ten Schwartz basic values, their circumplex order and the circumplex kernel."""

from __future__ import annotations

import csv
import enum
import io
import re
from dataclasses import dataclass, field

import numpy as np

N_VALUES = 10
PSD_TOL = 1e-9


class Value(enum.Enum):
    """Schwartz basic value; ``position`` is its index on the circumplex."""

    SELF_DIRECTION = "self-direction"
    STIMULATION = "stimulation"
    HEDONISM = "hedonism"
    ACHIEVEMENT = "achievement"
    POWER = "power"
    SECURITY = "security"
    CONFORMITY = "conformity"
    TRADITION = "tradition"
    BENEVOLENCE = "benevolence"
    UNIVERSALISM = "universalism"

    @property
    def position(self) -> int:
        return _POSITIONS[self]

    @property
    def higher_order(self) -> str:
        return HIGHER_ORDER[self]

    def __str__(self) -> str:
        return self.value


VALUES: tuple[Value, ...] = tuple(Value)
VALUE_NAMES: tuple[str, ...] = tuple(v.value for v in VALUES)
_POSITIONS = {v: i for i, v in enumerate(VALUES)}

HIGHER_ORDER: dict[Value, str] = {
    Value.SELF_DIRECTION: "openness-to-change",
    Value.STIMULATION: "openness-to-change",
    # hedonism straddles openness and self-enhancement; grouping is for reporting only
    Value.HEDONISM: "openness-to-change",
    Value.ACHIEVEMENT: "self-enhancement",
    Value.POWER: "self-enhancement",
    Value.SECURITY: "conservation",
    Value.CONFORMITY: "conservation",
    Value.TRADITION: "conservation",
    Value.BENEVOLENCE: "self-transcendence",
    Value.UNIVERSALISM: "self-transcendence",
}

_NAME_RE = re.compile(r"[\s_]+")


def value_of(position: int) -> Value:
    if not 0 <= position < N_VALUES:
        raise ValueError(f"circumplex position out of range: {position}")
    return VALUES[position]


def parse_value(name: str | Value) -> Value:
    """Resolve a value name leniently (case, ``_`` or spaces for ``-``)."""
    if isinstance(name, Value):
        return name
    key = _NAME_RE.sub("-", str(name).strip().lower())
    if key == "selfdirection":
        key = "self-direction"
    try:
        return Value(key)
    except ValueError:
        raise ValueError(f"unknown Schwartz value: {name!r}") from None


def circular_distance(a: Value | int, b: Value | int) -> int:
    """Shortest number of steps between two values on the 10-cycle."""
    i = a.position if isinstance(a, Value) else int(a)
    j = b.position if isinstance(b, Value) else int(b)
    diff = abs(i - j) % N_VALUES
    return min(diff, N_VALUES - diff)


def distance_matrix() -> np.ndarray:
    idx = np.arange(N_VALUES)
    diff = np.abs(idx[:, None] - idx[None, :])
    return np.minimum(diff, N_VALUES - diff)


@dataclass(frozen=True, eq=False)
class CircumplexKernel:
    """Gaussian similarity between values as a function of circumplex distance."""

    sigma: float
    B: np.ndarray = field(repr=False)

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.B).min())

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["value", *VALUE_NAMES])
        for name, row in zip(VALUE_NAMES, self.B):
            writer.writerow([name, *(f"{x:.12g}" for x in row)])
        return buf.getvalue()


def build_kernel(sigma: float = 1.0, check_psd: bool = True) -> CircumplexKernel:
    """B[i, j] = exp(-d(i, j)^2 / (2 sigma^2)).

    The kernel is only positive semi-definite for sigma below roughly 1.45;
    wider kernels are rejected unless ``check_psd`` is disabled, because the
    weighted cosine needs a non-negative B-norm.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    d = distance_matrix().astype(float)
    B = np.exp(-(d**2) / (2.0 * sigma**2))
    B.setflags(write=False)
    kernel = CircumplexKernel(sigma=float(sigma), B=B)
    if check_psd and kernel.min_eigenvalue < -PSD_TOL:
        raise ValueError(
            f"circumplex kernel is indefinite at sigma={sigma} "
            f"(min eigenvalue {kernel.min_eigenvalue:.3g})"
        )
    return kernel


def identity_kernel() -> CircumplexKernel:
    B = np.eye(N_VALUES)
    B.setflags(write=False)
    return CircumplexKernel(sigma=0.0, B=B)
