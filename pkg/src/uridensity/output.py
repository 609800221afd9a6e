"""Deterministic CSV/JSON writers and the run configuration sidecar.

CSV: UTF-8, LF line endings, a header row, floats as ``repr`` (shortest
round-trip form).  JSON: sorted keys, two-space indent, trailing newline.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

SIDECAR_SUFFIX = ".config.json"


def _plain(x: Any) -> Any:
    """Convert numpy scalars, tuples and Fractions to JSON-native values."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if hasattr(x, "to_dict"):
        return _plain(x.to_dict())
    return x


def format_cell(x: Any) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return repr(x) if math.isfinite(x) else "nan"
    return str(x)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]], comment: str | None = None) -> str:
    lines = [] if comment is None else [f"# {comment}"]
    lines.append(",".join(header))
    lines.extend(",".join(format_cell(c) for c in r) for r in rows)
    return "\n".join(lines) + "\n"


def json_text(obj: Any) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


@dataclass
class RunConfig:
    """Everything needed to reproduce one CLI output byte for byte."""

    subcommand: str
    seed: int
    params: dict = field(default_factory=dict)
    format: str = "json"
    out: str | None = None

    def to_dict(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "seed": self.seed,
            "params": _plain(self.params),
            "format": self.format,
            "out": self.out,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        return cls(d["subcommand"], int(d["seed"]), dict(d.get("params", {})), d.get("format", "json"),
                   d.get("out"))

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def write_text(path: str | Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def sidecar_path(out: str | Path) -> Path:
    return Path(str(out) + SIDECAR_SUFFIX)
