"""Sampled spectra (T over a k grid, or over a rho-k grid) and their file formats."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__

CSV_DIGITS = 12
JSON_DIGITS = 17


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    n: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.spacing not in ("linear", "log"):
            raise ValueError(f"unknown spacing {self.spacing!r}")
        if self.n < 1:
            raise ValueError(f"axis {self.name}: need at least one sample")
        if self.n > 1 and not self.hi > self.lo:
            raise ValueError(f"axis {self.name}: empty range [{self.lo}, {self.hi}]")
        if self.spacing == "log" and self.lo <= 0:
            raise ValueError(f"axis {self.name}: log spacing needs a positive lower bound")

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.lo, self.hi, self.n)
        return np.linspace(self.lo, self.hi, self.n)

    def to_dict(self) -> dict:
        return {"name": self.name, "lo": self.lo, "hi": self.hi, "n": self.n,
                "spacing": self.spacing}


@dataclass
class SpectrumGrid:
    axes: list[Axis]
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        expected = math.prod(a.n for a in self.axes)
        if self.values.size != expected:
            raise ValueError(f"grid holds {self.values.size} values, axes imply {expected}")
        self.values = self.values.reshape([a.n for a in self.axes])
        self.metadata.setdefault("version", __version__)

    def to_dict(self) -> dict:
        return {
            "axes": [a.to_dict() for a in self.axes],
            "values": self.values.ravel().tolist(),
            "metadata": self.metadata,
        }


def fmt_csv(x: float) -> str:
    return f"{x:.{CSV_DIGITS}g}"


def density_csv(grid: SpectrumGrid) -> str:
    """rho-k grid: header ``k,<k_1>,...``, then one ``<rho_i>,<T_i1>,...`` row per rho."""
    rho_axis, k_axis = grid.axes
    lines = [",".join(["k"] + [fmt_csv(k) for k in k_axis.values()])]
    for rho, row in zip(rho_axis.values(), grid.values):
        lines.append(",".join([fmt_csv(rho)] + [fmt_csv(t) for t in row]))
    return "\n".join(lines) + "\n"


def sweep_csv(grid: SpectrumGrid, log10: bool = False) -> str:
    (k_axis,) = grid.axes
    header = "k,T,log10T" if log10 else "k,T"
    lines = [header]
    with np.errstate(divide="ignore"):
        logs = np.log10(grid.values)
    for k, t, lt in zip(k_axis.values(), grid.values, logs):
        cols = [fmt_csv(k), fmt_csv(t)]
        if log10:
            cols.append(fmt_csv(lt))
        lines.append(",".join(cols))
    return "\n".join(lines) + "\n"


def to_json(obj, indent: int | None = None) -> str:
    """JSON with every float written at 17 significant digits."""
    return _encode(obj, indent, 0)


def _encode(obj, indent, level) -> str:
    if isinstance(obj, bool) or obj is None:
        return {True: "true", False: "false", None: "null"}[obj]
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return f"{x:.{JSON_DIGITS}g}"
    if isinstance(obj, str):
        import json

        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    pad = "" if indent is None else "\n" + " " * (indent * (level + 1))
    end = "" if indent is None else "\n" + " " * (indent * level)
    sep = ", " if indent is None else ","
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_encode(str(key), indent, level + 1)}: {_encode(v, indent, level + 1)}"
                 for key, v in obj.items()]
        return "{" + sep.join(items) + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[" + sep.join(items) + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")
