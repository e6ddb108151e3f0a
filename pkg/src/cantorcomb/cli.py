"""Command-line entry point: geometry dumps, sweeps, density grids, resonances,
scaling fits and engine-vs-oracle checks.

Exit codes: 0 success, 1 oracle check failed, 2 bad arguments or configuration.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import density_grid, find_resonances, scaling_fit
from .geometry import (CdcSpec, SuperPeriodicLayout, delta_positions, geometry_dump,
                       layout as cdc_layout)
from .oracle import CombRealization, oracle_transmission
from .spectrum import Axis, SpectrumGrid, density_csv, fmt_csv, sweep_csv, to_json
from .spp import SppSpec, transmission

THREADS_ENV = "CANTORCOMB_THREADS"
ORACLE_TOLERANCE = 1e-9
CHUNK = 4096  # fixed so results never depend on the thread count

COMMANDS = ("geometry", "sweep", "density", "resonances", "scaling", "oracle-check")
DEFAULT_FORMAT = {"geometry": "json", "sweep": "csv", "density": "csv",
                  "resonances": "json", "scaling": "json", "oracle-check": "json"}
JSON_ONLY = ("geometry", "oracle-check")


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


@dataclass(frozen=True)
class RunConfig:
    command: str
    N: int = 2
    rho: float = 3.0
    L: float = 20.0
    S: int = 2
    V: float = 1.0
    counts: tuple[int, ...] | None = None
    distances: tuple[float, ...] | None = None
    geometry_json: str | None = None
    k_min: float = 0.1
    k_max: float = 20.0
    k_n: int | None = None
    k_scale: str = "linear"
    rho_min: float | None = None
    rho_max: float | None = None
    rho_n: int = 51
    out: str | None = None
    format: str | None = None
    log10: bool = False
    threads: int = 1

    @property
    def fmt(self) -> str:
        return self.format or DEFAULT_FORMAT[self.command]

    def echo(self) -> dict:
        """Configuration echo for output metadata; leaves out threads and paths
        so identical runs give identical bytes."""
        d = asdict(self)
        for key in ("threads", "out", "format"):
            d.pop(key)
        for key in ("counts", "distances"):
            if d[key] is not None:
                d[key] = list(d[key])
        return d

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.format is not None and self.format not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.command in JSON_ONLY and self.fmt != "json":
            raise ConfigError(f"{self.command} writes JSON only")
        if self.k_scale not in ("linear", "log"):
            raise ConfigError(f"unknown k scale {self.k_scale!r}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if (self.counts is None) != (self.distances is None):
            raise ConfigError("--counts and --distances must be given together")
        if self.counts is not None and self.geometry_json is not None:
            raise ConfigError("give either --counts/--distances or --geometry-json")
        if self.counts is not None and self.command in ("geometry", "density"):
            raise ConfigError(f"{self.command} needs a Cantor comb (--N/--rho/--L/--S)")
        if self.geometry_json is not None and self.command != "oracle-check":
            raise ConfigError("--geometry-json is only read by oracle-check")
        if not np.isfinite(self.V):
            raise ConfigError("V must be finite")
        try:
            if self.counts is not None:
                SuperPeriodicLayout(self.counts, self.distances)
            elif self.command == "density":
                # rho is swept here; the scalar --rho plays no part.
                if self.rho_min is None or self.rho_max is None:
                    raise ConfigError("density needs --rho-min and --rho-max")
                CdcSpec(self.N, self.rho_min, self.L, self.S)
            elif self.geometry_json is None:
                CdcSpec(self.N, self.rho, self.L, self.S)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.log10 and self.command != "sweep":
            raise ConfigError("--log10 applies to sweep only")
        if self.command == "geometry":
            return
        if not (np.isfinite(self.k_min) and np.isfinite(self.k_max)):
            raise ConfigError("k range must be finite")
        if not 0 < self.k_min < self.k_max:
            raise ConfigError(f"need 0 < k-min < k-max, got [{self.k_min}, {self.k_max}]")
        if self.k_n is not None and self.k_n < 2:
            raise ConfigError("k-n must be >= 2")
        if self.command == "scaling":
            if self.V == 0:
                raise ConfigError("scaling fit is undefined for V = 0")
            if self.k_n is not None and self.k_n < 1000:
                raise ConfigError("scaling needs k-n >= 1000")
            if self.counts is not None:
                r1 = self.distances[0]
            else:
                r1 = cdc_layout(CdcSpec(self.N, self.rho, self.L, self.S)).distances[0]
            bound = 10 * max(abs(self.V), 1 / r1)
            if self.k_min < bound:
                raise ConfigError(f"k-min must be >= {bound:.6g} for the large-k regime")
        if self.command == "density":
            if not self.rho_min > self.N - 1:
                raise ConfigError(f"rho-min must exceed N-1 = {self.N - 1}")
            if not self.rho_max > self.rho_min:
                raise ConfigError("need rho-min < rho-max")
            if self.rho_n < 2:
                raise ConfigError("rho-n must be >= 2")


def resolve_threads(value: str | None, env=None) -> int:
    """Flag value, else the environment default, else 1; "auto" means all cores."""
    env = os.environ if env is None else env
    raw = value if value is not None else env.get(THREADS_ENV, "1")
    raw = str(raw).strip().lower()
    if raw == "auto":
        try:
            return max(1, len(os.sched_getaffinity(0)))
        except AttributeError:
            return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"threads must be a positive integer or 'auto', got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"threads must be >= 1, got {n}")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cantorcomb", description=__doc__.splitlines()[0])
    p.add_argument("--command", required=True, choices=COMMANDS)
    g = p.add_argument_group("Cantor comb")
    g.add_argument("--N", type=int, default=2)
    g.add_argument("--rho", type=float, default=3.0)
    g.add_argument("--L", type=float, default=20.0)
    g.add_argument("--S", type=int, default=2)
    g.add_argument("--V", type=float, default=1.0)
    g = p.add_argument_group("explicit super-periodic comb")
    g.add_argument("--counts", type=int, nargs="+", help="N_1 .. N_S")
    g.add_argument("--distances", type=float, nargs="+", help="r_1 .. r_S")
    g.add_argument("--geometry-json", help="geometry dump to re-ingest (oracle-check)")
    g = p.add_argument_group("grids")
    g.add_argument("--k-min", type=float, default=0.1)
    g.add_argument("--k-max", type=float, default=20.0)
    g.add_argument("--k-n", type=int, default=None)
    g.add_argument("--k-scale", choices=("linear", "log"), default="linear")
    g.add_argument("--rho-min", type=float)
    g.add_argument("--rho-max", type=float)
    g.add_argument("--rho-n", type=int, default=51)
    g = p.add_argument_group("output")
    g.add_argument("--out", help="output file (default: stdout)")
    g.add_argument("--format", choices=("csv", "json"))
    g.add_argument("--log10", action="store_true", help="add a log10 T column to sweeps")
    g.add_argument("--threads", help=f"worker threads or 'auto' (default: ${THREADS_ENV} or 1)")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def parse_config(argv=None, env=None) -> RunConfig:
    args = build_parser().parse_args(argv)
    if (args.counts is None) != (args.distances is None):
        raise ConfigError("--counts and --distances must be given together")
    if args.counts is not None and len(args.counts) != len(args.distances):
        raise ConfigError("--counts and --distances need the same length")
    cfg = RunConfig(
        command=args.command, N=args.N, rho=args.rho, L=args.L, S=args.S, V=args.V,
        counts=tuple(args.counts) if args.counts else None,
        distances=tuple(args.distances) if args.distances else None,
        geometry_json=args.geometry_json, k_min=args.k_min, k_max=args.k_max,
        k_n=args.k_n, k_scale=args.k_scale, rho_min=args.rho_min, rho_max=args.rho_max,
        rho_n=args.rho_n, out=args.out, format=args.format, log10=args.log10,
        threads=resolve_threads(args.threads, env))
    cfg.validate()
    return cfg


# ---------------------------------------------------------------- helpers

def positions_digest(positions) -> str:
    """sha256 over the float64 bytes of the positions."""
    return hashlib.sha256(np.ascontiguousarray(positions, dtype="<f8").tobytes()).hexdigest()


def _spec(cfg: RunConfig) -> SppSpec:
    if cfg.counts is not None:
        return SppSpec.from_counts(cfg.counts, cfg.distances, cfg.V)
    return SppSpec.from_cdc(CdcSpec(cfg.N, cfg.rho, cfg.L, cfg.S), cfg.V)


def _chunked(func, k, threads):
    parts = [k[i:i + CHUNK] for i in range(0, k.size, CHUNK)]
    if threads > 1 and len(parts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(func, parts))
    else:
        out = [func(p) for p in parts]
    return np.concatenate(out)


def _k_axis(cfg, default_n=2001):
    return Axis("k", cfg.k_min, cfg.k_max, cfg.k_n or default_n, cfg.k_scale)


def _emit(cfg: RunConfig, text: str, stdout) -> None:
    if cfg.out is None:
        stdout.write(text)
        return
    Path(cfg.out).write_text(text)


def _plot_script_path(out: str) -> Path:
    p = Path(out)
    return p.with_name(p.stem + "_plot.py")


def plot_script(kind: str, data_path: str, fmt: str) -> str:
    """Matplotlib script that draws ``data_path``; emitted as text, never run here."""
    name = Path(data_path).name
    head = (
        "# Plot for " + name + "; run next to the data file.\n"
        "import json\nfrom pathlib import Path\n\n"
        "import matplotlib.pyplot as plt\nimport numpy as np\n\n"
        f"DATA = Path(__file__).with_name({name!r})\n\n")
    if kind == "density":
        if fmt == "csv":
            load = ("header = DATA.read_text().splitlines()[0].split(',')\n"
                    "k = np.array(header[1:], dtype=float)\n"
                    "raw = np.loadtxt(DATA, delimiter=',', skiprows=1, ndmin=2)\n"
                    "rho, T = raw[:, 0], raw[:, 1:]\n")
        else:
            load = ("doc = json.loads(DATA.read_text())\n"
                    "ax_rho, ax_k = doc['axes']\n"
                    "def axis(a):\n"
                    "    f = np.geomspace if a['spacing'] == 'log' else np.linspace\n"
                    "    return f(a['lo'], a['hi'], a['n'])\n"
                    "rho, k = axis(ax_rho), axis(ax_k)\n"
                    "T = np.array(doc['values']).reshape(rho.size, k.size)\n")
        body = ("fig, ax = plt.subplots()\n"
                "mesh = ax.pcolormesh(k, rho, T, shading='nearest', vmin=0, vmax=1)\n"
                "fig.colorbar(mesh, label='T')\n"
                "ax.set_xlabel('k')\nax.set_ylabel('rho')\n")
    elif kind == "sweep":
        if fmt == "csv":
            load = ("raw = np.loadtxt(DATA, delimiter=',', skiprows=1, ndmin=2)\n"
                    "k, T = raw[:, 0], raw[:, 1]\n")
        else:
            load = ("doc = json.loads(DATA.read_text())\n"
                    "(a,) = doc['axes']\n"
                    "f = np.geomspace if a['spacing'] == 'log' else np.linspace\n"
                    "k, T = f(a['lo'], a['hi'], a['n']), np.array(doc['values'])\n")
        body = ("fig, (top, bottom) = plt.subplots(2, 1, sharex=True)\n"
                "top.plot(k, T)\ntop.set_ylabel('T')\n"
                "with np.errstate(divide='ignore'):\n"
                "    bottom.plot(k, np.log10(T))\n"
                "bottom.set_ylabel('log10 T')\nbottom.set_xlabel('k')\n")
    elif kind == "scaling":
        if fmt == "csv":
            load = ("raw = np.loadtxt(DATA, delimiter=',', skiprows=1, ndmin=2)\n"
                    "k, R = raw[:, 0], raw[:, 1]\n")
        else:
            load = ("doc = json.loads(DATA.read_text())\n"
                    "k, R = np.array(doc['envelope_k']), np.array(doc['envelope_R'])\n")
        body = ("fig, ax = plt.subplots()\n"
                "ax.loglog(k, R, 'o')\n"
                "ax.set_xlabel('k')\nax.set_ylabel('envelope of R')\n")
    else:
        raise ValueError(f"no plot script for {kind!r}")
    return head + load + "\n" + body + "plt.tight_layout()\nplt.show()\n"


def _emit_plot(cfg, kind):
    if cfg.out is not None:
        _plot_script_path(cfg.out).write_text(plot_script(kind, cfg.out, cfg.fmt))


# ---------------------------------------------------------------- commands

def cmd_geometry(cfg: RunConfig, stdout) -> int:
    dump = geometry_dump(CdcSpec(cfg.N, cfg.rho, cfg.L, cfg.S))
    _emit(cfg, to_json(dump, indent=2) + "\n", stdout)
    return 0


def cmd_sweep(cfg: RunConfig, stdout) -> int:
    spec = _spec(cfg)
    axis = _k_axis(cfg)
    t = _chunked(lambda k: transmission(spec, k), axis.values(), cfg.threads)
    grid = SpectrumGrid([axis], t, cfg.echo())
    if cfg.fmt == "csv":
        text = sweep_csv(grid, log10=cfg.log10)
    else:
        text = to_json(grid.to_dict()) + "\n"
    _emit(cfg, text, stdout)
    _emit_plot(cfg, "sweep")
    return 0


def cmd_density(cfg: RunConfig, stdout) -> int:
    base = CdcSpec(cfg.N, cfg.rho_min, cfg.L, cfg.S)
    grid = density_grid(base, cfg.V, cfg.rho_min, cfg.rho_max, cfg.rho_n,
                        cfg.k_min, cfg.k_max, cfg.k_n or 401, cfg.k_scale,
                        threads=cfg.threads)
    grid.metadata = cfg.echo() | {"version": __version__}
    text = density_csv(grid) if cfg.fmt == "csv" else to_json(grid.to_dict()) + "\n"
    _emit(cfg, text, stdout)
    _emit_plot(cfg, "density")
    return 0


def cmd_resonances(cfg: RunConfig, stdout) -> int:
    found = find_resonances(_spec(cfg), cfg.k_min, cfg.k_max, grid_n=cfg.k_n)
    if cfg.fmt == "json":
        text = to_json([r.to_dict() for r in found], indent=2) + "\n"
    else:
        rows = ["k_star,order,width,tangent"]
        rows += [f"{fmt_csv(r.k_star)},{r.order_attribution},{fmt_csv(r.refinement_width)},"
                 f"{int(r.tangent)}" for r in found]
        text = "\n".join(rows) + "\n"
    _emit(cfg, text, stdout)
    return 0


def cmd_scaling(cfg: RunConfig, stdout) -> int:
    fit = scaling_fit(_spec(cfg), cfg.k_min, cfg.k_max, samples=cfg.k_n or 200_000)
    if cfg.fmt == "json":
        doc = {"slope": fit.slope, "intercept": fit.intercept, "k_range": list(fit.k_range),
               "r_squared": fit.r_squared, "envelope_k": fit.envelope_k,
               "envelope_R": fit.envelope_R, "metadata": cfg.echo() | {"version": __version__}}
        text = to_json(doc, indent=2) + "\n"
    else:
        rows = ["k,R"] + [f"{fmt_csv(k)},{fmt_csv(r)}"
                          for k, r in zip(fit.envelope_k, fit.envelope_R)]
        text = "\n".join(rows) + "\n"
    _emit(cfg, text, stdout)
    _emit_plot(cfg, "scaling")
    return 0


def _load_geometry(path: str):
    try:
        doc = json.loads(Path(path).read_text())
        counts = tuple(int(n) for n in doc["counts"])
        distances = tuple(float(r) for r in doc["distances"])
        positions = np.asarray(doc["positions"], dtype=float)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot read geometry from {path}: {exc}") from None
    return counts, distances, positions


def cmd_oracle_check(cfg: RunConfig, stdout) -> int:
    if cfg.geometry_json is not None:
        counts, distances, positions = _load_geometry(cfg.geometry_json)
        try:
            spec = SppSpec.from_counts(counts, distances, cfg.V)
            comb = CombRealization(tuple(positions), cfg.V)
        except ValueError as exc:
            raise ConfigError(f"{cfg.geometry_json}: {exc}") from None
    else:
        spec = _spec(cfg)
        if cfg.counts is not None:
            positions = spec.layout.expand()
        else:
            positions = delta_positions(CdcSpec(cfg.N, cfg.rho, cfg.L, cfg.S))
        comb = CombRealization(tuple(positions), cfg.V)

    axis = _k_axis(cfg, default_n=1000)
    k = axis.values()
    diff = _chunked(lambda kk: np.abs(transmission(spec, kk) - oracle_transmission(comb, kk)),
                    k, cfg.threads)
    worst = int(np.nanargmax(diff)) if not np.all(np.isnan(diff)) else 0
    max_diff = float(diff[worst])
    passed = bool(np.all(np.isfinite(diff))) and max_diff < ORACLE_TOLERANCE
    report = {
        "passed": passed,
        "max_abs_diff": max_diff,
        "argmax_k": float(k[worst]),
        "tolerance": ORACLE_TOLERANCE,
        "samples": int(k.size),
        "delta_count": len(comb.positions),
        "positions_sha256": positions_digest(comb.positions),
        "counts": list(spec.layout.counts),
        "distances": list(spec.layout.distances),
        "V": cfg.V,
    }
    _emit(cfg, to_json(report, indent=2) + "\n", stdout)
    return 0 if passed else 1


HANDLERS = {"geometry": cmd_geometry, "sweep": cmd_sweep, "density": cmd_density,
            "resonances": cmd_resonances, "scaling": cmd_scaling,
            "oracle-check": cmd_oracle_check}


def main(argv=None, stdout=None, stderr=None, env=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        cfg = parse_config(argv, env)
        return HANDLERS[cfg.command](cfg, stdout)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except ConfigError as exc:
        print(f"cantorcomb: error: {exc}", file=stderr)
        return 2
    except ValueError as exc:
        print(f"cantorcomb: error: {' '.join(str(exc).split())}", file=stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
