"""Command-line interface.

Subcommands::

    krein-topo spectrum   MODEL [params] --energy E        bulk transfer spectrum
    krein-topo invariants MODEL [params] --energy E        edge crossings, invariants, Chern check
    krein-topo edge-bands MODEL [params] --energy E        eigenphases of U^E(k1)
    krein-topo classify   MODEL [params] | --matrix-file F symmetry kind
    krein-topo collide    SCENARIO [--param k=v ...]       eigenvalue traces along a collision path

``MODEL`` is one of ``harper``, ``kanemele``, ``pip``, ``did``; a JSON model
file may be given instead with ``--model-file``.  Results go to ``--out``
(default: current directory) in the formats selected by ``--format``; a JSON
summary is always printed to standard output.

Exit codes
----------
0 success, 1 other library error, 2 strong (or vertical) hypothesis failed,
3 bad configuration, 4 energy not in a gap, 5 flat edge band detected.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import edge as edge_mod
from .errors import (
    BadParams,
    FlatBandDetected,
    KreinTopoError,
    NotInGap,
    StrongHypothesisFailed,
    VerticalHypothesisFailed,
    WrongDimension,
)
from .krein import (
    Symmetry,
    SymmetryKind,
    check_symmetries,
    invariants_for_kind,
    krein_spectrum,
    signature_at,
)
from .modelfile import load_model
from .models import MODEL_BUILDERS, ModelParams, build_model
from .spectral import COLLISION_SCENARIOS, collision_paths, decompose, unit_circle_spectrum
from .svg import Plot
from .tight_binding import (
    HoppingModel,
    SymmetryMetadata,
    bulk_transfer_fiber,
    bulk_transfer_spectrum,
    transfer_chiral_symmetry,
    transfer_real_symmetry,
    verify_metadata,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_HYPOTHESIS = 2
EXIT_CONFIG = 3
EXIT_NOT_IN_GAP = 4
EXIT_FLAT_BAND = 5

SCHEMA = 1
FORMATS = ("csv", "json", "svg")

_MODEL_DEFAULTS = {
    "harper": {"q": 0, "p": 1},
    "kanemele": {"q": 0, "p": 1},
    "pip": {"q": 1, "p": 3},
    "did": {"q": 0, "p": 1},
}


class ConfigError(Exception):
    """Invalid command-line configuration."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


# --- deterministic text output ----------------------------------------------------


def fmt_float(x: float) -> str:
    """17 significant digits; ``NaN`` and infinities as JSON-compatible strings."""
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if x == 0.0:
        x = 0.0  # drop the sign of negative zero
    return format(x, ".17g")


def to_json(obj, indent: int = 1, _level: int = 0) -> str:
    """Serialize with fixed float formatting and insertion-ordered keys."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return {True: "true", False: "false", None: "null"}[obj]
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{to_json(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(to_json(v, indent, _level + 1) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + to_json(v, indent, _level + 1) for v in seq) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_csv(path: Path, header: Sequence[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt_float(v) if isinstance(v, (float, np.floating)) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


# --- configuration ----------------------------------------------------------------


@dataclass
class RunConfig:
    """Validated options of one CLI invocation."""

    command: str
    model_name: Optional[str] = None
    model_file: Optional[Path] = None
    params: Dict[str, float] = field(default_factory=dict)
    energy: float = 0.0
    energy_range: Optional[Tuple[float, float, int]] = None
    k1_grid: int = edge_mod.DEFAULT_K1_GRID
    k2_grid: int = 201
    chern_grid: int = 60
    out: Path = Path(".")
    formats: Tuple[str, ...] = FORMATS

    def __post_init__(self):
        if self.model_name is not None and self.model_file is not None:
            raise ConfigError("give either a built-in model or --model-file, not both")
        if self.command in ("spectrum", "invariants", "edge-bands") and self.model_name is None and self.model_file is None:
            raise ConfigError("a model is required: a built-in name or --model-file")
        for key in ("k1_grid", "k2_grid", "chern_grid"):
            if getattr(self, key) < 3:
                raise ConfigError(f"{key.replace('_', '-')} must be at least 3")
        bad = set(self.formats) - set(FORMATS)
        if bad:
            raise ConfigError(f"unknown output format(s) {sorted(bad)}")
        if not math.isfinite(self.energy):
            raise ConfigError("energy must be finite")

    def load(self) -> Tuple[HoppingModel, SymmetryMetadata]:
        if self.model_file is not None:
            return load_model(self.model_file)
        values = dict(_MODEL_DEFAULTS[self.model_name])
        values.update({k: v for k, v in self.params.items() if v is not None})
        return build_model(ModelParams(name=self.model_name, **values))


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("model", nargs="?", choices=sorted(MODEL_BUILDERS), help="built-in model")
    p.add_argument("--model-file", type=Path, help="JSON model file (instead of a built-in model)")
    p.add_argument("--q", type=int, help="flux numerator")
    p.add_argument("--p", type=int, help="flux denominator")
    p.add_argument("--delta", type=float, help="pairing strength (pip, did)")
    p.add_argument("--mu", type=float, help="chemical potential (pip, did)")
    p.add_argument("--chirality", type=int, choices=(1, -1), help="pairing chirality (pip, did)")
    p.add_argument("--lambda-so", type=float, help="spin-orbit coupling (kanemele)")
    p.add_argument("--lambda-ra", type=float, help="Rashba coupling (kanemele)")
    p.add_argument("--lambda-st", type=float, help="staggered potential (kanemele)")


def _add_output_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--format", default="csv,json,svg", help="comma-separated subset of csv,json,svg")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="krein-topo", description="Krein signatures and edge invariants of tight-binding models.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("spectrum", help="bulk transfer spectrum over k2")
    _add_model_args(p)
    p.add_argument("--energy", type=float, default=0.0)
    p.add_argument("--k2-grid", type=int, default=201)
    _add_output_args(p)

    p = sub.add_parser("invariants", help="edge crossings, invariants and Chern cross-check")
    _add_model_args(p)
    p.add_argument("--energy", type=float, default=0.0)
    p.add_argument("--k1-grid", type=int, default=edge_mod.DEFAULT_K1_GRID)
    p.add_argument("--chern-grid", type=int, default=60)
    _add_output_args(p)

    p = sub.add_parser("edge-bands", help="eigenphase curves of the edge unitary")
    _add_model_args(p)
    p.add_argument("--energy", type=float, default=0.0)
    p.add_argument("--energy-range", type=float, nargs=3, metavar=("E_MIN", "E_MAX", "N"),
                   help="sweep energies and list crossings instead of a single eigenphase plot")
    p.add_argument("--k1-grid", type=int, default=edge_mod.DEFAULT_K1_GRID)
    _add_output_args(p)

    p = sub.add_parser("classify", help="symmetry kind of a model or of a matrix file")
    _add_model_args(p)
    p.add_argument("--matrix-file", type=Path,
                   help="JSON with T and J_F (optional J_R, J_C) as matrices of [re, im] pairs")
    p.add_argument("--energy", type=float, default=0.0)
    _add_output_args(p)

    p = sub.add_parser("collide", help="eigenvalue traces along a collision path")
    p.add_argument("scenario", choices=COLLISION_SCENARIOS)
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                   help="scenario parameter (repeatable); numbers may be complex, e.g. lam=0.5+0.866j")
    p.add_argument("--a", type=float, help="shortcut for --param a=VALUE")
    p.add_argument("--t-min", type=float, default=-2.0)
    p.add_argument("--t-max", type=float, default=2.0)
    p.add_argument("--steps", type=int, default=81)
    _add_output_args(p)
    return parser


def _formats(text: str) -> Tuple[str, ...]:
    return tuple(s.strip() for s in text.split(",") if s.strip())


def config_from_args(args: argparse.Namespace) -> RunConfig:
    params = {}
    for key in ("q", "p", "delta", "mu", "chirality", "lambda_so", "lambda_ra", "lambda_st"):
        if getattr(args, key, None) is not None:
            params[key] = getattr(args, key)
    er = getattr(args, "energy_range", None)
    if er is not None:
        if er[2] < 1 or er[2] != int(er[2]):
            raise ConfigError("the energy count must be a positive integer")
        er = (er[0], er[1], int(er[2]))
    return RunConfig(
        command=args.command,
        model_name=getattr(args, "model", None),
        model_file=getattr(args, "model_file", None),
        params=params,
        energy=getattr(args, "energy", 0.0),
        energy_range=er,
        k1_grid=getattr(args, "k1_grid", edge_mod.DEFAULT_K1_GRID),
        k2_grid=getattr(args, "k2_grid", 201),
        chern_grid=getattr(args, "chern_grid", 60),
        out=args.out,
        formats=_formats(args.format),
    )


# --- commands ---------------------------------------------------------------------


def _model_info(model: HoppingModel) -> dict:
    return {"name": model.name, "L": model.L, "q": model.q, "p": model.p}


def _emit(cfg: RunConfig, stem: str, report: dict) -> dict:
    if "json" in cfg.formats:
        (cfg.out / f"{stem}.json").write_text(to_json(report) + "\n")
    return report


def cmd_spectrum(cfg: RunConfig) -> dict:
    model, _ = cfg.load()
    k2, ev = bulk_transfer_spectrum(model, cfg.energy, cfg.k2_grid)
    order = np.lexsort((ev.imag, ev.real, k2))
    k2, ev = k2[order], ev[order]
    dist = float(np.min(np.abs(np.abs(ev) - 1.0)))
    if "csv" in cfg.formats:
        write_csv(cfg.out / "spectrum.csv", ("k2", "re", "im"), zip(k2, ev.real, ev.imag))
    if "svg" in cfg.formats:
        r = max(1.5, min(float(np.max(np.abs(ev))), 6.0))
        plot = Plot((-r, r), (-r, r), equal=True, title=f"transfer spectrum, E = {cfg.energy:g}",
                    xlabel="Re", ylabel="Im")
        plot.unit_circle().points(ev.real, ev.imag)
        plot.save(cfg.out / "spectrum.svg")
    report = {"schema": SCHEMA, "command": "spectrum", "model": _model_info(model), "energy": cfg.energy,
              "k2_grid": cfg.k2_grid, "points": int(ev.size), "min_distance_to_circle": dist,
              "unit_circle_points": bool(dist <= 1e-3)}
    return _emit(cfg, "spectrum", report)


def _crossing_rows(crossings) -> List[dict]:
    return [{"k1": c.k1, "slope": c.slope_sign, "multiplicity": c.multiplicity, "theta_slope": c.theta_slope}
            for c in crossings]


def cmd_invariants(cfg: RunConfig) -> dict:
    model, meta = cfg.load()
    checks = verify_metadata(model, meta)
    if not all(checks.values()):
        raise BadParams(f"declared symmetries do not hold: {checks}")
    crossings = edge_mod.edge_crossings(model, cfg.energy, cfg.k1_grid)
    inv = edge_mod.edge_invariants(model, cfg.energy, meta, crossings)
    total = sum(c.nu_plus - c.nu_minus for c in crossings)
    chern = edge_mod.chern_number(model, cfg.energy, cfg.chern_grid)
    kind = edge_mod.edge_kind(meta)
    report = {"schema": SCHEMA, "command": "invariants", "model": _model_info(model), "energy": cfg.energy,
              "kind": [v for v in kind.triple if v is not None], "crossings": _crossing_rows(crossings)}
    report.update(inv.as_dict())
    report.update({"signature_total": total, "chern": chern.value, "chern_residual": chern.residual,
                   "agree": bool(chern.value == total)})
    if "csv" in cfg.formats:
        write_csv(cfg.out / "crossings.csv", ("k1", "slope", "multiplicity"),
                  ((c.k1, c.slope_sign, c.multiplicity) for c in crossings))
    return _emit(cfg, "invariants", report)


def cmd_edge_bands(cfg: RunConfig) -> dict:
    model, _ = cfg.load()
    if cfg.energy_range is not None:
        lo, hi, n = cfg.energy_range
        scans = edge_mod.edge_bands(model, lo, hi, n, cfg.k1_grid)
        rows = [(s.energy, c.k1, c.slope_sign, c.multiplicity) for s in scans for c in s.crossings]
        if "csv" in cfg.formats:
            write_csv(cfg.out / "edge_bands.csv", ("energy", "k1", "slope", "multiplicity"), rows)
        if "svg" in cfg.formats:
            plot = Plot((-np.pi, np.pi), (min(lo, hi), max(lo, hi) + 1e-12), title="edge bands",
                        xlabel="k1", ylabel="E")
            plot.points([r[1] for r in rows], [r[0] for r in rows], radius=1.8)
            plot.save(cfg.out / "edge_bands.svg")
        report = {"schema": SCHEMA, "command": "edge-bands", "model": _model_info(model),
                  "energies": [{"energy": s.energy, "status": s.status, "signature": s.signature,
                                "crossings": _crossing_rows(s.crossings)} for s in scans]}
        return _emit(cfg, "edge_bands", report)
    ks = -np.pi + 2 * np.pi * (np.arange(cfg.k1_grid) + 1) / cfg.k1_grid
    phases = np.array([edge_mod.eigenphases(model, cfg.energy, k) for k in ks])
    crossings = edge_mod.edge_crossings(model, cfg.energy, cfg.k1_grid)
    if "csv" in cfg.formats:
        header = ["k1"] + [f"theta{j}" for j in range(phases.shape[1])]
        write_csv(cfg.out / "eigenphases.csv", header, ([k, *row] for k, row in zip(ks, phases)))
    if "svg" in cfg.formats:
        plot = Plot((-np.pi, np.pi), (-np.pi, np.pi), title=f"eigenphases of U^E, E = {cfg.energy:g}",
                    xlabel="k1", ylabel="theta")
        plot.hline(0.0)
        for j in range(phases.shape[1]):
            plot.points(ks, phases[:, j], color=Plot.color(j), radius=1.0)
        plot.points([c.k1 for c in crossings], [0.0] * len(crossings), color="#000000", radius=3.0)
        plot.save(cfg.out / "eigenphases.svg")
    report = {"schema": SCHEMA, "command": "edge-bands", "model": _model_info(model), "energy": cfg.energy,
              "k1_grid": cfg.k1_grid, "zero_crossings": len(crossings), "crossings": _crossing_rows(crossings)}
    return _emit(cfg, "edge_bands", report)


def _read_matrix(entry, key):
    arr = np.array(entry, dtype=float)
    if arr.ndim == 3 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim == 2:
        return arr.astype(complex)
    raise BadParams(f"{key}: expected a matrix of numbers or [re, im] pairs")


def _classify_matrices(path: Path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
        T = _read_matrix(data["T"], "T")
        J_F = Symmetry(_read_matrix(data["J_F"], "J_F"), data.get("eta_F"), "fundamental")
    except (KeyError, json.JSONDecodeError) as exc:
        raise BadParams(f"matrix file: {exc}") from None
    J_R = Symmetry(_read_matrix(data["J_R"], "J_R"), data.get("eta_R"), "real") if "J_R" in data else None
    J_C = Symmetry(_read_matrix(data["J_C"], "J_C"), data.get("eta_C"), "chiral") if "J_C" in data else None
    rep = check_symmetries(T, J_F, J_R, J_C)
    kind = SymmetryKind.from_symmetries(J_F, J_R, J_C)
    out = {"source": str(path), "kind": [v for v in kind.triple if v is not None],
           "symmetries_hold": rep.all_hold, "invariant_fields": list(kind.invariant_fields())}
    if rep.all_hold:
        eigs = krein_spectrum(T, J_F)
        out["unit_eigenvalues"] = [{"re": e.lam.real, "im": e.lam.imag, "nu_plus": e.nu_plus,
                                    "nu_minus": e.nu_minus} for e in eigs]
        out.update(invariants_for_kind(eigs, kind).as_dict())
    return out


def cmd_classify(cfg: RunConfig, matrix_file: Optional[Path] = None) -> dict:
    report = {"schema": SCHEMA, "command": "classify"}
    if matrix_file is not None:
        report.update(_classify_matrices(matrix_file))
        return _emit(cfg, "classify", report)
    model, meta = cfg.load()
    checks = verify_metadata(model, meta)
    kind = edge_mod.edge_kind(meta)
    report.update({"model": _model_info(model), "declared": {k: v["parity"] for k, v in meta.as_dict().items()},
                   "symmetries_hold": checks, "kind": [v for v in kind.triple if v is not None],
                   "invariant_fields": list(kind.invariant_fields())})
    try:
        T = bulk_transfer_fiber(model, cfg.energy, 0.0)
        J_F = Symmetry(np.kron(np.array([[0.0, -1.0], [1.0, 0.0]]), np.eye(model.L * model.p)), -1)
        J_R = transfer_real_symmetry(model, meta)
        if J_R is not None and meta.real[0] == "phs" and cfg.energy != 0.0:
            J_R = None
        J_C = transfer_chiral_symmetry(model, meta) if cfg.energy == 0.0 else None
        rep = check_symmetries(T, J_F, J_R, J_C)
        report["transfer_fiber_k2_0"] = {"fundamental": rep.fundamental, "real": rep.real, "chiral": rep.chiral}
    except StrongHypothesisFailed as exc:
        report["transfer_fiber_k2_0"] = {"error": str(exc)}
    return _emit(cfg, "classify", report)


def _parse_value(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    try:
        return complex(text)
    except ValueError:
        raise ConfigError(f"cannot parse parameter value {text!r}") from None


def cmd_collide(cfg: RunConfig, scenario: str, params: dict, t_min: float, t_max: float, steps: int) -> dict:
    if steps < 2:
        raise ConfigError("steps must be at least 2")
    ts = np.linspace(t_min, t_max, steps)
    rows, per_step = [], []
    for t in ts:
        path = collision_paths(scenario, params, float(t))
        ev = np.linalg.eigvals(path.T)
        ev = ev[np.lexsort((ev.imag, ev.real))]
        dec = decompose(path.T)
        on_circle = unit_circle_spectrum(dec)
        eigs = krein_spectrum(path.T, path.J_F)
        for z in ev:
            rows.append((float(t), z.real, z.imag, abs(z)))
        per_step.append({
            "t": float(t),
            "off_circle": int(sum(1 for z in ev if abs(abs(z) - 1.0) > 1e-8)),
            "unit_clusters": len(on_circle),
            "sig": sum(e.sig for e in eigs),
            "sig_plus1": signature_at(eigs, 1.0),
            "sig_minus1": signature_at(eigs, -1.0),
        })
    if "csv" in cfg.formats:
        write_csv(cfg.out / "collision.csv", ("t", "re", "im", "abs"), rows)
    if "svg" in cfg.formats:
        r = max(1.5, min(max(row[3] for row in rows), 4.0))
        plot = Plot((-r, r), (-r, r), equal=True, title=f"{scenario} eigenvalue traces", xlabel="Re", ylabel="Im")
        plot.unit_circle().points([row[1] for row in rows], [row[2] for row in rows], radius=1.5)
        plot.save(cfg.out / "collision.svg")
    clean = {k: (str(v) if isinstance(v, complex) else v) for k, v in sorted(params.items())}
    report = {"schema": SCHEMA, "command": "collide", "scenario": scenario, "params": clean, "steps": per_step}
    return _emit(cfg, "collision", report)


# --- entry point ------------------------------------------------------------------


def _run(args: argparse.Namespace) -> dict:
    cfg = config_from_args(args)
    cfg.out.mkdir(parents=True, exist_ok=True)
    if args.command == "spectrum":
        return cmd_spectrum(cfg)
    if args.command == "invariants":
        return cmd_invariants(cfg)
    if args.command == "edge-bands":
        return cmd_edge_bands(cfg)
    if args.command == "classify":
        if args.matrix_file is not None and (args.model is not None or args.model_file is not None):
            raise ConfigError("give either a model or --matrix-file, not both")
        if args.matrix_file is None and args.model is None and args.model_file is None:
            raise ConfigError("classify needs a model or --matrix-file")
        return cmd_classify(cfg, args.matrix_file)
    if args.command == "collide":
        params = {}
        for item in args.param:
            if "=" not in item:
                raise ConfigError(f"--param expects KEY=VALUE, got {item!r}")
            key, value = item.split("=", 1)
            params[key.strip()] = _parse_value(value.strip())
        if args.a is not None:
            params["a"] = args.a
        return cmd_collide(cfg, args.scenario, params, args.t_min, args.t_max, args.steps)
    raise ConfigError(f"unknown command {args.command!r}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        report = _run(args)
    except ConfigError as exc:
        print(f"krein-topo: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StrongHypothesisFailed, VerticalHypothesisFailed) as exc:
        print(f"krein-topo: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (NotInGap, WrongDimension) as exc:
        print(f"krein-topo: energy not in a gap: {exc}", file=sys.stderr)
        return EXIT_NOT_IN_GAP
    except FlatBandDetected as exc:
        print(f"krein-topo: flat edge band: {exc}", file=sys.stderr)
        return EXIT_FLAT_BAND
    except BadParams as exc:
        print(f"krein-topo: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KreinTopoError as exc:
        print(f"krein-topo: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"krein-topo: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    sys.stdout.write(to_json(report) + "\n")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
