"""Command-line pipeline: ``impa-synth {design,gain,flux-sweep,calibrate}``.

Exit codes: 0 success, 2 bad input or schema, 3 computation failure,
4 empty gain band.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from . import ac, chebyshev, netlist as nl
from .errors import CalibrationError, EmptyBandError, ImpaError, NetlistError
from .snail import FluxBias, SnailParams, bare_frequency
from .synthesis import DesignSpec, SynthesisResult, band_edges_from_w, synthesize_detailed

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_COMPUTE = 3
EXIT_EMPTY_BAND = 4

DEFAULT_THRESHOLD_DB = 15.0
DEFAULT_POINTS = 2001
DEFAULT_FLUX_GRID = (0.0, 0.5, 101)

_POS = {"type": "number", "exclusiveMinimum": 0}

SPEC_SCHEMA = {
    "type": "object",
    "properties": {
        "f0_hz": _POS,
        "w": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
        "band_edges_hz": {"type": "array", "items": _POS, "minItems": 2, "maxItems": 2},
        "prototype": {
            "type": "object",
            "properties": {
                "order": {"type": "integer", "minimum": 1},
                "g_min_db": _POS,
                "ripple_db": _POS,
                "g": {"type": "array", "items": _POS},
            },
            "required": ["order", "g_min_db", "ripple_db"],
            "additionalProperties": False,
        },
        "z_port_ohm": _POS,
        "snail": {
            "type": "object",
            "properties": {
                "l_j_h": _POS,
                "alpha": _POS,
                "n_large": {"type": "integer", "minimum": 1},
            },
            "required": ["l_j_h", "alpha"],
            "additionalProperties": False,
        },
        "bias": {
            "type": "object",
            "properties": {"phi_over_phi0": {"type": "number"}},
            "required": ["phi_over_phi0"],
            "additionalProperties": False,
        },
        "c1_shunt_f": _POS,
        "z2_ohm": _POS,
        "port_coupling": {"enum": ["tap", "capacitor"]},
        "target_gain_db": _POS,
    },
    "required": ["snail", "c1_shunt_f"],
    "additionalProperties": False,
}

DESIGN_REQUIRED = ["f0_hz", "prototype", "snail", "c1_shunt_f", "z2_ohm"]


class InputError(Exception):
    """Bad command-line input or spec file; maps to exit code 2."""


@dataclass
class RunConfig:
    command: str
    spec_path: Path | None = None
    netlist_path: Path | None = None
    out_dir: Path = Path(".")
    grid: tuple[float, float, int] | None = None
    threshold_db: float = DEFAULT_THRESHOLD_DB
    target_db: float | None = None
    alpha_sweep: list[float] = field(default_factory=list)


# --- spec loading -------------------------------------------------------------

def load_spec_document(path: Path, required=()) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read spec {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON: {exc}") from None
    schema = dict(SPEC_SCHEMA, required=sorted(set(SPEC_SCHEMA["required"]) | set(required)))
    errors = sorted(jsonschema.Draft202012Validator(schema).iter_errors(doc), key=lambda e: list(e.path))
    if errors:
        err = errors[0]
        where = ".".join(str(p) for p in err.absolute_path) or "<root>"
        raise InputError(f"{path}: schema violation at {where}: {err.message}")
    if required and "w" not in doc and "band_edges_hz" not in doc:
        raise InputError(f"{path}: schema violation at <root>: one of 'w' or 'band_edges_hz' is required")
    return doc


def snail_from_doc(doc: dict) -> SnailParams:
    s = doc["snail"]
    try:
        return SnailParams(s["l_j_h"], s["alpha"], s.get("n_large", 3))
    except ValueError as exc:
        raise InputError(f"schema violation at snail: {exc}") from None


def design_spec_from_doc(doc: dict) -> DesignSpec:
    proto = doc["prototype"]
    try:
        if "g" in proto:
            prototype = chebyshev.PrototypeSpec(proto["order"], proto["g_min_db"], proto["ripple_db"], proto["g"])
        else:
            prototype = chebyshev.prototype_lookup(proto["order"], proto["g_min_db"], proto["ripple_db"])
    except ValueError as exc:
        raise InputError(f"schema violation at prototype: {exc}") from None
    if "band_edges_hz" in doc:
        f1, f2 = doc["band_edges_hz"]
        if not f1 < f2:
            raise InputError("schema violation at band_edges_hz: need f1 < f2")
        f0, w = math.sqrt(f1 * f2), (f2 - f1) / math.sqrt(f1 * f2)
    else:
        f0, w = doc["f0_hz"], doc["w"]
    bias = FluxBias(doc["bias"]["phi_over_phi0"]) if "bias" in doc else None
    try:
        return DesignSpec(
            f0=f0,
            w=w,
            prototype=prototype,
            snail=snail_from_doc(doc),
            c1_shunt=doc["c1_shunt_f"],
            z2=doc["z2_ohm"],
            z_port=doc.get("z_port_ohm", 50.0),
            bias=bias,
            port_coupling=doc.get("port_coupling", "tap"),
        )
    except ValueError as exc:
        raise InputError(f"schema violation: {exc}") from None


def load_netlist(path: Path) -> nl.Netlist:
    try:
        return nl.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read netlist {path}: {exc}") from None
    except (json.JSONDecodeError, NetlistError, KeyError, TypeError) as exc:
        raise InputError(f"{path}: invalid netlist: {exc}") from None


def default_freq_grid(f0: float, w: float) -> tuple[float, float, int]:
    return f0 * (1 - 1.5 * w), f0 * (1 + 1.5 * w), DEFAULT_POINTS


# --- report ------------------------------------------------------------------

def _ghz(f):
    return f"{f / 1e9:.6f} GHz"


def _pf(c):
    return f"{c * 1e12:.6f} pF"


@dataclass
class DesignReport:
    spec: DesignSpec
    synth: SynthesisResult
    r_cal: float
    band_min_gain_db: float
    band: ac.BandReport | None
    maxima: list[float]
    grid: tuple[float, float, int]
    tunable: tuple[float, float]
    flux_grid: tuple[float, float, int]

    @property
    def warnings(self) -> list[str]:
        out = list(self.synth.warnings)
        if self.spec.snail.at_boundary:
            out.append(f"alpha = 1/n = {self.spec.snail.alpha:g} sits at the maximum-asymmetry boundary")
        return out

    def render(self) -> str:
        s, r, op = self.spec, self.synth, self.synth.op
        f1, f2 = band_edges_from_w(s.f0, s.w)
        p = s.prototype
        tuned = "given" if s.bias is not None else "tuned to f0"
        lines = [
            "IMPA design report",
            "",
            "[design inputs]",
            f"center frequency f0        = {_ghz(s.f0)}",
            f"fractional bandwidth w     = {s.w:.9g} (dimensionless)",
            f"design band                = {_ghz(f1)} .. {_ghz(f2)}",
            f"prototype                  = N={p.order_n}, Gmin={p.g_min_db:g} dB, ripple={p.ripple_db:g} dB, "
            f"g=[{', '.join(f'{x:g}' for x in p.g)}] (dimensionless)",
            f"port impedance             = {s.z_port:g} ohm",
            f"SNAIL L_J                  = {s.snail.l_j * 1e12:g} pH",
            f"SNAIL alpha                = {s.snail.alpha:g} (dimensionless)",
            f"SNAIL large junctions      = {s.snail.n_large:d} (count)",
            f"shunt capacitor C1         = {_pf(s.c1_shunt)}",
            f"resonator 2 impedance Z2   = {s.z2:g} ohm",
            f"port coupling              = {s.port_coupling}",
            "",
            "[operating point]",
            f"flux bias                  = {r.bias.phi_over_phi0:.9f} Phi0 ({tuned})",
            f"phi_min                    = {op.phi_min:.9f} rad",
            f"c2, c3, c4                 = {op.c2:.9f}, {op.c3:.9f}, {op.c4:.9f} (dimensionless)",
            f"SNAIL inductance L_s       = {op.l_s * 1e12:.6f} pH",
            f"bare resonance             = {_ghz(bare_frequency(s.snail, r.bias, s.c1_shunt))}",
            "",
            "[synthesized elements]",
            f"resonator 1 impedance Z1   = {r.z1:.6f} ohm",
            f"inverter J12               = {r.j12 * 1e3:.6f} mS",
            f"coupling C12               = {_pf(r.c12)}",
        ]
        if s.port_coupling == "capacitor":
            lines += [
                f"inverter J01               = {r.j01 * 1e3:.6f} mS",
                f"coupling C01               = {_pf(r.c01)}",
            ]
        lines += [
            f"resonator 2 L2             = {r.l2 * 1e9:.6f} nH",
            f"resonator 2 C2 (bare)      = {_pf(r.c2)}",
            f"resonator 2 C2' (absorbed) = {_pf(r.c2_absorbed)}",
            f"resonator 1 C1' (absorbed) = {_pf(r.c1_absorbed)}",
            f"negative resistance R      = {self.r_cal:.6f} ohm",
            "",
            "[gain]",
            f"sweep grid                 = {_ghz(self.grid[0])} .. {_ghz(self.grid[1])}, {self.grid[2]} points",
            f"min gain over design band  = {self.band_min_gain_db:.4f} dB",
        ]
        if self.band is None:
            lines.append("band above threshold       = none")
        else:
            b = self.band
            lines += [
                f"threshold                  = {b.threshold_db:g} dB",
                f"band edges                 = {_ghz(b.f_low)} .. {_ghz(b.f_high)}",
                f"bandwidth                  = {b.bandwidth / 1e6:.3f} MHz",
                f"gain min / max             = {b.min_gain_db:.4f} dB / {b.max_gain_db:.4f} dB",
                f"ripple                     = {b.ripple_db:.4f} dB",
                f"in-band maxima             = {len(self.maxima)} at "
                + (", ".join(_ghz(f) for f in self.maxima) or "-"),
            ]
        fmin, fmax = self.tunable
        lines += [
            "",
            "[tunable range]",
            f"flux grid                  = {self.flux_grid[0]:g} .. {self.flux_grid[1]:g} Phi0, "
            f"{self.flux_grid[2]} points",
            f"bare frequency range       = {_ghz(fmin)} .. {_ghz(fmax)}",
            f"range width                = {(fmax - fmin) / 1e6:.3f} MHz",
            "",
            "[warnings]",
        ]
        lines += [f"- {w}" for w in self.warnings] or ["none"]
        return "\n".join(lines) + "\n"


def flux_curve(snail: SnailParams, c1: float, grid: tuple[float, float, int]) -> list[tuple[float, float]]:
    """(flux, bare frequency) pairs; a failing point is reported with its flux."""
    out = []
    for phi in np.linspace(grid[0], grid[1], int(grid[2])):
        try:
            out.append((float(phi), bare_frequency(snail, FluxBias(float(phi)), c1)))
        except ImpaError as exc:
            raise ImpaError(f"flux point phi/phi0 = {phi:.9g}: {exc}") from exc
    return out


def run_design(spec: DesignSpec, target_db: float, threshold_db: float,
               grid: tuple[float, float, int] | None) -> tuple[nl.Netlist, DesignReport]:
    synth = synthesize_detailed(spec)
    band = band_edges_from_w(spec.f0, spec.w)
    r_cal = ac.calibrate_negative_resistance(synth.netlist, spec.f0, target_db, band)
    net = synth.netlist.with_resistance(r_cal)
    min_gain = ac.min_gain_in_band(net, band)
    net = nl.Netlist(net.elements, dict(net.design, target_gain_db=target_db, achieved_min_gain_db=min_gain))
    grid = grid or default_freq_grid(spec.f0, spec.w)
    resp = ac.sweep(net, *grid)
    try:
        br = ac.band_report(resp, threshold_db)
        maxima = ac.local_maxima(resp, br.f_low, br.f_high)
    except EmptyBandError:
        br, maxima = None, []
    fmin, fmax, _ = _tunable(spec.snail, spec.c1_shunt, DEFAULT_FLUX_GRID)
    report = DesignReport(spec, synth, r_cal, min_gain, br, maxima, grid, (fmin, fmax), DEFAULT_FLUX_GRID)
    return net, report


def _tunable(snail, c1, grid):
    curve = flux_curve(snail, c1, grid)
    freqs = [f for _, f in curve]
    return min(freqs), max(freqs), curve


# --- commands ------------------------------------------------------------------

def cmd_design(cfg: RunConfig) -> int:
    if cfg.spec_path is None:
        raise InputError("design needs --spec")
    doc = load_spec_document(cfg.spec_path, DESIGN_REQUIRED)
    spec = design_spec_from_doc(doc)
    target = cfg.target_db if cfg.target_db is not None else doc.get("target_gain_db", cfg.threshold_db)
    net, report = run_design(spec, target, cfg.threshold_db, cfg.grid)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    (cfg.out_dir / "netlist.json").write_text(nl.dumps(net))
    text = report.render()
    (cfg.out_dir / "report.txt").write_text(text)
    print(text, end="")
    return EXIT_OK


def _netlist_and_design(cfg: RunConfig) -> tuple[nl.Netlist, float, float]:
    if cfg.netlist_path is not None:
        net = load_netlist(cfg.netlist_path)
        d = net.design
        if "f0_hz" in d and "w" in d:
            return net, d["f0_hz"], d["w"]
        if cfg.spec_path is None:
            if cfg.grid is None:
                raise InputError("netlist carries no design metadata; pass --grid or --spec")
            return net, math.nan, math.nan
        doc = load_spec_document(cfg.spec_path, DESIGN_REQUIRED)
        spec = design_spec_from_doc(doc)
        return net, spec.f0, spec.w
    if cfg.spec_path is None:
        raise InputError("need --netlist or --spec")
    doc = load_spec_document(cfg.spec_path, DESIGN_REQUIRED)
    spec = design_spec_from_doc(doc)
    target = cfg.target_db if cfg.target_db is not None else doc.get("target_gain_db", DEFAULT_THRESHOLD_DB)
    net, _ = run_design(spec, target, cfg.threshold_db, cfg.grid)
    return net, spec.f0, spec.w


def cmd_gain(cfg: RunConfig) -> int:
    net, f0, w = _netlist_and_design(cfg)
    grid = cfg.grid or default_freq_grid(f0, w)
    if grid[2] < 2 or not 0 < grid[0] < grid[1]:
        raise InputError("gain needs a frequency grid with 0 < start < stop and at least 2 points")
    resp = ac.sweep(net, *grid)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    ac.write_response_csv(resp, cfg.out_dir / "gain.csv")
    try:
        br = ac.band_report(resp, cfg.threshold_db)
    except EmptyBandError as exc:
        (cfg.out_dir / "band.txt").write_text(f"threshold = {cfg.threshold_db:g} dB\nband = none\n")
        print(f"empty band: {exc}", file=sys.stderr)
        return EXIT_EMPTY_BAND
    maxima = ac.local_maxima(resp, br.f_low, br.f_high)
    text = "\n".join([
        f"threshold = {br.threshold_db:g} dB",
        f"f_low = {br.f_low:.6f} Hz",
        f"f_high = {br.f_high:.6f} Hz",
        f"bandwidth = {br.bandwidth:.6f} Hz",
        f"min_gain = {br.min_gain_db:.6f} dB",
        f"max_gain = {br.max_gain_db:.6f} dB",
        f"ripple = {br.ripple_db:.6f} dB",
        f"maxima = {len(maxima)} (count)",
    ]) + "\n"
    (cfg.out_dir / "band.txt").write_text(text)
    print(text, end="")
    return EXIT_OK


def cmd_flux_sweep(cfg: RunConfig) -> int:
    if cfg.spec_path is None:
        raise InputError("flux-sweep needs --spec")
    doc = load_spec_document(cfg.spec_path)
    snail = snail_from_doc(doc)
    c1 = doc["c1_shunt_f"]
    grid = cfg.grid or DEFAULT_FLUX_GRID
    if grid[1] - grid[0] > 1.0:
        raise InputError("flux grid must cover at most one flux quantum")
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    header = ("phi_over_phi0", "f_bare_hz")
    if not cfg.alpha_sweep:
        fmin, fmax, curve = _tunable(snail, c1, grid)
        ac.write_rows_csv(header, curve, cfg.out_dir / "flux_sweep.csv")
        print(f"f_min = {fmin:.6f} Hz, f_max = {fmax:.6f} Hz")
        return EXIT_OK
    summary = []
    for alpha in cfg.alpha_sweep:
        try:
            s = SnailParams(snail.l_j, alpha, snail.n_large)
        except ValueError as exc:
            raise InputError(f"--alpha-sweep: {exc}") from None
        fmin, fmax, curve = _tunable(s, c1, grid)
        ac.write_rows_csv(header, curve, cfg.out_dir / f"flux_sweep_alpha_{alpha:g}.csv")
        summary.append((alpha, fmin, fmax, fmax - fmin))
        print(f"alpha = {alpha:g}: f_min = {fmin:.6f} Hz, f_max = {fmax:.6f} Hz, width = {fmax - fmin:.6f} Hz")
    ac.write_rows_csv(("alpha", "f_min_hz", "f_max_hz", "width_hz"), summary, cfg.out_dir / "tunable_range.csv")
    return EXIT_OK


def cmd_calibrate(cfg: RunConfig) -> int:
    if cfg.netlist_path is None:
        raise InputError("calibrate needs --netlist")
    net = load_netlist(cfg.netlist_path)
    d = dict(net.design)
    if "band_hz" in d and "f0_hz" in d:
        f0, band = d["f0_hz"], tuple(d["band_hz"])
    elif cfg.spec_path is not None:
        spec = design_spec_from_doc(load_spec_document(cfg.spec_path, DESIGN_REQUIRED))
        f0, band = spec.f0, band_edges_from_w(spec.f0, spec.w)
        d.update(f0_hz=spec.f0, w=spec.w, band_hz=list(band))
    else:
        raise InputError("netlist has no design band; pass --spec")
    target = cfg.target_db if cfg.target_db is not None else cfg.threshold_db
    idx = net.resistor_index()
    if idx is None:
        raise InputError("netlist has no negative-resistance placeholder to calibrate")
    placeholder = nl.Netlist(
        tuple(nl.ShuntResistor(None) if i == idx else e for i, e in enumerate(net.elements)), d
    )
    r_cal = ac.calibrate_negative_resistance(placeholder, f0, target, band)
    out = placeholder.with_resistance(r_cal)
    achieved = ac.min_gain_in_band(out, band)
    out = nl.Netlist(out.elements, dict(d, target_gain_db=target, achieved_min_gain_db=achieved))
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    (cfg.out_dir / "netlist.json").write_text(nl.dumps(out))
    print(f"R = {r_cal:.9g} ohm, achieved min in-band gain = {achieved:.6f} dB")
    return EXIT_OK


COMMANDS = {
    "design": cmd_design,
    "gain": cmd_gain,
    "flux-sweep": cmd_flux_sweep,
    "calibrate": cmd_calibrate,
}


def _grid(text: str) -> tuple[float, float, int]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected start,stop,points")
    try:
        start, stop, points = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None
    if points < 1 or stop < start or (points > 1 and stop == start):
        raise argparse.ArgumentTypeError("grid needs start < stop and points >= 1")
    return start, stop, points


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="impa-synth", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("design", "synthesize, calibrate and report a design"),
        ("gain", "sweep reflection gain and extract the band"),
        ("flux-sweep", "bare SNAIL resonance versus flux"),
        ("calibrate", "fit the negative resistance of a netlist"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--spec", type=Path, help="design spec JSON")
        p.add_argument("--netlist", type=Path, help="netlist JSON (netlist-v1)")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("--grid", type=_grid, help="start,stop,points (Hz, or flux quanta for flux-sweep)")
        p.add_argument("--threshold-db", type=float, default=DEFAULT_THRESHOLD_DB)
        p.add_argument("--target-db", type=float, help="calibration target for the in-band minimum gain")
        p.add_argument("--alpha-sweep", type=_floats, default=[], help="comma-separated asymmetries")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(
        command=args.command,
        spec_path=args.spec,
        netlist_path=args.netlist,
        out_dir=args.out,
        grid=args.grid,
        threshold_db=args.threshold_db,
        target_db=args.target_db,
        alpha_sweep=args.alpha_sweep,
    )
    for p in (cfg.spec_path, cfg.netlist_path):
        if p is not None and not p.is_file():
            print(f"error: {p} does not exist", file=sys.stderr)
            return EXIT_INPUT
    try:
        return COMMANDS[cfg.command](cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CalibrationError as exc:
        print(f"calibration error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except (ImpaError, ValueError, ArithmeticError) as exc:
        print(f"computation error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
