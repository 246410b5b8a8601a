"""Two-pole matching network synthesis with capacitive admittance inverters.

The amplifier is a SNAIL (resonator 1) coupled through a capacitor to an
auxiliary parallel LC resonator (resonator 2) that faces the port::

    port --[C01]-- (L2 || C2') --[C12]-- (L_s || C1' || R)

Each coupling capacitor C_ij = J_ij / w0 stands in for an admittance
inverter J_ij = w / sqrt(g_i g_j Z_i Z_j); its value is subtracted from the
shunt capacitors on both sides so every node still resonates at f0.
By default the port taps resonator 2 directly (no C01).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .chebyshev import PrototypeSpec
from .errors import SynthesisError
from .netlist import Netlist, PortTermination, SeriesCapacitor, ShuntParallelLC, ShuntResistor
from .snail import FluxBias, FluxOperatingPoint, SnailParams, flux_for_frequency, operating_point

MIN_COUPLING_F = 1e-18
# Characteristic-impedance limits of planar distributed resonators.
Z_SHUNT_MIN_OHM = 15.0
Z_SERIES_MAX_OHM = 150.0

PORT_COUPLINGS = ("tap", "capacitor")


@dataclass(frozen=True)
class DesignSpec:
    """Inputs for :func:`synthesize`.

    ``bias=None`` asks synthesis to pick the flux that puts the bare SNAIL
    resonance at ``f0``.
    """

    f0: float
    w: float
    prototype: PrototypeSpec
    snail: SnailParams
    c1_shunt: float
    z2: float
    z_port: float = 50.0
    bias: FluxBias | None = None
    port_coupling: str = "tap"

    def __post_init__(self):
        if not self.f0 > 0:
            raise ValueError(f"f0 must be positive, got {self.f0!r}")
        # w == 0 is let through so synthesis can report the vanishing coupling
        if not 0 <= self.w < 1:
            raise ValueError(f"fractional bandwidth must satisfy 0 <= w < 1, got {self.w!r}")
        if not (self.z_port > 0 and self.z2 > 0 and self.c1_shunt > 0):
            raise ValueError("z_port, z2 and c1_shunt must be positive")
        if self.prototype.order_n != 2:
            raise ValueError(f"the two-pole network needs an order-2 prototype, got N={self.prototype.order_n}")
        if self.port_coupling not in PORT_COUPLINGS:
            raise ValueError(f"port_coupling must be one of {PORT_COUPLINGS}, got {self.port_coupling!r}")

    @classmethod
    def from_band_edges(cls, f1: float, f2: float, **kwargs) -> "DesignSpec":
        f0, w = center_and_w_from_edges(f1, f2)
        return cls(f0=f0, w=w, **kwargs)


@dataclass(frozen=True)
class SynthesisResult:
    netlist: Netlist
    bias: FluxBias
    op: FluxOperatingPoint
    z1: float
    j12: float
    c12: float
    c2: float
    l2: float
    c1_absorbed: float
    c2_absorbed: float
    j01: float = 0.0
    c01: float = 0.0
    warnings: list[str] = field(default_factory=list)


def resonator_impedance_from_c(f0: float, c: float) -> float:
    """Characteristic impedance 1/(w0 C) of a resonator with capacitance ``c``."""
    if not (f0 > 0 and c > 0):
        raise ValueError("f0 and c must be positive")
    return 1.0 / (2 * math.pi * f0 * c)


def inverter_constant(w: float, g_i: float, g_j: float, z_i: float, z_j: float) -> float:
    """J_ij = w / sqrt(g_i g_j Z_i Z_j), in siemens."""
    if w < 0 or not all(x > 0 for x in (g_i, g_j, z_i, z_j)):
        raise ValueError("inverter inputs must be positive")
    return w / math.sqrt(g_i * g_j * z_i * z_j)


def coupling_capacitance(j: float, f0: float) -> float:
    if j < 0 or not f0 > 0:
        raise ValueError("j and f0 must be positive")
    return j / (2 * math.pi * f0)


def band_edges_from_w(f0: float, w: float) -> tuple[float, float]:
    """Band edges with geometric centre f0 and (f2 - f1)/f0 = w."""
    if not 0 <= w < 2:
        raise ValueError(f"w must lie in [0, 2), got {w!r}")
    root = math.sqrt(1 + w * w / 4)
    return f0 * (root - w / 2), f0 * (root + w / 2)


def center_and_w_from_edges(f1: float, f2: float) -> tuple[float, float]:
    if not 0 < f1 < f2:
        raise ValueError("band edges must satisfy 0 < f1 < f2")
    f0 = math.sqrt(f1 * f2)
    return f0, (f2 - f1) / f0


def realizability_warnings(z_shunt: dict[str, float], z_series: dict[str, float] | None = None) -> list[str]:
    out = []
    for name, z in z_shunt.items():
        if z < Z_SHUNT_MIN_OHM:
            out.append(
                f"{name}: shunt resonator impedance {z:.4g} ohm is below {Z_SHUNT_MIN_OHM:g} ohm; "
                "not realizable as a distributed line, use lumped elements"
            )
    for name, z in (z_series or {}).items():
        if z > Z_SERIES_MAX_OHM:
            out.append(
                f"{name}: series resonator impedance {z:.4g} ohm exceeds {Z_SERIES_MAX_OHM:g} ohm; "
                "not realizable as a distributed line"
            )
    return out


def synthesize_detailed(spec: DesignSpec) -> SynthesisResult:
    """Synthesize the ladder and keep every intermediate value."""
    w0 = 2 * math.pi * spec.f0
    g = spec.prototype.coefficient
    bias = spec.bias if spec.bias is not None else flux_for_frequency(spec.snail, spec.c1_shunt, spec.f0)
    op = operating_point(spec.snail, bias)

    z1 = resonator_impedance_from_c(spec.f0, spec.c1_shunt)
    c2 = 1.0 / (w0 * spec.z2)
    l2 = spec.z2 / w0

    j12 = inverter_constant(spec.w, g(1), g(2), z1, spec.z2)
    c12 = coupling_capacitance(j12, spec.f0)
    if c12 < MIN_COUPLING_F:
        raise SynthesisError(
            f"inter-resonator coupling C12 = {c12:.3e} F is below {MIN_COUPLING_F:g} F (w = {spec.w!r})"
        )

    j01 = c01 = 0.0
    if spec.port_coupling == "capacitor":
        j01 = inverter_constant(spec.w, g(0), g(1), spec.z_port, spec.z2)
        c01 = coupling_capacitance(j01, spec.f0)
        if c01 < MIN_COUPLING_F:
            raise SynthesisError(f"port coupling C01 = {c01:.3e} F is below {MIN_COUPLING_F:g} F")

    c2_absorbed = c2 - c01 - c12
    c1_absorbed = spec.c1_shunt - c12
    if not c2_absorbed > 0:
        raise SynthesisError(
            f"resonator 2 (port side): absorbing coupling capacitance leaves C2' = {c2_absorbed:.3e} F"
        )
    if not c1_absorbed > 0:
        raise SynthesisError(
            f"resonator 1 (SNAIL): absorbing coupling capacitance leaves C1' = {c1_absorbed:.3e} F"
        )

    elements = [PortTermination(spec.z_port)]
    if spec.port_coupling == "capacitor":
        elements.append(SeriesCapacitor(c01))
    elements += [
        ShuntParallelLC(l2, c2_absorbed),
        SeriesCapacitor(c12),
        ShuntParallelLC(op.l_s, c1_absorbed),
        ShuntResistor(None),
    ]
    f1, f2 = band_edges_from_w(spec.f0, spec.w)
    design = {
        "f0_hz": spec.f0,
        "w": spec.w,
        "band_hz": [f1, f2],
        "phi_over_phi0": bias.phi_over_phi0,
    }
    warns = realizability_warnings({"resonator 1": z1, "resonator 2": spec.z2})
    return SynthesisResult(
        netlist=Netlist(tuple(elements), design),
        bias=bias,
        op=op,
        z1=z1,
        j12=j12,
        c12=c12,
        c2=c2,
        l2=l2,
        c1_absorbed=c1_absorbed,
        c2_absorbed=c2_absorbed,
        j01=j01,
        c01=c01,
        warnings=warns,
    )


def synthesize(spec: DesignSpec) -> Netlist:
    """Lumped-element netlist for ``spec`` with an uncalibrated resistor placeholder."""
    return synthesize_detailed(spec).netlist
