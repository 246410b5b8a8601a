"""Frequency-domain analysis of ladder netlists.

Input impedance comes from the cascaded ABCD matrix of the ladder with the
far end left open, so Z_in = A / C. The pumped SNAIL is represented by a
static negative shunt resistance at the last node; :func:`calibrate_negative_resistance`
picks its value so that the minimum in-band gain hits a target, staying on
the stable side of the oscillation threshold.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg
from scipy.optimize import brentq, minimize_scalar

from .errors import CalibrationError, EmptyBandError, NetlistError, PoleError, SingularElementError
from .netlist import Netlist, SeriesCapacitor, ShuntParallelLC, ShuntResistor

OPEN = complex(math.inf, 0.0)
# |Z_in| above this is reported as an open circuit.
Z_OPEN_OHM = 1e13
POLE_RTOL = 1e-12
CSV_HEADER = ("freq_hz", "re_gamma", "im_gamma", "gain_db")


@dataclass(frozen=True)
class TwoPortABCD:
    """Chain matrix; entries may be scalars or equal-length arrays over frequency."""

    a: complex | np.ndarray
    b: complex | np.ndarray
    c: complex | np.ndarray
    d: complex | np.ndarray

    def __matmul__(self, other: "TwoPortABCD") -> "TwoPortABCD":
        return TwoPortABCD(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    @property
    def det(self):
        return self.a * self.d - self.b * self.c

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])


@dataclass(frozen=True)
class FrequencyResponse:
    freqs: np.ndarray
    gamma: np.ndarray
    gain_db: np.ndarray
    poles: np.ndarray

    def __post_init__(self):
        if self.freqs.ndim != 1 or len(self.freqs) < 1:
            raise ValueError("frequency grid must be a non-empty 1-D array")
        if np.any(np.diff(self.freqs) <= 0):
            raise ValueError("frequency grid must be strictly increasing")
        if not (len(self.gamma) == len(self.gain_db) == len(self.poles) == len(self.freqs)):
            raise ValueError("response arrays must match the frequency grid")

    @classmethod
    def from_gamma(cls, freqs, gamma, poles=None) -> "FrequencyResponse":
        freqs = np.asarray(freqs, dtype=float)
        gamma = np.asarray(gamma, dtype=complex)
        if poles is None:
            poles = np.isinf(gamma)
        with np.errstate(divide="ignore"):
            gain = 20.0 * np.log10(np.abs(gamma))
        return cls(freqs, gamma, gain, np.asarray(poles, dtype=bool))


@dataclass(frozen=True)
class BandReport:
    f_low: float
    f_high: float
    min_gain_db: float
    max_gain_db: float
    threshold_db: float

    @property
    def bandwidth(self) -> float:
        return self.f_high - self.f_low

    @property
    def ripple_db(self) -> float:
        return self.max_gain_db - self.min_gain_db


def abcd_of_element(element, f) -> TwoPortABCD:
    """ABCD matrix of one ladder element at frequency ``f`` (scalar or array, Hz)."""
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0):
        raise ValueError("frequency must be positive")
    omega = 2 * np.pi * f
    one = np.ones_like(omega, dtype=complex)
    zero = np.zeros_like(omega, dtype=complex)
    if isinstance(element, SeriesCapacitor):
        if element.c == 0:
            raise SingularElementError("series capacitor with C = 0 is an open circuit")
        return _squeeze(TwoPortABCD(one, 1 / (1j * omega * element.c), zero, one))
    if isinstance(element, ShuntParallelLC):
        if element.l == 0 or element.c == 0:
            raise SingularElementError("shunt LC with a zero L or C is a short circuit")
        y = 1j * omega * element.c * (1.0 - 1.0 / (omega**2 * element.l * element.c))
        return _squeeze(TwoPortABCD(one, zero, y, one))
    if isinstance(element, ShuntResistor):
        if element.r is None:
            return _squeeze(TwoPortABCD(one, zero, zero, one))
        if element.r == 0:
            raise SingularElementError("shunt resistor with R = 0 is a short circuit")
        return _squeeze(TwoPortABCD(one, zero, one / element.r, one))
    raise TypeError(f"{type(element).__name__} is not a two-port ladder element")


def _squeeze(m: TwoPortABCD) -> TwoPortABCD:
    if np.ndim(m.a) == 0:
        return TwoPortABCD(complex(m.a), complex(m.b), complex(m.c), complex(m.d))
    return m


def cascade(parts: Sequence[TwoPortABCD]) -> TwoPortABCD:
    """Ordered product, port side first."""
    if len(parts) == 0:
        raise ValueError("cascade needs at least one two-port")
    out = parts[0]
    for p in parts[1:]:
        out = out @ p
    return out


def network_abcd(netlist: Netlist, f) -> TwoPortABCD:
    parts = [abcd_of_element(e, f) for e in netlist.elements[1:]]
    if not parts:
        one = np.ones_like(np.asarray(f, dtype=float), dtype=complex)
        return _squeeze(TwoPortABCD(one, 0 * one, 0 * one, one))
    return cascade(parts)


def input_impedance(netlist: Netlist, f):
    """Impedance into the ladder from the port node; :data:`OPEN` where it diverges."""
    m = network_abcd(netlist, f)
    a = np.asarray(m.a, dtype=complex)
    c = np.asarray(m.c, dtype=complex)
    is_open = np.abs(c) * Z_OPEN_OHM <= np.abs(a)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(is_open, OPEN, a / np.where(is_open, 1.0, c))
    return complex(z) if z.ndim == 0 else z


def reflection(z_in: complex, z0: float) -> complex:
    """(Z_in - Z0)/(Z_in + Z0); exactly 1 for an open circuit."""
    if not z0 > 0:
        raise ValueError("z0 must be positive")
    if math.isinf(abs(z_in)):
        return 1.0 + 0j
    if abs(z_in + z0) <= POLE_RTOL * z0:
        raise PoleError(f"Z_in = -Z0 = {-z0} ohm: reflection coefficient is singular")
    return (z_in - z0) / (z_in + z0)


def _reflection_array(z_in: np.ndarray, z0: float) -> tuple[np.ndarray, np.ndarray]:
    z_in = np.asarray(z_in, dtype=complex)
    is_open = np.isinf(np.abs(z_in))
    is_pole = ~is_open & (np.abs(z_in + z0) <= POLE_RTOL * z0)
    safe = np.where(is_open | is_pole, 0.0, z_in)
    gamma = (safe - z0) / (safe + z0)
    gamma = np.where(is_open, 1.0 + 0j, gamma)
    gamma = np.where(is_pole, OPEN, gamma)
    return gamma, is_pole


def response(netlist: Netlist, freqs) -> FrequencyResponse:
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    gamma, poles = _reflection_array(input_impedance(netlist, freqs), netlist.z0)
    return FrequencyResponse.from_gamma(freqs, gamma, poles)


def sweep(netlist: Netlist, f_start: float, f_stop: float, n_points: int) -> FrequencyResponse:
    """Reflection gain on a uniform grid. Pole points are flagged, not fatal."""
    if not 0 < f_start < f_stop:
        raise ValueError("need 0 < f_start < f_stop")
    if n_points < 2:
        raise ValueError("need at least two points")
    return response(netlist, np.linspace(f_start, f_stop, int(n_points)))


def _crossing(fa, ga, fb, gb, level):
    if not (math.isfinite(ga) and math.isfinite(gb)) or ga == gb:
        return fb if not math.isfinite(gb) else fa
    return fa + (level - ga) * (fb - fa) / (gb - ga)


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    edges = np.flatnonzero(np.diff(np.concatenate(([0], mask.astype(np.int8), [0]))))
    return list(zip(edges[::2], edges[1::2] - 1))


def band_report(resp: FrequencyResponse, threshold_db: float) -> BandReport:
    """Widest contiguous interval with gain >= threshold, edges interpolated linearly in dB."""
    f, g = resp.freqs, resp.gain_db
    runs = _runs(g >= threshold_db)
    if not runs:
        raise EmptyBandError(
            f"no frequency reaches {threshold_db:g} dB (peak {np.max(g):.3f} dB)"
        )
    best = None
    for i, j in runs:
        lo = f[0] if i == 0 else _crossing(f[i - 1], g[i - 1], f[i], g[i], threshold_db)
        hi = f[-1] if j == len(f) - 1 else _crossing(f[j], g[j], f[j + 1], g[j + 1], threshold_db)
        if best is None or hi - lo > best[1] - best[0]:
            best = (lo, hi, i, j)
    lo, hi, i, j = best
    if hi <= lo:
        raise EmptyBandError(f"gain touches {threshold_db:g} dB only at an isolated grid point")
    seg = g[i:j + 1]
    return BandReport(float(lo), float(hi), float(np.min(seg)), float(np.max(seg)), float(threshold_db))


def local_maxima(resp: FrequencyResponse, f_low: float, f_high: float) -> list[float]:
    """Frequencies of interior local gain maxima with f_low <= f <= f_high."""
    g = resp.gain_db
    out = []
    for k in range(1, len(g) - 1):
        if g[k] > g[k - 1] and g[k] >= g[k + 1] and f_low <= resp.freqs[k] <= f_high:
            out.append(float(resp.freqs[k]))
    return out


# --- stability ---------------------------------------------------------------

def nodal_matrices(netlist: Netlist, include_port: bool = True):
    """Capacitance, conductance and inverse-inductance matrices of the ladder nodes.

    The nodal admittance at complex frequency s is ``s*C + G + B/s``. With
    ``include_port`` the port's reference resistance loads node 0.
    """
    n = netlist.node_count
    C = np.zeros((n, n))
    G = np.zeros((n, n))
    B = np.zeros((n, n))
    node = 0
    for e in netlist.elements[1:]:
        if isinstance(e, SeriesCapacitor):
            C[node, node] += e.c
            C[node + 1, node + 1] += e.c
            C[node, node + 1] -= e.c
            C[node + 1, node] -= e.c
            node += 1
        elif isinstance(e, ShuntParallelLC):
            C[node, node] += e.c
            B[node, node] += 1.0 / e.l
        elif isinstance(e, ShuntResistor) and e.r is not None:
            G[node, node] += 1.0 / e.r
    if include_port:
        G[0, 0] += 1.0 / netlist.z0
    return C, G, B


def natural_frequencies(netlist: Netlist) -> np.ndarray:
    """Finite poles (rad/s) of the ladder terminated by its port resistance.

    Solves det(s^2 C + s G + B) = 0 through a companion linearization, with
    s scaled by a characteristic frequency of the network for conditioning.
    """
    C, G, B = nodal_matrices(netlist)
    n = C.shape[0]
    tc, tb = np.trace(C), np.trace(B)
    w_ref = math.sqrt(tb / tc) if tc > 0 and tb > 0 else 1.0
    Cs, Bs = w_ref * C, B / w_ref
    A = np.block([[np.zeros((n, n)), np.eye(n)], [-Bs, -G]])
    E = np.block([[np.eye(n), np.zeros((n, n))], [np.zeros((n, n)), Cs]])
    ev = scipy.linalg.eig(A, E, right=False)
    ev = ev[np.isfinite(ev)]
    return ev * w_ref


def is_stable(netlist: Netlist, rtol: float = 1e-9) -> bool:
    poles = natural_frequencies(netlist)
    C, G, B = nodal_matrices(netlist)
    if not C.any() and not B.any():
        # purely resistive: stable iff the conductance matrix is positive definite
        return bool(np.all(np.linalg.eigvalsh(G) > 0))
    if poles.size == 0:
        return True
    scale = max(float(np.max(np.abs(poles))), 1.0)
    return bool(np.all(poles.real <= rtol * scale))


# --- calibration ------------------------------------------------------------

def min_gain_in_band(netlist: Netlist, band: tuple[float, float], n_grid: int = 801) -> float:
    """Minimum reflection gain (dB) over [f1, f2], local minima refined off-grid."""
    f1, f2 = band
    resp = response(netlist, np.linspace(f1, f2, n_grid))
    g = resp.gain_db
    best = float(np.min(g))
    for k in range(1, n_grid - 1):
        if g[k] < g[k - 1] and g[k] <= g[k + 1]:
            res = minimize_scalar(
                lambda x: float(response(netlist, [x]).gain_db[0]),
                bounds=(resp.freqs[k - 1], resp.freqs[k + 1]),
                method="bounded",
                options={"xatol": 1e-9 * f2},
            )
            best = min(best, float(res.fun))
    return best


def oscillation_threshold(netlist: Netlist, r_max: float, r_min: float) -> float:
    """Smallest |R| (within [r_min, r_max]) at which the netlist is still stable."""
    if not is_stable(netlist.with_resistance(-r_max)):
        raise CalibrationError(f"network is unstable already at R = -{r_max:g} ohm")
    if is_stable(netlist.with_resistance(-r_min)):
        return r_min
    lo, hi = math.log(r_min), math.log(r_max)
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if is_stable(netlist.with_resistance(-math.exp(mid))):
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-12:
            break
    return math.exp(hi)


def calibrate_negative_resistance(
    netlist: Netlist,
    f0: float,
    target_min_gain_db: float,
    band: tuple[float, float],
    n_scan: int = 80,
    n_grid: int = 801,
) -> float:
    """Negative R at the JPA node giving ``target_min_gain_db`` as the in-band minimum.

    |R| is walked down from far above the oscillation threshold; the first
    crossing of the target is then refined with Brent's method.
    """
    if netlist.resistor_index() is None:
        raise NetlistError("netlist has no resistor placeholder at the JPA node")
    f1, f2 = band
    if not 0 < f1 < f2:
        raise ValueError("band must satisfy 0 < f1 < f2")
    c_total = _total_capacitance(netlist)
    z_scale = netlist.z0 if c_total == 0 else max(netlist.z0, 1.0 / (2 * math.pi * f0 * c_total))
    r_max, r_min = 1e6 * z_scale, 1e-6 * z_scale
    r_th = oscillation_threshold(netlist, r_max, r_min)

    def excess(r):
        return min_gain_in_band(netlist.with_resistance(-r), band, n_grid) - target_min_gain_db

    rs = np.geomspace(r_max, r_th * (1 + 1e-6), n_scan)
    prev_r = None
    best = -math.inf
    for r in rs:
        h = excess(float(r))
        best = max(best, h)
        if h >= 0:
            if prev_r is None:
                raise CalibrationError(
                    f"gain already exceeds {target_min_gain_db:g} dB at R = -{r:.4g} ohm",
                    achievable_db=h + target_min_gain_db,
                )
            r_cal = brentq(excess, float(r), prev_r, xtol=1e-12 * float(r), rtol=1e-14)
            return -r_cal
        prev_r = float(r)
    achievable = best + target_min_gain_db
    raise CalibrationError(
        f"target {target_min_gain_db:g} dB unreachable before the oscillation threshold "
        f"R = -{r_th:.4g} ohm; achievable in-band minimum is {achievable:.3f} dB",
        achievable_db=achievable,
    )


def _total_capacitance(netlist: Netlist) -> float:
    return sum(e.c for e in netlist.elements if isinstance(e, (SeriesCapacitor, ShuntParallelLC)))


# --- CSV --------------------------------------------------------------------

def write_response_csv(resp: FrequencyResponse, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for f, gm, g in zip(resp.freqs, resp.gamma, resp.gain_db):
            w.writerow((repr(float(f)), repr(float(gm.real)), repr(float(gm.imag)), repr(float(g))))


def read_response_csv(path: str | Path) -> FrequencyResponse:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"{path}: expected header {','.join(CSV_HEADER)}")
    data = np.array([[float(x) for x in r] for r in rows[1:]], dtype=float).reshape(-1, 4)
    gamma = data[:, 1] + 1j * data[:, 2]
    gamma = np.where(np.isinf(data[:, 1]), OPEN, gamma)
    return FrequencyResponse(data[:, 0], gamma, data[:, 3], np.isinf(data[:, 3]))


def write_rows_csv(header: Iterable[str], rows: Iterable[Iterable[float]], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(header))
        for row in rows:
            w.writerow([repr(float(x)) for x in row])


def read_rows_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    data = np.array([[float(x) for x in r] for r in rows[1:]], dtype=float).reshape(-1, len(header))
    return header, data

