"""Equal-ripple gain target: Chebyshev polynomials, power loss and g-coefficient tables.

Prototype table files are JSON arrays of rows::

    [{"order": 2, "g_min_db": 20.0, "ripple_db": 0.5, "g": [0.5, 0.24, 1.22]}]

``g`` lists g_1 ... g_{N+1}; the source-side g_0 = 1 is implied.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import TableMissError

TABLE_ENV_VAR = "IMPA_SYNTH_TABLE"


@dataclass(frozen=True)
class PrototypeSpec:
    order_n: int
    g_min_db: float
    ripple_db: float
    g: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "g", tuple(float(x) for x in self.g))
        if int(self.order_n) != self.order_n or self.order_n < 1:
            raise ValueError(f"order_n must be an integer >= 1, got {self.order_n!r}")
        if len(self.g) != self.order_n + 1:
            raise ValueError(
                f"expected {self.order_n + 1} g-coefficients for order {self.order_n}, got {len(self.g)}"
            )
        if not all(x > 0 for x in self.g):
            raise ValueError(f"g-coefficients must be positive, got {self.g}")
        if not self.ripple_db > 0 or not self.g_min_db > 0:
            raise ValueError("g_min_db and ripple_db must be positive")

    def coefficient(self, i: int) -> float:
        """g_i with the g_0 = 1 convention."""
        return 1.0 if i == 0 else self.g[i - 1]

    def to_dict(self) -> dict:
        return {"order": self.order_n, "g_min_db": self.g_min_db,
                "ripple_db": self.ripple_db, "g": list(self.g)}

    @classmethod
    def from_dict(cls, row: dict) -> "PrototypeSpec":
        return cls(int(row["order"]), float(row["g_min_db"]), float(row["ripple_db"]), tuple(row["g"]))


@dataclass(frozen=True)
class RippleConstant:
    k: float

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"ripple constant must be positive, got {self.k!r}")


def chebyshev_t(n: int, x):
    """Chebyshev polynomial of the first kind by the three-term recurrence."""
    if n < 0:
        raise ValueError(f"degree must be >= 0, got {n}")
    x = np.asarray(x, dtype=float) if not np.isscalar(x) else float(x)
    t_prev, t = 1.0 + 0.0 * x, x
    if n == 0:
        return t_prev
    for _ in range(n - 1):
        t_prev, t = t, 2.0 * x * t - t_prev
    return t


def power_loss(k: RippleConstant | float, n: int, omega_normalized):
    """P_L = 1 + k^2 T_n(omega)^2."""
    kv = k.k if isinstance(k, RippleConstant) else float(k)
    return 1.0 + kv**2 * chebyshev_t(n, omega_normalized) ** 2


def db_to_power(db: float) -> float:
    return 10.0 ** (db / 10.0)


def ripple_constant_from_spec(g_min_db: float, ripple_db: float) -> RippleConstant:
    """k for which P_L / (P_L - 1) at T_N^2 = 1 equals the minimum gain.

    That is k^2 = 1 / (G_min - 1) with G_min linear.
    """
    if not g_min_db > 0:
        raise ValueError(f"minimum gain must be above 0 dB, got {g_min_db!r}")
    if not ripple_db > 0:
        raise ValueError(f"ripple must be positive, got {ripple_db!r}")
    return RippleConstant(1.0 / math.sqrt(db_to_power(g_min_db) - 1.0))


def prototype_gain(k: RippleConstant | float, n: int, omega_normalized):
    """Reflection-amplifier gain P_L / (P_L - 1) of the prototype (linear)."""
    p = power_loss(k, n, omega_normalized)
    with np.errstate(divide="ignore"):
        return p / (p - 1.0)


def lowpass_frequency(f, f0: float, w: float):
    """Lowpass-to-bandpass substitution (f/f0 - f0/f)/w; diagnostic overlays only."""
    f = np.asarray(f, dtype=float)
    return (f / f0 - f0 / f) / w


def _builtin_rows() -> list[dict]:
    text = resources.files("impa_synth").joinpath("data/prototypes.json").read_text()
    return json.loads(text)


def load_table(path: str | os.PathLike | None = None) -> list[PrototypeSpec]:
    """Built-in rows followed by rows from ``path`` or ``$IMPA_SYNTH_TABLE``.

    User rows take precedence on a key collision.
    """
    rows = [PrototypeSpec.from_dict(r) for r in _builtin_rows()]
    path = path or os.environ.get(TABLE_ENV_VAR)
    if path:
        data = json.loads(Path(path).read_text())
        if not isinstance(data, list):
            raise ValueError(f"prototype table {path} must be a JSON array of rows")
        user = [PrototypeSpec.from_dict(r) for r in data]
        keys = {_key(p.order_n, p.g_min_db, p.ripple_db) for p in user}
        rows = user + [r for r in rows if _key(r.order_n, r.g_min_db, r.ripple_db) not in keys]
    return rows


def _key(order, g_min_db, ripple_db):
    return (int(order), round(float(g_min_db), 9), round(float(ripple_db), 9))


def prototype_lookup(order_n: int, g_min_db: float, ripple_db: float,
                     table: list[PrototypeSpec] | None = None) -> PrototypeSpec:
    rows = load_table() if table is None else table
    want = _key(order_n, g_min_db, ripple_db)
    for row in rows:
        if _key(row.order_n, row.g_min_db, row.ripple_db) == want:
            return row

    def distance(r):
        return (abs(r.order_n - order_n), abs(r.g_min_db - g_min_db) + abs(r.ripple_db - ripple_db))

    nearest = sorted(rows, key=distance)[:3]
    names = ", ".join(f"(N={r.order_n}, {r.g_min_db:g} dB, {r.ripple_db:g} dB)" for r in nearest)
    raise TableMissError(
        f"no prototype for (N={order_n}, {g_min_db:g} dB, {ripple_db:g} dB); nearest available: {names}"
    )


def dump_table(rows: list[PrototypeSpec]) -> str:
    return json.dumps([r.to_dict() for r in rows], indent=2)

