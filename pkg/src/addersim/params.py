from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from addersim.strength import Kind

CONFIG_ENV = "ADDERSIM_CONFIG"
CONFIG_FILE = "addersim.cfg"


@dataclass(frozen=True)
class ModelParams:
    """Electrical operating point and switch-level RC constants.

    Resistances are ohms per square (scaled by L/W), capacitances are farads
    per attached terminal.  The vector period defaults to one clock at
    ``freq``.
    """

    vdd: float = 1.8
    vtn: float = 0.4
    vtp: float = 0.4
    rn: float = 10e3
    rp: float = 20e3
    cg: float = 2e-15
    csd: float = 1e-15
    freq: float = 1e8
    period_ns: float | None = None
    k_layout: float = 8.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if value is not None and not value > 0:
                raise ValueError(f"{f.name} must be positive, got {value!r}")
        if not self.vtn < self.vdd or not self.vtp < self.vdd:
            raise ValueError("threshold voltages must lie below vdd")

    @property
    def period(self) -> float:
        """Vector period in ns."""
        return self.period_ns if self.period_ns is not None else 1e9 / self.freq

    def on_resistance(self, kind: Kind, width: float, length: float) -> float:
        per_square = self.rn if kind is Kind.NMOS else self.rp
        return per_square * length / width

    def with_overrides(self, **overrides) -> "ModelParams":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


def load_config(path=None) -> dict[str, float]:
    """Read ``key = value`` overrides from a config file.

    ``path`` falls back to ``$ADDERSIM_CONFIG`` and then ``./addersim.cfg``;
    a missing default file yields no overrides.
    """
    explicit = path is not None or CONFIG_ENV in os.environ
    p = Path(path or os.environ.get(CONFIG_ENV) or CONFIG_FILE)
    if not p.exists():
        if explicit:
            raise FileNotFoundError(p)
        return {}
    with p.open("rb") as fh:
        data = tomllib.load(fh)
    known = {f.name for f in fields(ModelParams)}
    unknown = set(data) - known - {"format", "verbosity"}
    if unknown:
        raise ValueError(f"{p}: unknown keys {sorted(unknown)}")
    return data
