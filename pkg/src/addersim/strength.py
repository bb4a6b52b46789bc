"""Signal algebra for switch-level simulation.

A signal is a logic level (0, 1 or X) paired with a drive strength.  Strengths
are totally ordered: Strong > Weak > Charged > Floating.  ``resolve`` is the
join used when several drivers meet on one net, ``degrade`` models the single
threshold drop of a pass device, and ``gate_state`` maps a gate signal to a
switch position.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Level(enum.IntEnum):
    L0 = 0
    L1 = 1
    LX = 2


class Strength(enum.IntEnum):
    FLOATING = 0
    CHARGED = 1
    WEAK = 2
    STRONG = 3


class Kind(enum.Enum):
    NMOS = "n"
    PMOS = "p"


class SwitchState(enum.Enum):
    ON = "on"
    OFF = "off"
    UNKNOWN = "unknown"


@dataclass(frozen=True, order=True)
class Signal:
    level: Level
    strength: Strength

    def __str__(self) -> str:
        return to_token(self)

    @property
    def definite(self) -> bool:
        return self.level is not Level.LX


S0 = Signal(Level.L0, Strength.STRONG)
S1 = Signal(Level.L1, Strength.STRONG)
SX = Signal(Level.LX, Strength.STRONG)
W0 = Signal(Level.L0, Strength.WEAK)
W1 = Signal(Level.L1, Strength.WEAK)
C0 = Signal(Level.L0, Strength.CHARGED)
C1 = Signal(Level.L1, Strength.CHARGED)
Z = Signal(Level.LX, Strength.FLOATING)
POWER_ON = Z

ALL_SIGNALS: tuple[Signal, ...] = tuple(
    Signal(lv, st) for st in Strength for lv in Level
)

_SUFFIX = {Strength.STRONG: "", Strength.WEAK: "w", Strength.CHARGED: "c", Strength.FLOATING: "z"}
_LEVEL_CHAR = {Level.L0: "0", Level.L1: "1", Level.LX: "X"}


def to_token(s: Signal) -> str:
    """Render a signal as its trace token (``0 1 X 0w 1w 0c 1c Z`` ...)."""
    if s == Z:
        return "Z"
    return _LEVEL_CHAR[s.level] + _SUFFIX[s.strength]


_TOKENS = {to_token(s): s for s in ALL_SIGNALS}


def from_token(token: str) -> Signal:
    try:
        return _TOKENS[token.strip()]
    except KeyError:
        raise ValueError(f"unknown signal token {token!r}") from None


def resolve(a: Signal, b: Signal) -> Signal:
    """Join two drivers: the stronger wins, equal-strength disagreement is X."""
    if a.strength != b.strength:
        return a if a.strength > b.strength else b
    if a.level == b.level:
        return a
    return Signal(Level.LX, a.strength)


def resolve_all(signals, start: Signal | None = None) -> Signal:
    it = iter(signals)
    acc = start if start is not None else next(it)
    for s in it:
        acc = resolve(acc, s)
    return acc


def merge(a: Signal, b: Signal) -> Signal:
    """Combine the outcomes of alternative switch hypotheses.

    Unlike ``resolve`` a strong outcome does not absorb a weaker alternative:
    any level disagreement gives X at the larger strength.
    """
    level = a.level if a.level == b.level else Level.LX
    return Signal(level, max(a.strength, b.strength))


def merge_all(signals) -> Signal:
    it = iter(signals)
    acc = next(it)
    for s in it:
        acc = merge(acc, s)
    return acc


def degrade(kind: Kind, s: Signal) -> Signal:
    """Signal seen on the far side of a conducting device of ``kind``.

    NMOS cannot pass a full 1 and PMOS cannot pass a full 0; both cap X.  One
    drop per path: the cap is Weak no matter how many devices are chained.
    """
    if s.strength <= Strength.WEAK:
        return s
    if s.level is Level.LX or (s.level is Level.L1) == (kind is Kind.NMOS):
        return Signal(s.level, Strength.WEAK)
    return s


def gate_state(kind: Kind, gate: Signal) -> SwitchState:
    # Strength is irrelevant: a weak or retained level still switches the device.
    if gate.level is Level.LX:
        return SwitchState.UNKNOWN
    on_level = Level.L1 if kind is Kind.NMOS else Level.L0
    return SwitchState.ON if gate.level is on_level else SwitchState.OFF


def retain(s: Signal) -> Signal:
    """Charge left on a net once all of its drivers switch off."""
    if s.strength >= Strength.CHARGED:
        return Signal(s.level, Strength.CHARGED)
    return s


def from_bool(value: bool | int | None) -> Signal:
    if value is None:
        return SX
    return S1 if value else S0
