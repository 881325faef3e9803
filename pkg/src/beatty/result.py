from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction


@dataclass
class Estimate:
    """A recovered real: ``value`` +- ``radius``, or an exact rational."""

    value: float
    radius: float
    exact: Fraction | None = None

    def __post_init__(self):
        self.value = float(self.value)
        self.radius = float(self.radius)

    def to_json(self) -> dict:
        out = {"value": self.value, "radius": self.radius}
        if self.exact is not None:
            out["exact"] = str(self.exact)
        return out

    def __float__(self):
        return self.value


@dataclass
class RecoveryResult:
    family: str
    d: int
    N: int
    recovered: list[Estimate]
    ambiguity_note: str = ""
    slope: Estimate | None = None
    gammas: list[Estimate] | None = None
    flags: list[str] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @property
    def values(self) -> list[float]:
        return [e.value for e in self.recovered]

    def to_json(self) -> dict:
        out = {
            "family": self.family,
            "d": self.d,
            "N": self.N,
            "recovered": [e.to_json() for e in self.recovered],
            "slope": None if self.slope is None else self.slope.value,
            "flags": list(self.flags),
            "ambiguity_note": self.ambiguity_note,
            "diagnostics": _jsonable(self.diagnostics),
        }
        if self.gammas is not None:
            out["gammas"] = [g.to_json() for g in self.gammas]
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, Fraction):
        return str(x)
    if hasattr(x, "item"):  # numpy scalar
        return x.item()
    if isinstance(x, (int, float, str, bool)) or x is None:
        return x
    return str(x)
