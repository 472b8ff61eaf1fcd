"""Initial data and constant histories shared by the closed forms and the oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from fracdr.errors import DomainError

__all__ = ["KEYS", "parse_key", "InitialData", "HistorySpec"]

KEYS = ((1, 1), (1, 2), (2, 1), (2, 2))


def parse_key(key) -> tuple[int, int]:
    """Accept ``(k, i)`` tuples or strings such as ``"12"``/``"delta_12"``."""
    if isinstance(key, str):
        digits = key.replace("delta_", "").replace("delta", "").replace(",", "").strip()
        if len(digits) != 2 or not digits.isdigit():
            raise DomainError(f"bad coordinate key {key!r}")
        key = (int(digits[0]), int(digits[1]))
    k, i = (int(v) for v in key)
    if k not in (1, 2) or i < 1:
        raise DomainError(f"bad coordinate key {key!r}")
    return k, i


def _normalise(values: Mapping | None, allow_callable: bool = False) -> dict:
    out = {}
    for key, v in (values or {}).items():
        if callable(v):
            if not allow_callable:
                raise DomainError(f"value for {key!r} must be a constant")
            out[parse_key(key)] = v
            continue
        v = float(v)
        if not math.isfinite(v):
            raise DomainError(f"value for {key!r} must be finite")
        out[parse_key(key)] = v
    return out


@dataclass(frozen=True)
class InitialData:
    """Initial values per coordinate ``delta_ki``.

    For Caputo derivatives ``beta = delta(0)`` and ``kappa = delta'(0)`` (used
    only when the order exceeds 1). For Riemann-Liouville derivatives the same
    fields hold ``D^{alpha-1} delta (0)`` and ``D^{alpha-2} delta (0)``.
    Missing keys mean 0.
    """

    beta: Mapping = field(default_factory=dict)
    kappa: Mapping = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "beta", _normalise(self.beta))
        object.__setattr__(self, "kappa", _normalise(self.kappa))

    def b(self, key) -> float:
        return self.beta.get(parse_key(key), 0.0)

    def k(self, key) -> float:
        return self.kappa.get(parse_key(key), 0.0)

    def to_json_dict(self) -> dict:
        return {"beta": {f"{k}{i}": v for (k, i), v in sorted(self.beta.items())},
                "kappa": {f"{k}{i}": v for (k, i), v in sorted(self.kappa.items())}}


@dataclass(frozen=True)
class HistorySpec:
    """Histories ``delta_ki(t) = phi_ki`` on ``[-tau_k, 0]``.

    The closed forms need constants; the oracle also accepts callables of
    ``t <= 0``. Missing keys mean a zero history.
    """

    phi: Mapping = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "phi", _normalise(self.phi, allow_callable=True))

    @property
    def is_constant(self) -> bool:
        return not any(callable(v) for v in self.phi.values())

    def value(self, key, t) -> np.ndarray | float:
        v = self.phi.get(parse_key(key), 0.0)
        if callable(v):
            return v(t)
        return v if np.ndim(t) == 0 else np.full(np.shape(t), v)

    def constant(self, key) -> float:
        v = self.phi.get(parse_key(key), 0.0)
        if callable(v):
            raise DomainError("closed forms need constant histories")
        return v

    def check_consistent(self, data: InitialData, keys=KEYS, tol: float = 1e-12) -> None:
        """Caputo data must continue the history: ``beta_ki = phi_ki(0)``."""
        for key in keys:
            phi0 = float(self.value(key, 0.0))
            if abs(phi0 - data.b(key)) > tol * max(1.0, abs(phi0)):
                raise DomainError(
                    f"history of delta_{key[0]}{key[1]} ends at {phi0} but beta is {data.b(key)}")

    def to_json_dict(self) -> dict:
        if not self.is_constant:
            raise DomainError("only constant histories serialise")
        return {f"{k}{i}": v for (k, i), v in sorted(self.phi.items())}

