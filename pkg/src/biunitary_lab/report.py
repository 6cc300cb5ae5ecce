"""Residual reports shared by the verifiers."""
from __future__ import annotations

from dataclasses import dataclass, field

from . import DEFAULT_TOL


def fmt17(x: float) -> str:
    return format(float(x), ".17g")


@dataclass
class Report:
    residuals: dict = field(default_factory=dict)
    tol: float = DEFAULT_TOL
    info: dict = field(default_factory=dict)

    @property
    def flags(self) -> dict:
        return {k: bool(v < self.tol) for k, v in self.residuals.items()}

    @property
    def passed(self) -> bool:
        return all(self.flags.values())

    def passes(self, *names) -> bool:
        f = self.flags
        return all(f[n] for n in names)

    def worst(self):
        k = max(self.residuals, key=self.residuals.get)
        return k, self.residuals[k]

    def to_json(self) -> dict:
        return {
            "residuals": {k: fmt17(v) for k, v in self.residuals.items()},
            "flags": self.flags,
            "tolerance": fmt17(self.tol),
            "passed": self.passed,
            **({"info": self.info} if self.info else {}),
        }
