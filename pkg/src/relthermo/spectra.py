"""Positive-branch energy levels in units of the rest energy mc^2.

Three spectra are supported:

* ``KgLinear``: Klein-Gordon particle in a linear potential with vector to
  scalar coupling ratio ``a`` and frequency ratio ``r = hbar*omega/(mc^2)``,
  ``E_n = a + sqrt((1 - a^2) r (2n + 1))``.
* ``DiracInverseLinear``: Dirac particle in an inverse-linear Lorentz scalar
  potential of strength ``A``, ``E_n = sqrt(1 - A^2/(n + A)^2)``.
* ``DiracStrongField``: the ``A >> 1`` limit of the above, ``E_n = sqrt(2n/A)``.

Levels are indexed from ``n = 0``. Only the positive branch is exposed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import ParameterDomainError

__all__ = [
    "KgLinear",
    "DiracInverseLinear",
    "DiracStrongField",
    "SpectrumModel",
    "ValidityReport",
    "SqrtForm",
    "validate_model",
    "reduced_energy",
    "reduced_energies",
    "sqrt_form",
]


@dataclass(frozen=True)
class KgLinear:
    a: float = 0.0
    r: float = 1.0

    @property
    def kind(self) -> str:
        return "kg-linear"


@dataclass(frozen=True)
class DiracInverseLinear:
    A: float

    @property
    def kind(self) -> str:
        return "dirac-exact"


@dataclass(frozen=True)
class DiracStrongField:
    A: float

    @property
    def kind(self) -> str:
        return "dirac-strong"

    @property
    def a(self) -> float:
        """Inverse coupling ``1/A`` used by the residue formulas."""
        return 1.0 / self.A


SpectrumModel = Union[KgLinear, DiracInverseLinear, DiracStrongField]


@dataclass(frozen=True)
class ValidityReport:
    valid: bool
    violations: tuple[str, ...] = field(default_factory=tuple)

    def __bool__(self) -> bool:
        return self.valid


def _finite(x) -> bool:
    try:
        return math.isfinite(x)
    except TypeError:
        return False


def validate_model(model: SpectrumModel) -> ValidityReport:
    """Check the parameter constraints of ``model`` and name each violation."""
    violations: list[str] = []
    if isinstance(model, KgLinear):
        if not _finite(model.a):
            violations.append("a: must be a finite real")
        elif model.a * model.a >= 1.0:
            violations.append(
                f"a={model.a!r}: need a^2 < 1 (a^2 = 1 is the excluded Coulomb case)"
            )
        if not _finite(model.r) or model.r <= 0:
            violations.append(f"r={model.r!r}: frequency ratio must be positive")
        elif not violations and model.a + math.sqrt((1.0 - model.a**2) * model.r) < 0:
            violations.append(
                f"a={model.a!r}, r={model.r!r}: ground level of the positive branch is negative"
            )
    elif isinstance(model, (DiracInverseLinear, DiracStrongField)):
        if not _finite(model.A) or model.A <= 0:
            violations.append(f"A={model.A!r}: coupling must be positive")
    else:
        violations.append(f"unknown spectrum model {type(model).__name__}")
    return ValidityReport(not violations, tuple(violations))


def _require_valid(model: SpectrumModel) -> None:
    report = validate_model(model)
    if not report:
        raise ParameterDomainError("; ".join(report.violations))


def reduced_energy(model: SpectrumModel, n: int) -> float:
    """Energy of level ``n`` divided by mc^2."""
    _require_valid(model)
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise ParameterDomainError(f"level index must be a non-negative integer, got {n!r}")
    n = int(n)
    if isinstance(model, KgLinear):
        return model.a + math.sqrt((1.0 - model.a**2) * model.r * (2 * n + 1))
    if isinstance(model, DiracInverseLinear):
        # sqrt(1 - A^2/(n+A)^2) rewritten to avoid cancellation for n << A
        return math.sqrt(n * (2.0 * model.A + n)) / (n + model.A)
    return math.sqrt(2.0 * n / model.A)


def reduced_energies(model: SpectrumModel, n: np.ndarray) -> np.ndarray:
    """Vectorised :func:`reduced_energy` over an integer array of levels."""
    _require_valid(model)
    n = np.asarray(n, dtype=float)
    if isinstance(model, KgLinear):
        return model.a + np.sqrt((1.0 - model.a**2) * model.r * (2.0 * n + 1.0))
    if isinstance(model, DiracInverseLinear):
        return np.sqrt(n * (2.0 * model.A + n)) / (n + model.A)
    return np.sqrt(2.0 * n / model.A)


@dataclass(frozen=True)
class SqrtForm:
    """Levels written as ``offset + sqrt(slope*n + intercept)``."""

    offset: float
    slope: float
    intercept: float


def sqrt_form(model: SpectrumModel) -> SqrtForm | None:
    """Square-root parametrisation of the spectrum, or None if it is bounded.

    The exact Dirac spectrum saturates at the rest energy, so it has no such
    form and its Boltzmann sum diverges.
    """
    _require_valid(model)
    if isinstance(model, KgLinear):
        c = (1.0 - model.a**2) * model.r
        return SqrtForm(model.a, 2.0 * c, c)
    if isinstance(model, DiracStrongField):
        return SqrtForm(0.0, 2.0 / model.A, 0.0)
    return None
