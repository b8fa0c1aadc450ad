"""Reduced thermal functions.

Everything is in units of the rest energy ``mu = mc^2`` and of ``k_B``:
``F/mu``, ``U/mu``, ``S/k_B``, ``C/k_B`` as functions of ``mubar = k_B T/mu``.
With ``L = ln Z`` the generic relations are

    Fbar = -mubar L,   Ubar = mubar^2 dL/dmubar,
    Sbar = L + Ubar/mubar = -dFbar/dmubar,   Cbar = dUbar/dmubar.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ParameterDomainError, SingularityError
from .partition import (
    EngineSpec,
    Shift,
    Variant,
    kg_closed_partition,
    kg_rederived_laurent,
    partition_function,
)
from .spectra import SpectrumModel

DEFAULT_REL_STEP = 1e-4

# Closed-form KG thermal functions, polynomial coefficients in mubar (lowest power first).
KG_DENOMINATOR = (-1, -3, 57, 360, 720, 720)
KG_U_NUMERATOR = (0, 3, 6, -57, 0, 720, 1440)  # 3 mubar (1 + 2m - 19m^2 + 240m^4 + 480m^5)
KG_C_NUMERATOR = tuple(
    3 * c for c in (-1, -4, -6, -606, -5163, -11520, 43200, 309600, 691200, 691200, 345600)
)
SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class ThermoPoint:
    mubar: float
    lnZ: float
    fbar: float
    ubar: float
    sbar: float
    cbar: float
    sbar_from_identity: bool = False
    denominator: float | None = None


def _poly(coeffs, x: float) -> float:
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _check_mubar(mubar: float) -> float:
    if not (math.isfinite(mubar) and mubar > 0):
        raise ParameterDomainError(f"mubar must be positive and finite, got {mubar!r}")
    return float(mubar)


def _check_step(mubar: float, h: float | None) -> float:
    mubar = _check_mubar(mubar)
    h = DEFAULT_REL_STEP * mubar if h is None else float(h)
    if not 0 < h < mubar:
        raise ParameterDomainError(f"need 0 < h < mubar, got h={h!r}, mubar={mubar!r}")
    return h


def free_energy(lnZ: float, mubar: float) -> float:
    return -mubar * lnZ


def entropy(lnZ: float, ubar: float, mubar: float) -> float:
    return lnZ + ubar / mubar


def mean_energy_numeric(
    lnZ_fn: Callable[[float], float], mubar: float, h: float | None = None
) -> float:
    """``mubar^2 dlnZ/dmubar`` by a central difference (default step 1e-4*mubar)."""
    h = _check_step(mubar, h)
    return mubar**2 * (lnZ_fn(mubar + h) - lnZ_fn(mubar - h)) / (2.0 * h)


def specific_heat_numeric(
    ubar_fn: Callable[[float], float], mubar: float, h: float | None = None
) -> float:
    h = _check_step(mubar, h)
    return (ubar_fn(mubar + h) - ubar_fn(mubar - h)) / (2.0 * h)


def entropy_numeric(
    fbar_fn: Callable[[float], float], mubar: float, h: float | None = None
) -> float:
    """Entropy as ``-dFbar/dmubar``; agrees with :func:`entropy` for a smooth lnZ."""
    h = _check_step(mubar, h)
    return -(fbar_fn(mubar + h) - fbar_fn(mubar - h)) / (2.0 * h)


def kg_denominator(mubar: float) -> float:
    return _poly(KG_DENOMINATOR, mubar)


def kg_denominator_roots() -> list[float]:
    """Positive real roots of the shared denominator of the KG closed forms."""
    roots = np.roots(KG_DENOMINATOR[::-1])
    return sorted(float(r.real) for r in roots if abs(r.imag) < 1e-12 and r.real > 0)


def kg_lnZ(mubar: float, variant: Variant = Variant.REDERIVED) -> float:
    z = kg_closed_partition(mubar, variant).z
    if z <= 0:
        raise SingularityError(
            f"closed-form Z = {z:.3e} <= 0 at mubar={mubar:g}; the "
            f"Euler-MacLaurin polynomial is unusable below mubar ~ {kg_denominator_roots()[0]:.4f}"
        )
    return math.log(z)


def kg_closed_thermo(mubar: float, variant: Variant = Variant.PUBLISHED) -> ThermoPoint:
    """Printed rational KG thermal functions at ``mubar``.

    Ubar, Cbar and the rational part of Sbar are used as printed. ``variant``
    picks which Z polynomial fills the ``ln Z`` slot of Fbar and Sbar; only
    the re-derived one (c3 = 1/3) is consistent with the printed Ubar.
    """
    mubar = _check_mubar(mubar)
    den = kg_denominator(mubar)
    if abs(den) < SINGULAR_TOL:
        root = kg_denominator_roots()[0]
        raise SingularityError(
            f"KG closed forms singular at mubar={mubar:g} (denominator root near {root:.6f})"
        )
    lnZ = kg_lnZ(mubar, variant)
    ubar = _poly(KG_U_NUMERATOR, mubar) / den
    sbar = _poly(KG_U_NUMERATOR, mubar) / (mubar * den) + lnZ
    cbar = _poly(KG_C_NUMERATOR, mubar) / den**2
    return ThermoPoint(mubar, lnZ, free_energy(lnZ, mubar), ubar, sbar, cbar, denominator=den)


def laurent_thermo(coeffs: dict[int, float], mubar: float) -> ThermoPoint:
    """ThermoPoint for Z = sum_k c_k mubar^k, differentiated exactly.

    Ubar = mubar^2 Z'/Z and Cbar = dUbar/dmubar = 2 mubar Z'/Z
    + mubar^2 (Z''/Z - (Z'/Z)^2); Fbar and Sbar go through the generic ops.
    """
    mubar = _check_mubar(mubar)
    z = math.fsum(float(c) * mubar**k for k, c in coeffs.items())
    dz = math.fsum(float(k * c) * mubar ** (k - 1) for k, c in coeffs.items())
    d2z = math.fsum(float(k * (k - 1) * c) * mubar ** (k - 2) for k, c in coeffs.items())
    if not z > 0:
        raise SingularityError(f"Z = {z!r} is not positive at mubar={mubar:g}")
    lnZ = math.log(z)
    g = dz / z
    ubar = mubar**2 * g
    cbar = 2.0 * mubar * g + mubar**2 * (d2z / z - g * g)
    return ThermoPoint(
        mubar, lnZ, free_energy(lnZ, mubar), ubar, entropy(lnZ, ubar, mubar), cbar,
        sbar_from_identity=True,
    )


def dirac_lnZ(mubar: float, a: float) -> float:
    """ln Z implied by the printed Dirac free energy, ln((mubar^2 + a)/(2a))."""
    return math.log((mubar**2 + a) / (2.0 * a))


def dirac_closed_thermo(mubar: float, a: float) -> ThermoPoint:
    """Printed strong-field Dirac thermal functions; Sbar comes from the identity."""
    mubar = _check_mubar(mubar)
    if not (math.isfinite(a) and a > 0):
        raise ParameterDomainError(f"inverse coupling a must be positive, got {a!r}")
    m2 = mubar * mubar
    lnZ = dirac_lnZ(mubar, a)
    fbar = -mubar * lnZ
    ubar = 2.0 * mubar**3 / (m2 + a)
    cbar = 2.0 * m2 * (m2 + 3.0 * a) / (m2 + a) ** 2
    return ThermoPoint(
        mubar, lnZ, fbar, ubar, entropy(lnZ, ubar, mubar), cbar, sbar_from_identity=True
    )


@dataclass(frozen=True)
class HighTLaw:
    """Leading behaviour as mubar -> inf: Z ~ z_coeff mubar^2, U ~ u_coeff mubar, C -> c_limit."""

    z_coeff: float
    u_coeff: float
    c_limit: float


def high_temperature_limits(kind: str, a: float = 1.0) -> dict[str, HighTLaw]:
    """Printed and closed-form-derived high-temperature laws, tagged separately."""
    if kind == "kg-linear":
        printed = HighTLaw(1.0, 2.0, 2.0)
        derived = HighTLaw(
            float(kg_rederived_laurent(2)[2]),
            KG_U_NUMERATOR[-1] / KG_DENOMINATOR[-1],
            KG_C_NUMERATOR[-1] / KG_DENOMINATOR[-1] ** 2,
        )
    elif kind == "dirac-strong":
        if not a > 0:
            raise ParameterDomainError(f"inverse coupling a must be positive, got {a!r}")
        printed = HighTLaw(1.0 / (2.0 * a), 4.0, 2.0)
        # leading terms of (mubar^2 + a)/(2a), 2 mubar^3/(mubar^2 + a), 2 mubar^4/(mubar^2 + a)^2
        derived = HighTLaw(1.0 / (2.0 * a), 2.0, 2.0)
    else:
        raise ParameterDomainError(f"no high-temperature law for model kind {kind!r}")
    return {"printed": printed, "derived": derived}


def engine_thermo(
    model: SpectrumModel,
    mubar: float,
    engine: EngineSpec = EngineSpec(),
    shift: Shift | None = None,
    h: float | None = None,
) -> ThermoPoint:
    """ThermoPoint built from any partition engine by finite differences.

    Ubar uses step ``h`` (default 1e-4*mubar); Cbar differentiates that Ubar
    with a ten times larger step, which keeps the nested difference above
    the noise floor of a tail-truncated direct sum.
    """
    mubar = _check_mubar(mubar)
    h = _check_step(mubar, h)

    def lnZ_fn(m: float) -> float:
        z = partition_function(model, m, engine, shift).z
        if not z > 0:
            raise SingularityError(f"partition function {z!r} is not positive at mubar={m:g}")
        return math.log(z)

    def ubar_fn(m: float) -> float:
        return mean_energy_numeric(lnZ_fn, m, h * m / mubar)

    lnZ = lnZ_fn(mubar)
    ubar = ubar_fn(mubar)
    cbar = specific_heat_numeric(ubar_fn, mubar, min(10.0 * h, 0.5 * mubar))
    return ThermoPoint(
        mubar, lnZ, free_energy(lnZ, mubar), ubar, entropy(lnZ, ubar, mubar), cbar,
        sbar_from_identity=True,
    )


def entropy_inflection(mubars: np.ndarray, sbar: np.ndarray) -> list[float]:
    """Locations where the second difference of Sbar(mubar) changes sign."""
    mubars = np.asarray(mubars, dtype=float)
    d2 = np.gradient(np.gradient(np.asarray(sbar, dtype=float), mubars), mubars)
    out = []
    for i in range(1, len(d2)):
        if d2[i - 1] == 0 or np.sign(d2[i - 1]) != np.sign(d2[i]):
            # linear interpolation of the zero crossing
            t = d2[i - 1] / (d2[i - 1] - d2[i]) if d2[i] != d2[i - 1] else 0.0
            out.append(float(mubars[i - 1] + t * (mubars[i] - mubars[i - 1])))
    return out
