"""Partition-function engines.

``direct_sum`` is the reference: it sums Boltzmann factors until a closed-form
integral bound on the discarded tail falls below the requested relative
tolerance. The two closed-form engines (Euler-MacLaurin for the Klein-Gordon
spectrum, Mellin residues for the strong-field Dirac spectrum) each come in a
``PUBLISHED`` flavour that reproduces the printed literature formula and a
``REDERIVED`` flavour computed here from scratch, so the two can be compared
against the reference.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import NonConvergentError, ParameterDomainError, TruncationError
from .spectra import (
    DiracStrongField,
    KgLinear,
    SpectrumModel,
    reduced_energies,
    sqrt_form,
    validate_model,
)
from .specialfn import bernoulli, gamma_int, zeta_at

MAX_TERMS = 10_000_000
_FIRST_CHUNK = 4096


class Variant(str, enum.Enum):
    PUBLISHED = "published"
    REDERIVED = "rederived"


class Shift(str, enum.Enum):
    GROUND = "ground"      # factors exp(-(E_n - E_0)/mubar), first summand is 1
    ABSOLUTE = "absolute"  # factors exp(-E_n/mubar)


class EngineKind(str, enum.Enum):
    DIRECT = "direct"
    EULER_MACLAURIN = "em"
    MELLIN = "mellin"


@dataclass(frozen=True)
class EngineSpec:
    kind: EngineKind = EngineKind.DIRECT
    tail_tol: float = 1e-12
    order: int = 2
    variant: Variant = Variant.REDERIVED
    extended_poles: bool = False

    def __post_init__(self):
        if not (self.tail_tol > 0):
            raise ParameterDomainError(f"tail_tol must be positive, got {self.tail_tol!r}")
        if self.order < 1:
            raise ParameterDomainError(f"Euler-MacLaurin order must be >= 1, got {self.order!r}")

    @property
    def label(self) -> str:
        return self.kind.value

    @property
    def variant_label(self) -> str:
        return "none" if self.kind is EngineKind.DIRECT else self.variant.value


@dataclass(frozen=True)
class PartitionResult:
    z: float
    engine: EngineSpec
    terms_summed: int | None = None
    tail_bound: float | None = None
    notes: str = ""


def default_shift(model: SpectrumModel) -> Shift:
    return Shift.GROUND if isinstance(model, KgLinear) else Shift.ABSOLUTE


def _check_mubar(mubar: float) -> float:
    if not (isinstance(mubar, (int, float, np.floating)) and math.isfinite(mubar) and mubar > 0):
        raise ParameterDomainError(f"mubar must be positive and finite, got {mubar!r}")
    return float(mubar)


def tail_integral(beta: float, bprime: float, bdprime: float) -> float:
    """Closed form of the integral over n in [0, inf) of exp(-beta*sqrt(bprime*n + bdprime)).

    Equal to ``2/(bprime*beta^2) * (1 + beta*sqrt(bdprime)) * exp(-beta*sqrt(bdprime))``.
    """
    if not beta > 0:
        raise ParameterDomainError(f"beta must be positive, got {beta!r}")
    if not bprime > 0:
        raise ParameterDomainError(f"bprime must be positive, got {bprime!r}")
    if not bdprime >= 0:
        raise ParameterDomainError(f"bdprime must be non-negative, got {bdprime!r}")
    s = math.sqrt(bdprime)
    # grouped so that beta -> inf gives 0 rather than inf*0
    return (2.0 / bprime) * (1.0 / beta**2 + s / beta) * math.exp(-beta * s)


def direct_sum(
    model: SpectrumModel,
    mubar: float,
    shift: Shift | None = None,
    tail_tol: float = 1e-12,
    max_terms: int = MAX_TERMS,
) -> PartitionResult:
    """Sum the Boltzmann factors of ``model`` at reduced temperature ``mubar``.

    Terms n = 0..N are kept, with N the first index at which the integral bound
    on the remainder drops to ``tail_tol`` times the partial sum. The kept
    terms are added with :func:`math.fsum`, so the only error left is the
    certified tail.
    """
    report = validate_model(model)
    if not report:
        raise ParameterDomainError("; ".join(report.violations))
    mubar = _check_mubar(mubar)
    if not tail_tol > 0:
        raise ParameterDomainError(f"tail_tol must be positive, got {tail_tol!r}")
    shift = default_shift(model) if shift is None else Shift(shift)
    form = sqrt_form(model)
    if form is None:
        raise NonConvergentError(
            f"{model.kind}: levels are bounded above by the rest energy, "
            "so the Boltzmann sum diverges"
        )

    e0 = float(reduced_energies(model, np.zeros(1))[0])
    ref = e0 if shift is Shift.GROUND else 0.0
    beta = 1.0 / mubar
    log_prefactor = -(form.offset - ref) * beta

    chunks: list[np.ndarray] = []
    running = 0.0
    start = 0
    size = _FIRST_CHUNK
    while start < max_terms:
        stop = min(start + size, max_terms)
        n = np.arange(start, stop)
        terms = np.exp(-(reduced_energies(model, n) - ref) * beta)
        partial = running + np.cumsum(terms)
        # integral over [N, inf) dominates sum over n > N for a decreasing summand
        s = np.sqrt(form.slope * n + form.intercept)
        # log space: the offset factor alone can overflow at low temperature
        with np.errstate(divide="ignore"):
            log_bounds = (
                log_prefactor + np.log((2.0 / form.slope) * (beta**-2 + s / beta)) - beta * s
            )
        bounds = np.exp(log_bounds)
        done = np.nonzero(log_bounds <= np.log(tail_tol) + np.log(partial))[0]
        if done.size:
            cut = int(done[0])
            chunks.append(terms[: cut + 1])
            z = math.fsum(np.concatenate(chunks))
            nterms = start + cut + 1
            return PartitionResult(
                z=z,
                engine=EngineSpec(EngineKind.DIRECT, tail_tol=tail_tol),
                terms_summed=nterms,
                tail_bound=float(bounds[cut]),
                notes=f"direct sum, {shift.value} shift",
            )
        chunks.append(terms)
        running = float(partial[-1])
        start = stop
        size *= 2
    raise TruncationError(
        f"tail bound {float(bounds[-1]):.3e} still above tolerance after {max_terms} terms",
        achieved_bound=float(bounds[-1]),
        terms=max_terms,
    )


def euler_maclaurin_sum(f0: float, integral: float, odd_derivs) -> float:
    """Euler-MacLaurin estimate of sum_{m>=0} f(m).

    ``odd_derivs[i-1]`` is f^(2i-1)(0); the result is
    ``f0/2 + integral - sum_i B_2i/(2i)! * f^(2i-1)(0)``.
    """
    odd_derivs = list(odd_derivs)
    if not odd_derivs:
        raise ParameterDomainError("need at least one odd derivative")
    kmax = max(2 * len(odd_derivs), 12)
    corr = math.fsum(
        float(bernoulli(2 * i, kmax=kmax) / math.factorial(2 * i)) * d
        for i, d in enumerate(odd_derivs, start=1)
    )
    return 0.5 * f0 + integral - corr


@lru_cache(maxsize=None)
def kg_boundary_derivative(k: int) -> dict[int, Fraction]:
    """k-th derivative at x = 0 of exp(-s*(sqrt(2x+1) - 1)), as a polynomial in s.

    Returned as ``{power: coefficient}``. With u = sqrt(2x+1) we have
    d/dx = (1/u) d/du, and d/du(u^p e) = p u^(p-1) e - s u^p e.
    """
    terms: dict[tuple[int, int], Fraction] = {(0, 0): Fraction(1)}
    for _ in range(k):
        nxt: dict[tuple[int, int], Fraction] = {}
        for (p, q), c in terms.items():
            if p:
                key = (p - 2, q)
                nxt[key] = nxt.get(key, Fraction(0)) + p * c
            key = (p - 1, q + 1)
            nxt[key] = nxt.get(key, Fraction(0)) - c
        terms = {key: c for key, c in nxt.items() if c}
    poly: dict[int, Fraction] = {}
    for (_, q), c in terms.items():
        poly[q] = poly.get(q, Fraction(0)) + c
    return {q: c for q, c in sorted(poly.items()) if c}


def _eval_poly(poly: dict[int, Fraction], x: float) -> float:
    return math.fsum(float(c) * x**q for q, c in poly.items())


@lru_cache(maxsize=None)
def kg_rederived_laurent(order: int = 2) -> dict[int, Fraction]:
    """Euler-MacLaurin partition function of the KG(a=0, r=1) spectrum as a
    Laurent polynomial ``{power of mubar: coefficient}``."""
    if order < 1:
        raise ParameterDomainError(f"order must be >= 1, got {order!r}")
    coeffs: dict[int, Fraction] = {0: Fraction(1, 2), 1: Fraction(1), 2: Fraction(1)}
    for i in range(1, order + 1):
        w = bernoulli(2 * i, kmax=max(12, 2 * i)) / math.factorial(2 * i)
        for q, c in kg_boundary_derivative(2 * i - 1).items():
            coeffs[-q] = coeffs.get(-q, Fraction(0)) - w * c
    return {p: c for p, c in sorted(coeffs.items(), reverse=True) if c}


def kg_closed_partition(
    mubar: float, variant: Variant = Variant.REDERIVED, order: int = 2
) -> PartitionResult:
    """Closed-form Z for the ground-shifted KG spectrum with a = 0, r = 1.

    ``PUBLISHED``: 1/2 + mubar(mubar+1) + (19 mubar^2 - mubar - 1)/(240 mubar^3).
    ``REDERIVED``: the Euler-MacLaurin formula to ``order`` corrections with
    boundary derivatives computed exactly; at order 2 the constant in the last
    bracket comes out as 1/3 instead of 1.
    """
    mubar = _check_mubar(mubar)
    variant = Variant(variant)
    engine = EngineSpec(EngineKind.EULER_MACLAURIN, order=order, variant=variant)
    if variant is Variant.PUBLISHED:
        if order != 2:
            raise ParameterDomainError("the published closed form exists only at order 2")
        z = 0.5 + mubar * (mubar + 1.0) + (19.0 * mubar**2 - mubar - 1.0) / (240.0 * mubar**3)
        return PartitionResult(z, engine, notes="printed Euler-MacLaurin polynomial, c3 = 1")
    s = 1.0 / mubar
    derivs = [_eval_poly(kg_boundary_derivative(2 * i - 1), s) for i in range(1, order + 1)]
    z = euler_maclaurin_sum(1.0, mubar + mubar**2, derivs)
    return PartitionResult(z, engine, notes=f"re-derived Euler-MacLaurin, order {order}")


@dataclass(frozen=True)
class ResiduePole:
    """One pole of mubar^t (2a)^(-t/2) zeta(t/2) Gamma(t).

    Its contribution is ``coefficient * mubar^t * (2a)^(-t/2)``.
    """

    t: int
    coefficient: Fraction
    source: str


def mellin_poles(extended: bool = False) -> list[ResiduePole]:
    """Residue data for sum_{n>=1} exp(-sqrt(2 a n)/mubar).

    The zeta pole at t = 2 has residue 2 in t, times Gamma(2). Gamma has
    residue (-1)^k/k! at t = -k; at even t = -2j it multiplies zeta(-j).
    Odd Gamma poles t = -1, -3, ... need zeta at half-integers and are
    outside this engine.
    """
    poles = [
        ResiduePole(2, Fraction(2 * gamma_int(2)), "zeta pole"),
        ResiduePole(0, zeta_at(0), "Gamma pole"),
    ]
    if extended:
        for j in (1, 2):
            poles.append(
                ResiduePole(-2 * j, zeta_at(-j) / math.factorial(2 * j), "Gamma pole")
            )
    return poles


def mellin_residue_partition(
    a: float,
    mubar: float,
    variant: Variant = Variant.REDERIVED,
    extended_poles: bool = False,
) -> PartitionResult:
    """Z for the strong-field Dirac spectrum E_n = sqrt(2 a n), a = 1/A.

    ``PUBLISHED`` returns mubar^2/(2a) + 1/2. ``REDERIVED`` adds the n = 0
    term (exactly 1) to the residue sum over :func:`mellin_poles`, which gives
    mubar^2/a + 1/2 at leading order.
    """
    if not (math.isfinite(a) and a > 0):
        raise ParameterDomainError(f"inverse coupling a must be positive, got {a!r}")
    mubar = _check_mubar(mubar)
    variant = Variant(variant)
    engine = EngineSpec(EngineKind.MELLIN, variant=variant, extended_poles=extended_poles)
    if variant is Variant.PUBLISHED:
        return PartitionResult(
            mubar**2 / (2.0 * a) + 0.5, engine, notes="printed residue result"
        )
    parts = [1.0]
    for pole in mellin_poles(extended_poles):
        parts.append(float(pole.coefficient) * mubar**pole.t * (2.0 * a) ** (-pole.t / 2))
    poles = ",".join(str(p.t) for p in mellin_poles(extended_poles))
    return PartitionResult(
        math.fsum(parts), engine, notes=f"re-derived residues at t={poles} plus n=0 term"
    )


def partition_function(
    model: SpectrumModel,
    mubar: float,
    engine: EngineSpec = EngineSpec(),
    shift: Shift | None = None,
) -> PartitionResult:
    """Evaluate Z with the requested engine.

    The closed-form engines are tied to one spectrum each. The KG closed form
    is written for a = 0, r = 1 and ground shift; other (a, r) follow from
    the exact rescaling mubar -> mubar/sqrt((1-a^2) r), and the absolute
    shift multiplies by exp(-E_0/mubar).
    """
    report = validate_model(model)
    if not report:
        raise ParameterDomainError("; ".join(report.violations))
    mubar = _check_mubar(mubar)
    shift = default_shift(model) if shift is None else Shift(shift)

    if engine.kind is EngineKind.DIRECT:
        return direct_sum(model, mubar, shift, engine.tail_tol)

    if engine.kind is EngineKind.EULER_MACLAURIN:
        if not isinstance(model, KgLinear):
            raise ParameterDomainError("the Euler-MacLaurin engine needs the kg-linear spectrum")
        scale = math.sqrt((1.0 - model.a**2) * model.r)
        res = kg_closed_partition(mubar / scale, engine.variant, engine.order)
        z = res.z
        if shift is Shift.ABSOLUTE:
            z *= math.exp(-(model.a + scale) / mubar)
        return replace(res, z=z, engine=engine)

    if not isinstance(model, DiracStrongField):
        raise ParameterDomainError("the Mellin residue engine needs the dirac-strong spectrum")
    # E_0 = 0, so both shifts coincide
    res = mellin_residue_partition(model.a, mubar, engine.variant, engine.extended_poles)
    return replace(res, engine=engine)
