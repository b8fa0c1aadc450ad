"""``thermo`` command: parameter sweeps, CSV/plot data, discrepancy report.

Exit codes: 0 success, 2 usage error, 3 I/O error, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NumericalFailure, ParameterDomainError
from .partition import (
    EngineKind,
    EngineSpec,
    Shift,
    Variant,
    default_shift,
    direct_sum,
    kg_closed_partition,
    kg_rederived_laurent,
    mellin_residue_partition,
)
from .spectra import DiracInverseLinear, DiracStrongField, KgLinear, validate_model
from .thermo import (
    ThermoPoint,
    dirac_closed_thermo,
    engine_thermo,
    entropy_inflection,
    high_temperature_limits,
)

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4
CSV_HEADER = ["coupling", "mubar", "lnZ", "Fbar", "Ubar", "Sbar", "Cbar", "engine", "variant"]
QUANTITIES = {"lnZ": "lnZ", "F": "fbar", "U": "ubar", "S": "sbar", "C": "cbar"}
MODELS = ("kg-linear", "dirac-exact", "dirac-strong")
FIGURE_COUPLINGS = (1.0, 0.5, 0.1)
MAX_GRID = 1_000_000


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class MubarGrid:
    start: float
    stop: float
    count: int
    spacing: str = "linear"

    def __post_init__(self):
        if not (math.isfinite(self.start) and self.start > 0):
            raise UsageError(f"mubar: start must be positive, got {self.start!r}")
        if not 1 <= self.count <= MAX_GRID:
            raise UsageError(f"mubar: count must be in [1, {MAX_GRID}], got {self.count}")
        if self.count == 1:
            if self.stop != self.start:
                raise UsageError("mubar: a single-point grid needs start == stop")
            return
        if not (math.isfinite(self.stop) and self.stop > self.start):
            raise UsageError(f"mubar: stop ({self.stop!r}) must exceed start ({self.start!r})")
        if self.spacing not in ("linear", "log"):
            raise UsageError(f"mubar: unknown spacing {self.spacing!r}")
        pts = self.points()
        if np.any(np.diff(pts) <= 0):
            raise UsageError("mubar: grid points collapse in floating point")

    def points(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.start])
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class SweepConfig:
    model: str
    grid: MubarGrid | None
    engine: EngineSpec
    shift: Shift
    couplings: tuple[float, ...] = FIGURE_COUPLINGS
    r: float = 1.0
    out: str | None = None
    fmt: str = "csv"
    quantity: str = "lnZ"
    precision: int = 12
    workers: int = 1
    report: bool = False

    def models(self):
        """(coupling, spectrum) pairs in output order."""
        out = []
        for c in sorted(set(self.couplings)):
            if self.model == "kg-linear":
                out.append((c, KgLinear(a=c, r=self.r)))
            elif self.model == "dirac-strong":
                out.append((c, DiracStrongField(A=1.0 / c)))
            else:
                out.append((c, DiracInverseLinear(A=1.0 / c)))
        return out


@dataclass(frozen=True)
class SweepRow:
    coupling: float
    point: ThermoPoint
    engine: str
    variant: str


@dataclass
class SweepResult:
    rows: list[SweepRow] = field(default_factory=list)
    failures: list[tuple[float, float, str]] = field(default_factory=list)


# ---------------------------------------------------------------- parsing

def _float_list(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _grid_spec(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    try:
        if len(parts) == 1:
            v = float(parts[0])
            return v, v, 1
        if len(parts) == 3:
            return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected START:STOP:COUNT or a single value, got {text!r}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="thermo", description="Thermal functions of relativistic spectra.")
    p.add_argument("--config", help="key=value file; command-line flags override it")
    p.add_argument("--model", choices=MODELS)
    p.add_argument("--a", type=_float_list, help="Dirac inverse couplings a = 1/A")
    p.add_argument("--kg-a", type=float, help="KG vector/scalar coupling ratio")
    p.add_argument("--r", type=float, help="KG frequency ratio hbar*omega/mc^2")
    p.add_argument("--mubar", type=_grid_spec, help="START:STOP:COUNT")
    p.add_argument("--log", action="store_true", default=None, help="log-spaced grid")
    p.add_argument("--engine", choices=[k.value for k in EngineKind])
    p.add_argument("--variant", choices=[v.value for v in Variant])
    p.add_argument("--shift", choices=[s.value for s in Shift])
    p.add_argument("--order", type=int, help="Euler-MacLaurin correction order")
    p.add_argument("--tail-tol", type=float, help="direct-sum relative tail tolerance")
    p.add_argument("--extended-poles", action="store_true", default=None)
    p.add_argument("--quantity", choices=list(QUANTITIES))
    p.add_argument("--format", dest="fmt", choices=["csv", "plotdat"])
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--precision", type=int, help="significant digits")
    p.add_argument("--workers", type=int, help="parallel grid evaluation")
    p.add_argument("--report", action="store_true", default=None)
    return p


_FLAGS = {
    "model", "a", "kg-a", "r", "mubar", "log", "engine", "variant", "shift", "order",
    "tail-tol", "extended-poles", "quantity", "format", "out", "precision", "workers", "report",
}
_SWITCHES = {"log", "extended-poles", "report"}


def config_file_tokens(text: str) -> list[str]:
    """Translate key=value lines into the equivalent flag tokens."""
    tokens: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("_", "-")
        if key not in _FLAGS:
            raise UsageError(f"config line {lineno}: unknown key {key!r}")
        if key in _SWITCHES:
            if value.lower() in ("1", "true", "yes", "on"):
                tokens.append(f"--{key}")
            elif value.lower() not in ("0", "false", "no", "off"):
                raise UsageError(f"config key {key!r}: expected a boolean, got {value!r}")
        else:
            tokens.extend([f"--{key}", value])
    return tokens


def parse_config(argv: Sequence[str], config_text: str | None = None) -> SweepConfig:
    """Build a validated SweepConfig from CLI tokens and optional config-file text."""
    parser = build_parser()
    first = parser.parse_args(list(argv))
    if config_text is None and first.config:
        try:
            with open(first.config, encoding="utf-8") as fh:
                config_text = fh.read()
        except OSError as exc:
            raise UsageError(f"config: cannot read {first.config!r}: {exc}")
    tokens = (config_file_tokens(config_text) if config_text else []) + list(argv)
    ns = parser.parse_args(tokens)

    if ns.model is None:
        raise UsageError("model: --model is required")
    report = bool(ns.report)
    if ns.mubar is None:
        if not report:
            raise UsageError("mubar: --mubar START:STOP:COUNT is required")
        grid = None
    else:
        start, stop, count = ns.mubar
        grid = MubarGrid(start, stop, count, "log" if ns.log else "linear")

    if ns.model == "kg-linear":
        if ns.a is not None:
            raise UsageError("a: --a applies to Dirac models; use --kg-a for kg-linear")
        couplings = (0.0 if ns.kg_a is None else ns.kg_a,)
        default_engine = EngineKind.EULER_MACLAURIN
    else:
        if ns.kg_a is not None or ns.r is not None:
            raise UsageError("kg-a: --kg-a/--r apply only to kg-linear")
        couplings = tuple(FIGURE_COUPLINGS if ns.a is None else ns.a)
        if any(not (math.isfinite(c) and c > 0) for c in couplings):
            raise UsageError(f"a: couplings must be positive, got {list(couplings)}")
        default_engine = (
            EngineKind.MELLIN if ns.model == "dirac-strong" else EngineKind.DIRECT
        )

    kind = EngineKind(ns.engine) if ns.engine else default_engine
    if kind is EngineKind.EULER_MACLAURIN and ns.model != "kg-linear":
        raise UsageError("engine: em requires --model kg-linear")
    if kind is EngineKind.MELLIN and ns.model != "dirac-strong":
        raise UsageError("engine: mellin requires --model dirac-strong")
    variant = Variant(ns.variant) if ns.variant else Variant.REDERIVED
    order = 2 if ns.order is None else ns.order
    if variant is Variant.PUBLISHED and kind is EngineKind.EULER_MACLAURIN and order != 2:
        raise UsageError("order: the published Euler-MacLaurin form exists only at order 2")
    try:
        engine = EngineSpec(
            kind,
            tail_tol=1e-12 if ns.tail_tol is None else ns.tail_tol,
            order=order,
            variant=variant,
            extended_poles=bool(ns.extended_poles),
        )
    except ParameterDomainError as exc:
        raise UsageError(f"engine: {exc}")

    cfg = SweepConfig(
        model=ns.model,
        grid=grid,
        engine=engine,
        shift=Shift(ns.shift) if ns.shift else Shift.ABSOLUTE,
        couplings=couplings,
        r=1.0 if ns.r is None else ns.r,
        out=ns.out,
        fmt=ns.fmt or "csv",
        quantity=ns.quantity or "lnZ",
        precision=12 if ns.precision is None else ns.precision,
        workers=1 if ns.workers is None else ns.workers,
        report=report,
    )
    if ns.shift is None:
        cfg = SweepConfig(**{**cfg.__dict__, "shift": default_shift(cfg.models()[0][1])})
    for c, model in cfg.models():
        rep = validate_model(model)
        if not rep:
            key = "kg-a" if cfg.model == "kg-linear" else "a"
            raise UsageError(f"{key}: " + "; ".join(rep.violations))
    if not 1 <= cfg.precision <= 17:
        raise UsageError(f"precision: must be in [1, 17], got {cfg.precision}")
    if cfg.workers < 1:
        raise UsageError(f"workers: must be >= 1, got {cfg.workers}")
    return cfg


# ---------------------------------------------------------------- sweeping

def _evaluate(task):
    coupling, model, mubar, engine, shift = task
    try:
        return coupling, engine_thermo(model, float(mubar), engine, shift), None
    except (NumericalFailure, ParameterDomainError) as exc:
        return coupling, float(mubar), str(exc)


def run_sweep(config: SweepConfig) -> SweepResult:
    """Evaluate every (coupling, mubar) point; output order never depends on workers."""
    if config.grid is None:
        raise UsageError("mubar: sweep needs a grid")
    tasks = [
        (c, model, m, config.engine, config.shift)
        for c, model in config.models()
        for m in config.grid.points()
    ]
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(_evaluate, tasks))
    else:
        outcomes = [_evaluate(t) for t in tasks]
    result = SweepResult()
    for coupling, value, err in outcomes:
        if err is None:
            result.rows.append(
                SweepRow(coupling, value, config.engine.label, config.engine.variant_label)
            )
        else:
            result.failures.append((coupling, value, err))
    return result


def _sci(x: float, precision: int) -> str:
    return f"{x + 0.0:.{precision - 1}e}"


def format_csv(rows: Sequence[SweepRow], precision: int = 12) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        p = row.point
        writer.writerow(
            [_sci(v, precision) for v in (row.coupling, p.mubar, p.lnZ, p.fbar, p.ubar, p.sbar, p.cbar)]
            + [row.engine, row.variant]
        )
    return buf.getvalue()


def format_plotdat(rows: Sequence[SweepRow], quantity: str = "lnZ", precision: int = 12) -> str:
    attr = QUANTITIES[quantity]
    blocks: list[str] = []
    for coupling in sorted({r.coupling for r in rows}):
        lines = [f"# coupling={_sci(coupling, precision)} quantity={quantity}"]
        lines += [
            f"{_sci(r.point.mubar, precision)} {_sci(getattr(r.point, attr), precision)}"
            for r in rows
            if r.coupling == coupling
        ]
        blocks.append("\n".join(lines) + "\n")
    return "\n".join(blocks)


def emit_csv(rows: Sequence[SweepRow], destination=None, precision: int = 12) -> bytes:
    """Write the CSV table to a path or binary/text stream and return its bytes."""
    if not rows:
        raise ValueError("no rows to emit")
    data = format_csv(rows, precision).encode("utf-8")
    _write(data, destination)
    return data


def _write(data: bytes, destination) -> None:
    if destination is None:
        return
    if isinstance(destination, str):
        with open(destination, "wb") as fh:
            fh.write(data)
    elif hasattr(destination, "buffer"):
        destination.buffer.write(data)
        destination.flush()
    else:
        try:
            destination.write(data)
        except TypeError:
            destination.write(data.decode("utf-8"))


# ---------------------------------------------------------------- report

@dataclass
class Discrepancy:
    kg_probe: list[float]
    kg_max_err: dict[str, float]
    kg_winner: str
    kg_constant: float
    dirac_probe: list[float]
    dirac_fit: dict[float, float]
    dirac_max_err: dict[float, dict[str, float]]
    dirac_winner: dict[float, str]
    dirac_u_ratio: dict[float, float]
    dirac_u_ratio_direct: dict[float, float]
    entropy_inflection: list[float]


def fit_leading_coefficient(mubars: Sequence[float], z: Sequence[float], a: float) -> float:
    """Leading coefficient c in Z - 1/2 ~ c mubar^2 / a.

    With two or more temperatures (Z - 1/2) a/mubar^2 is fitted as c + d/mubar
    by least squares, which absorbs the first subleading pole; a single probe
    falls back to the pointwise ratio.
    """
    m = np.asarray(mubars, dtype=float)
    y = (np.asarray(z, dtype=float) - 0.5) * a / m**2
    if len(np.unique(m)) < 2:
        return float(y[0])
    design = np.column_stack([np.ones_like(m), 1.0 / m])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(coef[0])


def discrepancy(
    kg_probe: Sequence[float] = (1.0, 2.0, 5.0, 10.0),
    dirac_probe: Sequence[float] = (5.0, 10.0, 20.0),
    couplings: Sequence[float] = FIGURE_COUPLINGS,
) -> Discrepancy:
    kg = KgLinear()
    errs = {v.value: 0.0 for v in Variant}
    for m in kg_probe:
        ref = direct_sum(kg, m).z
        for v in Variant:
            errs[v.value] = max(errs[v.value], abs(kg_closed_partition(m, v).z - ref) / ref)
    kg_winner = min(errs, key=errs.get)
    # Laurent coefficient of mubar^-3 is -c3/240
    c3 = float(-240 * kg_rederived_laurent(2)[-3])

    fits, dmax, dwin, uratio, uratio_direct = {}, {}, {}, {}, {}
    for a in couplings:
        model = DiracStrongField(A=1.0 / a)
        refs = [direct_sum(model, m).z for m in dirac_probe]
        fits[a] = fit_leading_coefficient(dirac_probe, refs, a)
        dmax[a] = {
            v.value: max(
                abs(mellin_residue_partition(a, m, v).z - r) / r for m, r in zip(dirac_probe, refs)
            )
            for v in Variant
        }
        dwin[a] = min(dmax[a], key=dmax[a].get)
        uratio[a] = dirac_closed_thermo(100.0, a).ubar / 100.0
        # mubar=100 would need ~1e8 terms at a=0.1; the oracle is probed at 20
        uratio_direct[a] = engine_thermo(model, 20.0, EngineSpec(EngineKind.DIRECT)).ubar / 20.0

    grid = np.linspace(0.1, 2.0, 191)
    sbar = [engine_thermo(kg, m, EngineSpec(EngineKind.DIRECT)).sbar for m in grid]
    return Discrepancy(
        list(kg_probe), errs, kg_winner, c3, list(dirac_probe), fits, dmax, dwin,
        uratio, uratio_direct, entropy_inflection(grid, sbar),
    )


def discrepancy_report(
    kg_probe: Sequence[float] = (1.0, 2.0, 5.0, 10.0),
    dirac_probe: Sequence[float] = (5.0, 10.0, 20.0),
    couplings: Sequence[float] = FIGURE_COUPLINGS,
) -> str:
    d = discrepancy(kg_probe, dirac_probe, couplings)
    out = io.StringIO()
    w = out.write
    w("== KG linear (a=0, r=1): Euler-MacLaurin closed form vs direct sum ==\n")
    w(f"probe mubar: {', '.join(f'{m:g}' for m in d.kg_probe)}\n")
    w(f"re-derived constant term c3 = {d.kg_constant:.12g} (printed: 1)\n")
    for v, e in d.kg_max_err.items():
        w(f"  {v:<10} max relative error {e:.6e}\n")
    w(f"  winner: {d.kg_winner}\n")
    w("== Dirac strong field: leading coefficient of (Z_direct - 1/2) a / mubar^2 ==\n")
    w(f"probe mubar: {', '.join(f'{m:g}' for m in d.dirac_probe)}\n")
    for a in d.dirac_fit:
        w(
            f"  a={a:g}: fitted {d.dirac_fit[a]:.6f}  printed 0.5  residue 1.0  "
            f"| max rel err published {d.dirac_max_err[a]['published']:.3e}, "
            f"rederived {d.dirac_max_err[a]['rederived']:.3e}  winner: {d.dirac_winner[a]}\n"
        )
    w("== Dirac high-temperature mean energy Ubar/mubar (closed form at mubar=100) ==\n")
    for a in d.dirac_u_ratio:
        law = high_temperature_limits("dirac-strong", a)
        w(
            f"  a={a:g}: closed form {d.dirac_u_ratio[a]:.6f}, direct sum at mubar=20 "
            f"{d.dirac_u_ratio_direct[a]:.6f}  (printed {law['printed'].u_coeff:g}, "
            f"derived {law['derived'].u_coeff:g})\n"
        )
    infl = ", ".join(f"{x:.4f}" for x in d.entropy_inflection) or "none"
    w(f"== KG entropy curvature sign change on [0.1, 2] (direct sum): {infl} ==\n")
    return out.getvalue()


# ---------------------------------------------------------------- entry point

def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"thermo: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    status = EXIT_OK
    if cfg.report:
        try:
            couplings = cfg.couplings if cfg.model != "kg-linear" else FIGURE_COUPLINGS
            sys.stdout.write(discrepancy_report(couplings=couplings))
        except NumericalFailure as exc:
            print(f"thermo: numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        if cfg.grid is None:
            return status

    result = run_sweep(cfg)
    for coupling, mubar, err in result.failures:
        print(f"thermo: coupling={coupling:g} mubar={mubar:g} skipped: {err}", file=sys.stderr)
    if result.failures:
        print(f"thermo: {len(result.failures)} grid point(s) failed", file=sys.stderr)
        status = EXIT_NUMERIC
    if not result.rows:
        return EXIT_NUMERIC
    if cfg.fmt == "csv":
        data = format_csv(result.rows, cfg.precision).encode("utf-8")
    else:
        data = format_plotdat(result.rows, cfg.quantity, cfg.precision).encode("utf-8")
    try:
        _write(data, cfg.out if cfg.out else sys.stdout)
    except OSError as exc:
        print(f"thermo: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return status


if __name__ == "__main__":
    sys.exit(main())
