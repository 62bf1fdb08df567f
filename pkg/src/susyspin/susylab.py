"""SUSY diagnostics: phase classification, partner pairing, zero-mode census."""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .analytic import (
    SusyPhase, breaking_threshold, decay_rate, dispersion, lower_band_minimum,
    normalizable_branches, susy_phase_asymptotic, susy_phase_free, zero_mode_wavevector,
)
from .qmcore import FieldConfig, Grid, ModelSpec, Sector, TanhW, ZeroW, validate_model
from .solver import (
    BoxEdgeWarning, SpectrumResult, bound_spectrum, factorized_spectra, zero_mode_threshold,
)


class Method(enum.Enum):
    ANALYTIC = "Analytic"
    NUMERIC = "Numeric"
    BOTH = "Both"


@dataclass(frozen=True)
class NumericSettings:
    """Grid for the numeric cross-check.

    W = 0 runs on a ring of ``periods`` gauge periods; any other W runs in a
    Dirichlet box of length ``length``.
    """

    n: int = 2048
    periods: int = 2
    length: float = 40.0
    levels: int = 20


@dataclass(frozen=True)
class SusyReport:
    phase: SusyPhase
    method: Method
    ground_energy_minus: Optional[float]
    ground_energy_plus: Optional[float]
    zero_modes_minus: int
    zero_modes_plus: int
    pairing_max_gap: float = 0.0
    details: tuple = field(default=())


@dataclass(frozen=True)
class PairingReport:
    max_gap: float
    unpaired_minus: int
    unpaired_plus: int

    def __iter__(self):
        return iter((self.max_gap, self.unpaired_minus, self.unpaired_plus))


def pairing_report(spec_minus: SpectrumResult, spec_plus: SpectrumResult,
                   zero_threshold: float) -> PairingReport:
    """Match the non-zero levels of two partner spectra in sorted order."""
    _same_grid(spec_minus, spec_plus)
    em = np.sort(spec_minus.eigenvalues)
    ep = np.sort(spec_plus.eigenvalues)
    em = em[em >= zero_threshold]
    ep = ep[ep >= zero_threshold]
    m = min(len(em), len(ep))
    gap = float(np.max(np.abs(em[:m] - ep[:m]))) if m else 0.0
    return PairingReport(gap, len(em) - m, len(ep) - m)


def witten_index_estimate(spec_minus: SpectrumResult, spec_plus: SpectrumResult,
                          zero_threshold: float) -> int:
    """Zero-mode count of H- minus that of H+."""
    _same_grid(spec_minus, spec_plus)
    return (int(np.sum(spec_minus.eigenvalues < zero_threshold))
            - int(np.sum(spec_plus.eigenvalues < zero_threshold)))


def _same_grid(a: SpectrumResult, b: SpectrumResult):
    if a.grid is not None and b.grid is not None and a.grid.n != b.grid.n:
        raise ValueError(f"spectra come from grids of different size ({a.grid.n} vs {b.grid.n})")


def analytic_phase(spec: ModelSpec) -> SusyPhase:
    if isinstance(spec.w, ZeroW):
        return susy_phase_free(spec.field)
    if isinstance(spec.w, TanhW):
        return susy_phase_asymptotic(spec.field, spec.w.alpha)
    asym = spec.w.asymptotes
    has = any(normalizable_branches(spec.field, asym, s) for s in Sector)
    return SusyPhase.UNBROKEN if has else SusyPhase.BROKEN


def classify(spec: ModelSpec, numeric: Optional[NumericSettings] = None) -> SusyReport:
    """Phase of ``spec`` from the closed-form rule, optionally checked numerically.

    Without ``numeric`` the zero-mode counts are analytic and count each
    +/- family (+/-q0 or +/-lambda) once per sector. With ``numeric`` they are
    the number of computed levels below the zero-mode threshold, and the
    phase still comes from the analytic rule; disagreements go to ``details``.
    """
    validate_model(spec).raise_if_invalid()
    f = spec.field
    phase = analytic_phase(spec)
    details = []
    if isinstance(spec.w, ZeroW):
        q0 = zero_mode_wavevector(f)
        e_min = lower_band_minimum(f)
        ground = {Sector.MINUS: e_min, Sector.PLUS: e_min}
        modes = {s: int(q0 is not None) for s in Sector}
        if q0 is None:
            details.append(f"no real zero-mode wavevector; E1(0) = {e_min:.12g}")
        else:
            details.append(f"zero modes at q0 = +/-{q0:.12g} in both sectors")
    else:
        asym = spec.w.asymptotes
        ground, modes = {}, {}
        for s in Sector:
            branches = normalizable_branches(f, asym, s)
            modes[s] = int(bool(branches))
            ground[s] = 0.0 if branches else None
            details.append(f"{s.value}: {len(branches)} normalizable spin branch(es)")
        details.append(f"lambda = {decay_rate(f)}")
    report = dict(phase=phase, method=Method.ANALYTIC,
                  ground_energy_minus=ground[Sector.MINUS],
                  ground_energy_plus=ground[Sector.PLUS],
                  zero_modes_minus=modes[Sector.MINUS], zero_modes_plus=modes[Sector.PLUS],
                  pairing_max_gap=0.0)
    if numeric is not None:
        report.update(_numeric_evidence(spec, numeric, phase, details))
        report["method"] = Method.BOTH
    return SusyReport(details=tuple(details), **report)


def _numeric_evidence(spec: ModelSpec, settings: NumericSettings, phase, details):
    f = spec.field
    if isinstance(spec.w, ZeroW):
        grid = Grid.ring(f, settings.periods, settings.n)
        minus, plus = factorized_spectra(spec, grid, settings.levels)
        gap = pairing_report(minus, plus, zero_mode_threshold(grid, f.k)).max_gap
        q0 = zero_mode_wavevector(f)
        if q0 is not None:
            lattice = 2 * math.pi / grid.length
            nearest = round(q0 / lattice) * lattice
            commensurate = abs(nearest - q0) <= 1e-9 * max(1.0, q0)
            e_lattice = float(dispersion(nearest, f)[0])
            details.append(
                f"ring q-lattice spacing {lattice:.12g}; q0 "
                + ("lies on the lattice" if commensurate else
                   f"is incommensurate, nearest lattice level E1({nearest:.12g}) = {e_lattice:.12g}"))
    else:
        grid = Grid.box(settings.length, settings.n)
        minus, plus = (_quiet_bound(spec.with_sector(s), settings, details)
                       for s in (Sector.MINUS, Sector.PLUS))
        # sector-wise Dirichlet spectra decide the zero modes; the pairing
        # diagnostic comes from the factorized pair on the same grid
        fm, fp = factorized_spectra(spec, grid, settings.levels)
        gap = pairing_report(fm, fp, zero_mode_threshold(grid, f.k)).max_gap
    thr = zero_mode_threshold(grid, f.k)
    e_minus, e_plus = float(minus.eigenvalues[0]), float(plus.eigenvalues[0])
    numeric_phase = SusyPhase.UNBROKEN if min(e_minus, e_plus) < thr else SusyPhase.BROKEN
    if numeric_phase is not phase:
        details.append(f"numeric phase {numeric_phase.value} disagrees with analytic "
                       f"{phase.value} (zero-mode threshold {thr:.3g})")
    return dict(ground_energy_minus=e_minus, ground_energy_plus=e_plus,
                zero_modes_minus=int(np.sum(minus.eigenvalues < thr)),
                zero_modes_plus=int(np.sum(plus.eigenvalues < thr)),
                pairing_max_gap=gap)


def _quiet_bound(spec: ModelSpec, settings: NumericSettings, details) -> SpectrumResult:
    # box-edge warnings become report notes
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", BoxEdgeWarning)
        res = bound_spectrum(spec, settings.length, settings.n, settings.levels)
    details.extend(f"{spec.sector.value} box edge: {w.message}" for w in caught
                   if issubclass(w.category, BoxEdgeWarning))
    return res


@dataclass(frozen=True)
class ThresholdScan:
    threshold: float
    bisected: Optional[float]
    rows: tuple


def _phase_at(k, b0, w) -> SusyPhase:
    return analytic_phase(ModelSpec(FieldConfig(b0, k), w))


def _asymptotic_energy(k, b0, w) -> Optional[float]:
    if isinstance(w, ZeroW):
        return lower_band_minimum(FieldConfig(b0, k))
    return 0.0 if _phase_at(k, b0, w) is SusyPhase.UNBROKEN else None


def breaking_threshold_scan(k: float, b0_range, w=ZeroW(), tol: float = 1e-12) -> ThresholdScan:
    """Sample the analytic phase over ``b0_range = (lo, hi, steps)``.

    ``threshold`` is the closed form sqrt(k^4 + 4 k^2 W0^2);
    ``bisected`` is the phase boundary found by bisecting the analytic
    condition when the range brackets it, else None.
    """
    lo, hi, steps = b0_range
    if not lo < hi or int(steps) < 3:
        raise ValueError("need lo < hi and at least 3 steps")
    # H- keeps a zero mode while Re lambda <= min(W(+inf), -W(-inf))
    w0 = max(0.0, min(w.asymptotes[1], -w.asymptotes[0]))
    closed = breaking_threshold(k, w0)
    rows = tuple((float(b0), _phase_at(k, b0, w), _asymptotic_energy(k, b0, w))
                 for b0 in np.linspace(lo, hi, int(steps)))
    bisected = None
    a, b = float(lo), float(hi)
    if _phase_at(k, a, w) is SusyPhase.UNBROKEN and _phase_at(k, b, w) is SusyPhase.BROKEN:
        while b - a > tol * max(1.0, abs(b)):
            mid = 0.5 * (a + b)
            if _phase_at(k, mid, w) is SusyPhase.UNBROKEN:
                a = mid
            else:
                b = mid
        bisected = 0.5 * (a + b)
    return ThresholdScan(closed, bisected, rows)


__all__ = [
    "Method", "NumericSettings", "PairingReport", "SusyReport", "ThresholdScan",
    "analytic_phase", "breaking_threshold_scan", "classify", "pairing_report",
    "witten_index_estimate",
]
