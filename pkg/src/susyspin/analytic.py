"""Closed-form results for the rotating-field problem.

All formulas are even in the pitch ``k``; negative ``k`` is treated like
``|k|``. The field strength enters only through ``b0**2`` or ``|b0|``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .operators import (
    Direction, gauge_transform, lambda_operator, transformed_hamiltonian, zero_mode_matrix,
)
from .qmcore import (
    Boundary, DecayRate, FieldConfig, Grid, ModelError, Sector, SpinorField,
)

NULL_TOL = 1e-8


class SusyPhase(enum.Enum):
    UNBROKEN = "Unbroken"
    BROKEN = "Broken"


@dataclass(frozen=True)
class BandSpectrum:
    q_values: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    field: FieldConfig


def _field_ratio(field: FieldConfig) -> float:
    """b0^2 / k^4, the only combination that decides the free phase."""
    field.require_pitch()
    return field.b0 ** 2 / field.k ** 4


def dispersion(q, field: FieldConfig):
    """Lower and upper band energies E1 <= E2 at wavevector(s) ``q``."""
    field.require_pitch()
    q = np.asarray(q, dtype=float)
    k, b0 = field.k, field.b0
    centre = q ** 2 + k ** 2 / 4 + b0 ** 2 / (4 * k ** 2)
    split = np.sqrt(q ** 2 * k ** 2 + b0 ** 2 / 4)
    return centre - split, centre + split


def band_spectrum(field: FieldConfig, q_values) -> BandSpectrum:
    q = np.asarray(q_values, dtype=float)
    e1, e2 = dispersion(q, field)
    return BandSpectrum(q, e1, e2, field)


def lower_band_minimum(field: FieldConfig) -> float:
    """min_q E1(q): zero in the unbroken phase, (k/2 - |b0|/(2k))^2 otherwise."""
    if _field_ratio(field) <= 1:
        return 0.0
    k = abs(field.k)
    return (k / 2 - abs(field.b0) / (2 * k)) ** 2


def zero_mode_wavevector(field: FieldConfig) -> Optional[float]:
    """Non-negative q0 with E1(+/-q0) = 0, or None when q0 would be complex."""
    radicand = 1 - _field_ratio(field)
    if radicand < 0:
        return None
    return abs(field.k) / 2 * math.sqrt(radicand)


def susy_phase_free(field: FieldConfig) -> SusyPhase:
    # b0^2 = k^4 counts as unbroken: E1 still touches zero at q = 0
    return SusyPhase.UNBROKEN if _field_ratio(field) <= 1 else SusyPhase.BROKEN


def zero_mode_spinor(q: float, field: FieldConfig, sector: Sector):
    """Unit spinor chi solving the zero-mode equation at wavevector ``q``.

    Raises ``ModelError`` when ``q`` is not a zero-mode wavevector (the 2x2
    matrix has no null space).
    """
    mat = zero_mode_matrix(q, field, sector)
    _, svals, vh = np.linalg.svd(mat)
    if svals[-1] > NULL_TOL * max(1.0, svals[0]):
        raise ModelError(
            f"q={q!r} is not a zero-mode wavevector: matrix is nonsingular "
            f"(smallest singular value {svals[-1]:.3g})")
    chi = vh[-1].conj()
    # fix the global phase: first nonzero component real and positive
    lead = chi[0] if abs(chi[0]) > 1e-14 else chi[1]
    return chi * (abs(lead) / lead)


def zero_mode_residual(chi, q: float, field: FieldConfig, sector: Sector) -> float:
    return float(np.linalg.norm(zero_mode_matrix(q, field, sector) @ chi))


def decay_rate(field: FieldConfig) -> DecayRate:
    """lambda = (|k|/2) sqrt(b0^2/k^4 - 1); positive real or positive imaginary."""
    radicand = _field_ratio(field) - 1
    scale = abs(field.k) / 2
    if radicand >= 0:
        return DecayRate(complex(scale * math.sqrt(radicand), 0.0))
    return DecayRate(complex(0.0, scale * math.sqrt(-radicand)))


def susy_phase_asymptotic(field: FieldConfig, w0: float) -> SusyPhase:
    """Phase when W(z) -> +/- w0 at z -> +/- infinity."""
    if w0 < 0:
        raise ModelError("w0 must be non-negative (W(+inf) = +w0, W(-inf) = -w0)")
    return SusyPhase.BROKEN if decay_rate(field).real > w0 else SusyPhase.UNBROKEN


def spin_lambda_eigenpairs(field: FieldConfig):
    """Both ``(lambda, chi)`` pairs of -i k S_z + (b0/k) S_y, ordered +lambda first.

    At threshold the operator is a Jordan block and both pairs coincide.
    """
    lam = decay_rate(field).value
    op = lambda_operator(field)
    vals, vecs = np.linalg.eig(op)
    order = [int(np.argmin(np.abs(vals - lam))), int(np.argmin(np.abs(vals + lam)))]
    if order[0] == order[1]:
        order[1] = 1 - order[0]
    pairs = []
    for idx, target in zip(order, (lam, -lam)):
        chi = vecs[:, idx] / np.linalg.norm(vecs[:, idx])
        pairs.append((complex(target), chi))
    return pairs


def normalizable_branches(field: FieldConfig, asymptotes, sector: Sector):
    """Spin branches whose zero-energy solution is square integrable.

    For H- the solution ~ chi exp(-int W - mu z) and for H+ it is
    ~ chi exp(+int W + mu z), with mu = +/- lambda. Decay at both ends needs
    ``-W(+inf) <= Re mu <= -W(-inf)`` for H- and the mirrored interval for H+.
    With W -> +/- w0 this reduces to ``Re lambda <= w0`` for H- and to no
    solution at all for H+ (w0 > 0); with W = 0 it reduces to lambda imaginary.
    """
    w_lo, w_hi = asymptotes
    lam = decay_rate(field).value
    branches = []
    for mu in (lam, -lam):
        re = mu.real
        if sector is Sector.MINUS:
            ok = -w_hi <= re <= -w_lo
        else:
            ok = -w_lo <= re <= -w_hi
        if ok:
            branches.append(complex(mu))
    return branches


def tanh_ground_state(alpha: float, field: FieldConfig, sector: Sector, grid: Grid,
                      frame: str = "rotating") -> Optional[SpinorField]:
    """Zero-energy state of W = alpha tanh z, sampled on a box and L2-normalized.

    H- gives chi (cosh z)^(-alpha) exp(-lambda z) with the +Re lambda branch,
    present only while alpha > Re lambda; H+ has no normalizable zero mode.
    ``frame="rotating"`` returns the gauge-transformed state; ``"lab"``
    undoes the spin rotation.
    """
    if not alpha > 0:
        raise ModelError("alpha must be positive")
    if grid.boundary is not Boundary.BOX:
        raise ModelError("tanh ground state is sampled on a box grid")
    if frame not in ("rotating", "lab"):
        raise ModelError(f"frame must be 'rotating' or 'lab', got {frame!r}")
    if sector is Sector.PLUS:
        return None
    lam, chi = spin_lambda_eigenpairs(field)[0]
    if alpha <= lam.real:
        return None
    z = grid.points
    # log|cosh z| without overflow for |z| >> 1
    log_cosh = np.abs(z) + np.log1p(np.exp(-2 * np.abs(z))) - math.log(2)
    log_env = -alpha * log_cosh - lam.real * z
    env = np.exp(log_env - log_env.max()) * np.exp(-1j * lam.imag * z)
    psi = SpinorField(grid, chi[0] * env, chi[1] * env).normalized()
    if frame == "lab":
        psi = gauge_transform(psi, field.k, Direction.INVERSE)
    return psi


def breaking_threshold(k: float, w0: float = 0.0) -> float:
    """Field strength |b0| at which SUSY breaks: sqrt(k^4 + 4 k^2 w0^2)."""
    if k == 0:
        raise ModelError("k must be nonzero")
    return math.sqrt(k ** 4 + 4 * k ** 2 * w0 ** 2)


def transformed_eigenvalues(q: float, field: FieldConfig, sector: Sector):
    return np.linalg.eigvalsh(transformed_hamiltonian(q, field, sector))


__all__ = [
    "BandSpectrum", "SusyPhase", "band_spectrum", "breaking_threshold", "decay_rate",
    "dispersion", "lower_band_minimum", "normalizable_branches", "spin_lambda_eigenpairs",
    "susy_phase_asymptotic", "susy_phase_free", "tanh_ground_state", "transformed_eigenvalues",
    "zero_mode_residual", "zero_mode_spinor", "zero_mode_wavevector",
]
