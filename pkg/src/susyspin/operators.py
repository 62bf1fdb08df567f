"""Ladder operators and partner Hamiltonians, pointwise and on a grid.

Grid matrices act on site-interleaved spinor vectors
``(up_0, down_0, up_1, down_1, ...)`` and are stored as ``scipy.sparse``
CSR matrices; call ``.toarray()`` for the dense 2n x 2n form.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .qmcore import (
    IDENTITY2, SX, SY, SZ, Boundary, FieldConfig, Grid, ModelError, ModelSpec,
    Sector, SpinorField, SuperpotentialSpec, check_ring_rule, validate_model,
)


class Direction(enum.Enum):
    FORWARD = "forward"
    INVERSE = "inverse"


def rotating_field(field: FieldConfig, sector: Sector, z):
    """Field felt by sector H+/-: (-/+ b0 cos kz, -/+ b0 sin kz, 0)."""
    z = np.asarray(z, dtype=float)
    s = -sector.sign
    return np.stack([s * field.b0 * np.cos(field.k * z),
                     s * field.b0 * np.sin(field.k * z),
                     np.zeros_like(z)], axis=-1)


def vector_superpotential(field: FieldConfig, z):
    field.require_pitch()
    z = np.asarray(z, dtype=float)
    r = field.b0 / field.k
    return np.stack([-r * np.sin(field.k * z), r * np.cos(field.k * z),
                     np.zeros_like(z)], axis=-1)


def vector_superpotential_derivative(field: FieldConfig, z):
    z = np.asarray(z, dtype=float)
    return np.stack([-field.b0 * np.cos(field.k * z), -field.b0 * np.sin(field.k * z),
                     np.zeros_like(z)], axis=-1)


def induced_potentials(w: SuperpotentialSpec, field: FieldConfig, z, sector: Sector,
                       step=None):
    """Scalar potential and magnetic field of sector H+/-.

    ``V = W^2 +/- W' + |V|^2/4`` and ``B = 2 W V +/- V'``. With ``step`` the
    derivatives of both superpotentials are central differences of that width;
    otherwise exact derivatives are used where available.
    """
    z = np.asarray(z, dtype=float)
    s = sector.sign
    wz = w.value(z)
    vec = vector_superpotential(field, z)
    if step is None:
        dw = w.derivative(z)
        dvec = vector_superpotential_derivative(field, z)
    else:
        dw = w.derivative(z, step=step)
        dvec = (vector_superpotential(field, z + step)
                - vector_superpotential(field, z - step)) / (2 * step)
    scalar = wz ** 2 + s * dw + np.sum(vec ** 2, axis=-1) / 4
    bfield = 2 * wz[..., None] * vec + s * dvec
    return scalar, bfield


def spin_dot(vectors):
    """Stack of 2x2 matrices ``v . S`` for an array of 3-vectors."""
    v = np.asarray(vectors, dtype=float)
    return (v[..., 0, None, None] * SX + v[..., 1, None, None] * SY
            + v[..., 2, None, None] * SZ)


def _block_diag(blocks):
    """Sparse block-diagonal matrix from an (n, 2, 2) array."""
    n = blocks.shape[0]
    rows = (2 * np.arange(n)[:, None, None] + np.arange(2)[None, :, None]).repeat(2, axis=2)
    cols = (2 * np.arange(n)[:, None, None] + np.arange(2)[None, None, :]).repeat(2, axis=1)
    return sp.csr_matrix((blocks.ravel(), (rows.ravel(), cols.ravel())),
                         shape=(2 * n, 2 * n))


def forward_difference(grid: Grid):
    """(psi_{j+1} - psi_j)/h per spin component; ring wraps, box has zero ghosts."""
    n, h = grid.n, grid.spacing
    d = sp.diags([-np.ones(n), np.ones(n - 1)], [0, 1], format="lil")
    if grid.boundary is Boundary.RING:
        d[n - 1, 0] = 1.0
    return sp.kron(d.tocsr() / h, sp.identity(2), format="csr")


def laplacian(grid: Grid):
    """Three-point second difference per spin component."""
    n, h = grid.n, grid.spacing
    d = sp.diags([np.ones(n - 1), -2 * np.ones(n), np.ones(n - 1)], [-1, 0, 1], format="lil")
    if grid.boundary is Boundary.RING:
        d[0, n - 1] = 1.0
        d[n - 1, 0] = 1.0
    return sp.kron(d.tocsr() / h ** 2, sp.identity(2), format="csr")


def _require_buildable(spec: ModelSpec, grid: Grid):
    validate_model(spec).raise_if_invalid()
    check_ring_rule(grid, spec.field)


@dataclass(frozen=True)
class LadderMatrices:
    a_minus: sp.csr_matrix
    a_plus: sp.csr_matrix
    grid: Grid


@dataclass(frozen=True)
class HamiltonianMatrix:
    h: sp.csr_matrix
    sector: Sector
    grid: Grid

    def toarray(self):
        return self.h.toarray()

    def hermiticity_error(self) -> float:
        """Largest entry of H - H^dagger relative to the largest entry of H."""
        diff = self.h - self.h.conj().T
        scale = abs(self.h).max()
        return float(abs(diff).max() / scale) if scale else float(abs(diff).max())


def spin_coupling_blocks(spec: ModelSpec, z):
    """Per-site 2x2 blocks ``W(z) I + V(z).S`` of the ladder operators."""
    return (spec.w.value(z)[:, None, None] * IDENTITY2
            + spin_dot(vector_superpotential(spec.field, z)))


def build_ladder_matrices(spec: ModelSpec, grid: Grid) -> LadderMatrices:
    """Discrete A- = D_f + M and A+ = (A-)^dagger.

    The forward difference in A- makes A+ a backward difference, so the
    partner products below are exactly A^dagger A and A A^dagger.
    """
    _require_buildable(spec, grid)
    a_minus = (forward_difference(grid) + _block_diag(spin_coupling_blocks(spec, grid.points))).tocsr()
    a_plus = a_minus.conj().T.tocsr()
    return LadderMatrices(a_minus, a_plus, grid)


def build_partner_hamiltonians(ladder: LadderMatrices):
    """Return ``(H-, H+) = (A+ A-, A- A+)``."""
    h_minus = (ladder.a_plus @ ladder.a_minus).tocsr()
    h_plus = (ladder.a_minus @ ladder.a_plus).tocsr()
    return (HamiltonianMatrix(h_minus, Sector.MINUS, ladder.grid),
            HamiltonianMatrix(h_plus, Sector.PLUS, ladder.grid))


def build_direct_hamiltonian(spec: ModelSpec, grid: Grid) -> HamiltonianMatrix:
    """Second-order finite differences of -d^2/dz^2 + V(z) + B(z).S.

    Derivatives of W and of the vector superpotential are central differences
    with the grid spacing. On a box both sectors get zero Dirichlet walls.
    """
    _require_buildable(spec, grid)
    z = grid.points
    scalar, bfield = induced_potentials(spec.w, spec.field, z, spec.sector, step=grid.spacing)
    blocks = scalar[:, None, None] * IDENTITY2 + spin_dot(bfield)
    h = (-laplacian(grid) + _block_diag(blocks)).tocsr()
    return HamiltonianMatrix(h, spec.sector, grid)


def smooth_action_gap(h1, h2, grid: Grid, modes: int = 3) -> float:
    """Max-norm of ``(h1 - h2) psi`` over low-wavenumber unit spinors.

    Entrywise the factorized and direct stencils differ by O(1/h) (the
    factorized one carries first-difference terms of weight M/h); acting on
    fields resolved by the grid the difference is the O(h) truncation error.
    Ring test fields are plane waves exp(2 pi i j z / L), |j| <= modes; box
    test fields are the Dirichlet sine modes 1..modes.
    """
    diff = (sp.csr_matrix(h1) - sp.csr_matrix(h2)).tocsr()
    z = grid.points
    if grid.boundary is Boundary.RING:
        waves = [np.exp(2j * np.pi * j * z / grid.length) for j in range(-modes, modes + 1)]
    else:
        span = grid.length + grid.spacing
        waves = [np.sin(np.pi * j * (z + span / 2) / span) for j in range(1, modes + 1)]
    worst = 0.0
    for wave in waves:
        for comp in (0, 1):
            vec = np.zeros(2 * grid.n, dtype=complex)
            vec[comp::2] = wave
            worst = max(worst, float(np.max(np.abs(diff @ vec))) / float(np.max(np.abs(vec))))
    return worst


def gauge_transform(psi: SpinorField, k: float, direction=Direction.FORWARD) -> SpinorField:
    """Apply exp(+i k z S_z) (forward) or its inverse pointwise."""
    direction = Direction(direction)
    s = 1 if direction is Direction.FORWARD else -1
    phase = np.exp(0.5j * s * k * psi.grid.points)
    return SpinorField(psi.grid, psi.up * phase, psi.down * np.conj(phase))


def transformed_hamiltonian(q: float, field: FieldConfig, sector: Sector):
    """2x2 Bloch Hamiltonian (q - k S_z)^2 -/+ b0 S_x + b0^2/(4k^2) in the rotating frame."""
    field.require_pitch()
    kin = q * IDENTITY2 - field.k * SZ
    return (kin @ kin - sector.sign * field.b0 * SX
            + field.b0 ** 2 / (4 * field.k ** 2) * IDENTITY2)


def zero_mode_matrix(q: float, field: FieldConfig, sector: Sector):
    """2x2 matrix -/+ i q +/- i k S_z + (b0/k) S_y whose null vectors are zero-mode spinors."""
    field.require_pitch()
    s = sector.sign
    return -s * 1j * q * IDENTITY2 + s * 1j * field.k * SZ + field.b0 / field.k * SY


def lambda_operator(field: FieldConfig):
    """2x2 operator -i k S_z + (b0/k) S_y whose eigenvalues are the decay rates."""
    field.require_pitch()
    return -1j * field.k * SZ + field.b0 / field.k * SY


__all__ = [
    "Direction", "HamiltonianMatrix", "LadderMatrices", "ModelError",
    "build_direct_hamiltonian", "build_ladder_matrices", "build_partner_hamiltonians",
    "forward_difference", "gauge_transform", "induced_potentials", "lambda_operator",
    "laplacian", "rotating_field", "smooth_action_gap", "spin_coupling_blocks", "spin_dot",
    "transformed_hamiltonian", "vector_superpotential", "vector_superpotential_derivative",
    "zero_mode_matrix",
]
