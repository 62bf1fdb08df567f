"""Numerical spectra of the discretized partner Hamiltonians."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.sparse.csgraph import reverse_cuthill_mckee
from scipy.sparse.linalg import splu

from .operators import (
    build_direct_hamiltonian, build_ladder_matrices, build_partner_hamiltonians,
)
from .qmcore import (
    Boundary, Grid, ModelError, ModelSpec, Sector, SpinorField, ZeroW, validate_model,
)

HERMITIAN_REJECT = 1e-8
MAX_BANDWIDTH = 64
RESIDUAL_TOL = 1e-10
MAX_SWEEPS = 300
EDGE_TOL = 1e-8


class SolverError(RuntimeError):
    """A numerical routine failed to converge."""


class BoxEdgeWarning(UserWarning):
    """Ground state still has weight at the box walls; enlarge the box."""


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray] = None
    grid: Optional[Grid] = None
    sector: Optional[Sector] = None

    def state(self, index: int) -> SpinorField:
        """Eigenvector ``index`` as a spinor field with unit L2 norm."""
        if self.eigenvectors is None or self.grid is None:
            raise ValueError("spectrum was computed without eigenvectors")
        vec = self.eigenvectors[:, index]
        # fix the arbitrary eigenvector phase: largest component real positive
        lead = vec[int(np.argmax(np.abs(vec)))]
        return SpinorField.from_vector(self.grid, vec * (abs(lead) / lead)).normalized()


def zero_mode_threshold(grid: Grid, k: float) -> float:
    """Eigenvalues below this count as numerical zero modes."""
    return max(1e-6, 10 * grid.spacing ** 2 * k ** 2)


def _scale(h) -> float:
    """Max absolute row sum, an upper bound on the spectral radius."""
    return float(np.max(np.asarray(abs(h).sum(axis=1)))) if h.shape[0] else 0.0


def _check_hermitian(h, scale):
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    diff = h - h.conj().T
    err = float(abs(diff).max()) if diff.shape[0] else 0.0
    if err > HERMITIAN_REJECT * max(scale, np.finfo(float).tiny):
        raise ValueError(f"matrix is not Hermitian (|H - H^dagger|_max = {err:.3g})")


def eigen_hermitian(h, want_vectors: bool = False, count: Optional[int] = None,
                    grid: Optional[Grid] = None, sector: Optional[Sector] = None) -> SpectrumResult:
    """Lowest ``count`` (default: all) eigenpairs of a Hermitian matrix.

    Dense input goes to LAPACK ``heevr``. Sparse input is reordered with
    reverse Cuthill-McKee; if the result is banded the eigenvalues come from
    LAPACK's banded driver and eigenvectors from shift-invert subspace
    iteration seeded at those eigenvalues. Wide-band sparse input is densified.
    """
    if sp.issparse(h):
        h = sp.csr_matrix(h)
        scale = _scale(h)
        _check_hermitian(h, scale)
        h = ((h + h.conj().T) / 2).tocsr()
        count = h.shape[0] if count is None else min(count, h.shape[0])
        perm = reverse_cuthill_mckee(sp.csr_matrix(h != 0), symmetric_mode=True)
        hp = h[perm][:, perm].tocsr()
        coo = hp.tocoo()
        bw = int(np.max(np.abs(coo.row - coo.col))) if coo.nnz else 0
        if bw <= MAX_BANDWIDTH and count < h.shape[0]:
            vals = _banded_eigvals(coo, bw, h.shape[0], count)
            vecs = None
            if want_vectors:
                vecs = np.empty((h.shape[0], count), dtype=complex)
                vecs[perm] = _subspace_vectors(hp, vals, scale)
            return SpectrumResult(vals, vecs, grid, sector)
        h = h.toarray()
    a = np.asarray(h)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = float(np.max(np.sum(np.abs(a), axis=1))) if a.size else 0.0
    _check_hermitian(a, scale)
    a = (a + a.conj().T) / 2
    n = a.shape[0]
    subset = None if count is None or count >= n else (0, count - 1)
    if want_vectors:
        vals, vecs = la.eigh(a, subset_by_index=subset)
    else:
        vals, vecs = la.eigh(a, eigvals_only=True, subset_by_index=subset), None
    return SpectrumResult(np.asarray(vals, dtype=float), vecs, grid, sector)


def _banded_eigvals(coo, bw, n, count):
    ab = np.zeros((bw + 1, n), dtype=complex)
    upper = coo.row <= coo.col
    ab[bw + coo.row[upper] - coo.col[upper], coo.col[upper]] = coo.data[upper]
    if np.all(ab.imag == 0):
        ab = ab.real
    vals = la.eig_banded(ab, lower=False, eigvals_only=True, select="i",
                         select_range=(0, count - 1))
    return np.sort(np.asarray(vals, dtype=float))


def _clusters(vals, tol):
    groups = [[0]]
    for i in range(1, len(vals)):
        if vals[i] - vals[i - 1] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def _subspace_vectors(h, vals, scale):
    """Eigenvectors for known eigenvalues ``vals`` by blocked inverse iteration."""
    n = h.shape[0]
    rng = np.random.default_rng(0)
    ident = sp.identity(n, format="csc", dtype=complex)
    hc = h.tocsc().astype(complex)
    found = np.zeros((n, 0), dtype=complex)
    tol = RESIDUAL_TOL * max(scale, 1.0)
    for group in _clusters(vals, 1e-7 * max(scale, 1.0)):
        lo, hi = vals[group[0]], vals[group[-1]]
        shift = 0.5 * (lo + hi) + 1e-9 * max(scale, 1.0)
        lu = splu(hc - shift * ident)
        block = rng.standard_normal((n, len(group))) + 1j * rng.standard_normal((n, len(group)))
        for _ in range(MAX_SWEEPS):
            block = lu.solve(block)
            block -= found @ (found.conj().T @ block)
            q, _ = np.linalg.qr(block)
            ritz, rot = np.linalg.eigh(q.conj().T @ (h @ q))
            block = q @ rot
            resid = np.linalg.norm(h @ block - block * ritz, axis=0)
            if np.all(resid < tol):
                break
        else:
            raise SolverError(
                f"eigenvectors near {lo:.6g} did not converge (residual {resid.max():.3g})")
        found = np.hstack([found, block])
    return found


# -- harnesses ---------------------------------------------------------------

def _require_valid(spec: ModelSpec):
    validate_model(spec).raise_if_invalid()


def factorized_spectra(spec: ModelSpec, grid: Grid, count: int, want_vectors: bool = False):
    """Spectra of both partners ``(H-, H+)`` built from one set of ladder matrices."""
    ladder = build_ladder_matrices(spec, grid)
    h_minus, h_plus = build_partner_hamiltonians(ladder)
    return tuple(eigen_hermitian(hm.h, want_vectors, count, grid, hm.sector)
                 for hm in (h_minus, h_plus))


def ring_spectrum(spec: ModelSpec, periods, n: int, count: int,
                  want_vectors: bool = False) -> SpectrumResult:
    """Lowest ``count`` levels of the factorized ring Hamiltonian of ``spec.sector``.

    The ring holds ``periods`` gauge periods, L = 4 pi periods / |k|.
    """
    if not isinstance(spec.w, ZeroW):
        raise ModelError("ring spectra are defined for W = 0 only")
    _require_valid(spec)
    grid = Grid.ring(spec.field, periods, n)
    minus, plus = factorized_spectra(spec, grid, count, want_vectors)
    return minus if spec.sector is Sector.MINUS else plus


def ring_spectra(spec: ModelSpec, periods, n: int, count: int, want_vectors: bool = False):
    """Both partner ring spectra ``(H-, H+)`` from one factorization."""
    if not isinstance(spec.w, ZeroW):
        raise ModelError("ring spectra are defined for W = 0 only")
    _require_valid(spec)
    return factorized_spectra(spec, Grid.ring(spec.field, periods, n), count, want_vectors)


def bound_spectrum(spec: ModelSpec, length: float, n: int, count: int,
                   want_vectors: bool = False) -> SpectrumResult:
    """Lowest ``count`` levels of sector ``spec.sector`` in a Dirichlet box.

    Each sector is discretized directly with zero walls. A factorized box pair
    has the same spectrum in both sectors (A^dagger A and A A^dagger of a
    square matrix), so it cannot tell which sector owns a zero mode.
    Warns with ``BoxEdgeWarning`` when the ground state touches the walls.
    """
    _require_valid(spec)
    grid = Grid.box(length, n)
    hm = build_direct_hamiltonian(spec, grid)
    res = eigen_hermitian(hm.h, True, count, grid, spec.sector)
    amp = res.state(0).amplitude()
    if max(amp[0], amp[-1]) > EDGE_TOL * amp.max():
        warnings.warn(
            f"ground state amplitude at the box walls is {max(amp[0], amp[-1]) / amp.max():.2g} "
            f"of its maximum (L={length}); results may depend on the box size",
            BoxEdgeWarning, stacklevel=2)
    if not want_vectors:
        res = SpectrumResult(res.eigenvalues, None, grid, spec.sector)
    return res


def l2_norm(psi: SpinorField) -> float:
    return psi.norm()


def tail_decay_fit(psi: SpinorField, window: float = 0.1) -> float:
    """Least-squares slope of log|psi| over the trailing ``window`` of a box."""
    if psi.grid.boundary is not Boundary.BOX:
        raise ModelError("tail fits need a box grid")
    if not 0 < window <= 1:
        raise ValueError("window must be a fraction in (0, 1]")
    start = min(int(math.floor(psi.grid.n * (1 - window))), psi.grid.n - 2)
    amp = psi.amplitude()[start:]
    if np.any(amp == 0):
        raise ValueError("fit window contains zeros of |psi|")
    slope, _ = np.polyfit(psi.grid.points[start:], np.log(amp), 1)
    return float(slope)


def overlap(a: SpinorField, b: SpinorField) -> complex:
    """L2 inner product <a|b>."""
    return complex(a.grid.spacing * np.vdot(a.as_vector(), b.as_vector()))


def subspace_overlap(psi: SpinorField, spectrum: SpectrumResult, indices) -> float:
    """Norm of the projection of unit ``psi`` onto the span of selected eigenvectors."""
    vec = psi.normalized().as_vector() * math.sqrt(psi.grid.spacing)
    basis = spectrum.eigenvectors[:, list(indices)]
    return float(np.linalg.norm(basis.conj().T @ vec))


__all__ = [
    "BoxEdgeWarning", "SolverError", "SpectrumResult", "bound_spectrum", "eigen_hermitian",
    "factorized_spectra", "l2_norm", "overlap", "ring_spectra", "ring_spectrum",
    "subspace_overlap", "tail_decay_fit", "zero_mode_threshold",
]
