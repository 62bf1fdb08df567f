"""Domain types, spin-1/2 algebra and model specifications.

Units: hbar = 1 and 2m = 1, so the kinetic term is -d^2/dz^2. The
gyromagnetic factor is absorbed into the field strength ``b0``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

RING_RULE_TOL = 1e-9


class ModelError(ValueError):
    """Raised when a model or grid violates its invariants."""


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def make_spin_operators():
    """Return ``(S_x, S_y, S_z)``, the Pauli matrices divided by two."""
    sx = _frozen([[0, 1], [1, 0]]) / 2
    sy = _frozen([[0, -1j], [1j, 0]]) / 2
    sz = _frozen([[1, 0], [0, -1]]) / 2
    for s in (sx, sy, sz):
        s.setflags(write=False)
    return sx, sy, sz


SX, SY, SZ = make_spin_operators()
IDENTITY2 = _frozen(np.eye(2))


class Sector(enum.Enum):
    PLUS = "plus"
    MINUS = "minus"

    @property
    def sign(self) -> int:
        """+1 for H+, -1 for H-; the upper sign in every +/- formula."""
        return 1 if self is Sector.PLUS else -1

    @classmethod
    def parse(cls, text: str) -> "Sector":
        try:
            return cls(text.lower())
        except ValueError:
            raise ModelError(f"unknown sector {text!r}; expected 'plus' or 'minus'") from None


class Boundary(enum.Enum):
    RING = "ring"
    BOX = "box"


@dataclass(frozen=True)
class FieldConfig:
    """Rotating field of strength ``b0`` and pitch ``k`` (period 2*pi/k)."""

    b0: float
    k: float

    def require_pitch(self):
        if self.k == 0:
            raise ModelError("k must be nonzero")


# -- superpotentials ---------------------------------------------------------

@dataclass(frozen=True)
class ZeroW:
    def value(self, z):
        return np.zeros_like(np.asarray(z, dtype=float))

    def derivative(self, z, step=None):
        return np.zeros_like(np.asarray(z, dtype=float))

    @property
    def asymptotes(self):
        return (0.0, 0.0)

    def violations(self):
        return []


@dataclass(frozen=True)
class TanhW:
    """W(z) = alpha * tanh(z)."""

    alpha: float

    def value(self, z):
        return self.alpha * np.tanh(np.asarray(z, dtype=float))

    def derivative(self, z, step=None):
        z = np.asarray(z, dtype=float)
        if step is None:
            return self.alpha / np.cosh(z) ** 2
        return (self.value(z + step) - self.value(z - step)) / (2 * step)

    @property
    def asymptotes(self):
        return (-self.alpha, self.alpha)

    def violations(self):
        if not self.alpha > 0:
            return ["alpha must be positive"]
        return []


@dataclass(frozen=True)
class TabulatedW:
    """Sampled superpotential.

    Linear interpolation between samples, clamped to ``asymptotes`` outside
    the sampled range. Derivatives are central differences on the sample grid
    (one-sided at the ends), interpolated linearly.
    """

    z: tuple
    w: tuple
    asymptotes: tuple = field(default=(0.0, 0.0))

    def __post_init__(self):
        object.__setattr__(self, "z", tuple(float(v) for v in self.z))
        object.__setattr__(self, "w", tuple(float(v) for v in self.w))
        object.__setattr__(self, "asymptotes", tuple(float(v) for v in self.asymptotes))

    def value(self, z):
        z = np.asarray(z, dtype=float)
        lo, hi = self.asymptotes
        out = np.interp(z, self.z, self.w)
        out = np.where(z < self.z[0], lo, out)
        return np.where(z > self.z[-1], hi, out)

    def derivative(self, z, step=None):
        z = np.asarray(z, dtype=float)
        slope = np.gradient(np.asarray(self.w), np.asarray(self.z))
        out = np.interp(z, self.z, slope)
        return np.where((z < self.z[0]) | (z > self.z[-1]), 0.0, out)

    def violations(self):
        out = []
        zs = np.asarray(self.z)
        if len(zs) < 2 or len(zs) != len(self.w):
            out.append("tabulated W needs at least two (z, W) samples of equal length")
        elif np.any(np.diff(zs) <= 0):
            out.append("tabulated z samples must be strictly increasing")
        if len(self.asymptotes) != 2 or not all(map(math.isfinite, self.asymptotes)):
            out.append("tabulated W needs finite asymptotes (W(-inf), W(+inf))")
        return out


SuperpotentialSpec = Union[ZeroW, TanhW, TabulatedW]


@dataclass(frozen=True)
class ModelSpec:
    field: FieldConfig
    w: SuperpotentialSpec = ZeroW()
    sector: Sector = Sector.MINUS

    def with_sector(self, sector: Sector) -> "ModelSpec":
        return ModelSpec(self.field, self.w, sector)


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def raise_if_invalid(self):
        if self.violations:
            raise ModelError("; ".join(self.violations))


def validate_model(spec: ModelSpec) -> ValidationResult:
    """Collect invariant violations of ``spec`` without raising."""
    out = []
    f = spec.field
    if not (math.isfinite(f.k) and math.isfinite(f.b0)):
        out.append("k and b0 must be finite")
    elif f.k == 0:
        out.append("k must be nonzero")
    out.extend(spec.w.violations())
    if not isinstance(spec.sector, Sector):
        out.append("sector must be plus or minus")
    return ValidationResult(tuple(out))


# -- grids and fields ---------------------------------------------------------

@dataclass(frozen=True)
class Grid:
    """Uniform 1-D grid with ``n`` points over length ``length``.

    Ring points sit at ``j*h`` (j = 0..n-1) with periodic wrap. Box points are
    cell-centred on ``[-L/2, L/2]`` with zero Dirichlet ghosts one spacing
    beyond either end.
    """

    n: int
    length: float
    boundary: Boundary = Boundary.RING

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 8:
            raise ModelError(f"grid needs an integer n >= 8, got {self.n}")
        if not self.length > 0:
            raise ModelError(f"grid length must be positive, got {self.length}")

    @property
    def spacing(self) -> float:
        return self.length / self.n

    h = spacing

    @property
    def points(self):
        j = np.arange(self.n)
        if self.boundary is Boundary.RING:
            return j * self.spacing
        return (j - (self.n - 1) / 2) * self.spacing

    @classmethod
    def ring(cls, field: FieldConfig, periods, n: int) -> "Grid":
        """Ring of length 4*pi*periods/|k|, the period of the spin-rotation gauge."""
        field.require_pitch()
        if float(periods) != int(round(float(periods))) or int(round(float(periods))) < 1:
            raise ModelError(
                f"periods must be a positive integer (ring length L = 4*pi*m/k), got {periods}")
        return cls(n, 4 * math.pi * int(round(float(periods))) / abs(field.k), Boundary.RING)

    @classmethod
    def box(cls, length: float, n: int) -> "Grid":
        return cls(n, length, Boundary.BOX)


def ring_periods(grid: Grid, k: float) -> float:
    """Number of gauge periods 4*pi/|k| that fit on ``grid``."""
    return grid.length * abs(k) / (4 * math.pi)


def check_ring_rule(grid: Grid, field: FieldConfig):
    """Raise unless a ring grid holds a whole number of gauge periods."""
    if grid.boundary is not Boundary.RING or field.b0 == 0:
        return
    m = ring_periods(grid, field.k)
    if round(m) < 1 or abs(m - round(m)) > RING_RULE_TOL * max(1.0, m):
        raise ModelError(
            f"ring length {grid.length!r} violates L = 4*pi*m/k with integer m >= 1 "
            f"(L*k/(4*pi) = {m:.12g})")


@dataclass(frozen=True)
class SpinorField:
    """Two-component wavefunction sampled on a grid."""

    grid: Grid
    up: np.ndarray
    down: np.ndarray

    def __post_init__(self):
        up = np.array(self.up, dtype=complex)
        down = np.array(self.down, dtype=complex)
        if up.shape != (self.grid.n,) or down.shape != (self.grid.n,):
            raise ModelError("spinor components must have one entry per grid point")
        up.setflags(write=False)
        down.setflags(write=False)
        object.__setattr__(self, "up", up)
        object.__setattr__(self, "down", down)

    @classmethod
    def from_vector(cls, grid: Grid, vec) -> "SpinorField":
        """Unpack a site-interleaved vector ``(up_0, down_0, up_1, ...)``."""
        vec = np.asarray(vec)
        return cls(grid, vec[0::2], vec[1::2])

    def as_vector(self):
        out = np.empty(2 * self.grid.n, dtype=complex)
        out[0::2] = self.up
        out[1::2] = self.down
        return out

    def norm(self) -> float:
        h = self.grid.spacing
        return math.sqrt(h * float(np.sum(np.abs(self.up) ** 2 + np.abs(self.down) ** 2)))

    def normalized(self) -> "SpinorField":
        nrm = self.norm()
        if nrm == 0 or not math.isfinite(nrm):
            raise ModelError("cannot normalize a spinor with zero or infinite norm")
        return SpinorField(self.grid, self.up / nrm, self.down / nrm)

    def amplitude(self):
        return np.sqrt(np.abs(self.up) ** 2 + np.abs(self.down) ** 2)


@dataclass(frozen=True)
class DecayRate:
    """Spin eigenvalue lambda; real above the breaking field, imaginary below."""

    value: complex

    @property
    def is_real(self) -> bool:
        return self.value.imag == 0

    @property
    def real(self) -> float:
        return self.value.real

    def __str__(self):
        if self.value.imag == 0:
            return f"{self.value.real:.12g}"
        return f"{self.value.imag:.12g}i"
