"""Uniform periodic grid on the auxiliary square and complex fields sampled on it.

The square Q has side ``side_len`` and is centered at ``center``; nodes along
each axis sit at ``center - side/2 + h*j`` with ``h = side_len/n``, so the
grid is periodic with period ``side_len`` (right/top edges not duplicated).
The central sub-square of side ``side_len/2`` is the working region that must
contain the experiment domain; the surrounding frame of width ``side_len/4``
is the padding band that keeps the periodic Cauchy transforms away from
wrap-around artifacts.
"""

from __future__ import annotations

import numpy as np
from scipy import fft as _sfft

from .errors import SupportViolation

_FFT_WORKERS = 2


def _is_pow2(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


def fft2(a):
    return _sfft.fft2(a, workers=_FFT_WORKERS)


def ifft2(a):
    return _sfft.ifft2(a, workers=_FFT_WORKERS)


class FourierGrid:
    """Periodic n x n grid on an axis-parallel square.

    Attributes
    ----------
    n_per_side : int
        Samples per axis (power of two).
    side_len : float
        Side of the periodic square.
    center : (float, float)
        Center of the square.
    h : float
        Node spacing, side_len / n_per_side.
    """

    def __init__(self, n_per_side, side_len, center=(0.0, 0.0)):
        n = int(n_per_side)
        if not _is_pow2(n):
            raise ValueError(f"n_per_side must be a power of two >= 2, got {n_per_side}")
        if side_len <= 0:
            raise ValueError("side_len must be positive")
        self.n_per_side = n
        self.side_len = float(side_len)
        self.center = (float(center[0]), float(center[1]))
        self.h = self.side_len / n

        self.z1 = self.center[0] - self.side_len / 2 + self.h * np.arange(n)
        self.z2 = self.center[1] - self.side_len / 2 + self.h * np.arange(n)
        xi = 2 * np.pi * np.fft.fftfreq(n, d=self.h)
        self.xi1 = xi.copy()
        self.xi2 = xi.copy()

        # node meshes, values indexed [i2, i1]
        self.Z1, self.Z2 = np.meshgrid(self.z1, self.z2)
        self.XI1, self.XI2 = np.meshgrid(self.xi1, self.xi2)
        self._xi_sq = self.XI1**2 + self.XI2**2
        self._band = None

    @property
    def xi_sq(self):
        """|xi|^2 mesh, [i2, i1] layout like the spatial meshes."""
        return self._xi_sq

    def band_mask(self):
        """Boolean mask of the padding band (outside the central half-square)."""
        if self._band is None:
            q = self.side_len / 4
            self._band = (np.abs(self.Z1 - self.center[0]) > q) | (
                np.abs(self.Z2 - self.center[1]) > q
            )
        return self._band

    def same_as(self, other) -> bool:
        return (
            isinstance(other, FourierGrid)
            and self.n_per_side == other.n_per_side
            and self.side_len == other.side_len
            and self.center == other.center
        )

    def __repr__(self):
        return (
            f"FourierGrid(n_per_side={self.n_per_side}, side_len={self.side_len}, "
            f"center={self.center})"
        )


class ComplexField:
    """Complex samples on a FourierGrid; values[i2, i1] lives at (z1[i1], z2[i2])."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: FourierGrid, values):
        values = np.asarray(values, dtype=np.complex128)
        n = grid.n_per_side
        if values.shape != (n, n):
            raise ValueError(f"values must have shape ({n}, {n}), got {values.shape}")
        if not np.all(np.isfinite(values.view(np.float64))):
            raise ValueError("field values must be finite")
        self.grid = grid
        self.values = values

    @classmethod
    def zeros(cls, grid):
        n = grid.n_per_side
        return cls(grid, np.zeros((n, n), dtype=np.complex128))

    @classmethod
    def from_function(cls, grid, fn):
        """Sample fn(Z1, Z2) on the nodes."""
        return cls(grid, np.asarray(fn(grid.Z1, grid.Z2), dtype=np.complex128))

    def copy(self):
        return ComplexField(self.grid, self.values.copy())

    def conj(self):
        return ComplexField(self.grid, np.conj(self.values))

    def _coerce(self, other):
        if isinstance(other, ComplexField):
            if not self.grid.same_as(other.grid):
                raise ValueError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return ComplexField(self.grid, self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return ComplexField(self.grid, self.values - self._coerce(other))

    def __mul__(self, other):
        return ComplexField(self.grid, self.values * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self):
        return ComplexField(self.grid, -self.values)

    def l2_norm(self) -> float:
        """Grid L^2 norm, h * ||values||_2."""
        return float(self.grid.h * np.linalg.norm(self.values))

    def mean(self) -> complex:
        return complex(np.mean(self.values))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def integral(self) -> complex:
        """Trapezoid (= midpoint) quadrature over the periodic square."""
        return complex(self.grid.h**2 * np.sum(self.values))


def check_padding_support(field: ComplexField, rel_tol: float = 1e-6, what: str = "field"):
    """Raise SupportViolation if the field has mass in the padding band.

    The check is relative: band values above rel_tol * max|field| count as
    support.  Zero fields pass trivially.
    """
    m = field.max_abs()
    if m == 0.0:
        return
    band_max = float(np.max(np.abs(field.values[field.grid.band_mask()])))
    if band_max > rel_tol * m:
        raise SupportViolation(
            f"{what} has relative magnitude {band_max / m:.3e} in the padding band "
            f"(tolerance {rel_tol:.1e}); periodic wrap-around would corrupt the transform"
        )
