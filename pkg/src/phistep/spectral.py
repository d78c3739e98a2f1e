"""Periodic Fourier spectral discretization in one to three dimensions.

Fields live on tensor grids of even sizes over per-axis intervals [a, b).
Fourier coefficients use FFT storage order with the forward transform
scaled by 1/prod(sizes) (so a constant field has coefficient 1 at mode
zero) and the inverse unscaled.  Constant-coefficient differential
operators act diagonally: the symbol of d^p/dx^p is (ik)^p over the
scaled integer wavenumbers -N/2 .. N/2-1, with the Nyquist entry of
odd-order symbols set to zero so real fields stay real.

Spectral symbols are plain ndarrays over the mode grid (one per
component when stacked); nothing here assumes more structure than
elementwise multiplication.
"""
from __future__ import annotations

import contextvars
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = [
    "Grid",
    "NonlinearOp",
    "wavenumbers",
    "diff_symbol",
    "laplacian_symbol",
    "to_coeffs",
    "to_values",
    "apply_nonlinear",
    "fft_counter",
    "install_fft_counter",
    "remove_fft_counter",
]


@dataclass(frozen=True)
class Grid:
    """Tensor-product periodic grid: per-axis sizes and intervals [a, b)."""

    sizes: tuple
    domain: tuple

    def __post_init__(self) -> None:
        sizes = tuple(int(n) for n in self.sizes)
        domain = tuple((float(a), float(b)) for a, b in self.domain)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "domain", domain)
        if not 1 <= len(sizes) <= 3:
            raise ValueError(f"grids are 1D to 3D, got {len(sizes)} axes")
        if len(domain) != len(sizes):
            raise ValueError("one interval per axis required")
        for n in sizes:
            if n <= 0 or n % 2:
                raise ValueError(f"axis sizes must be even and positive, got {n}")
        for a, b in domain:
            if not (np.isfinite(a) and np.isfinite(b) and a < b):
                raise ValueError(f"degenerate interval [{a}, {b})")

    @classmethod
    def uniform(cls, dims: int, size: int, interval) -> "Grid":
        """A dims-dimensional grid with the same size and interval per axis."""
        return cls((size,) * dims, (tuple(interval),) * dims)

    @property
    def dims(self) -> int:
        return len(self.sizes)

    @property
    def shape(self) -> tuple:
        return self.sizes

    @property
    def npoints(self) -> int:
        return int(np.prod(self.sizes))

    def spacing(self, axis: int = 0) -> float:
        a, b = self.domain[axis]
        return (b - a) / self.sizes[axis]

    def axis_points(self, axis: int) -> np.ndarray:
        a, b = self.domain[axis]
        n = self.sizes[axis]
        return a + (b - a) * np.arange(n) / n

    def meshgrid(self) -> tuple:
        """Coordinate arrays of shape self.shape (matrix indexing)."""
        axes = [self.axis_points(i) for i in range(self.dims)]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def wavenumbers(self, axis: int) -> np.ndarray:
        return wavenumbers(self.sizes[axis], self.domain[axis])


def wavenumbers(n: int, interval) -> np.ndarray:
    """Scaled integer wavenumbers -N/2 .. N/2-1 in FFT storage order.

    On [0, 2*pi) these are the integers (0, 1, ..., N/2-1, -N/2, ..., -1);
    other intervals scale them by 2*pi/(b - a).
    """
    if n <= 0 or n % 2:
        raise ValueError(f"axis size must be even and positive, got {n}")
    a, b = interval
    return np.fft.fftfreq(n, d=1.0 / n) * (2.0 * np.pi / (b - a))


def _axis_view(grid: Grid, axis: int, values: np.ndarray) -> np.ndarray:
    """Reshape a per-axis array for broadcasting over the mode grid."""
    shape = [1] * grid.dims
    shape[axis] = grid.sizes[axis]
    return values.reshape(shape)


def diff_symbol(p: int, axis: int, grid: Grid) -> np.ndarray:
    """Diagonal symbol of d^p/dx_axis^p over the full mode grid.

    Even p yields a real array, odd p an imaginary complex array with the
    Nyquist mode zeroed (its derivative sign is ambiguous on an even grid;
    zeroing keeps real fields real).  Powers are built by squaring the
    same scaled-wavenumber intermediate, so diff_symbol(2)**2 equals
    diff_symbol(4) entrywise exactly.
    """
    if p not in (1, 2, 3, 4):
        raise ValueError(f"derivative order must be 1..4, got {p}")
    k = grid.wavenumbers(axis)
    k2 = k * k
    if p == 1:
        sym = 1j * k
    elif p == 2:
        sym = -k2
    elif p == 3:
        sym = -1j * (k2 * k)
    else:
        sym = k2 * k2
    if p % 2:
        sym = sym.copy()
        sym[grid.sizes[axis] // 2] = 0.0
    per_axis = _axis_view(grid, axis, sym)
    if grid.dims == 1:
        return per_axis.reshape(grid.sizes)
    return np.broadcast_to(per_axis, grid.shape).copy()


def laplacian_symbol(grid: Grid) -> np.ndarray:
    """Symbol of the Laplacian: broadcast sum of the per-axis -k^2 arrays."""
    out = diff_symbol(2, 0, grid)
    for axis in range(1, grid.dims):
        out = out + diff_symbol(2, axis, grid)
    return out


# ---------------------------------------------------------------------------
# transforms

_FFT_COUNTER: contextvars.ContextVar = contextvars.ContextVar("fft_counter", default=None)


def install_fft_counter() -> tuple:
    """Start counting whole-field transforms in this execution context.

    Returns (cell, token): cell[0] accumulates the count; pass the token
    to remove_fft_counter when done.  Counters are context-local, so
    concurrent integrations in different threads do not share counts.
    """
    cell = [0]
    token = _FFT_COUNTER.set(cell)
    return cell, token


def remove_fft_counter(token) -> None:
    _FFT_COUNTER.reset(token)


def fft_counter() -> Optional[list]:
    return _FFT_COUNTER.get()


def _count_fft() -> None:
    cell = _FFT_COUNTER.get()
    if cell is not None:
        cell[0] += 1


def _grid_axes(grid: Grid) -> tuple:
    return tuple(range(-grid.dims, 0))


def to_coeffs(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Forward transform over the trailing grid axes, scaled by 1/npoints.

    Leading axes (e.g. a component axis) are preserved.
    """
    values = np.asarray(values)
    if values.shape[-grid.dims:] != grid.shape:
        raise ValueError(f"field shape {values.shape} does not end in {grid.shape}")
    _count_fft()
    return np.fft.fftn(values, axes=_grid_axes(grid), norm="forward")


def to_values(coeffs: np.ndarray, grid: Grid, real: bool = False) -> np.ndarray:
    """Inverse transform over the trailing grid axes (unscaled).

    With real=True the imaginary residue is dropped, which is exact for
    coefficient arrays with Hermitian symmetry (real-valued fields).
    """
    coeffs = np.asarray(coeffs)
    if coeffs.shape[-grid.dims:] != grid.shape:
        raise ValueError(f"coefficient shape {coeffs.shape} does not end in {grid.shape}")
    _count_fft()
    out = np.fft.ifftn(coeffs, axes=_grid_axes(grid), norm="forward")
    return out.real if real else out


# ---------------------------------------------------------------------------
# nonlinear evaluation


@dataclass(frozen=True)
class NonlinearOp:
    """Value-space pointwise map with an optional diagonal outer symbol.

    func maps the (components, *grid.shape) value array to an array of the
    same shape; outer, when present, multiplies the transformed result in
    coefficient space (e.g. the -D/2 factor of an advective nonlinearity
    -u u_x = -(1/2)(u^2)_x).  real_values evaluates func on the real part,
    appropriate for real-valued problems.
    """

    func: Callable[[np.ndarray], np.ndarray]
    outer: Optional[np.ndarray] = None
    real_values: bool = False


def apply_nonlinear(coeffs: np.ndarray, op: NonlinearOp, grid: Grid) -> np.ndarray:
    """Evaluate F(N(F^{-1} coeffs)): transform to value space, apply the
    pointwise map, transform back, then apply the outer symbol if any."""
    values = to_values(coeffs, grid, real=op.real_values)
    out = to_coeffs(np.asarray(op.func(values)), grid)
    if op.outer is not None:
        out = out * op.outer
    return out
