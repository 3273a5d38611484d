"""
Periodic grids and scalar fields with declared parity.

All spatial operations in the package run on a uniform periodic box
[-Lx, Lx) x [-Ly, Ly) with power-of-two point counts, so that Fourier
differentiation, antidifferentiation and dealiased products are exact for
band-limited data.  Fields are immutable after construction; every operation
is a pure function returning a new field.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import fft as sfft

from .errors import GridMismatch, NonZeroMean, SymmetryViolation

SYMMETRY_TOL = 1e-10
ZERO_MEAN_TOL = 1e-8


class Symmetry(str, enum.Enum):
    """Parity class of a real field: parity in x crossed with parity in y.

    ``NONE`` means untagged; the other members assert f(-x,y) = +/- f(x,y)
    and f(x,-y) = +/- f(x,y) pointwise on the grid.
    """

    NONE = "none"
    ODD_X_EVEN_Y = "odd_x_even_y"
    EVEN_X_EVEN_Y = "even_x_even_y"
    ODD_X_ODD_Y = "odd_x_odd_y"
    EVEN_X_ODD_Y = "even_x_odd_y"

    @property
    def x_parity(self) -> int:
        """+1 even, -1 odd, 0 untagged."""
        if self is Symmetry.NONE:
            return 0
        return -1 if self.value.startswith("odd_x") else 1

    @property
    def y_parity(self) -> int:
        if self is Symmetry.NONE:
            return 0
        return -1 if self.value.endswith("odd_y") else 1

    @staticmethod
    def from_parities(px: int, py: int) -> "Symmetry":
        if px == 0 or py == 0:
            return Symmetry.NONE
        x = "odd_x" if px < 0 else "even_x"
        y = "odd_y" if py < 0 else "even_y"
        return Symmetry(f"{x}_{y}")

    def flip_x(self) -> "Symmetry":
        return Symmetry.from_parities(-self.x_parity, self.y_parity)

    def flip_y(self) -> "Symmetry":
        return Symmetry.from_parities(self.x_parity, -self.y_parity)

    def product(self, other: "Symmetry") -> "Symmetry":
        return Symmetry.from_parities(
            self.x_parity * other.x_parity, self.y_parity * other.y_parity
        )


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid2D:
    """Uniform periodic grid on [-Lx, Lx) x [-Ly, Ly).

    Points are x_j = -Lx + j*(2Lx/nx), y_k = -Ly + k*(2Ly/ny); the matching
    wavenumbers are xi1 = pi*m/Lx and xi2 = pi*n/Ly in standard FFT ordering.
    """

    nx: int
    ny: int
    Lx: float
    Ly: float

    def __post_init__(self):
        if not (_is_power_of_two(self.nx) and self.nx >= 16):
            raise ValueError(f"nx must be a power of two >= 16, got {self.nx}")
        if not (_is_power_of_two(self.ny) and self.ny >= 16):
            raise ValueError(f"ny must be a power of two >= 16, got {self.ny}")
        if not (self.Lx > 0 and self.Ly > 0):
            raise ValueError("half-widths Lx, Ly must be positive")

    @cached_property
    def dx(self) -> float:
        return 2.0 * self.Lx / self.nx

    @cached_property
    def dy(self) -> float:
        return 2.0 * self.Ly / self.ny

    @cached_property
    def x(self) -> np.ndarray:
        return -self.Lx + self.dx * np.arange(self.nx)

    @cached_property
    def y(self) -> np.ndarray:
        return -self.Ly + self.dy * np.arange(self.ny)

    @cached_property
    def X(self) -> np.ndarray:
        """x coordinate broadcast to shape (nx, ny)."""
        return np.broadcast_to(self.x[:, None], (self.nx, self.ny))

    @cached_property
    def Y(self) -> np.ndarray:
        return np.broadcast_to(self.y[None, :], (self.nx, self.ny))

    @cached_property
    def r(self) -> np.ndarray:
        return np.hypot(self.X, self.Y)

    @cached_property
    def kx(self) -> np.ndarray:
        """Wavenumbers pi*m/Lx along axis 0, full FFT ordering."""
        return 2.0 * np.pi * np.fft.fftfreq(self.nx, d=self.dx)

    @cached_property
    def ky_r(self) -> np.ndarray:
        """Wavenumbers pi*n/Ly along axis 1, rfft ordering."""
        return 2.0 * np.pi * np.fft.rfftfreq(self.ny, d=self.dy)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask in rfft layout (nx, ny//2+1)."""
        mx = np.abs(np.fft.fftfreq(self.nx) * self.nx) <= self.nx // 3
        my = np.arange(self.ny // 2 + 1) <= self.ny // 3
        return mx[:, None] & my[None, :]

    @cached_property
    def _reflect_x(self) -> np.ndarray:
        return (-np.arange(self.nx)) % self.nx

    @cached_property
    def _reflect_y(self) -> np.ndarray:
        return (-np.arange(self.ny)) % self.ny

    def same_as(self, other: "Grid2D") -> bool:
        return (
            self.nx == other.nx
            and self.ny == other.ny
            and self.Lx == other.Lx
            and self.Ly == other.Ly
        )


def make_grid(nx: int, ny: int, Lx: float, Ly: float) -> Grid2D:
    """Build a periodic grid; rejects non-power-of-two sizes and Lx,Ly <= 0."""
    return Grid2D(nx=nx, ny=ny, Lx=float(Lx), Ly=float(Ly))


def _symmetry_defect(grid: Grid2D, values: np.ndarray, symmetry: Symmetry) -> float:
    """Max relative deviation of ``values`` from its declared parity."""
    scale = float(np.max(np.abs(values)))
    if scale == 0.0:
        return 0.0
    worst = 0.0
    if symmetry.x_parity != 0:
        refl = values[grid._reflect_x, :]
        worst = max(worst, float(np.max(np.abs(refl - symmetry.x_parity * values))))
    if symmetry.y_parity != 0:
        refl = values[:, grid._reflect_y]
        worst = max(worst, float(np.max(np.abs(refl - symmetry.y_parity * values))))
    return worst / scale


@dataclass(frozen=True)
class RealField2D:
    """A real scalar field sampled on a :class:`Grid2D`.

    The symmetry tag, when not NONE, is validated against the values at
    construction time (tolerance ``SYMMETRY_TOL`` relative), so parity
    bookkeeping errors surface at the operation that caused them.
    """

    grid: Grid2D
    values: np.ndarray = field(repr=False)
    symmetry: Symmetry = Symmetry.NONE

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (self.grid.nx, self.grid.ny):
            raise ValueError(
                f"values shape {vals.shape} does not match grid "
                f"({self.grid.nx}, {self.grid.ny})"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        vals = vals.copy()
        if self.symmetry is not Symmetry.NONE:
            defect = _symmetry_defect(self.grid, vals, self.symmetry)
            if defect > SYMMETRY_TOL:
                raise SymmetryViolation(
                    f"declared {self.symmetry.value} violated: relative defect "
                    f"{defect:.3e} > {SYMMETRY_TOL:.1e}"
                )
            # make the parity exact so downstream arithmetic stays exactly
            # symmetric even through cancellation-heavy differences
            if defect > 0.0:
                if self.symmetry.x_parity != 0:
                    vals = 0.5 * (vals + self.symmetry.x_parity * vals[self.grid._reflect_x, :])
                if self.symmetry.y_parity != 0:
                    vals = 0.5 * (vals + self.symmetry.y_parity * vals[:, self.grid._reflect_y])
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    # -- small arithmetic helpers (pointwise, tags tracked) -----------------
    def __add__(self, other: "RealField2D") -> "RealField2D":
        _check_same_grid(self, other)
        sym = self.symmetry if self.symmetry is other.symmetry else Symmetry.NONE
        return RealField2D(self.grid, self.values + other.values, sym)

    def __sub__(self, other: "RealField2D") -> "RealField2D":
        _check_same_grid(self, other)
        sym = self.symmetry if self.symmetry is other.symmetry else Symmetry.NONE
        return RealField2D(self.grid, self.values - other.values, sym)

    def scaled(self, c: float) -> "RealField2D":
        return RealField2D(self.grid, c * self.values, self.symmetry)

    def with_symmetry(self, symmetry: Symmetry) -> "RealField2D":
        """Re-tag (and validate) the same values under a new symmetry."""
        return RealField2D(self.grid, self.values, symmetry)


@dataclass(frozen=True)
class ComplexField2D:
    """Complex field stored as a (re, im) pair on a common grid."""

    re: RealField2D
    im: RealField2D

    def __post_init__(self):
        if not self.re.grid.same_as(self.im.grid):
            raise GridMismatch("re and im parts live on different grids")

    @property
    def grid(self) -> Grid2D:
        return self.re.grid


@dataclass(frozen=True)
class SpectralField2D:
    """Fourier coefficients c_mn under f(x,y) = sum c_mn e^{i(xi1 x + xi2 y)}.

    Stored in half-spectrum (rfft) layout; conjugate symmetry of the full
    spectrum is implied by the layout whenever the physical field is real.
    """

    grid: Grid2D
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        want = (self.grid.nx, self.grid.ny // 2 + 1)
        if self.coefficients.shape != want:
            raise ValueError(f"coefficient shape {self.coefficients.shape} != {want}")


def _check_same_grid(f: RealField2D, g: RealField2D) -> None:
    if not f.grid.same_as(g.grid):
        raise GridMismatch("fields are on different grids")


def _project_parity(grid: Grid2D, vals: np.ndarray, symmetry: Symmetry) -> np.ndarray:
    """Exact parity projection for operation outputs whose symmetry is known
    by algebra; removes transform roundoff before tag validation (high
    derivative orders amplify it past the declared tolerance)."""
    if symmetry.x_parity != 0:
        vals = 0.5 * (vals + symmetry.x_parity * vals[grid._reflect_x, :])
    if symmetry.y_parity != 0:
        vals = 0.5 * (vals + symmetry.y_parity * vals[:, grid._reflect_y])
    return vals


def to_spectral(f: RealField2D) -> SpectralField2D:
    coeffs = sfft.rfft2(f.values) / (f.grid.nx * f.grid.ny)
    return SpectralField2D(f.grid, coeffs)


def from_spectral(s: SpectralField2D, symmetry: Symmetry = Symmetry.NONE) -> RealField2D:
    vals = sfft.irfft2(s.coefficients * (s.grid.nx * s.grid.ny), s=(s.grid.nx, s.grid.ny))
    return RealField2D(s.grid, vals, symmetry)


def _spectral_hat(f: RealField2D) -> np.ndarray:
    """Unnormalized half-spectrum rfft2 of the values."""
    return sfft.rfft2(f.values)


def _inverse_hat(grid: Grid2D, hat: np.ndarray) -> np.ndarray:
    return sfft.irfft2(hat, s=(grid.nx, grid.ny))


def derivative(f: RealField2D, m: int, n: int) -> RealField2D:
    """Spectral partial derivative d^m/dx^m d^n/dy^n.

    Fourier coefficients are multiplied by (i xi1)^m (i xi2)^n; Nyquist rows
    are zeroed for odd orders so the result stays real-valued.  The symmetry
    tag flips x-parity m times and y-parity n times.
    """
    if not (0 <= m <= 4 and 0 <= n <= 4):
        raise ValueError("derivative orders must satisfy 0 <= m, n <= 4")
    if m == 0 and n == 0:
        return f
    grid = f.grid
    hat = _spectral_hat(f)
    if m:
        fx = (1j * grid.kx) ** m
        if m % 2 == 1:
            fx[grid.nx // 2] = 0.0
        hat = hat * fx[:, None]
    if n:
        fy = (1j * grid.ky_r) ** n
        if n % 2 == 1:
            fy[-1] = 0.0
        hat = hat * fy[None, :]
    sym = f.symmetry
    for _ in range(m):
        sym = sym.flip_x()
    for _ in range(n):
        sym = sym.flip_y()
    vals = _project_parity(grid, _inverse_hat(grid, hat), sym)
    return RealField2D(grid, vals, sym)


def x_line_means(f: RealField2D) -> np.ndarray:
    """Mean over x of every y-line, shape (ny,)."""
    return f.values.mean(axis=0)


def antiderivative_x(f: RealField2D, zero_mean_tol: float = ZERO_MEAN_TOL) -> RealField2D:
    """Zero-mode-free x-antiderivative: divide by (i xi1), drop the xi1 = 0 row.

    Requires zero x-mean on every y-line (relative to the field's sup), which
    holds automatically for odd-in-x data.  For integrands decaying in x this
    coincides with -int_x^inf f ds up to truncation error.
    """
    scale = float(np.max(np.abs(f.values)))
    if scale > 0.0:
        worst = float(np.max(np.abs(x_line_means(f))))
        if worst > zero_mean_tol * scale:
            raise NonZeroMean(
                f"x-line mean {worst:.3e} exceeds {zero_mean_tol:.1e} * sup"
            )
    grid = f.grid
    hat = _spectral_hat(f)
    inv = np.zeros_like(grid.kx, dtype=np.complex128)
    nz = grid.kx != 0.0
    inv[nz] = 1.0 / (1j * grid.kx[nz])
    inv[grid.nx // 2] = 0.0
    hat = hat * inv[:, None]
    sym = f.symmetry.flip_x()
    vals = _project_parity(grid, _inverse_hat(grid, hat), sym)
    return RealField2D(grid, vals, sym)


def dealias(f: RealField2D) -> RealField2D:
    """Truncate the spectrum with the 2/3 rule."""
    hat = _spectral_hat(f)
    hat *= f.grid.dealias_mask
    vals = _project_parity(f.grid, _inverse_hat(f.grid, hat), f.symmetry)
    return RealField2D(f.grid, vals, f.symmetry)


def product_dealiased(f: RealField2D, g: RealField2D) -> RealField2D:
    """Pointwise product with 2/3-rule truncation of each factor first.

    Nonlinearities in this package are at most cubic, so truncating the
    factors is enough to keep quadratic products alias-free on the grid.
    The symmetry tag is the parity product.
    """
    _check_same_grid(f, g)
    ft = dealias(f)
    gt = dealias(g)
    return RealField2D(f.grid, ft.values * gt.values, f.symmetry.product(g.symmetry))


def weighted_sup(f: RealField2D, p: float, delta: float) -> float:
    """sup over the grid of (1 + r)^(p - delta) |f|."""
    if p < 0:
        raise ValueError("p must be >= 0")
    if not (0 <= delta < 1):
        raise ValueError("delta must lie in [0, 1)")
    w = (1.0 + f.grid.r) ** (p - delta)
    return float(np.max(w * np.abs(f.values)))


def l2_norm(f: RealField2D) -> float:
    """sqrt(sum f^2 dx dy): the rectangle rule, exact for the periodic box."""
    return float(np.sqrt(np.sum(f.values**2) * f.grid.dx * f.grid.dy))


def inner(f: RealField2D, g: RealField2D) -> float:
    """L2 inner product with the grid measure."""
    _check_same_grid(f, g)
    return float(np.sum(f.values * g.values) * f.grid.dx * f.grid.dy)


def symmetrize(f: RealField2D, symmetry: Symmetry) -> RealField2D:
    """Orthogonal projection onto the given parity class."""
    vals = f.values
    grid = f.grid
    if symmetry.x_parity != 0:
        vals = 0.5 * (vals + symmetry.x_parity * vals[grid._reflect_x, :])
    if symmetry.y_parity != 0:
        vals = 0.5 * (vals + symmetry.y_parity * vals[:, grid._reflect_y])
    return RealField2D(grid, vals, symmetry)


def zeros(grid: Grid2D, symmetry: Symmetry = Symmetry.NONE) -> RealField2D:
    return RealField2D(grid, np.zeros((grid.nx, grid.ny)), symmetry)


def constant(grid: Grid2D, c: float) -> RealField2D:
    return RealField2D(
        grid, np.full((grid.nx, grid.ny), float(c)), Symmetry.EVEN_X_EVEN_Y
    )
