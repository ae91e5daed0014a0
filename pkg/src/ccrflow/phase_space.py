"""Measure algebra on the phase plane.

The phase plane R^2 carries the symplectic form

    omega((x, y), (x', y')) = (x'y - xy') / 2,

and finite measures on it form an algebra under convolution.  The
symplectic Fourier transform

    mu_hat(zeta) = integral of exp(i*omega(zeta, z)) dmu(z)

turns convolution into pointwise multiplication and sends the Gaussian
family onto the heat multipliers exp(-t*|zeta|^2).  Everything here is
discretized on uniform square grids: a measure is a table of complex
cell weights, a function a table of complex samples, and the transform
a plain (factorized) sum over cells, so no FFT periodicity artifacts
enter unless a routine explicitly opts in.

Grid convention: a ``GridSpec`` with half-width L and M points per axis
places nodes at -L + k*h for k = 0..M-1 with h = 2L/M, covering
[-L, L)^2.  M is even, so the origin is always a node.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import signal

__all__ = [
    "PhasePoint",
    "GridSpec",
    "GridMeasure",
    "SampledFunction",
    "omega",
    "symplectic_ft",
    "convolve",
    "total_variation",
    "gaussian_measure",
    "cauchy_measure",
    "plateau_bump",
    "band_limited_approximant",
    "sqrt_density_ft_profile",
    "measure_from_atoms",
    "point_mass",
    "gaussian_density",
    "save_measure",
    "load_measure",
    "save_function",
    "load_function",
]

#: Nyquist-style guard: a transform onto a dual grid of half-width R is
#: only allowed when h * R <= ALIAS_GUARD, which keeps the sampled phase
#: exp(i*omega(zeta, z)) well below the lattice Nyquist rate.
ALIAS_GUARD = math.pi / 2

_GAUSSIAN_CAPTURE = 1e-9


@dataclass(frozen=True)
class PhasePoint:
    """A point z = (x, y) of the phase plane."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("phase point coordinates must be finite")

    @property
    def norm_sq(self) -> float:
        return self.x * self.x + self.y * self.y

    @property
    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


def _coords(z) -> tuple[float, float]:
    if isinstance(z, PhasePoint):
        return z.x, z.y
    x, y = z
    return float(x), float(y)


def omega(z1, z2) -> float:
    """Symplectic form omega(z1, z2) = (x2*y1 - x1*y2) / 2.

    Accepts ``PhasePoint`` or any (x, y) pair.  Bilinear, antisymmetric,
    and normalized so that omega((1, 0), (0, 1)) = -1/2.
    """
    x1, y1 = _coords(z1)
    x2, y2 = _coords(z2)
    return 0.5 * (x2 * y1 - x1 * y2)


@dataclass(frozen=True)
class GridSpec:
    """Uniform square grid over [-L, L)^2 with M nodes per axis (M even)."""

    half_width: float
    points_per_axis: int

    def __post_init__(self) -> None:
        if not (self.half_width > 0 and math.isfinite(self.half_width)):
            raise ValueError("grid half-width must be positive and finite")
        m = self.points_per_axis
        if not isinstance(m, (int, np.integer)) or m < 2 or m % 2 != 0:
            raise ValueError("points_per_axis must be an even integer >= 2")

    @property
    def h(self) -> float:
        """Node spacing 2L/M."""
        return 2.0 * self.half_width / self.points_per_axis

    def axis(self) -> np.ndarray:
        return -self.half_width + self.h * np.arange(self.points_per_axis)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """(X, Y) node coordinates with x varying along axis 0."""
        ax = self.axis()
        return np.meshgrid(ax, ax, indexing="ij")

    def cell_area(self) -> float:
        return self.h * self.h

    def index_of(self, z, tol: float = 1e-9) -> tuple[int, int]:
        """Indices of the node at z; z must sit on a node within tol."""
        x, y = _coords(z)
        ix = (x + self.half_width) / self.h
        iy = (y + self.half_width) / self.h
        i, j = round(ix), round(iy)
        if abs(ix - i) > tol or abs(iy - j) > tol:
            raise ValueError(f"point ({x}, {y}) is not a grid node")
        if not (0 <= i < self.points_per_axis and 0 <= j < self.points_per_axis):
            raise ValueError(f"point ({x}, {y}) lies outside the grid")
        return i, j

    def compatible_with(self, other: "GridSpec", tol: float = 1e-12) -> bool:
        return abs(self.h - other.h) <= tol * max(self.h, other.h)


def _check_table(grid: GridSpec, table: np.ndarray, what: str) -> np.ndarray:
    arr = np.asarray(table, dtype=complex)
    m = grid.points_per_axis
    if arr.shape != (m, m):
        raise ValueError(f"{what} must have shape ({m}, {m}), got {arr.shape}")
    return arr


@dataclass
class GridMeasure:
    """Complex measure as cell weights on a grid: weights[i, j] is the mass
    attached to the node (x_i, y_j)."""

    grid: GridSpec
    weights: np.ndarray

    def __post_init__(self) -> None:
        self.weights = _check_table(self.grid, self.weights, "weights")

    def total_variation(self) -> float:
        return float(np.abs(self.weights).sum())

    def total_mass(self) -> complex:
        return complex(self.weights.sum())

    def is_probability(self, tol: float = 1e-9) -> bool:
        w = self.weights
        return bool(
            np.all(w.imag == 0.0)
            and np.all(w.real >= -tol)
            and abs(w.real.sum() - 1.0) <= tol
        )

    def _binop(self, other: "GridMeasure", sign: float) -> "GridMeasure":
        if self.grid != other.grid:
            raise ValueError("measures live on different grids")
        return GridMeasure(self.grid, self.weights + sign * other.weights)

    def __add__(self, other: "GridMeasure") -> "GridMeasure":
        return self._binop(other, 1.0)

    def __sub__(self, other: "GridMeasure") -> "GridMeasure":
        return self._binop(other, -1.0)

    def scaled(self, c: complex) -> "GridMeasure":
        return GridMeasure(self.grid, c * self.weights)


@dataclass
class SampledFunction:
    """Complex function sampled on grid nodes: values[i, j] = f(x_i, y_j)."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = _check_table(self.grid, self.values, "values")

    def at(self, z) -> complex:
        i, j = self.grid.index_of(z)
        return complex(self.values[i, j])

    def sup_norm(self) -> float:
        return float(np.abs(self.values).max())


def total_variation(mu: GridMeasure) -> float:
    """Total-variation norm: the sum of |weight| over all cells."""
    return mu.total_variation()


def measure_from_atoms(
    grid: GridSpec, atoms: Iterable[tuple[object, complex]]
) -> GridMeasure:
    """Atomic measure from (point, weight) pairs; points must be grid nodes."""
    w = np.zeros((grid.points_per_axis, grid.points_per_axis), dtype=complex)
    for z, c in atoms:
        i, j = grid.index_of(z)
        w[i, j] += c
    return GridMeasure(grid, w)


def point_mass(grid: GridSpec, z=(0.0, 0.0), weight: complex = 1.0) -> GridMeasure:
    return measure_from_atoms(grid, [(z, weight)])


# ---------------------------------------------------------------------------
# Symplectic Fourier transform
# ---------------------------------------------------------------------------

def _check_alias_guard(src: GridSpec, dual: GridSpec) -> None:
    if src.h * dual.half_width > ALIAS_GUARD * (1 + 1e-12):
        raise ValueError(
            "dual grid would alias the measure: need h * dual_half_width "
            f"<= pi/2, got {src.h * dual.half_width:.6g}"
        )


def symplectic_ft(mu: GridMeasure, dual: GridSpec) -> SampledFunction:
    """Symplectic Fourier transform of a grid measure.

    Returns zeta -> sum over cells of exp(i*omega(zeta, z)) * weight(z),
    sampled on the dual grid.  The phase factorizes over axes,

        exp(i*omega(zeta, z)) = exp(i*x*b/2) * exp(-i*a*y/2),
        zeta = (a, b), z = (x, y),

    so the double sum is evaluated as two dense matrix products, exactly
    (no periodization, no interpolation).  Rejects dual grids wide enough
    to push the sampled phase past the Nyquist guard.
    """
    _check_alias_guard(mu.grid, dual)
    src_ax = mu.grid.axis()
    dual_ax = dual.axis()
    # T1[x, a] = sum_y exp(-i*a*y/2) * w[x, y]
    e_ay = np.exp(-0.5j * np.outer(src_ax, dual_ax))  # [y, a]
    t1 = mu.weights @ e_ay
    # F[a, b] = sum_x exp(i*x*b/2) * T1[x, a]
    e_xb = np.exp(0.5j * np.outer(src_ax, dual_ax))  # [x, b]
    values = t1.T @ e_xb
    return SampledFunction(dual, values)


def symplectic_ft_at(mu: GridMeasure, points: np.ndarray) -> np.ndarray:
    """Transform of ``mu`` at arbitrary dual points, shape (P, 2) -> (P,)."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    x = mu.grid.axis()
    # phase[p, i, j] = exp(i*(x_i*b_p - a_p*y_j)/2); factorize per point
    ex = np.exp(0.5j * np.outer(pts[:, 1], x))  # [p, x]
    ey = np.exp(-0.5j * np.outer(pts[:, 0], x))  # [p, y]
    return np.einsum("pi,ij,pj->p", ex, mu.weights, ey, optimize=True)


def _centered_dft(values: np.ndarray, axis: int, sign: int) -> np.ndarray:
    """DFT with both index sets centered at M/2.

    Computes out[a] = sum_b exp(sign * 2j*pi*(a - M/2)*(b - M/2)/M) v[b]
    along ``axis``.  Requires M divisible by 4 so the constant phase
    i**(sign*M) collapses to 1.
    """
    m = values.shape[axis]
    if m % 4 != 0:
        raise ValueError("centered DFT requires M divisible by 4")
    shape = [1] * values.ndim
    shape[axis] = m
    alt = ((-1.0) ** np.arange(m)).reshape(shape)
    if sign < 0:
        core = np.fft.fft(values * alt, axis=axis)
    else:
        core = np.fft.ifft(values * alt, axis=axis) * m
    return alt * core


def inverse_symplectic_lattice(
    dual_values: np.ndarray, grid: GridSpec
) -> np.ndarray:
    """Inverse symplectic transform from the conjugate lattice onto ``grid``.

    The conjugate lattice of a grid with spacing h and M nodes per axis is
    the grid with spacing eta = 4*pi/(M*h); on that pairing the kernel
    exp(-i*omega(zeta, z)) reduces to a pair of centered DFTs.  Input and
    output are (M, M) tables; the result approximates

        f(z) = (1/(16*pi^2)) * integral exp(-i*omega(zeta, z)) F(zeta) dzeta.
    """
    m = grid.points_per_axis
    eta = 4.0 * math.pi / (m * grid.h)
    # f[ax, ay] = sum_{bx, by} F[bx, by] e^{-i x(ax) zeta_y(by)/2} e^{+i zeta_x(bx) y(ay)/2}
    # x(a)*eta*(b - M/2)/2 = (2*pi/M)(a - M/2)(b - M/2): centered DFT pairs.
    t = _centered_dft(dual_values, axis=1, sign=-1)  # contracts by -> index ax
    out = _centered_dft(t, axis=0, sign=+1)  # contracts bx -> index ay
    # after the two passes axes are (ax from old axis 1, ay from old axis 0)
    return out.T * (eta * eta / (16.0 * math.pi**2))


def conjugate_lattice(grid: GridSpec) -> GridSpec:
    """Dual grid on which the symplectic kernel is exactly DFT-resolved."""
    m = grid.points_per_axis
    eta = 4.0 * math.pi / (m * grid.h)
    return GridSpec(half_width=eta * m / 2.0, points_per_axis=m)


# ---------------------------------------------------------------------------
# Convolution
# ---------------------------------------------------------------------------

def convolve(
    mu: GridMeasure, nu: GridMeasure, out: GridSpec | None = None
) -> GridMeasure:
    """Convolution of two grid measures by exact cell-index summation.

    Node sums land on nodes again because both grids share the spacing h,
    so the full linear convolution of the weight tables is exact at grid
    scale; there is no circular wraparound.  By default the result lives
    on the enlarged grid of half-width L1 + L2.  If ``out`` is given the
    result is cropped onto it, and any weight that would fall outside is
    a support-overflow error rather than a silent loss.
    """
    if not mu.grid.compatible_with(nu.grid):
        raise ValueError("convolution requires equal grid spacings")
    h = mu.grid.h
    m1, m2 = mu.grid.points_per_axis, nu.grid.points_per_axis
    full = signal.convolve(mu.weights, nu.weights, mode="full", method="auto")
    # index k <-> coordinate -(L1+L2) + k*h, k = 0..m1+m2-2; pad to even M.
    m_out = m1 + m2
    big = GridSpec(half_width=mu.grid.half_width + nu.grid.half_width,
                   points_per_axis=m_out)
    weights = np.zeros((m_out, m_out), dtype=complex)
    weights[: m1 + m2 - 1, : m1 + m2 - 1] = full
    result = GridMeasure(big, weights)
    if out is None:
        return result
    if not out.compatible_with(mu.grid):
        raise ValueError("output grid spacing differs from operand spacing")
    cropped = np.zeros((out.points_per_axis, out.points_per_axis), dtype=complex)
    offset = (big.half_width - out.half_width) / h
    shift = round(offset)
    if abs(offset - shift) > 1e-9:
        raise ValueError("output grid nodes do not align with the convolution grid")
    lo, hi = shift, shift + out.points_per_axis
    if lo < 0:
        raise ValueError("output grid is larger than the convolution support")
    tol = 1e-15 * max(result.total_variation(), 1.0)
    outside = result.total_variation() - float(
        np.abs(weights[lo:hi, lo:hi]).sum()
    )
    if outside > tol:
        raise ValueError(
            f"convolution support overflows the output grid by mass {outside:.3g}"
        )
    cropped[:, :] = weights[lo:hi, lo:hi]
    return GridMeasure(out, cropped)


# ---------------------------------------------------------------------------
# Measure families
# ---------------------------------------------------------------------------

def gaussian_density(t: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Density of the heat-flow Gaussian at time t > 0.

    Normalized so the symplectic transform is exp(-t*|zeta|^2); with the
    half-angle kernel this forces

        u_t(z) = exp(-|z|^2 / (16 t)) / (16 pi t).
    """
    return np.exp(-(x * x + y * y) / (16.0 * t)) / (16.0 * math.pi * t)


def gaussian_measure(
    t: float, grid: GridSpec, capture_tol: float = _GAUSSIAN_CAPTURE
) -> GridMeasure:
    """Midpoint-sampled heat Gaussian, renormalized to unit mass.

    Rejects grids that truncate more than ``capture_tol`` of the mass
    (radial tail exp(-L^2/(16t)) plus quadrature defect).
    """
    if not t > 0:
        raise ValueError("gaussian measure requires t > 0")
    x, y = grid.mesh()
    w = gaussian_density(t, x, y) * grid.cell_area()
    captured = float(w.sum())
    if captured < 1.0 - capture_tol:
        raise ValueError(
            f"grid captures mass {captured:.12f} < 1 - {capture_tol:g}; widen it"
        )
    return GridMeasure(grid, (w / captured).astype(complex))


def default_gaussian_grid(
    t: float,
    dual_extent: float = 4.0,
    capture_tol: float = _GAUSSIAN_CAPTURE,
) -> GridSpec:
    """A grid wide enough to capture the time-t Gaussian and fine enough to
    transform onto duals of half-width ``dual_extent``."""
    radius = math.sqrt(16.0 * t * math.log(1.0 / capture_tol)) * 1.02
    sigma = math.sqrt(8.0 * t)
    h_max = min(ALIAS_GUARD / dual_extent * 0.75, sigma / 3.0)
    m = int(math.ceil(2.0 * radius / h_max / 2.0) * 2)
    return GridSpec(half_width=radius, points_per_axis=m)


def cauchy_measure(
    t: float, grid: GridSpec, max_deficit: float = 1e-2
) -> GridMeasure:
    """Product-Cauchy measure whose transform is exp(-t*(|a| + |b|)).

    The half-angle in the kernel doubles the scale: each axis carries a
    one-dimensional Cauchy density with scale 2t, integrated exactly over
    cells via arctan differences.  Heavy tails make perfect capture
    impossible on a finite grid, so the un-renormalized deficit is checked
    against ``max_deficit`` and the kept mass is rescaled to 1.
    """
    if not t > 0:
        raise ValueError("cauchy measure requires t > 0")
    gamma = 2.0 * t
    ax = grid.axis()
    hi = (ax + grid.h / 2.0) / gamma
    lo = (ax - grid.h / 2.0) / gamma
    cell = (np.arctan(hi) - np.arctan(lo)) / math.pi
    w = np.outer(cell, cell)
    captured = float(w.sum())
    if 1.0 - captured > max_deficit:
        raise ValueError(
            f"cauchy tails leave mass deficit {1.0 - captured:.3g} > "
            f"{max_deficit:g}; widen the grid"
        )
    return GridMeasure(grid, (w / captured).astype(complex))


# ---------------------------------------------------------------------------
# Plateau bump and the band-limited approximant
# ---------------------------------------------------------------------------

def _bump_profile(s: np.ndarray) -> np.ndarray:
    """Standard C-infinity bump on [0, 1), zero outside."""
    out = np.zeros_like(s, dtype=float)
    inside = np.abs(s) < 1.0
    si = s[inside]
    out[inside] = np.exp(-1.0 / (1.0 - si * si))
    return out


def plateau_profile(delta: float, n_quad: int = 512) -> Callable[[np.ndarray], np.ndarray]:
    """Radial profile G with G = 1 on r <= delta/4 and G = 0 on r >= delta/2.

    G is the disk indicator of radius 3*delta/8 convolved with a radial
    bump mollifier of radius delta/16.  For a probe at distance r, the
    mollifier ring of radius s contributes the fraction of its circumference
    lying inside the disk, which is an explicit arccos, so the convolution
    collapses to a single radial quadrature.  The plateau conditions hold
    exactly (with margin delta/16 on each side) because the mollifier mass
    is normalized by the same quadrature rule.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    disk_r = 3.0 * delta / 8.0
    moll_r = delta / 16.0
    s = (np.arange(n_quad) + 0.5) * (moll_r / n_quad)
    ring = _bump_profile(s / moll_r) * 2.0 * math.pi * s
    norm = ring.sum()

    def profile(r: np.ndarray) -> np.ndarray:
        r = np.atleast_1d(np.asarray(r, dtype=float))
        vals = np.where(r <= disk_r - moll_r, 1.0, 0.0)
        # only the transition annulus needs the quadrature; the clamps above
        # realize the exact plateau and exact vanishing
        band = (r > disk_r - moll_r) & (r < disk_r + moll_r)
        if band.any():
            rr = r[band][:, None]
            ss = s[None, :]
            cosang = (rr * rr + ss * ss - disk_r * disk_r) / (2.0 * rr * ss)
            frac = np.arccos(np.clip(cosang, -1.0, 1.0)) / math.pi
            vals[band] = (ring[None, :] * frac).sum(axis=1) / norm
        return vals

    return profile


def plateau_bump(delta: float, dual: GridSpec) -> SampledFunction:
    """Smooth radial bump g_hat with g_hat = 1 on |zeta| <= delta/4,
    g_hat = 0 on |zeta| >= delta/2, and 0 <= g_hat <= 1 throughout.

    Requires dual resolution finer than delta/16, the mollifier radius.
    """
    if dual.h >= delta / 16.0 * (1 + 1e-12):
        raise ValueError("dual grid must resolve delta/16")
    profile = plateau_profile(delta)
    x, y = dual.mesh()
    r = np.hypot(x, y)
    values = profile(r.ravel()).reshape(r.shape)
    return SampledFunction(dual, values.astype(complex))


def sqrt_density_ft(t: float, dual_points_r: np.ndarray) -> np.ndarray:
    """Closed form for the transform of sqrt(gaussian density):
    8*sqrt(pi*t) * exp(-2*t*r^2)."""
    return 8.0 * math.sqrt(math.pi * t) * np.exp(-2.0 * t * dual_points_r**2)


def sqrt_density_ft_profile(t: float, dual: GridSpec) -> SampledFunction:
    """Symplectic transform of f_t = sqrt(heat Gaussian density), computed by
    honest grid quadrature (not from the closed form, which tests pin it to).

    The square root halves the exponent rate, so f_t needs a grid roughly
    sqrt(2) wider than the Gaussian itself; the internal grid is sized for
    absolute accuracy around 1e-9 relative to the peak 8*sqrt(pi*t).
    """
    if not t > 0:
        raise ValueError("profile requires t > 0")
    radius = math.sqrt(32.0 * t * (math.log(1e12) + math.log(1 + 8 * math.sqrt(math.pi * t))))
    h_max = min(ALIAS_GUARD / max(dual.half_width, 1e-9) * 0.75,
                math.sqrt(16.0 * t) / 3.0)
    m = int(math.ceil(2.0 * radius / h_max / 2.0) * 2)
    grid = GridSpec(half_width=radius, points_per_axis=m)
    x, y = grid.mesh()
    f = np.sqrt(gaussian_density(t, x, y)) * grid.cell_area()
    return symplectic_ft(GridMeasure(grid, f.astype(complex)), dual)


def band_limited_approximant(
    t: float, delta: float, grid: GridSpec
) -> GridMeasure:
    """Probability measure close to the time-t Gaussian whose transform is
    supported in the disk |zeta| <= delta.

    Construction: q_hat = (plateau bump) * (transform of f_t) on the
    conjugate lattice of ``grid``; q = inverse transform of q_hat; the
    measure has cell weights h^2*|q|^2, rescaled to unit mass.  Since
    q_hat vanishes outside |zeta| <= 7*delta/16, the measure's transform
    is a lattice autocorrelation supported inside |zeta| <= 7*delta/8,
    strictly inside the delta disk; off-lattice leakage is bounded by the
    (tiny) mass of q*q-bar beyond the grid edge.

    As t grows the measure tracks the Gaussian: total_variation of the
    difference decays once t*delta^2 is large.
    """
    if not t > 0:
        raise ValueError("approximant requires t > 0")
    if not delta > 0:
        raise ValueError("approximant requires delta > 0")
    lattice = conjugate_lattice(grid)
    eta = lattice.h
    if eta >= delta / 16.0 * (1 + 1e-12):
        raise ValueError(
            "grid too small: conjugate lattice spacing "
            f"{eta:.4g} must resolve delta/16 = {delta / 16.0:.4g}"
        )
    ghat = plateau_bump(delta, lattice)
    zx, zy = lattice.mesh()
    r = np.hypot(zx, zy)
    qhat = ghat.values * sqrt_density_ft(t, r)
    q = inverse_symplectic_lattice(qhat, grid)
    w = np.abs(q) ** 2 * grid.cell_area()
    return GridMeasure(grid, (w / w.sum()).astype(complex))


def default_lemma_grid(delta: float) -> GridSpec:
    """Grid sized so the approximant's off-lattice transform leakage sits
    far below 1e-6 for t up to ~16 at the given delta."""
    half_width = max(200.0, 64.0 * math.pi / delta)
    m = int(math.ceil(half_width / 0.25 / 4.0) * 4)
    return GridSpec(half_width=half_width, points_per_axis=m)


# ---------------------------------------------------------------------------
# Serialization: CSV tables with a JSON sidecar header
# ---------------------------------------------------------------------------

def _write_table_csv(path: Path, grid: GridSpec, table: np.ndarray) -> None:
    x, y = grid.mesh()
    with path.open("w", encoding="utf-8") as fh:
        fh.write("x,y,re,im\n")
        for xi, yi, v in zip(x.ravel(), y.ravel(), table.ravel()):
            fh.write(f"{xi:.17g},{yi:.17g},{v.real:.17g},{v.imag:.17g}\n")


def _read_table_csv(path: Path, grid: GridSpec) -> np.ndarray:
    m = grid.points_per_axis
    table = np.empty((m, m), dtype=complex)
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "x,y,re,im":
            raise ValueError(f"unexpected CSV header {header!r}")
        flat = table.ravel()
        for k, line in enumerate(fh):
            _, _, re, im = line.rstrip("\n").split(",")
            flat[k] = complex(float(re), float(im))
        if k != m * m - 1:
            raise ValueError("CSV row count does not match the grid")
    return table


def _grid_header(grid: GridSpec, kind: str, extra: dict | None = None) -> dict:
    header = {
        "kind": kind,
        "half_width": grid.half_width,
        "points_per_axis": grid.points_per_axis,
    }
    if extra:
        header.update(extra)
    return header


def _save_tagged(
    base: str | Path, grid: GridSpec, table: np.ndarray, kind: str,
    extra: dict | None = None,
) -> None:
    base = Path(base)
    base.parent.mkdir(parents=True, exist_ok=True)
    with base.with_suffix(".json").open("w", encoding="utf-8") as fh:
        json.dump(_grid_header(grid, kind, extra), fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_table_csv(base.with_suffix(".csv"), grid, table)


def _load_tagged(base: str | Path, kind: str) -> tuple[GridSpec, np.ndarray, dict]:
    base = Path(base)
    with base.with_suffix(".json").open("r", encoding="utf-8") as fh:
        header = json.load(fh)
    if header.get("kind") != kind:
        raise ValueError(f"expected a {kind} artifact, got {header.get('kind')!r}")
    grid = GridSpec(header["half_width"], int(header["points_per_axis"]))
    return grid, _read_table_csv(base.with_suffix(".csv"), grid), header


def save_measure(mu: GridMeasure, base: str | Path) -> None:
    _save_tagged(base, mu.grid, mu.weights, "grid_measure")


def load_measure(base: str | Path) -> GridMeasure:
    grid, table, _ = _load_tagged(base, "grid_measure")
    return GridMeasure(grid, table)


def save_function(fn: SampledFunction, base: str | Path, extra: dict | None = None) -> None:
    _save_tagged(base, fn.grid, fn.values, "sampled_function", extra)


def load_function(base: str | Path) -> SampledFunction:
    grid, table, _ = _load_tagged(base, "sampled_function")
    return SampledFunction(grid, table)
