"""Truncated harmonic-oscillator operator core.

Everything acts on the span of the first ``N`` number states |0>, ..., |N-1>.
Operators are dense complex matrices in that basis.  The displacement
(Weyl) unitary ``W_z = exp(i(x Q + y P))`` is built by two independent
routes: a matrix exponential of the truncated generator (exactly unitary,
fast via a cached eigendecomposition of the position operator) and the
closed amplitude formula in the number basis (the top-left block of the
untruncated operator, exact entrywise but not unitary at truncation).
Their agreement on leading blocks is the internal consistency oracle.

Truncation discipline: the last rows and columns of the truncated ladder
operators are wrong by construction, so every quantitative claim in this
package is made on a leading sub-block or on low number states only.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

__all__ = [
    "FockOperator",
    "DensityOperator",
    "alpha_of",
    "annihilation",
    "position",
    "momentum",
    "weyl_generator",
    "weyl_operator",
    "displacement_batch",
    "trace_norm",
    "number_state",
    "coherent_state",
    "save_operator",
    "load_operator",
]


def _coords(z) -> tuple[float, float]:
    if hasattr(z, "x") and hasattr(z, "y"):
        return float(z.x), float(z.y)
    x, y = z
    return float(x), float(y)


def alpha_of(z) -> complex:
    """Displacement amplitude of the phase-space point z = (x, y).

    W_z = exp(i(xQ + yP)) equals the displacement operator D(alpha) with
    alpha = (ix - y)/sqrt(2); under this map Im(alpha1 * conj(alpha2))
    reproduces the symplectic form of the two points, which is what makes
    the two pictures interchangeable.
    """
    x, y = _coords(z)
    return complex(-y, x) / math.sqrt(2.0)


@dataclass(frozen=True)
class FockOperator:
    """Dense operator on the truncated number basis.  Immutable value."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex, order="C")
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ValueError("operator must be a square matrix of size >= 1")
        if not np.all(np.isfinite(m.view(float))):
            raise ValueError("operator entries must be finite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dagger(self) -> "FockOperator":
        return FockOperator(self.matrix.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def leading_block(self, k: int) -> "FockOperator":
        if not 1 <= k <= self.dim:
            raise ValueError("block size out of range")
        return FockOperator(self.matrix[:k, :k])

    def embedded(self, dim: int) -> "FockOperator":
        """Zero-pad into a larger truncation."""
        if dim < self.dim:
            raise ValueError("target dimension smaller than operator")
        out = np.zeros((dim, dim), dtype=complex)
        out[: self.dim, : self.dim] = self.matrix
        return FockOperator(out)

    def __matmul__(self, other: "FockOperator") -> "FockOperator":
        return FockOperator(self.matrix @ other.matrix)

    def __add__(self, other: "FockOperator") -> "FockOperator":
        return FockOperator(self.matrix + other.matrix)

    def __sub__(self, other: "FockOperator") -> "FockOperator":
        return FockOperator(self.matrix - other.matrix)

    def scaled(self, c: complex) -> "FockOperator":
        return FockOperator(c * self.matrix)


_HERMITIAN_TOL = 1e-10
_EIGEN_TOL = 1e-10
_TRACE_TOL = 1e-10


@dataclass(frozen=True)
class DensityOperator:
    """A state: self-adjoint, positive semidefinite, unit trace.

    Validation happens at construction so downstream code can assume the
    invariants.  Tolerances: hermiticity and trace within 1e-10, smallest
    eigenvalue >= -1e-10.
    """

    op: FockOperator

    def __post_init__(self) -> None:
        m = self.op.matrix
        herm = float(np.abs(m - m.conj().T).max())
        if herm > _HERMITIAN_TOL:
            raise ValueError(f"state is not self-adjoint (defect {herm:.3e})")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > _TRACE_TOL:
            raise ValueError(f"state trace is {tr}, expected 1")
        lo = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min())
        if lo < -_EIGEN_TOL:
            raise ValueError(f"state has negative eigenvalue {lo:.3e}")

    @property
    def matrix(self) -> np.ndarray:
        return self.op.matrix

    @property
    def dim(self) -> int:
        return self.op.dim

    def purity(self) -> float:
        m = self.matrix
        return float(np.real(np.trace(m @ m)))


# ---------------------------------------------------------------------------
# canonical operators


def annihilation(n_levels: int) -> FockOperator:
    """Ladder-down operator: entry sqrt(n) at (n-1, n)."""
    if n_levels < 1:
        raise ValueError("need at least one level")
    m = np.zeros((n_levels, n_levels), dtype=complex)
    ns = np.arange(1, n_levels)
    m[ns - 1, ns] = np.sqrt(ns)
    return FockOperator(m)


def position(n_levels: int) -> FockOperator:
    """Q = (a + a†)/sqrt(2)."""
    a = annihilation(n_levels).matrix
    return FockOperator((a + a.conj().T) / math.sqrt(2.0))


def momentum(n_levels: int) -> FockOperator:
    """P = -i(a - a†)/sqrt(2)."""
    a = annihilation(n_levels).matrix
    return FockOperator(-1j * (a - a.conj().T) / math.sqrt(2.0))


def weyl_generator(z, n_levels: int) -> FockOperator:
    """Anti-Hermitian generator i(xQ + yP) = alpha a† - conj(alpha) a."""
    x, y = _coords(z)
    q = position(n_levels).matrix
    p = momentum(n_levels).matrix
    return FockOperator(1j * (x * q + y * p))


@lru_cache(maxsize=16)
def _position_eigensystem(n_levels: int) -> tuple[np.ndarray, np.ndarray]:
    # Q is real symmetric tridiagonal; V is real orthogonal.
    q = position(n_levels).matrix.real
    lam, vec = np.linalg.eigh(q)
    lam.setflags(write=False)
    vec.setflags(write=False)
    return lam, vec


def displacement_batch(
    zs: np.ndarray, n_levels: int, method: str = "exponential"
) -> np.ndarray:
    """Weyl unitaries for a batch of phase-space points, shape (B, N, N).

    ``exponential`` exponentiates the truncated generator.  Writing
    z = rho(cos th, sin th), the generator is i rho * Q_th where Q_th is the
    rotated quadrature diag-conjugate of Q by the number phases e^{i th n};
    one cached eigendecomposition of Q therefore serves every z, and the
    result is exactly unitary because the factors are.

    ``closed_form`` evaluates the untruncated matrix elements: first column
    e^{-|alpha|^2/2} alpha^m / sqrt(m!) (as a cumulative product, every
    partial product is a unitary matrix element and stays bounded), then
    the column recurrence
        D[m, n+1] = (sqrt(m) D[m-1, n] - conj(alpha) D[m, n]) / sqrt(n+1).
    Requires |alpha|^2 <= N: beyond that the displaced state lives outside
    the truncation and the recurrence output is meaningless, so it is
    rejected rather than flagged quietly.
    """
    zs = np.asarray(zs, dtype=float)
    if zs.ndim == 1:
        zs = zs[None, :]
    if zs.ndim != 2 or zs.shape[1] != 2:
        raise ValueError("zs must have shape (B, 2)")
    if method == "exponential":
        return _displacement_exponential(zs, n_levels)
    if method == "closed_form":
        return _displacement_closed(zs, n_levels)
    raise ValueError(f"unknown method {method!r}")


def _displacement_exponential(zs: np.ndarray, n_levels: int) -> np.ndarray:
    lam, vec = _position_eigensystem(n_levels)
    rho = np.hypot(zs[:, 0], zs[:, 1])
    theta = np.arctan2(zs[:, 1], zs[:, 0])
    expo = np.exp(1j * rho[:, None] * lam[None, :])        # (B, N)
    core = (vec[None, :, :] * expo[:, None, :]) @ vec.T    # (B, N, N)
    phase = np.exp(1j * theta[:, None] * np.arange(n_levels)[None, :])
    return phase[:, :, None] * core * phase.conj()[:, None, :]


def _displacement_closed(zs: np.ndarray, n_levels: int) -> np.ndarray:
    alphas = np.array([alpha_of(z) for z in zs], dtype=complex)
    asq = np.abs(alphas) ** 2
    if np.any(asq > n_levels):
        raise ValueError(
            "closed-form displacement overflows the truncation: "
            f"|alpha|^2 = {asq.max():.3g} exceeds N = {n_levels}"
        )
    b = len(alphas)
    out = np.empty((b, n_levels, n_levels), dtype=complex)
    ms = np.arange(1, n_levels)
    # factors alpha/sqrt(m); cumulative products give the first column with
    # the Gaussian prefactor folded in from the start
    factors = alphas[:, None] / np.sqrt(ms)[None, :]
    col0 = np.empty((b, n_levels), dtype=complex)
    col0[:, 0] = np.exp(-0.5 * asq)
    if n_levels > 1:
        col0[:, 1:] = col0[:, :1] * np.cumprod(factors, axis=1)
    out[:, :, 0] = col0
    conj_a = alphas.conj()
    sq = np.sqrt(np.arange(n_levels))
    for n in range(n_levels - 1):
        prev = out[:, :, n]
        nxt = -conj_a[:, None] * prev
        nxt[:, 1:] += sq[None, 1:] * prev[:, :-1]
        out[:, :, n + 1] = nxt / sq[n + 1]
    return out


def weyl_operator(z, n_levels: int, method: str = "exponential") -> FockOperator:
    """The Weyl unitary W_z = exp(i(xQ + yP)) at truncation N."""
    x, y = _coords(z)
    mat = displacement_batch(np.array([[x, y]]), n_levels, method=method)[0]
    return FockOperator(mat)


# ---------------------------------------------------------------------------
# norms and states


def trace_norm(a) -> float:
    """Sum of singular values; dominates |trace|."""
    m = a.matrix if isinstance(a, FockOperator) else np.asarray(a, dtype=complex)
    return float(np.linalg.svd(m, compute_uv=False).sum())


def number_state(n: int, n_levels: int) -> DensityOperator:
    if not 0 <= n < n_levels:
        raise ValueError("level index out of range")
    m = np.zeros((n_levels, n_levels), dtype=complex)
    m[n, n] = 1.0
    return DensityOperator(FockOperator(m))


_COHERENT_CAPTURE = 1e-8


def coherent_state(alpha: complex, n_levels: int) -> DensityOperator:
    """Projection onto the truncated coherent vector, renormalized.

    Rejected unless the truncation captures the state to 1 - 1e-8; the
    guard |alpha|^2 <= N/4 always suffices.
    """
    alpha = complex(alpha)
    ms = np.arange(1, n_levels)
    vec = np.empty(n_levels, dtype=complex)
    vec[0] = math.exp(-0.5 * abs(alpha) ** 2)
    if n_levels > 1:
        vec[1:] = vec[0] * np.cumprod(alpha / np.sqrt(ms))
    capture = float(np.sum(np.abs(vec) ** 2))
    if capture < 1.0 - _COHERENT_CAPTURE:
        raise ValueError(
            f"truncation captures only {capture:.12f} of the coherent state; "
            "increase N or shrink |alpha|"
        )
    vec /= math.sqrt(capture)
    return DensityOperator(FockOperator(np.outer(vec, vec.conj())))


# ---------------------------------------------------------------------------
# serialization: JSON sidecar + CSV entry dump, exact round trip


def save_operator(a: FockOperator, path) -> None:
    path = Path(path)
    header = {"kind": "fock_operator", "dim": a.dim}
    path.with_suffix(path.suffix + ".json").write_text(
        json.dumps(header, sort_keys=True, indent=2) + "\n"
    )
    rows, cols = np.indices((a.dim, a.dim))
    table = np.column_stack(
        [rows.ravel(), cols.ravel(), a.matrix.real.ravel(), a.matrix.imag.ravel()]
    )
    np.savetxt(
        path,
        table,
        fmt=("%d", "%d", "%.17g", "%.17g"),
        delimiter=",",
        header="row,col,re,im",
        comments="",
    )


def load_operator(path) -> FockOperator:
    path = Path(path)
    header = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    if header.get("kind") != "fock_operator":
        raise ValueError(f"not an operator file: {path}")
    dim = int(header["dim"])
    table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    m = np.zeros((dim, dim), dtype=complex)
    r = table[:, 0].astype(int)
    c = table[:, 1].astype(int)
    m[r, c] = table[:, 2] + 1j * table[:, 3]
    return FockOperator(m)
