"""SPD linear operators and grid machinery for the model Poisson problem.

The central object is a matrix-free five-point Laplacian on the unit
square with homogeneous Dirichlet boundary conditions, scaled by 1/xi^2,
together with a quadratic objective f(x) = x'Ax/2 - b'x built on top of it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.sparse.linalg

from .errors import PowerIterationError, ReferenceSolveError


@dataclass(frozen=True)
class GridSpec:
    """Uniform interior grid of m x m unknowns on the unit square.

    The spatial step is derived from m and never stored independently, so
    xi * (m + 1) = 1 holds by construction.
    """

    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"need at least one interior point per axis, got m={self.m}")

    @property
    def xi(self) -> float:
        return 1.0 / (self.m + 1)

    @property
    def n(self) -> int:
        return self.m * self.m


@dataclass(frozen=True)
class SpectrumHint:
    """Extreme eigenvalues of an operator plus how they were obtained."""

    lam_min: float
    lam_max: float
    provenance: str  # "analytic" or "estimated"

    def __post_init__(self):
        if self.provenance not in ("analytic", "estimated"):
            raise ValueError(f"unknown spectrum provenance {self.provenance!r}")


class LinearOperator:
    """Matrix-free symmetric positive definite action v -> A v."""

    def __init__(self, dim: int, apply: Callable[[np.ndarray], np.ndarray],
                 spectrum_hint: Optional[SpectrumHint] = None):
        self.dim = dim
        self._apply = apply
        self.spectrum_hint = spectrum_hint

    def apply(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise ValueError(f"operator of dimension {self.dim} applied to shape {v.shape}")
        return self._apply(v)

    __call__ = apply

    @classmethod
    def identity(cls, n: int) -> "LinearOperator":
        return cls(n, lambda v: v.copy(), SpectrumHint(1.0, 1.0, "analytic"))

    @classmethod
    def diagonal(cls, diag) -> "LinearOperator":
        d = np.asarray(diag, dtype=float)
        return cls(d.size, lambda v: d * v,
                   SpectrumHint(float(d.min()), float(d.max()), "analytic"))

    @classmethod
    def from_matrix(cls, matrix) -> "LinearOperator":
        a = np.asarray(matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("expected a square matrix")
        return cls(a.shape[0], lambda v: a @ v)


def laplacian_2d(grid: GridSpec) -> LinearOperator:
    """Matrix-free five-point Laplacian A = -Lap_h on the grid, scaled by 1/xi^2.

    Unknowns are ordered row-major over interior points. The exact spectrum
    is attached as an analytic hint:
    lam_ij = (4/xi^2) (sin^2(i pi xi / 2) + sin^2(j pi xi / 2)), i, j = 1..m.
    """
    m, xi = grid.m, grid.xi
    inv_xi2 = 1.0 / (xi * xi)

    def apply_stencil(v: np.ndarray) -> np.ndarray:
        u = v.reshape(m, m)
        out = 4.0 * u
        out[:-1, :] -= u[1:, :]
        out[1:, :] -= u[:-1, :]
        out[:, :-1] -= u[:, 1:]
        out[:, 1:] -= u[:, :-1]
        return (inv_xi2 * out).ravel()

    modes = np.sin(np.arange(1, m + 1) * np.pi * xi / 2.0) ** 2
    lam = (4.0 * inv_xi2) * (modes[:, None] + modes[None, :])
    hint = SpectrumHint(float(lam.min()), float(lam.max()), "analytic")
    return LinearOperator(grid.n, apply_stencil, hint)


def laplacian_max_eigenvalue(grid: GridSpec) -> float:
    """Largest eigenvalue of the five-point Laplacian, from the closed form."""
    m, xi = grid.m, grid.xi
    return float(8.0 / (xi * xi) * np.sin(m * np.pi * xi / 2.0) ** 2)


def estimate_max_eigenvalue(op: LinearOperator, tol: float = 1e-10,
                            max_iter: int = 50_000, seed: int = 0) -> float:
    """Largest eigenvalue by power iteration on a seeded random start vector."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(op.dim)
    v /= np.linalg.norm(v)
    lam_prev = 0.0
    for _ in range(max_iter):
        w = op(v)
        lam = float(v @ w)
        wnorm = np.linalg.norm(w)
        if wnorm == 0.0:
            return 0.0
        v = w / wnorm
        if abs(lam - lam_prev) <= tol * max(1.0, abs(lam)):
            return lam
        lam_prev = lam
    raise PowerIterationError(
        f"power iteration did not settle within {max_iter} iterations")


def stability_bound(op: LinearOperator) -> float:
    """Upper limit 2/lam_max on a constant step size for x <- x + alpha (b - Ax).

    Uses the analytic spectrum when the operator carries one, otherwise
    estimates lam_max by power iteration.
    """
    if op.spectrum_hint is not None:
        lam_max = op.spectrum_hint.lam_max
    else:
        lam_max = estimate_max_eigenvalue(op)
    if lam_max <= 0.0:
        raise ValueError("operator has a non-positive dominant eigenvalue")
    return 2.0 / lam_max


class QuadraticObjective:
    """Convex quadratic f(x) = x'Ax/2 - b'x with SPD operator A.

    The residual r(x) = b - Ax equals the negated gradient, so its norm is
    also the gradient norm. f(x*) is cached once a reference solve has run.
    """

    def __init__(self, operator: LinearOperator, b: np.ndarray):
        b = np.asarray(b, dtype=float)
        if b.shape != (operator.dim,):
            raise ValueError(f"b has shape {b.shape}, operator dimension is {operator.dim}")
        self.operator = operator
        self.b = b
        self.fstar_cache: Optional[float] = None

    @property
    def dim(self) -> int:
        return self.operator.dim

    def f(self, x: np.ndarray) -> float:
        return float(0.5 * (x @ self.operator(x)) - self.b @ x)

    def grad(self, x: np.ndarray) -> np.ndarray:
        return self.operator(x) - self.b

    def residual(self, x: np.ndarray) -> np.ndarray:
        return self.b - self.operator(x)

    def ensure_fstar(self, tol: float = 1e-12) -> float:
        if self.fstar_cache is None:
            solve_reference(self, tol)
        return self.fstar_cache


def solve_reference(obj: QuadraticObjective, tol: float = 1e-12,
                    max_iter: Optional[int] = None) -> np.ndarray:
    """Oracle solve of Ax = b to ||b - Ax|| <= tol ||b||; caches f(x*) on obj.

    Backed by scipy's conjugate gradient so it stays independent of the
    iteration code under study. Failure to converge raises, never returns a
    silent partial answer.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    n = obj.dim
    bnorm = np.linalg.norm(obj.b)
    if bnorm == 0.0:
        x = np.zeros(n)
        obj.fstar_cache = 0.0
        return x
    if max_iter is None:
        max_iter = max(10_000, 10 * n)
    linop = scipy.sparse.linalg.LinearOperator((n, n), matvec=obj.operator.apply)
    x, info = scipy.sparse.linalg.cg(linop, obj.b, rtol=0.25 * tol, atol=0.0,
                                     maxiter=max_iter)
    rnorm = np.linalg.norm(obj.residual(x))
    if info != 0 or rnorm > tol * bnorm:
        raise ReferenceSolveError(
            f"reference CG stalled at relative residual {rnorm / bnorm:.3e} "
            f"(target {tol:g}, cap {max_iter} iterations)")
    obj.fstar_cache = obj.f(x)
    return x
