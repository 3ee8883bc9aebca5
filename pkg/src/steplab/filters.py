"""Spectral filters for regularizing symmetric ill-conditioned solves.

Three filter families act on the orthogonal diagonalization A = U S U' of
an SPD system: a hard index cutoff, the Tikhonov factor s/(s + beta), and
the exponential factor 1 - exp(-t s) obtained by integrating the artificial
time flow dx/dt = b - Ax up to time t. A forward Euler realization of that
flow is included so the discrete filter 1 - (1 - h s)^N can be observed
converging to the exponential one.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DivisionBarrierError


@dataclass(frozen=True)
class TruncatedFilter:
    """Keep modes with 1-based index below cutoff_index, zero the rest."""

    cutoff_index: int

    def __post_init__(self):
        if self.cutoff_index < 1:
            raise ValueError("cutoff_index must be at least 1")


@dataclass(frozen=True)
class TikhonovFilter:
    beta: float

    def __post_init__(self):
        if self.beta <= 0.0:
            raise ValueError("beta must be positive")

    def value(self, s):
        s = _check_nonnegative(s)
        return s / (s + self.beta)


@dataclass(frozen=True)
class ExponentialFilter:
    t: float

    def __post_init__(self):
        if self.t <= 0.0:
            raise ValueError("t must be positive")

    def value(self, s):
        s = _check_nonnegative(s)
        return -np.expm1(-self.t * s)


FilterSpec = Union[TruncatedFilter, TikhonovFilter, ExponentialFilter]


def _check_nonnegative(s):
    s = np.asarray(s, dtype=float)
    if np.any(s < 0.0):
        raise ValueError("filter argument s must be nonnegative")
    return s if s.ndim else float(s)


def filter_value(spec: FilterSpec, s, index: int = None):
    """Filter weight at s; the truncated kind decides by mode index instead.

    All kinds map s >= 0 into [0, 1].
    """
    if isinstance(spec, TruncatedFilter):
        if index is None:
            raise ValueError("the truncated filter needs the 1-based mode index")
        _check_nonnegative(s)
        return 1.0 if index < spec.cutoff_index else 0.0
    return spec.value(s)


class SvdSystem:
    """Orthogonal diagonalization A = U diag(sigma) U' with data vector b.

    sigma must be non-increasing and U orthogonal to 1e-12; both are checked
    at construction.
    """

    def __init__(self, U: np.ndarray, sigma: np.ndarray, b: np.ndarray,
                 orthogonality_tol: float = 1e-12):
        U = np.asarray(U, dtype=float)
        sigma = np.asarray(sigma, dtype=float)
        b = np.asarray(b, dtype=float)
        n = U.shape[0]
        if U.shape != (n, n):
            raise ValueError("U must be square")
        if sigma.shape != (n,) or b.shape != (n,):
            raise ValueError("sigma and b must match the dimension of U")
        defect = np.max(np.abs(U.T @ U - np.eye(n)))
        if defect > orthogonality_tol:
            raise ValueError(f"U is not orthogonal: max |U'U - I| = {defect:.3e}")
        if np.any(np.diff(sigma) > 0.0):
            raise ValueError("singular values must be non-increasing")
        if np.any(sigma < 0.0):
            raise ValueError("singular values must be nonnegative")
        self.U = U
        self.sigma = sigma
        self.b = b

    @property
    def dim(self) -> int:
        return self.sigma.size

    @classmethod
    def from_symmetric(cls, matrix, b) -> "SvdSystem":
        """Diagonalize a symmetric positive semidefinite matrix."""
        a = np.asarray(matrix, dtype=float)
        lam, vecs = np.linalg.eigh(0.5 * (a + a.T))
        order = np.argsort(lam)[::-1]
        return cls(vecs[:, order], lam[order], b)

    def apply(self, v: np.ndarray) -> np.ndarray:
        """SPD action A v = U diag(sigma) U' v."""
        return self.U @ (self.sigma * (self.U.T @ v))


def filtered_solve(sys: SvdSystem, spec: FilterSpec) -> np.ndarray:
    """Regularized solution x = U y with y_i = omega(s_i) / s_i * (U'b)_i.

    For the smooth filters the ratio is evaluated in its stable form, so a
    zero singular value contributes its artificial-time limit (t * coeff for
    the exponential filter, coeff / beta for Tikhonov) instead of 0 * inf.
    The truncated filter genuinely divides by s_i and refuses zero singular
    values among the retained modes.
    """
    coeff = sys.U.T @ sys.b
    s = sys.sigma
    if isinstance(spec, TruncatedFilter):
        keep = np.arange(1, sys.dim + 1) < spec.cutoff_index
        if np.any(keep & (s == 0.0)):
            raise DivisionBarrierError(
                "zero singular value retained by the truncation cutoff")
        y = np.zeros(sys.dim)
        y[keep] = coeff[keep] / s[keep]
    elif isinstance(spec, TikhonovFilter):
        y = coeff / (s + spec.beta)
    elif isinstance(spec, ExponentialFilter):
        ratio = np.where(s > 0.0, -np.expm1(-spec.t * s) / np.where(s > 0.0, s, 1.0),
                         spec.t)
        y = coeff * ratio
    else:
        raise TypeError(f"unknown filter spec {spec!r}")
    return sys.U @ y


@dataclass
class EulerFilterResult:
    """Outcome of the forward Euler realization of the artificial-time flow."""

    x: np.ndarray
    h: float
    steps: int
    stable: bool  # h * sigma_max <= 2, i.e. no mode has |1 - h s| > 1


def euler_filter_realization(sys: SvdSystem, t_final: float, steps: int) -> EulerFilterResult:
    """Integrate dx/dt = b - Ax from x = 0 with N constant forward Euler steps.

    On a diagonal system this realizes the filter 1 - (1 - h s)^N, first-order
    close to 1 - exp(-t_final s). An unstable step (h * sigma_max > 2) is not
    an error; the result is returned with the stable flag cleared so the
    growth itself can be observed.
    """
    if t_final <= 0.0:
        raise ValueError("t_final must be positive")
    if steps < 1:
        raise ValueError("steps must be at least 1")
    h = t_final / steps
    x = np.zeros(sys.dim)
    for _ in range(steps):
        x = x + h * (sys.b - sys.apply(x))
    stable = bool(h * sys.sigma.max() <= 2.0)
    return EulerFilterResult(x=x, h=h, steps=steps, stable=stable)


def render_filter_curves_csv(t: float, beta: float, s_grid) -> str:
    """CSV text s,omega_exp,omega_tik over the given grid of s values."""
    exp_f = ExponentialFilter(t)
    tik_f = TikhonovFilter(beta)
    out = io.StringIO()
    out.write("s,omega_exp,omega_tik\n")
    for s in np.asarray(s_grid, dtype=float):
        out.write(f"{s:.17g},{exp_f.value(s):.17g},{tik_f.value(s):.17g}\n")
    return out.getvalue()
