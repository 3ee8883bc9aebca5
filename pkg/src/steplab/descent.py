"""First-order iterations on convex quadratics.

Covers constant-step gradient descent, steepest descent (SD), lagged
steepest descent (LSD), SD held for two iterations (alternating SD),
Nesterov momentum, and conjugate gradients, all emitting one common
trace schema so runs can be compared column by column.

Every trace carries "monotonized" reporting columns: ell[k] is the index
of the best iterate seen so far by gradient norm (ties go to the later
index), and Egrad/Ef/Er evaluate that iterate instead of the current one.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import OperatorNotSPDError, ZeroResidualError
from .operators import LinearOperator, QuadraticObjective

DIVERGENCE_FACTOR = 1e12

TRACE_COLUMNS = ("k", "alpha", "rnorm", "ferr", "ell", "Egrad", "Ef", "Er")


def sd_step(r: np.ndarray, op: LinearOperator) -> float:
    """Exact line-search step (r, r) / (r, Ar) for the quadratic objective."""
    rr = float(r @ r)
    if rr == 0.0:
        raise ZeroResidualError("zero residual: iteration already converged")
    rar = float(r @ op(r))
    if rar <= 0.0:
        raise OperatorNotSPDError(f"(r, Ar) = {rar:g} <= 0 on a nonzero vector")
    return rr / rar


class StepPolicy:
    """Rule producing the step size alpha_k from the iteration state."""

    def restart(self) -> None:
        """Drop any internal history before a fresh run."""

    def __call__(self, k: int, r: np.ndarray, op: LinearOperator) -> float:
        raise NotImplementedError


class ConstantStep(StepPolicy):
    def __init__(self, alpha: float):
        if alpha <= 0.0:
            raise ValueError("step size must be positive")
        self.alpha = alpha

    def __call__(self, k, r, op):
        return self.alpha


class SteepestDescentStep(StepPolicy):
    def __call__(self, k, r, op):
        return sd_step(r, op)


class LaggedSteepestDescentStep(StepPolicy):
    """SD ratio evaluated at the previous residual.

    The first step has no history and falls back to the plain SD value.
    """

    def __init__(self):
        self._prev: Optional[np.ndarray] = None

    def restart(self):
        self._prev = None

    def __call__(self, k, r, op):
        alpha = sd_step(r if self._prev is None else self._prev, op)
        self._prev = r.copy()
        return alpha


class AlternatingSDStep(StepPolicy):
    """SD ratio recomputed at even k and held unchanged for the following odd k."""

    def __init__(self):
        self._held: Optional[float] = None

    def restart(self):
        self._held = None

    def __call__(self, k, r, op):
        if k % 2 == 0 or self._held is None:
            self._held = sd_step(r, op)
        return self._held


@dataclass
class RunConfig:
    """Termination and reporting settings for one run."""

    tol: float = 1e-6
    max_iter: int = 100_000
    x0: Optional[np.ndarray] = None
    record_ferr: bool = False
    fstar_tol: float = 1e-12

    def __post_init__(self):
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")

    def initial_x(self, n: int) -> np.ndarray:
        if self.x0 is None:
            return np.zeros(n)
        x0 = np.asarray(self.x0, dtype=float)
        if x0.shape != (n,):
            raise ValueError(f"x0 has shape {x0.shape}, expected ({n},)")
        return x0.copy()


@dataclass
class IterationTrace:
    """Per-iterate record of one run; row k describes the k-th produced iterate."""

    method: str
    rnorm0: float
    alpha: np.ndarray
    rnorm: np.ndarray
    gradnorm: np.ndarray
    ell: np.ndarray
    egrad: np.ndarray
    er: np.ndarray
    ferr: Optional[np.ndarray] = None
    ef: Optional[np.ndarray] = None
    converged: bool = False
    diverged: bool = False
    x_final: Optional[np.ndarray] = None

    @property
    def iterations(self) -> int:
        return len(self.alpha)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(render_trace_csv(self))


def monotonize(gradnorms) -> np.ndarray:
    """Best-so-far index sequence over 1-based iterates.

    ell[k] points at the iterate with the smallest gradient norm among the
    first k; on ties the later index wins.
    """
    ell = np.empty(len(gradnorms), dtype=int)
    best = np.inf
    best_idx = 0
    for j, g in enumerate(gradnorms, start=1):
        if g <= best:
            best, best_idx = g, j
        ell[j - 1] = best_idx
    return ell


def _fmt(value) -> str:
    return f"{value:.17g}"


def render_trace_csv(trace: IterationTrace) -> str:
    """Trace as CSV text: header k,alpha,rnorm,ferr,ell,Egrad,Ef,Er.

    Floats carry 17 significant digits; oracle columns are empty when the
    run had no f(x*) oracle.
    """
    out = io.StringIO()
    out.write(",".join(TRACE_COLUMNS) + "\n")
    for i in range(trace.iterations):
        ferr = _fmt(trace.ferr[i]) if trace.ferr is not None else ""
        ef = _fmt(trace.ef[i]) if trace.ef is not None else ""
        out.write(f"{i + 1},{_fmt(trace.alpha[i])},{_fmt(trace.rnorm[i])},{ferr},"
                  f"{trace.ell[i]},{_fmt(trace.egrad[i])},{ef},{_fmt(trace.er[i])}\n")
    return out.getvalue()


class _TraceBuilder:
    """Accumulates per-iterate rows and the best-so-far bookkeeping."""

    def __init__(self, method: str, obj: QuadraticObjective, cfg: RunConfig):
        self.method = method
        self.obj = obj
        self.record_ferr = cfg.record_ferr
        self.fstar = obj.ensure_fstar(cfg.fstar_tol) if cfg.record_ferr else None
        self.alpha, self.rnorm, self.gradnorm = [], [], []
        self.fvals = []
        self.ell, self.egrad, self.er, self.ef = [], [], [], []
        self._best = np.inf
        self._best_idx = 0

    def add(self, alpha: float, rnorm: float, x: np.ndarray) -> None:
        k = len(self.alpha) + 1
        self.alpha.append(alpha)
        self.rnorm.append(rnorm)
        # r = -grad f for the quadratic, so the norms coincide exactly.
        self.gradnorm.append(rnorm)
        if rnorm <= self._best:
            self._best, self._best_idx = rnorm, k
        self.ell.append(self._best_idx)
        self.egrad.append(self.gradnorm[self._best_idx - 1])
        self.er.append(self.rnorm[self._best_idx - 1])
        if self.record_ferr:
            self.fvals.append(self.obj.f(x))
            self.ef.append(self.fvals[self._best_idx - 1] - self.fstar)

    def finish(self, rnorm0: float, converged: bool, diverged: bool,
               x: np.ndarray) -> IterationTrace:
        ferr = None
        ef = None
        if self.record_ferr:
            ferr = np.array(self.fvals) - self.fstar
            ef = np.array(self.ef)
        return IterationTrace(
            method=self.method,
            rnorm0=rnorm0,
            alpha=np.array(self.alpha),
            rnorm=np.array(self.rnorm),
            gradnorm=np.array(self.gradnorm),
            ell=np.array(self.ell, dtype=int),
            egrad=np.array(self.egrad),
            er=np.array(self.er),
            ferr=ferr,
            ef=ef,
            converged=converged,
            diverged=diverged,
            x_final=x,
        )


def gradient_descent(obj: QuadraticObjective, policy: StepPolicy,
                     cfg: RunConfig, method: Optional[str] = None) -> IterationTrace:
    """Iterate x <- x + alpha_k r_k until ||r_k|| <= tol ||r_0|| or the cap.

    A blow-up past DIVERGENCE_FACTOR * ||r_0|| ends the run with the
    diverged flag set; that is an observable outcome, not an exception.
    """
    policy.restart()
    trace = _TraceBuilder(method or type(policy).__name__, obj, cfg)
    x = cfg.initial_x(obj.dim)
    r = obj.residual(x)
    rnorm0 = float(np.linalg.norm(r))
    rnorm = rnorm0
    converged = diverged = False
    k = 0
    while True:
        if rnorm <= cfg.tol * rnorm0:
            converged = True
            break
        if rnorm > DIVERGENCE_FACTOR * rnorm0:
            diverged = True
            break
        if k >= cfg.max_iter:
            break
        alpha = policy(k, r, obj.operator)
        x = x + alpha * r
        r = obj.residual(x)
        rnorm = float(np.linalg.norm(r))
        trace.add(alpha, rnorm, x)
        k += 1
    return trace.finish(rnorm0, converged, diverged, x)


def nesterov(obj: QuadraticObjective, beta: float, cfg: RunConfig) -> IterationTrace:
    """Momentum iteration y = x_k + beta (x_k - x_{k-1}); x_{k+1} = y + alpha r(y).

    alpha is the SD ratio evaluated at r(y) = b - Ay, and x_{-1} = x_0 so the
    first step is a plain SD step. beta = 0 reduces exactly to SD.
    """
    if not 0.0 <= beta < 1.0:
        raise ValueError("beta must lie in [0, 1)")
    trace = _TraceBuilder(f"nesterov(beta={beta:g})", obj, cfg)
    x = cfg.initial_x(obj.dim)
    x_prev = x.copy()
    r = obj.residual(x)
    rnorm0 = float(np.linalg.norm(r))
    rnorm = rnorm0
    converged = diverged = False
    k = 0
    while True:
        if rnorm <= cfg.tol * rnorm0:
            converged = True
            break
        if rnorm > DIVERGENCE_FACTOR * rnorm0:
            diverged = True
            break
        if k >= cfg.max_iter:
            break
        y = x + beta * (x - x_prev)
        ry = obj.residual(y)
        if np.linalg.norm(ry) == 0.0:
            alpha = 0.0
            x_prev, x = x, y
        else:
            alpha = sd_step(ry, obj.operator)
            x_prev, x = x, y + alpha * ry
        r = obj.residual(x)
        rnorm = float(np.linalg.norm(r))
        trace.add(alpha, rnorm, x)
        k += 1
    return trace.finish(rnorm0, converged, diverged, x)


def conjugate_gradient(obj: QuadraticObjective, cfg: RunConfig) -> IterationTrace:
    """Standard conjugate gradients, traced in the common schema."""
    trace = _TraceBuilder("cg", obj, cfg)
    x = cfg.initial_x(obj.dim)
    r = obj.residual(x)
    rnorm0 = float(np.linalg.norm(r))
    rnorm = rnorm0
    p = r.copy()
    rs = float(r @ r)
    converged = diverged = False
    k = 0
    while True:
        if rnorm <= cfg.tol * rnorm0:
            converged = True
            break
        if rnorm > DIVERGENCE_FACTOR * rnorm0:
            diverged = True
            break
        if k >= cfg.max_iter:
            break
        ap = obj.operator(p)
        pap = float(p @ ap)
        if pap <= 0.0:
            raise OperatorNotSPDError(
                f"(p, Ap) = {pap:g} <= 0: operator is not positive definite")
        alpha = rs / pap
        x = x + alpha * p
        r = r - alpha * ap
        rs_new = float(r @ r)
        p = r + (rs_new / rs) * p
        rs = rs_new
        rnorm = float(np.sqrt(rs))
        trace.add(alpha, rnorm, x)
        k += 1
    return trace.finish(rnorm0, converged, diverged, x)
