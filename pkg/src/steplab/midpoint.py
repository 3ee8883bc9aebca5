"""Implicit midpoint stepping for u' = omega A(t) u and its stability probe.

For stiff runs the sign-flipped iterates v_k = (-1)^k u_k satisfy, exactly,
the implicit midpoint discretization of the companion system

    v' = A(t)^{-1} v / gamma,    gamma = omega h^2 / 4,

called the ghost system here. Long-time behaviour of the midpoint iterates
along the ray (h -> h/2, omega -> 4 omega, gamma fixed) is therefore
governed by that system rather than by the original one, and
`instability_search` hunts for parameter points where the two verdicts
disagree: original decaying, ghost growing.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NumericalError, SingularMatrixError, SingularMidpointSystemError

MatrixFn = Callable[[float], np.ndarray]


@dataclass(frozen=True)
class MidpointProblem:
    """Stiff non-autonomous test problem u' = omega A(t) u on [0, T]."""

    omega: float
    A_of_t: MatrixFn
    T: float
    h: float
    gamma: float = field(init=False)

    def __post_init__(self):
        if self.h <= 0.0 or self.T <= 0.0:
            raise ValueError("h and T must be positive")
        n = round(self.T / self.h)
        if n < 1 or abs(n * self.h - self.T) > 1e-9 * max(self.T, 1.0):
            raise ValueError(f"step h={self.h} does not divide T={self.T}")
        object.__setattr__(self, "gamma", 0.25 * self.omega * self.h * self.h)

    @property
    def n_steps(self) -> int:
        return round(self.T / self.h)


def _matrix_at(prob: MidpointProblem, t: float) -> np.ndarray:
    a = np.atleast_2d(np.asarray(prob.A_of_t(t)))
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"A(t) must be square, got shape {a.shape}")
    return a


def midpoint_step(prob: MidpointProblem, u_k: np.ndarray, t_k: float) -> np.ndarray:
    """One implicit midpoint step of size h from (t_k, u_k).

    Solves (I - (omega h / 2) A(t_mid)) u_{k+1} = (I + (omega h / 2) A(t_mid)) u_k
    with t_mid = t_k + h/2 by a dense linear solve.
    """
    a_mid = _matrix_at(prob, t_k + 0.5 * prob.h)
    m = (0.5 * prob.omega * prob.h) * a_mid
    eye = np.eye(m.shape[0], dtype=np.result_type(m.dtype, np.asarray(u_k).dtype))
    try:
        return np.linalg.solve(eye - m, (eye + m) @ u_k)
    except np.linalg.LinAlgError as exc:
        raise SingularMidpointSystemError(
            f"midpoint system singular at t = {t_k + 0.5 * prob.h:g}") from exc


@dataclass
class MidpointTrajectory:
    """Iterates u_k at t_k = k h, plus the sign-flipped view v_k = (-1)^k u_k."""

    times: np.ndarray
    u_seq: np.ndarray  # shape (n_steps + 1, dim)

    @property
    def v_seq(self) -> np.ndarray:
        signs = np.where(np.arange(self.u_seq.shape[0]) % 2 == 0, 1.0, -1.0)
        return signs[:, None] * self.u_seq


def integrate_midpoint(prob: MidpointProblem, u0: np.ndarray) -> MidpointTrajectory:
    """Run the implicit midpoint method over [0, T]."""
    u0 = np.atleast_1d(np.asarray(u0))
    n = prob.n_steps
    # a complex A(t) must promote the whole trajectory even if u0 is real
    dtype = np.result_type(u0.dtype, _matrix_at(prob, 0.0).dtype, float)
    u = np.empty((n + 1, u0.size), dtype=dtype)
    u[0] = u0
    times = prob.h * np.arange(n + 1)
    for k in range(n):
        u[k + 1] = midpoint_step(prob, u[k], times[k])
    return MidpointTrajectory(times=times, u_seq=u)


def ghost_rhs(prob: MidpointProblem, t: float, v: np.ndarray) -> np.ndarray:
    """Right-hand side A(t)^{-1} v / gamma of the ghost system."""
    a = _matrix_at(prob, t)
    try:
        return np.linalg.solve(a, np.atleast_1d(v)) / prob.gamma
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"A(t) singular at t = {t:g}") from exc


def verify_ghost_identity(traj: MidpointTrajectory, prob: MidpointProblem) -> float:
    """Largest relative defect of the sign-flipped midpoint relation.

    Checks that (v_{k+1} - v_k)/h matches A(t_mid)^{-1} (v_{k+1} + v_k) / (2 gamma)
    for every step. The relation is an exact rearrangement of the midpoint
    update, so the return value must sit at rounding level no matter how the
    trajectory itself behaves.
    """
    v = traj.v_seq
    h = prob.h
    defect = 0.0
    scale = 0.0
    for k in range(v.shape[0] - 1):
        lhs = (v[k + 1] - v[k]) / h
        rhs = ghost_rhs(prob, traj.times[k] + 0.5 * h, 0.5 * (v[k + 1] + v[k]))
        defect = max(defect, float(np.linalg.norm(lhs - rhs)))
        scale = max(scale, float(np.linalg.norm(lhs)), float(np.linalg.norm(rhs)))
    return defect / scale if scale > 0.0 else 0.0


def monodromy_matrix(rhs_matrix: MatrixFn, period: float, steps: int = 10_000) -> np.ndarray:
    """Fundamental matrix over one period by classical RK4 with a tiny fixed step."""
    n = np.atleast_2d(rhs_matrix(0.0)).shape[0]
    m = np.eye(n)
    h = period / steps
    for i in range(steps):
        t = i * h
        k1 = rhs_matrix(t) @ m
        k2 = rhs_matrix(t + 0.5 * h) @ (m + 0.5 * h * k1)
        k3 = rhs_matrix(t + 0.5 * h) @ (m + 0.5 * h * k2)
        k4 = rhs_matrix(t + h) @ (m + h * k3)
        m = m + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return m


def spectral_radius(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(matrix))))


def growth_exponent_fit(rhs_matrix: MatrixFn, period: float, n_periods: int = 20,
                        burn: int = 5, chunks_per_period: int = 8,
                        rtol: float = 1e-10, atol: float = 1e-13) -> float:
    """Long-run growth exponent from an amplitude fit of the fundamental matrix.

    Integrates M' = G(t) M with an adaptive solver, renormalizing between
    chunks so strong decay or growth never leaves double range, and fits the
    accumulated log norm at period multiples by least squares. Serves as an
    estimator independent of `monodromy_matrix`.
    """
    n = np.atleast_2d(rhs_matrix(0.0)).shape[0]

    def rhs(t, y):
        return (rhs_matrix(t) @ y.reshape(n, n)).ravel()

    m = np.eye(n)
    acc = 0.0
    log_norms = np.empty(n_periods)
    chunk = period / chunks_per_period
    for j in range(n_periods):
        for c in range(chunks_per_period):
            t0 = j * period + c * chunk
            sol = solve_ivp(rhs, (t0, t0 + chunk), m.ravel(), method="RK45",
                            rtol=rtol, atol=atol)
            if not sol.success:
                raise NumericalError(
                    f"growth-fit integration failed near t = {t0:g}: {sol.message}")
            m = sol.y[:, -1].reshape(n, n)
            norm = np.linalg.norm(m, 2)
            if norm == 0.0:
                raise NumericalError("fundamental matrix collapsed to zero")
            acc += math.log(norm)
            m /= norm
        log_norms[j] = acc
    t_marks = period * np.arange(1, n_periods + 1)
    slope = np.polyfit(t_marks[burn:], log_norms[burn:], 1)[0]
    return float(slope)


def rotating_jordan_family(p: float, c: float) -> Tuple[MatrixFn, float]:
    """Non-normal decaying block conjugated by a planar rotation of rate p.

    A(t; p, c) = R(pt) [[-1, c], [0, -1]] R(pt)^T. Pointwise the eigenvalues
    are -1 regardless of t, yet for suitable (p, c) the ghost system grows.
    The conjugation is insensitive to the sign of R, so the period is pi / p.
    """
    if p <= 0.0:
        raise ValueError("rotation rate p must be positive")
    block = np.array([[-1.0, c], [0.0, -1.0]])

    def A_of_t(t: float) -> np.ndarray:
        th = p * t
        co, si = math.cos(th), math.sin(th)
        rot = np.array([[co, -si], [si, co]])
        return rot @ block @ rot.T

    return A_of_t, math.pi / p


@dataclass
class SearchPoint:
    """Verdicts for one (p, c) parameter point of the instability search."""

    p: float
    c: float
    gamma: float
    rho_original: float = math.nan
    rho_ghost: float = math.nan
    exponent_original: float = math.nan
    exponent_ghost: float = math.nan
    exponent_original_fit: float = math.nan
    exponent_ghost_fit: float = math.nan
    amplifications: Tuple[float, float, float] = (math.nan,) * 3
    original_stable: bool = False
    ghost_growing: bool = False
    ray_growing: bool = False
    flag: bool = False
    error: Optional[str] = None


@dataclass
class SearchReport:
    gamma: float
    omega_ref: float
    points: List[SearchPoint]

    def witnesses(self) -> List[SearchPoint]:
        return [pt for pt in self.points if pt.flag]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(render_search_csv(self))


def render_search_csv(report: SearchReport) -> str:
    out = io.StringIO()
    out.write("p,c,gamma,rho_orig,rho_ghost,"
              "midpoint_amp_h,midpoint_amp_h2,midpoint_amp_h4,flag\n")
    for pt in report.points:
        if pt.error is not None:
            continue
        amps = ",".join(f"{a:.17g}" for a in pt.amplifications)
        out.write(f"{pt.p:.17g},{pt.c:.17g},{pt.gamma:.17g},"
                  f"{pt.rho_original:.17g},{pt.rho_ghost:.17g},{amps},"
                  f"{int(pt.flag)}\n")
    return out.getvalue()


def midpoint_amplification(omega: float, A_of_t: MatrixFn, T: float, h: float,
                           u0: np.ndarray) -> float:
    """||u_N|| / ||u_0|| for the midpoint method on u' = omega A(t) u."""
    prob = MidpointProblem(omega=omega, A_of_t=A_of_t, T=T, h=h)
    traj = integrate_midpoint(prob, u0)
    return float(np.linalg.norm(traj.u_seq[-1]) / np.linalg.norm(traj.u_seq[0]))


def instability_search(family=rotating_jordan_family, gamma: float = 1.0,
                       p_values: Sequence[float] = (0.5, 1.0, 2.0),
                       c_values: Sequence[float] = (0.0, 1.5, 3.0, 4.5),
                       omega_ref: float = 16.0, amp_periods: int = 4,
                       refinements: int = 3, monodromy_steps: int = 10_000) -> SearchReport:
    """Scan a T-periodic family for points where the midpoint method misbehaves.

    Per point, three verdicts are collected:
      (a) spectral radius of the original system's one-period monodromy matrix,
      (b) the same for the ghost system (both cross-checked against an
          independent long-run amplitude fit),
      (c) midpoint amplification over a fixed horizon of `amp_periods`
          periods along the stiffness ray (h -> h/2, omega -> 4 omega) at
          constant gamma, at `refinements` consecutive levels.
    The ray for a point with rotation rate p starts at omega_0 = omega_ref p^2,
    so the first level resolves the family period equally across the grid and
    the amplification sequence is comparable point to point.

    A point is flagged as a witness when the original decays or stays bounded,
    the ghost grows, and the observed amplification grows along the ray.
    Finding no witness is a legitimate reported outcome.
    """
    if gamma <= 0.0 or omega_ref <= 0.0:
        raise ValueError("gamma and omega_ref must be positive")
    points: List[SearchPoint] = []
    for p in p_values:
        for c in c_values:
            pt = SearchPoint(p=p, c=c, gamma=gamma)
            try:
                _evaluate_point(pt, family, gamma, omega_ref, amp_periods,
                                refinements, monodromy_steps)
            except (NumericalError, np.linalg.LinAlgError) as exc:
                pt.error = str(exc)
            points.append(pt)
    return SearchReport(gamma=gamma, omega_ref=omega_ref, points=points)


def _evaluate_point(pt: SearchPoint, family, gamma: float, omega_ref: float,
                    amp_periods: int, refinements: int, monodromy_steps: int) -> None:
    A_of_t, period = family(pt.p, pt.c)
    omega0 = omega_ref * pt.p * pt.p

    def original(t):
        return omega0 * A_of_t(t)

    def ghost(t):
        try:
            return np.linalg.inv(A_of_t(t)) / gamma
        except np.linalg.LinAlgError as exc:
            raise SingularMatrixError(f"A(t) singular at t = {t:g}") from exc

    phi = monodromy_matrix(original, period, monodromy_steps)
    pt.rho_original = spectral_radius(phi)
    pt.exponent_original = math.log(pt.rho_original) / period
    phi_ghost = monodromy_matrix(ghost, period, monodromy_steps)
    pt.rho_ghost = spectral_radius(phi_ghost)
    pt.exponent_ghost = math.log(pt.rho_ghost) / period

    # Strong decay is settled after few periods; mild growth needs more.
    pt.exponent_original_fit = growth_exponent_fit(original, period, n_periods=10, burn=2)
    pt.exponent_ghost_fit = growth_exponent_fit(ghost, period, n_periods=20, burn=5)

    h0 = 2.0 * math.sqrt(gamma / omega0)
    n0 = max(1, math.ceil(amp_periods * period / h0))
    horizon = n0 * h0
    dim = np.atleast_2d(A_of_t(0.0)).shape[0]
    u0 = np.ones(dim) / math.sqrt(dim)
    amps = []
    for j in range(refinements):
        amps.append(midpoint_amplification(omega0 * 4.0 ** j, A_of_t,
                                           horizon, h0 / 2.0 ** j, u0))
    pt.amplifications = tuple(amps)

    pt.original_stable = pt.rho_original <= 1.0 + 1e-6
    pt.ghost_growing = pt.rho_ghost > 1.0
    pt.ray_growing = all(amps[i] < amps[i + 1] for i in range(len(amps) - 1))
    pt.flag = pt.original_stable and pt.ghost_growing and pt.ray_growing
