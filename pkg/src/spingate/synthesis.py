"""Inverse problem: control parameters from target gate phases.

Tunable knobs: the longitudinal splittings omega01, omega02. The drive
amplitude omega1 and rotation frequency omega_R are fixed by hardware.

Chain per spin: gamma -> theta_star (arccos), theta_star -> theta
(bisection of the monotone map theta -> atan2(sin th, cos th + r)),
theta -> omega0 = omega1 cos th / sin th, with r = omega_R / Omega resolved
by fixed-point iteration since Omega = sqrt(omega0^2 + omega1^2) depends
on omega0.

The forward tilt map is strictly increasing on (0, pi) iff r <= 1
(d theta*/d theta has the sign of 1 + r cos theta); for r > 1 the
attainable range caps at arcsin(1/r), reached at theta = arccos(-1/r),
and only the increasing branch is searched.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import (ContractViolationError, DistinctnessError, InfeasibleTargetError,
                     SynthesisError)
from .twoqubit import (TwoSpinParams, echo_evolution, gamma_contour, gamma_display,
                       gate_matrix, theta_angles)
from .linalg import global_phase_distance

BISECTION_TOL = 1e-12
FIXED_POINT_TOL = 1e-12
MAX_FIXED_POINT_ITERS = 200
SWEEP_AXES = ("omega01", "omega02", "omega1", "omegaR", "J")
MAX_SWEEP_POINTS = 10 ** 6


@dataclass(frozen=True)
class SynthesisTarget:
    gamma1_target: float
    gamma2_target: float
    omega_R: float
    omega1: float
    doubled: bool = True

    def __post_init__(self):
        limit = 2 * np.pi if self.doubled else np.pi
        for name, g in (("gamma1_target", self.gamma1_target),
                        ("gamma2_target", self.gamma2_target)):
            if abs(g) > limit + 1e-12:
                raise ContractViolationError(
                    f"|{name}| = {abs(g):.6f} exceeds the attainable bound {limit:.6f}")
        if self.omega_R <= 0:
            raise ContractViolationError("omega_R must be > 0")
        if self.omega1 < 0:
            raise ContractViolationError("omega1 must be >= 0")


@dataclass(frozen=True)
class SynthesisResult:
    params: TwoSpinParams
    residual: float
    iterations: int


def invert_theta_star(gamma: float, m: float = 0.5, cycles: int = 1) -> float:
    """theta* = arccos(-gamma / (2 pi m cycles)), with feasibility check."""
    if m == 0 or cycles < 1:
        raise ContractViolationError("need m != 0 and cycles >= 1")
    bound = 2 * np.pi * abs(m) * cycles
    x = -gamma / (2 * np.pi * m * cycles)
    if abs(x) > 1 + 1e-12:
        raise InfeasibleTargetError(
            f"|gamma| = {abs(gamma):.6f} outside the attainable interval "
            f"[-{bound:.6f}, {bound:.6f}]", attainable=(-bound, bound))
    return float(np.arccos(np.clip(x, -1.0, 1.0)))


def forward_theta_star(theta: float, r: float) -> float:
    """Tilt map theta -> atan2(sin theta, cos theta + r)."""
    return float(np.arctan2(np.sin(theta), np.cos(theta) + r))


def theta_star_range(r: float) -> tuple[float, float]:
    """Attainable [0, sup) or [0, max] of the tilt map for fixed r > 0."""
    if r < 1:
        return (0.0, np.pi)
    return (0.0, float(np.arcsin(1.0 / r)))


def solve_theta(theta_star_target: float, r: float) -> float:
    """Invert the tilt map by bisection to 1e-12 rad on its increasing branch."""
    if r <= 0:
        raise ContractViolationError("r must be > 0")
    if theta_star_target < 0:
        raise InfeasibleTargetError("theta_star must be >= 0", attainable=theta_star_range(r))
    lo, hi = 0.0, np.pi
    if r >= 1:
        hi = float(np.arccos(-1.0 / r)) if r > 1 else np.pi - 1e-9
    f_lo = forward_theta_star(lo, r) - theta_star_target
    f_hi = forward_theta_star(hi, r) - theta_star_target
    if f_lo > 0 or f_hi < 0:
        raise InfeasibleTargetError(
            f"theta_star = {theta_star_target:.9f} outside the attainable range "
            f"[0, {forward_theta_star(hi, r):.9f}] at r = {r:.6g}",
            attainable=(0.0, forward_theta_star(hi, r)))
    while hi - lo > BISECTION_TOL:
        mid = (lo + hi) / 2
        if mid == lo or mid == hi:
            break
        if forward_theta_star(mid, r) < theta_star_target:
            lo = mid
        else:
            hi = mid
    theta = (lo + hi) / 2
    if abs(forward_theta_star(theta, r) - theta_star_target) > 1e-9:
        raise SynthesisError("bisection bracket lost monotonicity (internal consistency)")
    return float(theta)


def _solve_spin(theta_star: float, omega_R: float, omega1: float) -> tuple[float, int]:
    """Self-consistent (omega0, iterations) for one spin."""
    s = np.sin(theta_star)
    if s == 0.0:
        raise InfeasibleTargetError(
            "theta_star on the boundary {0, pi} needs an infinite static field")
    omega0 = omega1 * np.cos(theta_star) / s  # adiabatic initial guess
    for it in range(1, MAX_FIXED_POINT_ITERS + 1):
        omega_a = np.hypot(omega0, omega1)
        r = omega_R / omega_a
        theta = solve_theta(theta_star, r)
        st = np.sin(theta)
        if st == 0.0:
            raise InfeasibleTargetError("solution pinned at theta in {0, pi}")
        omega0_new = omega1 * np.cos(theta) / st
        if abs(omega0_new - omega0) <= FIXED_POINT_TOL * max(1.0, abs(omega0_new)):
            return float(omega0_new), it
        omega0 = omega0_new
    raise SynthesisError(f"fixed point did not converge in {MAX_FIXED_POINT_ITERS} iterations",
                         last_iterate=float(omega0))


def synthesize(target: SynthesisTarget) -> SynthesisResult:
    """Compute omega01, omega02 reproducing the target phases."""
    if target.omega1 <= 0:
        raise ContractViolationError("synthesis requires omega1 > 0")
    cycles = 2 if target.doubled else 1
    omega0 = {}
    iterations = 0
    for spin, gamma in ((1, target.gamma1_target), (2, target.gamma2_target)):
        theta_star = invert_theta_star(gamma, m=0.5, cycles=cycles)
        w0, it = _solve_spin(theta_star, target.omega_R, target.omega1)
        omega0[spin] = w0
        iterations += it
    try:
        params = TwoSpinParams(omega01=omega0[1], omega02=omega0[2], J=0.0,
                               omega1=target.omega1, omega_R=target.omega_R)
    except ContractViolationError as exc:
        raise DistinctnessError(
            f"synthesized omega01 = omega02 = {omega0[1]:.12g}; equal targets give "
            "indistinguishable spins (perturb one target)") from exc
    residual = max(abs(gamma_display(params, 1, target.doubled) - target.gamma1_target),
                   abs(gamma_display(params, 2, target.doubled) - target.gamma2_target))
    if residual > 1e-9:
        raise SynthesisError(f"forward residual {residual:.3e} exceeds 1e-9")
    return SynthesisResult(params=params, residual=float(residual), iterations=iterations)


def sweep(grid: Mapping[str, Sequence[float]], oracle_residual: bool = False,
          steps: int = 4000) -> list[dict]:
    """Evaluate the gate formulas on a product grid, lexicographic row order.

    Axes: omega01, omega02, omega1, omegaR, J (each non-empty). The optional
    oracle residual column is the global-phase distance between the echo
    evolution and the contour gate.
    """
    missing = [a for a in SWEEP_AXES if a not in grid]
    if missing:
        raise ContractViolationError(f"missing sweep axes: {missing}")
    unknown = [a for a in grid if a not in SWEEP_AXES]
    if unknown:
        raise ContractViolationError(f"unknown sweep axes: {unknown}")
    axes = [list(map(float, grid[a])) for a in SWEEP_AXES]
    if any(len(v) == 0 for v in axes):
        raise ContractViolationError("empty sweep axis")
    total = int(np.prod([len(v) for v in axes]))
    if total > MAX_SWEEP_POINTS:
        raise ContractViolationError(f"grid has {total} points, above the {MAX_SWEEP_POINTS} cap")
    rows = []
    for w01, w02, w1, wr, j in itertools.product(*axes):
        p = TwoSpinParams(omega01=w01, omega02=w02, J=j, omega1=w1, omega_R=wr)
        _, th1 = theta_angles(p, 1)
        _, th2 = theta_angles(p, 2)
        row = {
            "omega01": w01, "omega02": w02, "omega1": w1, "omegaR": wr, "J": j,
            "theta1_star": th1, "theta2_star": th2,
            "gamma1": gamma_display(p, 1, True), "gamma2": gamma_display(p, 2, True),
        }
        if oracle_residual:
            net = echo_evolution(p, steps=steps)
            target = gate_matrix(gamma_contour(p, 1, True), gamma_contour(p, 2, True))
            row["oracle_residual"] = global_phase_distance(net.matrix, target.matrix)
        rows.append(row)
    return rows
