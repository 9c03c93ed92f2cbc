"""Independent numerical integration of i dU/dt = H(t) U.

Fixed-step classical RK4 on a uniform grid, run at N and 2N steps. Stored
propagators are the pointwise Richardson combination (16 U_2N - U_N)/15 and
the doubling difference ||U_2N(T) - U_N(T)||_F <= 1e-8 is enforced as a
convergence certificate. Fixed stepping keeps runs bit-reproducible.

Every Hamiltonian in this package has the form
    H(t) = A + cos(w t + phase) B + sin(w t + phase) C
with constant matrices; schedules built through `drive_form_schedule` carry
that structure so the integrator can precompute stage Hamiltonians in
chunks (same arithmetic, much less Python overhead). Generic callables are
integrated through the same RK4 recursion.

Phase extraction follows the Aharonov-Anandan split: dynamic phase is the
trapezoid of <psi|H|psi> on the stored grid, geometric phase is the total
cyclic phase minus (-dynamic), folded into (-pi, pi].
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ContractViolationError, CyclicityError, IntegratorAccuracyError
from .linalg import fold_angle, unitarity_defect

CERTIFICATE_TOL = 1e-8
CYCLICITY_TOL = 1e-6
HERMITICITY_TOL = 1e-12
MIN_STEPS = 100
_CHUNK = 512


@dataclass(frozen=True)
class HamiltonianSchedule:
    """Time-dependent Hermitian generator.

    evaluator(t) -> (dim, dim) for scalar t, (T, dim, dim) for a 1-d array
    of times (all builders in this package are vectorized). drive_form,
    when present, is (A, B, C, omega, phase) with
    H(t) = A + cos(omega t + phase) B + sin(omega t + phase) C.
    """

    dim: int
    evaluator: Callable[[float], np.ndarray]
    drive_form: Optional[tuple] = None

    def __post_init__(self):
        if self.dim not in (2, 4):
            raise ContractViolationError("dim must be 2 or 4")

    def sample(self, times) -> np.ndarray:
        h = np.asarray(self.evaluator(np.asarray(times, dtype=float)))
        if h.shape[-2:] != (self.dim, self.dim):
            raise ContractViolationError(f"evaluator returned shape {h.shape}")
        return h

    def check_hermitian(self, times) -> float:
        h = self.sample(times)
        defect = float(np.max(np.linalg.norm(h - np.conj(np.swapaxes(h, -1, -2)), axis=(-2, -1))))
        if defect > HERMITICITY_TOL:
            raise ContractViolationError(f"evaluator output not Hermitian: defect {defect:.3e}")
        return defect


def drive_form_schedule(a, b, c, omega: float, phase: float = 0.0) -> HamiltonianSchedule:
    """Schedule for H(t) = A + cos(w t + phase) B + sin(w t + phase) C."""
    am = np.asarray(a, dtype=complex)
    bm = np.asarray(b, dtype=complex)
    cm = np.asarray(c, dtype=complex)

    def evaluator(t):
        tt = np.asarray(t, dtype=float)
        cs = np.cos(omega * tt + phase)[..., None, None]
        sn = np.sin(omega * tt + phase)[..., None, None]
        return am + cs * bm + sn * cm

    return HamiltonianSchedule(dim=am.shape[0], evaluator=evaluator,
                               drive_form=(am, bm, cm, float(omega), float(phase)))


@dataclass(frozen=True)
class Trajectory:
    """Uniform-grid states and propagators; propagators[k] maps states[0] to states[k]."""

    times: np.ndarray        # (N+1,)
    states: np.ndarray       # (N+1, dim)
    propagators: np.ndarray  # (N+1, dim, dim)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def max_norm_drift(self) -> float:
        return float(np.max(np.abs(np.linalg.norm(self.states, axis=1) - 1.0)))


def _rk4_generic(eval_many, t0, t_final, steps, u0, record_stride=0):
    """RK4 for stacked U (..., d, d) with a per-stage evaluator call."""
    dt = (t_final - t0) / steps
    u = u0.astype(complex, copy=True)
    rec = None
    if record_stride:
        rec = np.empty((steps // record_stride + 1,) + u.shape, dtype=complex)
        rec[0] = u
    for k in range(steps):
        t = t0 + k * dt
        h1 = eval_many(t)
        h2 = eval_many(t + dt / 2)
        h3 = eval_many(t + dt)
        k1 = -1j * (h1 @ u)
        k2 = -1j * (h2 @ (u + (dt / 2) * k1))
        k3 = -1j * (h2 @ (u + (dt / 2) * k2))
        k4 = -1j * (h3 @ (u + dt * k3))
        u = u + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        if record_stride and (k + 1) % record_stride == 0:
            rec[(k + 1) // record_stride] = u
    return u, rec


def _rk4_drive(a, b, c, omega, phase, t0, t_final, steps, u0, record_stride=0):
    """Same recursion as _rk4_generic with chunk-precomputed stage Hamiltonians.

    a, b, c are (B, d, d); u0 is (B, d, d).
    """
    dt = (t_final - t0) / steps
    u = u0.astype(complex, copy=True)
    rec = None
    if record_stride:
        rec = np.empty((steps // record_stride + 1,) + u.shape, dtype=complex)
        rec[0] = u
    half = dt / 2
    sixth = dt / 6
    for start in range(0, steps, _CHUNK):
        n = min(_CHUNK, steps - start)
        tk = t0 + (start + np.arange(n)) * dt
        stage_t = np.stack([tk, tk + half, tk + dt], axis=1)      # (n, 3)
        ang = omega * stage_t + phase
        cs = np.cos(ang)[..., None, None, None]
        sn = np.sin(ang)[..., None, None, None]
        hs = a + cs * b + sn * c                                  # (n, 3, B, d, d)
        for i in range(n):
            h1 = hs[i, 0]
            h2 = hs[i, 1]
            h3 = hs[i, 2]
            k1 = -1j * (h1 @ u)
            k2 = -1j * (h2 @ (u + half * k1))
            k3 = -1j * (h2 @ (u + half * k2))
            k4 = -1j * (h3 @ (u + dt * k3))
            u = u + sixth * (k1 + 2 * k2 + 2 * k3 + k4)
            step = start + i + 1
            if record_stride and step % record_stride == 0:
                rec[step // record_stride] = u
    return u, rec


def propagate_drive_batch(a, b, c, omega: float, phase: float, t_final: float, steps: int,
                          record_stride: int = 0, t0: float = 0.0):
    """Batched RK4 + Richardson for the drive form, with doubling certificate.

    a, b, c: (B, d, d) stacks. Returns (final (B,d,d), records or None,
    certificates (B,)). Records (stride record_stride of the N-step grid)
    are Richardson-refined pointwise.
    """
    if steps < MIN_STEPS:
        raise ContractViolationError(f"steps must be >= {MIN_STEPS}")
    if record_stride and steps % record_stride:
        raise ContractViolationError("record_stride must divide steps")
    batch, dim = a.shape[0], a.shape[-1]
    eye = np.broadcast_to(np.eye(dim, dtype=complex), (batch, dim, dim)).copy()
    u_n, rec_n = _rk4_drive(a, b, c, omega, phase, t0, t_final, steps, eye, record_stride)
    u_2n, rec_2n = _rk4_drive(a, b, c, omega, phase, t0, t_final, 2 * steps, eye,
                              2 * record_stride if record_stride else 0)
    cert = np.linalg.norm(u_2n - u_n, axis=(-2, -1))
    if np.any(cert > CERTIFICATE_TOL):
        worst = float(np.max(cert))
        raise IntegratorAccuracyError(
            f"convergence certificate failed: doubling changed the propagator by {worst:.3e}"
            f" (> {CERTIFICATE_TOL:.1e}); increase steps", achieved=worst)
    final = (16 * u_2n - u_n) / 15
    records = None
    if record_stride:
        records = (16 * rec_2n - rec_n) / 15
        records[-1] = final
    return final, records, cert


def propagate(h: HamiltonianSchedule, t_final: float, steps: int,
              initial_state: Optional[np.ndarray] = None) -> Trajectory:
    """Integrate over [0, t_final]; Richardson-refined grid propagators.

    The final propagator must pass the doubling certificate and have
    unitarity defect <= 1e-8.
    """
    if t_final <= 0:
        raise ContractViolationError("t_final must be > 0")
    if steps < MIN_STEPS:
        raise ContractViolationError(f"steps must be >= {MIN_STEPS}")
    h.check_hermitian(np.linspace(0.0, t_final, 7))

    if h.drive_form is not None:
        a, b, c, omega, phase = h.drive_form
        final, rec, _ = propagate_drive_batch(a[None], b[None], c[None], omega, phase,
                                              t_final, steps, record_stride=1)
        props = rec[:, 0, :, :]
    else:
        def eval_many(t):
            return h.sample(t)[None]

        eye = np.eye(h.dim, dtype=complex)[None]
        u_n, rec_n = _rk4_generic(eval_many, 0.0, t_final, steps, eye, record_stride=1)
        u_2n, rec_2n = _rk4_generic(eval_many, 0.0, t_final, 2 * steps, eye, record_stride=2)
        cert = float(np.linalg.norm(u_2n - u_n))
        if cert > CERTIFICATE_TOL:
            raise IntegratorAccuracyError(
                f"convergence certificate failed: doubling changed the propagator by "
                f"{cert:.3e} (> {CERTIFICATE_TOL:.1e}); increase steps", achieved=cert)
        props = ((16 * rec_2n - rec_n) / 15)[:, 0, :, :]

    defect = unitarity_defect(props[-1])
    if defect > 1e-8:
        raise IntegratorAccuracyError(f"final unitarity defect {defect:.3e} > 1e-8",
                                      achieved=defect)
    if initial_state is None:
        psi0 = np.zeros(h.dim, dtype=complex)
        psi0[0] = 1.0
    else:
        psi0 = np.asarray(initial_state, dtype=complex)
        if psi0.shape != (h.dim,):
            raise ContractViolationError(f"initial_state must have shape ({h.dim},)")
        nrm = np.linalg.norm(psi0)
        if abs(nrm - 1) > 1e-8:
            raise ContractViolationError(f"initial_state norm {nrm} is not 1 within 1e-8")
    times = np.linspace(0.0, t_final, steps + 1)
    states = props @ psi0
    return Trajectory(times=times, states=states, propagators=props)


def dynamic_phase_numeric(traj: Trajectory, h: HamiltonianSchedule) -> float:
    """Trapezoid of <psi(t)|H(t)|psi(t)> over the stored grid."""
    hs = h.sample(traj.times)
    energies = np.einsum("ti,tij,tj->t", np.conj(traj.states), hs, traj.states).real
    dt = traj.times[1] - traj.times[0]
    return float(dt * (energies[0] / 2 + energies[1:-1].sum() + energies[-1] / 2))


def geometric_phase_numeric(traj: Trajectory, h: HamiltonianSchedule) -> float:
    """Aharonov-Anandan phase of a cyclic trajectory, in (-pi, pi].

    Requires |<psi(0)|psi(T)>| >= 1 - 1e-6; the total phase convention is
    psi(T) = exp(-i dynamic) * exp(i geometric) * psi(0).
    """
    overlap = complex(np.vdot(traj.states[0], traj.states[-1]))
    if abs(overlap) < 1 - CYCLICITY_TOL:
        raise CyclicityError(f"initial state not cyclic: |overlap| = {abs(overlap):.9f}",
                             overlap=abs(overlap))
    total = float(np.angle(overlap))
    return fold_angle(total + dynamic_phase_numeric(traj, h))


def density_evolution(rho0, h: HamiltonianSchedule, t_final: float,
                      steps: int = 2000) -> np.ndarray:
    """rho(t_final) = U rho0 U^dag with U from propagate."""
    rho = np.asarray(rho0, dtype=complex)
    if rho.shape != (h.dim, h.dim):
        raise ContractViolationError(f"rho0 must be ({h.dim},{h.dim})")
    if np.linalg.norm(rho - rho.conj().T) > 1e-10:
        raise ContractViolationError("rho0 not Hermitian within 1e-10")
    tr = complex(np.trace(rho))
    if abs(tr - 1) > 1e-10:
        raise ContractViolationError("rho0 trace not 1 within 1e-10")
    if np.min(np.linalg.eigvalsh(rho)) < -1e-10:
        raise ContractViolationError("rho0 not positive semidefinite within 1e-10")
    traj = propagate(h, t_final, steps)
    u = traj.propagators[-1]
    return u @ rho @ u.conj().T
