"""Two driven spins with Ising coupling, and the geometric phase gate.

H(t) = h1(t) (x) 1 + 1 (x) h2(t) + J Sz (x) Sz, both spins sharing one
circularly polarized drive (amplitude omega1, rotation frequency omega_R).
The free and coupling parts are both diagonal and commute exactly.

Gate: after one clockwise drive cycle the dressed state of spin a with
label m acquires the geometric phase -2 pi m cos(theta_a*) where

    tan(theta_a*) = sin(theta_a) / (cos(theta_a) + omega_R / Omega_a),
    cos(theta_a)  = omega0a / Omega_a,  Omega_a^2 = omega0a^2 + omega1^2.

The dynamic phases are removed by a two-cycle compound contour: cycle C
(clockwise, drive phase 0), instantaneous pi pulses on both spins, cycle C'
with the polarization sense reversed and the drive phase shifted by pi,
pi pulses again. The pulse axes lie in the xz plane tilted from x by
(theta_a+ - theta_a-)/2 with theta_a(+-) = atan2(omega1, omega0a +- omega_R),
which maps the C cones exactly onto the C' cones; the net operator is then
exactly diagonal in the cycle-C dressed basis with doubled geometric phases

    gamma_a(contour) = -pi (Omegatilde_a+ - Omegatilde_a-) / omega_R,
    Omegatilde_a(+-) = sqrt((omega0a +- omega_R)^2 + omega1^2),

which tends to the display value -2 pi cos(theta_a*) as omega_R/Omega_a -> 0.
Plain x pulses are kept as an option (gate error O(omega_R/Omega)).

The J coupling does not enter the geometric phases (it does not move the
cone on the Bloch sphere) but its dynamic ZZ phase survives any echo built
from simultaneous pulses; J independence is therefore a statement about
the extracted per-spin phases, see `phase_pattern`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .drive import CCW, CW, DriveParams
from .errors import ContractViolationError, DegenerateDriveError
from .linalg import IDENT2, SX, SY, SZ, Unitary, su2_exp, tensor_product
from .oracle import HamiltonianSchedule, drive_form_schedule, propagate

SZ1 = np.kron(SZ, IDENT2)
SZ2 = np.kron(IDENT2, SZ)
SZZ = np.kron(SZ, SZ)

SWAP = np.array([[1, 0, 0, 0],
                 [0, 0, 1, 0],
                 [0, 1, 0, 0],
                 [0, 0, 0, 1]], dtype=complex)

DISTINCTNESS_REL_GAP = 1e-6


@dataclass(frozen=True)
class TwoSpinParams:
    """4-level system: two longitudinal splittings, Ising J, one shared drive."""

    omega01: float
    omega02: float
    J: float
    omega1: float
    omega_R: float
    tau_decoherence: Optional[float] = None

    def __post_init__(self):
        scale = max(abs(self.omega01), abs(self.omega02))
        if scale == 0.0 or abs(self.omega01 - self.omega02) < DISTINCTNESS_REL_GAP * scale:
            raise ContractViolationError(
                "omega01 and omega02 must differ by a relative gap >= 1e-6")
        if self.omega1 < 0:
            raise ContractViolationError("omega1 must be >= 0")
        if self.omega_R <= 0:
            raise ContractViolationError("omega_R must be > 0")
        if self.tau_decoherence is not None and self.tau_decoherence <= 0:
            raise ContractViolationError("tau_decoherence must be > 0 when given")

    @property
    def period(self) -> float:
        return 2 * np.pi / self.omega_R

    def drive_for(self, spin: int) -> DriveParams:
        w0 = {1: self.omega01, 2: self.omega02}[spin]
        return DriveParams(omega_parallel=w0, omega_perp=self.omega1, omega_R=self.omega_R)


@dataclass(frozen=True)
class GeometricGate:
    """Display and contour-exact gate phases plus the diagonal gate matrix."""

    gamma1: float
    gamma2: float
    matrix: Unitary
    echo_doubled: bool
    gamma1_contour: float
    gamma2_contour: float
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class EchoSegment:
    schedule: HamiltonianSchedule
    duration: float
    label: str


@dataclass(frozen=True)
class EchoSchedule:
    """Two full drive cycles with instantaneous pi pulses after each."""

    segments: tuple[EchoSegment, ...]
    pulses: tuple[Unitary, ...]
    pulse_mode: str

    @property
    def total_drive_duration(self) -> float:
        return float(sum(s.duration for s in self.segments))


def spin_hamiltonian(p: TwoSpinParams, t, sense: int = CW,
                     drive_phase: float = 0.0) -> np.ndarray:
    """Lab-frame 4x4 H(t); t may be a scalar or an array (leading axis)."""
    if sense not in (CCW, CW):
        raise ContractViolationError("sense must be +1 or -1")
    tt = np.asarray(t, dtype=float)
    cx = np.cos(p.omega_R * tt + drive_phase)[..., None, None]
    sy = (sense * np.sin(p.omega_R * tt + drive_phase))[..., None, None]
    drive = p.omega1 * (cx * (np.kron(SX, IDENT2) + np.kron(IDENT2, SX))
                        + sy * (np.kron(SY, IDENT2) + np.kron(IDENT2, SY)))
    return p.omega01 * SZ1 + p.omega02 * SZ2 + p.J * SZZ + drive


DRIVE_X4 = np.kron(SX, IDENT2) + np.kron(IDENT2, SX)
DRIVE_Y4 = np.kron(SY, IDENT2) + np.kron(IDENT2, SY)


def schedule(p: TwoSpinParams, sense: int = CW, drive_phase: float = 0.0) -> HamiltonianSchedule:
    """Lab-frame 4x4 schedule in integrator drive form."""
    if sense not in (CCW, CW):
        raise ContractViolationError("sense must be +1 or -1")
    static = p.omega01 * SZ1 + p.omega02 * SZ2 + p.J * SZZ
    return drive_form_schedule(static, p.omega1 * DRIVE_X4, sense * p.omega1 * DRIVE_Y4,
                               p.omega_R, drive_phase)


def theta_angles(p: TwoSpinParams, spin: int) -> tuple[float, float]:
    """(theta_a, theta_a*) for one spin, full-field Omega convention."""
    w0 = {1: p.omega01, 2: p.omega02}[spin]
    omega_a = float(np.hypot(w0, p.omega1))
    if omega_a == 0.0:
        raise DegenerateDriveError(f"Omega_{spin} = 0")
    theta = float(np.arctan2(p.omega1, w0))
    theta_star = float(np.arctan2(p.omega1, w0 + p.omega_R))
    return theta, theta_star


def gamma_display(p: TwoSpinParams, spin: int, doubled: bool = True) -> float:
    """-2 pi cos(theta_a*) when doubled, -pi cos(theta_a*) for a single cycle."""
    _, theta_star = theta_angles(p, spin)
    return float((-2 * np.pi if doubled else -np.pi) * np.cos(theta_star))


def gamma_contour(p: TwoSpinParams, spin: int, doubled: bool = True) -> float:
    """Exact doubled phase realized by the matched-pulse echo contour."""
    w0 = {1: p.omega01, 2: p.omega02}[spin]
    om_plus = np.hypot(w0 + p.omega_R, p.omega1)
    om_minus = np.hypot(w0 - p.omega_R, p.omega1)
    g = -np.pi * (om_plus - om_minus) / p.omega_R
    return float(g if doubled else g / 2)


def gate_matrix(gamma1: float, gamma2: float) -> Unitary:
    """diag(e^{i(g1+g2)}, e^{i(g1-g2)}, e^{i(-g1+g2)}, e^{-i(g1+g2)})."""
    d = np.array([np.exp(1j * (gamma1 + gamma2)),
                  np.exp(1j * (gamma1 - gamma2)),
                  np.exp(1j * (-gamma1 + gamma2)),
                  np.exp(-1j * (gamma1 + gamma2))])
    return Unitary.certify(np.diag(d), tol=1e-12)


def geometric_gate(p: TwoSpinParams, echo_doubled: bool = True) -> GeometricGate:
    """Gate phases from the cycle displays and the corresponding Eq-type matrix."""
    g1 = gamma_display(p, 1, echo_doubled)
    g2 = gamma_display(p, 2, echo_doubled)
    warnings = ()
    if p.tau_decoherence is not None and p.tau_decoherence <= 10 * p.period:
        warnings = ("decoherence time does not satisfy tau >> 1/omega_R "
                    f"(tau = {p.tau_decoherence:g}, 10 T = {10 * p.period:g})",)
    return GeometricGate(gamma1=g1, gamma2=g2, matrix=gate_matrix(g1, g2),
                         echo_doubled=echo_doubled,
                         gamma1_contour=gamma_contour(p, 1, echo_doubled),
                         gamma2_contour=gamma_contour(p, 2, echo_doubled),
                         warnings=warnings)


def dressing(p: TwoSpinParams, spin: int) -> np.ndarray:
    """Cycle-C dressed basis of one spin, columns ordered (m=+1/2, m=-1/2).

    Eigenbasis of (omega0a + omega_R) Sz + omega1 Sx, gauge: largest
    component real positive.
    """
    w0 = {1: p.omega01, 2: p.omega02}[spin]
    heff = (w0 + p.omega_R) * SZ + p.omega1 * SX
    _, vecs = np.linalg.eigh(heff)
    w = np.column_stack([vecs[:, 1], vecs[:, 0]])
    for k in range(2):
        j = int(np.argmax(np.abs(w[:, k])))
        w[:, k] = w[:, k] * np.exp(-1j * np.angle(w[j, k]))
    return w


def dressing4(p: TwoSpinParams) -> np.ndarray:
    return np.kron(dressing(p, 1), dressing(p, 2))


def _pulse_axis_polar(p: TwoSpinParams, spin: int, pulse_mode: str) -> float:
    """Polar angle (from +z) of the pi-pulse axis in the xz plane."""
    if pulse_mode == "x":
        return np.pi / 2
    if pulse_mode == "matched":
        w0 = {1: p.omega01, 2: p.omega02}[spin]
        th_plus = np.arctan2(p.omega1, w0 + p.omega_R)
        th_minus = np.arctan2(p.omega1, w0 - p.omega_R)
        return (np.pi + th_plus - th_minus) / 2
    raise ContractViolationError(f"unknown pulse_mode {pulse_mode!r}")


def echo_pulse(p: TwoSpinParams, pulse_mode: str = "matched") -> Unitary:
    """Simultaneous instantaneous pi pulses, one per spin."""
    parts = []
    for spin in (1, 2):
        beta = _pulse_axis_polar(p, spin, pulse_mode)
        parts.append(su2_exp((np.sin(beta), 0.0, np.cos(beta)), np.pi).matrix)
    return Unitary.certify(tensor_product(parts[0], parts[1]), tol=1e-12)


def echo_schedule(p: TwoSpinParams, pulse_mode: str = "matched") -> EchoSchedule:
    """[cycle C] pulse [cycle C'] pulse, total drive duration 2 T."""
    t_cycle = p.period
    seg1 = EchoSegment(schedule(p, sense=CW, drive_phase=0.0), t_cycle, "cycle")
    seg2 = EchoSegment(schedule(p, sense=CCW, drive_phase=np.pi), t_cycle, "counter-cycle")
    pulse = echo_pulse(p, pulse_mode)
    return EchoSchedule(segments=(seg1, seg2), pulses=(pulse, pulse), pulse_mode=pulse_mode)


def echo_evolution(p: TwoSpinParams, steps: int, pulse_mode: str = "matched",
                   frame: str = "dressed") -> Unitary:
    """Net operator of the echo schedule, via the ODE oracle.

    frame="dressed" conjugates into the cycle-C dressed product basis (the
    basis in which the realized gate is diagonal); frame="lab" returns the
    raw net operator.
    """
    if steps < 1000:
        raise ContractViolationError("steps must be >= 1000")
    if frame not in ("dressed", "lab"):
        raise ContractViolationError(f"unknown frame {frame!r}")
    sched = echo_schedule(p, pulse_mode)
    net = np.eye(4, dtype=complex)
    for seg, pulse in zip(sched.segments, sched.pulses):
        traj = propagate(seg.schedule, seg.duration, steps)
        net = pulse.matrix @ traj.propagators[-1] @ net
    if frame == "dressed":
        w = dressing4(p)
        net = w.conj().T @ net @ w
    return Unitary.certify(net, tol=1e-7)


def single_spin_echo(w0: float, w1: float, wR: float, steps: int,
                     pulse_mode: str = "matched") -> np.ndarray:
    """2x2 echo net operator for one spin (lab frame), for factorization checks."""
    seg1 = drive_form_schedule(w0 * SZ, w1 * SX, -w1 * SY, wR, 0.0)
    seg2 = drive_form_schedule(w0 * SZ, w1 * SX, +w1 * SY, wR, np.pi)
    th_plus = np.arctan2(w1, w0 + wR)
    th_minus = np.arctan2(w1, w0 - wR)
    beta = np.pi / 2 if pulse_mode == "x" else (np.pi + th_plus - th_minus) / 2
    pulse = su2_exp((np.sin(beta), 0.0, np.cos(beta)), np.pi).matrix
    t_cycle = 2 * np.pi / wR
    u1 = propagate(seg1, t_cycle, steps).propagators[-1]
    u2 = propagate(seg2, t_cycle, steps).propagators[-1]
    return pulse @ u2 @ pulse @ u1


def phase_pattern(u4) -> dict:
    """Decompose a near-diagonal 4x4 unitary's phases into the gate pattern.

    angles(diag) = g0 + 2 m1 g1 + 2 m2 g2 + 4 m1 m2 gzz over the basis
    (uu, ud, du, dd); the per-spin parts g1, g2 are insensitive to any ZZ
    phase by construction. Returns g0, g1, g2, gzz and the off-diagonal norm.
    """
    m = u4.matrix if isinstance(u4, Unitary) else np.asarray(u4, dtype=complex)
    ph = np.angle(np.diag(m))
    return {
        "g0": float((ph[0] + ph[1] + ph[2] + ph[3]) / 4),
        "g1": float((ph[0] + ph[1] - ph[2] - ph[3]) / 4),
        "g2": float((ph[0] - ph[1] + ph[2] - ph[3]) / 4),
        "gzz": float((ph[0] - ph[1] - ph[2] + ph[3]) / 4),
        "offdiag": float(np.linalg.norm(m - np.diag(np.diag(m)))),
    }
