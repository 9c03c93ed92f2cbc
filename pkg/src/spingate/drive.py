"""Single spin in a static longitudinal field plus a circularly polarized wave.

Working Hamiltonian (frequency units, hbar = 1):

    H(t) = w_par * Sz + w_perp * (cos(wR t) Sx + sense * sin(wR t) Sy)

`sense` is the circular polarization sense: +1 (counter-clockwise, the
default for the propagator sector) or -1 (clockwise). Both are exactly
solvable in the frame co-rotating with the drive:

    U(t) = exp(-i sense wR t Sz) . exp(-i t (delta Sz + w_perp Sx)),
    delta = w_par - sense * wR.

Two distinct Rabi frequencies matter and are kept separate throughout:

  * omega_rabi  = sqrt(delta^2 + w_perp^2), the rotating-frame precession
    rate; it governs the propagator decomposition (|xi|, alpha).
  * omega_full  = sqrt(w_par^2 + w_perp^2), the full-field Rabi frequency;
    it governs the cycle-phase geometry (theta_star, phase split).

The cycle-phase formulas (`cycle_phases`, `geometric_phase_shift`) describe
the clockwise cycle, for which they are exact:

    tan(theta_star) = sin(theta) / (cos(theta) + wR / omega_full)

is then exactly the cone tilt of the cyclic (dressed) states, the dynamic
phase phi_D = 2 pi m (omega_full / wR) cos(theta - theta_star) is exactly
the one-cycle energy integral, and the per-state geometric phase is
gamma = -2 pi m cos(theta_star) up to the spin-1/2 sign of the 2 pi frame
rotation (exp(-+ i pi) per cycle; see `cyclic_geometric_oracle_value`).
That spinor sign cancels in the m = +-1/2 phase difference and in any
even number of cycles.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, DegenerateDriveError
from .linalg import IDENT2, PAULI_X, PAULI_Z, SX, SY, SZ, Unitary, fold_angle

CCW = +1
CW = -1

HALF_M = (0.5, -0.5)


@dataclass(frozen=True)
class DriveParams:
    """Control field of one spin, in rad/s.

    omega_parallel may be negative (static field along -z); omega_perp is
    the transverse drive amplitude; omega_R the drive rotation frequency.
    """

    omega_parallel: float
    omega_perp: float
    omega_R: float

    def __post_init__(self):
        if not np.isfinite(self.omega_parallel):
            raise ContractViolationError("omega_parallel must be finite")
        if self.omega_perp < 0:
            raise ContractViolationError("omega_perp must be >= 0")
        if self.omega_R <= 0:
            raise ContractViolationError("omega_R must be > 0")
        if self.omega_parallel == 0.0 and self.omega_perp == 0.0:
            raise ContractViolationError("omega_parallel and omega_perp cannot both be zero")

    @property
    def period(self) -> float:
        return 2 * np.pi / self.omega_R


@dataclass(frozen=True)
class DerivedAngles:
    delta_omega: float     # w_par - wR
    omega_rabi: float      # sqrt(delta^2 + w_perp^2), rotating-frame rate
    omega_full: float      # sqrt(w_par^2 + w_perp^2), full-field rate
    theta: float           # field tilt, atan2(w_perp, w_par)
    theta_star: float      # cyclic cone tilt of the clockwise cycle


@dataclass(frozen=True)
class PhaseSplit:
    """One-cycle phase split of the cyclic state with azimuthal number m."""

    m: float
    dynamic: float
    geometric: float


@dataclass(frozen=True)
class PropagatorDecomposition:
    """Exact propagator in the shape exp(xihat S+ - xihat* S-) exp(-i phi Sz).

    xi is sine-parametrized: |xi| equals the off-diagonal magnitude
    w_perp |sin(Omega t / 2)| / Omega, and the generator coefficient is
    xihat = arcsin(|xi|) e^{i arg xi}. phi is continuously unwrapped so the
    reassembly is exact at all t.
    """

    xi: complex
    phi: float
    propagator: Unitary


def derive_angles(p: DriveParams) -> DerivedAngles:
    """Detuning, both Rabi frequencies, field tilt and cyclic cone tilt."""
    delta = p.omega_parallel - p.omega_R
    omega_rabi = float(np.hypot(delta, p.omega_perp))
    if omega_rabi == 0.0:
        raise DegenerateDriveError("omega_rabi = 0: resonant drive with no transverse field")
    omega_full = float(np.hypot(p.omega_parallel, p.omega_perp))
    theta = float(np.arctan2(p.omega_perp, p.omega_parallel))
    theta_star = float(np.arctan2(np.sin(theta), np.cos(theta) + p.omega_R / omega_full))
    return DerivedAngles(delta_omega=float(delta), omega_rabi=omega_rabi,
                         omega_full=omega_full, theta=theta, theta_star=theta_star)


def single_spin_hamiltonian(p: DriveParams, t, sense: int = CCW) -> np.ndarray:
    """Lab-frame H(t); t may be a scalar or an array (leading time axis)."""
    _check_sense(sense)
    tt = np.asarray(t, dtype=float)
    cx = np.cos(p.omega_R * tt)[..., None, None]
    sy = (sense * np.sin(p.omega_R * tt))[..., None, None]
    return p.omega_parallel * SZ + p.omega_perp * (cx * SX + sy * SY)


def drive_schedule(p: DriveParams, sense: int = CCW, drive_phase: float = 0.0):
    """HamiltonianSchedule for the working H(t), in integrator drive form."""
    from .oracle import drive_form_schedule

    _check_sense(sense)
    return drive_form_schedule(p.omega_parallel * SZ, p.omega_perp * SX,
                               sense * p.omega_perp * SY, p.omega_R, drive_phase)


def effective_detuning(p: DriveParams, sense: int = CCW) -> float:
    """z component of the rotating-frame field: w_par - sense * wR."""
    _check_sense(sense)
    return p.omega_parallel - sense * p.omega_R


def effective_rabi(p: DriveParams, sense: int = CCW) -> float:
    """Rotating-frame precession rate for the given sense."""
    return float(np.hypot(effective_detuning(p, sense), p.omega_perp))


def _check_sense(sense: int) -> None:
    if sense not in (CCW, CW):
        raise ContractViolationError(f"sense must be +1 or -1, got {sense!r}")


def alpha_unwrapped(p: DriveParams, t: float, sense: int = CCW) -> float:
    """alpha(t) = arctan((delta/Omega) tan(Omega t / 2)), branch-tracked.

    The principal arctan jumps by pi at Omega t/2 = pi/2 + k pi; the unwrap
    keeps alpha (and with it xi and phi) continuous in t.
    """
    delta = effective_detuning(p, sense)
    om = float(np.hypot(delta, p.omega_perp))
    if om == 0.0:
        raise DegenerateDriveError("omega_rabi = 0")
    x = om * t / 2
    k = np.floor(x / np.pi + 0.5)
    return float(np.arctan((delta / om) * np.tan(x)) + np.pi * np.sign(delta) * k)


def xi_magnitude(p: DriveParams, t: float) -> float:
    """|xi(t)| = w_perp |sin(Omega t / 2)| / Omega (counter-clockwise sense)."""
    if t < 0:
        raise ContractViolationError("t must be >= 0")
    ang = derive_angles(p)
    return p.omega_perp * abs(np.sin(ang.omega_rabi * t / 2)) / ang.omega_rabi


def xi_phase(p: DriveParams, t: float) -> float:
    """Published phase convention: arg xi = delta t + alpha(t) + pi/2, unwrapped.

    Note: the operator decomposition of the working closed form carries a
    different (frame-shifted) phase; see PropagatorDecomposition and README.
    """
    if t < 0:
        raise ContractViolationError("t must be >= 0")
    ang = derive_angles(p)
    return ang.delta_omega * t + alpha_unwrapped(p, t, CCW) + np.pi / 2


def analytic_propagator(p: DriveParams, t: float, sense: int = CCW) -> PropagatorDecomposition:
    """Exact U(t) via the rotating-frame closed form, plus its decomposition.

    The decomposition phases are the ones forced by the operator itself:
    arg xi = -(sense wR t + alpha + pi/2) with the signed sine carried in
    the phase, and phi = sense wR t + 2 alpha, both continuously unwrapped.
    """
    if t < 0:
        raise ContractViolationError("t must be >= 0")
    _check_sense(sense)
    delta = effective_detuning(p, sense)
    om = float(np.hypot(delta, p.omega_perp))
    if om == 0.0:
        raise DegenerateDriveError("omega_rabi = 0: decomposition undefined")
    half = om * t / 2
    frame = np.diag([np.exp(-1j * sense * p.omega_R * t / 2),
                     np.exp(+1j * sense * p.omega_R * t / 2)])
    axis = (p.omega_perp * PAULI_X + delta * PAULI_Z) / om
    rot = np.cos(half) * IDENT2 - 1j * np.sin(half) * axis
    u = Unitary.certify(frame @ rot, tol=1e-12)

    alpha = alpha_unwrapped(p, t, sense)
    signed_sin = np.sin(half)
    xi = (p.omega_perp / om) * signed_sin * np.exp(1j * (-sense * p.omega_R * t - alpha - np.pi / 2))
    phi = sense * p.omega_R * t + 2 * alpha
    return PropagatorDecomposition(xi=complex(xi), phi=float(phi), propagator=u)


def reassemble_propagator(xi: complex, phi: float) -> Unitary:
    """Rebuild exp(xihat S+ - xihat* S-) exp(-i phi Sz), xihat = arcsin|xi| e^{i arg xi}."""
    absxi = abs(xi)
    if absxi > 1 + 1e-12:
        raise ContractViolationError(f"|xi| = {absxi} > 1")
    a = np.arcsin(min(absxi, 1.0))
    if absxi == 0.0:
        block = IDENT2
    else:
        direction = xi / absxi
        block = np.array([[np.cos(a), direction * np.sin(a)],
                          [-np.conj(direction) * np.sin(a), np.cos(a)]], dtype=complex)
    dz = np.diag([np.exp(-1j * phi / 2), np.exp(1j * phi / 2)])
    return Unitary.certify(block @ dz, tol=1e-12)


def cyclic_states(p: DriveParams, sense: int = CW) -> dict[float, np.ndarray]:
    """Dressed states cyclic under one drive period, keyed by m = +-1/2.

    These are the eigenstates of the rotating-frame effective Hamiltonian
    delta_eff Sz + w_perp Sx (equal to the lab states at t = 0), with a
    fixed gauge: largest component real positive.
    """
    delta = effective_detuning(p, sense)
    heff = delta * SZ + p.omega_perp * SX
    evals, evecs = np.linalg.eigh(heff)
    out = {}
    for m, idx in ((0.5, 1), (-0.5, 0)):
        v = evecs[:, idx].copy()
        k = int(np.argmax(np.abs(v)))
        v *= np.exp(-1j * np.angle(v[k]))
        out[m] = v
    return out


def _check_m(m: float) -> None:
    if m not in HALF_M:
        raise ContractViolationError(f"m must be +0.5 or -0.5, got {m!r}")


def cycle_phases(p: DriveParams, m: float) -> PhaseSplit:
    """Dynamic and geometric phase of the m cyclic state over one period.

    phi_D = 2 pi m (omega_full / wR) cos(theta - theta_star),
    gamma = -2 pi m cos(theta_star); exact for the clockwise cycle (the
    dynamic part equals the energy integral identically; the geometric part
    holds up to the per-cycle spinor sign, see module docstring).
    """
    _check_m(m)
    ang = derive_angles(p)
    dynamic = 2 * np.pi * m * (ang.omega_full / p.omega_R) * np.cos(ang.theta - ang.theta_star)
    geometric = -2 * np.pi * m * np.cos(ang.theta_star)
    return PhaseSplit(m=m, dynamic=float(dynamic), geometric=float(geometric))


def geometric_phase_shift(p: DriveParams) -> float:
    """Phase shift between the m = +-1/2 cyclic states: -2 pi cos(theta_star)."""
    ang = derive_angles(p)
    return float(-2 * np.pi * np.cos(ang.theta_star))


def cyclic_geometric_oracle_value(p: DriveParams, m: float) -> float:
    """The Aharonov-Anandan phase a Schroedinger oracle extracts for state m.

    Equals the display value -2 pi m cos(theta_star) shifted by the exact
    spinor sign of the 2 pi frame rotation, folded into (-pi, pi].
    """
    _check_m(m)
    split = cycle_phases(p, m)
    return fold_angle(split.geometric - np.pi)
