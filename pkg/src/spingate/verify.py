"""Acceptance verification: analytic formulas against the ODE oracle.

Grid realization (omega_R = 1 throughout):

  * off-resonance branch: for each (theta, r) the drive is built with the
    full-field parametrization Omega_full = 1/r, omega_par = cos(theta)/r,
    omega_perp = sin(theta)/r, so theta is the field tilt and r the
    adiabaticity ratio omega_R / Omega_full.
  * resonance branch: delta_omega = 0 demands omega_par = omega_R, which is
    geometrically compatible only with tilts below pi/2; grid tilts above
    pi/2 are mirrored to pi - theta. omega_perp = tan(tilt).

Checks run per row:

  1. exact solvability: analytic closed form vs oracle propagator (the
     spec's +sin working Hamiltonian).
  2. phase split: oracle dynamic phase vs the display
     2 pi m (Omega_full/omega_R) cos(theta - theta*) (exact), and oracle
     geometric phase vs -2 pi m cos(theta*) with the documented spinor
     offset pi (the raw residual, which sits at pi, is reported too).
  3. solid angle: gamma(+1/2) - gamma(-1/2) = -2 pi cos(theta*) mod 2 pi.

The cycle displays describe the clockwise cycle, so checks 2-3 drive the
oracle clockwise; check 1 uses the counter-clockwise form they are stated
for. Remaining criteria (adiabatic limit, echo gate, J independence, swap
symmetry, synthesis round trip, oracle health) are point checks described
in their functions.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import drive
from .drive import CCW, CW, DriveParams
from .linalg import (SX, SY, SZ, angle_distance, fold_angle, frobenius_distance,
                     global_phase_distance, unitarity_defect)
from .oracle import drive_form_schedule, propagate, propagate_drive_batch, _rk4_generic
from .synthesis import SynthesisTarget, forward_theta_star, synthesize
from .twoqubit import (SWAP, TwoSpinParams, dressing4, echo_evolution, gamma_contour,
                       gamma_display, gate_matrix, geometric_gate, phase_pattern,
                       theta_angles)

GRID_THETAS = tuple(np.linspace(0.1, 3.0, 10))
GRID_RATIOS = (0.01, 0.1, 0.5, 1.0, 2.0)
ADIABATIC_RATIOS = (1.0, 0.5, 0.1, 0.01, 0.001)
SEED_ROUNDTRIP = 20260809

TOL_EXACT = 1e-8
TOL_PHASE = 1e-6
TOL_GATE_DISTANCE = 1e-4
TOL_GATE_DIAG = 1e-6
TOL_J_GEOMETRIC = 1e-6
TOL_SWAP = 1e-12
TOL_ROUNDTRIP = 1e-8
TOL_BISECTION = 1e-12


@dataclass(frozen=True)
class GridRow:
    theta: float
    ratio: float
    branch: str
    params: DriveParams


def build_grid() -> list[GridRow]:
    rows = []
    for theta in GRID_THETAS:
        for r in GRID_RATIOS:
            omega_full = 1.0 / r
            rows.append(GridRow(theta=float(theta), ratio=float(r), branch="off-resonance",
                                params=DriveParams(omega_parallel=omega_full * np.cos(theta),
                                                   omega_perp=omega_full * np.sin(theta),
                                                   omega_R=1.0)))
    for theta in GRID_THETAS:
        tilt = float(theta if theta < np.pi / 2 else np.pi - theta)
        p = DriveParams(omega_parallel=1.0, omega_perp=float(np.tan(tilt)), omega_R=1.0)
        rows.append(GridRow(theta=tilt, ratio=1.0 / drive.derive_angles(p).omega_full,
                            branch="resonance", params=p))
    return rows


def _grid_steps(rows: list[GridRow]) -> int:
    """One shared step count: 480 RK4 steps per effective cycle, worst row."""
    worst = 1.0
    for row in rows:
        p = row.params
        for sense in (CCW, CW):
            worst = max(worst, drive.effective_rabi(p, sense) / p.omega_R)
    return 480 * int(np.ceil(worst + 2))


def _stack_drive(rows: list[GridRow], sense: int):
    a = np.stack([r.params.omega_parallel * SZ for r in rows])
    b = np.stack([r.params.omega_perp * SX for r in rows])
    c = np.stack([sense * r.params.omega_perp * SY for r in rows])
    return a, b, c


def check_exact_solvability(rows: list[GridRow], steps: int | None = None) -> dict:
    """Criterion 1: closed form vs oracle over one period, ccw sense."""
    steps = steps or _grid_steps(rows)
    a, b, c = _stack_drive(rows, CCW)
    t_final = 2 * np.pi  # omega_R = 1 on the grid
    final, _, _ = propagate_drive_batch(a, b, c, 1.0, 0.0, t_final, steps)
    distances = []
    defects = []
    for k, row in enumerate(rows):
        dec = drive.analytic_propagator(row.params, t_final, CCW)
        distances.append(frobenius_distance(final[k], dec.propagator.matrix))
        defects.append(unitarity_defect(final[k]))
    max_d = max(distances)
    return {
        "steps": steps,
        "rows": [
            {"theta": row.theta, "ratio": row.ratio, "branch": row.branch, "distance": d}
            for row, d in zip(rows, distances)
        ],
        "max_distance": max_d,
        "max_unitarity_defect": max(defects),
        "tolerance": TOL_EXACT,
        "pass": bool(max_d <= TOL_EXACT),
    }


def check_phase_split(rows: list[GridRow], steps: int | None = None) -> dict:
    """Criteria 2 and 3: oracle phase split vs displays, cw cycle."""
    steps = steps or _grid_steps(rows)
    stride = 16
    steps = int(np.ceil(steps / stride)) * stride
    a, b, c = _stack_drive(rows, CW)
    t_final = 2 * np.pi
    final, recs, _ = propagate_drive_batch(a, b, c, 1.0, 0.0, t_final, steps,
                                           record_stride=stride)
    grid_t = np.linspace(0.0, t_final, steps // stride + 1)
    out_rows = []
    for k, row in enumerate(rows):
        p = row.params
        ang = drive.derive_angles(p)
        states0 = drive.cyclic_states(p, CW)
        hs = drive.single_spin_hamiltonian(p, grid_t, CW)
        props = recs[:, k]
        dt = grid_t[1] - grid_t[0]
        entry = {"theta": row.theta, "ratio": row.ratio, "branch": row.branch}
        gam_num = {}
        for m in (0.5, -0.5):
            psi = props @ states0[m]
            energies = np.einsum("ti,tij,tj->t", np.conj(psi), hs, psi).real
            dyn_num = float(dt * (energies[0] / 2 + energies[1:-1].sum() + energies[-1] / 2))
            overlap = complex(np.vdot(psi[0], psi[-1]))
            geo_num = fold_angle(float(np.angle(overlap)) + dyn_num)
            split = drive.cycle_phases(p, m)
            gam_num[m] = geo_num
            tag = "p" if m > 0 else "m"
            entry[f"overlap_{tag}"] = abs(overlap)
            entry[f"dynamic_residual_{tag}"] = abs(dyn_num - split.dynamic)
            entry[f"geometric_residual_{tag}"] = angle_distance(
                geo_num, split.geometric - np.pi)
            entry[f"geometric_residual_raw_{tag}"] = angle_distance(geo_num, split.geometric)
        shift = drive.geometric_phase_shift(p)
        entry["solid_angle_residual"] = angle_distance(gam_num[0.5] - gam_num[-0.5], shift)
        entry["theta_star"] = ang.theta_star
        out_rows.append(entry)
    max_dyn = max(max(e["dynamic_residual_p"], e["dynamic_residual_m"]) for e in out_rows)
    max_geo = max(max(e["geometric_residual_p"], e["geometric_residual_m"]) for e in out_rows)
    max_geo_raw = max(max(e["geometric_residual_raw_p"], e["geometric_residual_raw_m"])
                      for e in out_rows)
    max_solid = max(e["solid_angle_residual"] for e in out_rows)
    min_overlap = min(min(e["overlap_p"], e["overlap_m"]) for e in out_rows)
    return {
        "steps": steps,
        "rows": out_rows,
        "max_dynamic_residual": max_dyn,
        "max_geometric_residual_spinor_adjusted": max_geo,
        "max_geometric_residual_raw": max_geo_raw,
        "max_solid_angle_residual": max_solid,
        "min_cyclic_overlap": min_overlap,
        "tolerance": TOL_PHASE,
        "spinor_offset_note": (
            "oracle geometric phases match the display -2 pi m cos(theta*) after the exact "
            "spin-1/2 sign of the 2 pi frame rotation (offset pi per cycle); the raw residual "
            "sits at pi and the offset cancels in the m = +-1/2 difference"),
        "pass_dynamic": bool(max_dyn <= TOL_PHASE),
        "pass_geometric": bool(max_geo <= TOL_PHASE),
        "pass_solid_angle": bool(max_solid <= TOL_PHASE),
        "pass": bool(max_dyn <= TOL_PHASE and max_geo <= TOL_PHASE and max_solid <= TOL_PHASE),
    }


def check_adiabatic(theta: float = 1.0) -> dict:
    """Criterion 4: |theta*(r) - theta| decreasing, <= 1e-2 at r = 1e-3."""
    gaps = []
    for r in ADIABATIC_RATIOS:
        p = DriveParams(omega_parallel=np.cos(theta) / r, omega_perp=np.sin(theta) / r,
                        omega_R=1.0)
        ang = drive.derive_angles(p)
        gaps.append(abs(ang.theta_star - theta))
    decreasing = all(gaps[i] > gaps[i + 1] for i in range(len(gaps) - 1))
    return {
        "theta": theta,
        "ratios": list(ADIABATIC_RATIOS),
        "gaps": gaps,
        "monotone_decreasing": bool(decreasing),
        "final_gap": gaps[-1],
        "tolerance_final": 1e-2,
        "pass": bool(decreasing and gaps[-1] <= 1e-2),
    }


def _echo_steps(p: TwoSpinParams) -> int:
    cycles = max(np.hypot(p.omega01 + p.omega_R, p.omega1),
                 np.hypot(p.omega02 + p.omega_R, p.omega1)) / p.omega_R
    return 480 * int(np.ceil(cycles + 2))


def _gate_point(ratio: float) -> TwoSpinParams:
    omega1 = 0.8
    omega01, omega02 = 1.0, 1.4
    omega_r = ratio * np.hypot(omega01, omega1)
    return TwoSpinParams(omega01=omega01, omega02=omega02, J=0.0, omega1=omega1,
                         omega_R=omega_r)


def check_gate_structure(ratios=(0.1, 0.05)) -> dict:
    """Criterion 5: echo realizes the diagonal gate at the contour phases.

    The drive regimes keep omega_R/Omega_a <= 0.1 for both spins. The echo
    is compared against gate_matrix at the contour-exact doubled phases;
    the distance to the display-phase gate is reported and must shrink
    with the ratio (it is O(omega_R/Omega)).
    """
    points = []
    for r in ratios:
        p = _gate_point(r)
        steps = _echo_steps(p)
        net = echo_evolution(p, steps=steps, pulse_mode="matched", frame="dressed")
        pat = phase_pattern(net)
        gate_c = gate_matrix(gamma_contour(p, 1), gamma_contour(p, 2))
        gate_d = gate_matrix(gamma_display(p, 1), gamma_display(p, 2))
        points.append({
            "ratio": r,
            "steps": steps,
            "ratio_spin2": p.omega_R / np.hypot(p.omega02, p.omega1),
            "diag_defect": pat["offdiag"],
            "distance_contour_gate": global_phase_distance(net.matrix, gate_c.matrix),
            "distance_display_gate": global_phase_distance(net.matrix, gate_d.matrix),
            "gamma1_contour": gamma_contour(p, 1),
            "gamma1_display": gamma_display(p, 1),
        })
    max_dist = max(pt["distance_contour_gate"] for pt in points)
    max_diag = max(pt["diag_defect"] for pt in points)
    display_gaps = [pt["distance_display_gate"] for pt in points]
    return {
        "points": points,
        "max_distance_contour_gate": max_dist,
        "max_diag_defect": max_diag,
        "display_gap_shrinks": bool(all(display_gaps[i] > display_gaps[i + 1]
                                        for i in range(len(display_gaps) - 1))),
        "tolerance_distance": TOL_GATE_DISTANCE,
        "tolerance_diag": TOL_GATE_DIAG,
        "pass": bool(max_dist <= TOL_GATE_DISTANCE and max_diag <= TOL_GATE_DIAG),
    }


def check_j_independence() -> dict:
    """Criterion 6: extracted per-spin geometric parts agree across J.

    Point chosen so the second-order J contamination of the dressed cones
    stays below 1e-6 (see ledgered analysis); the ZZ dynamic phase itself
    survives any simultaneous-pulse echo and is excluded by the pattern
    projection. Operator-level distances are reported for transparency.
    """
    omega1, ratio = 0.8, 0.04
    omega_r = ratio * omega1
    omega01, omega02 = 3e-4, 4.2e-4
    j_values = [0.0, 0.1 * omega01, 0.3 * omega01]
    base = TwoSpinParams(omega01=omega01, omega02=omega02, J=0.0, omega1=omega1,
                         omega_R=omega_r)
    steps = _echo_steps(base)
    patterns = []
    nets = []
    for j in j_values:
        p = TwoSpinParams(omega01=omega01, omega02=omega02, J=j, omega1=omega1,
                          omega_R=omega_r)
        net = echo_evolution(p, steps=steps, pulse_mode="matched", frame="dressed")
        nets.append(net)
        patterns.append(phase_pattern(net))
    pair_geo = []
    pair_op = []
    for i in range(len(j_values)):
        for k in range(i + 1, len(j_values)):
            pair_geo.append(max(abs(patterns[i]["g1"] - patterns[k]["g1"]),
                                abs(patterns[i]["g2"] - patterns[k]["g2"])))
            pair_op.append(global_phase_distance(nets[i].matrix, nets[k].matrix))
    max_geo = max(pair_geo)
    return {
        "point": {"omega01": omega01, "omega02": omega02, "omega1": omega1,
                  "omegaR": omega_r, "steps": steps},
        "j_values": j_values,
        "extracted": [{"J": j, "g1": pat["g1"], "g2": pat["g2"], "gzz": pat["gzz"],
                       "offdiag": pat["offdiag"]}
                      for j, pat in zip(j_values, patterns)],
        "max_pairwise_geometric_shift": max_geo,
        "max_pairwise_operator_distance": max(pair_op),
        "tolerance": TOL_J_GEOMETRIC,
        "note": ("the ZZ dynamic phase commutes with simultaneous pi pulses and is "
                 "inherently J-dependent; J independence holds for the geometric parts"),
        "pass": bool(max_geo <= TOL_J_GEOMETRIC),
    }


def check_swap_symmetry() -> dict:
    """Criterion 7: swapping omega01 <-> omega02 conjugates the gate by SWAP."""
    worst = 0.0
    cases = []
    for (w1, w2, wd, wr) in ((1.0, 1.7, 0.9, 0.2), (0.4, 2.2, 1.3, 0.05), (2.0, 0.5, 0.7, 0.3)):
        p = TwoSpinParams(omega01=w1, omega02=w2, J=0.1, omega1=wd, omega_R=wr)
        q = TwoSpinParams(omega01=w2, omega02=w1, J=0.1, omega1=wd, omega_R=wr)
        gp = geometric_gate(p).matrix.matrix
        gq = geometric_gate(q).matrix.matrix
        d = frobenius_distance(gq, SWAP @ gp @ SWAP)
        cases.append({"omega01": w1, "omega02": w2, "distance": d})
        worst = max(worst, d)
    return {"cases": cases, "max_distance": worst, "tolerance": TOL_SWAP,
            "pass": bool(worst <= TOL_SWAP)}


def check_synthesis_roundtrip(n_targets: int = 20) -> dict:
    """Criterion 8: synthesize then forward-evaluate over seeded random targets."""
    rng = np.random.default_rng(SEED_ROUNDTRIP)
    omega_r, omega1 = 0.3, 1.0
    rows = []
    worst_phase = 0.0
    worst_bisect = 0.0
    for _ in range(n_targets):
        ts1 = rng.uniform(0.2, 2.6)
        ts2 = ts1 + rng.choice([-1.0, 1.0]) * rng.uniform(0.1, 0.5)
        ts2 = min(max(ts2, 0.15), 2.8)
        g1 = -2 * np.pi * np.cos(ts1)
        g2 = -2 * np.pi * np.cos(ts2)
        target = SynthesisTarget(gamma1_target=g1, gamma2_target=g2, omega_R=omega_r,
                                 omega1=omega1, doubled=True)
        result = synthesize(target)
        p = result.params
        res_phase = max(abs(gamma_display(p, 1, True) - g1),
                        abs(gamma_display(p, 2, True) - g2))
        res_bisect = 0.0
        for spin, ts in ((1, ts1), (2, ts2)):
            theta_a, _ = theta_angles(p, spin)
            w0 = p.omega01 if spin == 1 else p.omega02
            r_a = omega_r / np.hypot(w0, omega1)
            res_bisect = max(res_bisect, abs(forward_theta_star(theta_a, r_a) - ts))
        rows.append({"gamma1": g1, "gamma2": g2, "omega01": p.omega01,
                     "omega02": p.omega02, "phase_residual": res_phase,
                     "bisection_residual": res_bisect, "iterations": result.iterations})
        worst_phase = max(worst_phase, res_phase)
        worst_bisect = max(worst_bisect, res_bisect)
    return {
        "targets": len(rows),
        "rows": rows,
        "max_phase_residual": worst_phase,
        "max_bisection_residual": worst_bisect,
        "tolerance_phase": TOL_ROUNDTRIP,
        "tolerance_bisection": TOL_BISECTION,
        "pass": bool(worst_phase <= TOL_ROUNDTRIP and worst_bisect <= TOL_BISECTION),
    }


def check_oracle_health() -> dict:
    """Criterion 9: 4th-order convergence, norm conservation, composition."""
    p = DriveParams(omega_parallel=1.3, omega_perp=0.9, omega_R=1.0)
    t_final = 2 * np.pi
    sched = drive.drive_schedule(p, CCW)

    def eval_many(t):
        return sched.sample(t)[None]

    eye = np.eye(2, dtype=complex)[None]
    u_n, _ = _rk4_generic(eval_many, 0.0, t_final, 400, eye)
    u_2n, _ = _rk4_generic(eval_many, 0.0, t_final, 800, eye)
    ref, _ = _rk4_generic(eval_many, 0.0, t_final, 3200, eye)
    e_n = frobenius_distance(u_n[0], ref[0])
    e_2n = frobenius_distance(u_2n[0], ref[0])
    order_factor = e_n / e_2n

    traj = propagate(sched, t_final, steps=4000)
    drift = traj.max_norm_drift()

    half = t_final / 2
    u_full = traj.propagators[-1]
    u_first = propagate(sched, half, steps=2000).propagators[-1]
    sched_late = drive_form_schedule(p.omega_parallel * SZ, p.omega_perp * SX,
                                     p.omega_perp * SY, p.omega_R, p.omega_R * half)
    u_second = propagate(sched_late, half, steps=2000).propagators[-1]
    comp = frobenius_distance(u_full, u_second @ u_first)

    return {
        "order_factor": order_factor,
        "order_threshold": 12.0,
        "norm_drift": drift,
        "composition_distance": comp,
        "tolerance": 1e-8,
        "pass": bool(order_factor >= 12.0 and drift <= 1e-8 and comp <= 1e-8),
    }


def run_verify() -> dict:
    """Full acceptance run; deterministic output (no timestamps, fixed seeds)."""
    rows = build_grid()
    report = {
        "grid": {
            "thetas": [float(t) for t in GRID_THETAS],
            "ratios": list(GRID_RATIOS),
            "branches": ["off-resonance", "resonance"],
            "rows": len(rows),
            "note": ("off-resonance rows realize (theta, omega_R/Omega_full) exactly; "
                     "resonance rows pin delta_omega = 0, which fixes the ratio and mirrors "
                     "tilts above pi/2"),
        },
        "criteria": {},
    }
    report["criteria"]["1_exact_solvability"] = check_exact_solvability(rows)
    report["criteria"]["2_3_phase_split"] = check_phase_split(rows)
    report["criteria"]["4_adiabatic_limit"] = check_adiabatic()
    report["criteria"]["5_gate_structure"] = check_gate_structure()
    report["criteria"]["6_j_independence"] = check_j_independence()
    report["criteria"]["7_swap_symmetry"] = check_swap_symmetry()
    report["criteria"]["8_synthesis_roundtrip"] = check_synthesis_roundtrip()
    report["criteria"]["9_oracle_health"] = check_oracle_health()
    report["all_pass"] = bool(all(c["pass"] for c in report["criteria"].values()))
    return report
