"""Command-line front end: flat key=value configs in, JSON/CSV documents out.

Config format: UTF-8 text, one `key=value` per line, `#` comments, blank
lines ignored. All frequencies are rad/s, all angles radians. Exit codes:
0 success, 1 generic/parse, 2 infeasible or degenerate domain, 3 numeric
accuracy. Floating-point output uses 17 significant digits so documents
round-trip losslessly and diff byte-stable.
"""
from __future__ import annotations

import io
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import drive, oracle, synthesis, twoqubit, verify
from .drive import CCW, CW, DriveParams
from .errors import (ConfigError, ContractViolationError, CyclicityError,
                     DegenerateDriveError, DistinctnessError, InfeasibleTargetError,
                     IntegratorAccuracyError, SpingateError, SynthesisError)
from .linalg import frobenius_distance, global_phase_distance
from .twoqubit import TwoSpinParams

COMMANDS = ("derive", "propagate", "phases", "gate", "echo", "synth", "sweep", "verify")

_COMMON_KEYS = {"command": "str", "output_path": "str", "output_format": "str"}

_COMMAND_KEYS = {
    "derive": {"required": {"omega_parallel": "float", "omega_perp": "float",
                            "omegaR": "float"}, "optional": {}},
    "propagate": {"required": {"omega_parallel": "float", "omega_perp": "float",
                               "omegaR": "float"},
                  "optional": {"t": "float", "steps": "int", "sense": "int"}},
    "phases": {"required": {"omega_parallel": "float", "omega_perp": "float",
                            "omegaR": "float"},
               "optional": {"steps": "int"}},
    "gate": {"required": {"omega01": "float", "omega02": "float", "omega1": "float",
                          "omegaR": "float", "J": "float"},
             "optional": {"tau": "float", "doubled": "bool"}},
    "echo": {"required": {"omega01": "float", "omega02": "float", "omega1": "float",
                          "omegaR": "float", "J": "float"},
             "optional": {"steps": "int", "pulse_mode": "str", "frame": "str"}},
    "synth": {"required": {"gamma1": "float", "gamma2": "float", "omega1": "float",
                           "omegaR": "float"},
              "optional": {"doubled": "bool"}},
    "sweep": {"required": {"omega01": "floatlist", "omega02": "floatlist",
                           "omega1": "floatlist", "omegaR": "floatlist", "J": "floatlist"},
              "optional": {"oracle": "bool", "steps": "int"}},
    "verify": {"required": {}, "optional": {}},
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    parameters: dict
    output_path: Optional[str]
    output_format: str

    def __eq__(self, other):
        if not isinstance(other, RunConfig):
            return NotImplemented
        return (self.command == other.command and self.parameters == other.parameters
                and self.output_path == other.output_path
                and self.output_format == other.output_format)


def _parse_value(kind: str, raw: str, line_no: int, key: str):
    try:
        if kind == "float":
            return float(raw)
        if kind == "int":
            return int(raw)
        if kind == "bool":
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        if kind == "floatlist":
            return tuple(float(x) for x in raw.split(","))
        return raw
    except ValueError as exc:
        raise ConfigError(f"line {line_no}: value {raw!r} for key {key!r} is not a valid {kind}",
                          line=line_no) from exc


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a flat key=value config document."""
    pairs: dict[str, tuple[str, int]] = {}
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected key=value, got {raw_line!r}",
                              line=line_no)
        key, value = (s.strip() for s in line.split("=", 1))
        if key in pairs:
            raise ConfigError(f"line {line_no}: duplicate key {key!r}", line=line_no)
        pairs[key] = (value, line_no)

    if "command" not in pairs:
        raise ConfigError("missing required key 'command'")
    command, cmd_line = pairs.pop("command")
    if command not in COMMANDS:
        raise ConfigError(f"line {cmd_line}: unknown command {command!r} "
                          f"(one of {', '.join(COMMANDS)})", line=cmd_line)

    output_path = pairs.pop("output_path", (None, 0))[0]
    output_format, fmt_line = pairs.pop("output_format", ("json", 0))
    if output_format not in ("json", "csv"):
        raise ConfigError(f"line {fmt_line}: output_format must be json or csv",
                          line=fmt_line)

    spec = _COMMAND_KEYS[command]
    parameters = {}
    for key, (raw, line_no) in pairs.items():
        if key in spec["required"]:
            parameters[key] = _parse_value(spec["required"][key], raw, line_no, key)
        elif key in spec["optional"]:
            parameters[key] = _parse_value(spec["optional"][key], raw, line_no, key)
        else:
            raise ConfigError(f"line {line_no}: unknown key {key!r} for command {command!r}",
                              line=line_no)
    missing = [k for k in spec["required"] if k not in parameters]
    if missing:
        raise ConfigError(f"missing required keys for {command!r}: {', '.join(missing)}")
    return RunConfig(command=command, parameters=parameters, output_path=output_path,
                     output_format=output_format)


def serialize_config(cfg: RunConfig) -> str:
    """Emit a config document that parses back to an equal RunConfig."""
    lines = [f"command={cfg.command}"]
    if cfg.output_path is not None:
        lines.append(f"output_path={cfg.output_path}")
    lines.append(f"output_format={cfg.output_format}")
    for key in sorted(cfg.parameters):
        v = cfg.parameters[key]
        if isinstance(v, bool):
            lines.append(f"{key}={'true' if v else 'false'}")
        elif isinstance(v, tuple):
            lines.append(f"{key}={','.join(fmt_float(x) for x in v)}")
        elif isinstance(v, float):
            lines.append(f"{key}={fmt_float(v)}")
        else:
            lines.append(f"{key}={v}")
    return "\n".join(lines) + "\n"


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _json_write(obj, out: list) -> None:
    if isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(", ")
            out.append(f'"{k}": ')
            _json_write(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _json_write(v, out)
        out.append("]")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(fmt_float(float(obj)))
    elif isinstance(obj, complex):
        _json_write([obj.real, obj.imag], out)
    elif obj is None:
        out.append("null")
    else:
        s = str(obj).replace("\\", "\\\\").replace('"', '\\"')
        out.append(f'"{s}"')


def to_json(document: dict) -> str:
    out: list[str] = []
    _json_write(document, out)
    return "".join(out) + "\n"


def to_csv(rows: list[dict]) -> str:
    import csv

    buf = io.StringIO()
    if not rows:
        return ""
    writer = csv.writer(buf, lineterminator="\n")
    header = list(rows[0].keys())
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt_float(v) if isinstance(v, (float, np.floating)) else v
                         for k, v in ((h, row[h]) for h in header)])
    return buf.getvalue()


def _matrix_entries(m: np.ndarray) -> list:
    return [[float(v.real), float(v.imag)] for v in np.asarray(m).ravel()]


def _auto_steps_single(p: DriveParams) -> int:
    cycles = max(drive.effective_rabi(p, CCW), drive.effective_rabi(p, CW)) / p.omega_R
    return 480 * int(np.ceil(cycles + 2))


def _run_derive(params: dict) -> dict:
    p = DriveParams(params["omega_parallel"], params["omega_perp"], params["omegaR"])
    ang = drive.derive_angles(p)
    return {"delta_omega": ang.delta_omega, "omega_rabi": ang.omega_rabi,
            "omega_full": ang.omega_full, "theta": ang.theta, "theta_star": ang.theta_star}


def _run_propagate(params: dict) -> dict:
    p = DriveParams(params["omega_parallel"], params["omega_perp"], params["omegaR"])
    t = params.get("t", p.period)
    sense = params.get("sense", CCW)
    steps = params.get("steps", _auto_steps_single(p))
    dec = drive.analytic_propagator(p, t, sense)
    traj = oracle.propagate(drive.drive_schedule(p, sense), t, steps)
    dist = frobenius_distance(traj.propagators[-1], dec.propagator.matrix)
    return {
        "t": t, "sense": sense, "steps": steps,
        "xi": [dec.xi.real, dec.xi.imag],
        "xi_abs": abs(dec.xi), "xi_arg": float(np.angle(dec.xi)) if dec.xi != 0 else 0.0,
        "phi": dec.phi,
        "matrix": _matrix_entries(dec.propagator.matrix),
        "unitarity_defect": dec.propagator.defect,
        "oracle_distance": dist,
    }


def _run_phases(params: dict) -> dict:
    p = DriveParams(params["omega_parallel"], params["omega_perp"], params["omegaR"])
    steps = params.get("steps", _auto_steps_single(p))
    stride = 16
    steps = int(np.ceil(steps / stride)) * stride
    ang = drive.derive_angles(p)
    sched = drive.drive_schedule(p, CW)
    states = drive.cyclic_states(p, CW)
    rows = []
    for m in (0.5, -0.5):
        split = drive.cycle_phases(p, m)
        traj = oracle.propagate(sched, p.period, steps, initial_state=states[m])
        dyn = oracle.dynamic_phase_numeric(traj, sched)
        geo = oracle.geometric_phase_numeric(traj, sched)
        rows.append({
            "m": m, "dynamic": split.dynamic, "geometric": split.geometric,
            "oracle_dynamic": dyn, "oracle_geometric": geo,
            "dynamic_residual": abs(dyn - split.dynamic),
            "geometric_residual_spinor_adjusted":
                float(abs(drive.cyclic_geometric_oracle_value(p, m) - geo)),
        })
    return {"theta": ang.theta, "theta_star": ang.theta_star, "steps": steps,
            "geometric_shift": drive.geometric_phase_shift(p), "rows": rows}


def _two_spin_params(params: dict) -> TwoSpinParams:
    return TwoSpinParams(omega01=params["omega01"], omega02=params["omega02"],
                         J=params["J"], omega1=params["omega1"], omega_R=params["omegaR"],
                         tau_decoherence=params.get("tau"))


def _run_gate(params: dict) -> dict:
    p = _two_spin_params(params)
    gate = twoqubit.geometric_gate(p, echo_doubled=params.get("doubled", True))
    th1 = twoqubit.theta_angles(p, 1)
    th2 = twoqubit.theta_angles(p, 2)
    return {
        "theta1": th1[0], "theta1_star": th1[1], "theta2": th2[0], "theta2_star": th2[1],
        "gamma1": gate.gamma1, "gamma2": gate.gamma2,
        "gamma1_contour": gate.gamma1_contour, "gamma2_contour": gate.gamma2_contour,
        "echo_doubled": gate.echo_doubled,
        "matrix": _matrix_entries(gate.matrix.matrix),
        "warnings": list(gate.warnings),
    }


def _run_echo(params: dict) -> dict:
    p = _two_spin_params(params)
    steps = params.get("steps", verify._echo_steps(p))
    net = twoqubit.echo_evolution(p, steps=steps,
                                  pulse_mode=params.get("pulse_mode", "matched"),
                                  frame=params.get("frame", "dressed"))
    pat = twoqubit.phase_pattern(net)
    g1c = twoqubit.gamma_contour(p, 1)
    g2c = twoqubit.gamma_contour(p, 2)
    gate_c = twoqubit.gate_matrix(g1c, g2c)
    gate_d = twoqubit.gate_matrix(twoqubit.gamma_display(p, 1), twoqubit.gamma_display(p, 2))
    return {
        "steps": steps, "pulse_mode": params.get("pulse_mode", "matched"),
        "gamma1_contour": g1c, "gamma2_contour": g2c,
        "diag_defect": pat["offdiag"],
        "extracted_g1": pat["g1"], "extracted_g2": pat["g2"], "extracted_gzz": pat["gzz"],
        "distance_contour_gate": global_phase_distance(net.matrix, gate_c.matrix),
        "distance_display_gate": global_phase_distance(net.matrix, gate_d.matrix),
        "matrix": _matrix_entries(net.matrix),
    }


def _run_synth(params: dict) -> dict:
    target = synthesis.SynthesisTarget(gamma1_target=params["gamma1"],
                                       gamma2_target=params["gamma2"],
                                       omega_R=params["omegaR"], omega1=params["omega1"],
                                       doubled=params.get("doubled", True))
    result = synthesis.synthesize(target)
    return {"omega01": result.params.omega01, "omega02": result.params.omega02,
            "residual": result.residual, "iterations": result.iterations}


def _run_sweep(params: dict):
    grid = {axis: params[axis] for axis in synthesis.SWEEP_AXES}
    return synthesis.sweep(grid, oracle_residual=params.get("oracle", False),
                           steps=params.get("steps", 4000))


def run(config: RunConfig) -> tuple[int, str]:
    """Dispatch a validated config; returns (exit_code, document text)."""
    if config.command == "sweep":
        rows = _run_sweep(config.parameters)
        if config.output_format == "csv":
            return 0, to_csv(rows)
        return 0, to_json({"command": "sweep", "inputs": _inputs_doc(config),
                           "results": rows})
    if config.command == "verify":
        report = verify.run_verify()
        doc = to_json({"command": "verify", "inputs": _inputs_doc(config),
                       "results": report})
        return (0 if report["all_pass"] else 1), doc
    runner = {"derive": _run_derive, "propagate": _run_propagate, "phases": _run_phases,
              "gate": _run_gate, "echo": _run_echo, "synth": _run_synth}[config.command]
    results = runner(config.parameters)
    if config.output_format == "csv":
        flat = {k: v for k, v in results.items() if isinstance(v, (int, float, str, bool))}
        return 0, to_csv([flat])
    return 0, to_json({"command": config.command, "inputs": _inputs_doc(config),
                       "results": results})


def _inputs_doc(config: RunConfig) -> dict:
    doc = {}
    for k in sorted(config.parameters):
        v = config.parameters[k]
        doc[k] = list(v) if isinstance(v, tuple) else v
    return doc


def exit_code_for(exc: Exception) -> int:
    if isinstance(exc, (InfeasibleTargetError, DegenerateDriveError, DistinctnessError,
                        CyclicityError)):
        return 2
    if isinstance(exc, IntegratorAccuracyError):
        return 3
    return 1


def main(argv: Optional[list[str]] = None) -> int:
    import argparse

    parser = argparse.ArgumentParser(
        prog="spingate",
        description="Geometric-phase gate simulator and control synthesis. "
                    "Takes a flat key=value config file ('-' for stdin).")
    parser.add_argument("config", help="path to the config document, or -")
    args = parser.parse_args(argv)
    try:
        text = sys.stdin.read() if args.config == "-" else open(args.config,
                                                                encoding="utf-8").read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        config = parse_config(text)
        code, document = run(config)
    except SpingateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    if code != 0:
        # failed verify: diagnostics only, keep stdout clean
        sys.stderr.write(document)
        return code
    if config.output_path:
        with open(config.output_path, "w", encoding="utf-8") as fh:
            fh.write(document)
    else:
        sys.stdout.write(document)
    return 0


if __name__ == "__main__":
    sys.exit(main())
