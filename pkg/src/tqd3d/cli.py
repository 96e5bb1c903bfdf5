"""Command-line front end.

Subcommands: pulses (export sampled control waveforms), simulate (one
evolution, closed or open), sweep (figure-style scans), verify (acceptance
criteria).  All quantities are dimensionless in units of the cavity coupling
g.  Configuration comes from an optional flat key=value file, overridable by
TQD3D_<KEY> environment variables.

Exit codes: 0 success, 1 verification failure, 2 config error,
3 numerical instability, 4 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import experiments, pulses
from .dynamics import IntegratorConfig, IntegratorInstabilityError
from .experiments import GridCapError
from .model import ModelParams
from .pulses import FittedPulse, GaussianTerm, PulseKind, StirapParams

ENV_PREFIX = "TQD3D_"

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_CONFIG = 2
EXIT_INSTABILITY = 3
EXIT_CAP = 4


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Scalar settings; g is fixed to 1 as the unit."""

    delta: float = 3.6
    t_f: float = 50.0
    omega0: float = 0.35
    tau_frac: float = 0.12
    width_frac: float = 0.16
    kappa: float = 0.0
    gamma: float = 0.0
    dt: float = 0.002
    record_every: int = 50
    sweep_dt: float = 0.01
    threads: int = 1
    fit_amp1: float = 0.3861
    fit_center1: float = 25.6816
    fit_width1: float = 12.2827
    fit_amp2: float = 0.3227
    fit_center2: float = 25.6808
    fit_width2: float = 5.7835
    # sweep ranges as "min:max:count"
    surface_tf: str = "10:100:46"
    surface_delta: str = "0.5:10:39"
    robustness_dev: str = "-0.1:0.1:21"
    decoherence_kappa: str = "0:0.05:26"
    decoherence_gamma: str = "0:0.05:26"

    def stirap_params(self) -> StirapParams:
        return StirapParams(
            omega0=self.omega0, t_f=self.t_f,
            tau=self.tau_frac * self.t_f, width=self.width_frac * self.t_f,
        )

    def fitted_pulse(self) -> FittedPulse:
        return FittedPulse((
            GaussianTerm(self.fit_amp1, self.fit_center1, self.fit_width1),
            GaussianTerm(self.fit_amp2, self.fit_center2, self.fit_width2),
        ))

    def model_params(self, kappa=None, gamma=None) -> ModelParams:
        return ModelParams(
            delta=self.delta, t_f=self.t_f,
            kappa=self.kappa if kappa is None else kappa,
            gamma=self.gamma if gamma is None else gamma,
        )

    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(dt=self.dt, record_every=self.record_every)

    def pulse_set(self, kind: PulseKind):
        fitted = self.fitted_pulse() if kind is PulseKind.TQD_FITTED else None
        return pulses.PulseSet(kind=kind, stirap=self.stirap_params(),
                               delta=self.delta, fitted=fitted)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, value: str):
    kind = _FIELD_TYPES[key]
    try:
        if kind == "int":
            return int(value)
        if kind == "float":
            return float(value)
        return value
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {value!r}") from exc


def load_config(path: str | None) -> tuple[RunConfig, str]:
    """Parse the key=value file plus environment overrides.

    Returns the config and the canonical text that went into it (for hashing).
    """
    cfg = RunConfig()
    source_lines = []
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw!r}")
            key, _, value = (s.strip() for s in line.partition("="))
            if key not in _FIELD_TYPES:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            setattr(cfg, key, _coerce(key, value))
            source_lines.append(f"{key} = {value}")
    for key in _FIELD_TYPES:
        env = os.environ.get(ENV_PREFIX + key.upper())
        if env is not None:
            setattr(cfg, key, _coerce(key, env))
            source_lines.append(f"{key} = {env}  # env")
    return cfg, "\n".join(source_lines)


def parse_range(text: str) -> np.ndarray:
    try:
        lo, hi, n = text.split(":")
        values = np.linspace(float(lo), float(hi), int(n))
    except ValueError as exc:
        raise ConfigError(f"bad range {text!r}, expected min:max:count") from exc
    if values.size > 1 and not np.all(np.diff(values) > 0):
        raise ConfigError(f"range {text!r} must be strictly increasing")
    return values


def _provenance(cfg: RunConfig, **extra) -> dict:
    info = {f.name: getattr(cfg, f.name) for f in fields(RunConfig)}
    info.update(extra)
    return info


def _write_manifest(out: Path, cfg_text: str, cfg: RunConfig, outputs: list[str]):
    digest = hashlib.sha256(cfg_text.encode()).hexdigest()
    entries = {"config_sha256": digest, "outputs": ";".join(outputs)}
    entries.update({f.name: getattr(cfg, f.name) for f in fields(RunConfig)})
    experiments.write_manifest(out / "manifest.txt", entries)


def cmd_pulses(cfg: RunConfig, cfg_text: str, out: Path) -> int:
    p = cfg.stirap_params()
    fitted = cfg.fitted_pulse()
    times = pulses.sample_grid(cfg.t_f)

    omega_a, omega_b = pulses.stirap_amplitudes(p, times)
    theta = pulses.mixing_angle(p, times)
    theta_dot = pulses.mixing_angle_rate(p, times)
    experiments.write_csv(
        out / "stirap_pulses.csv",
        ["t*g", "Omega_A/g", "Omega_B/g", "theta", "theta_dot"],
        zip(times, omega_a, omega_b, theta, theta_dot),
        _provenance(cfg, pulse_kind="stirap"),
    )
    omega_ap, omega_bp = pulses.tqd_amplitudes(p, cfg.delta, times)
    experiments.write_csv(
        out / "tqd_pulses.csv",
        ["t*g", "abs_Omega_A_prime/g", "Omega_B_prime/g", "Omega_B_fitted/g"],
        zip(times, np.abs(omega_ap), omega_bp, fitted(times)),
        _provenance(cfg, pulse_kind="tqd"),
    )
    experiments.write_plot_script(
        out / "stirap_pulses.gp", "stirap_pulses.csv", "Adiabatic pulse pair",
        columns=(1, 2, 3), labels=("Omega_A", "Omega_B"),
    )
    experiments.write_plot_script(
        out / "tqd_pulses.gp", "tqd_pulses.csv", "Counterdiabatic pulses",
        columns=(1, 2, 3, 4), labels=("|Omega_A'|", "Omega_B'", "Omega_B''"),
    )
    _write_manifest(out, cfg_text, cfg,
                    ["stirap_pulses.csv", "tqd_pulses.csv"])
    return EXIT_OK


_METHODS = {
    "stirap": PulseKind.STIRAP,
    "tqd": PulseKind.TQD_EXACT,
    "tqd-fitted": PulseKind.TQD_FITTED,
}


def cmd_simulate(cfg: RunConfig, cfg_text: str, out: Path, method: str,
                 open_system: bool) -> int:
    kind = _METHODS[method]
    pulse_set = cfg.pulse_set(kind)
    if open_system:
        params = cfg.model_params()
        result = experiments.simulate_open(params, pulse_set, cfg.integrator())
    else:
        params = cfg.model_params(kappa=0.0, gamma=0.0)
        result = experiments.simulate_closed(params, pulse_set, cfg.integrator())
    name = f"simulate_{method}_{'open' if open_system else 'closed'}"
    experiments.write_sim_result(
        out / f"{name}.csv", result,
        _provenance(cfg, method=method, open_system=open_system),
    )
    experiments.write_plot_script(
        out / f"{name}.gp", f"{name}.csv", f"Populations and fidelity ({method})",
        columns=tuple(range(1, 12)),
        labels=tuple(f"P_phi{i}" for i in range(1, 9)) + ("P_leaked", "F"),
    )
    _write_manifest(out, cfg_text, cfg, [f"{name}.csv"])
    print(f"final_fidelity={result.final_fidelity:.6f}")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, cfg_text: str, out: Path, figure: str,
              threads: int) -> int:
    if figure == "4a":
        grid = experiments.run_fidelity_surface(
            parse_range(cfg.surface_tf), parse_range(cfg.surface_delta),
            omega0=cfg.omega0, dt=cfg.sweep_dt, threads=threads,
        )
        name, mode = "fidelity_surface", "map"
    elif figure == "4b":
        grid = experiments.run_fidelity_surface(
            np.array([cfg.t_f]), parse_range(cfg.surface_delta),
            omega0=cfg.omega0, dt=cfg.sweep_dt, threads=threads,
        )
        grid = experiments.SweepGrid(
            x_name="delta/g", x_values=grid.y_values, values=grid.values[0],
            annotations=grid.annotations, provenance=grid.provenance,
        )
        name, mode = "fidelity_vs_delta", "lines"
    elif figure == "4c":
        grid = experiments.run_fidelity_surface(
            parse_range(cfg.surface_tf), np.array([cfg.delta]),
            omega0=cfg.omega0, dt=cfg.sweep_dt, threads=threads,
        )
        grid = experiments.SweepGrid(
            x_name="t_f*g", x_values=grid.x_values, values=grid.values[:, 0],
            annotations=grid.annotations, provenance=grid.provenance,
        )
        name, mode = "fidelity_vs_tf", "lines"
    elif figure == "8":
        scan = experiments.run_robustness_scan(
            parse_range(cfg.robustness_dev), params=cfg.model_params(),
            cfg=IntegratorConfig(dt=cfg.sweep_dt, record_every=cfg.record_every),
        )
        header = ["deviation"] + [f"F_{n}" for n in experiments.ROBUSTNESS_PARAMETERS]
        rows = zip(scan["deviation"],
                   *[scan[n] for n in experiments.ROBUSTNESS_PARAMETERS])
        experiments.write_csv(out / "robustness.csv", header, rows, _provenance(cfg))
        experiments.write_plot_script(
            out / "robustness.gp", "robustness.csv", "Robustness to parameter deviations",
            columns=(1, 2, 3, 4, 5),
            labels=tuple(experiments.ROBUSTNESS_PARAMETERS),
        )
        _write_manifest(out, cfg_text, cfg, ["robustness.csv"])
        return EXIT_OK
    elif figure == "9":
        grid = experiments.run_decoherence_surface(
            parse_range(cfg.decoherence_kappa), parse_range(cfg.decoherence_gamma),
            params=cfg.model_params(), dt=cfg.sweep_dt, threads=threads,
        )
        name, mode = "decoherence_surface", "map"
    else:
        raise ConfigError(f"unknown figure {figure!r}")
    experiments.write_sweep_grid(out / f"{name}.csv", grid)
    experiments.write_plot_script(out / f"{name}.gp", f"{name}.csv",
                                  f"Final fidelity ({name})", mode=mode)
    _write_manifest(out, cfg_text, cfg, [f"{name}.csv"])
    return EXIT_OK


def cmd_verify(out: Path) -> int:
    from . import verify

    results = verify.run_all()
    for r in results:
        print(r.line())
    (out / "verify_report.json").write_text(verify.report_json(results) + "\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tqd3d",
        description="Counterdiabatic two-atom qutrit entanglement simulations",
    )
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--out", default="out", help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("pulses", help="export sampled control waveforms")

    sim = sub.add_parser("simulate", help="run one evolution")
    sim.add_argument("--method", choices=sorted(_METHODS), default="tqd-fitted")
    group = sim.add_mutually_exclusive_group()
    group.add_argument("--open", dest="open_system", action="store_true")
    group.add_argument("--closed", dest="open_system", action="store_false")
    sim.set_defaults(open_system=False)

    swp = sub.add_parser("sweep", help="run a figure-style scan")
    swp.add_argument("--figure", choices=["4a", "4b", "4c", "8", "9"], required=True)
    swp.add_argument("--threads", type=int, default=None)

    sub.add_parser("verify", help="run the acceptance criteria")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg, cfg_text = load_config(args.config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "pulses":
            return cmd_pulses(cfg, cfg_text, out)
        if args.command == "simulate":
            return cmd_simulate(cfg, cfg_text, out, args.method, args.open_system)
        if args.command == "sweep":
            threads = args.threads if args.threads is not None else cfg.threads
            return cmd_sweep(cfg, cfg_text, out, args.figure, threads)
        if args.command == "verify":
            return cmd_verify(out)
        raise AssertionError(f"unhandled command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegratorInstabilityError as exc:
        print(f"numerical instability: {exc}", file=sys.stderr)
        return EXIT_INSTABILITY
    except GridCapError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
