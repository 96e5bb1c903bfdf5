"""Scenario runners: traces, parameter sweeps, robustness and decoherence scans.

Each runner is a pure function of its inputs and returns plain data; CSV and
plot-script emission lives in the writer helpers at the bottom.  Sweep cells
are independent work items executed (optionally in parallel) with results
placed by index, so re-running a scan reproduces the output byte for byte.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import dynamics, hilbert, model, pulses
from .dynamics import IntegratorConfig, SimResult
from .model import ModelParams
from .pulses import FittedPulse, PulseKind, PulseSet, StirapParams

GRID_CAP = 200 * 200

# Cavity-QED rate predictions used for the physical benchmark, as fractions of g
# (g, gamma, kappa) = 2*pi*(750, 3.5, 2.62) MHz.
BENCHMARK_GAMMA = 3.5 / 750
BENCHMARK_KAPPA = 2.62 / 750


class GridCapError(ValueError):
    """Requested sweep exceeds the configured cell cap."""


@dataclass(frozen=True)
class SweepGrid:
    x_name: str
    x_values: np.ndarray
    values: np.ndarray  # shape (len(x),) or (len(x), len(y))
    y_name: str | None = None
    y_values: np.ndarray | None = None
    annotations: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)


def default_pulse_set(kind: PulseKind, params: ModelParams | None = None,
                      stirap: StirapParams | None = None,
                      fitted: FittedPulse | None = None) -> PulseSet:
    params = params or ModelParams()
    stirap = stirap or StirapParams(t_f=params.t_f)
    if kind is PulseKind.TQD_FITTED and fitted is None:
        fitted = pulses.default_fitted_pulse()
    return PulseSet(kind=kind, stirap=stirap, delta=params.delta, fitted=fitted)


def _initial_state(space: hilbert.HilbertSpace) -> np.ndarray:
    sub = hilbert.build_subspace()
    return space.ket(sub.basis[0])


def simulate_closed(params: ModelParams, pulse_set: PulseSet,
                    cfg: IntegratorConfig = IntegratorConfig(),
                    t_final: float | None = None) -> SimResult:
    """Pure-state run on the 8-dim subspace."""
    sub = hilbert.build_subspace()
    terms = model.hamiltonian_terms(sub)
    h_of_t = model.make_h_of_t(terms, params, pulse_set)
    return dynamics.evolve_schrodinger(
        h_of_t, _initial_state(sub), t_final if t_final is not None else params.t_f,
        cfg, target=dynamics.target_state(sub),
    )


def simulate_open(params: ModelParams, pulse_set: PulseSet,
                  cfg: IntegratorConfig = IntegratorConfig(),
                  check_positivity: bool = True) -> SimResult:
    """Master-equation run on the full 80-dim space."""
    full = hilbert.build_full_space()
    sub = hilbert.build_subspace()
    terms = model.hamiltonian_terms(full)
    h_of_t = model.make_h_of_t(terms, params, pulse_set)
    channels = model.collapse_channels(params, full)
    psi0 = _initial_state(full)
    rho0 = np.outer(psi0, psi0.conj())
    return dynamics.evolve_lindblad(
        h_of_t, channels, rho0, params.t_f, cfg,
        tracked=hilbert.subspace_indices(sub, full),
        target=dynamics.target_state(full),
        check_positivity=check_positivity,
    )


def _surface_cell(args) -> tuple[float, str]:
    t_f, delta, omega0, dt = args
    try:
        params = ModelParams(delta=delta, t_f=t_f)
        ps = PulseSet(PulseKind.TQD_EXACT, StirapParams(omega0=omega0, t_f=t_f),
                      delta=delta)
        cfg = IntegratorConfig(dt=dt)
        return simulate_closed(params, ps, cfg).final_fidelity, ""
    except Exception as exc:  # annotate the cell, never abort the sweep
        return float("nan"), f"{type(exc).__name__}: {exc}"


def _run_cells(cells, worker, threads: int):
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(worker, cells))
    return [worker(c) for c in cells]


def run_fidelity_surface(
    t_f_values: np.ndarray,
    delta_values: np.ndarray,
    omega0: float = 0.35,
    dt: float = 0.01,
    threads: int = 1,
) -> SweepGrid:
    """Final fidelity of the exact-pulse detuned model over (t_f, delta)."""
    t_f_values = np.asarray(t_f_values, dtype=float)
    delta_values = np.asarray(delta_values, dtype=float)
    if t_f_values.size * delta_values.size > GRID_CAP:
        raise GridCapError(f"grid exceeds {GRID_CAP} cells")
    cells = [(tf, d, omega0, dt) for tf in t_f_values for d in delta_values]
    results = _run_cells(cells, _surface_cell, threads)
    values = np.array([f for f, _ in results]).reshape(
        t_f_values.size, delta_values.size
    )
    annotations = {
        (i, j): results[i * delta_values.size + j][1]
        for i in range(t_f_values.size)
        for j in range(delta_values.size)
        if results[i * delta_values.size + j][1]
    }
    return SweepGrid(
        x_name="t_f*g", x_values=t_f_values, y_name="delta/g", y_values=delta_values,
        values=values, annotations=annotations,
        provenance={"pulse_kind": "tqd", "omega0": omega0, "dt": dt},
    )


def run_population_trace(
    params: ModelParams | None = None,
    pulse_set: PulseSet | None = None,
    cfg: IntegratorConfig = IntegratorConfig(),
) -> SimResult:
    """Populations of the eight chain states under the fitted-pulse detuned model."""
    params = params or ModelParams()
    pulse_set = pulse_set or default_pulse_set(PulseKind.TQD_FITTED, params)
    return simulate_closed(params, pulse_set, cfg)


def run_method_comparison(
    params: ModelParams | None = None, cfg: IntegratorConfig = IntegratorConfig()
) -> dict[str, SimResult]:
    """Fidelity traces for adiabatic, exact-TQD and fitted-TQD driving at equal t_f."""
    params = params or ModelParams()
    out = {}
    for name, kind in (
        ("stirap", PulseKind.STIRAP),
        ("tqd", PulseKind.TQD_EXACT),
        ("tqd_fitted", PulseKind.TQD_FITTED),
    ):
        out[name] = simulate_closed(params, default_pulse_set(kind, params), cfg)
    return out


ROBUSTNESS_PARAMETERS = ("t_f", "g", "delta", "amplitude")


def run_robustness_scan(
    deviations: np.ndarray,
    parameters: tuple[str, ...] = ROBUSTNESS_PARAMETERS,
    params: ModelParams | None = None,
    cfg: IntegratorConfig = IntegratorConfig(),
) -> dict[str, np.ndarray]:
    """Final fidelity vs relative deviation of one parameter at a time.

    The fitted pulse stays as designed; only the actual system parameter (or,
    for "amplitude", both Gaussian amplitudes jointly) takes the deviated value.
    """
    deviations = np.asarray(deviations, dtype=float)
    if np.any(np.abs(deviations) > 0.5):
        raise ValueError("relative deviations must stay within +-0.5")
    params = params or ModelParams()
    base_pulse = default_pulse_set(PulseKind.TQD_FITTED, params)
    out: dict[str, np.ndarray] = {"deviation": deviations}
    for name in parameters:
        if name not in ROBUSTNESS_PARAMETERS:
            raise ValueError(f"unknown robustness parameter {name!r}")
        fids = []
        for d in deviations:
            run_params, run_pulse, t_final = params, base_pulse, None
            if name == "t_f":
                t_final = params.t_f * (1 + d)
            elif name == "g":
                run_params = replace(params, g=params.g * (1 + d))
            elif name == "delta":
                run_params = replace(params, delta=params.delta * (1 + d))
            elif name == "amplitude":
                run_pulse = replace(base_pulse, fitted=base_pulse.fitted.scaled(1 + d))
            fids.append(
                simulate_closed(run_params, run_pulse, cfg, t_final=t_final).final_fidelity
            )
        out[name] = np.array(fids)
    return out


def _decoherence_cell(args) -> tuple[float, str]:
    kappa, gamma, delta, t_f, dt = args
    try:
        params = ModelParams(delta=delta, t_f=t_f, kappa=kappa, gamma=gamma)
        ps = default_pulse_set(PulseKind.TQD_FITTED, params)
        cfg = IntegratorConfig(dt=dt)
        return simulate_open(params, ps, cfg, check_positivity=False).final_fidelity, ""
    except Exception as exc:
        return float("nan"), f"{type(exc).__name__}: {exc}"


def run_decoherence_surface(
    kappa_values: np.ndarray,
    gamma_values: np.ndarray,
    params: ModelParams | None = None,
    dt: float = 0.01,
    threads: int = 1,
) -> SweepGrid:
    """Open-system final fidelity over the (kappa, gamma) grid."""
    params = params or ModelParams()
    kappa_values = np.asarray(kappa_values, dtype=float)
    gamma_values = np.asarray(gamma_values, dtype=float)
    if kappa_values.size * gamma_values.size > GRID_CAP:
        raise GridCapError(f"grid exceeds {GRID_CAP} cells")
    cells = [
        (k, g, params.delta, params.t_f, dt) for k in kappa_values for g in gamma_values
    ]
    results = _run_cells(cells, _decoherence_cell, threads)
    values = np.array([f for f, _ in results]).reshape(
        kappa_values.size, gamma_values.size
    )
    annotations = {
        (i, j): results[i * gamma_values.size + j][1]
        for i in range(kappa_values.size)
        for j in range(gamma_values.size)
        if results[i * gamma_values.size + j][1]
    }
    return SweepGrid(
        x_name="kappa/g", x_values=kappa_values, y_name="gamma/g", y_values=gamma_values,
        values=values, annotations=annotations,
        provenance={"pulse_kind": "tqd-fitted", "delta": params.delta,
                    "t_f": params.t_f, "dt": dt},
    )


def run_physical_benchmark(cfg: IntegratorConfig = IntegratorConfig()) -> SimResult:
    """Open-system run at the predicted cavity-QED rates (fitted pulses)."""
    params = ModelParams(kappa=BENCHMARK_KAPPA, gamma=BENCHMARK_GAMMA)
    return simulate_open(params, default_pulse_set(PulseKind.TQD_FITTED, params), cfg)


# ---------------------------------------------------------------------------
# output writers


def _format(x) -> str:
    if isinstance(x, float) and np.isnan(x):
        return "nan"
    return f"{x:.12g}"


def provenance_lines(info: dict) -> list[str]:
    return [f"# {key} = {info[key]}" for key in sorted(info)]


def write_csv(path: Path, header: list[str], rows, provenance: dict | None = None):
    lines = provenance_lines(provenance or {})
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_format(x) for x in row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_sim_result(path: Path, result: SimResult, provenance: dict | None = None):
    n_tracked = result.populations.shape[1] - 1
    header = ["t*g"] + [f"P_phi{i + 1}" for i in range(n_tracked)] + ["P_leaked", "F"]
    rows = [
        [t, *pops, fid]
        for t, pops, fid in zip(result.times, result.populations, result.fidelity)
    ]
    write_csv(path, header, rows, provenance)


def write_sweep_grid(path: Path, grid: SweepGrid):
    prov = dict(grid.provenance)
    if grid.y_values is None:
        header = [grid.x_name, "F"]
        rows = [[x, f] for x, f in zip(grid.x_values, grid.values)]
    else:
        header = [grid.x_name, grid.y_name, "F"]
        rows = [
            [x, y, grid.values[i, j]]
            for i, x in enumerate(grid.x_values)
            for j, y in enumerate(grid.y_values)
        ]
        for (i, j), note in sorted(grid.annotations.items()):
            prov[f"cell_{i}_{j}_error"] = note
    write_csv(path, header, rows, prov)


def write_plot_script(path: Path, csv_name: str, title: str, mode: str = "lines",
                      columns: tuple[int, ...] = (1, 2), labels: tuple[str, ...] = ()):
    """Minimal gnuplot script next to a CSV."""
    lines = [
        "set datafile separator ','",
        f"set title '{title}'",
        "set key outside",
    ]
    if mode == "map":
        lines += [
            "set view map",
            f"splot '{csv_name}' using 1:2:3 with points palette pointtype 5 title 'F'",
        ]
    else:
        plots = []
        for idx, col in enumerate(columns[1:], start=0):
            label = labels[idx] if idx < len(labels) else f"col{col}"
            plots.append(f"'{csv_name}' using {columns[0]}:{col} with lines title '{label}'")
        lines.append("plot " + ", \\\n     ".join(plots))
    Path(path).write_text("\n".join(lines) + "\n")


def write_manifest(path: Path, entries: dict):
    lines = [f"{key} = {entries[key]}" for key in sorted(entries)]
    Path(path).write_text("\n".join(lines) + "\n")
