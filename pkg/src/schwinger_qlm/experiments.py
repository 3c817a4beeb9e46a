"""Named, reproducible experiment pipelines driven by flat config files.

A config file holds one `key = value` pair per line with `#` comments.
Recognised keys: experiment, L, tau, T, M, K, seed, initial_state, site,
gate_order, output_dir. Every experiment writes its CSV outputs plus a
manifest.json listing each output with a sha256 digest; reruns with the
same config are byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass

import numpy as np

from . import __version__
from .basis import (
    GaugeConstraintError,
    ZeroMomentumBasis,
    enumerate_physical_basis,
    dimension_formula,
    matter_to_states,
    write_basis_file,
)
from .circuits import (
    CircuitEngine,
    ensemble_statistics,
    exact_evolution,
    gate_grid_times,
    normalized_deviation,
    run_circuit,
    sequential_schedule,
    step_grid_times,
)
from .hamiltonian import (
    center_matter_site,
    eigendecompose,
    eigenstate_diagnostics,
    sigma_z_values,
    thermal_beta,
    thermal_expectation,
    zero_momentum_hamiltonian,
)
from .scars import default_scar_criteria, scar_projection, scar_report

__all__ = [
    "ConfigError",
    "ExperimentError",
    "ExperimentConfig",
    "EXPERIMENTS",
    "WORKERS_ENV",
    "parse_config",
    "parse_config_text",
    "expand_named_state",
    "run_experiment",
]

WORKERS_ENV = "SCHWINGER_QLM_THREADS"

EXPERIMENTS = {
    "basis-report": "enumerate the constrained basis and its translation orbits",
    "scar-spectrum": "diagonalize the zero-momentum Hamiltonian and classify scars",
    "sequential-vs-exact": "deviation of the sequential circuit from exact evolution",
    "random-ensemble": "deviation statistics of random circuits against the sequential one",
    "entropy-evolution": "half-chain entropy under the sequential circuit",
    "magnetization-evolution": "local magnetization under the sequential circuit",
    "loschmidt-evolution": "Loschmidt echo under the sequential circuit",
}

_NAMED_STATES = ("vacuum", "fully-filled", "phi1", "phi2", "phi3", "phi4")


class ConfigError(ValueError):
    """A config file failed to parse or validate."""


class ExperimentError(RuntimeError):
    """An experiment could not be executed."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    length: int = 40
    tau: float = 0.1
    total_time: float = 10.0
    n_runs: int = 1000
    group_size: int = 100
    seed: int = 1000
    initial_state: str = "vacuum"
    site: int | None = None
    gate_order: str = "product"
    output_dir: str = "."

    @property
    def n_steps(self) -> int:
        return int(round(self.total_time / self.tau))

    @property
    def magnetization_site(self) -> int:
        return self.site if self.site is not None else center_matter_site(self.length)


def expand_named_state(name: str, length: int) -> frozenset[int]:
    """Occupied odd sites of a named initial state."""
    if name == "vacuum":
        return frozenset()
    if name == "fully-filled":
        return frozenset(range(1, length, 2))
    if name in ("phi1", "phi2", "phi3", "phi4"):
        if length != 40:
            raise ConfigError(f"state {name!r} is defined only for L = 40, got L = {length}")
        return {
            "phi1": frozenset({1, 3}),
            "phi2": frozenset({1, 19}),
            "phi3": frozenset({1, 3, 5, 7}),
            "phi4": frozenset(range(1, 40, 2)) - {1, 3},
        }[name]
    raise ConfigError(f"unknown named state {name!r}")


def _parse_occupation(text: str, length: int) -> frozenset[int]:
    try:
        sites = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"initial_state {text!r} is neither a known name "
                          f"({', '.join(_NAMED_STATES)}) nor a site list") from exc
    if not sites:
        raise ConfigError("explicit occupation lists may not be empty; use 'vacuum'")
    for s in sites:
        if s % 2 == 0 or not 1 <= s <= length - 1:
            raise ConfigError(f"occupied sites must be odd and within 1..{length - 1}, got {s}")
    return frozenset(sites)


def resolve_initial_occupation(config: ExperimentConfig) -> frozenset[int]:
    if config.initial_state in _NAMED_STATES:
        return expand_named_state(config.initial_state, config.length)
    return _parse_occupation(config.initial_state, config.length)


_INT_KEYS = {"L": "length", "M": "n_runs", "K": "group_size", "seed": "seed", "site": "site"}
_FLOAT_KEYS = {"tau": "tau", "T": "total_time"}
_STR_KEYS = {"experiment": "experiment", "initial_state": "initial_state",
             "gate_order": "gate_order", "output_dir": "output_dir"}


def parse_config_text(text: str) -> ExperimentConfig:
    """Parse and validate the flat key = value format."""
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key in _INT_KEYS:
            try:
                values[_INT_KEYS[key]] = int(val)
            except ValueError:
                raise ConfigError(f"line {lineno}: {key} must be an integer, got {val!r}")
        elif key in _FLOAT_KEYS:
            try:
                values[_FLOAT_KEYS[key]] = float(val)
            except ValueError:
                raise ConfigError(f"line {lineno}: {key} must be a number, got {val!r}")
        elif key in _STR_KEYS:
            values[_STR_KEYS[key]] = val
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    if "experiment" not in values:
        raise ConfigError("config must set 'experiment'")
    config = ExperimentConfig(**values)  # type: ignore[arg-type]
    validate_config(config)
    return config


def parse_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def validate_config(config: ExperimentConfig) -> None:
    if config.experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {config.experiment!r}; "
                          f"known: {', '.join(sorted(EXPERIMENTS))}")
    if config.length % 2 != 0 or not 4 <= config.length <= 48:
        raise ConfigError(f"L must be even and within 4..48, got {config.length}")
    if config.tau <= 0:
        raise ConfigError(f"tau must be positive, got {config.tau}")
    if config.total_time <= 0:
        raise ConfigError(f"T must be positive, got {config.total_time}")
    n = config.total_time / config.tau
    if abs(n - round(n)) > 1e-9 * max(1.0, abs(n)):
        raise ConfigError(f"T/tau must be an integer step count, got {n!r}")
    if config.n_runs < 1 or config.group_size < 1:
        raise ConfigError("M and K must be positive")
    if config.n_runs % config.group_size != 0:
        raise ConfigError(f"K = {config.group_size} does not divide M = {config.n_runs}")
    if config.seed < 0:
        raise ConfigError(f"seed must be non-negative, got {config.seed}")
    if config.site is not None and (config.site % 2 == 0
                                    or not 1 <= config.site <= config.length - 1):
        raise ConfigError(f"site must be an odd matter site, got {config.site}")
    if config.gate_order not in ("product", "layered"):
        raise ConfigError(f"gate_order must be 'product' or 'layered', got {config.gate_order!r}")
    if not config.output_dir:
        raise ConfigError("output_dir must not be empty")
    resolve_initial_occupation(config)


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _trajectory_rows(series) -> list[list[str]]:
    n = len(series.times)
    entropy = series.values.get("entropy_nats", np.zeros(n))
    return [
        [str(i), _fmt(series.times[i]), _fmt(series["loschmidt"][i]),
         _fmt(series["sigma_z"][i]), _fmt(entropy[i]), _fmt(series["norm"][i])]
        for i in range(n)
    ]

_TRAJECTORY_HEADER = ["step", "time", "loschmidt", "sigma_z_21", "entropy_nats", "norm"]


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _workers_from_env() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ExperimentError(f"{WORKERS_ENV} must be an integer, got {raw!r}")


class _Workspace:
    """Lazily built shared objects for one experiment run."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.basis = enumerate_physical_basis(config.length)
        self._sector = None
        self._engine = None
        self._spectral = None
        self._hamiltonian = None

    @property
    def sector(self) -> ZeroMomentumBasis:
        if self._sector is None:
            self._sector = ZeroMomentumBasis(self.basis)
        return self._sector

    @property
    def engine(self) -> CircuitEngine:
        if self._engine is None:
            self._engine = CircuitEngine(self.basis, site=self.config.magnetization_site)
        return self._engine

    @property
    def hamiltonian(self) -> np.ndarray:
        if self._hamiltonian is None:
            self._hamiltonian = zero_momentum_hamiltonian(self.sector)
        return self._hamiltonian

    @property
    def spectral(self):
        if self._spectral is None:
            self._spectral = eigendecompose(self.hamiltonian)
        return self._spectral

    def initial_sector_state(self) -> np.ndarray:
        occ = resolve_initial_occupation(self.config)
        try:
            return matter_to_states(occ, self.sector)
        except GaugeConstraintError as exc:
            raise ExperimentError(str(exc)) from exc


def _run_basis_report(ws: _Workspace, outdir: str) -> tuple[list[str], dict]:
    config = ws.config
    dims = {
        "dim_full": len(ws.basis),
        "dim_zero_momentum": ws.sector.size,
    }
    if config.length >= 8 and (config.length // 2) % 2 == 0:
        dims["dim_formula"] = dimension_formula(config.length)
    path = os.path.join(outdir, "basis.txt")
    write_basis_file(ws.basis, path)
    return ["basis.txt"], dims


def _run_scar_spectrum(ws: _Workspace, outdir: str) -> tuple[list[str], dict]:
    config = ws.config
    site = config.magnetization_site
    diag = eigenstate_diagnostics(ws.spectral, ws.sector, site=site)
    criteria = default_scar_criteria(diag, tower_size=config.length // 4 + 1)
    scars, runner_up = scar_report(diag, criteria)
    is_scar = np.zeros(diag.size, dtype=int)
    is_scar[list(scars.indices)] = 1

    _write_csv(os.path.join(outdir, "spectrum.csv"),
               ["n", "energy", "entropy_nats", "vacuum_overlap", "sigma_z_21"],
               ([str(n), _fmt(diag.energies[n]), _fmt(diag.entropies[n]),
                 _fmt(diag.vacuum_overlap[n]), _fmt(diag.sigma_z[n])]
                for n in range(diag.size)))
    _write_csv(os.path.join(outdir, "scars.csv"),
               ["n", "energy", "overlap", "entropy", "is_scar", "runnerup_overlap"],
               ([str(n), _fmt(diag.energies[n]), _fmt(diag.vacuum_overlap[n]),
                 _fmt(diag.entropies[n]), str(is_scar[n]), _fmt(runner_up[n])]
                for n in range(diag.size)))

    energies = ws.spectral.energies
    rows = []
    thermal = {}
    for state_name in ("vacuum", "fully-filled"):
        occ = expand_named_state(state_name, config.length)
        psi = matter_to_states(occ, ws.sector)
        energy = float(psi @ ws.hamiltonian @ psi)
        beta = thermal_beta(energy, energies)
        value = thermal_expectation(diag.sigma_z, beta, energies)
        rows.append(["zero_momentum", state_name, _fmt(beta), _fmt(value)])
        thermal[state_name] = {"beta": beta, "sigma_z_thermal": value}
    full_avg = float(sigma_z_values(ws.basis, site).mean())
    for state_name in ("vacuum", "fully-filled"):
        rows.append(["full_basis", state_name, _fmt(0.0), _fmt(full_avg)])
    _write_csv(os.path.join(outdir, "thermal.csv"),
               ["ensemble", "state", "beta", "sigma_z_thermal"], rows)

    extras = {
        "scar_indices": [int(n) for n in scars.indices],
        "criteria": {"overlap_floor": criteria.overlap_floor,
                     "entropy_ceiling": criteria.entropy_ceiling,
                     "window": criteria.window, "mode": criteria.mode},
        "thermal": thermal,
        "sigma_z_full_basis_average": full_avg,
    }
    return ["spectrum.csv", "scars.csv", "thermal.csv"], extras


def _run_sequential_vs_exact(ws: _Workspace, outdir: str) -> tuple[list[str], dict]:
    config = ws.config
    site = config.magnetization_site
    psi_sector = ws.initial_sector_state()
    psi_full = ws.sector.expand(psi_sector)
    schedule = sequential_schedule(config.length, config.tau, config.n_steps,
                                   order=config.gate_order)

    circuit_gate = run_circuit(psi_full, schedule, ws.engine, sample="gate")
    times_gate = gate_grid_times(config.tau, config.n_steps, config.length)
    exact_gate = exact_evolution(psi_sector, times_gate, ws.spectral, ws.sector, site=site)
    deltas = {
        name: normalized_deviation(circuit_gate[name], exact_gate[name])
        for name in ("sigma_z", "loschmidt")
    }

    circuit_step = run_circuit(psi_full, schedule, ws.engine, sample="step",
                               with_entropy=True)
    exact_step = exact_evolution(psi_sector, step_grid_times(config.tau, config.n_steps),
                                 ws.spectral, ws.sector, site=site, with_entropy=True)
    _write_csv(os.path.join(outdir, "trajectory_sequential.csv"),
               _TRAJECTORY_HEADER, _trajectory_rows(circuit_step))
    _write_csv(os.path.join(outdir, "trajectory_exact.csv"),
               _TRAJECTORY_HEADER, _trajectory_rows(exact_step))
    _write_csv(os.path.join(outdir, "statistics.csv"),
               ["group", "delta_sigma_z", "delta_loschmidt"],
               [["0", _fmt(deltas["sigma_z"]), _fmt(deltas["loschmidt"])]])
    extras = {"delta_sigma_z": deltas["sigma_z"], "delta_loschmidt": deltas["loschmidt"]}
    return ["trajectory_sequential.csv", "trajectory_exact.csv", "statistics.csv"], extras


def _run_random_ensemble(ws: _Workspace, outdir: str) -> tuple[list[str], dict]:
    config = ws.config
    psi_sector = ws.initial_sector_state()
    psi_full = ws.sector.expand(psi_sector)
    schedule = sequential_schedule(config.length, config.tau, config.n_steps,
                                   order=config.gate_order)
    reference = run_circuit(psi_full, schedule, ws.engine, sample="gate")
    stats = ensemble_statistics(psi_full, ws.engine, reference, config.seed,
                                config.n_runs, config.group_size, config.tau,
                                config.n_steps, workers=_workers_from_env())

    diag = eigenstate_diagnostics(ws.spectral, ws.sector, site=config.magnetization_site)
    criteria = default_scar_criteria(diag, tower_size=config.length // 4 + 1)
    scars, _ = scar_report(diag, criteria)
    projection = scar_projection(psi_sector, scars, ws.spectral)

    _write_csv(os.path.join(outdir, "statistics.csv"),
               ["group", "delta_sigma_z", "delta_loschmidt"],
               ([str(k), _fmt(stats.group_deltas["sigma_z"][k]),
                 _fmt(stats.group_deltas["loschmidt"][k])]
                for k in range(stats.n_groups)))
    _write_csv(os.path.join(outdir, "deviation_evolution.csv"),
               ["step", "time", "delta_loschmidt", "delta_sigma_z"],
               ([str(i), _fmt(stats.times[i]), _fmt(stats.pooled_deviation["loschmidt"][i]),
                 _fmt(stats.pooled_deviation["sigma_z"][i])]
                for i in range(len(stats.times))))
    _write_csv(os.path.join(outdir, "summary.csv"),
               ["state", "scar_projection", "delta_loschmidt_mean", "delta_loschmidt_err",
                "delta_sigma_z_mean", "delta_sigma_z_err"],
               [[config.initial_state, _fmt(projection),
                 _fmt(stats.delta_mean["loschmidt"]), _fmt(stats.delta_err["loschmidt"]),
                 _fmt(stats.delta_mean["sigma_z"]), _fmt(stats.delta_err["sigma_z"])]])
    extras = {
        "delta_mean": stats.delta_mean,
        "delta_err": stats.delta_err,
        "n_groups": stats.n_groups,
        "scar_projection": projection,
    }
    return ["statistics.csv", "deviation_evolution.csv", "summary.csv"], extras


def _run_trajectory(ws: _Workspace, outdir: str) -> tuple[list[str], dict]:
    config = ws.config
    psi_sector = ws.initial_sector_state()
    psi_full = ws.sector.expand(psi_sector)
    schedule = sequential_schedule(config.length, config.tau, config.n_steps,
                                   order=config.gate_order)
    series = run_circuit(psi_full, schedule, ws.engine, sample="step", with_entropy=True)
    _write_csv(os.path.join(outdir, "trajectory.csv"),
               _TRAJECTORY_HEADER, _trajectory_rows(series))
    return ["trajectory.csv"], {}


_RUNNERS = {
    "basis-report": _run_basis_report,
    "scar-spectrum": _run_scar_spectrum,
    "sequential-vs-exact": _run_sequential_vs_exact,
    "random-ensemble": _run_random_ensemble,
    "entropy-evolution": _run_trajectory,
    "magnetization-evolution": _run_trajectory,
    "loschmidt-evolution": _run_trajectory,
}


def run_experiment(config: ExperimentConfig, config_text: str | None = None) -> dict:
    """Execute one experiment; returns the manifest that was written.

    All computation happens before any output file is created, so a failed
    run leaves no partial outputs behind.
    """
    validate_config(config)
    outdir = config.output_dir
    os.makedirs(outdir, exist_ok=True)
    if not os.access(outdir, os.W_OK):
        raise ExperimentError(f"output directory {outdir!r} is not writable")

    ws = _Workspace(config)
    outputs, extras = _RUNNERS[config.experiment](ws, outdir)

    manifest = {
        "experiment": config.experiment,
        "params": {
            "L": config.length,
            "tau": config.tau,
            "T": config.total_time,
            "N": config.n_steps,
            "M": config.n_runs,
            "K": config.group_size,
            "initial_state": config.initial_state,
            "site": config.magnetization_site,
            "gate_order": config.gate_order,
        },
        "seed": config.seed,
        "schedule_kind": "random" if config.experiment == "random-ensemble"
                         else config.gate_order if config.gate_order != "product"
                         else "sequential",
        "version": __version__,
        "numpy_version": np.__version__,
        "config_sha256": hashlib.sha256(config_text.encode()).hexdigest()
                         if config_text is not None else None,
        "outputs": [{"path": name, "sha256": _sha256(os.path.join(outdir, name))}
                    for name in outputs],
    }
    manifest.update(extras)
    with open(os.path.join(outdir, "manifest.json"), "w", encoding="ascii") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest
