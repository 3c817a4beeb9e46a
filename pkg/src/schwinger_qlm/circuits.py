"""Trotterized circuit evolution, exact reference evolution, and ensemble statistics.

A circuit is a sequence of three-body gates exp(-i H_j tau). Each gate is
a two-level rotation inside every (all-1, all-0) triple pair, so its
action on the amplitude vector is a pairwise mix with cos/sin weights and
it never produces amplitude outside the physical basis.

Two sampling grids are supported. The "step" grid records observables
after every block of L/2 gates (times 0, tau, ..., N tau) and is what the
trajectory exports use. The "gate" grid records after every single gate
(times k tau / (L/2)) and is the grid on which all normalized-deviation
statistics are computed; deviations between circuits and the exact
evolution pick up their leading first-order-in-tau contribution from the
partially applied blocks, which the coarse grid cannot see.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .basis import PhysicalBasis, ZeroMomentumBasis, enumerate_physical_basis
from .hamiltonian import (
    GatePairing,
    HalfChainSplit,
    SpectralData,
    build_gate_pairing,
    center_matter_site,
    entanglement_entropy,
    particle_numbers,
    sigma_z_values,
)

__all__ = [
    "CircuitSchedule",
    "ObservableSeries",
    "RunStatistics",
    "CircuitEngine",
    "sequential_schedule",
    "random_schedule",
    "apply_gate",
    "run_circuit",
    "exact_evolution",
    "gate_grid_times",
    "step_grid_times",
    "normalized_deviation",
    "cumulative_deviation",
    "ensemble_statistics",
]


@dataclass(frozen=True)
class CircuitSchedule:
    """Ordered gate indices with a common time step.

    kind is "sequential" (N repetitions of 1..L/2), "layered" (the two
    commuting half-blocks, odd indices then even indices) or "random".
    """

    tau: float
    n_steps: int
    gates: np.ndarray  # length n_steps * L/2, values in 1..L/2
    kind: str
    seed: int | None = None
    run_index: int = 0

    def __post_init__(self) -> None:
        if self.tau < 0:
            raise ValueError("tau must be non-negative")
        if self.n_steps < 1:
            raise ValueError("need at least one step")


def sequential_schedule(length: int, tau: float, n_steps: int,
                        order: str = "product") -> CircuitSchedule:
    """Fixed-order schedule; `order` picks plain 1..L/2 or the two commuting layers."""
    half = length // 2
    if order == "product":
        block = np.arange(1, half + 1, dtype=np.int64)
        kind = "sequential"
    elif order == "layered":
        block = np.concatenate([np.arange(1, half + 1, 2), np.arange(2, half + 1, 2)])
        kind = "layered"
    else:
        raise ValueError(f"unknown order {order!r}")
    return CircuitSchedule(tau=tau, n_steps=n_steps,
                           gates=np.tile(block, n_steps), kind=kind)


def random_schedule(seed: int, n_steps: int, length: int, tau: float,
                    run_index: int = 0) -> CircuitSchedule:
    """Uniform i.i.d. gate indices from a counter-based generator.

    The stream is keyed by (seed, run_index), so ensembles hand each run
    its own reproducible schedule and equal inputs give equal schedules on
    every platform.
    """
    half = length // 2
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, run_index], dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key))
    gates = gen.integers(1, half + 1, size=n_steps * half, dtype=np.int64)
    return CircuitSchedule(tau=tau, n_steps=n_steps, gates=gates,
                           kind="random", seed=seed, run_index=run_index)


def gate_grid_times(tau: float, n_steps: int, length: int) -> np.ndarray:
    half = length // 2
    return np.arange(n_steps * half + 1) * (tau / half)


def step_grid_times(tau: float, n_steps: int) -> np.ndarray:
    return np.arange(n_steps + 1) * tau


@dataclass
class ObservableSeries:
    """Sampled observables on a uniform time grid. values maps name -> series."""

    times: np.ndarray
    values: dict[str, np.ndarray] = field(default_factory=dict)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.values[name]


class CircuitEngine:
    """Gate tables and cached observable diagonals for one chain length.

    Building the pairing validates closure: every all-1 triple flips to a
    configuration that is itself in the basis, so circuit evolution cannot
    leave the constrained space by construction.
    """

    def __init__(self, basis: PhysicalBasis, site: int | None = None,
                 pairing: GatePairing | None = None):
        self.basis = basis
        self.length = basis.length
        self.site = center_matter_site(basis.length) if site is None else site
        self.pairing = build_gate_pairing(basis) if pairing is None else pairing
        self.sigma_z_diag = sigma_z_values(basis, self.site)
        self.particle_diag = particle_numbers(basis)
        # per-gate gathers of the sigma^z diagonal, for incremental tracking
        self._z_ones = self.sigma_z_diag[self.pairing.ones]
        self._z_zeros = self.sigma_z_diag[self.pairing.zeros]
        self._split: HalfChainSplit | None = None

    @property
    def split(self) -> HalfChainSplit:
        if self._split is None:
            self._split = HalfChainSplit(self.basis)
        return self._split


def apply_gate(state: np.ndarray, gate_index: int, tau: float,
               engine: CircuitEngine) -> np.ndarray:
    """One three-body gate exp(-i H_j tau) applied to full-basis amplitudes."""
    pairing = engine.pairing
    if not 1 <= gate_index <= pairing.n_gates:
        raise ValueError(f"gate index must lie in 1..{pairing.n_gates}, got {gate_index}")
    if len(state) != len(engine.basis):
        raise ValueError("state length does not match the basis")
    out = state.astype(complex)
    c = math.cos(tau)
    ms = -1j * math.sin(tau)
    oi = pairing.ones[gate_index - 1]
    zi = pairing.zeros[gate_index - 1]
    a = out[oi]
    b = out[zi]
    out[oi] = c * a + ms * b
    out[zi] = c * b + ms * a
    return out


def _check_normalized(state: np.ndarray) -> None:
    norm = np.linalg.norm(state)
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(f"initial state is not normalized, |psi| = {norm!r}")


def run_circuit(initial: np.ndarray, schedule: CircuitSchedule, engine: CircuitEngine,
                sample: str = "step", with_entropy: bool = False,
                reference: np.ndarray | None = None) -> ObservableSeries:
    """Evolve a full-basis state through a schedule, recording observables.

    sample="step" records after every block of L/2 gates: Loschmidt echo
    against `reference` (the initial state by default), sigma^z at the
    engine site, particle number, norm, and optionally the half-chain
    entropy. sample="gate" records echo and sigma^z after every gate; the
    echo uses the sparse support of the reference state and sigma^z is
    tracked incrementally from the amplitudes each gate touches.
    """
    if sample not in ("step", "gate"):
        raise ValueError(f"unknown sampling grid {sample!r}")
    if len(initial) != len(engine.basis):
        raise ValueError("initial state length does not match the basis")
    _check_normalized(initial)
    half = engine.length // 2
    if len(schedule.gates) != schedule.n_steps * half:
        raise ValueError("schedule gate count does not match n_steps * L/2")

    psi0 = initial.astype(complex)
    if reference is None:
        reference = psi0
    ref_support = np.nonzero(reference)[0]
    ref_conj = np.conj(reference[ref_support])

    psi = psi0.copy()
    c = math.cos(schedule.tau)
    ms = -1j * math.sin(schedule.tau)
    ones = engine.pairing.ones
    zeros = engine.pairing.zeros
    z_ones = engine._z_ones
    z_zeros = engine._z_zeros
    zdiag = engine.sigma_z_diag

    def echo_of(p: np.ndarray) -> float:
        amp = ref_conj @ p[ref_support]
        return float(amp.real * amp.real + amp.imag * amp.imag)

    if sample == "gate":
        n_samples = schedule.n_steps * half + 1
        echo = np.empty(n_samples)
        sz = np.empty(n_samples)
        prob = psi.real ** 2 + psi.imag ** 2
        sz_val = float(zdiag @ prob)
        echo[0] = echo_of(psi)
        sz[0] = sz_val
        k = 1
        for j in schedule.gates:
            oi = ones[j - 1]
            zi = zeros[j - 1]
            a = psi[oi]
            b = psi[zi]
            na = c * a + ms * b
            nb = c * b + ms * a
            sz_val += float(
                z_ones[j - 1] @ (na.real ** 2 + na.imag ** 2 - a.real ** 2 - a.imag ** 2)
                + z_zeros[j - 1] @ (nb.real ** 2 + nb.imag ** 2 - b.real ** 2 - b.imag ** 2))
            psi[oi] = na
            psi[zi] = nb
            echo[k] = echo_of(psi)
            sz[k] = sz_val
            k += 1
        return ObservableSeries(
            times=gate_grid_times(schedule.tau, schedule.n_steps, engine.length),
            values={"loschmidt": echo, "sigma_z": sz},
        )

    n_samples = schedule.n_steps + 1
    echo = np.empty(n_samples)
    sz = np.empty(n_samples)
    particles = np.empty(n_samples)
    norms = np.empty(n_samples)
    entropies = np.empty(n_samples) if with_entropy else None

    def record(i: int) -> None:
        prob = psi.real ** 2 + psi.imag ** 2
        echo[i] = echo_of(psi)
        sz[i] = float(zdiag @ prob)
        particles[i] = float(engine.particle_diag @ prob)
        norms[i] = math.sqrt(float(prob.sum()))
        if entropies is not None:
            entropies[i] = entanglement_entropy(psi / norms[i], engine.split)

    record(0)
    for step in range(schedule.n_steps):
        for j in schedule.gates[step * half:(step + 1) * half]:
            oi = ones[j - 1]
            zi = zeros[j - 1]
            a = psi[oi]
            b = psi[zi]
            psi[oi] = c * a + ms * b
            psi[zi] = c * b + ms * a
        record(step + 1)
    values = {"loschmidt": echo, "sigma_z": sz, "particle_number": particles, "norm": norms}
    if entropies is not None:
        values["entropy_nats"] = entropies
    return ObservableSeries(times=step_grid_times(schedule.tau, schedule.n_steps),
                            values=values)


def exact_evolution(initial_sector: np.ndarray, times: np.ndarray, spectral: SpectralData,
                    sector: ZeroMomentumBasis, site: int | None = None,
                    with_entropy: bool = False) -> ObservableSeries:
    """Eigenbasis evolution of a zero-momentum state, sampled on `times`.

    sigma^z and particle number are orbit-diagonal in the sector, the
    entropy expands each sample into the full basis.
    """
    if len(initial_sector) != sector.size or spectral.size != sector.size:
        raise ValueError("state, spectral data and sector sizes disagree")
    _check_normalized(initial_sector)
    if site is None:
        site = center_matter_site(sector.length)
    times = np.asarray(times, dtype=float)
    coef = spectral.states.T @ initial_sector.astype(complex)
    phases = np.exp(-1j * np.outer(spectral.energies, times))
    evolved = spectral.states @ (phases * coef[:, None])  # (D, T)
    amp0 = initial_sector.conj() @ evolved
    echo = amp0.real ** 2 + amp0.imag ** 2
    prob = evolved.real ** 2 + evolved.imag ** 2
    zdiag = sector.orbit_average(sigma_z_values(sector.basis, site))
    pdiag = sector.orbit_average(particle_numbers(sector.basis))
    values = {
        "loschmidt": echo,
        "sigma_z": zdiag @ prob,
        "particle_number": pdiag @ prob,
        "norm": np.sqrt(prob.sum(axis=0)),
    }
    if with_entropy:
        split = HalfChainSplit(sector.basis)
        values["entropy_nats"] = np.array([
            entanglement_entropy(sector.expand(evolved[:, i]) / values["norm"][i], split)
            for i in range(len(times))
        ])
    return ObservableSeries(times=times.copy(), values=values)


def normalized_deviation(series: np.ndarray, reference: np.ndarray) -> float:
    """Root of sum((Q - Qbar)^2) over sum(Qbar^2), both sums over the whole grid."""
    series = np.asarray(series, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if series.shape != reference.shape:
        raise ValueError("series and reference must share a grid")
    den = float((reference ** 2).sum())
    if den == 0.0:
        raise ValueError("reference series is identically zero")
    return math.sqrt(float(((series - reference) ** 2).sum()) / den)


def cumulative_deviation(series: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Running version of normalized_deviation, one value per grid prefix."""
    series = np.asarray(series, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if series.shape != reference.shape:
        raise ValueError("series and reference must share a grid")
    num = np.cumsum((series - reference) ** 2)
    den = np.cumsum(reference ** 2)
    if den[-1] == 0.0:
        raise ValueError("reference series is identically zero")
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.sqrt(num / den)
    return np.nan_to_num(out, nan=0.0, posinf=0.0)


@dataclass
class RunStatistics:
    """Ensemble deviation statistics of random circuits against a reference."""

    n_runs: int
    group_size: int
    times: np.ndarray
    group_deltas: dict[str, np.ndarray]      # one deviation per group of K runs
    delta_mean: dict[str, float]
    delta_err: dict[str, float]              # population spread over the groups
    pooled_mean: dict[str, np.ndarray]       # ensemble-mean series over all runs
    pooled_deviation: dict[str, np.ndarray]  # running deviation of the pooled mean

    @property
    def n_groups(self) -> int:
        return self.n_runs // self.group_size


_WORKER: dict = {}


def _ensemble_worker_init(length: int, site: int, initial: np.ndarray,
                          tau: float, n_steps: int, seed: int) -> None:
    basis = enumerate_physical_basis(length)
    _WORKER["engine"] = CircuitEngine(basis, site=site)
    _WORKER["initial"] = initial
    _WORKER["tau"] = tau
    _WORKER["n_steps"] = n_steps
    _WORKER["seed"] = seed


def _ensemble_worker_run(run_index: int) -> tuple[np.ndarray, np.ndarray]:
    engine: CircuitEngine = _WORKER["engine"]
    schedule = random_schedule(_WORKER["seed"], _WORKER["n_steps"], engine.length,
                               _WORKER["tau"], run_index=run_index)
    series = run_circuit(_WORKER["initial"], schedule, engine, sample="gate")
    return series["loschmidt"], series["sigma_z"]


def ensemble_statistics(initial: np.ndarray, engine: CircuitEngine,
                        reference: ObservableSeries, seed: int,
                        n_runs: int, group_size: int, tau: float, n_steps: int,
                        workers: int = 1) -> RunStatistics:
    """Run an ensemble of random circuits and compare it to a reference series.

    Runs n_runs independent circuits with schedules keyed by (seed, run
    index), groups them into n_runs/group_size groups, and computes the
    per-group deviation of the group-mean series from the reference, their
    mean, and the population spread of the group deviations. Results are
    reduced in ascending run order, so they do not depend on `workers`.
    """
    if n_runs < 1 or group_size < 1:
        raise ValueError("n_runs and group_size must be positive")
    if n_runs % group_size != 0:
        raise ValueError(f"group size {group_size} does not divide run count {n_runs}")
    observables = ("loschmidt", "sigma_z")
    expected = n_steps * (engine.length // 2) + 1
    for name in observables:
        if len(reference[name]) != expected:
            raise ValueError("reference series must be sampled on the per-gate grid")

    if workers > 1:
        with ProcessPoolExecutor(
                max_workers=workers, initializer=_ensemble_worker_init,
                initargs=(engine.length, engine.site, initial, tau, n_steps, seed)) as pool:
            results = list(pool.map(_ensemble_worker_run, range(n_runs),
                                    chunksize=max(1, n_runs // (workers * 8))))
    else:
        results = []
        for r in range(n_runs):
            schedule = random_schedule(seed, n_steps, engine.length, tau, run_index=r)
            series = run_circuit(initial, schedule, engine, sample="gate")
            results.append((series["loschmidt"], series["sigma_z"]))

    stacked = {name: np.array([res[i] for res in results])
               for i, name in enumerate(observables)}
    n_groups = n_runs // group_size
    group_deltas = {}
    delta_mean = {}
    delta_err = {}
    pooled_mean = {}
    pooled_dev = {}
    for name in observables:
        ref = reference[name]
        groups = stacked[name].reshape(n_groups, group_size, -1).mean(axis=1)
        deltas = np.array([normalized_deviation(g, ref) for g in groups])
        group_deltas[name] = deltas
        delta_mean[name] = float(deltas.mean())
        delta_err[name] = float(np.sqrt(((deltas - deltas.mean()) ** 2).sum() / n_groups))
        pooled = stacked[name].mean(axis=0)
        pooled_mean[name] = pooled
        pooled_dev[name] = cumulative_deviation(pooled, ref)
    return RunStatistics(
        n_runs=n_runs, group_size=group_size, times=reference.times.copy(),
        group_deltas=group_deltas, delta_mean=delta_mean, delta_err=delta_err,
        pooled_mean=pooled_mean, pooled_deviation=pooled_dev,
    )
