import numpy as np
import pytest
import scipy.linalg

from schwinger_qlm import (
    CircuitEngine,
    apply_gate,
    cumulative_deviation,
    eigendecompose,
    ensemble_statistics,
    enumerate_physical_basis,
    exact_evolution,
    matter_to_states,
    normalized_deviation,
    random_schedule,
    run_circuit,
    sequential_schedule,
    zero_momentum_hamiltonian,
)
from schwinger_qlm.circuits import gate_grid_times, step_grid_times
from schwinger_qlm.hamiltonian import triple_mask


@pytest.fixture(scope="module")
def engine8(basis8):
    return CircuitEngine(basis8)


def dense_single_term(basis, j):
    H = np.zeros((len(basis), len(basis)))
    mask = triple_mask(j, basis.length)
    for i, c in enumerate(basis.configs):
        t = int(c) & mask
        if t == mask:
            H[basis.position(int(c) ^ mask), i] = 1.0
            H[i, basis.position(int(c) ^ mask)] = 1.0
    return H


def test_sequential_schedule_structure():
    s = sequential_schedule(8, 0.1, 3)
    assert s.kind == "sequential"
    assert np.array_equal(s.gates, np.tile(np.arange(1, 5), 3))
    layered = sequential_schedule(12, 0.1, 2, order="layered")
    assert layered.kind == "layered"
    block = layered.gates[:6]
    assert list(block) == [1, 3, 5, 2, 4, 6]
    with pytest.raises(ValueError):
        sequential_schedule(8, 0.1, 2, order="zigzag")
    with pytest.raises(ValueError):
        sequential_schedule(8, 0.1, 0)


def test_random_schedule_determinism():
    a = random_schedule(123, 10, 40, 0.1)
    b = random_schedule(123, 10, 40, 0.1)
    assert np.array_equal(a.gates, b.gates)
    c = random_schedule(123, 10, 40, 0.1, run_index=1)
    assert not np.array_equal(a.gates, c.gates)
    d = random_schedule(124, 10, 40, 0.1)
    assert not np.array_equal(a.gates, d.gates)
    assert len(a.gates) == 10 * 20
    assert a.gates.min() >= 1 and a.gates.max() <= 20


def test_random_schedule_uniformity():
    # chi-square against the multinomial model: mean dof, 3 sigma above
    draws = 100_000
    bins = 20
    schedule = random_schedule(2024, draws // bins, 40, 0.1)
    counts = np.bincount(schedule.gates, minlength=bins + 1)[1:]
    expected = draws / bins
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    dof = bins - 1
    assert chi2 < dof + 3 * np.sqrt(2 * dof)


def test_apply_gate_identity_and_range(engine8, basis8):
    rng = np.random.default_rng(0)
    psi = rng.normal(size=len(basis8)) + 1j * rng.normal(size=len(basis8))
    psi /= np.linalg.norm(psi)
    assert np.abs(apply_gate(psi, 1, 0.0, engine8) - psi).max() <= 1e-15
    out = apply_gate(psi, 3, 0.7, engine8)
    assert abs(np.linalg.norm(out) - 1.0) <= 1e-12
    with pytest.raises(ValueError):
        apply_gate(psi, 0, 0.1, engine8)
    with pytest.raises(ValueError):
        apply_gate(psi, 5, 0.1, engine8)


def test_gate_quarter_turn_annihilates_pair(engine8, basis8):
    ff = np.zeros(len(basis8))
    ff_idx = basis8.position((1 << 8) - 1)
    ff[ff_idx] = 1.0
    for j in range(1, 5):
        out = apply_gate(ff, j, np.pi / 2, engine8)
        partner = basis8.position(((1 << 8) - 1) ^ triple_mask(j, 8))
        assert abs(out[partner] - (-1j)) <= 1e-12
        assert abs(out[ff_idx]) <= 1e-12


@pytest.mark.parametrize("tau", [0.1, 0.7, 2.3])
def test_gate_matches_matrix_exponential(engine8, basis8, tau):
    rng = np.random.default_rng(4)
    psi = rng.normal(size=len(basis8)) + 1j * rng.normal(size=len(basis8))
    psi /= np.linalg.norm(psi)
    for j in range(1, 5):
        U = scipy.linalg.expm(-1j * tau * dense_single_term(basis8, j))
        assert np.abs(apply_gate(psi, j, tau, engine8) - U @ psi).max() <= 1e-12


def test_circuit_step_matches_exponential_product(engine8, basis8):
    tau = 0.3
    rng = np.random.default_rng(6)
    psi0 = rng.normal(size=len(basis8)) + 1j * rng.normal(size=len(basis8))
    psi0 /= np.linalg.norm(psi0)
    schedule = sequential_schedule(8, tau, 2)
    series = run_circuit(psi0, schedule, engine8, sample="step")
    U = np.eye(len(basis8), dtype=complex)
    for j in range(1, 5):
        U = scipy.linalg.expm(-1j * tau * dense_single_term(basis8, j)) @ U
    psi2 = U @ (U @ psi0)
    assert series["loschmidt"][2] == pytest.approx(abs(np.vdot(psi0, psi2)) ** 2, abs=1e-12)


def test_commuting_gates_order_independent():
    basis = enumerate_physical_basis(12)
    engine = CircuitEngine(basis)
    rng = np.random.default_rng(8)
    psi = rng.normal(size=len(basis)) + 1j * rng.normal(size=len(basis))
    psi /= np.linalg.norm(psi)
    # triples of gates 1 and 3 share no site at L=12
    a = apply_gate(apply_gate(psi, 1, 0.4, engine), 3, 0.4, engine)
    b = apply_gate(apply_gate(psi, 3, 0.4, engine), 1, 0.4, engine)
    assert np.abs(a - b).max() <= 1e-12
    # permuting gates inside a commuting layer leaves the state unchanged
    layer = [1, 3, 5]
    x = psi.copy()
    y = psi.copy()
    for j in layer:
        x = apply_gate(x, j, 0.4, engine)
    for j in reversed(layer):
        y = apply_gate(y, j, 0.4, engine)
    assert np.abs(x - y).max() <= 1e-12


def test_run_circuit_step_series(engine8, basis8, sector8):
    vac = matter_to_states([], sector8)
    psi0 = sector8.expand(vac)
    schedule = sequential_schedule(8, 0.1, 10)
    series = run_circuit(psi0, schedule, engine8, sample="step", with_entropy=True)
    assert len(series.times) == 11
    assert series["loschmidt"][0] == pytest.approx(1.0, abs=1e-12)
    assert np.abs(series["norm"] - 1.0).max() <= 1e-12
    assert series["particle_number"][0] == pytest.approx(0.0, abs=1e-12)
    assert series["entropy_nats"][0] == pytest.approx(np.log(2), abs=1e-12)
    assert np.array_equal(series.times, step_grid_times(0.1, 10))


def test_gate_grid_agrees_with_step_grid(engine8, basis8, sector8):
    vac = matter_to_states([], sector8)
    psi0 = sector8.expand(vac)
    schedule = sequential_schedule(8, 0.1, 10)
    by_step = run_circuit(psi0, schedule, engine8, sample="step")
    by_gate = run_circuit(psi0, schedule, engine8, sample="gate")
    assert len(by_gate.times) == 41
    half = 4
    for name in ("loschmidt", "sigma_z"):
        assert np.abs(by_gate[name][::half] - by_step[name]).max() <= 1e-10
    assert np.allclose(by_gate.times, gate_grid_times(0.1, 10, 8))


def test_run_circuit_validation(engine8, basis8):
    psi = np.zeros(len(basis8))
    psi[0] = 2.0
    with pytest.raises(ValueError):
        run_circuit(psi, sequential_schedule(8, 0.1, 2), engine8)
    good = np.zeros(len(basis8))
    good[0] = 1.0
    bad_schedule = sequential_schedule(10, 0.1, 2)  # wrong chain length
    with pytest.raises(ValueError):
        run_circuit(good, bad_schedule, engine8)
    with pytest.raises(ValueError):
        run_circuit(good, sequential_schedule(8, 0.1, 2), engine8, sample="block")


def test_exact_evolution_matches_expm(sector8):
    H = zero_momentum_hamiltonian(sector8)
    spectral = eigendecompose(H)
    rng = np.random.default_rng(12)
    psi = rng.normal(size=sector8.size)
    psi /= np.linalg.norm(psi)
    times = np.linspace(0.0, 3.0, 7)
    series = exact_evolution(psi, times, spectral, sector8)
    for i, t in enumerate(times):
        U = scipy.linalg.expm(-1j * t * H)
        ref = U @ psi
        assert series["loschmidt"][i] == pytest.approx(abs(np.vdot(psi, ref)) ** 2, abs=1e-12)
    assert series["loschmidt"][0] == pytest.approx(1.0, abs=1e-12)
    assert np.abs(series["norm"] - 1.0).max() <= 1e-12


def test_exact_evolution_initial_values(sector8):
    H = zero_momentum_hamiltonian(sector8)
    spectral = eigendecompose(H)
    vac = matter_to_states([], sector8)
    series = exact_evolution(vac, np.array([0.0]), spectral, sector8, with_entropy=True)
    assert series["particle_number"][0] == pytest.approx(0.0, abs=1e-12)
    assert series["entropy_nats"][0] == pytest.approx(np.log(2), abs=1e-12)


def test_deviation_measures():
    rng = np.random.default_rng(13)
    q = rng.normal(size=50)
    qbar = rng.normal(size=50) + 2.0
    assert normalized_deviation(qbar, qbar) == 0.0
    d = normalized_deviation(q, qbar)
    assert normalized_deviation(3.0 * q, 3.0 * qbar) == pytest.approx(d, rel=1e-12)
    running = cumulative_deviation(q, qbar)
    assert running[-1] == pytest.approx(d, rel=1e-12)
    assert len(running) == 50
    with pytest.raises(ValueError):
        normalized_deviation(q[:10], qbar)
    with pytest.raises(ValueError):
        normalized_deviation(q, np.zeros(50))


def test_ensemble_statistics_small(engine8, sector8):
    vac = matter_to_states([], sector8)
    psi0 = sector8.expand(vac)
    n_steps = 5
    reference = run_circuit(psi0, sequential_schedule(8, 0.1, n_steps), engine8,
                            sample="gate")
    stats = ensemble_statistics(psi0, engine8, reference, seed=99, n_runs=8,
                                group_size=4, tau=0.1, n_steps=n_steps)
    assert stats.n_groups == 2
    for name in ("loschmidt", "sigma_z"):
        assert stats.group_deltas[name].shape == (2,)
        assert stats.delta_mean[name] >= 0.0
        assert stats.delta_err[name] >= 0.0
        assert len(stats.pooled_deviation[name]) == n_steps * 4 + 1
    again = ensemble_statistics(psi0, engine8, reference, seed=99, n_runs=8,
                                group_size=4, tau=0.1, n_steps=n_steps)
    for name in ("loschmidt", "sigma_z"):
        assert np.array_equal(stats.group_deltas[name], again.group_deltas[name])
        assert np.array_equal(stats.pooled_mean[name], again.pooled_mean[name])
    with pytest.raises(ValueError):
        ensemble_statistics(psi0, engine8, reference, seed=99, n_runs=10,
                            group_size=4, tau=0.1, n_steps=n_steps)


def test_ensemble_workers_match_serial(engine8, sector8):
    vac = matter_to_states([], sector8)
    psi0 = sector8.expand(vac)
    reference = run_circuit(psi0, sequential_schedule(8, 0.1, 4), engine8, sample="gate")
    serial = ensemble_statistics(psi0, engine8, reference, seed=5, n_runs=6,
                                 group_size=3, tau=0.1, n_steps=4, workers=1)
    parallel = ensemble_statistics(psi0, engine8, reference, seed=5, n_runs=6,
                                   group_size=3, tau=0.1, n_steps=4, workers=2)
    for name in ("loschmidt", "sigma_z"):
        assert np.array_equal(serial.group_deltas[name], parallel.group_deltas[name])
        assert np.array_equal(serial.pooled_mean[name], parallel.pooled_mean[name])


def test_gate_pairing_closure_is_total(basis40, engine40):
    # every all-1 triple has its flipped partner inside the basis and vice versa
    pairing = engine40.pairing
    for j in range(1, 21):
        mask = np.uint64(triple_mask(j, 40))
        ones_sel = (basis40.configs & mask) == mask
        zeros_sel = (basis40.configs & mask) == 0
        assert ones_sel.sum() == pairing.pairs_per_gate
        assert zeros_sel.sum() == pairing.pairs_per_gate
        assert np.array_equal(np.sort(pairing.ones[j - 1]), np.where(ones_sel)[0])
        assert np.array_equal(np.sort(pairing.zeros[j - 1]), np.where(zeros_sel)[0])
        assert np.array_equal(basis40.configs[pairing.ones[j - 1]] ^ mask,
                              basis40.configs[pairing.zeros[j - 1]])


def test_exact_evolution_thermalization_contrast(sector40, spectral40):
    # past t = 10 the fully-filled state hugs its thermal value while the
    # vacuum keeps oscillating with more than twice the amplitude
    times = np.arange(0.0, 20.0001, 0.1)
    late = times >= 10.0
    amplitudes = {}
    for name, occupied in (("vacuum", []), ("fully-filled", range(1, 40, 2))):
        sec = matter_to_states(occupied, sector40)
        series = exact_evolution(sec, times, spectral40, sector40)
        sz_late = series["sigma_z"][late]
        amplitudes[name] = float(sz_late.max() - sz_late.min())
    assert amplitudes["vacuum"] > 0.6
    assert amplitudes["fully-filled"] < 0.4
    assert amplitudes["vacuum"] > 2.0 * amplitudes["fully-filled"]


def test_run_circuit_custom_echo_reference(engine8, basis8, sector8):
    vac = sector8.expand(matter_to_states([], sector8))
    ff = np.zeros(len(basis8))
    ff[basis8.position((1 << 8) - 1)] = 1.0
    schedule = sequential_schedule(8, 0.2, 3)
    series = run_circuit(ff, schedule, engine8, sample="step", reference=vac)
    # overlap with a reference orthogonal to the initial state starts at zero
    assert series["loschmidt"][0] == pytest.approx(0.0, abs=1e-15)
    default = run_circuit(ff, schedule, engine8, sample="step")
    assert default["loschmidt"][0] == pytest.approx(1.0, abs=1e-12)
