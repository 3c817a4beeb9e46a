"""Three-body flip Hamiltonian, its zero-momentum matrix, and spectral diagnostics.

The Hamiltonian is a sum of L/2 terms. Term j acts on the site triple
(2j-1, 2j, 2j+1) and exchanges the two triple states all-down (bits 111)
and all-up (bits 000) with matrix element +1; every other triple state is
annihilated. Both triple states of a physical configuration are physical,
so the flip pairs the basis with itself and the dynamics never leaves it.
Energies are dimensionless (the single coupling has been scaled out) and
the matrix is purely off-diagonal in the configuration basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .basis import PhysicalBasis, ZeroMomentumBasis, vacuum_configuration

__all__ = [
    "GatePairing",
    "SpectralData",
    "EigenstateDiagnostics",
    "HalfChainSplit",
    "entropy_profile",
    "triple_mask",
    "build_gate_pairing",
    "apply_hamiltonian",
    "dense_hamiltonian",
    "zero_momentum_hamiltonian",
    "eigendecompose",
    "sigma_z_values",
    "particle_numbers",
    "entanglement_entropy",
    "eigenstate_diagnostics",
    "thermal_beta",
    "thermal_expectation",
]


def triple_mask(gate_index: int, length: int) -> int:
    """Bit mask of the site triple (2j-1, 2j, 2j+1), periodic."""
    if not 1 <= gate_index <= length // 2:
        raise ValueError(f"gate index must lie in 1..{length // 2}, got {gate_index}")
    j = gate_index
    return (1 << (2 * j - 2)) | (1 << (2 * j - 1)) | (1 << ((2 * j) % length))


@dataclass(frozen=True)
class GatePairing:
    """Index pairs coupled by each Hamiltonian term, over a physical basis.

    ones[j-1] lists basis positions whose triple j is all-1, zeros[j-1]
    the positions of their flipped partners. Translation covariance makes
    the pair count identical for every term, so both tables are
    rectangular (L/2, pairs) arrays.
    """

    length: int
    ones: np.ndarray
    zeros: np.ndarray

    @property
    def n_gates(self) -> int:
        return self.ones.shape[0]

    @property
    def pairs_per_gate(self) -> int:
        return self.ones.shape[1]


def build_gate_pairing(basis: PhysicalBasis) -> GatePairing:
    """Build the pairing tables, checking closure of every flip inside the basis."""
    length = basis.length
    ones_rows = []
    zeros_rows = []
    for j in range(1, length // 2 + 1):
        mask = np.uint64(triple_mask(j, length))
        sel = (basis.configs & mask) == mask
        ones_cfg = basis.configs[sel]
        partners = ones_cfg ^ mask
        ones_rows.append(basis.positions(ones_cfg))
        zeros_rows.append(basis.positions(partners))  # raises if a partner is missing
    counts = {len(r) for r in ones_rows}
    if len(counts) != 1:
        raise AssertionError(f"pair counts differ between terms: {sorted(counts)}")
    return GatePairing(length=length,
                       ones=np.array(ones_rows, dtype=np.int64),
                       zeros=np.array(zeros_rows, dtype=np.int64))


def apply_hamiltonian(state: np.ndarray, pairing: GatePairing) -> np.ndarray:
    """Matrix-free action of the full Hamiltonian on full-basis amplitudes."""
    if state.ndim != 1:
        raise ValueError("state must be a one-dimensional amplitude vector")
    out = np.zeros_like(state)
    for j in range(pairing.n_gates):
        oi = pairing.ones[j]
        zi = pairing.zeros[j]
        np.add.at(out, zi, state[oi])
        np.add.at(out, oi, state[zi])
    return out


def dense_hamiltonian(basis: PhysicalBasis) -> np.ndarray:
    """Explicit full-basis matrix; intended for small chains."""
    pairing = build_gate_pairing(basis)
    dim = len(basis)
    H = np.zeros((dim, dim))
    for j in range(pairing.n_gates):
        for a, b in zip(pairing.ones[j], pairing.zeros[j]):
            H[a, b] += 1.0
            H[b, a] += 1.0
    return H


def zero_momentum_hamiltonian(sector: ZeroMomentumBasis) -> np.ndarray:
    """Hamiltonian in the zero-momentum orbit basis.

    Element (g, f) is sqrt(m_f/m_g) times the number of flips taking the
    representative of orbit f into orbit g. Assembled from the integer
    edge-count matrix E[g, f] = m_f * n_fg, which is exactly symmetric, so
    the result is symmetric to the last bit.
    """
    basis = sector.basis
    length = basis.length
    D = sector.size
    edges = np.zeros((D, D), dtype=np.int64)
    for f, orb in enumerate(sector.orbits):
        rep = orb.representative
        for j in range(1, length // 2 + 1):
            mask = triple_mask(j, length)
            t = rep & mask
            if t == mask or t == 0:
                g = sector.orbit_of(rep ^ mask)
                edges[g, f] += orb.multiplicity
    if not np.array_equal(edges, edges.T):
        raise AssertionError("orbit edge counts came out asymmetric")
    m = sector.multiplicities.astype(float)
    return edges / np.sqrt(np.outer(m, m))


@dataclass(frozen=True)
class SpectralData:
    """Eigenvalues (ascending) and orthonormal eigenvector columns."""

    energies: np.ndarray
    states: np.ndarray

    @property
    def size(self) -> int:
        return len(self.energies)


def eigendecompose(H: np.ndarray) -> SpectralData:
    """Full dense symmetric eigendecomposition."""
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.allclose(H, H.T, atol=1e-12):
        raise ValueError("matrix is not symmetric")
    energies, states = np.linalg.eigh(H)
    return SpectralData(energies=energies, states=states)


def sigma_z_values(basis: PhysicalBasis, site: int) -> np.ndarray:
    """sigma^z eigenvalue of one site for every basis configuration."""
    if not 1 <= site <= basis.length:
        raise ValueError(f"site must lie in 1..{basis.length}, got {site}")
    bits = (basis.configs >> np.uint64(site - 1)) & np.uint64(1)
    return 1.0 - 2.0 * bits.astype(float)


def particle_numbers(basis: PhysicalBasis) -> np.ndarray:
    """Matter-site particle count of every basis configuration."""
    matter_mask = np.uint64(sum(1 << i for i in range(0, basis.length, 2)))
    vals = basis.configs & matter_mask
    return np.array([int(v).bit_count() for v in vals], dtype=float)


def center_matter_site(length: int) -> int:
    """The odd site nearest the chain midpoint (site 21 at L=40)."""
    half = length // 2
    return half + 1 if (half + 1) % 2 == 1 else half


class HalfChainSplit:
    """Contiguous bipartition tables for Schmidt decompositions.

    The left block holds sites 1..cut (the first half by default), the
    right block the rest. Each configuration is tagged with the id of its
    left and right substring; a state's amplitudes scattered into the
    (left, right) matrix give the Schmidt coefficients by singular value
    decomposition.
    """

    def __init__(self, basis: PhysicalBasis, cut: int | None = None):
        if cut is None:
            cut = basis.length // 2
        if not 1 <= cut <= basis.length - 1:
            raise ValueError(f"cut must lie in 1..{basis.length - 1}, got {cut}")
        self.cut = cut
        low = np.uint64((1 << cut) - 1)
        left_vals = basis.configs & low
        right_vals = basis.configs >> np.uint64(cut)
        self._left_unique, self.left_id = np.unique(left_vals, return_inverse=True)
        self._right_unique, self.right_id = np.unique(right_vals, return_inverse=True)
        self.shape = (len(self._left_unique), len(self._right_unique))

    def schmidt_values(self, state: np.ndarray) -> np.ndarray:
        M = np.zeros(self.shape, dtype=complex)
        M[self.left_id, self.right_id] = state
        return np.linalg.svd(M, compute_uv=False)


def entanglement_entropy(state: np.ndarray, split: HalfChainSplit,
                         cutoff: float = 1e-12) -> float:
    """Half-chain entanglement entropy in nats of a normalized full-basis state."""
    norm = np.linalg.norm(state)
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(f"state is not normalized, |psi| = {norm!r}")
    s = split.schmidt_values(state)
    s = s[s > cutoff]
    p = s * s
    return float(-(p * np.log(p)).sum())


def entropy_profile(state: np.ndarray, basis: PhysicalBasis,
                    cuts: Sequence[int] | None = None) -> np.ndarray:
    """Entanglement entropy of a full-basis state across a sweep of cuts.

    Defaults to every bond, cuts 1..L-1. Exploratory: the profile is not
    pinned to reference values anywhere, unlike the half-chain entropy.
    """
    if cuts is None:
        cuts = range(1, basis.length)
    return np.array([
        entanglement_entropy(state, HalfChainSplit(basis, cut=c)) for c in cuts
    ])


@dataclass(frozen=True)
class EigenstateDiagnostics:
    """Per-eigenstate observables of a zero-momentum spectrum."""

    energies: np.ndarray
    entropies: np.ndarray         # half-chain, nats
    vacuum_overlap: np.ndarray    # |<vac|E_n>|^2
    suppressed: np.ndarray        # overlap below the reporting cutoff
    sigma_z: np.ndarray           # <E_n| sigma^z_site |E_n>
    site: int

    @property
    def size(self) -> int:
        return len(self.energies)


def eigenstate_diagnostics(spectral: SpectralData, sector: ZeroMomentumBasis,
                           site: int | None = None,
                           overlap_cutoff: float = 1e-12) -> EigenstateDiagnostics:
    """Vacuum overlap, local magnetization and entropy for every eigenstate.

    sigma^z of a single site is diagonal in the orbit basis (orbits are
    disjoint sets of configurations), with the orbit-averaged eigenvalue on
    the diagonal, so the expectation needs no expansion; the entropy does.
    """
    if spectral.size != sector.size:
        raise ValueError("spectral data does not match the sector size")
    if site is None:
        site = center_matter_site(sector.length)
    vac_orbit = sector.orbit_of(vacuum_configuration(sector.length))
    overlap = spectral.states[vac_orbit, :] ** 2
    zdiag = sector.orbit_average(sigma_z_values(sector.basis, site))
    sigma_z = (spectral.states ** 2 * zdiag[:, None]).sum(axis=0)
    split = HalfChainSplit(sector.basis)
    entropies = np.array([
        entanglement_entropy(sector.expand(spectral.states[:, n]), split)
        for n in range(spectral.size)
    ])
    return EigenstateDiagnostics(
        energies=spectral.energies.copy(),
        entropies=entropies,
        vacuum_overlap=overlap,
        suppressed=overlap < overlap_cutoff,
        sigma_z=sigma_z,
        site=site,
    )


def _boltzmann_weights(beta: float, energies: np.ndarray) -> np.ndarray:
    a = -beta * energies
    a -= a.max()
    return np.exp(a)


def thermal_expectation(values: np.ndarray, beta: float, energies: np.ndarray) -> float:
    """Canonical average of an eigenbasis-diagonal quantity at inverse temperature beta."""
    w = _boltzmann_weights(beta, energies)
    return float((values * w).sum() / w.sum())


def thermal_beta(energy: float, energies: np.ndarray,
                 bracket: float = 50.0, tol: float = 1e-10) -> float:
    """Inverse temperature whose canonical mean energy equals `energy`.

    Bisection on [-bracket, bracket]; the canonical mean is strictly
    decreasing in beta, negative beta handles states in the upper half of
    the spectrum. The residual is driven below `tol`.
    """
    emin, emax = float(energies.min()), float(energies.max())
    if not emin < energy < emax:
        raise ValueError(f"target energy {energy} outside the spectral range ({emin}, {emax})")

    def residual(beta: float) -> float:
        return thermal_expectation(energies, beta, energies) - energy

    lo, hi = -bracket, bracket
    r_lo, r_hi = residual(lo), residual(hi)
    if not (r_lo > 0 > r_hi):
        raise ArithmeticError(
            f"bisection bracket [-{bracket}, {bracket}] does not enclose the root")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        r = residual(mid)
        if abs(r) <= tol:
            return mid
        if r > 0:
            lo = mid
        else:
            hi = mid
    raise ArithmeticError(f"bisection failed to reach residual {tol}")
