"""Gauge-invariant configuration space of the spin-1/2 link chain.

Conventions used by every module in this package:

* Sites are numbered 1..L on a periodic chain, L even. Odd sites carry
  matter spins, even sites carry gauge spins.
* A configuration is stored as an unsigned integer whose bit i-1 holds
  site i (site 1 is the least significant bit). The printable form puts
  site 1 leftmost.
* Bit value b maps to the sigma^z eigenvalue z = 1 - 2b, so bit 0 is spin
  up and bit 1 is spin down. A matter bit 1 means a particle is present;
  the particle count is sum over odd sites of (1 - z)/2.

A configuration is *physical* when every odd site j satisfies the local
constraint z_j - z_{j-1} - z_{j+1} - 1 = 0 (indices periodic). In bits
this reads b_j = b_{j-1} + b_{j+1} - 1: the gauge pair around a matter
site may never be (0, 0), and every matter bit is fixed by its gauge
neighbours. Physical configurations therefore biject onto cyclic gauge
strings of length L/2 with no two adjacent 0 bits, which is what the
enumeration below exploits; nothing here ever scans all 2^L strings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "GaugeConstraintError",
    "PhysicalBasis",
    "TranslationOrbit",
    "MomentumState",
    "ZeroMomentumBasis",
    "gauss_residual",
    "enumerate_physical_basis",
    "dimension_formula",
    "translate_two",
    "orbit_decomposition",
    "zero_momentum_state",
    "pxp_to_qlm",
    "qlm_to_pxp",
    "gauge_completions",
    "matter_to_states",
    "vacuum_configuration",
    "config_to_string",
    "config_from_string",
    "write_basis_file",
]


class GaugeConstraintError(ValueError):
    """An occupation or gauge pattern violates the local constraint."""


def _check_length(length: int) -> None:
    if length % 2 != 0 or length < 4:
        raise ValueError(f"chain length must be even and >= 4, got {length}")


def bit(config: int, site: int) -> int:
    """Bit of `site` (1-based) in an integer-coded configuration."""
    return (config >> (site - 1)) & 1


def gauss_residual(config: int, site: int, length: int) -> int:
    """Local constraint value z_site - z_{site-1} - z_{site+1} - 1 at a matter site.

    Zero iff the constraint holds there. Ranges over {-4, ..., +2}.
    """
    _check_length(length)
    if site % 2 == 0 or not 1 <= site <= length - 1:
        raise ValueError(f"site must be odd and within 1..{length - 1}, got {site}")
    z = 1 - 2 * bit(config, site)
    z_left = 1 - 2 * bit(config, (site - 2) % length + 1)
    z_right = 1 - 2 * bit(config, site % length + 1)
    return z - z_left - z_right - 1


def translate_two(config: int, length: int) -> int:
    """Shift a configuration by two sites: new site i holds old site i+2."""
    config = int(config)
    mask = (1 << length) - 1
    return ((config >> 2) | ((config & 3) << (length - 2))) & mask


@dataclass(frozen=True)
class PhysicalBasis:
    """All physical configurations of a chain, ascending by integer value."""

    length: int
    configs: np.ndarray  # uint64, sorted ascending

    def __len__(self) -> int:
        return len(self.configs)

    def __contains__(self, config: int) -> bool:
        i = int(np.searchsorted(self.configs, np.uint64(config)))
        return i < len(self.configs) and int(self.configs[i]) == int(config)

    @cached_property
    def index(self) -> dict[int, int]:
        """Configuration -> position map."""
        return {int(c): i for i, c in enumerate(self.configs)}

    def position(self, config: int) -> int:
        i = int(np.searchsorted(self.configs, np.uint64(config)))
        if i >= len(self.configs) or int(self.configs[i]) != int(config):
            raise KeyError(f"configuration {config:#x} is not physical at L={self.length}")
        return i

    def positions(self, configs: np.ndarray) -> np.ndarray:
        """Vectorised lookup; every entry must be a member."""
        pos = np.searchsorted(self.configs, configs)
        if not np.array_equal(self.configs[pos], configs):
            raise KeyError("lookup contains configurations outside the physical basis")
        return pos


def enumerate_physical_basis(length: int) -> PhysicalBasis:
    """Enumerate all physical configurations of an even-length chain.

    Works through the gauge sublattice: generate the cyclic binary strings
    of length L/2 with no two adjacent 0 bits, then fill each matter bit as
    the AND of its two gauge neighbours (the b_j = b_{j-1} + b_{j+1} - 1
    rule restricted to valid gauge strings).
    """
    _check_length(length)
    if length > 48:
        raise ValueError(f"chain length {length} exceeds the practical bound 48")
    n = length // 2
    nmask = np.uint64((1 << n) - 1)
    g = np.arange(1 << n, dtype=np.uint64)
    holes = ~g & nmask
    holes_rot = ((holes >> np.uint64(1)) | (holes << np.uint64(n - 1))) & nmask
    gauge = g[(holes & holes_rot) == 0]
    # gauge-string bit k-1 is the gauge spin at chain site 2k
    prev = ((gauge >> np.uint64(n - 1)) | (gauge << np.uint64(1))) & nmask
    matter = gauge & prev
    full = np.zeros_like(gauge)
    for k in range(n):
        full |= ((matter >> np.uint64(k)) & np.uint64(1)) << np.uint64(2 * k)
        full |= ((gauge >> np.uint64(k)) & np.uint64(1)) << np.uint64(2 * k + 1)
    full.sort()
    return PhysicalBasis(length=length, configs=full)


def dimension_formula(length: int) -> int:
    """Closed-form count of physical configurations, exact integer arithmetic.

    Requires L/2 even and L >= 8 (the two binomial sums below need integer
    limits). Equals len(enumerate_physical_basis(length)).
    """
    if length % 2 != 0 or length < 8 or (length // 2) % 2 != 0:
        raise ValueError(f"formula needs even L >= 8 with L/2 even, got {length}")
    n = length // 2
    first = sum(
        math.factorial(2 * i + (n - 2 * i) // 2)
        // (math.factorial(2 * i) * math.factorial((n - 2 * i) // 2))
        for i in range(1, (n - 2) // 2 + 1)
    )
    second = sum(
        math.factorial(2 * i + (n - 2 - 2 * i) // 2)
        // (math.factorial(2 * i) * math.factorial((n - 2 - 2 * i) // 2))
        for i in range(1, (n - 4) // 2 + 1)
    )
    return 2 + first + 1 + second + 1


@dataclass(frozen=True)
class TranslationOrbit:
    """Cyclic family of a configuration under two-site translation."""

    representative: int  # smallest integer value in the family
    multiplicity: int    # least k with T_2^k returning the representative

    def members(self, length: int) -> list[int]:
        out = [self.representative]
        for _ in range(self.multiplicity - 1):
            out.append(translate_two(out[-1], length))
        return out


def orbit_decomposition(basis: PhysicalBasis) -> list[TranslationOrbit]:
    """Partition a physical basis into two-site translation orbits.

    Orbits are ordered by their representative (ascending), matching the
    deterministic ordering of the basis itself.
    """
    length = basis.length
    seen = np.zeros(len(basis), dtype=bool)
    orbits: list[TranslationOrbit] = []
    for i, c in enumerate(basis.configs):
        if seen[i]:
            continue
        members = [int(c)]
        x = translate_two(int(c), length)
        while x != int(c):
            members.append(x)
            x = translate_two(x, length)
        for m in members:
            seen[basis.position(m)] = True
        orbits.append(TranslationOrbit(representative=min(members), multiplicity=len(members)))
    return orbits


def zero_momentum_state(orbit: TranslationOrbit, basis: PhysicalBasis) -> np.ndarray:
    """Equal-phase superposition of an orbit, amplitude 1/sqrt(m) per member."""
    amps = np.zeros(len(basis))
    w = 1.0 / math.sqrt(orbit.multiplicity)
    for m in orbit.members(basis.length):
        amps[basis.position(m)] = w
    return amps


@dataclass(frozen=True)
class MomentumState:
    """Translation eigenstate built on an orbit. Only momentum 0 is supported."""

    orbit: TranslationOrbit
    momentum: float = 0.0

    def __post_init__(self) -> None:
        if self.momentum != 0.0:
            raise NotImplementedError("only the zero-momentum sector is implemented")

    def amplitudes(self, basis: PhysicalBasis) -> np.ndarray:
        return zero_momentum_state(self.orbit, basis)


class ZeroMomentumBasis:
    """Zero-momentum sector data: orbits plus maps between sector and full basis."""

    def __init__(self, basis: PhysicalBasis, orbits: Sequence[TranslationOrbit] | None = None):
        if orbits is None:
            orbits = orbit_decomposition(basis)
        self.basis = basis
        self.orbits = list(orbits)
        self.multiplicities = np.array([o.multiplicity for o in self.orbits], dtype=np.int64)
        self.representatives = np.array([o.representative for o in self.orbits], dtype=np.uint64)
        orbit_index = np.full(len(basis), -1, dtype=np.int64)
        for k, orb in enumerate(self.orbits):
            for m in orb.members(basis.length):
                orbit_index[basis.position(m)] = k
        if (orbit_index < 0).any():
            raise ValueError("orbits do not cover the basis")
        self.orbit_index = orbit_index
        self._inv_sqrt_mult = 1.0 / np.sqrt(self.multiplicities.astype(float))

    @property
    def size(self) -> int:
        return len(self.orbits)

    @property
    def length(self) -> int:
        return self.basis.length

    def orbit_of(self, config: int) -> int:
        return int(self.orbit_index[self.basis.position(config)])

    def expand(self, sector_amps: np.ndarray) -> np.ndarray:
        """Sector amplitudes -> full-basis amplitudes (isometric)."""
        if len(sector_amps) != self.size:
            raise ValueError(f"expected {self.size} sector amplitudes, got {len(sector_amps)}")
        return sector_amps[self.orbit_index] * self._inv_sqrt_mult[self.orbit_index]

    def restrict(self, full_amps: np.ndarray) -> np.ndarray:
        """Full-basis amplitudes -> sector amplitudes (adjoint of expand)."""
        if len(full_amps) != len(self.basis):
            raise ValueError(f"expected {len(self.basis)} amplitudes, got {len(full_amps)}")
        w = full_amps * self._inv_sqrt_mult[self.orbit_index]
        if np.iscomplexobj(w):
            return (np.bincount(self.orbit_index, weights=w.real, minlength=self.size)
                    + 1j * np.bincount(self.orbit_index, weights=w.imag, minlength=self.size))
        return np.bincount(self.orbit_index, weights=w, minlength=self.size)

    def expansion_matrix(self) -> np.ndarray:
        """Dense isometry P with P[x, f] = 1/sqrt(m_f) on orbit members (small L only)."""
        P = np.zeros((len(self.basis), self.size))
        P[np.arange(len(self.basis)), self.orbit_index] = self._inv_sqrt_mult[self.orbit_index]
        return P

    def orbit_average(self, diagonal: np.ndarray) -> np.ndarray:
        """Per-orbit mean of a configuration-diagonal quantity."""
        return (np.bincount(self.orbit_index, weights=diagonal, minlength=self.size)
                / self.multiplicities)


def vacuum_configuration(length: int) -> int:
    """The particle-free configuration whose gauge bits sit on sites 4, 8, ...

    One member of the two-fold vacuum orbit (the other is its two-site
    translate). Needs L = 0 mod 4; for other even L the empty occupation
    has no gauge completion.
    """
    _check_length(length)
    if length % 4 != 0:
        raise GaugeConstraintError(f"no particle-free configuration exists at L={length}")
    return sum(1 << i for i in range(3, length, 4))


def pxp_to_qlm(pxp_bits: Sequence[int]) -> int:
    """Map a blockade-respecting string onto the physical chain configuration.

    Entry j (0-based) of `pxp_bits` becomes the gauge spin at chain site
    2(j+1); matter bits follow from the local constraint. The string may
    not contain two cyclically adjacent 0 bits.
    """
    n = len(pxp_bits)
    if n < 2:
        raise ValueError("need at least two gauge sites")
    vals = [int(b) for b in pxp_bits]
    if any(v not in (0, 1) for v in vals):
        raise ValueError("entries must be 0 or 1")
    for k in range(n):
        if vals[k] == 0 and vals[(k + 1) % n] == 0:
            raise GaugeConstraintError(
                f"adjacent excited pair at positions {k}, {(k + 1) % n} violates the blockade")
    config = 0
    for k in range(n):
        if vals[k]:
            config |= 1 << (2 * k + 1)          # gauge site 2(k+1)
        if vals[k - 1] and vals[k]:
            config |= 1 << (2 * k)              # matter site 2k+1
    return config


def qlm_to_pxp(config: int, length: int) -> tuple[int, ...]:
    """Gauge bits of a physical configuration, as the inverse of pxp_to_qlm."""
    _check_length(length)
    return tuple(bit(config, 2 * k) for k in range(1, length // 2 + 1))


def gauge_completions(occupied: Iterable[int], length: int) -> list[int]:
    """All physical configurations carrying exactly the given matter occupation.

    Walks the recurrence b_{2k} = b_{2k-1} + 1 - b_{2k-2} around the ring
    from both seed values of the gauge bit at site L. Returns 0, 1 or 2
    configurations; raises GaugeConstraintError naming the first even site
    at which the last surviving branch dies.
    """
    _check_length(length)
    occ = set(int(s) for s in occupied)
    for s in occ:
        if s % 2 == 0 or not 1 <= s <= length - 1:
            raise ValueError(f"occupied sites must be odd and within 1..{length - 1}, got {s}")
    n = length // 2
    matter = [1 if (2 * k - 1) in occ else 0 for k in range(1, n + 1)]
    completions: list[int] = []
    failed_at = []
    for seed in (0, 1):
        gauge = [0] * n          # gauge[k-1] is the bit at site 2k
        prev = seed              # bit at site L (== site 0)
        ok = True
        for k in range(1, n + 1):
            g = matter[k - 1] + 1 - prev
            if g not in (0, 1):
                failed_at.append(2 * k)
                ok = False
                break
            gauge[k - 1] = g
            prev = g
        if ok:
            if gauge[n - 1] != seed:
                failed_at.append(length)
                continue
            config = 0
            for k in range(1, n + 1):
                if matter[k - 1]:
                    config |= 1 << (2 * k - 2)
                if gauge[k - 1]:
                    config |= 1 << (2 * k - 1)
            completions.append(config)
    if not completions:
        raise GaugeConstraintError(
            f"occupation {sorted(occ)} admits no gauge completion at L={length}; "
            f"first inconsistent site {max(failed_at)}")
    return sorted(set(completions))


def matter_to_states(occupied: Iterable[int], sector: ZeroMomentumBasis) -> np.ndarray:
    """Zero-momentum state for a matter occupation pattern.

    Collects every gauge completion, takes the union of their translation
    orbits, and returns the equal-weight superposition of all member
    configurations, expressed in the sector basis. Unit norm.
    """
    completions = gauge_completions(occupied, sector.length)
    orbit_ids = sorted(set(sector.orbit_of(c) for c in completions))
    amps = np.zeros(sector.size)
    # equal weight per configuration: sector amplitude sqrt(m_f) before normalisation
    for k in orbit_ids:
        amps[k] = math.sqrt(sector.multiplicities[k])
    return amps / np.linalg.norm(amps)


def config_to_string(config: int, length: int) -> str:
    """Printable form, site 1 leftmost."""
    return "".join(str(bit(config, s)) for s in range(1, length + 1))


def config_from_string(text: str) -> int:
    """Inverse of config_to_string."""
    if set(text) - {"0", "1"}:
        raise ValueError("configuration strings contain only 0 and 1")
    return sum(1 << i for i, ch in enumerate(text) if ch == "1")


def write_basis_file(basis: PhysicalBasis, path) -> None:
    """Export a basis, one configuration string per line, after a header."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# L={basis.length} dim={len(basis)}\n")
        for c in basis.configs:
            fh.write(config_to_string(int(c), basis.length) + "\n")
