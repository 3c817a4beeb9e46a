#!/usr/bin/env python3
"""Tour of the constrained configuration space.

Enumerates the gauge-invariant basis for a few chain lengths, checks the
closed-form dimension count, decomposes the space into two-site
translation orbits, and shows the blockade-string correspondence.
"""

from schwinger_qlm import (
    ZeroMomentumBasis,
    dimension_formula,
    enumerate_physical_basis,
    gauss_residual,
    pxp_to_qlm,
    qlm_to_pxp,
)
from schwinger_qlm.basis import config_to_string

print("=== enumeration ===")
for length in (4, 8, 12, 16, 40):
    basis = enumerate_physical_basis(length)
    formula = dimension_formula(length) if length >= 8 and (length // 2) % 2 == 0 else "-"
    print(f"L = {length:2d}: {len(basis):6d} physical configurations (closed form: {formula})")

length = 8
basis = enumerate_physical_basis(length)
print(f"\n=== the full basis at L = {length} ===")
for c in basis.configs:
    residuals = [gauss_residual(int(c), j, length) for j in range(1, length, 2)]
    gauge = qlm_to_pxp(int(c), length)
    print(f"{config_to_string(int(c), length)}  gauge string {''.join(map(str, gauge))}"
          f"  constraint residuals {residuals}")

print("\nThe all-up configuration is not physical:",
      [gauss_residual(0, j, length) for j in range(1, length, 2)])

print("\n=== blockade-string mapping ===")
for bits in ([0, 1, 0, 1], [1, 1, 1, 1], [1, 0, 1, 1]):
    cfg = pxp_to_qlm(bits)
    print(f"{bits} -> {config_to_string(cfg, 2 * len(bits))}")

print("\n=== translation orbits at L = 40 ===")
sector = ZeroMomentumBasis(enumerate_physical_basis(40))
mults = sector.multiplicities
print(f"{sector.size} orbits; multiplicity histogram:")
for m in sorted(set(mults)):
    print(f"  m = {m:2d}: {(mults == m).sum():4d} orbits")
print(f"sum of multiplicities = {mults.sum()} = full dimension")
