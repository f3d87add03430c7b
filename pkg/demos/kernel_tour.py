"""Kernel quadrature: normalization, decay, and the convolution identity.

Run from the repository root:

    python3 demos/kernel_tour.py
"""

import numpy as np
from scipy.special import gamma

from lattice_choquard import (
    Field,
    LatticeSpec,
    build_table,
    convolve,
    fractional_degree,
    mu,
    riesz_kernel,
)


def main():
    print("symbol values: mu(0) =", mu((0.0,)), " mu(pi) =", mu((np.pi,)))

    # in one dimension the normalization constant has a closed form:
    # (1/2pi) int (2 - 2 cos k)^{alpha/2} dk = Gamma(1+alpha)/Gamma(1+alpha/2)^2
    print("\nnormalization constant vs closed form (dim 1):")
    for alpha in (0.25, 0.5, 1.0):
        exact = gamma(1.0 + alpha) / gamma(1.0 + alpha / 2.0) ** 2
        got = fractional_degree(1, alpha, 4096)
        print(f"  alpha={alpha:4.2f}: computed={got:.12f} exact={exact:.12f}")

    print("\nkernel decay along an axis (dim 2, alpha 1):")
    print("  t * R((t, 0)) is roughly constant once t >> 1:")
    for t in (2, 5, 10, 20, 30):
        val = riesz_kernel((t, 0), 2, 1.0, 512)
        print(f"  t={t:3d}: R={val:.6e}  t*R={t * val:.6f}")

    spec = LatticeSpec(1, 6)
    table = build_table(spec, 0.5)
    print(f"\ntable built: k_alpha={table.k_alpha:.9f}, "
          f"{table.values.size} entries over the difference range")

    # convolving a point mass reproduces the kernel itself
    conv = convolve(table, Field.delta(spec))
    print("convolution identity R * delta = R:")
    for d in (0, 2, 5):
        print(f"  d={d}: (R*delta)({d})={conv.value_at((d,)):.9f} "
              f"R({d})={table.value((d,)):.9f}")

    rng = np.random.default_rng(0)
    w = Field(spec, rng.standard_normal(spec.site_count))
    fast = convolve(table, w, method="fft").values
    slow = convolve(table, w, method="direct").values
    print(f"\nfast vs direct convolution, max abs diff: "
          f"{np.max(np.abs(fast - slow)):.3e}")


if __name__ == "__main__":
    main()
