"""Fiber maps: the constraint polynomial, projection, and the value functional.

Run from the repository root:

    python3 demos/fiber_projection.py
"""

import numpy as np

from lattice_choquard import (
    ConstantPotential,
    Field,
    LatticeSpec,
    ModelSpec,
    SumOfPowers,
    fiber_probe,
    h_norm,
    make_context,
    project_su,
    psi,
    random_field,
)


def main():
    model = ModelSpec(
        lattice=LatticeSpec(1, 5),
        p=2.0,
        alpha=0.5,
        potential=ConstantPotential(1.0),
        nonlinearity=SumOfPowers(((1.0, 4.0),)),
    )
    ctx = make_context(model)
    rng = np.random.default_rng(42)
    u = random_field(ctx.spec, rng)

    s_u, w = project_su(ctx, u)
    print(f"projection scale s_u = {s_u:.9f}")
    print(f"||m(u)|| = {h_norm(ctx, w):.6f}")

    print("\nfiber profile along the ray (phi changes sign at s_u):")
    grid = np.geomspace(s_u / 4.0, 4.0 * s_u, 13)
    probe = fiber_probe(ctx, u, grid)
    print(f"  {'s':>12s} {'J(su)':>14s} {'phi(s)':>14s}")
    for s, en, ph in zip(probe.s_values, probe.energies, probe.phi_values):
        marker = " <- maximum" if abs(s - s_u) == min(abs(grid - s_u)) else ""
        print(f"  {s:12.6f} {en:14.8f} {ph:+14.6f}{marker}")

    # psi is the fiber maximum seen from the unit sphere; it does not care
    # about the scale of the representative
    unit = Field(ctx.spec, u.values / h_norm(ctx, u))
    print(f"\npsi(u/||u||)   = {psi(ctx, unit):.10f}")
    print(f"J at projection = {probe.energies.max():.10f} (grid approximation)")


if __name__ == "__main__":
    main()
