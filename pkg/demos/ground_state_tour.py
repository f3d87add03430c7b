"""End-to-end tour: build a model, solve it, inspect the ground state.

Run from the repository root:

    python3 demos/ground_state_tour.py
"""

import numpy as np

from lattice_choquard import (
    ConstantPotential,
    LatticeSpec,
    ModelSpec,
    SumOfPowers,
    energy_J,
    fiber_max_golden,
    h_norm,
    make_context,
    minimize_ground_state,
    mountain_pass_level,
    validate_model,
)


def main():
    model = ModelSpec(
        lattice=LatticeSpec(1, 8),
        p=2.0,
        alpha=0.5,
        potential=ConstantPotential(1.0),
        nonlinearity=SumOfPowers(((1.0, 4.0),)),
    )
    report = validate_model(model)
    print("admissibility:")
    for v in report.verdicts:
        print(f"  {v.name:22s} passed={v.passed} margin={v.margin:.3g}")

    ctx = make_context(model)
    result = minimize_ground_state(ctx)
    u = result.u
    print(f"\nground-state level c = {result.energy:.12f}")
    print(f"iterations (winning start) = {result.iterations}")
    print(f"constraint residual  = {result.nehari_residual:.3e}")
    print(f"pointwise residual   = {result.pointwise_residual:.3e}")
    print(f"norm ||u*||          = {h_norm(ctx, u):.6f}")

    print("\nprofile (site : value):")
    for x, val in zip(ctx.spec.sites(), u.values):
        bar = "#" * int(40 * abs(val) / np.max(np.abs(u.values)))
        print(f"  {x[0]:+3d} : {val:+.6f} {bar}")

    # the solution is a fiber maximum along its own ray
    _, fiber_val = fiber_max_golden(ctx, u)
    print(f"\nmax_s J(s u*) = {fiber_val:.12f} (equals c)")

    mp = mountain_pass_level(ctx, u, n_dirs=200, seed=0)
    print(f"mountain-pass path level    = {mp.path_level:.12f}")
    print(f"min over random-ray maxima  = {mp.direction_min:.6f} (>= c)")
    print(f"ray becomes negative at t   = {mp.t_negative:.3g}")
    end = energy_J(ctx, type(u)(ctx.spec, mp.t_negative * u.values))
    print(f"J at the ray end            = {end:.3f} (< 0)")


if __name__ == "__main__":
    main()
