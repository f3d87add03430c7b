"""Admissibility and the inequality harness, on good and bad models.

Run from the repository root:

    python3 demos/model_checks.py
"""

from lattice_choquard import (
    ConstantPotential,
    LatticeSpec,
    ModelRejectedError,
    ModelSpec,
    SumOfPowers,
    make_context,
    run_all_checks,
    validate_model,
)


def main():
    good = ModelSpec(
        lattice=LatticeSpec(1, 8),
        p=2.0,
        alpha=0.5,
        potential=ConstantPotential(1.0),
        nonlinearity=SumOfPowers(((1.0, 4.0),)),
    )
    print("accepted model:")
    for v in validate_model(good).verdicts:
        print(f"  {v.name:22s} passed={v.passed}")

    # q = p sits below the superlinearity threshold and is rejected with
    # named failures rather than a generic error
    bad = ModelSpec(
        lattice=LatticeSpec(1, 8),
        p=2.0,
        alpha=0.5,
        potential=ConstantPotential(1.0),
        nonlinearity=SumOfPowers(((1.0, 2.0),)),
    )
    print("\nrejected model (quadratic term at p = 2):")
    try:
        validate_model(bad)
    except ModelRejectedError as err:
        for failure in err.failures:
            print(f"  {failure}")

    print("\ninequality harness on the accepted model:")
    ctx = make_context(good)
    for rep in run_all_checks(ctx, seed=0):
        status = "PASS" if rep.passed else "FAIL"
        print(f"  {status} {rep.name:14s} margin={rep.margin:+.3e} "
              f"samples={rep.n_samples}")


if __name__ == "__main__":
    main()
