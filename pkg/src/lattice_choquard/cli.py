"""Command-line front end: config parsing, run orchestration, artifacts.

Configs are JSON.  A minimal solve config:

    {
      "dim": 1, "radius": 8, "p": 2, "alpha": 0.5,
      "potential": {"kind": "constant", "value": 1.0},
      "nonlinearity": {"terms": [[1.0, 4.0]]}
    }

Parsing collects every structural error before failing; model admissibility
is delegated to the hypothesis checker.  Exit codes: 0 success, 1 usage or
configuration error, 2 model rejection (including failed checks), 3
nonconvergence.
"""

from __future__ import annotations

import argparse
import copy
import json
import logging
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from .energy import make_context
from .kernel import build_table
from .lattice import DomainError, LatticeSpec, read_field_csv, write_field_csv
from .model import (
    CoercivePotential,
    ConstantPotential,
    ModelRejectedError,
    ModelSpec,
    ModelViolationError,
    PeriodicPotential,
    SumOfPowers,
    potential_period,
    validate_model,
)
from .nehari import fiber_probe, project_su
from .solver import (
    NonconvergenceError,
    SolverConfig,
    center_normalize,
    minimize_ground_state,
)
from .verify import run_all_checks, write_checks_json

__all__ = ["ConfigError", "RunConfig", "parse_config", "run", "main"]

logger = logging.getLogger(__name__)

_TOP_KEYS = {
    "dim",
    "radius",
    "p",
    "alpha",
    "quad_points",
    "transform_order",
    "cache_dir",
    "seed",
    "potential",
    "nonlinearity",
    "solver",
}
_POTENTIAL_KEYS = {
    "constant": {"kind", "value"},
    "periodic": {"kind", "period", "cell"},
    "coercive": {"kind", "floor", "scale", "exponent", "center"},
}
_SOLVER_KEYS = {
    "max_iters",
    "grad_tol",
    "energy_tol",
    "step0",
    "backtrack_factor",
    "sufficient_decrease",
    "n_starts",
    "seed",
}


class ConfigError(ValueError):
    """Structural configuration problems, all collected before raising."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid configuration: " + "; ".join(self.errors))


@dataclass(frozen=True)
class RunConfig:
    """Validated run description: model, solver knobs, kernel knobs, seed."""

    model: ModelSpec
    solver: SolverConfig
    quad_points: int | None
    transform_order: int | None
    cache_dir: str | None
    seed: int
    raw: dict


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _structural_errors(data) -> list[str]:
    errors: list[str] = []
    if not isinstance(data, dict):
        return ["config root must be an object"]
    for key in sorted(set(data) - _TOP_KEYS):
        errors.append(f"unknown key '{key}'")
    for key in ("dim", "radius"):
        if key not in data:
            errors.append(f"missing required key '{key}'")
        elif not _is_int(data[key]) or data[key] < 1:
            errors.append(f"'{key}' must be a positive integer")
    for key in ("p", "alpha"):
        if key not in data:
            errors.append(f"missing required key '{key}'")
        elif not _is_num(data[key]):
            errors.append(f"'{key}' must be a number")
    for key in ("quad_points", "transform_order", "seed"):
        if key in data and not _is_int(data[key]):
            errors.append(f"'{key}' must be an integer")
    if "cache_dir" in data and not isinstance(data["cache_dir"], str):
        errors.append("'cache_dir' must be a string")

    pot = data.get("potential")
    if pot is None:
        errors.append("missing required key 'potential'")
    elif not isinstance(pot, dict) or "kind" not in pot:
        errors.append("'potential' must be an object with a 'kind'")
    elif pot["kind"] not in _POTENTIAL_KEYS:
        errors.append(
            "'potential.kind' must be one of: " + ", ".join(sorted(_POTENTIAL_KEYS))
        )
    else:
        allowed = _POTENTIAL_KEYS[pot["kind"]]
        for key in sorted(set(pot) - allowed):
            errors.append(f"unknown key 'potential.{key}'")

    nl = data.get("nonlinearity")
    if nl is None:
        errors.append("missing required key 'nonlinearity'")
    elif not isinstance(nl, dict):
        errors.append("'nonlinearity' must be an object")
    else:
        for key in sorted(set(nl) - {"terms"}):
            errors.append(f"unknown key 'nonlinearity.{key}'")
        terms = nl.get("terms")
        if (
            not isinstance(terms, list)
            or not terms
            or not all(
                isinstance(t, list) and len(t) == 2 and all(_is_num(v) for v in t)
                for t in terms
            )
        ):
            errors.append(
                "'nonlinearity.terms' must be a nonempty list of [amplitude, "
                "exponent] pairs"
            )

    sol = data.get("solver", {})
    if not isinstance(sol, dict):
        errors.append("'solver' must be an object")
    else:
        for key in sorted(set(sol) - _SOLVER_KEYS):
            errors.append(f"unknown key 'solver.{key}'")
        for key in ("max_iters", "n_starts", "seed"):
            if key in sol and not _is_int(sol[key]):
                errors.append(f"'solver.{key}' must be an integer")
        for key in _SOLVER_KEYS - {"max_iters", "n_starts", "seed"}:
            if key in sol and not _is_num(sol[key]):
                errors.append(f"'solver.{key}' must be a number")
    return errors


def _build_potential(pot: dict, dim: int):
    kind = pot["kind"]
    if kind == "constant":
        return ConstantPotential(value=float(pot.get("value", 1.0)))
    if kind == "periodic":
        if "period" not in pot or "cell" not in pot:
            raise ValueError("periodic potential requires 'period' and 'cell'")
        cell = np.asarray(pot["cell"], dtype=float)
        if cell.ndim != dim:
            cell = cell.reshape((int(pot["period"]),) * dim)
        return PeriodicPotential(period=int(pot["period"]), cell=cell)
    center = tuple(int(c) for c in pot.get("center", (0,) * dim))
    return CoercivePotential(
        floor=float(pot.get("floor", 1.0)),
        center=center,
        scale=float(pot.get("scale", 1.0)),
        exponent=float(pot.get("exponent", 1.0)),
    )


def _config_from_data(data: dict) -> RunConfig:
    errors = _structural_errors(data)
    if errors:
        raise ConfigError(errors)

    model_errors: list[str] = []
    lattice = LatticeSpec(dim=data["dim"], radius=data["radius"])
    potential = None
    nonlinearity = None
    try:
        potential = _build_potential(data["potential"], data["dim"])
    except ValueError as exc:
        model_errors.append(str(exc))
    try:
        nonlinearity = SumOfPowers(
            terms=tuple((t[0], t[1]) for t in data["nonlinearity"]["terms"])
        )
    except ValueError as exc:
        model_errors.append(str(exc))
    model = None
    if not model_errors:
        try:
            model = ModelSpec(
                lattice=lattice,
                p=float(data["p"]),
                alpha=float(data["alpha"]),
                potential=potential,
                nonlinearity=nonlinearity,
            )
        except ValueError as exc:
            model_errors.append(str(exc))
    if model_errors:
        raise ModelRejectedError(model_errors)
    validate_model(model)

    seed = int(data.get("seed", 0))
    sol = dict(data.get("solver", {}))
    sol.setdefault("seed", seed)
    solver = SolverConfig(**sol)
    return RunConfig(
        model=model,
        solver=solver,
        quad_points=data.get("quad_points"),
        transform_order=data.get("transform_order"),
        cache_dir=data.get("cache_dir"),
        seed=seed,
        raw=copy.deepcopy(data),
    )


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON config, collecting all structural errors."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config is not valid JSON: {exc}"]) from exc
    return _config_from_data(data)


def _apply_overrides(data: dict, args) -> dict:
    data = copy.deepcopy(data)
    if getattr(args, "seed", None) is not None:
        data["seed"] = args.seed
        data.setdefault("solver", {})
        if isinstance(data["solver"], dict):
            data["solver"]["seed"] = args.seed
    if getattr(args, "quad_points", None) is not None:
        data["quad_points"] = args.quad_points
    if getattr(args, "radius", None) is not None:
        data["radius"] = args.radius
    return data


def _set_dotted(data: dict, key: str, value) -> None:
    parts = key.split(".")
    node = data
    for part in parts[:-1]:
        nxt = node.get(part)
        if not isinstance(nxt, dict):
            nxt = {}
            node[part] = nxt
        node = nxt
    node[parts[-1]] = value


def _json_dump(payload: dict, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _make_ctx(cfg: RunConfig):
    return make_context(
        cfg.model,
        quad_points=cfg.quad_points,
        transform_order=cfg.transform_order,
        cache_dir=cfg.cache_dir,
    )


def _cmd_solve(cfg: RunConfig, out_dir: str, threads: int) -> int:
    t0 = time.perf_counter()
    ctx = _make_ctx(cfg)
    report = minimize_ground_state(ctx, cfg.solver, threads=threads)
    u_out = report.u
    if potential_period(cfg.model.potential) is not None:
        u_out = center_normalize(ctx, report.u)
    wall = time.perf_counter() - t0

    payload = report.scalars()
    payload["config"] = cfg.raw
    payload["wall_time_s"] = wall
    _json_dump(payload, os.path.join(out_dir, "report.json"))
    write_field_csv(u_out, os.path.join(out_dir, "solution.csv"))
    with open(os.path.join(out_dir, "trace.csv"), "w") as fh:
        fh.write("iter,psi,residual\n")
        for i, (ps, rs) in enumerate(
            zip(report.psi_history, report.residual_history)
        ):
            fh.write(f"{i},{ps!r},{rs!r}\n")
    print(
        f"c={report.energy:.12g} nehari_residual={report.nehari_residual:.3e} "
        f"pointwise_residual={report.pointwise_residual:.3e} "
        f"iterations={report.iterations} wall={wall:.2f}s"
    )
    return 0


def _cmd_sweep(cfg: RunConfig, out_dir: str, threads: int, key: str, values) -> int:
    t0 = time.perf_counter()
    rows = []
    for value in values:
        data = copy.deepcopy(cfg.raw)
        _set_dotted(data, key, value)
        run_cfg = _config_from_data(data)
        ctx = _make_ctx(run_cfg)
        report = minimize_ground_state(ctx, run_cfg.solver, threads=threads)
        rows.append(
            (
                value,
                report.energy,
                report.nehari_residual,
                report.pointwise_residual,
                report.iterations,
            )
        )
    path = os.path.join(out_dir, "sweep.csv")
    with open(path, "w") as fh:
        fh.write("value,c,nehari_residual,pointwise_residual,iterations\n")
        for value, c, nr, pr, iters in rows:
            fh.write(f"{value},{c!r},{nr!r},{pr!r},{iters}\n")
    wall = time.perf_counter() - t0
    print(f"sweep over {key}: {len(rows)} runs, wall={wall:.2f}s -> {path}")
    return 0


def _cmd_kernel(cfg: RunConfig, out_dir: str) -> int:
    t0 = time.perf_counter()
    table = build_table(
        cfg.model.lattice,
        cfg.model.alpha,
        quad_points=cfg.quad_points,
        **(
            {"transform_order": cfg.transform_order}
            if cfg.transform_order is not None
            else {}
        ),
        cache_dir=cfg.cache_dir,
    )
    path = os.path.join(out_dir, "kernel.csv")
    table.write_csv(path)
    wall = time.perf_counter() - t0
    print(
        f"k_alpha={table.k_alpha!r} entries={table.values.size} "
        f"wall={wall:.2f}s -> {path}"
    )
    return 0


def _cmd_fiber(cfg: RunConfig, out_dir: str, field_path: str) -> int:
    u = read_field_csv(field_path)
    if u.spec != cfg.model.lattice:
        raise DomainError(
            "field file lattice (dim "
            f"{u.spec.dim}, radius {u.spec.radius}) does not match the config"
        )
    ctx = _make_ctx(cfg)
    s_u, _ = project_su(ctx, u)
    grid = np.geomspace(s_u / 4.0, 4.0 * s_u, 81)
    probe = fiber_probe(ctx, u, grid)
    path = os.path.join(out_dir, "fiber.csv")
    with open(path, "w") as fh:
        fh.write("s,energy,phi\n")
        for s, e, ph in zip(probe.s_values, probe.energies, probe.phi_values):
            fh.write(f"{float(s)!r},{float(e)!r},{float(ph)!r}\n")
    print(f"s_u={s_u!r} -> {path}")
    return 0


def _cmd_check(cfg: RunConfig, out_dir: str) -> int:
    ctx = _make_ctx(cfg)
    reports = run_all_checks(ctx, seed=cfg.seed)
    write_checks_json(reports, os.path.join(out_dir, "checks.json"))
    for rep in reports:
        status = "PASS" if rep.passed else "FAIL"
        line = f"{status} {rep.name}: margin={rep.margin:.3e} n={rep.n_samples}"
        if rep.detail:
            line += f" ({rep.detail})"
        print(line)
    failed = [rep.name for rep in reports if not rep.passed]
    if failed:
        print(f"{len(failed)} of {len(reports)} checks failed: " + ", ".join(failed))
        return 2
    print(f"all {len(reports)} checks passed")
    return 0


def run(subcommand: str, cfg: RunConfig, out_dir: str = ".", **options) -> int:
    """Dispatch one subcommand against a validated config.

    Accepts `threads` (solve, sweep), `key` and `values` (sweep), and
    `field_path` (fiber).  Creates the output directory when missing.
    """
    os.makedirs(out_dir, exist_ok=True)
    threads = options.get("threads") or 1
    if subcommand == "solve":
        return _cmd_solve(cfg, out_dir, threads)
    if subcommand == "sweep":
        key = options.get("key")
        values = options.get("values")
        if not key or not values:
            raise ValueError("sweep requires --key and --values")
        return _cmd_sweep(cfg, out_dir, threads, key, values)
    if subcommand == "kernel":
        return _cmd_kernel(cfg, out_dir)
    if subcommand == "fiber":
        field_path = options.get("field_path")
        if not field_path:
            raise ValueError("fiber requires --field")
        return _cmd_fiber(cfg, out_dir, field_path)
    if subcommand == "check":
        return _cmd_check(cfg, out_dir)
    raise ValueError(f"unknown subcommand '{subcommand}'")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; route that to our own
    # usage handling so exit code 2 stays reserved for model rejection
    def error(self, message):
        raise _UsageError(message)


def _parse_values(text: str) -> list:
    values = []
    for token in text.split(","):
        token = token.strip()
        try:
            values.append(json.loads(token))
        except json.JSONDecodeError:
            values.append(token)
    return values


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="lattice-choquard",
        description="Ground states of a nonlocal lattice field equation.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, desc in (
        ("solve", "run the ground-state search"),
        ("sweep", "re-solve while varying one config key"),
        ("kernel", "build and dump the convolution kernel table"),
        ("fiber", "dump the fiber maps for a stored field"),
        ("check", "run the verification harness"),
    ):
        p = sub.add_parser(name, description=desc, help=desc)
        p.add_argument("--config", required=True, help="path to a JSON config")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override seed")
        p.add_argument(
            "--threads",
            type=int,
            default=os.cpu_count() or 1,
            help="parallel starts/checks bound",
        )
        p.add_argument(
            "--quad-points", type=int, default=None, help="override quad_points"
        )
        p.add_argument("--radius", type=int, default=None, help="override radius")
        p.add_argument("--verbose", action="store_true", help="log progress")
        if name == "sweep":
            p.add_argument("--key", required=True, help="dotted config key to vary")
            p.add_argument(
                "--values", required=True, help="comma-separated values for the key"
            )
        if name == "fiber":
            p.add_argument("--field", required=True, help="field CSV to probe")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1

    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        text = open(args.config).read()
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 1

    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        print(f"invalid configuration: config is not valid JSON: {exc}", file=sys.stderr)
        return 1

    try:
        data = _apply_overrides(data, args)
        cfg = _config_from_data(data)
        options = {"threads": args.threads}
        if args.subcommand == "sweep":
            options["key"] = args.key
            options["values"] = _parse_values(args.values)
        if args.subcommand == "fiber":
            options["field_path"] = args.field
        return run(args.subcommand, cfg, out_dir=args.out, **options)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return 1
    except ModelRejectedError as exc:
        for failure in exc.failures:
            print(f"model rejected: {failure}", file=sys.stderr)
        return 2
    except ModelViolationError as exc:
        print(f"model violation: {exc}", file=sys.stderr)
        return 2
    except NonconvergenceError as exc:
        print(f"nonconvergence: {exc}", file=sys.stderr)
        return 3
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
