"""Command-line interface.

Every subcommand loads a JSON config, runs one operation (or the full sweep),
appends JSONL records into the output directory, and prints a one-line
summary.  Exit codes: 0 success, 2 invalid config, 3 resource cap exceeded,
4 numerical non-convergence under --strict.
"""

import argparse
import sys
import time

import numpy as np

from .config import config_hash, load_config
from .density import (
    bump_function,
    constant_observable,
    effective_density_profile,
    build_rectangle,
    minimal_hitting_time,
    mixing_decay_estimate,
    ueg_certificate,
)
from .entropy import (
    UnstableEntropySchedule,
    estimate_topological_entropy,
    estimate_unstable_entropy,
    estimate_unstable_volume_growth,
)
from .errors import (
    ConfigError,
    LeafBudgetError,
    NonConvergedError,
    ProbeBudgetError,
    TorusDynError,
)
from .experiments import (
    ResultRecord,
    build_field,
    emit_report,
    load_records,
    run_sweep,
    write_records,
    _entropy_schedule,
)
from .linear import IntegerAutomorphism, exact_entropy
from .perturbation import center_growth_profile

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RESOURCE = 3
EXIT_NONCONVERGED = 4


def _common_flags(parser):
    parser.add_argument("--config", required=True, help="path to JSON config")
    parser.add_argument("--out", default=None, help="output directory override")
    parser.add_argument("--seed", type=int, default=None, help="seed override")
    parser.add_argument("--threads", type=int, default=None, help="worker threads")
    parser.add_argument("--budget-vertices", type=int, default=None,
                        help="leaf vertex cap override")
    parser.add_argument("--strict", action="store_true",
                        help="turn non-converged flags into exit code 4")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="torusdyn",
        description="entropy and unstable-growth experiments for torus maps")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("classify", "spectral classification of the configured matrix"),
        ("entropy", "separated-set topological entropy estimate"),
        ("uentropy", "unstable topological entropy estimate"),
        ("uvol", "unstable volume growth estimate"),
        ("center-growth", "center cocycle growth classification"),
        ("density", "effective density profile of the unstable ball"),
        ("rect-hit", "minimal rectangle hitting time"),
        ("ueg-cert", "sampled uniform-exponential-growth certificate"),
        ("mixing", "empirical mixing decay estimate"),
        ("sweep", "full perturbation sweep over the amplitude ladder"),
        ("validate-config", "check a config against the schema"),
    ]:
        p = sub.add_parser(name, help=help_)
        _common_flags(p)
    rep = sub.add_parser("report", help="emit CSV and SVG plots from records")
    rep.add_argument("--records", required=True, help="JSONL records path")
    rep.add_argument("--out", required=True, help="report output directory")
    rep.add_argument("--quantities", default=None,
                     help="comma-separated quantity subset")
    return parser


def _apply_overrides(config, args):
    if args.out is not None:
        config["output_dir"] = args.out
    if args.seed is not None:
        config["seed"] = args.seed
    if args.threads is not None:
        config["threads"] = args.threads
    if args.budget_vertices is not None:
        config["budget"]["max_vertices"] = args.budget_vertices
    return config


def _observable(spec, dim):
    if spec["kind"] == "constant":
        return constant_observable(spec.get("value", 1.0), dim)
    return bump_function(spec["center"], spec["r"], spec["margin"])


def _single_record(config, operation, inputs, outputs, wall):
    return ResultRecord(
        experiment_id=config["experiment_id"],
        config_hash=config_hash(config),
        operation=operation,
        inputs=inputs,
        outputs=outputs,
        wall_time_s=wall,
    )


def _run_operation(command, config, strict):
    base = IntegerAutomorphism(config["matrix"])
    sched = config["schedules"]
    budget = config["budget"]
    seed = int(config["seed"])
    start = time.perf_counter()
    flags = "ok"

    if command == "classify":
        record = base.classification()
        outputs = {**record.to_dict(), "exact_entropy": exact_entropy(base)}
        inputs = {"matrix": config["matrix"]}
    elif command == "entropy":
        est = estimate_topological_entropy(base, _entropy_schedule(config, seed))
        flags = "ok" if est.converged else "non_converged"
        outputs = {"value": est.value, "flags": flags, **est.to_dict()}
        inputs = {"schedule": sched["entropy"]}
    elif command == "uentropy":
        ue = sched["unstable_entropy"]
        schedule = UnstableEntropySchedule(
            n_values=tuple(ue["n_values"]), epsilons=tuple(ue["epsilons"]),
            delta=ue["delta"], eps_geom=ue["eps_geom"],
            x_sample_count=ue["x_sample_count"], plateau_tol=ue["plateau_tol"],
            max_vertices=budget["max_vertices"], seed=seed)
        est = estimate_unstable_entropy(base, ue["x_sample_count"], ue["delta"],
                                        schedule)
        flags = "ok" if est.converged else "non_converged"
        outputs = {"value": est.value, "flags": flags, **est.to_dict()}
        inputs = {"schedule": ue}
    elif command == "uvol":
        vg = sched["volume_growth"]
        curve = estimate_unstable_volume_growth(
            base, np.zeros(base.dimension), vg["delta"], vg["n_max"],
            eps_geom=vg["eps_geom"], fit_window=tuple(vg["fit_window"]),
            max_vertices=budget["max_vertices"])
        outputs = {"value": curve.slope, "residual": curve.residual_rms,
                   "curve": curve.to_dict()}
        inputs = {"schedule": vg}
    elif command == "center-growth":
        cg = sched["center_growth"]
        result = center_growth_profile(base, cg["horizon"],
                                       sample_count=cg["sample_count"],
                                       rate_tol=cg["rate_tol"],
                                       bound=cg["bound"], seed=seed)
        outputs = {"verdict": result.verdict,
                   "fitted_constant": result.fitted_constant,
                   "fitted_rate": result.fitted_rate,
                   "max_growth": result.max_growth,
                   "curve": result.curve.to_dict() if result.curve else None}
        inputs = {"schedule": cg}
    elif command == "density":
        dn = sched["density"]
        tau = dn["tau"]
        if tau is None:
            tau = float(np.exp(exact_entropy(base)))
        curve = effective_density_profile(
            base, np.zeros(base.dimension), tau, dn["n_values"],
            probe_resolution=dn["probe_resolution"],
            fit_window=tuple(dn["fit_window"]),
            cell_budget=budget["max_probe_cells"],
            sample_budget=budget["max_leaf_samples"])
        outputs = {"value": curve.slope, "residual": curve.residual_rms,
                   "curve": curve.to_dict()}
        inputs = {"schedule": dn, "tau": tau}
    elif command == "rect-hit":
        rh = sched["rect_hit"]
        profile = center_growth_profile(base, sched["center_growth"]["horizon"],
                                        sample_count=1) \
            if base.splitting().dim_center else None
        rect = build_rectangle(base, rh["basepoint"], rh["n"], rh["eps"],
                               rh["delta"], profile=profile)
        k_min = minimal_hitting_time(base, rh["x"], rect, rh["k_max"],
                                     max_vertices=budget["max_vertices"])
        flags = "ok" if k_min is not None else "miss"
        outputs = {"value": k_min, "flags": flags,
                   "center_stable_radius": rect.center_stable_radius}
        inputs = {"schedule": rh}
    elif command == "ueg-cert":
        ug = sched["ueg"]
        cert = ueg_certificate(base, ug["rho"], ug["delta"], exact_entropy(base),
                               ug["n_steps"], basepoints=ug["basepoints"],
                               eps_geom=ug["eps_geom"],
                               max_vertices=budget["max_vertices"], seed=seed)
        flags = "ok" if cert.passed else "fail"
        outputs = {"value": float(cert.count), "flags": flags, **cert.to_dict()}
        inputs = {"schedule": ug}
    elif command == "mixing":
        mx = sched["mixing"]
        phi = _observable(mx["phi"], base.dimension)
        psi = _observable(mx["psi"], base.dimension)
        decay = mixing_decay_estimate(base, mx["basepoint"], mx["delta"], phi, psi,
                                      mx["n_values"], quad_h=mx["quad_h"],
                                      quad_g=mx["quad_g"])
        flags = "ok" if decay.verdict == "decay_fit" else "indeterminate"
        outputs = {"value": decay.alpha_fit, "residual": decay.residual_rms,
                   "flags": flags, **decay.to_dict()}
        inputs = {"schedule": mx}
    else:
        raise ConfigError(f"unknown command {command}")

    record = _single_record(config, command, inputs, outputs,
                            time.perf_counter() - start)
    if strict and flags in ("non_converged", "indeterminate"):
        raise NonConvergedError(f"{command}: flagged {flags} under --strict")
    return [record]


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "report":
            records = load_records(args.records)
            quantities = args.quantities.split(",") if args.quantities else None
            written = emit_report(records, args.out, quantities=quantities)
            print(f"report: wrote {len(written)} files to {args.out}")
            return EXIT_OK

        config = load_config(args.config)
        config = _apply_overrides(config, args)
        if args.command == "validate-config":
            print(f"config ok: hash {config_hash(config)[:16]}")
            return EXIT_OK
        if args.command == "sweep":
            records = run_sweep(config)
            if args.strict and any(r.outputs.get("flags") == "failed"
                                   for r in records):
                raise NonConvergedError("sweep: failed points under --strict")
        else:
            records = _run_operation(args.command, config, args.strict)
        out_dir = config["output_dir"]
        path = write_records(records, f"{out_dir}/results.jsonl")
        head = records[0]
        print(f"{args.command}: {len(records)} record(s) -> {path} "
              f"(hash {head.config_hash[:16]})")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (LeafBudgetError, ProbeBudgetError) as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except NonConvergedError as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except TorusDynError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
