"""Config-driven experiment runs, result records, and report emission.

A sweep builds one PerturbedMap per amplitude and runs the full battery of
estimators against it; every (amplitude, quantity) pair becomes one
append-only JSONL record stamped with the config hash and toolkit version.
Ladder points execute in a worker pool with per-point seeds derived as
seed XOR index, and records are emitted in ladder order regardless of
completion order, so reruns with the same config and seed are byte-identical
modulo wall time, at any thread count.
"""

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import canonical_json, config_hash
from .density import ueg_certificate
from .entropy import (
    EntropySchedule,
    estimate_topological_entropy,
    estimate_unstable_volume_growth,
    ruelle_upper_bound,
)
from .errors import TorusDynError
from .linear import IntegerAutomorphism, exact_entropy
from .perturbation import BumpField, PerturbedMap, c1_distance_estimate
from .sampling import derive_seed

SWEEP_QUANTITIES = (
    "c1_distance",
    "unstable_volume_growth",
    "topological_entropy",
    "ruelle_upper_bound",
    "ueg_certificate",
)


@dataclass(frozen=True)
class ResultRecord:
    experiment_id: str
    config_hash: str
    operation: str
    inputs: dict
    outputs: dict
    wall_time_s: float
    version: str = __version__

    def to_json_line(self):
        doc = {
            "experiment_id": self.experiment_id,
            "config_hash": self.config_hash,
            "operation": self.operation,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "wall_time_s": self.wall_time_s,
            "version": self.version,
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def write_records(records, path, append=True):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "a" if append else "w"
    with path.open(mode, encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_json_line() + "\n")
    return path


def load_records(path, expected_hash=None):
    """Reload records, optionally enforcing the config-hash tamper check."""
    out = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        doc = json.loads(line)
        if expected_hash is not None and doc["config_hash"] != expected_hash:
            raise TorusDynError(
                f"record hash {doc['config_hash'][:12]} != expected {expected_hash[:12]}")
        out.append(ResultRecord(
            experiment_id=doc["experiment_id"],
            config_hash=doc["config_hash"],
            operation=doc["operation"],
            inputs=doc["inputs"],
            outputs=doc["outputs"],
            wall_time_s=doc["wall_time_s"],
            version=doc["version"],
        ))
    return out


def build_field(config):
    bumps = config["bump_field"]["bumps"]
    return BumpField(
        centers=[b["center"] for b in bumps],
        radii=[b["radius"] for b in bumps],
        directions=[b["direction"] for b in bumps],
    )


def resolve_amplitudes(config, base, bump_field):
    """Amplitude ladder; a dict with negative stop tops out at |stop| x threshold."""
    ladder = config["amplitudes"]
    if isinstance(ladder, dict):
        from .perturbation import max_safe_amplitude

        fraction = abs(float(ladder["stop"]))
        stop = max_safe_amplitude(base, bump_field, fraction=fraction)
        count = int(ladder["count"])
        start = float(ladder["start"])
        step = (stop - start) / max(count - 1, 1)
        return [start + i * step for i in range(count)]
    return [float(t) for t in ladder]


def _entropy_schedule(config, seed):
    sched = config["schedules"]["entropy"]
    return EntropySchedule(
        n_values=tuple(sched["n_values"]),
        epsilons=tuple(sched["epsilons"]),
        grid_resolution=sched["grid_resolution"],
        max_candidates=sched["max_candidates"],
        fit_window=tuple(sched["fit_window"]),
        plateau_tol=sched["plateau_tol"],
        seed=seed,
    )


def _sweep_point(config, base, bump_field, amplitude, point_seed, h_ref):
    """All sweep quantities for one amplitude; failures recorded, not raised."""
    sched = config["schedules"]
    budget = config["budget"]
    outputs = {}
    # amplitude zero still runs through the perturbed code path so every
    # ladder point exercises identical machinery
    fmap = PerturbedMap(base, bump_field, amplitude)

    def run(name, fn):
        start = time.perf_counter()
        try:
            value = fn()
            flags = value.pop("_flags", "ok") if isinstance(value, dict) else "ok"
            outputs[name] = {"outputs": value, "flags": flags,
                             "wall_time_s": time.perf_counter() - start}
        except TorusDynError as exc:
            outputs[name] = {
                "outputs": {"error": f"{type(exc).__name__}: {exc}"},
                "flags": "failed",
                "wall_time_s": time.perf_counter() - start,
            }

    def _c1():
        est = c1_distance_estimate(fmap, base, sample_count=sched["c1"]["sample_count"],
                                   seed=point_seed)
        return {"value": est, "residual": None,
                "analytic_upper_bound": fmap.c1_upper_bound()}

    def _uvol():
        vg = sched["volume_growth"]
        curve = estimate_unstable_volume_growth(
            fmap, np.zeros(base.dimension), vg["delta"], vg["n_max"],
            eps_geom=vg["eps_geom"], fit_window=tuple(vg["fit_window"]),
            max_vertices=budget["max_vertices"])
        return {"value": curve.slope, "residual": curve.residual_rms,
                "curve": curve.to_dict()}

    def _htop():
        est = estimate_topological_entropy(fmap, _entropy_schedule(config, point_seed))
        return {"value": est.value, "residual": est.plateau_spread,
                "converged": est.converged, "estimate": est.to_dict(),
                "_flags": "ok" if est.converged else "non_converged"}

    def _ruelle():
        ru = sched["ruelle"]
        value = ruelle_upper_bound(fmap, n_power=ru["n_power"],
                                   sample_count=ru["sample_count"], seed=point_seed)
        return {"value": value, "residual": None}

    def _ueg():
        ug = sched["ueg"]
        cert = ueg_certificate(fmap, ug["rho"], ug["delta"], h_ref, ug["n_steps"],
                               basepoints=ug["basepoints"], eps_geom=ug["eps_geom"],
                               max_vertices=budget["max_vertices"], seed=point_seed)
        return {"value": float(cert.count), "residual": None, **cert.to_dict()}

    run("c1_distance", _c1)
    run("unstable_volume_growth", _uvol)
    run("topological_entropy", _htop)
    run("ruelle_upper_bound", _ruelle)
    run("ueg_certificate", _ueg)
    return outputs


def run_sweep(config):
    """Perturbation sweep over the amplitude ladder; returns ResultRecords.

    Per-amplitude quantities: C1 distance to the base, unstable volume growth,
    topological entropy, Ruelle upper bound, and the sampled-UEG certificate;
    one summary record reports the maximal chi_u deviation across the ladder.
    """
    base = IntegerAutomorphism(config["matrix"])
    bump_field = build_field(config)
    chash = config_hash(config)
    amplitudes = resolve_amplitudes(config, base, bump_field)
    h_ref = exact_entropy(base)
    seed = int(config["seed"])
    threads = int(config.get("threads", 1))

    def work(idx_t):
        idx, t = idx_t
        return idx, _sweep_point(config, base, bump_field, t,
                                 derive_seed(seed, idx), h_ref)

    items = list(enumerate(amplitudes))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = dict(pool.map(work, items))
    else:
        results = dict(map(work, items))

    records = []
    chi_values = {}
    for idx, t in items:
        for name in SWEEP_QUANTITIES:
            payload = results[idx][name]
            records.append(ResultRecord(
                experiment_id=config["experiment_id"],
                config_hash=chash,
                operation=name,
                inputs={"amplitude": t, "point_index": idx,
                        "seed": derive_seed(seed, idx)},
                outputs={"flags": payload["flags"], **payload["outputs"]},
                wall_time_s=payload["wall_time_s"],
            ))
            if name == "unstable_volume_growth" and payload["flags"] != "failed":
                chi_values[t] = payload["outputs"]["value"]

    summary = {"flags": "ok"}
    if chi_values and 0.0 in chi_values:
        base_chi = chi_values[0.0]
        summary["chi_u_base"] = base_chi
        summary["max_abs_chi_u_deviation"] = max(
            abs(v - base_chi) for v in chi_values.values())
    elif chi_values:
        vals = list(chi_values.values())
        summary["max_abs_chi_u_deviation"] = max(vals) - min(vals)
        summary["flags"] = "no_zero_amplitude"
    else:
        summary["flags"] = "failed"
    records.append(ResultRecord(
        experiment_id=config["experiment_id"],
        config_hash=chash,
        operation="sweep_summary",
        inputs={"amplitudes": [float(t) for t in amplitudes]},
        outputs=summary,
        wall_time_s=0.0,
    ))
    return records


# --- report emission ------------------------------------------------------------


CSV_COLUMNS = ("t", "quantity", "value", "residual", "flags", "wall_time_s")


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_report(records, out_dir, quantities=None, formats=("csv", "svg")):
    """CSV table plus one SVG line plot per quantity, deterministically ordered.

    The wall-time column is last so determinism checks can strip it. Summary
    records appear with an empty t cell.
    """
    if not records:
        raise ValueError("records must be non-empty")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if quantities is None:
        quantities = sorted({r.operation for r in records})
    rows = []
    for rec in records:
        if rec.operation not in quantities:
            continue
        t = rec.inputs.get("amplitude")
        value = rec.outputs.get("value")
        if rec.operation == "sweep_summary":
            value = rec.outputs.get("max_abs_chi_u_deviation")
        rows.append((
            t if t is not None else "",
            rec.operation,
            value,
            rec.outputs.get("residual"),
            rec.outputs.get("flags", "ok"),
            rec.wall_time_s,
        ))
    rows.sort(key=lambda r: (r[1], r[0] if r[0] != "" else float("inf")))
    written = []
    if "csv" in formats:
        csv_path = out_dir / "report.csv"
        lines = [",".join(CSV_COLUMNS)]
        for row in rows:
            lines.append(",".join(_csv_cell(v) for v in row))
        csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        written.append(csv_path)
    if "svg" in formats:
        import matplotlib

        matplotlib.use("Agg")
        matplotlib.rcParams["svg.hashsalt"] = "torusdyn"
        import matplotlib.pyplot as plt

        for quantity in quantities:
            pts = [(r[0], r[2]) for r in rows
                   if r[1] == quantity and r[0] != "" and r[2] is not None]
            if not pts:
                continue
            pts.sort()
            fig, ax = plt.subplots(figsize=(5, 3.2))
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o")
            ax.set_xlabel("amplitude t")
            ax.set_ylabel(quantity)
            ax.grid(True, alpha=0.3)
            fig.tight_layout()
            svg_path = out_dir / f"{quantity}.svg"
            fig.savefig(svg_path, format="svg", metadata={"Date": None})
            plt.close(fig)
            written.append(svg_path)
    return written
