"""Command-line experiment runner.

Examples::

    ampsearch --command grover --N 1024 --out grover.csv
    ampsearch --command rs --n 10 --format json --out rs.json
    ampsearch --command sweep --N-range 10:20 --k-range 3:5 --jobs 4 --out sweep.csv

Exit status is 0 on success, 2 on a usage error and 1 when a checked bound
fails or the output cannot be written.  Output files contain no timing
information, so identical arguments give byte-identical files; the wall
clock is printed to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import grover, iterated, parallel_rs, perturbation, statevector

__all__ = ["ExperimentConfig", "RunReport", "build_parser", "main", "parse_config", "run"]

COMMANDS = ("grover", "rs", "is", "verify-appendix", "sweep", "crosscheck")
SWEEP_COLUMNS = (
    "N",
    "k",
    "seq_steps",
    "par_steps",
    "speedup",
    "peak_prob",
    "error_deficit",
    "p_par",
    "p_seq_bound",
    "ratio",
)
SPEEDUP_RANGE = (1.36, 1.46)
CROSSCHECK_TOL = 1e-12


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    sizes: tuple[int, ...]
    ks: tuple[int, ...] = ()
    steps: Optional[int] = None
    output_path: Optional[str] = None
    format: str = "csv"
    seed: int = 0
    jobs: int = 1

    def echo(self) -> dict:
        return {
            "command": self.command,
            "N": list(self.sizes),
            "k": list(self.ks),
            "steps": self.steps,
            "format": self.format,
            "seed": self.seed,
        }


@dataclass
class RunReport:
    config: ExperimentConfig
    columns: tuple[str, ...]
    records: list[dict]
    summary: dict
    flags: dict = field(default_factory=dict)
    duration: float = 0.0

    @property
    def ok(self) -> bool:
        return all(self.flags.values())

    def to_json(self) -> str:
        doc = {
            "config": self.config.echo(),
            "records": self.records,
            "summary": {**self.summary, "flags": self.flags},
        }
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(self.columns)
        for r in self.records:
            w.writerow(["" if r[c] is None else _fmt(r[c]) for c in self.columns])
        return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


# --------------------------------------------------------------------------
# argument handling


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ampsearch", description="Quantum search amplitude experiments.")
    p.add_argument("--command", required=True, choices=COMMANDS)
    size = p.add_mutually_exclusive_group()
    size.add_argument("--n", type=int, help="qubits per register (N = 2**n)")
    size.add_argument("--N", type=int, dest="size", help="search-space size, a power of two")
    size.add_argument("--N-range", dest="size_range", help="exponents LO:HI[:STEP] (inclusive) or a comma list of sizes")
    ks = p.add_mutually_exclusive_group()
    ks.add_argument("--k", type=int, help="number of oracles (is)")
    ks.add_argument("--k-range", dest="k_range", help="LO:HI (inclusive) or a comma list")
    p.add_argument("--steps", type=int, help="steps to record (default: optimal + 5)")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), help="default: from --out suffix, else csv")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized trials")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers for sweep")
    return p


def _parse_range(text: str, what: str) -> list[int]:
    try:
        if ":" in text:
            parts = [int(x) for x in text.split(":")]
            if len(parts) not in (2, 3) or (len(parts) == 3 and parts[2] <= 0):
                raise ValueError
            lo, hi = parts[0], parts[1]
            step = parts[2] if len(parts) == 3 else 1
            return list(range(lo, hi + 1, step))
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"cannot parse {what} {text!r}") from None


def _is_power_of_two(n: int) -> bool:
    return n >= 2 and not n & (n - 1)


_DEFAULT_SIZES = {
    "grover": (2**10,),
    "rs": (2**10,),
    "is": (2**20,),
    "verify-appendix": (2**16,),
    "crosscheck": (2**6,),
}


def parse_config(argv=None) -> ExperimentConfig:
    """Parse and validate arguments; :class:`UsageError` on invalid input."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.n is not None:
        if ns.n < 1 or ns.n > 30:
            raise UsageError("--n must lie in 1..30")
        sizes = [1 << ns.n]
    elif ns.size is not None:
        sizes = [ns.size]
    elif ns.size_range is not None:
        sizes = _parse_range(ns.size_range, "--N-range")
        if ":" in ns.size_range:
            if any(e < 1 or e > 40 for e in sizes):
                raise UsageError("--N-range exponents must lie in 1..40")
            sizes = [1 << e for e in sizes]
    elif ns.command == "sweep":
        raise UsageError("sweep needs --N-range")
    else:
        sizes = list(_DEFAULT_SIZES[ns.command])
    if not sizes:
        raise UsageError("empty N range")
    bad = [s for s in sizes if not _is_power_of_two(s)]
    if bad:
        raise UsageError(f"N must be a power of two, got {bad[0]}")
    if len(sizes) > 1 and ns.command != "sweep":
        raise UsageError(f"{ns.command} takes a single N")

    if ns.k is not None:
        ks = [ns.k]
    elif ns.k_range is not None:
        ks = _parse_range(ns.k_range, "--k-range")
        if not ks:
            raise UsageError("empty k range")
    else:
        ks = [2] if ns.command == "is" else []
    if ks and ns.command not in ("is", "sweep"):
        raise UsageError("--k applies only to is and sweep")
    if any(k < 2 for k in ks):
        raise UsageError("k must be >= 2")
    if ns.command == "is" and len(ks) != 1:
        raise UsageError("is takes a single k")

    if ns.steps is not None and ns.steps < 0:
        raise UsageError("--steps must be non-negative")
    if ns.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    fmt = ns.format
    if fmt is None:
        fmt = "json" if ns.out and ns.out.lower().endswith(".json") else "csv"
    return ExperimentConfig(
        command=ns.command,
        sizes=tuple(sizes),
        ks=tuple(ks),
        steps=ns.steps,
        output_path=ns.out,
        format=fmt,
        seed=ns.seed,
        jobs=ns.jobs,
    )


# --------------------------------------------------------------------------
# commands


def _complex_cells(prefix: str, z: complex) -> dict:
    return {f"{prefix}_re": float(z.real), f"{prefix}_im": float(z.imag)}


def _peak_summary(probs: np.ndarray) -> dict:
    peak = int(np.argmax(probs))
    return {
        "peak_step": peak,
        "peak_prob": float(probs[peak]),
        "error_deficit": float(1 - probs[peak]),
    }


def _run_grover(cfg: ExperimentConfig) -> RunReport:
    N = cfg.sizes[0]
    opt = grover.optimal_steps_simple(N)
    steps = opt + 5 if cfg.steps is None else cfg.steps
    tr = grover.grover_trace(N, steps)
    probs = tr.probabilities()
    records = [
        {"step": i, "b": float(tr["b"][i].real), "a": float(tr["a"][i].real), "prob_target": float(probs[i])}
        for i in range(len(tr))
    ]
    summary = {"N": N, "optimal_steps": opt, **_peak_summary(probs)}
    summary["error_bound"] = 10.0 / N
    flags = {"error_within_bound": summary["error_deficit"] <= summary["error_bound"]}
    return RunReport(cfg, ("step", "b", "a", "prob_target"), records, summary, flags)


_RS_COLUMNS = (
    "step", "b_re", "b_im", "a_re", "a_im", "alpha_re", "alpha_im", "beta_re", "beta_im", "prob_target",
)


def _run_rs(cfg: ExperimentConfig) -> RunReport:
    N = cfg.sizes[0]
    if N < 16:
        raise UsageError("rs needs N >= 16")
    opt = parallel_rs.optimal_steps_rs(N)
    steps = opt + 5 if cfg.steps is None else cfg.steps
    tr = parallel_rs.rs_trace(N, steps)
    probs = tr.probabilities()
    records = []
    for i in range(len(tr)):
        row = {"step": i}
        for name in ("b", "a", "alpha", "beta"):
            row.update(_complex_cells(name, tr[name][i]))
        row["prob_target"] = float(probs[i])
        records.append(row)
    summary = {"N": N, "optimal_steps": opt, **_peak_summary(probs)}
    summary["error_bound"] = parallel_rs.PEAK_DEFICIT_CONSTANT / math.sqrt(N)
    summary["speedup"] = parallel_rs.speedup(N)
    flags = {
        "error_within_bound": summary["error_deficit"] <= summary["error_bound"],
        "peak_near_optimal": abs(summary["peak_step"] - opt) <= 2,
    }
    return RunReport(cfg, _RS_COLUMNS, records, summary, flags)


def _run_is(cfg: ExperimentConfig) -> RunReport:
    N, k = cfg.sizes[0], cfg.ks[0]
    budget = math.isqrt(N)
    steps = budget + 5 if cfg.steps is None else cfg.steps
    try:
        tr = iterated.is_reduced_trace(k, N, steps)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    columns = ["step"]
    for j in range(k + 1):
        columns += [f"c{j}_re", f"c{j}_im"]
    columns.append("prob_target")
    probs = np.abs(tr.target) ** 2
    records = []
    for i in range(len(tr.times)):
        row = {"step": i}
        for j in range(k + 1):
            row.update(_complex_cells(f"c{j}", tr.exact[i, j]))
        row["prob_target"] = float(probs[i])
        records.append(row)
    bounds = np.array([iterated.amplitude_upper_bound(k, N, float(t)) for t in tr.times])
    sched = iterated.pairwise_is_schedule(k, N)
    summary = {
        "N": N,
        "k": k,
        **_peak_summary(probs),
        "rk4_gap": tr.max_method_gap(),
        "schedule_runs": sched.num_runs,
        "schedule_queries": sched.total_queries,
        "sequential_queries": sched.sequential_queries,
    }
    flags = {"amplitude_bound_holds": bool(np.all(np.abs(tr.target) <= bounds))}
    if k >= 3:
        cmp = iterated.compare_par_seq(k, N)
        summary.update(p_par=cmp.P_par, p_seq_bound=cmp.P_seq_bound, ratio=cmp.ratio, claimed_ratio=cmp.claimed_factor)
        flags["ratio_exceeds_claim"] = cmp.exceeds_claim
    return RunReport(cfg, tuple(columns), records, summary, flags)


def _run_verify_appendix(cfg: ExperimentConfig) -> RunReport:
    N = cfg.sizes[0]
    if N < 2**10:
        raise UsageError("verify-appendix needs N >= 2**10")
    records = []

    def add(check, value, bound, ok, gated=True):
        records.append({"check": check, "N": N, "value": float(value), "bound": float(bound), "ok": bool(ok), "gated": gated})

    l1 = perturbation.split_difference_report(N)
    add("difference_envelopes", l1.ratios.max(), 1.0, l1.all_ok)
    for mode in ("none", "exact", "majorant", "sampled"):
        r = perturbation.lemma2_power_structure(N, 10, mode, seed=cfg.seed)
        add(f"power_pattern_{mode}", r.tightest_prefactor, r.constant, r.holds, gated=mode == "none")
    residual = 0.0
    t = np.linspace(0.0, math.sqrt(N), int(20 * math.sqrt(N)) + 1)
    for phi in (lambda s: 0 * s, lambda s: 2 + 0 * s, lambda s: np.cos(3 * s) / N):
        residual = max(residual, perturbation.lemma3_beta_difference(phi, t).residual)
    add("beta_correction_residual", residual, 1e-8, residual <= 1e-8)
    for mode in ("exact", "sampled"):
        split = perturbation.rs_splitting(N, mode, seed=cfg.seed)
        d = perturbation.perturbation_deviation(N, split)
        add(f"deviation_{mode}", d.deviation, d.bound, d.ok)
    flags = {r["check"]: r["ok"] for r in records if r["gated"]}
    summary = {"N": N, "note": "verification by sampling on grids, not proof"}
    columns = ("check", "N", "value", "bound", "ok", "gated")
    return RunReport(cfg, columns, records, summary, flags)


def _sweep_row(task: tuple[int, Optional[int]]) -> dict:
    N, k = task
    rs = parallel_rs.theorem1_check(N)
    row = {
        "N": N,
        "k": 2 if k is None else k,
        "seq_steps": 2 * grover.optimal_steps_simple(N),
        "par_steps": rs.optimal_steps,
        "speedup": parallel_rs.speedup(N),
        "peak_prob": rs.peak_prob,
        "error_deficit": rs.deficit,
        "p_par": None,
        "p_seq_bound": None,
        "ratio": None,
    }
    if k is not None and k >= 3:
        cmp = iterated.compare_par_seq(k, N)
        row.update(p_par=cmp.P_par, p_seq_bound=cmp.P_seq_bound, ratio=cmp.ratio)
    return row


def _run_sweep(cfg: ExperimentConfig) -> RunReport:
    if any(N < 16 for N in cfg.sizes):
        raise UsageError("sweep needs N >= 16")
    ks = cfg.ks or (None,)
    tasks = [(N, k) for N in cfg.sizes for k in ks]
    for N, k in tasks:
        if k is not None and k > math.sqrt(N) / 8:
            raise UsageError(f"k={k} too large for N={N}: need k <= sqrt(N)/8")
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            records = list(pool.map(_sweep_row, tasks))
    else:
        records = [_sweep_row(t) for t in tasks]
    flags = {
        "speedup_in_range": all(SPEEDUP_RANGE[0] <= r["speedup"] <= SPEEDUP_RANGE[1] for r in records if r["N"] >= 2**10),
        "error_within_bound": all(r["error_deficit"] <= 10 / math.sqrt(r["N"]) for r in records),
    }
    if any(r["ratio"] is not None for r in records):
        flags["ratio_exceeds_claim"] = all(r["ratio"] > 4.0 ** r["k"] for r in records if r["ratio"] is not None)
    summary = {"rows": len(records)}
    return RunReport(cfg, SWEEP_COLUMNS, records, summary, flags)


def _run_crosscheck(cfg: ExperimentConfig) -> RunReport:
    N = cfg.sizes[0]
    n = N.bit_length() - 1
    if n > statevector.MAX_QUBITS[2]:
        raise UsageError(f"crosscheck needs n <= {statevector.MAX_QUBITS[2]}")
    rng = np.random.default_rng(cfg.seed)
    g_steps = grover.optimal_steps_simple(N) + 5 if cfg.steps is None else cfg.steps
    reduced_g = grover.grover_trace(N, g_steps).values
    records = []
    for e1 in rng.integers(0, N, size=3):
        tr = statevector.grover_full_run(statevector.SearchInstance(n, int(e1)), g_steps)
        dev = float(np.max(np.abs(tr.values - reduced_g)))
        records.append({"model": "grover", "e1": int(e1), "e2": None, "steps": g_steps, "max_deviation": dev})
    if N >= 4:
        r_steps = parallel_rs.optimal_steps_rs(N) + 5 if cfg.steps is None else cfg.steps
        reduced_r = parallel_rs.rs_trace(N, r_steps).values
        for e1, e2 in rng.integers(0, N, size=(3, 2)):
            tr = statevector.rs_full_run(statevector.SearchInstance(n, int(e1), int(e2)), r_steps)
            dev = float(np.max(np.abs(tr.values - reduced_r)))
            records.append({"model": "rs", "e1": int(e1), "e2": int(e2), "steps": r_steps, "max_deviation": dev})
    summary = {"N": N}
    flags = {}
    for model in ("grover", "rs"):
        devs = [r["max_deviation"] for r in records if r["model"] == model]
        if devs:
            summary[f"{model}_max_deviation"] = max(devs)
            flags[f"{model}_agrees"] = max(devs) <= CROSSCHECK_TOL
    return RunReport(cfg, ("model", "e1", "e2", "steps", "max_deviation"), records, summary, flags)


_RUNNERS = {
    "grover": _run_grover,
    "rs": _run_rs,
    "is": _run_is,
    "verify-appendix": _run_verify_appendix,
    "sweep": _run_sweep,
    "crosscheck": _run_crosscheck,
}


def run(cfg: ExperimentConfig) -> RunReport:
    """Execute one configuration and write its output file, if any."""
    start = time.perf_counter()
    report = _RUNNERS[cfg.command](cfg)
    report.duration = time.perf_counter() - start
    if cfg.output_path is not None:
        text = report.to_json() if cfg.format == "json" else report.to_csv()
        write_atomic(cfg.output_path, text)
    return report


def write_atomic(path: str, text: str) -> None:
    """Write through a temporary file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".ampsearch-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
        report = run(cfg)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"ampsearch: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"ampsearch: cannot write output: {exc}", file=sys.stderr)
        return 1
    if cfg.output_path is None:
        sys.stdout.write(report.to_json() if cfg.format == "json" else report.to_csv())
    else:
        print(json.dumps({**report.summary, "flags": report.flags}), file=sys.stderr)
    print(f"ampsearch: {cfg.command} finished in {report.duration:.2f}s", file=sys.stderr)
    if not report.ok:
        failed = ", ".join(k for k, v in report.flags.items() if not v)
        print(f"ampsearch: bound check failed: {failed}", file=sys.stderr)
        return 1
    return 0
