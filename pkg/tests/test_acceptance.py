"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every criterion prints one ``PASS``/``FAIL`` line; pytest also repeats the
lines in its terminal summary.  Run directly with
``python tests/test_acceptance.py`` for the lines alone.
"""

import math
import time

import numpy as np
import pytest

from ampsearch import perturbation
from ampsearch.grover import grover_trace, optimal_steps_simple
from ampsearch.iterated import amplitude_upper_bound, compare_par_seq, jacobi_matrix, solve_jacobi
from ampsearch.numerics import cubic_roots, mat_exp, tridiag_toeplitz_eigenvalues
from ampsearch.parallel_rs import (
    LIMIT_MATRIX,
    d_matrix,
    optimal_steps_rs,
    rs_closed_form_deviation,
    rs_trace,
    theorem1_check,
)
from ampsearch.statevector import SearchInstance, grover_full_run, rs_full_run

SEED = 20240601


def evaluate(number, title, check, budget):
    start = time.perf_counter()
    ok, detail = check()
    elapsed = time.perf_counter() - start
    passed = bool(ok) and elapsed < budget
    status = "PASS" if passed else "FAIL"
    timing = f"{elapsed:.2f}s of {budget:g}s"
    return passed, f"C{number:02d} {status}  {title}: {detail} [{timing}]"


def record(log, number, title, check, budget):
    passed, line = evaluate(number, title, check, budget)
    print(line)
    log.append(line)
    assert passed, line


# --------------------------------------------------------------------------


def c1_grover_step_count():
    worst = 0
    for n in range(4, 21):
        N = 2**n
        opt = optimal_steps_simple(N)
        worst = max(worst, abs(grover_trace(N, opt + 5).peak_step() - opt))
    return worst <= 1, f"max |peak - floor(pi sqrt(N)/4)| = {worst} over N = 2^4..2^20 (allowed 1)"


def c2_grover_error():
    worst = 0.0
    for n in range(4, 21):
        N = 2**n
        opt = optimal_steps_simple(N)
        deficit = 1 - abs(grover_trace(N, opt).b[opt]) ** 2
        worst = max(worst, deficit * N)
    return worst <= 10, f"max N (1 - |b|^2) at the optimal step = {worst:.3f} (allowed 10)"


def c3_grover_oracle_equivalence():
    rng = np.random.default_rng(SEED)
    worst, runs = 0.0, 0
    for n in range(2, 9):
        N = 2**n
        steps = optimal_steps_simple(N) + 5
        ref = grover_trace(N, steps).values
        for e1 in rng.choice(N, size=min(3, N), replace=False):
            tr = grover_full_run(SearchInstance(n, int(e1)), steps)
            worst = max(worst, float(np.max(np.abs(tr.values - ref))))
            runs += 1
    return worst <= 1e-12 and runs >= 20, f"max per-step gap {worst:.1e} over {runs} placements, n = 2..8"


def c4_two_oracle_peak():
    parts, ok = [], True
    for N in (2**10, 2**14, 2**18):
        r = theorem1_check(N)
        ok &= abs(r.peak_step - r.optimal_steps) <= 2 and r.deficit <= 10 / math.sqrt(N)
        parts.append(f"N=2^{N.bit_length() - 1}: peak {r.peak_step}/{r.optimal_steps}, sqrt(N) deficit {r.deficit * math.sqrt(N):.3f}")
    return ok, "; ".join(parts)


def c5_rs_oracle_equivalence():
    rng = np.random.default_rng(SEED + 1)
    worst, runs = 0.0, 0
    for n in range(2, 9):
        N = 2**n
        steps = optimal_steps_rs(N) + 5
        ref = rs_trace(N, steps).values
        for e1, e2 in rng.integers(0, N, size=(2, 2)):
            tr = rs_full_run(SearchInstance(n, int(e1), int(e2)), steps)
            worst = max(worst, float(np.max(np.abs(tr.values - ref))))
            runs += 1
    return worst <= 1e-12 and runs >= 10, f"max per-step gap {worst:.1e} over {runs} placements, n = 2..8"


def c6_speedup():
    sizes = np.arange(2**10, 2**22 + 1, dtype=np.float64)
    seq = 2 * np.floor(np.pi * np.sqrt(sizes) / 4)
    par = np.floor(np.pi * np.sqrt(sizes) / (2 * np.sqrt(2)))
    ratio = seq / par
    big = [2.0**e for e in range(22, 61)]
    tail = [2 * optimal_steps_simple(N) / optimal_steps_rs(N) for N in map(int, big)]
    lo, hi = min(ratio.min(), min(tail)), max(ratio.max(), max(tail))
    return 1.36 <= lo and hi <= 1.46, f"ratio in [{lo:.4f}, {hi:.4f}] for every N in [2^10, 2^22] and powers of two to 2^60"


def c7_closed_form():
    scaled = [rs_closed_form_deviation(N) * math.sqrt(N) for N in (2**12, 2**16, 2**20)]
    ok = max(scaled) <= 10 and max(scaled) / min(scaled) < 4
    return ok, "sqrt(N) dev = " + ", ".join(f"{s:.3f}" for s in scaled) + " at N = 2^12, 2^16, 2^20"


def c8_spectra():
    worst_root = 0.0
    for n in range(10, 21):
        N = 2**n
        target = 2 * math.sqrt(2) / math.sqrt(N)
        roots = cubic_roots(0, 8 / N, -16 / N**2)
        osc = sorted((z for z in roots if abs(z.imag) > target / 2), key=lambda z: z.imag)
        if len(osc) != 2:
            return False, f"expected two oscillating roots at N={N}"
        worst_root = max(worst_root, abs(osc[0] + 1j * target) * N, abs(osc[1] - 1j * target) * N)
    worst_eig = 0.0
    for N in (2**10, 2**16, 2**20):
        for k in range(1, 7):
            ref = -(4j / math.sqrt(N)) * np.cos(np.arange(1, k + 2) * math.pi / (k + 2))
            m = np.diag([2.0] * k, 1) + np.diag([-2.0 / N] * k, -1)
            for vals in (tridiag_toeplitz_eigenvalues(-2 / N, 2, k + 1), np.linalg.eigvals(m)):
                gap = max(np.min(np.abs(vals - r)) for r in ref)
                gap = max(gap, max(np.min(np.abs(ref - v)) for v in vals))
                worst_eig = max(worst_eig, gap)
    ok = worst_root <= 10 and worst_eig <= 1e-12
    return ok, f"max N |root - (+/-2 sqrt2 i/sqrt N)| = {worst_root:.3f} (allowed 10); eigenvalue gap {worst_eig:.1e}"


def c9_paired_algebra():
    d = d_matrix()
    cube = float(np.max(np.abs(d @ d @ d - d)))
    out = mat_exp(1j * math.pi * d)
    series = float(np.max(np.abs(out - (np.eye(3) - 2 * d @ d))))
    limit = float(np.max(np.abs(out - LIMIT_MATRIX)))
    applied = float(np.max(np.abs(out @ [0, 0, 1] - [1, 0, 0])))
    ok = cube <= 1e-12 and series <= 1e-10 and limit <= 1e-10 and applied <= 1e-10
    return ok, f"|D^3-D| {cube:.1e}, |exp-(I-2D^2)| {series:.1e}, |exp-limit| {limit:.1e}, |exp e3 - e1| {applied:.1e}"


def c10_upper_bound():
    N = 2**20
    t = np.arange(0, 1025, dtype=float)
    parts, ok = [], True
    for k in range(2, 6):
        a = solve_jacobi(jacobi_matrix(k, N), t)[:, 0]
        bound = np.array([amplitude_upper_bound(k, N, s) for s in t])
        bad = t[np.abs(a) > bound * (1 + 1e-12)]
        ok &= bad.size == 0
        span = f"t in [{bad.min():g}, {bad.max():g}]" if bad.size else "none"
        parts.append(f"k={k}: {bad.size} violations ({span})")
    return ok, "; ".join(parts)


def c11_budget():
    parts, ok = [], True
    for k in (3, 4, 5):
        r = compare_par_seq(k, 2**20)
        ok &= r.ratio > 4.0**k
        parts.append(f"k={k}: ratio {r.ratio:.2f} vs 2^{2 * k}={4 ** k}")
    return ok, "; ".join(parts)


def c12_perturbation():
    parts, ok = [], True
    for N in (2**10, 2**16):
        r = perturbation.lemma2_power_structure(N, 10)
        ok &= r.holds
        parts.append(f"powers N=2^{N.bit_length() - 1} prefactor {r.tightest_prefactor:.2f}<=10")
    t = np.linspace(0, 256, 256 * 20 + 1)
    residual = max(
        perturbation.lemma3_beta_difference(phi, t).residual
        for phi in (lambda s: 0 * s, lambda s: 2 + 0 * s, lambda s: np.cos(0.7 * s), lambda s: s / (1 + s))
    )
    ok &= residual <= 1e-8
    parts.append(f"beta residual {residual:.1e}")
    rep = perturbation.split_difference_report(2**16, iters=6)
    ok &= rep.all_ok
    parts.append(f"envelopes worst ratio {rep.ratios.max():.3f}")
    for N in (2**12, 2**16, 2**20):
        d = perturbation.perturbation_deviation(N)
        ok &= d.ok
        parts.append(f"dev N=2^{N.bit_length() - 1} {d.scaled:.2f}/sqrt(N)")
    return ok, "; ".join(parts)


CRITERIA = [
    (1, "Grover step count", c1_grover_step_count, 1.0),
    (2, "Grover error", c2_grover_error, 1.0),
    (3, "oracle equivalence (simple)", c3_grover_oracle_equivalence, 10.0),
    (4, "two-oracle step count and error", c4_two_oracle_peak, 5.0),
    (5, "oracle equivalence (two-oracle)", c5_rs_oracle_equivalence, 60.0),
    (6, "sqrt(2) speedup", c6_speedup, 1.0),
    (7, "closed-form deviation", c7_closed_form, 5.0),
    (8, "spectral checks", c8_spectra, 1.0),
    (9, "paired-step algebra", c9_paired_algebra, 1.0),
    (10, "k-oracle amplitude upper bound", c10_upper_bound, 10.0),
    (11, "fixed-budget comparison", c11_budget, 10.0),
    (12, "perturbation properties", c12_perturbation, 60.0),
]


@pytest.mark.parametrize("number,title,check,budget", CRITERIA, ids=[f"C{c[0]:02d}" for c in CRITERIA])
def test_criterion(acceptance_log, number, title, check, budget):
    record(acceptance_log, number, title, check, budget)


if __name__ == "__main__":
    results = [evaluate(*c) for c in CRITERIA]
    for _, line in results:
        print(line)
    raise SystemExit(0 if all(p for p, _ in results) else 1)
