"""
Acceptance suite.  Each test prints one PASS/FAIL line for its criterion
and then asserts it.  Run standalone with ``python3 tests/test_acceptance.py``.
"""

import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from dualsiso.bcjr_ref import bcjr_posteriors, brute_force_posteriors, reference_trellis
from dualsiso.convcode import parse_code
from dualsiso.dualspec import dual_taps
from dualsiso.harness import (BUILTIN_CODES, SimConfig, bench_complexity, bench_transform_modes,
                              run_point, verify_theorems)

TESTS = Path(__file__).parent
EBN0 = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
# SNR loss of the output-product decoder reported for the five built-in codes, in dB
REPORTED_LOSS = (0.0, 0.1, 0.48, 0.1, 1.0)


def report(request, number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    tr = request.config.pluginmanager.get_plugin("terminalreporter")
    if tr is not None:
        tr.write_line(line)
    else:
        print(line)
    assert ok, line


@pytest.fixture(scope="module")
def theorem_report():
    start = time.perf_counter()
    rep = verify_theorems(BUILTIN_CODES, frames=100, seed=1, L=32, ebn0=2.0)
    return rep, time.perf_counter() - start


def test_criterion_1_combined_exactness(request, theorem_report):
    rep, seconds = theorem_report
    worst = max(r.combined_dev for r in rep.results)
    same = all(r.decisions_agree for r in rep.results)
    ok = worst < 1e-9 and same and seconds < 30
    report(request, 1, ok, f"max |combined - bcjr| = {worst:.1e}, identical decisions: {same}, "
                           f"{seconds:.1f} s for 5 codes x 100 frames")


def test_criterion_2_one_sided_exactness(request, theorem_report):
    rep, _ = theorem_report
    fwd = max(r.forward_dev for r in rep.results)
    bwd = max(r.backward_dev for r in rep.results)
    report(request, 2, fwd < 1e-9 and bwd < 1e-9, f"max forward dev {fwd:.1e}, backward dev {bwd:.1e}")


def test_criterion_3_transform_equivalence(request, theorem_report):
    rep, _ = theorem_report
    dev = max(r.fft_dev for r in rep.results)
    report(request, 3, dev < 1e-10, f"max |fast - direct| = {dev:.1e}")


def test_criterion_4_brute_force_oracle(request):
    rng = np.random.default_rng(4)
    worst, cases = 0.0, 0
    for text in BUILTIN_CODES:
        code = parse_code(text)
        N = dual_taps(code).N
        for L in range(1, 7):
            P = rng.dirichlet(np.full(4, 0.7), size=(3, L + N))
            ref = brute_force_posteriors(code, P)
            got = bcjr_posteriors(reference_trellis(code), P)
            rel = np.abs(got - ref) / np.where(ref > 0, ref, 1.0)
            worst = max(worst, float(rel.max()))
            cases += 1
    report(request, 4, worst < 1e-12, f"max relative error {worst:.1e} over {cases} (code, L <= 6) cases")


def test_criterion_5_termination_and_state_agreement(request, theorem_report):
    rep, _ = theorem_report
    l1 = [r.termination_pass for r in rep.results]
    l2 = [r.state_match_pass for r in rep.results]
    ok = all(x == 100 for x in l1 + l2)
    report(request, 5, ok, f"termination {l1}, state agreement {l2} (of 100 per code)")


# -- BER reproduction --------------------------------------------------------------

@pytest.fixture(scope="module")
def ber_curves():
    curves, start = {}, time.perf_counter()
    for text in BUILTIN_CODES:
        for dec in ("dual-combined", "bcjr", "dual-fb-product"):
            cfg = SimConfig(text, dec, frame_len=256, ebn0=EBN0, seed=2024, timing=False)
            curves[text, dec] = [run_point(cfg, e) for e in EBN0]
    return curves, time.perf_counter() - start


def _overlap(a, b):
    (alo, ahi), (blo, bhi) = a.ber_interval(), b.ber_interval()
    return alo <= bhi and blo <= ahi


def snr_at(records, target):
    """Eb/N0 where the BER curve crosses ``target`` (log-linear interpolation)."""
    x = np.array([r.ebn0_db for r in records])
    y = np.log10(np.maximum([r.ber for r in records], 1e-12))
    t = np.log10(target)
    for i in range(len(x) - 1):
        if y[i] >= t >= y[i + 1] and y[i] != y[i + 1]:
            return float(x[i] + (y[i] - t) / (y[i] - y[i + 1]) * (x[i + 1] - x[i]))
    return float("nan")


def test_criterion_6_ber_reproduction(request, ber_curves):
    curves, seconds = ber_curves
    notes, ok = [], seconds < 1800

    enough = all(r.bit_errors >= 200 for recs in curves.values() for r in recs)
    ok &= enough
    notes.append(f">=200 errors/point: {enough}")

    exact = all([r.bit_errors for r in curves[c, "dual-combined"]] ==
                [r.bit_errors for r in curves[c, "bcjr"]] for c in BUILTIN_CODES)
    ok &= exact
    notes.append(f"(a) combined == bcjr: {exact}")

    first, last = BUILTIN_CODES[0], BUILTIN_CODES[-1]
    apart = [r.ebn0_db for r, s in zip(curves[first, "dual-fb-product"], curves[first, "dual-combined"])
             if not _overlap(r, s)]
    ok &= not apart
    notes.append(f"(b) {first} product within CI: {not apart}" + (f" (apart at {apart} dB)" if apart else ""))

    low = [(r, s) for r, s in zip(curves[last, "dual-fb-product"], curves[last, "dual-combined"])
           if s.ber <= 1e-3]
    if low:
        worse = all(r.ber_interval()[0] > s.ber_interval()[1] for r, s in low)
        notes.append(f"{last} product worse at BER <= 1e-3: {worse}")
    else:
        worse = False
        lowest = min(s.ber for s in curves[last, "dual-combined"])
        notes.append(f"{last}: no point with BER <= 1e-3 in 0..6 dB (lowest {lowest:.1e})")
    ok &= worse

    target = 1e-1
    loss = [snr_at(curves[c, "dual-fb-product"], target) - snr_at(curves[c, "dual-combined"], target)
            for c in BUILTIN_CODES]
    ordered = (loss[0] <= min(loss[1], loss[3]) and max(loss[1], loss[3]) <= loss[2] <= loss[4])
    ok &= ordered
    notes.append(f"loss at BER {target:g} (dB): {', '.join(f'{v:.2f}' for v in loss)} "
                 f"vs reported {', '.join(map(str, REPORTED_LOSS))}; ordering consistent: {ordered}")
    notes.append(f"{seconds:.0f} s")
    report(request, 6, ok, "; ".join(notes))


# -- complexity ------------------------------------------------------------------------

def test_criterion_7_complexity(request):
    rep = bench_complexity(q=4, memories=(1, 2, 3))
    direct, fast = bench_transform_modes(q=16)
    ratios = rep.bcjr_ratios
    ok = (rep.r2_direct > 0.99 and rep.r2_fft > 0.99 and all(r >= 8 for r in ratios)
          and fast <= direct)
    report(request, 7, ok,
           f"dual R^2 direct {rep.r2_direct:.4f}, fft {rep.r2_fft:.4f}; bcjr growth "
           f"{', '.join(f'x{r:.1f}' for r in ratios)}; GF(16) fast {fast * 1e3:.2f} ms "
           f"vs direct {direct * 1e3:.2f} ms")


def test_criterion_8_property_suites(request):
    suites = [str(TESTS / f) for f in ("test_galois.py", "test_gfpoly.py", "test_pmf.py")]
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *suites],
                          capture_output=True, text=True, cwd=TESTS.parent)
    summary = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    report(request, 8, proc.returncode == 0, f"galois/gfpoly/pmf suites: {summary}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
