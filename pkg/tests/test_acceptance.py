"""Acceptance criteria, one printed PASS/FAIL line each.

Criteria 1-6 and 8-10 run in process with their own timing.  Criterion 7
and the determinism check use two ``qgv verify --suite all`` runs in fresh
interpreters; 7 is read from the first report.
"""

import json
import subprocess
import sys
import time

import pytest

from qgv import analytic_engine as ae
from qgv.cli_report import EIGEN_POINTS, KAC_POINTS, SuiteConfig, run_suite
from qgv.gb_rewrite import RewriteContext, list_scripts, load_script, replay_script
from qgv.reporting import EXACT_ZERO
from qgv.special_functions import mp_new

B = 0.75
PREC = 192


def record(log, n, ok, text):
    line = f"CRITERION {n} {'PASS' if ok else 'FAIL'} {text}"
    log.append(line)
    print(line)


def timed(fn, *a, **kw):
    t0 = time.perf_counter()
    out = fn(*a, **kw)
    return out, time.perf_counter() - t0


@pytest.fixture(scope="module")
def mp():
    return mp_new(B)


@pytest.fixture(scope="module")
def cli_runs(tmp_path_factory):
    d = tmp_path_factory.mktemp("determinism")
    runs = []
    for name in ("a.json", "b.json"):
        t0 = time.perf_counter()
        proc = subprocess.run([sys.executable, "-m", "qgv.cli_report", "verify", "--suite", "all",
                               "--out", str(d / name)], capture_output=True, text=True)
        runs.append((proc.returncode, (d / name).read_bytes(), time.perf_counter() - t0, proc.stderr))
    return runs


def checks_by_id(raw):
    return {c["id"]: c for c in json.loads(raw)["checks"]}


def test_c1_functional_equations_and_reflection(mp, acceptance_log):
    (fe, t1) = timed(ae.functional_equation_check, mp, 100, 20240601, PREC, 1e-20)
    (rf, t2) = timed(ae.reflection_check, mp, 100, 20240602, PREC, 1e-20)
    worst = max(r.residual for r in fe + [rf])
    ok = worst <= 1e-20 and t1 + t2 <= 60
    record(acceptance_log, 1, ok, f"functional equations + reflection: max rel residual {worst:.2e} "
                                  f"(tol 1e-20), {t1 + t2:.1f} s (limit 60 s)")
    assert ok


def test_c2_four_five_identity(mp, acceptance_log):
    reps = []
    slowest = 0.0
    for triple in ae.FOUR_FIVE_TRIPLES:
        r, t = timed(ae.four_five_check, mp, (triple,), PREC, 1e-8)
        reps += r
        slowest = max(slowest, t)
    worst = max(r.residual for r in reps)
    ok = len(reps) == 5 and worst <= 1e-8 and slowest <= 120
    record(acceptance_log, 2, ok, f"4-5 integral identity: max rel error {worst:.2e} over 5 triples "
                                  f"(tol 1e-8), slowest {slowest:.1f} s (limit 120 s)")
    assert ok


def test_c3_fourier_representation(mp, acceptance_log):
    reps = ae.fourier_check(mp, prec=PREC, tol=1e-8)
    worst = max(r.residual for r in reps)
    xs = ae.FOURIER_POINTS
    ok = len(reps) == 5 and all(0.2 < x < 5 for x in xs) and worst <= 1e-8
    record(acceptance_log, 3, ok, f"Fourier representation of g_b: max rel error {worst:.2e} at x = {xs} "
                                  f"(tol 1e-8)")
    assert ok


def test_c4_asymptotics(mp, acceptance_log):
    reps = ae.asymptotic_check(mp, prec=PREC, tol=1e-20)
    worst = max(r.residual for r in reps)
    ok = worst <= 1e-20
    record(acceptance_log, 4, ok, f"asymptotic regimes at |Im z| = 50: max rel error {worst:.2e} (tol 1e-20)")
    assert ok


def test_c5_symbolic_relations(acceptance_log):
    reps, t = timed(run_suite, SuiteConfig("symbolic"))
    rel = [r for r in reps if r.check_id.startswith("relation.")]
    serre = [r for r in rel if "Serre" in r.check_id]
    ok = (len(rel) == 9 + 21 + 21 and len(serre) == 8 and all(r.residual == EXACT_ZERO for r in reps)
          and t <= 10)
    record(acceptance_log, 5, ok, f"symbolic relations: {sum(r.passed for r in rel)}/{len(rel)} exact-zero "
                                  f"({len(serre)} Serre instances), {t:.1f} s (limit 10 s)")
    assert ok


def test_c6_rewrite_scripts(acceptance_log):
    names = list_scripts()
    groups = {"sl2": 2, "s1s2s1": 4, "s2s1s2": 4, "intertwiner": 3, "vtransform": 1}
    counts = {g: sum(n.rsplit("_", 1)[0] == g for n in names) for g in groups}
    results = [replay_script(load_script(n)) for n in names]
    ok = counts == groups and all(r.passed for r in results)
    steps = sum(len(r.steps) for r in results)
    inter = sum(r.checked_intermediates for r in results)
    record(acceptance_log, 6, ok, f"rewrite scripts: {sum(r.passed for r in results)}/{len(results)} replay, "
                                  f"{steps} steps, {inter} intermediates matched exactly")
    assert ok


def _kac(cli_runs):
    code, raw, elapsed, _ = cli_runs[0]
    checks = checks_by_id(raw)
    tags = [f"[s={s},t={t},nu={nu}]" for s, t, nu in KAC_POINTS]
    return checks, tags, elapsed


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="LHS/RHS = b exactly: the identity holds with b d tau, not d tau")
def test_c7_kac_literal(cli_runs, acceptance_log):
    checks, tags, elapsed = _kac(cli_runs)
    lit = [float(checks[f"kac.literal{t}"]["residual"]) for t in tags]
    ok = max(lit) <= 1e-4
    ratios = [checks[f"kac.literal{t}"]["details"]["ratio_rhs_over_lhs"]["re"] for t in tags]
    record(acceptance_log, 7, ok, f"Kac identity as printed: rel deviation {max(lit):.3e} (tol 1e-4); "
                                  f"RHS/LHS = {', '.join(ratios)} = 1/b")
    assert ok


@pytest.mark.slow
def test_c7_kac_b_measure_contours_pairs(cli_runs, acceptance_log):
    checks, tags, elapsed = _kac(cli_runs)
    dev = max(float(checks[f"kac.b_measure{t}"]["residual"]) for t in tags)
    con = max(float(checks[f"kac.contours{t}"]["residual"]) for t in tags)
    pair = float(checks[f"kac.pairs{tags[0]}"]["residual"])
    ok = dev <= 1e-4 and con <= 1e-8 and pair <= 1e-4 and elapsed <= 2 * 30 * 60
    record(acceptance_log, "7.1", ok, f"Kac identity with b d tau: rel deviation {dev:.2e} (tol 1e-4); "
                                      f"contours agree to {con:.2e} (tol 1e-8); pair consistency {pair:.2e} "
                                      f"(tol 1e-4); whole verify run {elapsed / 60:.1f} min")
    assert ok


def test_c8_eigenfunction(acceptance_log):
    reps, t = timed(lambda: [r for lam, w in EIGEN_POINTS for r in ae.eigenfunction_check(ae.EigenCheckSpec(lam, w))])
    spread = max(r.residual for r in reps if "u_independence" in r.check_id)
    unimod = max(r.residual for r in reps if "unimodular" in r.check_id)
    consts = [complex(r.details["constant"]) for r in reps if "unimodular" in r.check_id]
    ok = spread <= 1e-6 and unimod <= 1e-6 and t <= 600
    record(acceptance_log, 8, ok, f"eigenfunction: u-spread {spread:.2e}, ||c|-1| {unimod:.2e} (tol 1e-6); "
                                  f"constants {', '.join(f'{c:.12f}' for c in consts)}; {t:.1f} s")
    assert ok


@pytest.fixture(scope="module")
def isometry():
    return timed(ae.isometry_check, ae.gaussian(1.0, 0.1, 0.2), ae.TransformSpec(b=B), 1e-3)


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="printed density 4 sinh(pi b l) sinh(pi l/b) gives norm ratio 0.0785")
def test_c9_isometry_literal(isometry, acceptance_log):
    reps, t = isometry
    r = next(r for r in reps if r.check_id == "isometry.norm_ratio")
    ok = r.residual <= 1e-3 and t <= 1800
    record(acceptance_log, 9, ok, f"isometry with the printed measure: norm ratio {r.details['ratio']:.6f} "
                                  f"(tol 1e-3), {t:.0f} s")
    assert ok


@pytest.mark.slow
def test_c9_isometry_doubled_measure(isometry, acceptance_log):
    reps, t = isometry
    by = {r.check_id: r for r in reps}
    r = by["isometry.norm_ratio.doubled_measure"]
    ok = all(x.passed for k, x in by.items() if k != "isometry.norm_ratio") and t <= 1800
    record(acceptance_log, "9.1", ok, f"isometry with 4 sinh(2 pi b l) sinh(2 pi l/b): norm ratio "
                                      f"{r.details['ratio']:.10f} (tol 1e-3); tail {by['isometry.tail'].residual:.1e}; "
                                      f"{t:.0f} s")
    assert ok


def test_c10_inversion_constant(mp, acceptance_log):
    reps, ph = ae.inversion_constant_check(mp, prec=PREC, tol=1e-10)
    spread = reps[0].residual
    ctx = RewriteContext(inversion_constant=ph) if ph is not None else None
    replays = [replay_script(load_script(n), ctx).passed for n in list_scripts()] if ctx else [False]
    ok = len(ae.INVERSION_POINTS) == 5 and spread <= 1e-10 and ph is not None and all(replays)
    record(acceptance_log, 10, ok, f"inversion constant: x-spread {spread:.2e} (tol 1e-10), constant {ph} "
                                   f"= {complex(reps[0].details['constant']):.15f}; "
                                   f"{sum(replays)}/{len(replays)} scripts replay with it injected")
    assert ok


@pytest.mark.slow
def test_c11_determinism(cli_runs, acceptance_log):
    (c1, a, _, _), (c2, b, _, _) = cli_runs
    ok = a == b and c1 == c2 and c1 in (0, 1) and len(a) > 0
    n = len(json.loads(a)["checks"])
    record(acceptance_log, 11, ok, f"determinism: two `qgv verify --suite all` reports byte-identical "
                                   f"({len(a)} bytes, {n} checks, exit codes {c1}/{c2})")
    assert ok
