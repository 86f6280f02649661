"""End-to-end acceptance checks; each test prints one PASS/FAIL line with its runtime."""
import json
import time

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from kuranishi import data_path
from kuranishi import fixtures as fx
from kuranishi.atlas import check_atlas
from kuranishi.charts import KuranishiChart, potential, random_cyclic_linf
from kuranishi.cli import main
from kuranishi.schemas import validate_input
from kuranishi.su2rep import local_chart, presentation_ranks, solve_reps, twisted_cohomology
from kuranishi.su2rep.oracle import binary_icosahedral, finite_group_orbits
from kuranishi.tangent import ThreeTermComplex, canonical_inclusion, check_embedding, cohomology_ranks
from kuranishi.vfc import deformation_sweep, intersection_number, perturb_and_count, uniform_grid

ONE = np.array([1.0, 0.0, 0.0, 0.0])


@pytest.fixture
def report(capsys):
    def emit(n, ok, limit, t0, detail=""):
        elapsed = time.perf_counter() - t0
        passed = bool(ok) and elapsed < limit
        with capsys.disabled():
            print(f"\ncriterion {n:>2}: {'PASS' if passed else 'FAIL'}  {elapsed:6.2f} s (limit {limit} s)  {detail}")
        assert ok, detail
        assert elapsed < limit, f"took {elapsed:.2f} s"

    return emit


def test_criterion_01_poincare_sphere_count(report, capsys):
    t0 = time.perf_counter()
    code = main(["--format", "json", "casson", str(data_path("p235.json")), "--starts", "100000"])
    rep = json.loads(capsys.readouterr().out)
    oracle = len(finite_group_orbits(fx.p235().relators, binary_icosahedral()))
    ok = code == 0 and rep["N"] == 2 == oracle and rep["lambda_abs"] == 1 and len(set(rep["orbit_counts_by_seed"])) == 1
    report(1, ok, 60, t0, f"N={rep['N']} oracle={oracle} |lambda|={rep['lambda_abs']} seeds={rep['orbit_counts_by_seed']}")


def test_criterion_02_dimension_identities(report):
    t0 = time.perf_counter()
    free = fx.free_group(2)
    rho = np.array([[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]])
    h1 = twisted_cohomology(free, rho)[1]
    chart = local_chart(free, rho)
    vdims = []
    for P in (fx.p235(), fx.p237()):
        for orb in solve_reps(P, starts=2000):
            vdims.append(local_chart(P, orb).vdim)
    ok = h1 == 3 == 3 * free.g - 3 and (chart.n, chart.m) == (3, 0) and len(vdims) == 4 and set(vdims) == {0}
    report(2, ok, 1, t0, f"free h1={h1} chart=(n={chart.n}, m={chart.m}) balanced vdims={vdims}")


def test_criterion_03_virtual_counts(report):
    t0 = time.perf_counter()
    cases = {
        "x": ("chart_x.json", 1),
        "x^2": ("chart_x2.json", 0),
        "x^3-x": ("chart_x3_minus_x.json", 1),
        "2D": ("chart_2d.json", 0),
    }
    bad = []
    for name, (file, want) in cases.items():
        chart = validate_input(data_path(file))
        for eps in (1e-3, 1e-4):
            for seed in range(20):
                c = perturb_and_count(chart, eps=eps, seed=seed)
                if c.value != want or not c.certified:
                    bad.append((name, eps, seed, c.value))
    report(3, not bad, 5, t0, f"160 perturbed counts, mismatches {bad}")


def test_criterion_04_deformation_invariance(report):
    t0 = time.perf_counter()
    sweep = deformation_sweep(validate_input(data_path("family_fold.json"), "family"), uniform_grid(11))
    values = [c.value if c is not None else None for c in sweep.counts]
    report(4, sweep.verdict == "invariant" and values == [0] * 11, 5, t0, f"counts {values}")


def test_criterion_05_intersection_numbers(report):
    t0 = time.perf_counter()
    X, gX = validate_input(data_path("curve_x_axis.json"), "mapped_chart")
    D, gD = validate_input(data_path("curve_diagonal.json"), "mapped_chart")
    Q, gQ = validate_input(data_path("curve_parabola.json"), "mapped_chart")
    diag = intersection_number(X, gX, D, gD)
    parab = intersection_number(X, gX, Q, gQ)
    Xr = KuranishiChart(X.id, X.domain, X.m, X.section, -X.orientation, X.footprint)
    flipped = intersection_number(Xr, gX, D, gD)
    ok = abs(diag) == 1 and parab == 0 and flipped == -diag
    report(5, ok, 5, t0, f"diagonal {diag:+d}, parabola {parab}, reversed {flipped:+d}")


def test_criterion_06_atlas_validator(report):
    t0 = time.perf_counter()
    good = check_atlas(validate_input(data_path("two_chart_atlas.json"), "atlas"))
    missed = []
    for name, atlas, cond in fx.atlas_corruptions():
        if cond not in check_atlas(atlas).failed_conditions():
            missed.append(name)
    ok = good.passed and set(good.conditions()) == {"(1.)", "(2.)", "(3.)", "(4.)"} and not missed
    report(6, ok, 5, t0, f"shipped atlas {'passes' if good.passed else 'fails'}; 6 corruptions, undetected {missed}")


def test_criterion_07_potential(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    worst, failed = 0.0, 0
    for _ in range(100):
        pot = potential(random_cyclic_linf(rng, int(rng.integers(1, 4))), tol=1e-9)
        worst = max(worst, pot.residual)
        failed += not pot.verified
    report(7, failed == 0 and worst <= 1e-9, 10, t0, f"100 charts, worst coefficient residual {worst:.2e}")


def test_criterion_08_tangent_suite(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    bad = 0
    for _ in range(100):
        a, b, c = (int(v) for v in rng.integers(0, 5, size=3))
        r0 = int(rng.integers(0, min(a, b) + 1))
        D0 = rng.normal(size=(b, r0)) @ rng.normal(size=(r0, a))
        coker = np.linalg.svd(D0)[0][:, r0:] if r0 else np.eye(b)
        r1 = int(rng.integers(0, min(coker.shape[1], c) + 1))
        D1 = rng.normal(size=(c, r1)) @ rng.normal(size=(r1, coker.shape[1])) @ coker.T
        C = ThreeTermComplex.from_matrices(D0, D1)
        t = cohomology_ranks(C, ())
        bad += t.t0 - t.t1 + t.t2 != a - b + c
    chart = fx.line_chart("x**2 - 1", footprint=[("P-", (-1.0,)), ("P+", (1.0,))], id="C")
    A, B, h = canonical_inclusion(chart)
    inclusion = check_embedding(h, A, B)
    folded = check_embedding(*fx.folded_embedding())
    ok = bad == 0 and inclusion.passed and "(c)" in folded.failed_conditions()
    report(8, ok, 10, t0, f"Euler failures {bad}/100; inclusion {'passes' if inclusion.passed else 'fails'}; folded fails {folded.failed_conditions()}")


def test_criterion_09_twisted_cohomology(report):
    t0 = time.perf_counter()
    problems = []
    for name, P in [("p235", fx.p235()), ("p237", fx.p237()), ("trivial", fx.trivial_group()), ("trivial2", fx.trivial_group_2())]:
        trivial = np.tile(ONE, (P.g, 1))
        if twisted_cohomology(P, trivial) != (3, 0, 0):
            problems.append(f"{name} trivial rep")
        reps = [trivial] + [o.representative for o in solve_reps(P, starts=2000)]
        for rho in reps:
            h0, h1, h2 = presentation_ranks(P, rho)
            if h0 - h1 + h2 != 3:
                problems.append(f"{name} Euler")
    h235 = [o.h for o in solve_reps(fx.p235(), starts=2000)]
    ok = not problems and h235 == [(0, 0, 0), (0, 0, 0)]
    report(9, ok, 10, t0, f"P235 orbit cohomology {h235}; problems {problems}")


def test_criterion_10_robustness(report):
    t0 = time.perf_counter()
    P = fx.p235()
    base = solve_reps(P, starts=20000, seed=0)
    moved = solve_reps(P.tietze_multiply(1, 0), starts=20000, seed=0)
    same_fp = len(moved) == len(base) and all(
        np.max(np.abs(np.subtract(a.fingerprint, b.fingerprint))) <= 1e-6 for a, b in zip(moved, base)
    )
    u = Rotation.random(random_state=10).as_quat()[[3, 0, 1, 2]]
    conj = solve_reps(P, starts=20000, seed=0, conjugator=u)
    same_list = [o.fingerprint for o in conj] == [o.fingerprint for o in base]
    report(10, same_fp and same_list, 60, t0, f"N {len(base)} -> {len(moved)} after Tietze move; conjugated starts identical: {same_list}")
