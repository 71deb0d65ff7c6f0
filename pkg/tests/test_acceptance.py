"""Acceptance suite: one test per criterion, each printing a PASS/FAIL
line with its measured values (run with ``pytest -s`` to see them all).

Budgets and tolerances are fixed here, not tuned at run time.
"""

import math
import time

from mcf import algorithms as alg
from mcf import brun_highdim as bh
from mcf import cli
from mcf import densities as dn
from mcf import experiments as ex
from mcf import natext as ne
from mcf.linalg import seeded_rng

PI2 = math.pi ** 2


def _report(num, desc, ok, detail):
    print(f"ACCEPTANCE {num} {'PASS' if ok else 'FAIL'}: {desc} [{detail}]")
    assert ok, f"criterion {num} failed: {desc} [{detail}]"


def test_criterion_1_exact_farey_orbit(tmp_path):
    t0 = time.time()
    rows = {}
    for start in ("2,5", "5,3"):
        out = tmp_path / f"orbit-{start.replace(',', '-')}.csv"
        code = cli.main(["orbit", "--algo", "farey", "--mode", "exact",
                         "--start", start, "--steps", "1", "--out", str(out)])
        lines = out.read_text().splitlines()
        rows[start] = (code, lines[2].split(",")[2:4])
    elapsed = time.time() - t0
    ok = (all(code == 0 for code, _ in rows.values())
          and all(cells == ["2", "3"] for _, cells in rows.values())
          and elapsed < 1.0)
    _report(1, "exact orbit steps (2,5) -> (2,3) and (5,3) -> (2,3)", ok,
            f"rows={rows} elapsed={elapsed:.2f}s < 1s")


def test_criterion_2_transfer_residuals():
    t0 = time.time()
    worst = {}
    for name in ["farey", "reverse", "cassaigne", "brun"]:
        spec = alg.get_algorithm(name)
        model = dn.density_model(name)
        g = seeded_rng(2026, stream=1)
        w = 0.0
        for _ in range(1000):
            x = tuple(g.dirichlet([1.0] * spec.dim))
            w = max(w, float(dn.transfer_residual(spec, model, x)))
        worst[name] = w
    elapsed = time.time() - t0
    ok = max(worst.values()) < 1e-10 and elapsed < 10.0
    _report(2, "transfer-operator residuals < 1e-10 on 1000 points each", ok,
            f"max={worst} elapsed={elapsed:.1f}s < 10s")


def test_criterion_3_total_masses():
    t0 = time.time()
    results = {}
    for name, target in [("reverse", PI2 / 4), ("cassaigne", PI2 / 12),
                         ("brun-sup", PI2 / 24)]:
        res = dn.total_mass(dn.density_model(name), tol=1e-9)
        results[name] = abs(res.value - target)
    elapsed = time.time() - t0
    ok = max(results.values()) < 1e-6 and elapsed < 30.0
    _report(3, "masses pi^2/4, pi^2/12 and pi^2/24 within 1e-6", ok,
            f"errors={results} elapsed={elapsed:.1f}s < 30s")


def test_criterion_4_dilog_identity():
    t0 = time.time()
    diff = dn.dilog_identity_check()
    elapsed = time.time() - t0
    ok = diff < 1e-12 and elapsed < 1.0
    _report(4, "dilogarithm identity defect < 1e-12", ok,
            f"defect={diff!r} elapsed={elapsed:.2f}s < 1s")


def test_criterion_5_bijectivity_audits():
    t0 = time.time()
    violations = {}
    for name in ["reverse", "cassaigne", "brun"]:
        report = ne.bijectivity_audit(alg.get_algorithm(name),
                                      n_samples=10_000, seed=2026)
        violations[name] = report.total_violations

    # the transposed-matrix action on the dual cone rays, as exact
    # integer products
    cas = alg.cassaigne()
    rays = ((1, 1, 0), (1, 1, 1), (0, 1, 1))
    products = {"a": ((1, 1, 0), (1, 2, 1), (1, 1, 1)),
                "b": ((1, 1, 1), (1, 2, 1), (0, 1, 1))}
    rays_ok = True
    for b in cas.branches:
        cols = [b.matrix.apply_T(r) for r in rays]
        got = tuple(tuple(int(cols[j][i]) for j in range(3)) for i in range(3))
        rays_ok &= got == products[b.label]

    elapsed = time.time() - t0
    ok = (max(violations.values()) == 0 and rays_ok and elapsed < 60.0)
    _report(5, "bijectivity audits: zero violations on 10^4 samples/piece "
               "and exact ray product identities", ok,
            f"violations={violations} ray_identities={rays_ok} "
            f"elapsed={elapsed:.1f}s < 60s")


def test_criterion_6_highdim_brun():
    t0 = time.time()
    rng = seeded_rng(2026, stream=6)
    exact_ok = True
    for d in (3, 4, 5):
        for _ in range(100):
            x = bh.random_sorted_rational(d, rng)
            vol = bh.polytope_volume_recursive(bh.density_polytope(x))
            closed = bh.brun_density_d(x)
            exact_ok &= vol == closed
            # the nested sum equals the volume times the stated prefactor
            prefactor = math.factorial(d - 1) * x[d - 2]
            exact_ok &= closed * prefactor == vol * prefactor

    oracle_ok = True
    for k in range(10):
        x = bh.random_sorted_rational(4, rng)
        p = bh.density_polytope(x)
        exact = float(bh.polytope_volume_recursive(p))
        est, se = bh.polytope_volume_oracle(p, n_samples=200_000, seed=100 + k)
        oracle_ok &= abs(est - exact) <= 3.0 * se

    spec4 = alg.brun(4)
    model4 = dn.density_model("brun d=4")
    g = seeded_rng(2026, stream=7)
    worst = 0.0
    for _ in range(100):
        x = tuple(g.dirichlet([1.0] * 4))
        worst = max(worst, float(dn.transfer_residual(spec4, model4, x)))

    elapsed = time.time() - t0
    ok = exact_ok and oracle_ok and worst < 1e-8 and elapsed < 300.0
    _report(6, "d-dim brun: recursion == closed form (d=3,4,5), Monte-Carlo "
               "oracle within 3 sigma, d=4 transfer residual < 1e-8", ok,
            f"exact={exact_ok} oracle={oracle_ok} residual={worst!r} "
            f"elapsed={elapsed:.1f}s < 300s")


def test_criterion_7_dual_absorption():
    t0 = time.time()
    stats = {}
    for name in ["reverse", "cassaigne"]:
        surv = ne.absorption_survey(alg.get_algorithm(name), n_starts=1000,
                                    absorb_within=1000, stay_steps=10_000,
                                    seed=2026)
        stats[name] = (surv.absorbed_fraction, surv.escapes, surv.max_time)
    elapsed = time.time() - t0
    ok = (all(f == 1.0 and esc == 0 for f, esc, _ in stats.values())
          and elapsed < 60.0)
    _report(7, "absorption into the dual cone within 1000 steps for 1000 "
               "starts, no escape over the next 10000 steps", ok,
            f"(fraction, escapes, max_time)={stats} elapsed={elapsed:.1f}s < 60s")


def test_criterion_8_arp_fractal_experiment():
    spec = alg.arp()
    t0 = time.time()
    grid = ex.render_fractal(spec, 2_000_000, window=(-0.6, 0.6, -0.6, 0.6),
                             resolution=1024, draw_order="poincare-last",
                             seed=1)
    render_elapsed = time.time() - t0
    data = grid.ppm_bytes()
    grid2 = ex.render_fractal(spec, 2_000_000, window=(-0.6, 0.6, -0.6, 0.6),
                              resolution=1024, draw_order="poincare-last",
                              seed=1)
    reproducible = grid2.ppm_bytes() == data
    occupancy = grid.occupancy()
    probe = ex.symmetry_probe(grid, spec)

    zoom_a = ex.render_fractal(spec, 10_000_000,
                               window=(0.05, 0.15, 0.05, 0.15),
                               resolution=1024, draw_order="poincare-last",
                               seed=1)
    zoom_b = ex.render_fractal(spec, 10_000_000,
                               window=(0.05, 0.15, 0.05, 0.15),
                               resolution=1024, draw_order="poincare-last",
                               seed=1)
    zoom_ok = (zoom_a.ppm_bytes() == zoom_b.ppm_bytes()
               and zoom_a.occupancy() > 0)

    ok = (render_elapsed < 120.0 and reproducible
          and 0.05 < occupancy < 0.95 and probe.jaccard >= 0.95 and zoom_ok)
    _report(8, "ARP fractal at reference parameters: < 2 min, byte-reproducible, "
               "occupancy in (5%, 95%), order-3 symmetry score >= 0.95, "
               "reduced 1e7-step zoom reproducible", ok,
            f"elapsed={render_elapsed:.1f}s occupancy={occupancy:.4f} "
            f"jaccard={probe.jaccard:.4f} strict={probe.strict_jaccard:.4f} "
            f"reproducible={reproducible} zoom={zoom_ok}")


def test_criterion_9_empirical_histograms():
    results = {}
    ok = True
    for name in ["reverse", "cassaigne", "brun"]:
        t0 = time.time()
        comp = dn.empirical_density(alg.get_algorithm(name),
                                    dn.density_model(name),
                                    n_steps=10_000_000, bins=32, seed=2026)
        elapsed = time.time() - t0
        results[name] = (round(comp.l1, 5), round(elapsed, 1))
        ok &= comp.l1 < 0.03 and elapsed < 180.0
    _report(9, "orbit histograms at 1e7 steps within L1 0.03 of the "
               "closed-form densities", ok,
            f"(L1, seconds)={results}, budget 180s each")
