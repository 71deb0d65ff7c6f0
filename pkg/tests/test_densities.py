import math
from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from mcf import algorithms as alg
from mcf import densities as dn
from mcf.errors import DomainError, UnsupportedError
from mcf.linalg import seeded_rng

from conftest import random_rational_simplex

PI2 = math.pi ** 2


def test_density_values():
    assert dn.density(dn.density_model("farey"), (F(1, 2), F(1, 2))) == 4
    assert dn.density(dn.density_model("reverse"),
                      (F(1, 3), F(1, 3), F(1, 3))) == F(27, 8)
    assert dn.density(dn.density_model("brun-sorted"),
                      (F(1, 5), F(3, 10), F(1, 2))) == F(100, 21)
    got = dn.density(dn.density_model("brun-sup"), (0.2, 0.3))
    assert abs(got - 1.0 / (2 * 0.3 * 1.2)) < 1e-15


def test_density_domain_errors():
    model = dn.density_model("reverse")
    with pytest.raises(DomainError):
        dn.density(model, (0, F(1, 2), F(1, 2)))      # on the boundary
    with pytest.raises(DomainError):
        dn.density(model, (F(3, 2), F(-1, 4), F(-1, 4)))
    sorted_model = dn.density_model("brun-sorted")
    with pytest.raises(DomainError):
        dn.density(sorted_model, (F(1, 2), F(3, 10), F(1, 5)))  # descending
    sup = dn.density_model("brun-sup")
    with pytest.raises(DomainError):
        dn.density(sup, (0.5, 0.5))


def test_model_registry():
    assert set(dn.model_names()) == {"farey", "reverse", "cassaigne",
                                     "brun", "brun-sorted", "brun-sup"}
    assert dn.density_model("brun d=4").dim == 4
    with pytest.raises(DomainError):
        dn.density_model("gauss")
    with pytest.raises(DomainError):
        dn.density_model("reverse d=3")


def test_transfer_residual_exact_zero(rng):
    # in rational arithmetic the functional equation holds identically
    for name in ["farey", "reverse", "cassaigne", "brun"]:
        spec = alg.get_algorithm(name)
        model = dn.density_model(name)
        for _ in range(25):
            x = random_rational_simplex(rng, spec.dim)
            assert dn.transfer_residual(spec, model, x) == 0


def test_transfer_residual_float_small():
    g = seeded_rng(17)
    for name in ["farey", "reverse", "cassaigne", "brun"]:
        spec = alg.get_algorithm(name)
        model = dn.density_model(name)
        worst = 0.0
        for _ in range(100):
            x = tuple(g.dirichlet([1.0] * spec.dim))
            worst = max(worst, dn.transfer_residual(spec, model, x))
        assert worst < 1e-10, (name, worst)


def test_total_masses():
    cases = [("reverse", PI2 / 4), ("cassaigne", PI2 / 12),
             ("brun-sup", PI2 / 24), ("brun-sorted", PI2 / 24),
             ("brun", PI2 / 4)]
    for name, target in cases:
        model = dn.density_model(name)
        res = dn.total_mass(model, tol=1e-9)
        assert abs(res.value - target) < 1e-8, name
        res2 = dn.total_mass(model, method="adaptive-2d", tol=1e-9)
        assert abs(res2.value - target) < 1e-7, name
        assert abs(model.mass - target) < 1e-15


def test_total_mass_monte_carlo_sanity():
    res = dn.total_mass(dn.density_model("cassaigne"), method="monte-carlo",
                        n_samples=400_000, seed=0)
    assert abs(res.value - PI2 / 12) < 0.01
    assert res.error > 0


def test_farey_mass_is_explicitly_infinite():
    res = dn.total_mass(dn.density_model("farey"))
    assert res.infinite and res.value == math.inf
    assert "infinite" in res.to_csv()


def test_reverse_sector_mass_is_one_sixth():
    # by symmetry one sorted sector carries pi^2/24; integrate the
    # density over {x < y < z} directly as an independent check
    def inner(x):
        val, _ = integrate.quad(
            lambda y: 1.0 / ((x + y) * (1.0 - x) * (1.0 - y)),
            x, (1.0 - x) / 2.0, epsabs=1e-11, epsrel=1e-11)
        return val

    val, _ = integrate.quad(inner, 0.0, 1.0 / 3.0, epsabs=1e-9, epsrel=1e-9)
    assert abs(val - PI2 / 24) < 1e-6


def test_dilog_values():
    assert dn.dilog(0.0) == 0.0
    assert abs(dn.dilog(1.0) - PI2 / 6) < 1e-12
    # series oracle at an interior point
    z, acc = 0.37, 0.0
    for k in range(1, 200):
        acc += z ** k / k ** 2
    assert abs(dn.dilog(z) - acc) < 1e-15
    for z in (-5.0, -1.0, -0.75, -1.0 / 3.0, 0.2, 0.5, 2.0 / 3.0, 0.95):
        assert abs(dn.dilog(z) - float(mpmath.polylog(2, z))) < 1e-14, z
    with pytest.raises(DomainError):
        dn.dilog(1.5)


def test_dilog_identity():
    assert dn.dilog_identity_check() < 1e-12


def test_triangle_area_examples():
    assert dn.triangle_area(1, 1, 0) == F(1, 2)
    assert dn.triangle_area(2, 3, 1) == F(1, 2)
    # collinear: (a,0), (0,b), (c,c) with c = ab/(a+b) lies on the line
    a, b = F(3), F(5)
    assert dn.triangle_area(a, b, a * b / (a + b)) == 0


@settings(max_examples=200, deadline=None)
@given(st.fractions(min_value=-20, max_value=20),
       st.fractions(min_value=-20, max_value=20),
       st.fractions(min_value=-20, max_value=20))
def test_triangle_area_matches_shoelace(a, b, c):
    assert dn.triangle_area(a, b, c) == dn.triangle_area_vertices(
        (a, 0), (0, b), (c, c))


def test_reverse_proof_triangle_reproduces_density():
    g = seeded_rng(4)
    for _ in range(200):
        x, y = g.random(2)
        if x + y >= 0.999 or min(x, y) < 1e-3:
            continue
        area = dn.triangle_area(1.0 / (x - 1.0), 1.0 / (y - 1.0), 1.0 / (x + y))
        target = 1.0 / ((x + y) * (1.0 - x) * (1.0 - y))
        assert abs(area - target) <= 1e-12 * abs(target)


def test_brun_proof_triangle_reproduces_density():
    g = seeded_rng(5)
    for _ in range(200):
        x1, x2 = sorted(g.random(2) / 3.0 + 1e-3)
        c = 1.0 / (x1 + x2 - 1.0)
        area = dn.triangle_area_vertices(
            (0.0, 1.0 / (x2 - 1.0)), (0.0, 1.0 / x2), (c, c))
        target = 1.0 / (2.0 * x2 * (1.0 - x2) * (1.0 - x1 - x2))
        assert abs(area - target) <= 1e-12 * abs(target)


def test_expected_cell_masses_normalized():
    ids, masses = dn.expected_cell_masses(dn.density_model("cassaigne"), 8)
    assert len(ids) == 64
    assert abs(sum(masses) - 1.0) < 1e-12
    assert all(m > 0 for m in masses)


def test_empirical_density_shrinks_with_more_steps():
    spec = alg.cassaigne()
    model = dn.density_model("cassaigne")
    small = dn.empirical_density(spec, model, n_steps=100_000, bins=16, seed=11)
    big = dn.empirical_density(spec, model, n_steps=1_000_000, bins=16, seed=11)
    assert small.l1 / big.l1 >= 2.0
    assert big.outside == 0


def test_empirical_density_brun_sorted():
    spec = alg.brun_sorted()
    model = dn.density_model("brun-sorted")
    comp = dn.empirical_density(spec, model, n_steps=200_000, bins=16, seed=3)
    assert comp.outside == 0
    assert comp.l1 < 0.06


def test_empirical_density_requires_matching_algorithm():
    with pytest.raises(DomainError):
        dn.empirical_density(alg.reverse(), dn.density_model("cassaigne"), 10)
    with pytest.raises(UnsupportedError):
        dn.empirical_density(alg.farey(), dn.density_model("farey"), 10)


def test_histogram_csv_shape():
    comp = dn.empirical_density(alg.cassaigne(), dn.density_model("cassaigne"),
                                n_steps=10_000, bins=4, seed=1)
    lines = comp.to_csv().splitlines()
    assert lines[0] == "cell-id,observed,expected,residual"
    assert len(lines) == 1 + 16
    again = dn.empirical_density(alg.cassaigne(), dn.density_model("cassaigne"),
                                 n_steps=10_000, bins=4, seed=1)
    assert again.to_csv() == comp.to_csv()
