from fractions import Fraction as F

import pytest

from mcf import brun_highdim as bh
from mcf import densities as dn
from mcf.errors import DomainError
from mcf.linalg import seeded_rng


def test_dimension_2_formula():
    x = (F(1, 4), F(3, 4))
    assert bh.brun_density_d(x) == 1 / (x[0] * (1 - x[0]))


def test_dimension_3_matches_the_triangle_formula(rng):
    for _ in range(50):
        x = bh.random_sorted_rational(3, rng)
        expected = 1 / (2 * x[1] * (1 - x[1]) * (1 - x[0] - x[1]))
        assert bh.brun_density_d(x) == expected
    # float path: relative error at machine precision
    g = seeded_rng(8)
    for _ in range(1000):
        x = tuple(sorted(g.dirichlet([1.0, 1.0, 1.0])))
        if x[0] == x[1] or x[1] == x[2]:
            continue
        got = bh.brun_density_d(x)
        expected = 1.0 / (2.0 * x[1] * (1.0 - x[1]) * (1.0 - x[0] - x[1]))
        assert abs(got - expected) <= 1e-12 * expected


def test_dimension_4_hand_value():
    x = (F(1, 10), F(2, 10), F(3, 10), F(4, 10))
    assert bh.brun_density_d(x) == F(1375, 189)


def test_input_validation():
    with pytest.raises(DomainError):
        bh.brun_density_d((F(1, 2), F(1, 4), F(1, 4)))  # not ascending
    with pytest.raises(DomainError):
        bh.brun_density_d((F(1, 3), F(1, 3), F(1, 3)))  # ties
    with pytest.raises(DomainError):
        bh.brun_density_d((F(1, 4), F(3, 4), F(1, 4)))
    with pytest.raises(DomainError):
        bh.brun_density_d((F(1, 5), F(2, 5)))  # sum != 1
    with pytest.raises(DomainError):
        bh.brun_density_d(tuple(F(1, 45) * k for k in range(1, 10)))  # d=9


def test_polytope_spec_validation():
    w = (F(1, 6), F(2, 6), F(3, 6))
    with pytest.raises(DomainError):
        bh.PolytopeSpec(w, frozenset({0, 1}), 2)        # pivot outside
    with pytest.raises(DomainError):
        bh.PolytopeSpec(w, frozenset({0, 1, 2}), 0)     # not proper
    with pytest.raises(DomainError):
        bh.PolytopeSpec((F(1, 2), F(1, 2), F(1, 2)), frozenset({0}), 0)
    with pytest.raises(DomainError):
        bh.polytope_volume_recursive(bh.PolytopeSpec((0.2, 0.3, 0.5),
                                                     frozenset({0, 1}), 1))


def test_recursion_equals_closed_form(rng):
    for d in (3, 4, 5, 6):
        for _ in range(20):
            x = bh.random_sorted_rational(d, rng)
            vol = bh.polytope_volume_recursive(bh.density_polytope(x))
            assert vol == bh.brun_density_d(x)


def test_base_interval_case_against_oracle():
    # |I| = 1 is an interval of length 1/(w (1 - w)); the recursion's
    # base case was derived from the inequality system, so check it
    # against the rejection oracle
    w = (F(3, 10), F(3, 5), F(1, 10))
    p = bh.PolytopeSpec(w, frozenset({0}), 0)
    exact = bh.polytope_volume_recursive(p)
    assert exact == 1 / (w[0] * (1 - w[0]))
    est, se = bh.polytope_volume_oracle(p, n_samples=200_000, seed=5)
    assert abs(est - float(exact)) <= 3 * se


def test_two_dimensional_case_is_the_proof_triangle(rng):
    for _ in range(20):
        x = bh.random_sorted_rational(3, rng)
        p = bh.PolytopeSpec(x, frozenset({0, 1}), 1)
        vol = bh.polytope_volume_recursive(p)
        x1, x2 = float(x[0]), float(x[1])
        c = 1.0 / (x1 + x2 - 1.0)
        area = dn.triangle_area_vertices(
            (0.0, 1.0 / (x2 - 1.0)), (0.0, 1.0 / x2), (c, c))
        assert abs(float(vol) - area) <= 1e-12 * area


def test_oracle_within_three_sigma(rng):
    for d in (3, 4):
        x = bh.random_sorted_rational(d, rng)
        p = bh.density_polytope(x)
        exact = float(bh.polytope_volume_recursive(p))
        est, se = bh.polytope_volume_oracle(p, n_samples=300_000, seed=2)
        assert se > 0
        assert abs(est - exact) <= 3 * se


def test_oracle_determinism_and_limits():
    w = (F(1, 6), F(2, 6), F(3, 6))
    p = bh.PolytopeSpec(w, frozenset({0, 1}), 0)
    a = bh.polytope_volume_oracle(p, n_samples=50_000, seed=9)
    b = bh.polytope_volume_oracle(p, n_samples=50_000, seed=9)
    assert a == b
    big = bh.PolytopeSpec(tuple(F(1, 8) for _ in range(8)),
                          frozenset(range(7)), 0)
    with pytest.raises(DomainError):
        bh.polytope_volume_oracle(big, n_samples=10)


def test_transfer_residual_for_d4_density():
    from mcf.algorithms import brun

    spec_d4 = brun(4)
    model = dn.density_model("brun d=4")
    g = seeded_rng(12)
    worst = 0.0
    for _ in range(25):
        x = tuple(g.dirichlet([1.0] * 4))
        worst = max(worst, dn.transfer_residual(spec_d4, model, x))
    assert worst < 1e-8
