"""Weierstrass elliptic function on the square lattice with periods pi and i*pi."""

import math
import time

import numpy as np
import pytest

from speiserdim import (
    PI,
    POLE_CUTOFF,
    eisenstein_g4,
    reduce_to_fundamental,
    square_lattice,
    wp,
    wp_direct_sum,
    wp_prime,
)


def brute_weight4_sum(k):
    """Plain double sum of omega^-4 over the square |m|, |n| <= k, origin excluded."""
    m, n = np.meshgrid(np.arange(-k, k + 1), np.arange(-k, k + 1))
    omega = PI * (m + 1j * n)
    omega[k, k] = 1.0  # placeholder, excluded below
    terms = 1.0 / omega ** 4
    terms[k, k] = 0.0
    return float(terms.sum().real)


def random_cell_points(count, seed, margin=0.15):
    """Points of the fundamental cell at least `margin` away from every pole."""
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < count:
        z = complex(rng.uniform(-PI / 2, PI / 2), rng.uniform(-PI / 2, PI / 2))
        if abs(reduce_to_fundamental(z)) > margin:
            pts.append(z)
    return pts


def test_weight4_sum_against_brute_double_sum():
    # the square-truncated sum has an O(1/k^2) tail; one Richardson step
    # against the doubled cutoff removes it to well below the tolerance
    s1, s2 = brute_weight4_sum(200), brute_weight4_sum(400)
    extrapolated = (4.0 * s2 - s1) / 3.0
    assert eisenstein_g4() == pytest.approx(extrapolated, abs=1e-10)


def test_half_period_values():
    lat = square_lattice()
    assert wp(PI / 2).imag == pytest.approx(0.0, abs=1e-12)
    assert wp(PI / 2).real == pytest.approx(lat.e1, abs=1e-12)
    assert abs(wp((PI + 1j * PI) / 2)) < 1e-9  # e2 = 0 on the square lattice
    assert wp(1j * PI / 2) == pytest.approx(-lat.e1 + 0j, abs=1e-12)
    assert lat.e1 + lat.e2 + lat.e3 == pytest.approx(0.0, abs=1e-12)
    # the derivative vanishes at every half period
    for h in (PI / 2, 1j * PI / 2, (PI + 1j * PI) / 2):
        assert abs(wp_prime(h)) < 1e-9


def test_invariants():
    lat = square_lattice()
    assert lat.g2 == pytest.approx(4.0 * lat.e1 ** 2, rel=1e-14)
    assert lat.g2 == pytest.approx(60.0 * eisenstein_g4(), abs=1e-9)
    assert lat.g3 == 0.0
    assert lat.e1 == pytest.approx(0.6966019648428382, abs=1e-12)


def test_matches_direct_lattice_sum():
    start = time.monotonic()
    pts = random_cell_points(100, seed=20260814)
    lat = square_lattice()
    for z in pts:
        direct = wp_direct_sum(z, tol=1e-9)
        fast = wp(z, lat)
        assert abs(fast - direct) <= 1e-8 * (1.0 + abs(direct))
    assert time.monotonic() - start < 5.0


def test_differential_equation():
    lat = square_lattice()
    for z in random_cell_points(60, seed=5):
        p = wp(z, lat)
        dp = wp_prime(z, lat)
        lhs = dp * dp
        rhs = 4.0 * p ** 3 - lat.g2 * p - lat.g3
        assert abs(lhs - rhs) <= 1e-7 * max(1.0, abs(lhs))


def test_derivative_matches_central_difference():
    h = 1e-6
    for z in (0.3 + 0.2j, -1.1 + 0.7j, 0.9 - 1.2j):
        approx = (wp(z + h) - wp(z - h)) / (2.0 * h)
        assert wp_prime(z) == pytest.approx(approx, rel=1e-5)


def test_evenness_is_exact():
    for z in random_cell_points(50, seed=9):
        assert wp(-z) == wp(z)
        assert wp_prime(-z) == -wp_prime(z)


def test_periodicity():
    for z in random_cell_points(25, seed=13):
        ref = wp(z)
        for shift in (PI, 1j * PI, 5 * PI - 3j * PI, -41 * PI + 17j * PI):
            assert wp(z + shift) == pytest.approx(ref, rel=1e-9)


def test_reduction_small_case():
    got = reduce_to_fundamental(10 + 7j)
    want = (10 - 3 * PI) + 1j * (7 - 2 * PI)
    assert got == pytest.approx(want, abs=1e-12)
    assert -PI / 2 <= got.real < PI / 2 and -PI / 2 <= got.imag < PI / 2


def test_reduction_survives_huge_arguments():
    # single-pass reduction loses the cell entirely out here; the looped
    # version must still land inside and keep wp finite
    for z in (1e9 + 0.3 - 1j * (1e9 - 0.4), -3.2e12 + 1j * 7.7e11, 1e15 + 1j):
        zr = reduce_to_fundamental(z)
        assert -PI / 2 <= zr.real < PI / 2
        assert -PI / 2 <= zr.imag < PI / 2
        assert np.isfinite(wp(z).real)


def test_pole_handling():
    assert wp(0).real == math.inf
    assert wp(PI).real == math.inf  # lattice translate of the pole
    assert wp_prime(0).real == math.inf
    assert wp(POLE_CUTOFF / 2).real == math.inf
    near = wp(2 * POLE_CUTOFF)
    assert np.isfinite(near.real) and abs(near) > 1e14


def test_laurent_head_dominates_near_origin():
    for z in (1e-4 + 0j, 1e-4j, 7e-5 + 5e-5j):
        assert wp(z) == pytest.approx(1.0 / (z * z), rel=1e-7)


def test_direct_sum_radius_grows_with_tightness():
    from speiserdim import direct_sum_radius

    assert direct_sum_radius(1.0, 1e-12) > direct_sum_radius(1.0, 1e-6)
    assert direct_sum_radius(10.0, 1e-9) > direct_sum_radius(1.0, 1e-9)
