"""Nonlinearity series, majorants, contraction threshold, bump profiles."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from honls import (AnalyticNonlinearity, BumpCoefficient, ComplexField,
                   DomainError, Grid, ValidationError, apply_nonlinearity,
                   fl1_norm)
from helpers import random_field


def test_series_values():
    g_cubic = AnalyticNonlinearity([1.0], radius=1.0)
    assert g_cubic(0.3) == pytest.approx(0.3, abs=1e-15)
    assert g_cubic(0.0) == 0.0
    g2 = AnalyticNonlinearity([1.0, 2.0], radius=2.0)
    assert g2(0.5) == pytest.approx(0.5 + (2.0 / 2.0) * 0.25, abs=1e-15)


def test_series_domain_error():
    g = AnalyticNonlinearity([1.0], radius=1.0)
    with pytest.raises(DomainError):
        g(1.0)
    with pytest.raises(DomainError):
        g(np.array([0.1, 1.5]))


def test_validation_rejects_degenerate():
    with pytest.raises(ValidationError):
        AnalyticNonlinearity([], radius=1.0)
    with pytest.raises(ValidationError):
        AnalyticNonlinearity([0.0], radius=1.0)
    with pytest.raises(ValidationError):
        AnalyticNonlinearity([1.0], radius=0.0)


def test_majorant_sums():
    cubic = AnalyticNonlinearity([1.0], radius=1.0)
    s1, s2 = cubic.majorant_sums()
    assert s1 == pytest.approx(0.25, abs=1e-15)
    assert s2 == pytest.approx(0.75, abs=1e-15)
    g = AnalyticNonlinearity([1.0, 1.0], radius=4.0)
    s1, s2 = g.majorant_sums()
    assert s1 == pytest.approx(1.5, abs=1e-14)
    assert s2 == pytest.approx(5.5, abs=1e-14)
    assert s2 >= s1


def test_contraction_threshold_value_and_monotonicity():
    cubic = AnalyticNonlinearity([1.0], radius=1.0)
    # hand evaluation: 0.99 * 0.25 * 1/(2 sqrt(0.75))
    assert cubic.contraction_threshold(1.0, 1.0) == pytest.approx(
        0.1428941916244324, abs=1e-12)
    # capped branch for a tiny coefficient norm
    assert cubic.contraction_threshold(1.0, 1e-12) == pytest.approx(
        0.99 * 0.25, abs=1e-12)
    # doubling the horizon scales the uncapped branch by 1/sqrt(2)
    t1 = cubic.contraction_threshold(1.0, 1.0)
    t2 = cubic.contraction_threshold(2.0, 1.0)
    assert t2 == pytest.approx(t1 / math.sqrt(2.0), rel=1e-12)
    assert cubic.contraction_threshold(1.0, 2.0) < t1
    with pytest.raises(DomainError):
        cubic.contraction_threshold(-1.0, 1.0)
    with pytest.raises(DomainError):
        cubic.contraction_threshold(1.0, 0.0)


def test_bump_support_and_positivity():
    bump = BumpCoefficient("smooth-bump", 2.0, 1.5, center=[0.3])
    pts = np.linspace(-4, 4, 401)[:, None]
    vals = bump(pts)
    assert np.all(vals >= 0)
    outside = np.abs(pts[:, 0] - 0.3) >= 1.5
    assert np.all(vals[outside] == 0)
    # peak value at the center is amplitude * e^{-1}
    assert bump(np.array([[0.3]]))[0] == pytest.approx(2.0 * np.exp(-1.0), rel=1e-12)


def test_bump_kinds_and_validation():
    gt = BumpCoefficient("gaussian-truncated", 1.0, 2.0, center=[0.0], width=0.5)
    assert gt(np.array([[0.0]]))[0] == pytest.approx(1.0)
    assert gt(np.array([[2.5]]))[0] == 0.0
    with pytest.raises(ValidationError):
        BumpCoefficient("triangle", 1.0, 1.0)
    with pytest.raises(ValidationError):
        BumpCoefficient("smooth-bump", -1.0, 1.0)
    with pytest.raises(ValidationError):
        BumpCoefficient("smooth-bump", 1.0, 0.0)


def test_segment_integral_matches_adaptive_quadrature():
    bump = BumpCoefficient("smooth-bump", 1.3, 0.8, center=[0.2])
    starts = np.array([[-3.0], [-1.0], [0.0], [2.0]])
    direction = np.array([1.0])
    s_hi = np.array([6.0, 2.5, 0.5, 3.0])
    got = bump.segment_integrals(starts, direction, s_hi)
    for row, (start, hi) in enumerate(zip(starts, s_hi)):
        expect, _ = quad(lambda s: float(bump(np.array([start[0] + s]))),
                         0.0, hi, epsabs=1e-13, epsrel=1e-13, limit=200)
        assert got[row] == pytest.approx(expect, abs=1e-11)


def test_line_integral_2d_rotation_invariance():
    bump = BumpCoefficient("smooth-bump", 1.0, 1.0, center=[0.0, 0.0])
    through_center = bump.line_integral(np.array([0.0, 0.0]), np.array([1.0, 0.0]))
    angled = bump.line_integral(
        np.array([0.0, 0.0]), np.array([np.cos(0.7), np.sin(0.7)]))
    assert angled == pytest.approx(through_center, rel=1e-9)
    missing = bump.line_integral(np.array([0.0, 2.0]), np.array([1.0, 0.0]))
    assert missing == 0.0


def test_apply_nonlinearity_cubic_oracle():
    grid = Grid(1, 128, 10.0)
    rng = np.random.default_rng(5)
    g = AnalyticNonlinearity([1.0], radius=4.0)
    bump = BumpCoefficient("smooth-bump", 0.7, 2.0)
    x = grid.axis
    u = ComplexField(grid, 0.5 * np.exp(-x**2) * np.exp(0.3j * x)
                     + 0.1j * np.exp(-(x - 1) ** 2))
    out = apply_nonlinearity(g, bump, u)
    # independent pointwise oracle for the cubic model: beta |u|^2 u
    beta = bump(grid.points())
    oracle = beta * np.abs(u.samples) ** 2 * u.samples
    assert np.max(np.abs(out.samples - oracle)) < 1e-14
    # vanishes where u vanishes and off the support
    assert np.all(out.samples[np.abs(x) >= 2.0] == 0)


def test_apply_nonlinearity_zero_and_domain():
    grid = Grid(1, 64, 5.0)
    g = AnalyticNonlinearity([1.0], radius=0.5)
    bump = BumpCoefficient("smooth-bump", 1.0, 1.0)
    zero = ComplexField(grid, np.zeros(grid.shape, dtype=complex))
    assert np.all(apply_nonlinearity(g, bump, zero).samples == 0)
    big = ComplexField(grid, np.full(grid.shape, 1.0 + 0j))
    with pytest.raises(DomainError):
        apply_nonlinearity(g, bump, big)


def test_gauge_invariance():
    grid = Grid(1, 128, 8.0)
    g = AnalyticNonlinearity([1.0, -0.5], radius=2.0)
    bump = BumpCoefficient("smooth-bump", 1.0, 1.5)
    x = grid.axis
    u = ComplexField(grid, 0.4 * np.exp(-x**2 / 2) * np.exp(0.2j * x))
    theta = 0.83
    rotated = ComplexField(grid, np.exp(1j * theta) * u.samples)
    lhs = apply_nonlinearity(g, bump, rotated).samples
    rhs = np.exp(1j * theta) * apply_nonlinearity(g, bump, u).samples
    assert np.max(np.abs(lhs - rhs)) < 1e-13


def test_modulus_conservation_mechanism():
    # Im(conj(u) * beta G(|u|^2) u) vanishes pointwise, so its grid integral does
    grid = Grid(1, 128, 8.0)
    g = AnalyticNonlinearity([0.7, 0.2], radius=3.0)
    bump = BumpCoefficient("smooth-bump", 1.0, 1.5)
    rng = np.random.default_rng(23)
    u = ComplexField(grid, rng.standard_normal(grid.n) * 0.3
                     + 0.3j * rng.standard_normal(grid.n))
    rhs = apply_nonlinearity(g, bump, u)
    pairing = np.sum(np.imag(np.conj(u.samples) * rhs.samples)) * grid.spacing
    assert abs(pairing) < 1e-12


def test_series_coefficient_norm_bound():
    # fl1(G(|u|^2) field) <= sum |a_k|/k! fl1(u)^{2k} for small random fields
    grid = Grid(1, 128, 10.0)
    g = AnalyticNonlinearity([1.0, 0.5, 0.25], radius=1.0)
    rng = np.random.default_rng(31)
    for _ in range(25):
        u = random_field(grid, rng, n_modes=8, scale=0.02)
        nu = fl1_norm(u)
        if nu >= np.sqrt(g.radius) / 2:
            continue
        gu = ComplexField(grid, g(np.abs(u.samples) ** 2).astype(complex))
        bound = sum(abs(a) / math.factorial(k + 1) * nu ** (2 * (k + 1))
                    for k, a in enumerate(g.coeffs))
        assert fl1_norm(gu) <= bound * (1 + 1e-10) + 1e-15
