"""Compressions, determinants, Birkhoff/triangular factorization, winding."""

import numpy as np
import pytest

from loopfact.errors import NotInvertible, ShiftedNotInvertible, VanishingSymbol
from loopfact.laurent import CircleGrid, LaurentSeries, LoopMatrix, star
from loopfact.rootsub import RootParams, partial_product
from loopfact.toeplitz import (
    birkhoff,
    compress,
    det_AstarA,
    direct_shifted,
    fourier_block,
    scalar_compress,
    toeplitz_index,
    triangular,
    winding_number,
)

# frozen: prod (1+|zeta_n|^2)^(-n) for zeta = (0.3, 0.2) is 1/(1.09 * 1.04^2)
DET_PIN = 0.8482167091906721


def blaschke_loop(r: float = 0.5, order: int = 60) -> LoopMatrix:
    """diag(d*, d) with d = (z - r)/(rz - 1), unimodular with winding 1."""
    terms = {0: r}
    for k in range(1, order + 1):
        terms[k] = r ** (k - 1) * (r**2 - 1.0)
    d = LaurentSeries.from_dict(terms)
    return LoopMatrix.diagonal(star(d), d)


def test_fourier_block_and_compress_layout():
    p = RootParams("zeta", (0.3, 0.2))
    g = partial_product(p)
    t = compress(g, 3)
    assert t.matrix.shape == (8, 8)
    assert t.block_count == 4 and t.kind == "toeplitz"
    # block (j, k) must be the z^{j-k} coefficient matrix
    for j in range(4):
        for k in range(4):
            want = fourier_block(g, j - k)
            got = t.matrix[2 * j : 2 * j + 2, 2 * k : 2 * k + 2]
            assert np.max(np.abs(got - want)) == 0.0


def test_hankel_corners_layout():
    g = partial_product(RootParams("zeta", (0.4,)))
    b = compress(g, 2, "hankel_B").matrix
    c = compress(g, 2, "hankel_C").matrix
    for j in range(3):
        for q in range(3):
            assert np.max(np.abs(b[2 * j : 2 * j + 2, 2 * q : 2 * q + 2] - fourier_block(g, j + q + 1))) == 0
            assert np.max(np.abs(c[2 * j : 2 * j + 2, 2 * q : 2 * q + 2] - fourier_block(g, -j - 1 - q))) == 0
    f = LaurentSeries.from_dict({-2: 1.0, 1: 2.0})
    sb = scalar_compress(f, 2, "hankel_B")
    assert sb[0, 0] == f.coeff(1) and sb[1, 1] == f.coeff(0)


def test_det_magnitude_matches_zeta_product():
    k2 = partial_product(RootParams("zeta", (0.3, 0.2)))
    for N in (2, 8, 34):
        assert abs(det_AstarA(k2, N) - DET_PIN) < 1e-10


def test_det_magnitude_lambda_spot_value():
    # diag(exp(-chi* + chi), inverse) with chi = 0.3 z; limit exp(-0.18)
    grid = CircleGrid(256)
    vals = np.exp(0.3 * grid.points - 0.3 / grid.points)
    lam = grid.analyze(vals, -40, 40)
    lam_inv = grid.analyze(1.0 / vals, -40, 40)
    g = LoopMatrix.diagonal(lam, lam_inv)
    assert abs(det_AstarA(g, 64) - np.exp(-0.18)) < 1e-9


def test_shifted_compression_equals_direct_construction():
    rng = np.random.default_rng(2)
    vals = tuple(0.4 * 0.5**k * np.exp(2j * np.pi * rng.uniform()) for k in range(3))
    g = partial_product(RootParams("zeta", vals))
    for N in (0, 1, 4, 8):
        assert np.max(np.abs(compress(g, N, "shifted").matrix - direct_shifted(g, N))) == 0.0


def test_birkhoff_factors_normalized_and_accurate():
    rng = np.random.default_rng(9)
    vals = tuple(0.4 * 0.6**k * np.exp(2j * np.pi * rng.uniform()) for k in range(4))
    g = partial_product(RootParams("zeta", vals))
    bf = birkhoff(g, 24)
    assert bf.residual < 1e-10
    assert bf.minus_spill < 1e-10
    # normalizations
    gp0 = fourier_block(bf.g_plus, 0)
    assert np.max(np.abs(gp0 - np.eye(2))) < 1e-12
    gm0 = fourier_block(bf.g_minus, 0)
    assert np.max(np.abs(gm0 - np.eye(2))) < 1e-9
    for e in bf.g_minus.entries():
        assert e.is_zero or e.max_power <= 0
    for e in bf.g_plus.entries():
        assert e.is_zero or e.min_power >= 0


def test_triangular_single_zeta_frozen_values():
    k2 = partial_product(RootParams("zeta", (0.5,)))
    tf = triangular(k2, 16)
    assert abs(tf.a_zero - np.sqrt(1.25)) < 1e-12
    assert abs(tf.m_zero - 1.0) < 1e-12
    assert abs(tf.l.b.coeff(-1) - 0.5) < 1e-12
    assert abs(tf.u.c.coeff(1) + 0.5) < 1e-12
    assert (tf.l.a - LaurentSeries.one()).coefficient_max() < 1e-12
    assert tf.residual < 1e-12


def test_triangular_unipotent_normalizations():
    rng = np.random.default_rng(21)
    vals = tuple(0.35 * 0.55**k * np.exp(2j * np.pi * rng.uniform()) for k in range(3))
    g = partial_product(RootParams("zeta", vals))
    tf = triangular(g, 24)
    assert abs(abs(tf.m_zero) - 1.0) < 1e-12
    assert tf.a_zero > 0
    # l at infinity lower unipotent: diagonal 1, upper entry vanishing
    assert abs(tf.l.a.coeff(0) - 1.0) < 1e-9
    assert abs(tf.l.d.coeff(0) - 1.0) < 1e-9
    assert abs(tf.l.b.coeff(0)) < 1e-9
    # u at zero upper unipotent: diagonal 1, lower entry vanishing
    assert abs(tf.u.a.coeff(0) - 1.0) < 1e-12
    assert abs(tf.u.d.coeff(0) - 1.0) < 1e-12
    assert abs(tf.u.c.coeff(0)) < 1e-12
    assert tf.residual < 1e-9


def test_blaschke_loop_not_invertible():
    g = blaschke_loop()
    with pytest.raises(NotInvertible):
        birkhoff(g, 48)
    with pytest.raises(NotInvertible):
        triangular(g, 48)


def test_shifted_not_invertible_on_offdiagonal_constant():
    # antidiagonal constant loop: Birkhoff exists, triangular refinement not
    zero = LaurentSeries.zero()
    one = LaurentSeries.one()
    g = LoopMatrix(zero, one, -1.0 * one, zero)
    with pytest.raises(ShiftedNotInvertible):
        triangular(g, 8)


def test_winding_number_monomials_and_trig():
    grid = CircleGrid(256)
    for k in range(-5, 6):
        assert winding_number(LaurentSeries.monomial(k), grid) == k
    # unimodular exponential with imaginary trigonometric exponent: degree 0
    vals = np.exp(1j * (0.7 * np.cos(np.angle(grid.points)) - 0.4 * np.sin(2 * np.angle(grid.points))))
    f = grid.analyze(vals, -30, 30)
    assert winding_number(f, grid) == 0


def test_winding_number_vanishing_symbol():
    f = LaurentSeries.from_dict({0: 1.0, 1: -1.0})  # zero at z = 1
    with pytest.raises(VanishingSymbol):
        winding_number(f, CircleGrid(128))


def test_winding_agrees_with_minus_index():
    grid = CircleGrid(256)
    cases = [LaurentSeries.monomial(k) for k in (-3, -1, 0, 2, 5)]
    d = blaschke_loop().d
    cases.append(d)
    cases.append(star(d))
    for f in cases:
        assert winding_number(f, grid) == -toeplitz_index(f, 40)
