"""Finite compressions of loop multiplication operators and their use.

The Hilbert space is C^2-valued functions on the circle with orthonormal
basis e_i z^k; truncations order the retained basis as
    e_1 z^0, e_2 z^0, e_1 z^1, e_2 z^1, ..., e_1 z^N, e_2 z^N
so the compression of multiplication by g has 2x2 blocks g_{j-k}.  On top of
the compressions this module provides determinant magnitudes, the Birkhoff
(Riemann-Hilbert) factorization by linear solve, its triangular refinement,
and winding numbers with a numerical index cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotInvertible, ShiftedNotInvertible, VanishingSymbol
from .laurent import (
    CircleGrid,
    LaurentSeries,
    LoopMatrix,
    apply_sigma,
    invert_series,
    star,
    truncate,
)

__all__ = [
    "ToeplitzTruncation",
    "fourier_block",
    "compress",
    "scalar_compress",
    "direct_shifted",
    "det_AstarA",
    "BirkhoffFactors",
    "birkhoff",
    "TriangularFactors",
    "triangular",
    "winding_number",
    "toeplitz_index",
]

_KINDS = ("toeplitz", "shifted", "hankel_B", "hankel_C")


def fourier_block(g: LoopMatrix, n: int) -> np.ndarray:
    """2x2 matrix of z^n coefficients of the entries of g."""
    return np.array(
        [[g.a.coeff(n), g.b.coeff(n)], [g.c.coeff(n), g.d.coeff(n)]],
        dtype=complex,
    )


@dataclass(frozen=True)
class ToeplitzTruncation:
    """A finite compression; matrix is 2(N+1) x 2(N+1), kind names the corner."""

    matrix: np.ndarray
    block_count: int
    kind: str


def _block_matrix(g: LoopMatrix, row_powers, col_powers) -> np.ndarray:
    n_r, n_c = len(row_powers), len(col_powers)
    out = np.zeros((2 * n_r, 2 * n_c), dtype=complex)
    blocks = {}
    for r, p in enumerate(row_powers):
        for c, q in enumerate(col_powers):
            k = p - q
            if k not in blocks:
                blocks[k] = fourier_block(g, k)
            out[2 * r : 2 * r + 2, 2 * c : 2 * c + 2] = blocks[k]
    return out


def compress(g: LoopMatrix, N: int, kind: str = "toeplitz") -> ToeplitzTruncation:
    """Corner of the multiplication operator of g.

    kind "toeplitz" compresses to span{e_i z^k : 0 <= k <= N}; "shifted" is
    the same corner for sigma(g); "hankel_B" maps powers -1..-(N+1) into
    0..N and "hankel_C" the reverse.  Entries follow the single rule
    block(row p, col q) = g_{p-q}.
    """
    if kind not in _KINDS:
        raise ValueError(f"kind must be one of {_KINDS}, got {kind!r}")
    if N < 0:
        raise ValueError("N must be nonnegative")
    plus = range(N + 1)
    minus = [-(q + 1) for q in range(N + 1)]
    if kind == "toeplitz":
        m = _block_matrix(g, plus, plus)
    elif kind == "shifted":
        m = _block_matrix(apply_sigma(g), plus, plus)
    elif kind == "hankel_B":
        m = _block_matrix(g, plus, minus)
    else:
        m = _block_matrix(g, minus, plus)
    return ToeplitzTruncation(m, N + 1, kind)


def scalar_compress(f: LaurentSeries, N: int, kind: str = "toeplitz") -> np.ndarray:
    """Scalar analogue of compress for a single Laurent series."""
    if kind == "toeplitz":
        rows = cols = list(range(N + 1))
    elif kind == "hankel_B":
        rows = list(range(N + 1))
        cols = [-(q + 1) for q in range(N + 1)]
    elif kind == "hankel_C":
        rows = [-(q + 1) for q in range(N + 1)]
        cols = list(range(N + 1))
    else:
        raise ValueError(f"unsupported scalar kind {kind!r}")
    out = np.zeros((len(rows), len(cols)), dtype=complex)
    for r, p in enumerate(rows):
        for c, q in enumerate(cols):
            out[r, c] = f.coeff(p - q)
    return out


def direct_shifted(g: LoopMatrix, N: int) -> np.ndarray:
    """Compression of multiplication by g onto the image of the plus space
    under w = [[0,1],[z,0]], basis ordered w(e_1 z^k), w(e_2 z^k).

    w e_1 z^k = e_2 z^{k+1} and w e_2 z^k = e_1 z^k, so the basis mixes
    components and powers; entry (row, col) = (g_{p_row - p_col})_{i_row, i_col}.
    Used only to validate that compress(..., "shifted") is this operator.
    """
    basis = []
    for k in range(N + 1):
        basis.append((1, k + 1))  # component index 1 means e_2
        basis.append((0, k))
    out = np.zeros((2 * (N + 1), 2 * (N + 1)), dtype=complex)
    for r, (ir, pr) in enumerate(basis):
        for c, (ic, pc) in enumerate(basis):
            out[r, c] = fourier_block(g, pr - pc)[ir, ic]
    return out


def det_AstarA(g: LoopMatrix, N: int) -> float:
    """Magnitude |det A_N(g)| = det(A_N^* A_N)^(1/2) of the plus compression."""
    sign, logabs = np.linalg.slogdet(compress(g, N, "toeplitz").matrix)
    if sign == 0:
        return 0.0
    return float(np.exp(logabs))


@dataclass(frozen=True)
class BirkhoffFactors:
    """g = g_minus * g_zero * g_plus with g_minus(inf) = g_plus(0) = I."""

    g_minus: LoopMatrix
    g_zero: np.ndarray
    g_plus: LoopMatrix
    residual: float
    rcond: float
    minus_spill: float


def _residual_grid(degree_hint: int) -> CircleGrid:
    width = 2 * degree_hint + 2
    return CircleGrid(1 << max(6, int(width).bit_length()))


def _product_defect(g: LoopMatrix, factors: list, grid: CircleGrid) -> float:
    """max_k ||g(z_k) - prod factors(z_k)||_2; factors are loops or constants."""
    acc = None
    for f in factors:
        vals = (
            np.broadcast_to(f, (grid.point_count, 2, 2))
            if isinstance(f, np.ndarray)
            else f.evaluate(grid.points)
        )
        acc = vals.copy() if acc is None else acc @ vals
    diff = g.evaluate(grid.points) - acc
    return float(np.linalg.svd(diff, compute_uv=False)[..., 0].max())


def birkhoff(g: LoopMatrix, N: int, tol: float = 1e-10) -> BirkhoffFactors:
    """Birkhoff factorization computed from the truncated Toeplitz corner.

    Solves A_N(g) X = [e_1, e_2]; the two solution columns are the Taylor
    coefficients of (g_zero g_plus)^{-1}, which is inverted as a 2x2 series
    matrix; g_minus = g * (g_zero g_plus)^{-1} truncated to powers <= 0.

    Raises NotInvertible when the reciprocal condition number of the corner
    falls below tol.
    """
    A = compress(g, N, "toeplitz").matrix
    sv = np.linalg.svd(A, compute_uv=False)
    rcond = float(sv[-1] / sv[0]) if sv[0] > 0 else 0.0
    if not np.isfinite(rcond) or rcond < tol:
        raise NotInvertible(
            f"plus compression at N={N} has rcond {rcond:.3e} below {tol:.1e}"
        )
    rhs = np.zeros((A.shape[0], 2), dtype=complex)
    rhs[0, 0] = 1.0
    rhs[1, 1] = 1.0
    X = np.linalg.solve(A, rhs)

    def col_series(vec) -> tuple[LaurentSeries, LaurentSeries]:
        return (
            LaurentSeries(0, tuple(vec[0::2])),
            LaurentSeries(0, tuple(vec[1::2])),
        )

    m11, m21 = col_series(X[:, 0])
    m12, m22 = col_series(X[:, 1])
    inv_gp = LoopMatrix(m11, m12, m21, m22)  # this is (g_zero g_plus)^{-1}

    det = truncate(inv_gp.det(), 0, N)
    inv_det = invert_series(det, N)
    h = LoopMatrix(
        truncate(m22 * inv_det, 0, N),
        truncate(-1.0 * m12 * inv_det, 0, N),
        truncate(-1.0 * m21 * inv_det, 0, N),
        truncate(m11 * inv_det, 0, N),
    )
    g_zero = np.array(
        [[h.a.coeff(0), h.b.coeff(0)], [h.c.coeff(0), h.d.coeff(0)]], dtype=complex
    )
    g_plus = LoopMatrix.from_constant(np.linalg.inv(g_zero)) @ h

    raw_minus = g @ inv_gp
    spill = max(
        truncate(e, 1, None).coefficient_max() for e in raw_minus.entries()
    )
    g_minus = raw_minus.truncate(-(g.max_degree() + N), 0)

    grid = _residual_grid(N + g.max_degree())
    residual = _product_defect(g, [g_minus, g_zero, g_plus], grid)
    return BirkhoffFactors(g_minus, g_zero, g_plus, residual, rcond, spill)


@dataclass(frozen=True)
class TriangularFactors:
    """g = l * diag(m0 a0, (m0 a0)^{-1}) * u.

    l has powers <= 0 with l(inf) lower unipotent, u has powers >= 0 with
    u(0) upper unipotent, |m0| = 1 and a0 > 0.
    """

    l: LoopMatrix
    m_zero: complex
    a_zero: float
    u: LoopMatrix
    residual: float


def triangular(g: LoopMatrix, N: int, tol: float = 1e-10) -> TriangularFactors:
    """Triangular refinement of the Birkhoff factorization.

    Splits the constant factor as LDU; the unipotent constants are absorbed
    into g_minus and g_plus.  Raises ShiftedNotInvertible when the (1,1)
    entry of the constant factor is below tol in magnitude, which is exactly
    when the shifted compression degenerates.
    """
    bf = birkhoff(g, N, tol)
    alpha = bf.g_zero[0, 0]
    if abs(alpha) <= tol:
        raise ShiftedNotInvertible(
            f"constant Birkhoff factor has |(1,1)| = {abs(alpha):.3e}"
        )
    beta = bf.g_zero[0, 1]
    gamma = bf.g_zero[1, 0]
    l_const = np.array([[1.0, 0.0], [gamma / alpha, 1.0]], dtype=complex)
    u_const = np.array([[1.0, beta / alpha], [0.0, 1.0]], dtype=complex)
    l = bf.g_minus @ LoopMatrix.from_constant(l_const)
    u = LoopMatrix.from_constant(u_const) @ bf.g_plus
    m_zero = alpha / abs(alpha)
    a_zero = float(abs(alpha))
    middle = np.array([[alpha, 0.0], [0.0, 1.0 / alpha]], dtype=complex)
    grid = _residual_grid(N + g.max_degree())
    residual = _product_defect(g, [l, middle, u], grid)
    return TriangularFactors(l, complex(m_zero), a_zero, u, residual)


def winding_number(f: LaurentSeries, grid: CircleGrid | None = None, tol: float = 1e-9) -> int:
    """Degree of f restricted to the circle, by summed phase increments.

    Raises VanishingSymbol when |f| dips below tol on the grid.
    """
    if grid is None:
        grid = CircleGrid()
    vals = f.evaluate(grid.points)
    mags = np.abs(vals)
    if mags.min() < tol:
        raise VanishingSymbol(
            f"|f| reaches {mags.min():.3e} on the grid, winding undefined"
        )
    phases = np.angle(vals)
    d = np.diff(np.concatenate([phases, phases[:1]]))
    d = (d + np.pi) % (2 * np.pi) - np.pi
    total = float(d.sum() / (2 * np.pi))
    n = round(total)
    if abs(total - n) > 0.25:
        raise ValueError("grid too coarse to resolve the winding number")
    return int(n)


def _kernel_dim(m: np.ndarray, rel_tol: float = 1e-8) -> int:
    sv = np.linalg.svd(m, compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return m.shape[1]
    small = int(np.sum(sv < rel_tol * sv[0]))
    return small + max(0, m.shape[1] - sv.size)


def toeplitz_index(f: LaurentSeries, N: int) -> int:
    """Numerical Fredholm index of the scalar Toeplitz operator of f.

    Uses tall rectangular truncations (columns z^0..z^N, rows extended past
    the symbol's bandwidth) so genuine kernel vectors are not truncated away:
    index = dim ker T(f) - dim ker T(f*).
    """
    band = max(abs(f.min_power), abs(f.max_power), 1) if not f.is_zero else 1
    rows = range(N + band + 1)
    cols = range(N + 1)

    def tall(sym: LaurentSeries) -> np.ndarray:
        return np.array([[sym.coeff(p - q) for q in cols] for p in rows], dtype=complex)

    return _kernel_dim(tall(f)) - _kernel_dim(tall(star(f)))
