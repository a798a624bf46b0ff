"""Finite Laurent series on the unit circle and 2x2 loops built from them.

Contents:
  LaurentSeries  -- immutable series sum_n c_n z^n with finitely many terms
  LoopMatrix     -- 2x2 matrix of LaurentSeries, entries named a, b, c, d
  CircleGrid     -- uniform grid on |z| = 1 with FFT analysis/synthesis
  star, project, mul, invert_series, apply_sigma, unitarity_defect
  JSON (de)serialization for series and loops

Coefficients are stored as a contiguous block from min_power upward; exact
zeros at the ends are trimmed on construction so equality of values implies
equality of representations.  Numerical cleanup is never implicit: use
cleanup(f, tol) to drop small coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ParseError, ZeroConstantTerm

__all__ = [
    "LaurentSeries",
    "LoopMatrix",
    "CircleGrid",
    "star",
    "project",
    "mul",
    "invert_series",
    "apply_sigma",
    "unitarity_defect",
    "cleanup",
    "truncate",
    "series_to_json",
    "series_from_json",
    "loop_to_json",
    "loop_from_json",
]


def _trim(min_power: int, coeffs: list[complex]) -> tuple[int, tuple[complex, ...]]:
    # drop exact zeros at both ends; canonical zero is (0, ())
    lo = 0
    hi = len(coeffs)
    while lo < hi and coeffs[lo] == 0:
        lo += 1
    while hi > lo and coeffs[hi - 1] == 0:
        hi -= 1
    if lo == hi:
        return 0, ()
    return min_power + lo, tuple(complex(c) for c in coeffs[lo:hi])


@dataclass(frozen=True)
class LaurentSeries:
    """Finite Laurent series sum_{n} c_n z^n.

    `coefficients[k]` is the coefficient of z^(min_power + k).  The block is
    contiguous; missing interior powers are stored as explicit zeros.
    """

    min_power: int = 0
    coefficients: tuple[complex, ...] = ()

    def __post_init__(self):
        mp, cs = _trim(self.min_power, list(self.coefficients))
        object.__setattr__(self, "min_power", mp)
        object.__setattr__(self, "coefficients", cs)

    # --- constructors -------------------------------------------------

    @staticmethod
    def zero() -> "LaurentSeries":
        return LaurentSeries(0, ())

    @staticmethod
    def one() -> "LaurentSeries":
        return LaurentSeries(0, (1.0 + 0.0j,))

    @staticmethod
    def monomial(power: int, coeff: complex = 1.0) -> "LaurentSeries":
        return LaurentSeries(power, (coeff,))

    @staticmethod
    def from_dict(terms: dict[int, complex]) -> "LaurentSeries":
        if not terms:
            return LaurentSeries.zero()
        lo = min(terms)
        hi = max(terms)
        coeffs = [complex(terms.get(n, 0.0)) for n in range(lo, hi + 1)]
        return LaurentSeries(lo, tuple(coeffs))

    # --- basic queries ------------------------------------------------

    @property
    def max_power(self) -> int:
        return self.min_power + len(self.coefficients) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    def coeff(self, n: int) -> complex:
        k = n - self.min_power
        if 0 <= k < len(self.coefficients):
            return self.coefficients[k]
        return 0.0 + 0.0j

    def as_dict(self) -> dict[int, complex]:
        return {
            self.min_power + k: c
            for k, c in enumerate(self.coefficients)
            if c != 0
        }

    def coefficient_norm(self) -> float:
        """l2 norm of the coefficient sequence."""
        return float(np.sqrt(sum(abs(c) ** 2 for c in self.coefficients)))

    def coefficient_max(self) -> float:
        return max((abs(c) for c in self.coefficients), default=0.0)

    # --- arithmetic ---------------------------------------------------

    def __add__(self, other: "LaurentSeries") -> "LaurentSeries":
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        lo = min(self.min_power, other.min_power)
        hi = max(self.max_power, other.max_power)
        coeffs = [self.coeff(n) + other.coeff(n) for n in range(lo, hi + 1)]
        return LaurentSeries(lo, tuple(coeffs))

    def __neg__(self) -> "LaurentSeries":
        return LaurentSeries(self.min_power, tuple(-c for c in self.coefficients))

    def __sub__(self, other: "LaurentSeries") -> "LaurentSeries":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, LaurentSeries):
            if self.is_zero or other.is_zero:
                return LaurentSeries.zero()
            n = len(self.coefficients)
            m = len(other.coefficients)
            out = [0.0 + 0.0j] * (n + m - 1)
            for i, ci in enumerate(self.coefficients):
                if ci == 0:
                    continue
                for j, cj in enumerate(other.coefficients):
                    out[i + j] += ci * cj
            return LaurentSeries(self.min_power + other.min_power, tuple(out))
        return LaurentSeries(
            self.min_power, tuple(complex(other) * c for c in self.coefficients)
        )

    def __rmul__(self, other):
        return self.__mul__(other)

    def shift(self, k: int) -> "LaurentSeries":
        """Multiply by z^k."""
        if self.is_zero:
            return self
        return LaurentSeries(self.min_power + k, self.coefficients)

    def conjugate_coefficients(self) -> "LaurentSeries":
        """Conjugate each coefficient without moving powers (not the star)."""
        return LaurentSeries(
            self.min_power, tuple(c.conjugate() for c in self.coefficients)
        )

    # --- evaluation ---------------------------------------------------

    def evaluate(self, z):
        """Evaluate at points z (scalar or ndarray) by Horner on z and 1/z."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        # positive/zero powers via Horner from the top
        top = self.max_power
        if not self.is_zero:
            for n in range(top, self.min_power - 1, -1):
                out = out * z + self.coeff(n)
            if self.min_power != 0:
                out = out * z ** float(self.min_power)
        return out


@dataclass(frozen=True)
class LoopMatrix:
    """2x2 matrix of Laurent series; a is (1,1), b (1,2), c (2,1), d (2,2)."""

    a: LaurentSeries
    b: LaurentSeries
    c: LaurentSeries
    d: LaurentSeries

    @staticmethod
    def identity() -> "LoopMatrix":
        one = LaurentSeries.one()
        zero = LaurentSeries.zero()
        return LoopMatrix(one, zero, zero, one)

    @staticmethod
    def diagonal(top: LaurentSeries, bottom: LaurentSeries) -> "LoopMatrix":
        zero = LaurentSeries.zero()
        return LoopMatrix(top, zero, zero, bottom)

    @staticmethod
    def from_constant(m) -> "LoopMatrix":
        m = np.asarray(m, dtype=complex)
        return LoopMatrix(
            LaurentSeries(0, (m[0, 0],)),
            LaurentSeries(0, (m[0, 1],)),
            LaurentSeries(0, (m[1, 0],)),
            LaurentSeries(0, (m[1, 1],)),
        )

    def __matmul__(self, other: "LoopMatrix") -> "LoopMatrix":
        return LoopMatrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def adjoint(self) -> "LoopMatrix":
        """Pointwise conjugate transpose on |z| = 1."""
        return LoopMatrix(star(self.a), star(self.c), star(self.b), star(self.d))

    def det(self) -> LaurentSeries:
        return self.a * self.d - self.b * self.c

    def entries(self) -> tuple[LaurentSeries, LaurentSeries, LaurentSeries, LaurentSeries]:
        return (self.a, self.b, self.c, self.d)

    def scale(self, s: complex) -> "LoopMatrix":
        return LoopMatrix(s * self.a, s * self.b, s * self.c, s * self.d)

    def max_degree(self) -> int:
        """Largest |power| present in any entry (0 for the zero loop)."""
        deg = 0
        for f in self.entries():
            if not f.is_zero:
                deg = max(deg, abs(f.min_power), abs(f.max_power))
        return deg

    def truncate(self, lo: int, hi: int) -> "LoopMatrix":
        return LoopMatrix(
            truncate(self.a, lo, hi),
            truncate(self.b, lo, hi),
            truncate(self.c, lo, hi),
            truncate(self.d, lo, hi),
        )

    def evaluate(self, z) -> np.ndarray:
        """Values at points z; returns shape z.shape + (2, 2)."""
        z = np.asarray(z, dtype=complex)
        out = np.empty(z.shape + (2, 2), dtype=complex)
        out[..., 0, 0] = self.a.evaluate(z)
        out[..., 0, 1] = self.b.evaluate(z)
        out[..., 1, 0] = self.c.evaluate(z)
        out[..., 1, 1] = self.d.evaluate(z)
        return out


# --- module-level operations ------------------------------------------


def star(f: LaurentSeries) -> LaurentSeries:
    """Adjoint symbol f*(z) = sum_n conj(c_n) z^{-n} (equals conj(f) on |z|=1)."""
    if f.is_zero:
        return f
    coeffs = tuple(c.conjugate() for c in reversed(f.coefficients))
    return LaurentSeries(-f.max_power, coeffs)


def project(f: LaurentSeries, half: str) -> LaurentSeries:
    """Hardy projection.

    half = "plus" keeps powers >= 0, half = "minus" keeps powers <= -1.
    """
    if half == "plus":
        return truncate(f, 0, None)
    if half == "minus":
        return truncate(f, None, -1)
    raise ValueError(f"half must be 'plus' or 'minus', got {half!r}")


def truncate(f: LaurentSeries, lo: int | None, hi: int | None) -> LaurentSeries:
    """Keep powers n with lo <= n <= hi (None means unbounded on that side)."""
    if f.is_zero:
        return f
    lo_eff = f.min_power if lo is None else max(lo, f.min_power)
    hi_eff = f.max_power if hi is None else min(hi, f.max_power)
    if lo_eff > hi_eff:
        return LaurentSeries.zero()
    start = lo_eff - f.min_power
    stop = hi_eff - f.min_power + 1
    return LaurentSeries(lo_eff, f.coefficients[start:stop])


def cleanup(f: LaurentSeries, tol: float) -> LaurentSeries:
    """Drop coefficients with |c| <= tol.  Explicit, never done implicitly."""
    coeffs = tuple(0.0 if abs(c) <= tol else c for c in f.coefficients)
    return LaurentSeries(f.min_power, coeffs)


def mul(f: LaurentSeries, g: LaurentSeries) -> LaurentSeries:
    """Product by exact coefficient convolution."""
    return f * g


def invert_series(d: LaurentSeries, order: int) -> LaurentSeries:
    """Formal inverse of a power series, truncated to powers 0..order.

    Parameters
    ----------
    d : LaurentSeries
        Must have no negative powers and a nonzero constant term.
    order : int
        Highest power retained in the inverse.

    Raises
    ------
    ZeroConstantTerm
        If d(0) == 0.
    """
    if not d.is_zero and d.min_power < 0:
        raise ValueError("invert_series expects a power series (no negative powers)")
    d0 = d.coeff(0)
    if d0 == 0:
        raise ZeroConstantTerm("series has zero constant term")
    inv = [0.0 + 0.0j] * (order + 1)
    inv[0] = 1.0 / d0
    # standard recursion: (d * inv)_n = 0 for n >= 1
    for n in range(1, order + 1):
        acc = 0.0 + 0.0j
        for k in range(1, min(n, d.max_power if not d.is_zero else 0) + 1):
            acc += d.coeff(k) * inv[n - k]
        inv[n] = -acc / d0
    return LaurentSeries(0, tuple(inv))


def apply_sigma(g: LoopMatrix) -> LoopMatrix:
    """Outer involution swapping the two root subgroup families.

    Conjugation by the off-diagonal loop [[0, 1], [z, 0]]:
    [[a, b], [c, d]] -> [[d, c/z], [b z, a]].
    """
    return LoopMatrix(g.d, g.c.shift(-1), g.b.shift(1), g.a)


@dataclass(frozen=True)
class CircleGrid:
    """Uniform grid z_k = exp(2 pi i k / point_count) on the unit circle.

    analyze/synthesize are exact inverses for series whose power window fits
    inside point_count samples; callers keep point_count >= 2*max_degree + 1.
    """

    point_count: int = 512

    def __post_init__(self):
        if self.point_count < 1:
            raise ValueError("point_count must be positive")

    @property
    def points(self) -> np.ndarray:
        k = np.arange(self.point_count)
        return np.exp(2j * np.pi * k / self.point_count)

    def synthesize(self, f: LaurentSeries) -> np.ndarray:
        """Values of f on the grid via inverse FFT placement."""
        p = self.point_count
        if not f.is_zero and len(f.coefficients) > p:
            raise ValueError("series support exceeds grid resolution")
        spec = np.zeros(p, dtype=complex)
        for n, c in f.as_dict().items():
            spec[n % p] += c
        return np.fft.ifft(spec) * p

    def analyze(self, values: np.ndarray, min_power: int, max_power: int) -> LaurentSeries:
        """Fourier coefficients of sampled values for powers in [min_power, max_power].

        Aliases by point_count; the window must fit inside one period.
        """
        if max_power - min_power + 1 > self.point_count:
            raise ValueError("requested window exceeds grid resolution")
        spec = np.fft.fft(np.asarray(values, dtype=complex)) / self.point_count
        coeffs = [spec[n % self.point_count] for n in range(min_power, max_power + 1)]
        return LaurentSeries(min_power, tuple(coeffs))


def unitarity_defect(g: LoopMatrix, grid: CircleGrid | None = None) -> float:
    """max_k || g(z_k)^H g(z_k) - I ||_2 over the grid."""
    if grid is None:
        grid = CircleGrid()
    vals = g.evaluate(grid.points)
    gram = np.conj(np.swapaxes(vals, -1, -2)) @ vals
    gram[..., 0, 0] -= 1.0
    gram[..., 1, 1] -= 1.0
    s = np.linalg.svd(gram, compute_uv=False)
    return float(s[..., 0].max())


# --- JSON -------------------------------------------------------------


def series_to_json(f: LaurentSeries) -> dict:
    terms = [
        {"power": n, "re": float(c.real), "im": float(c.imag)}
        for n, c in sorted(f.as_dict().items())
    ]
    return {"terms": terms}


def series_from_json(doc: dict) -> LaurentSeries:
    if not isinstance(doc, dict) or "terms" not in doc:
        raise ParseError("series document must be an object with a 'terms' list")
    terms = doc["terms"]
    if not isinstance(terms, list):
        raise ParseError("'terms' must be a list")
    acc: dict[int, complex] = {}
    for t in terms:
        try:
            power = int(t["power"])
            val = complex(float(t["re"]), float(t["im"]))
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"malformed series term {t!r}") from e
        acc[power] = acc.get(power, 0.0) + val
    return LaurentSeries.from_dict(acc)


def loop_to_json(g: LoopMatrix) -> dict:
    return {
        "a": series_to_json(g.a),
        "b": series_to_json(g.b),
        "c": series_to_json(g.c),
        "d": series_to_json(g.d),
    }


def loop_from_json(doc: dict) -> LoopMatrix:
    if not isinstance(doc, dict):
        raise ParseError("loop document must be an object")
    try:
        return LoopMatrix(
            series_from_json(doc["a"]),
            series_from_json(doc["b"]),
            series_from_json(doc["c"]),
            series_from_json(doc["d"]),
        )
    except KeyError as e:
        raise ParseError(f"loop document missing entry {e}") from e
