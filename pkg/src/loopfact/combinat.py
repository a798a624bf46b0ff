"""Exact combinatorics of the residue coefficient of the triangular factor.

The residue coefficient of the upper-triangular correction, as a function
of the lower-family parameters, is a polynomial with nonnegative integer
coefficients in the parameters and their conjugates.  This module
evaluates it by a tail recursion over any commutative ring, expands it
exactly with a dict-backed polynomial type (conjugates treated as
independent letters), extracts the grouped coefficient tables, and checks
them against an independent signed enumeration of cluster decompositions.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from math import factorial

import numpy as np

from .errors import ConsistencyViolation, InvalidIndex, ParseError
from .laurent import LaurentSeries
from .rootsub import RootParams

__all__ = [
    "IndexPair",
    "CoefficientTable",
    "x1_recursion",
    "full_x",
    "b_sum",
    "coefficient_tables",
    "certify_tables",
    "cluster_coefficient",
    "enumerate_decompositions",
    "subindex_reductions",
    "s_identity_check",
    "zeta1_four_vars",
]


# --- tail recursion over a generic commutative ring -------------------


def _compositions(total, parts, max_part):
    """Ordered tuples of `parts` integers in 1..max_part summing to total."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    lo = max(1, total - (parts - 1) * max_part)
    hi = min(max_part, total - (parts - 1))
    for first in range(lo, hi + 1):
        for rest in _compositions(total - first, parts - 1, max_part):
            yield (first,) + rest


def _suffix_table(pairs):
    """Residue values of every suffix of a finite parameter sequence.

    pairs[k] = (value, conjugate_value); entries may be complex numbers,
    Fractions, or polynomial objects, anything supporting + and * with
    ints.  Returns {start: value of the residue on (w_start, .., w_M)}.
    """
    count = len(pairs)
    cur = {}
    for m in range(1, count + 1):
        w, wbar = pairs[m - 1]
        nxt = {m: w}
        for i in range(m - 1, 0, -1):
            nloc = m - i
            acc = 0
            power = 1
            for s in range(0, nloc):
                total = s * (nloc + 1) + 1
                csum = 0
                for comp in _compositions(total, s + 1, nloc):
                    prod = 1
                    for part in comp:
                        prod = prod * cur[i + part - 1]
                    csum = csum + prod
                acc = acc + csum * power
                power = power * wbar
            nxt[i] = (1 + w * wbar) * acc
        cur = nxt
    return cur


def x1_recursion(params: RootParams, count: int) -> complex:
    """Residue coefficient on the first `count` lower-family parameters."""
    if params.side != "zeta":
        raise ValueError("x1_recursion expects lower-family parameters")
    if params.support > count:
        raise ValueError(f"support {params.support} exceeds count {count}")
    if count == 0:
        return 0j
    vals = [complex(params.value_at(i)) for i in range(1, count + 1)]
    table = _suffix_table([(v, v.conjugate()) for v in vals])
    return complex(table[1])


def full_x(params: RootParams) -> LaurentSeries:
    """Positive-power series whose conjugate coefficients are the suffix
    residues; directly comparable with the triangular-data route."""
    if params.side != "zeta":
        raise ValueError("full_x expects lower-family parameters")
    if params.support == 0:
        return LaurentSeries.zero()
    vals = [complex(params.value_at(i)) for i in range(1, params.support + 1)]
    table = _suffix_table([(v, v.conjugate()) for v in vals])
    return LaurentSeries.from_dict(
        {j: complex(table[j]).conjugate() for j in table}
    )


def b_sum(params: RootParams, n: int, m: int) -> complex:
    """Hermitian pairing sum over the tail: sum_{k>=n} v_k conj(v_{k+m})."""
    if params.side != "zeta":
        raise ValueError("b_sum expects lower-family parameters")
    total = 0j
    for k in range(n, params.support + 1):
        total += complex(params.value_at(k)) * complex(params.value_at(k + m)).conjugate()
    return total


# --- exact polynomials, conjugates as independent letters -------------


def _merge_parts(a, b):
    d = dict(a)
    for idx, e in b:
        d[idx] = d.get(idx, 0) + e
    return tuple(sorted(d.items()))


def _key_weight(key):
    # weight counts only plain letters; it bounds the conjugate side
    return sum(idx * e for idx, e in key[0])


class _Poly:
    """Integer polynomial in letters z_i and zb_i, monomials keyed by a
    pair of sorted (index, exponent) tuples.  An optional weight cap
    prunes monomials whose plain-letter weight exceeds it; pruning is an
    ideal, so capped arithmetic stays exact below the cap."""

    __slots__ = ("terms", "cap")

    def __init__(self, terms=None, cap=None):
        self.terms = {k: c for k, c in (terms or {}).items() if c != 0}
        self.cap = cap

    @staticmethod
    def variable(index, barred, cap=None):
        key = ((), ((index, 1),)) if barred else (((index, 1),), ())
        return _Poly({key: 1}, cap)

    def _coerce(self, other):
        if isinstance(other, _Poly):
            return other
        if isinstance(other, int):
            return _Poly({((), ()): other} if other else {}, self.cap)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return _Poly(out, self.cap if self.cap is not None else other.cap)

    __radd__ = __add__

    def __neg__(self):
        return _Poly({k: -c for k, c in self.terms.items()}, self.cap)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        cap = self.cap if self.cap is not None else other.cap
        out = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                key = (_merge_parts(k1[0], k2[0]), _merge_parts(k1[1], k2[1]))
                if cap is not None and _key_weight(key) > cap:
                    continue
                out[key] = out.get(key, 0) + c1 * c2
        return _Poly(out, cap)

    __rmul__ = __mul__

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.terms == other.terms

    def __bool__(self):
        return bool(self.terms)


def _contains_index(key, idx):
    return any(i == idx for i, _ in key[0]) or any(i == idx for i, _ in key[1])


def _divide_by_letter(poly, idx):
    """Exact division by the plain letter z_idx."""
    out = {}
    for key, c in poly.terms.items():
        zpart = dict(key[0])
        if zpart.get(idx, 0) < 1:
            raise ConsistencyViolation(
                f"monomial not divisible by letter {idx}"
            )
        zpart[idx] -= 1
        if zpart[idx] == 0:
            del zpart[idx]
        out[(tuple(sorted(zpart.items())), key[1])] = c
    return _Poly(out, poly.cap)


def _pair_order(key, idx):
    return min(dict(key[0]).get(idx, 0), dict(key[1]).get(idx, 0))


def _divide_one_plus_u(poly, idx):
    """Exact division by 1 + z_idx zb_idx via ascent in the paired order."""
    if not poly.terms:
        return _Poly({}, poly.cap)
    by_ord = {}
    for key, c in poly.terms.items():
        by_ord.setdefault(_pair_order(key, idx), {})[key] = c
    u = _Poly({(((idx, 1),), ((idx, 1),)): 1}, poly.cap)
    max_ord = max(by_ord)
    parts = [_Poly(by_ord.get(0, {}), poly.cap)]
    for d in range(1, max_ord + 1):
        parts.append(_Poly(by_ord.get(d, {}), poly.cap) - u * parts[-1])
    result = _Poly({}, poly.cap)
    for p in parts:
        result = result + p
    # quotient weight w only reads dividend weights <= w, so under a cap
    # the result is right below the cap even though the tail is junk;
    # exact mode demands a clean multiply-back
    if poly.cap is None and not (result + u * result) == poly:
        raise ConsistencyViolation(
            f"division by 1 + |z_{idx}|^2 left a remainder"
        )
    return result


# --- index pairs and coefficient tables -------------------------------


@dataclass(frozen=True)
class IndexPair:
    """Grouped multi-index: i = (i_0, .., i_L) and j = (j_1, .., j_L),
    both nondecreasing and positive, with sum(i) - sum(j) = 1."""

    i: tuple
    j: tuple

    def __post_init__(self):
        i, j = tuple(self.i), tuple(self.j)
        object.__setattr__(self, "i", i)
        object.__setattr__(self, "j", j)
        if len(i) != len(j) + 1:
            raise InvalidIndex(f"need len(i) = len(j) + 1, got {len(i)}, {len(j)}")
        for v in i + j:
            if not isinstance(v, int) or v < 1:
                raise InvalidIndex(f"indices must be positive integers, got {v!r}")
        if any(a > b for a, b in zip(i, i[1:])) or any(
            a > b for a, b in zip(j, j[1:])
        ):
            raise InvalidIndex("index lists must be nondecreasing")
        if sum(i) - sum(j) != 1:
            raise InvalidIndex(
                f"sum(i) - sum(j) must be 1, got {sum(i) - sum(j)}"
            )

    @property
    def L(self) -> int:
        return len(self.j)

    @property
    def weight(self) -> int:
        return sum(self.i)

    def interlacing_ok(self) -> bool:
        """The full ordering constraints: i_l <= j_l and i_{l-1} < j_l."""
        ok_pairwise = all(self.i[l] <= self.j[l - 1] for l in range(1, self.L + 1))
        ok_strict = all(self.i[l - 1] < self.j[l - 1] for l in range(1, self.L + 1))
        return ok_pairwise and ok_strict


@dataclass
class CoefficientTable:
    """Positive integer coefficients of the grouped residue expansion,
    keyed by full index pairs (the group index is i[0])."""

    entries: dict = field(default_factory=dict)
    support: int = 0
    weight_cap: int | None = None

    def group(self, n: int) -> dict:
        return {p: c for p, c in self.entries.items() if p.i[0] == n}

    def evaluate_group(self, n: int, values, conjugates=None) -> complex:
        """Evaluate the group-n polynomial at values[index]; conjugates
        default to the complex conjugates of values."""
        total = 0j
        for pair, c in self.entries.items():
            if pair.i[0] != n:
                continue
            term = complex(c)
            for idx in pair.i[1:]:
                term *= values.get(idx, 0j)
            for idx in pair.j:
                cv = (
                    conjugates.get(idx, 0j)
                    if conjugates is not None
                    else complex(values.get(idx, 0j)).conjugate()
                )
                term *= cv
            total += term
        return total

    def to_json(self) -> str:
        rows = [
            {"i": list(p.i), "j": list(p.j), "c": int(c)}
            for p, c in sorted(self.entries.items(), key=lambda kv: (kv[0].i, kv[0].j))
        ]
        return json.dumps(
            {
                "schema_version": 1,
                "support": self.support,
                "weight_cap": self.weight_cap,
                "entries": rows,
            },
            sort_keys=True,
        )

    @staticmethod
    def from_json(text: str) -> "CoefficientTable":
        try:
            data = json.loads(text)
            entries = {
                IndexPair(tuple(row["i"]), tuple(row["j"])): int(row["c"])
                for row in data["entries"]
            }
            return CoefficientTable(entries, int(data["support"]), data["weight_cap"])
        except (KeyError, TypeError, ValueError, InvalidIndex) as exc:
            raise ParseError(f"bad coefficient table payload: {exc}") from exc


def coefficient_tables(support: int, weight_cap: int | None = 12) -> CoefficientTable:
    """Expand the residue exactly and split it into per-group tables.

    Groups are peeled in ascending index order: every monomial holding
    index n belongs to group n because later groups involve only larger
    indices.  Division by the group letter and the paired factors is
    exact; entries above the weight cap are dropped since capped
    arithmetic does not certify them.
    """
    if support < 1:
        raise ValueError("support must be at least 1")
    pairs = [
        (_Poly.variable(i, False, weight_cap), _Poly.variable(i, True, weight_cap))
        for i in range(1, support + 1)
    ]
    remainder = _suffix_table(pairs)[1]
    entries = {}
    for n in range(1, support + 1):
        sel = {k: c for k, c in remainder.terms.items() if _contains_index(k, n)}
        remainder = remainder - _Poly(sel, weight_cap)
        if not sel:
            continue
        group = _Poly(sel, weight_cap)
        s_poly = _divide_by_letter(group, n)
        for k in range(n + 1, support + 1):
            s_poly = _divide_one_plus_u(s_poly, k)
        if weight_cap is not None:
            # divisions consumed weight n, so only this region is certified
            s_poly = _Poly(
                {k: c for k, c in s_poly.terms.items() if _key_weight(k) <= weight_cap - n},
                weight_cap,
            )
        if n == 1:
            if not s_poly == 1:
                raise ConsistencyViolation("group 1 must reduce to the constant 1")
            continue
        for key, c in s_poly.terms.items():
            itail = tuple(idx for idx, e in key[0] for _ in range(e))
            jlist = tuple(idx for idx, e in key[1] for _ in range(e))
            if len(itail) != len(jlist):
                raise ConsistencyViolation("unbalanced monomial in a group table")
            pair = IndexPair((n,) + itail, jlist)
            if weight_cap is not None and pair.weight > weight_cap:
                continue
            if not isinstance(c, int) or c <= 0:
                raise ConsistencyViolation(
                    f"coefficient for {pair.i}/{pair.j} is {c!r}, not a positive integer"
                )
            entries[pair] = c
    if remainder.terms:
        raise ConsistencyViolation("residue monomials left outside all groups")
    return CoefficientTable(entries, support, weight_cap)


def certify_tables(support: int, trials: int | None = None, seed: int = 0) -> CoefficientTable:
    """Build the uncapped tables and certify them by exact identity
    testing: the grouped form must reproduce the direct recursion at
    random rational points with the conjugates sampled independently."""
    table = coefficient_tables(support, weight_cap=None)
    if trials is None:
        trials = support + 2
    rng = np.random.default_rng(seed)

    def draw():
        return Fraction(int(rng.integers(-6, 7)), int(rng.integers(1, 5)))

    for trial in range(trials):
        zs = {i: draw() for i in range(1, support + 1)}
        zb = {i: draw() for i in range(1, support + 1)}
        direct = _suffix_table([(zs[i], zb[i]) for i in range(1, support + 1)])[1]
        structured = Fraction(0)
        for n in range(1, support + 1):
            tail = Fraction(1)
            for k in range(n + 1, support + 1):
                tail *= 1 + zs[k] * zb[k]
            if n == 1:
                s_val = Fraction(1)
            else:
                s_val = Fraction(0)
                for pair, c in table.entries.items():
                    if pair.i[0] != n:
                        continue
                    term = Fraction(c)
                    for idx in pair.i[1:]:
                        term *= zs[idx]
                    for idx in pair.j:
                        term *= zb[idx]
                    s_val += term
            structured += zs[n] * tail * s_val
        if direct != structured:
            raise ConsistencyViolation(
                f"identity testing failed at sample {trial}: {direct} != {structured}"
            )
    return table


# --- signed cluster decompositions ------------------------------------


def _alternates(ivals, jvals, ends_with_i):
    """Strict interlacing i1 < j1 < i2 < .. ; balanced clusters end with
    a j, the distinguished cluster ends with an extra i."""
    merged = []
    for a, b in zip(ivals, jvals):
        merged.extend((a, b))
    if ends_with_i:
        if len(ivals) != len(jvals) + 1:
            return False
        merged.append(ivals[-1])
    elif len(ivals) != len(jvals):
        return False
    return all(x < y for x, y in zip(merged, merged[1:]))


def _cluster_splits(rest_i, rest_j):
    """Partitions of the leftover index values into balanced strictly
    interlacing clusters; anchored on the smallest i to cut repeats."""
    if not rest_i and not rest_j:
        yield ()
        return
    if not rest_i or len(rest_i) != len(rest_j):
        return
    anchor, tail_i = rest_i[0], rest_i[1:]
    for size in range(1, len(rest_j) + 1):
        for extra in combinations(range(len(tail_i)), size - 1):
            ci = (anchor,) + tuple(tail_i[t] for t in extra)
            rem_i = tuple(v for t, v in enumerate(tail_i) if t not in extra)
            for jpick in combinations(range(len(rest_j)), size):
                cj = tuple(rest_j[t] for t in jpick)
                if not _alternates(ci, cj, False):
                    continue
                rem_j = tuple(v for t, v in enumerate(rest_j) if t not in jpick)
                for rest in _cluster_splits(rem_i, rem_j):
                    yield ((ci, cj),) + rest


def enumerate_decompositions(pair: IndexPair):
    """Distinct decompositions of the index multiset into one
    i-terminated cluster plus balanced clusters, as canonical tuples
    ((mi, mj), sorted balanced clusters)."""
    L = pair.L
    found = set()
    for r in range(0, L + 1):
        for mi_pos in combinations(range(L + 1), r + 1):
            mi = tuple(pair.i[p] for p in mi_pos)
            for mj_pos in combinations(range(L), r):
                mj = tuple(pair.j[p] for p in mj_pos)
                if not _alternates(mi, mj, True):
                    continue
                rest_i = tuple(pair.i[p] for p in range(L + 1) if p not in mi_pos)
                rest_j = tuple(pair.j[p] for p in range(L) if p not in mj_pos)
                for clusters in _cluster_splits(rest_i, rest_j):
                    found.add(((mi, mj), tuple(sorted(clusters))))
    return sorted(found)


def cluster_coefficient(pair: IndexPair) -> int:
    """Signed count of cluster decompositions with the balanced clusters
    taken as an ordered sequence, so a decomposition contributes once per
    distinct ordering.  The sign depends on the number of balanced
    clusters and the pair length."""
    L = pair.L
    total = 0
    for _, clusters in enumerate_decompositions(pair):
        s = len(clusters)
        orderings = factorial(s)
        for mult in Counter(clusters).values():
            orderings //= factorial(mult)
        total += (-1) ** (s + L) * orderings
    return total


def subindex_reductions(pair: IndexPair):
    """All pairs reachable by cancelling equal values between the i tail
    and j, the original included."""
    tail, j = pair.i[1:], pair.j
    common = sorted(set(tail) & set(j))
    options = [range(min(tail.count(v), j.count(v)) + 1) for v in common]
    out = set()
    for counts in product(*options):
        ti, tj = list(tail), list(j)
        for v, t in zip(common, counts):
            for _ in range(t):
                ti.remove(v)
                tj.remove(v)
        out.add(IndexPair((pair.i[0],) + tuple(ti), tuple(tj)))
    return sorted(out, key=lambda p: (p.i, p.j))


# --- identities in Hermitian sums -------------------------------------


def s_identity_check(params: RootParams, which: str) -> float:
    """Deviation between a group polynomial extracted from the exact
    expansion and its claimed expression in Hermitian pairing sums."""
    if params.side != "zeta":
        raise ValueError("s_identity_check expects lower-family parameters")
    sup = params.support
    if sup == 0:
        return 0.0
    cap = 2 * sup + 6
    table = coefficient_tables(sup, weight_cap=cap)
    values = {i: complex(params.value_at(i)) for i in range(1, sup + 1)}

    def s_eval(n, length=None):
        total = 0j
        for pair, c in table.entries.items():
            if pair.i[0] != n or (length is not None and pair.L != length):
                continue
            term = complex(c)
            for idx in pair.i[1:]:
                term *= values.get(idx, 0j)
            for idx in pair.j:
                term *= values.get(idx, 0j).conjugate()
            total += term
        return total

    def u(i):
        return values.get(i, 0j) * values.get(i + 1, 0j).conjugate()

    if which == "s2":
        return abs(s_eval(2) - (b_sum(params, 2, 1) + b_sum(params, 3, 1)))
    if which == "s_n1":
        worst = 0.0
        for n in range(2, sup + 1):
            claim = b_sum(params, n, n - 1) + b_sum(params, n + 1, n - 1)
            worst = max(worst, abs(s_eval(n, length=1) - claim))
        return worst
    if which == "s32":
        claim = b_sum(params, 3, 1) ** 2 + b_sum(params, 4, 1) ** 2
        claim += sum(u(i) ** 2 for i in range(4, sup + 1))
        claim += u(3) * u(4)
        claim += 2 * sum(u(i) * u(i + 1) for i in range(4, sup + 1))
        return abs(s_eval(3, length=2) - claim)
    raise ValueError(f"unknown identity tag {which!r}")


def zeta1_four_vars(xs, ps) -> complex:
    """First parameter from the first four residue coefficients and the
    tail products ps[n-1] = prod_{j>n} (1 + |v_j|^2)."""
    if len(xs) != 4 or len(ps) != 4:
        raise ValueError("need exactly four residues and four tail products")
    p1, p2, p3, p4 = (float(p) for p in ps)
    if min(p1, p2, p3, p4) <= 0:
        raise ValueError("tail products must be positive")
    x1, x2, x3, x4 = (complex(x) for x in xs)
    xb3, xb4 = x3.conjugate(), x4.conjugate()
    return (
        x1 / p1
        - x2**2 * xb3 / (p1 * p2 * p3)
        + 2 * x2 * x3**2 * xb3 * xb4 / (p1 * p2 * p3**2 * p4)
        - 2 * x2 * x3 * xb4 / (p1 * p3 * p4)
        - x3**4 * xb3 * xb4**2 / (p1 * p2 * p3**3 * p4**2)
        + x3**3 * xb4**2 / (p1 * p3**2 * p4**2)
    )
