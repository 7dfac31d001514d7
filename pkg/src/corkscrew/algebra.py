"""Exact arithmetic ground layer: F2[U,V] monomials, set-based polynomials,
bigradings, graded slice enumeration, and bit-packed F2 linear algebra.

Coefficients live in F2, so a polynomial is simply the set of monomials
present and addition is symmetric difference.  A monomial U^a V^b is the
exponent pair ``(a, b)``; it shifts the bigrading by ``(-2a, -2b)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

Mono = tuple  # (u_exp, v_exp)
Poly = frozenset  # frozenset of Mono
Grading = tuple  # (gr_u, gr_v)

P_ZERO: Poly = frozenset()
P_ONE: Poly = frozenset({(0, 0)})


# -- monomials ---------------------------------------------------------------

def mono_mul(m1: Mono, m2: Mono) -> Mono:
    return (m1[0] + m2[0], m1[1] + m2[1])


def mono_deg(m: Mono) -> Grading:
    """Bigrading shift contributed by the monomial."""
    return (-2 * m[0], -2 * m[1])


def mono_swap(m: Mono) -> Mono:
    return (m[1], m[0])


# -- polynomials -------------------------------------------------------------

def poly(monos: Iterable[Mono]) -> Poly:
    """Build a polynomial, cancelling duplicated monomials mod 2."""
    out: set = set()
    for m in monos:
        out ^= {m}
    return frozenset(out)


def padd(p1: Poly, p2: Poly) -> Poly:
    return p1 ^ p2


def pmul(p1: Poly, p2: Poly) -> Poly:
    out: set = set()
    for m1 in p1:
        for m2 in p2:
            out ^= {mono_mul(m1, m2)}
    return frozenset(out)


def pscale(m: Mono, p: Poly) -> Poly:
    if m == (0, 0):
        return p
    return frozenset(mono_mul(m, t) for t in p)


def pswap(p: Poly) -> Poly:
    return frozenset(mono_swap(m) for m in p)


def formal_derivative(p: Poly, variable: str) -> Poly:
    """d/dU or d/dV of a polynomial over F2.

    U^a V^b maps to U^(a-1) V^b when a is odd and to zero when a is even
    (and symmetrically in V), because the integer coefficient a reduces
    mod 2.
    """
    if variable not in ("u", "v"):
        raise ValueError(f"unknown variable {variable!r}")
    out: set = set()
    for a, b in p:
        if variable == "u":
            if a % 2 == 1:
                out ^= {(a - 1, b)}
        else:
            if b % 2 == 1:
                out ^= {(a, b - 1)}
    return frozenset(out)


# -- bigradings --------------------------------------------------------------

def gr_add(g1: Grading, g2: Grading) -> Grading:
    return (g1[0] + g2[0], g1[1] + g2[1])


def gr_sub(g1: Grading, g2: Grading) -> Grading:
    return (g1[0] - g2[0], g1[1] - g2[1])


def gr_neg(g: Grading) -> Grading:
    return (-g[0], -g[1])


def gr_swap(g: Grading) -> Grading:
    return (g[1], g[0])


def alexander(g: Grading) -> int:
    """Alexander grading (gr_u - gr_v)/2; derived, never stored."""
    d = g[0] - g[1]
    if d % 2:
        raise ValueError(f"bigrading {g} has odd gr_u - gr_v")
    return d // 2


def maslov(g: Grading) -> int:
    """Maslov grading; by convention this is gr_u."""
    return g[0]


# -- graded slices -----------------------------------------------------------

def slice_monomial(gen_grading: Grading, target: Grading,
                   variables: str = "uv") -> Optional[Mono]:
    """The unique monomial m with gr(gen) + deg(m) == target, or None.

    ``variables`` restricts which exponents may be nonzero ("uv", "u", "v").
    """
    du = gen_grading[0] - target[0]
    dv = gen_grading[1] - target[1]
    if du < 0 or dv < 0 or du % 2 or dv % 2:
        return None
    a, b = du // 2, dv // 2
    if "u" not in variables and a:
        return None
    if "v" not in variables and b:
        return None
    return (a, b)


def slice_pairs(gradings: Sequence[Grading], target: Grading,
                variables: str = "uv") -> list:
    """All (monomial, generator-index) pairs spanning the piece at ``target``.

    Deterministic order: generator order (each generator contributes at most
    one monomial, so no further tie-breaking is needed).
    """
    out = []
    for i, g in enumerate(gradings):
        m = slice_monomial(g, target, variables)
        if m is not None:
            out.append((m, i))
    return out


@dataclass(frozen=True)
class GradedSlice:
    """Basis of the module piece at a fixed bigrading, with generator ids."""

    bigrading: Grading
    basis: tuple  # of (Mono, generator-id)


def slice_basis(generators: Sequence, target: Grading) -> GradedSlice:
    """Spec-facing slice enumeration over (id, bigrading) pairs."""
    gradings = [g for _, g in generators]
    ids = [gid for gid, _ in generators]
    pairs = tuple((m, ids[i]) for m, i in slice_pairs(gradings, target))
    return GradedSlice(bigrading=tuple(target), basis=pairs)


# -- F2 linear algebra (rows as int bitmasks, bit j = column j) --------------

@dataclass
class F2Matrix:
    rows: int
    cols: int
    bits: list  # row-major bitmask per row

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]], ncols: int) -> "F2Matrix":
        packed = []
        for row in rows:
            word = 0
            for j, x in enumerate(row):
                if x & 1:
                    word |= 1 << j
            packed.append(word)
        return cls(rows=len(packed), cols=ncols, bits=packed)

    def row(self, i: int) -> list:
        return [(self.bits[i] >> j) & 1 for j in range(self.cols)]


@dataclass
class F2Solution:
    particular: int  # bitmask over columns
    kernel: list  # list of bitmasks, deterministic order

    def vectors(self, ncols: int) -> tuple:
        return (_unpack(self.particular, ncols),
                [_unpack(k, ncols) for k in self.kernel])


@dataclass
class F2Inconsistency:
    """Left-kernel witness: combo . A == 0 while combo . b == 1."""

    combo: int  # bitmask over the original rows


def _unpack(word: int, n: int) -> list:
    return [(word >> j) & 1 for j in range(n)]


def solve_f2_rows(rows: list, rhs: list, ncols: int):
    """Solve A x = b exactly over F2 with deterministic leftmost pivoting.

    Returns an F2Solution (one solution plus a kernel basis) or an
    F2Inconsistency carrying the row combination that certifies b is not in
    the column span.
    """
    work = list(rows)
    b = list(rhs)
    prov = [1 << i for i in range(len(work))]
    pivots = []  # (col, row_index)
    r = 0
    for col in range(ncols):
        mask = 1 << col
        sel = None
        for i in range(r, len(work)):
            if work[i] & mask:
                sel = i
                break
        if sel is None:
            continue
        work[r], work[sel] = work[sel], work[r]
        b[r], b[sel] = b[sel], b[r]
        prov[r], prov[sel] = prov[sel], prov[r]
        for i in range(len(work)):
            if i != r and (work[i] & mask):
                work[i] ^= work[r]
                b[i] ^= b[r]
                prov[i] ^= prov[r]
        pivots.append((col, r))
        r += 1
    for i in range(len(work)):
        if work[i] == 0 and b[i]:
            return F2Inconsistency(combo=prov[i])
    particular = 0
    for col, i in pivots:
        if b[i]:
            particular |= 1 << col
    pivot_cols = {col for col, _ in pivots}
    kernel = []
    for free in range(ncols):
        if free in pivot_cols:
            continue
        vec = 1 << free
        for col, i in pivots:
            if work[i] & (1 << free):
                vec |= 1 << col
        kernel.append(vec)
    return F2Solution(particular=particular, kernel=kernel)


def solve_f2(a: F2Matrix, b: Sequence[int]):
    """Matrix-facing wrapper around :func:`solve_f2_rows`."""
    if len(b) != a.rows:
        raise ValueError("rhs length does not match row count")
    return solve_f2_rows(a.bits, list(b), a.cols)


def f2_rank(rows: list, ncols: int) -> int:
    work = list(rows)
    rank = 0
    r = 0
    for col in range(ncols):
        mask = 1 << col
        sel = None
        for i in range(r, len(work)):
            if work[i] & mask:
                sel = i
                break
        if sel is None:
            continue
        work[r], work[sel] = work[sel], work[r]
        for i in range(len(work)):
            if i != r and (work[i] & mask):
                work[i] ^= work[r]
        rank += 1
        r += 1
    return rank


def lexmin_affine(particular: int, kernel: list, ncols: int) -> int:
    """Lexicographically smallest element of particular + span(kernel).

    Coordinates are compared left to right (column 0 first) with 0 < 1.
    """
    basis = []
    for vec in kernel:
        v = vec
        for lead, bv in basis:
            if v & (1 << lead):
                v ^= bv
        if v:
            lead = (v & -v).bit_length() - 1
            basis.append((lead, v))
    # Every vector's lowest set bit is its lead and leads are distinct, so
    # choosing column values greedily from the left is optimal: flipping a
    # later vector never disturbs an already-decided column.
    basis.sort()
    sol = particular
    for lead, v in basis:
        if sol & (1 << lead):
            sol ^= v
    return sol
