"""Decision procedures for homotopy questions between graded maps.

Every question here reduces to an exact F2 linear system: a grading
homogeneous map is determined by finitely many slice coordinates (one bit
per admissible (monomial, target) pair for each source generator), and all
constraints -- chain map, homotopy, commutation up to homotopy, locality --
are linear in those coordinates.  Locality is a single extra affine row:
the class of the image of a fixed nontorsion cycle must survive inverting
the variables, which is one F2 functional, so existence questions never
enumerate the solution space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .algebra import (
    F2Inconsistency,
    Grading,
    gr_add,
    gr_swap,
    lexmin_affine,
    slice_pairs,
    solve_f2_rows,
)
from .complexes import (
    Endomorphism,
    KnotComplex,
    PhiIotaComplex,
    SKEW,
    STRAIGHT,
)
from .errors import ValidationError


@dataclass(frozen=True)
class MapShape:
    source: KnotComplex
    target: KnotComplex
    mode: str
    bidegree: Grading

    def unknowns(self) -> list:
        """(src, mono, tgt) coordinates, slice-basis order per source."""
        out = []
        for s in range(self.source.n):
            g = self.source.gradings[s]
            if self.mode == SKEW:
                g = gr_swap(g)
            target_gr = gr_add(g, self.bidegree)
            for m, t in slice_pairs(self.target.gradings, target_gr):
                out.append((s, m, t))
        return out

    def assemble(self, bits: int, coords: list) -> Endomorphism:
        cols = [dict() for _ in range(self.source.n)]
        for i, (s, m, t) in enumerate(coords):
            if (bits >> i) & 1:
                cur = cols[s].get(t, frozenset())
                cols[s][t] = cur ^ {m}
        return Endomorphism(self.source, self.target, cols, self.mode,
                            self.bidegree, check=False)


class MapSystem:
    """Linear system whose unknowns are grading-homogeneous maps.

    Equations have the form ``sum of op_i(unknown_i) = rhs`` where each
    ``op`` is linear (composition with fixed maps, sums of such).  The
    system is assembled by evaluating every operator on every elementary
    basis map, which keeps the operators themselves opaque.
    """

    def __init__(self):
        self.names: list = []
        self.shapes: dict = {}
        self.coords: dict = {}
        self.offsets: dict = {}
        self.total = 0
        self.equations: list = []  # (terms, rhs_endo_or_None)
        self.functionals: list = []  # (name, bit_fn, rhs_bit)

    def add_unknown(self, name: str, shape: MapShape) -> None:
        if name in self.shapes:
            raise ValueError(f"duplicate unknown {name!r}")
        self.names.append(name)
        self.shapes[name] = shape
        self.coords[name] = shape.unknowns()
        self.offsets[name] = self.total
        self.total += len(self.coords[name])

    def add_equation(self, terms, rhs: Optional[Endomorphism] = None) -> None:
        """terms: list of (unknown name, operator Endomorphism -> Endomorphism)."""
        self.equations.append((list(terms), rhs))

    def add_functional(self, name: str,
                       bit_fn: Callable[[Endomorphism], int],
                       rhs_bit: int) -> None:
        self.functionals.append((name, bit_fn, rhs_bit))

    def _rows(self):
        row_index: dict = {}
        rows: list = []
        rhs: list = []

        def row_of(key):
            if key not in row_index:
                row_index[key] = len(rows)
                rows.append(0)
                rhs.append(0)
            return row_index[key]

        for ei, (_, rhs_endo) in enumerate(self.equations):
            if rhs_endo is None:
                continue
            for s, col in enumerate(rhs_endo.cols):
                for t, p in col.items():
                    for m in p:
                        rhs[row_of((ei, s, t, m))] ^= 1
        for name in self.names:
            shape = self.shapes[name]
            off = self.offsets[name]
            for ci, coord in enumerate(self.coords[name]):
                elem = shape.assemble(1 << ci, self.coords[name])
                colbit = 1 << (off + ci)
                for ei, (terms, _) in enumerate(self.equations):
                    for nm, op in terms:
                        if nm != name:
                            continue
                        val = op(elem)
                        for s, col in enumerate(val.cols):
                            for t, p in col.items():
                                for m in p:
                                    rows[row_of((ei, s, t, m))] ^= colbit
        for name, bit_fn, rhs_bit in self.functionals:
            shape = self.shapes[name]
            off = self.offsets[name]
            row = 0
            for ci, coord in enumerate(self.coords[name]):
                elem = shape.assemble(1 << ci, self.coords[name])
                if bit_fn(elem):
                    row |= 1 << (off + ci)
            rows.append(row)
            rhs.append(rhs_bit)
        return rows, rhs

    def solve(self, lexmin: bool = False):
        """Return ({name: Endomorphism}, F2Solution) or (None, certificate)."""
        rows, rhs = self._rows()
        sol = solve_f2_rows(rows, rhs, self.total)
        if isinstance(sol, F2Inconsistency):
            return None, sol
        bits = sol.particular
        if lexmin:
            bits = lexmin_affine(bits, sol.kernel, self.total)
        return self._split(bits), sol

    def _split(self, bits: int) -> dict:
        out = {}
        for name in self.names:
            off = self.offsets[name]
            n = len(self.coords[name])
            chunk = (bits >> off) & ((1 << n) - 1)
            out[name] = self.shapes[name].assemble(chunk, self.coords[name])
        return out

    def solutions_bits(self):
        """(particular, kernel) of the full system, for enumeration callers."""
        rows, rhs = self._rows()
        sol = solve_f2_rows(rows, rhs, self.total)
        if isinstance(sol, F2Inconsistency):
            return None
        return sol


# -- homotopy ------------------------------------------------------------------

@dataclass
class Homotopy:
    """H with f + g = dH + Hd, verified exactly on every generator."""

    matrix: Endomorphism

    def verifies(self, f: Endomorphism, g: Endomorphism) -> bool:
        d_src = f.source.boundary()
        d_tgt = f.target.boundary()
        lhs = f + g
        rhs = d_tgt.compose(self.matrix) + self.matrix.compose(d_src)
        return lhs == rhs


def _same_shape(f: Endomorphism, g: Endomorphism) -> None:
    if f.mode != g.mode or f.bidegree != g.bidegree \
            or f.source != g.source or f.target != g.target:
        raise ValidationError("maps do not share source/target/mode/bidegree")


def homotopic(f: Endomorphism, g: Endomorphism,
              lexmin: bool = False):
    """Solve dH + Hd = f + g.  Returns a Homotopy or None.

    The returned witness is deterministic; with ``lexmin`` it is the
    lexicographically smallest one in the slice basis.
    """
    _same_shape(f, g)
    diff = f + g
    if diff.is_zero():
        return Homotopy(f.source.zero_map(f.mode, gr_add(f.bidegree, (1, 1))))
    sys = MapSystem()
    shape = MapShape(f.source, f.target, f.mode, gr_add(f.bidegree, (1, 1)))
    sys.add_unknown("h", shape)
    d_src = f.source.boundary()
    d_tgt = f.target.boundary()
    sys.add_equation(
        [("h", lambda h: d_tgt.compose(h) + h.compose(d_src))],
        rhs=diff)
    ans, _ = sys.solve(lexmin=lexmin)
    if ans is None:
        return None
    h = Homotopy(ans["h"])
    assert h.verifies(f, g)
    return h


def commutes_up_to_homotopy(f: Endomorphism, g: Endomorphism):
    """Decide f o g ~ g o f; returns the homotopy or None."""
    fg = f.compose(g)
    gf = g.compose(f)
    if fg.mode != gf.mode or fg.bidegree != gf.bidegree:
        raise ValidationError(
            "compositions have incompatible shapes; cannot compare")
    return homotopic(fg, gf)


def homotopy_inverse(cx: KnotComplex, phi: Endomorphism):
    """A chain map g with phi o g ~ id ~ g o phi, or None."""
    sys = MapSystem()
    d = cx.boundary()
    ident = cx.identity()
    sys.add_unknown("g", MapShape(cx, cx, phi.mode, (0, 0)))
    sys.add_unknown("h1", MapShape(cx, cx, STRAIGHT, (1, 1)))
    sys.add_unknown("h2", MapShape(cx, cx, STRAIGHT, (1, 1)))
    sys.add_equation([("g", lambda g: g.compose(d) + d.compose(g))])
    sys.add_equation(
        [("g", lambda g: phi.compose(g)),
         ("h1", lambda h: d.compose(h) + h.compose(d))],
        rhs=ident)
    sys.add_equation(
        [("g", lambda g: g.compose(phi)),
         ("h2", lambda h: d.compose(h) + h.compose(d))],
        rhs=ident)
    ans, _ = sys.solve(lexmin=True)
    return None if ans is None else ans["g"]


# -- locality ------------------------------------------------------------------

@dataclass
class LocalityCertificate:
    """Witness for (or refutation of) the existence of a local map."""

    exists: bool
    f: Optional[Endomorphism] = None
    h_phi: Optional[Endomorphism] = None
    h_iota: Optional[Endomorphism] = None
    shift: int = 0
    obstruction: Optional[dict] = None


def _local_system(x1: PhiIotaComplex, x2: PhiIotaComplex, shift: int,
                  functional) -> MapSystem:
    c1, c2 = x1.complex, x2.complex
    d1, d2 = c1.boundary(), c2.boundary()
    sys = MapSystem()
    sys.add_unknown("f", MapShape(c1, c2, STRAIGHT, (shift, shift)))
    sys.add_unknown("hp", MapShape(c1, c2, STRAIGHT, (shift + 1, shift + 1)))
    sys.add_unknown("hi", MapShape(c1, c2, SKEW, (shift + 1, shift + 1)))
    sys.add_equation([("f", lambda f: f.compose(d1) + d2.compose(f))])
    sys.add_equation(
        [("f", lambda f: f.compose(x1.phi) + x2.phi.compose(f)),
         ("hp", lambda h: d2.compose(h) + h.compose(d1))])
    sys.add_equation(
        [("f", lambda f: f.compose(x1.iota) + x2.iota.compose(f)),
         ("hi", lambda h: d2.compose(h) + h.compose(d1))])
    sys.add_functional("f", functional, 1)
    return sys


def local_map_exists(x1: PhiIotaComplex, x2: PhiIotaComplex,
                     allow_shift: bool = False,
                     window_bump: int = 0) -> LocalityCertificate:
    """Decide whether a local map x1 -> x2 exists (grading preserving by
    default), and produce the witness triple (f, H_phi, H_iota) or the
    inconsistency certificate.

    Locality is one affine row: the class of f(tower cycle) must be
    nontorsion after restricting to the diagonal subcomplex of x2, which is
    a single linear functional of f.  With ``allow_shift`` the same system
    is retried over diagonal even grading shifts, nearest first.
    """
    from .invariants import A0Data  # deferred: invariants imports us back

    tower1 = A0Data(x1, window_bump=window_bump)
    tower2 = A0Data(x2, window_bump=window_bump)
    t_cycle, t_grading = tower1.tower_cycle_in_c()

    shifts = [0]
    if allow_shift:
        span = (max(g[0] for g in x2.complex.gradings)
                - min(g[0] for g in x1.complex.gradings))
        lo = -abs(span) - 2
        hi = abs(span) + 2
        extra = sorted((s for s in range(lo, hi + 1, 2) if s != 0), key=abs)
        shifts += extra

    last_obstruction = None
    for shift in shifts:
        def functional(elem, _shift=shift):
            image = elem.apply(t_cycle)
            return tower2.nontorsion_bit(image, t_grading + _shift)

        sys = _local_system(x1, x2, shift, functional)
        ans, cert = sys.solve()
        if ans is not None:
            out = LocalityCertificate(True, ans["f"], ans["hp"], ans["hi"],
                                      shift)
            _check_witness(x1, x2, out)
            return out
        last_obstruction = {"rows": "left-kernel", "combo": cert.combo,
                            "shift": shift}
    return LocalityCertificate(False, obstruction=last_obstruction)


def _check_witness(x1, x2, cert: LocalityCertificate) -> None:
    d1, d2 = x1.complex.boundary(), x2.complex.boundary()
    f, hp, hi = cert.f, cert.h_phi, cert.h_iota
    assert (f.compose(d1) + d2.compose(f)).is_zero()
    assert (f.compose(x1.phi) + x2.phi.compose(f)
            == d2.compose(hp) + hp.compose(d1))
    assert (f.compose(x1.iota) + x2.iota.compose(f)
            == d2.compose(hi) + hi.compose(d1))


# -- self-local spaces ----------------------------------------------------------

@dataclass
class MorphismSpace:
    """Solution space of grading-preserving self-maps commuting with the
    differential and (up to homotopy) with iota, with the locality
    functional evaluated on each basis element."""

    complex: KnotComplex
    basis: list = field(default_factory=list)  # Endomorphism, f-part only
    locality_bits: list = field(default_factory=list)

    def members(self, selector: int) -> Endomorphism:
        out = self.complex.zero_map()
        for i, b in enumerate(self.basis):
            if (selector >> i) & 1:
                out = out + b
        return out

    def locality(self, selector: int) -> int:
        bit = 0
        for i, lam in enumerate(self.locality_bits):
            if (selector >> i) & 1:
                bit ^= lam
        return bit


def self_local_space(x: PhiIotaComplex, window_bump: int = 0) -> MorphismSpace:
    """Basis of the constraint space of grading-preserving self-maps.

    Members satisfy f d = d f and f iota ~ iota f; the locality of any
    member is read off from the stored functional bits (the space itself
    always contains non-local members such as 0).
    """
    from .invariants import A0Data

    cx = x.complex
    d = cx.boundary()
    tower = A0Data(x, window_bump=window_bump)
    t_cycle, t_grading = tower.tower_cycle_in_c()

    sys = MapSystem()
    f_shape = MapShape(cx, cx, STRAIGHT, (0, 0))
    sys.add_unknown("f", f_shape)
    sys.add_unknown("hi", MapShape(cx, cx, SKEW, (1, 1)))
    sys.add_equation([("f", lambda f: f.compose(d) + d.compose(f))])
    sys.add_equation(
        [("f", lambda f: f.compose(x.iota) + x.iota.compose(f)),
         ("hi", lambda h: d.compose(h) + h.compose(d))])
    sol = sys.solutions_bits()
    assert sol is not None  # homogeneous system
    n_f = len(sys.coords["f"])
    f_mask = (1 << n_f) - 1

    # project kernel to the f coordinates and reduce to an independent set
    space = MorphismSpace(cx)
    seen: list = []  # (pivot, vec)
    for vec in sol.kernel:
        v = vec & f_mask
        for p, w in seen:
            if (v >> p) & 1:
                v ^= w
        if v:
            p = (v & -v).bit_length() - 1
            seen.append((p, v))
            f = f_shape.assemble(v, sys.coords["f"])
            space.basis.append(f)
            space.locality_bits.append(
                tower.nontorsion_bit(f.apply(t_cycle), t_grading))
    return space
