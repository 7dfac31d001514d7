"""Diagonal subcomplexes, cylinder totalisations, and the delta invariant.

The diagonal subcomplex of a bigraded complex is spanned by all elements
whose two gradings agree; it is a free singly-graded complex over F2[U]
with U the product of the two variables (degree -2).  Restricted to it the
skew involution becomes honestly U-equivariant, because exchanging the
variables fixes their product.

All homology here is computed per grading inside a truncation window whose
margin dominates every possible torsion order; below the minimum generator
grading multiplication by U identifies consecutive slices, so answers in
the window are exact and the re-check at an enlarged window is a
certificate rather than a heuristic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .algebra import Grading, Mono, alexander, gr_add, mono_swap, slice_pairs
from .complexes import KnotComplex, PhiIotaComplex, validate
from .errors import (
    ConsistencyError,
    GradingParityError,
    ValidationError,
    WindowUnstableError,
)

UPoly = frozenset  # frozenset of U-exponents


# -- pivot bookkeeping ---------------------------------------------------------

class _PivotSpan:
    """Incremental F2 span with pivot tracking and coefficient extraction."""

    def __init__(self):
        self.rows = []  # (pivot, vec, tag)

    def reduce(self, v: int) -> int:
        for p, w, _ in self.rows:
            if (v >> p) & 1:
                v ^= w
        return v

    def insert(self, v: int, tag=None) -> bool:
        v = self.reduce(v)
        if v == 0:
            return False
        p = (v & -v).bit_length() - 1
        self.rows.append((p, v, tag))
        return True

    def coefficients(self, v: int) -> dict:
        """Express v over the inserted vectors; error if outside the span."""
        coeffs = {}
        for p, w, tag in self.rows:
            if (v >> p) & 1:
                v ^= w
                coeffs[tag] = coeffs.get(tag, 0) ^ 1
        if v:
            raise ValidationError("vector outside the recorded span")
        return coeffs

    @property
    def rank(self) -> int:
        return len(self.rows)


class _HSlice:
    """Homology of one grading slice with deterministic representatives."""

    def __init__(self, dim: int, cycle_basis: list, boundary_span: list):
        self.dim = dim
        self.cycles = cycle_basis
        span = _PivotSpan()
        for b in boundary_span:
            span.insert(b, tag="b")
        self.reps = []
        for z in cycle_basis:
            before = span.rank
            if span.insert(z, tag=("h", len(self.reps))):
                assert span.rank == before + 1
                self.reps.append(z)
        self._span = span
        # complete to a full decomposition of the ambient slice so the
        # tower functional extends linearly off the cycle subspace
        for j in range(dim):
            span.insert(1 << j, tag="c")

    @property
    def rank(self) -> int:
        return len(self.reps)

    def class_coords(self, v: int) -> int:
        """Coordinates of a cycle's class over the representatives."""
        coeffs = self._span.coefficients(v)
        out = 0
        for tag, bit in coeffs.items():
            if isinstance(tag, tuple) and tag[0] == "h" and bit:
                out |= 1 << tag[1]
        return out

    def rep_coefficient(self, v: int, idx: int) -> int:
        """Linear functional extracting one representative's coefficient,
        defined on the whole slice (not only on cycles)."""
        coeffs = self._span.coefficients(v)
        return coeffs.get(("h", idx), 0)


# -- diagonal complexes ----------------------------------------------------------

@dataclass(frozen=True)
class UComplex:
    """Free graded F2[U]-complex, possibly carrying restricted actions.

    ``embed_monos`` records, per generator, the bigraded monomial that
    realises it inside the parent two-variable complex (when there is one).
    """

    name: str
    labels: tuple
    gradings: tuple  # int per generator; deg(U) = -2, deg(d) = -1
    cols: tuple  # cols[src] = {tgt: UPoly}
    phi_cols: Optional[tuple] = None
    iota_cols: Optional[tuple] = None
    embed_monos: Optional[tuple] = None

    def __post_init__(self):
        for s, col in enumerate(self.cols):
            for t, exps in col.items():
                for e in exps:
                    if self.gradings[t] - 2 * e != self.gradings[s] - 1:
                        raise ValidationError(
                            f"U-differential degree violated at "
                            f"{self.labels[s]}->{self.labels[t]}")
        for name, action in (("phi", self.phi_cols), ("iota", self.iota_cols)):
            if action is None:
                continue
            for s, col in enumerate(action):
                for t, exps in col.items():
                    for e in exps:
                        if self.gradings[t] - 2 * e != self.gradings[s]:
                            raise ValidationError(
                                f"restricted {name} degree violated at "
                                f"{self.labels[s]}->{self.labels[t]}")

    @property
    def n(self) -> int:
        return len(self.labels)

    def max_exponent(self) -> int:
        worst = 0
        for group in (self.cols, self.phi_cols, self.iota_cols):
            if group is None:
                continue
            for col in group:
                for exps in col.values():
                    if exps:
                        worst = max(worst, max(exps))
        return worst


def _apply_ucols(cols, vec: dict) -> dict:
    out: dict = {}
    for s, exps in vec.items():
        for t, entry in cols[s].items():
            acc = out.get(t, frozenset())
            for e in exps:
                acc = acc ^ frozenset(k + e for k in entry)
            out[t] = acc
    return {t: e for t, e in out.items() if e}


class DiagonalHomology:
    """Slicewise homology of a :class:`UComplex` with tower detection."""

    def __init__(self, uc: UComplex, window_bump: int = 0,
                 expect_tower: bool = True):
        self.uc = uc
        self.gmax = max(uc.gradings)
        self.gmin = min(uc.gradings)
        self.ntor = uc.n * (1 + uc.max_exponent())
        self.hi = self.gmax + 2
        self.lo = self.gmin - 2 * self.ntor - 2 * window_bump
        self._slices: dict = {}
        self._H: dict = {}
        self._tower = None
        if expect_tower:
            self._locate_tower()

    # window contract: [G_min - 2*N_tor, G_max + 2], widened by the bump

    def slice_gens(self, d: int) -> list:
        if d not in self._slices:
            self._slices[d] = [g for g in range(self.uc.n)
                               if self.uc.gradings[g] >= d
                               and (self.uc.gradings[g] - d) % 2 == 0]
        return self._slices[d]

    def _pos(self, d: int) -> dict:
        return {g: i for i, g in enumerate(self.slice_gens(d))}

    def boundary_columns(self, d: int) -> list:
        """Column bitmasks of the slice map into grading d-1.

        A slice is just a subset of generators (the U-power is forced by
        the grading), so an entry U^e contributes its target's bit once
        per exponent, mod 2.
        """
        tgt_pos = self._pos(d - 1)
        cols = []
        for g in self.slice_gens(d):
            word = 0
            for t, exps in self.uc.cols[g].items():
                if len(exps) % 2:
                    word ^= 1 << tgt_pos[t]
            cols.append(word)
        return cols

    def cycle_basis(self, d: int) -> list:
        cols = self.boundary_columns(d)
        nsrc = len(cols)
        nrow = len(self.slice_gens(d - 1))
        rows = [0] * nrow
        for j, col in enumerate(cols):
            for i in range(nrow):
                if (col >> i) & 1:
                    rows[i] |= 1 << j
        from .algebra import solve_f2_rows
        sol = solve_f2_rows(rows, [0] * nrow, nsrc)
        return sol.kernel

    def homology(self, d: int) -> _HSlice:
        if d not in self._H:
            bcols = self.boundary_columns(d + 1)
            self._H[d] = _HSlice(len(self.slice_gens(d)),
                                 self.cycle_basis(d), bcols)
        return self._H[d]

    def push(self, vec: int, d: int, steps: int) -> int:
        """Multiply a slice vector by U^steps (an inclusion of subsets)."""
        if steps == 0:
            return vec
        src = self.slice_gens(d)
        tgt_pos = self._pos(d - 2 * steps)
        out = 0
        for i, g in enumerate(src):
            if (vec >> i) & 1:
                out |= 1 << tgt_pos[g]
        return out

    def stable_grading_for(self, d: int) -> int:
        """The deepest-but-one grading of matching parity at which slices
        are U-translates of each other."""
        target = self.gmin - 1
        if (d - target) % 2:
            target -= 1
        return min(d, target)

    def nontorsion_bit(self, vec: int, d: int) -> int:
        """1 when the (cycle) vector's class survives all U powers.

        Below the minimum generator grading multiplication by U identifies
        consecutive slices, so surviving one push past that point decides
        all further ones.  Linear in ``vec`` over the whole slice; on
        non-cycles the value is an arbitrary linear extension, which
        callers pair with a chain-map constraint.
        """
        if vec == 0:
            return 0
        target = self.stable_grading_for(d)
        pushed = self.push(vec, d, (d - target) // 2)
        h = self.homology(target)
        return 1 if any(h.rep_coefficient(pushed, i)
                        for i in range(h.rank)) else 0

    def _locate_tower(self):
        r0 = self.homology(self.gmin - 1).rank
        r1 = self.homology(self.gmin - 2).rank
        if r0 + r1 != 1:
            raise ValidationError(
                f"{self.uc.name}: inverted homology has rank {r0 + r1}, "
                f"expected a single free tower")
        top = None
        rep = None
        for d in range(self.hi, self.lo - 1, -1):
            h = self.homology(d)
            lam = [self.nontorsion_bit(z, d) for z in h.cycles]
            if any(lam):
                top = d
                rep = self._lex_witness(d, lam)
                break
        if top is None:
            raise ValidationError(
                f"{self.uc.name}: no nontorsion class found in the window")
        self._tower = (top, rep)

    def _lex_witness(self, d: int, lam: list) -> int:
        """Lexicographically first cycle at grading d with functional 1."""
        h = self.homology(d)
        pick = [z for z, bit in zip(h.cycles, lam) if bit]
        rest = [z for z, bit in zip(h.cycles, lam) if not bit]
        particular = pick[0]
        kernel = rest + [pick[0] ^ z for z in pick[1:]]
        from .algebra import lexmin_affine
        return lexmin_affine(particular, kernel, len(self.slice_gens(d)))

    @property
    def tower_top(self) -> int:
        return self._tower[0]

    @property
    def tower_rep(self) -> int:
        return self._tower[1]


# -- the diagonal subcomplex -----------------------------------------------------

def _embed_mono(gr: Grading) -> Mono:
    a = alexander(gr)
    return (a, 0) if a >= 0 else (0, -a)


def _restrict_cols(cx: KnotComplex, cols, monos, skew: bool):
    out = []
    for s, col in enumerate(cols):
        ms = mono_swap(monos[s]) if skew else monos[s]
        ucol: dict = {}
        for t, p in col.items():
            exps = ucol.get(t, frozenset())
            for m in p:
                total = (ms[0] + m[0], ms[1] + m[1])
                ku = total[0] - monos[t][0]
                kv = total[1] - monos[t][1]
                if ku != kv or ku < 0:
                    raise ValidationError(
                        f"entry {cx.generators[s]}->{cx.generators[t]} "
                        f"does not restrict to the diagonal")
                exps = exps ^ {ku}
            ucol[t] = exps
        out.append({t: e for t, e in ucol.items() if e})
    return tuple(out)


def a0(x: PhiIotaComplex) -> UComplex:
    """Diagonal subcomplex as a free F2[U]-complex with restricted actions.

    One generator per parent generator g: multiply by U^A(g) when the
    Alexander grading A(g) is non-negative and by V^-A(g) otherwise, which
    is the unique monomial bringing g onto the diagonal.
    """
    cx = x.complex
    monos = tuple(_embed_mono(g) for g in cx.gradings)
    gradings = tuple(cx.gradings[i][0] - 2 * monos[i][0]
                     for i in range(cx.n))
    for i in range(cx.n):
        assert cx.gradings[i][1] - 2 * monos[i][1] == gradings[i]
    return UComplex(
        name=f"A0({cx.name})",
        labels=cx.generators,
        gradings=gradings,
        cols=_restrict_cols(cx, cx.diff, monos, False),
        phi_cols=_restrict_cols(cx, x.phi.cols, monos, False),
        iota_cols=_restrict_cols(cx, x.iota.cols, monos, True),
        embed_monos=monos,
    )


class A0Data:
    """Diagonal homology of a complex-with-actions, with the conversions
    needed by the locality solvers."""

    def __init__(self, x: PhiIotaComplex, window_bump: int = 0):
        self.x = x
        self.uc = a0(x)
        self.hom = DiagonalHomology(self.uc, window_bump=window_bump)

    def slice_vector(self, vec_c: dict, grading: int):
        """Convert a diagonal element of the parent complex to slice
        coordinates; returns None when a component falls outside."""
        pos = {g: i for i, g in enumerate(self.hom.slice_gens(grading))}
        out = 0
        monos = self.uc.embed_monos
        for g, p in vec_c.items():
            for m in p:
                k = m[0] - monos[g][0]
                if k != m[1] - monos[g][1] or k < 0 or g not in pos:
                    return None
                if self.uc.gradings[g] - 2 * k != grading:
                    return None
                out ^= 1 << pos[g]
        return out

    def nontorsion_bit(self, vec_c: dict, grading: int) -> int:
        if not vec_c:
            return 0
        v = self.slice_vector(vec_c, grading)
        if v is None:
            return 0
        return self.hom.nontorsion_bit(v, grading)

    def tower_cycle_in_c(self):
        """The lexicographically first nontorsion cycle at the tower top,
        as an element of the parent complex, plus its grading."""
        d = self.hom.tower_top
        rep = self.hom.tower_rep
        vec: dict = {}
        monos = self.uc.embed_monos
        for i, g in enumerate(self.hom.slice_gens(d)):
            if (rep >> i) & 1:
                k = (self.uc.gradings[g] - d) // 2
                vec[g] = frozenset({(monos[g][0] + k, monos[g][1] + k)})
        return vec, d


# -- spec-facing homology summary --------------------------------------------------

@dataclass
class UHomology:
    tower_top: int
    tower_rep: tuple  # ((label, u_exp), ...)
    torsion: tuple  # ((grading, order), ...) sorted
    u_action: dict  # grading -> list of class-coordinate bitmasks
    window: tuple


def _homology_summary(uc: UComplex, window_bump: int) -> UHomology:
    hom = DiagonalHomology(uc, window_bump=window_bump)
    top = hom.tower_top
    rep_bits = hom.tower_rep
    rep = []
    for i, g in enumerate(hom.slice_gens(top)):
        if (rep_bits >> i) & 1:
            rep.append((uc.labels[g], (uc.gradings[g] - top) // 2))
    torsion = []
    u_action = {}
    for d in range(hom.hi, hom.gmin - 1, -1):
        h = hom.homology(d)
        if h.rank == 0:
            continue
        rows = []
        hdown = hom.homology(d - 2)
        for z in h.reps:
            rows.append(hdown.class_coords(hom.push(z, d, 1)))
        u_action[d] = rows
        for z in h.reps:
            if hom.nontorsion_bit(z, d):
                continue
            order = None
            for k in range(1, hom.ntor + 2):
                if hom.homology(d - 2 * k).class_coords(
                        hom.push(z, d, k)) == 0:
                    order = k
                    break
            if order is None:
                raise WindowUnstableError(
                    f"{uc.name}: torsion order exceeds the window bound")
            torsion.append((d, order))
    return UHomology(tower_top=top, tower_rep=tuple(rep),
                     torsion=tuple(sorted(torsion)),
                     u_action=u_action, window=(hom.lo, hom.hi))


def homology_u(uc: UComplex, window_bump: int = 0) -> UHomology:
    """Tower/torsion decomposition, cross-checked at an enlarged window."""
    first = _homology_summary(uc, window_bump)
    second = _homology_summary(uc, window_bump + 1)
    if (first.tower_top, first.torsion) != (second.tower_top, second.torsion):
        raise WindowUnstableError(
            f"{uc.name}: enlarging the window changed the answer")
    return first


# -- cylinder totalisation ----------------------------------------------------------

@dataclass
class CylComplex:
    """Three copies of the diagonal subcomplex totalised along 1 + phi and
    1 + iota; the shifted blocks sit one grading lower so the total
    differential has degree -1."""

    uc: UComplex
    total: UComplex
    n_block: int

    def project(self, vec: int, d: int, hom_total: "DiagonalHomology",
                hom_a0: DiagonalHomology) -> int:
        """q: restriction of a grading-d slice vector to the first block."""
        src = hom_total.slice_gens(d)
        tgt_pos = {g: i for i, g in enumerate(hom_a0.slice_gens(d))}
        out = 0
        for i, g in enumerate(src):
            if g < self.n_block:
                if (vec >> i) & 1:
                    out |= 1 << tgt_pos[g]
        return out


def build_cyl(uc: UComplex) -> CylComplex:
    if uc.phi_cols is None or uc.iota_cols is None:
        raise ValidationError("cylinder needs both restricted actions")
    n = uc.n
    labels = (tuple(f"x:{m}" for m in uc.labels)
              + tuple(f"y:{m}" for m in uc.labels)
              + tuple(f"z:{m}" for m in uc.labels))
    gradings = (uc.gradings
                + tuple(g - 1 for g in uc.gradings)
                + tuple(g - 1 for g in uc.gradings))
    cols = []
    for s in range(n):
        col: dict = {}
        for t, e in uc.cols[s].items():
            col[t] = e
        one_phi = dict(uc.phi_cols[s])
        one_phi[s] = one_phi.get(s, frozenset()) ^ frozenset({0})
        for t, e in one_phi.items():
            if e:
                col[n + t] = e
        one_iota = dict(uc.iota_cols[s])
        one_iota[s] = one_iota.get(s, frozenset()) ^ frozenset({0})
        for t, e in one_iota.items():
            if e:
                col[2 * n + t] = e
        cols.append(col)
    for s in range(n):
        cols.append({n + t: e for t, e in uc.cols[s].items()})
    for s in range(n):
        cols.append({2 * n + t: e for t, e in uc.cols[s].items()})
    total = UComplex(name=f"Cyl({uc.name})", labels=labels,
                     gradings=gradings, cols=tuple(cols))
    # D^2 = 0 holds because 1 + phi and 1 + iota are chain maps
    for s in range(3 * n):
        acc = _apply_ucols(total.cols, {s: frozenset({0})})
        acc2 = _apply_ucols(total.cols, acc)
        if acc2:
            raise ValidationError("cylinder differential does not square to 0")
    return CylComplex(uc=uc, total=total, n_block=n)


# -- the delta invariant -------------------------------------------------------------

@dataclass
class DeltaResult:
    delta: int
    max_grading: int
    witness_x: dict  # label -> sorted U-exponents
    witness_y: dict
    witness_z: dict
    window: tuple
    q_ranks: dict  # grading -> number of cycle-basis classes with
    #                nontorsion projection


def delta(x: PhiIotaComplex, window_bump: int = 0,
          validated: bool = False) -> DeltaResult:
    """-1/2 of the top cylinder grading carrying a class whose projection
    to the diagonal subcomplex is U-nontorsion.

    The achieved grading must be even; an odd one raises rather than
    guessing a normalisation.  Stability at an enlarged window is
    re-verified.
    """
    if not validated:
        report = validate(x.complex, require_s3_type=True)
        if not report.ok or not report.s3_type:
            raise ValidationError(
                f"{x.complex.name}: {report.first_violation}")
    first = _delta_once(x, window_bump)
    second = _delta_once(x, window_bump + 1)
    if first.delta != second.delta:
        raise WindowUnstableError(
            f"{x.complex.name}: delta changed under window enlargement")
    if first.delta < 0:
        raise ConsistencyError(
            f"{x.complex.name}: negative delta on an S^3-type complex")
    return first


def _delta_once(x: PhiIotaComplex, window_bump: int) -> DeltaResult:
    uc = a0(x)
    a0_hom = DiagonalHomology(uc, window_bump=window_bump)
    cyl = build_cyl(uc)
    cyl_hom = DiagonalHomology(cyl.total, window_bump=window_bump,
                               expect_tower=False)
    q_ranks: dict = {}
    from .algebra import lexmin_affine, solve_f2_rows
    for d in range(a0_hom.gmax, cyl_hom.lo - 1, -1):
        h = cyl_hom.homology(d)
        lam = []
        for z in h.cycles:
            qz = cyl.project(z, d, cyl_hom, a0_hom)
            lam.append(a0_hom.nontorsion_bit(qz, d))
        q_ranks[d] = sum(lam)
        if not any(lam):
            continue
        if d % 2:
            raise GradingParityError(
                f"{x.complex.name}: nontorsion cylinder class at odd "
                f"grading {d}")
        # lexicographically first witness cycle with functional value 1
        nsrc = len(cyl_hom.slice_gens(d))
        bcols = cyl_hom.boundary_columns(d)
        nrow = len(cyl_hom.slice_gens(d - 1))
        rows = [0] * nrow
        for j, col in enumerate(bcols):
            for i in range(nrow):
                if (col >> i) & 1:
                    rows[i] |= 1 << j
        lam_row = 0
        for j in range(nsrc):
            qe = cyl.project(1 << j, d, cyl_hom, a0_hom)
            if a0_hom.nontorsion_bit(qe, d):
                lam_row |= 1 << j
        sol = solve_f2_rows(rows + [lam_row], [0] * nrow + [1], nsrc)
        from .algebra import F2Inconsistency
        assert not isinstance(sol, F2Inconsistency)
        bits = lexmin_affine(sol.particular, sol.kernel, nsrc)
        n = uc.n
        wx: dict = {}
        wy: dict = {}
        wz: dict = {}
        for i, g in enumerate(cyl_hom.slice_gens(d)):
            if not (bits >> i) & 1:
                continue
            k = (cyl.total.gradings[g] - d) // 2
            if g < n:
                wx.setdefault(uc.labels[g], []).append(k)
            elif g < 2 * n:
                wy.setdefault(uc.labels[g - n], []).append(k)
            else:
                wz.setdefault(uc.labels[g - 2 * n], []).append(k)
        value = -d // 2
        return DeltaResult(
            delta=value, max_grading=d,
            witness_x={k: sorted(v) for k, v in wx.items()},
            witness_y={k: sorted(v) for k, v in wy.items()},
            witness_z={k: sorted(v) for k, v in wz.items()},
            window=(cyl_hom.lo, cyl_hom.hi), q_ranks=q_ranks)
    raise ConsistencyError(
        f"{x.complex.name}: no nontorsion projection found in the window")


def delta_zero_iff_local(x: PhiIotaComplex, window_bump: int = 0) -> dict:
    """Cross-check the two characterisations of local triviality.

    delta vanishes exactly when a local map from the trivial complex
    exists; computing both and comparing is a consistency certificate for
    the whole pipeline.  Disagreement raises, carrying both certificates.
    """
    from .homotopy import local_map_exists
    from .models import trivial

    res = delta(x, window_bump=window_bump)
    cert = local_map_exists(trivial(), x, window_bump=window_bump)
    if (res.delta == 0) != cert.exists:
        raise ConsistencyError(
            f"{x.complex.name}: delta={res.delta} but local map from the "
            f"trivial complex {'exists' if cert.exists else 'does not exist'}",
        )
    return {"delta": res.delta, "local_map_exists": cert.exists,
            "delta_result": res, "local_certificate": cert}


# -- quotient tower shapes (S^3-type test) -------------------------------------------

@dataclass
class QuotientShape:
    tower_count: int
    tower_top: Optional[Grading]


def quotient_tower_shape(cx: KnotComplex, killed: str) -> QuotientShape:
    """Free-tower count and top of the quotient complex killing one
    variable, computed slicewise in the surviving variable."""
    if killed == "u":
        surviving = "v"
        step = (0, -2)
    elif killed == "v":
        surviving = "u"
        step = (-2, 0)
    else:
        raise ValueError("killed must be 'u' or 'v'")
    kill_idx = 0 if killed == "u" else 1

    cols = []
    maxexp = 0
    for col in cx.diff:
        out: dict = {}
        for t, p in col.items():
            keep = frozenset(m for m in p if m[kill_idx] == 0)
            if keep:
                out[t] = keep
                maxexp = max(maxexp, max(m[1 - kill_idx] for m in keep))
        cols.append(out)
    depth = cx.n * (1 + maxexp) + 2

    def slice_of(t: Grading) -> list:
        return [i for m, i in slice_pairs(cx.gradings, t, surviving)]

    def cycles_and_h(t: Grading):
        src = slice_of(t)
        tgt = slice_of(gr_add(t, (-1, -1)))
        tgt_pos = {g: i for i, g in enumerate(tgt)}
        rows = [0] * len(tgt)
        for j, g in enumerate(src):
            for tt, p in cols[g].items():
                if tt in tgt_pos:
                    rows[tgt_pos[tt]] |= 1 << j
        from .algebra import solve_f2_rows
        sol = solve_f2_rows(rows, [0] * len(tgt), len(src))
        cyc = sol.kernel
        up = slice_of(gr_add(t, (1, 1)))
        src_pos = {g: i for i, g in enumerate(src)}
        bnds = []
        for g in up:
            word = 0
            for tt, p in cols[g].items():
                if tt in src_pos:
                    word ^= 1 << src_pos[tt]
            if word:
                bnds.append(word)
        return src, _HSlice(len(src), cyc, bnds)

    rays: dict = {}
    for g in range(cx.n):
        gr = cx.gradings[g]
        if killed == "u":
            key = (gr[0], gr[1] % 2)
        else:
            key = (gr[1], gr[0] % 2)
        rays.setdefault(key, []).append(g)

    tower_count = 0
    tower_ray = None
    deep_slices: dict = {}
    for key, members in sorted(rays.items()):
        grs = [cx.gradings[g] for g in members]
        if killed == "u":
            deep = (grs[0][0], min(g[1] for g in grs) - 2 * depth)
        else:
            deep = (min(g[0] for g in grs) - 2 * depth, grs[0][1])
        _, h = cycles_and_h(deep)
        deep_slices[key] = (deep, h)
        if h.rank:
            tower_count += h.rank
            tower_ray = key
    if tower_count != 1:
        return QuotientShape(tower_count=tower_count, tower_top=None)

    deep, deep_h = deep_slices[tower_ray]
    members = rays[tower_ray]
    if killed == "u":
        top_v = max(cx.gradings[g][1] for g in members)
        span = (top_v - deep[1]) // 2
        tops = [(deep[0], top_v - 2 * k) for k in range(span + 1)]
    else:
        top_u = max(cx.gradings[g][0] for g in members)
        span = (top_u - deep[0]) // 2
        tops = [(top_u - 2 * k, deep[1]) for k in range(span + 1)]
    for t in tops:
        src, h = cycles_and_h(t)
        if not src:
            continue
        deep_src = slice_of(deep)
        deep_pos = {g: i for i, g in enumerate(deep_src)}
        for z in h.cycles:
            pushed = 0
            for i, g in enumerate(src):
                if (z >> i) & 1:
                    pushed |= 1 << deep_pos[g]
            if deep_h.class_coords(pushed):
                return QuotientShape(tower_count=1, tower_top=t)
    return QuotientShape(tower_count=1, tower_top=None)
