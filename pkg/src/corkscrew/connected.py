"""Connected complexes (minimal local representatives) and the
nontriviality of the basepoint twist on them.

The inputs this library certifies all decompose, after a change of basis,
into one staircase (possibly a single dot) plus boxes.  The recogniser
finds such a basis by a deterministic sweep of same-grading transvections
that monotonically shrinks the differential, then pattern-matches the
components.  For those shapes the connected complex is known exactly: the
staircase survives and the boxes cancel in pairs, so only the parity of
the box count matters.  Everything else falls back to a greedy search that
is always labelled as unverified and never feeds a positive verdict.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .algebra import P_ONE, Grading, gr_add, padd, pscale, slice_monomial
from .complexes import (
    Endomorphism,
    KnotComplex,
    PhiIotaComplex,
    STRAIGHT,
    direct_sum,
    iota_complex,
    sarkar_map,
    validate,
)
from .errors import ValidationError
from .homotopy import MapShape, MapSystem, homotopic, local_map_exists
from .invariants import _PivotSpan
from .models import box_complex, involution_candidates

GREEDY_CAVEAT = "greedy nonmaximal: unverified"


@dataclass(frozen=True)
class StandardForm:
    """Staircase-plus-boxes shape of a complex after a basis change."""

    staircase_steps: tuple  # arrow exponents along the zigzag, length 2n
    staircase_sign: int  # +1 as built, -1 mirrored
    staircase_anchor: Grading  # bigrading of the first path generator
    boxes: tuple  # ((side_length, corner_bigrading), ...)
    roles: tuple  # generator ids in canonical role order

    @property
    def staircase_rank(self) -> int:
        return len(self.staircase_steps) + 1

    def describe(self) -> str:
        n = len(self.staircase_steps) // 2
        stair = "dot" if n == 0 else f"staircase({self.staircase_sign * n})"
        if not self.boxes:
            return stair
        boxes = " + ".join(f"box({ell})" for ell, _ in self.boxes)
        return f"{stair} + {boxes}"


# -- transvection sweep ----------------------------------------------------------

def _apply_transvection(cols, i, j, m):
    """Basis change new_i = e_i + m e_j on column form (source dicts)."""
    n = len(cols)
    out = [dict(c) for c in cols]
    # source side: the new column i is the old column i plus m times column j
    merged = dict(out[i])
    for t, p in cols[j].items():
        merged[t] = padd(merged.get(t, frozenset()), pscale(m, p))
    out[i] = {t: p for t, p in merged.items() if p}
    # target side: coefficients on e_j gain m times the coefficient on e_i
    for s in range(n):
        p_i = out[s].get(i)
        if p_i:
            out[s][j] = padd(out[s].get(j, frozenset()), pscale(m, p_i))
            if not out[s][j]:
                del out[s][j]
    return [
        {t: p for t, p in col.items() if p} for col in out
    ]


def _objective(cols):
    terms = 0
    mixed = 0
    out_u: dict = {}
    out_v: dict = {}
    in_u: dict = {}
    in_v: dict = {}
    for s, col in enumerate(cols):
        for t, p in col.items():
            for a, b in p:
                terms += 1
                if a and b:
                    mixed += 1
                elif a:
                    out_u[s] = out_u.get(s, 0) + 1
                    in_u[t] = in_u.get(t, 0) + 1
                else:
                    out_v[s] = out_v.get(s, 0) + 1
                    in_v[t] = in_v.get(t, 0) + 1
    conflicts = sum(max(0, k - 1) for d in (out_u, out_v, in_u, in_v)
                    for k in d.values())
    return (terms, conflicts, mixed)


def _sweep(gradings, cols, max_passes: int = 80):
    """Deterministic local minimisation of the differential by
    same-grading (and monomial-shifted) transvections."""
    n = len(gradings)
    cols = [dict(c) for c in cols]
    moves = []
    best = _objective(cols)
    for _ in range(max_passes):
        improved = False
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                # new_i = e_i + m e_j needs gr(e_j) + deg(m) = gr(e_i)
                m = slice_monomial(gradings[j], gradings[i])
                if m is None:
                    continue
                trial = _apply_transvection(cols, i, j, m)
                score = _objective(trial)
                if score < best:
                    cols = trial
                    best = score
                    moves.append((i, j, m))
                    improved = True
        if not improved:
            break
    return cols, moves


# -- pattern matching -------------------------------------------------------------

def _pure_arrows(cols):
    """Arrows (src, tgt, var, exp) when every entry is a single pure-power
    monomial; None otherwise."""
    arrows = []
    for s, col in enumerate(cols):
        for t, p in col.items():
            if len(p) != 1:
                return None
            ((a, b),) = p
            if a and b:
                return None
            if not a and not b:
                return None  # unit entry: the complex is not reduced
            arrows.append((s, t, "u" if a else "v", a or b))
    return arrows


def _components(n, arrows):
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for s, t, _, _ in arrows:
        rs, rt = find(s), find(t)
        if rs != rt:
            parent[rs] = rt
    comps: dict = {}
    for g in range(n):
        comps.setdefault(find(g), []).append(g)
    return sorted(comps.values(), key=lambda c: c[0])


def _match_box(nodes, arrows, gradings):
    if len(nodes) != 4 or len(arrows) != 4:
        return None
    out: dict = {}
    for s, t, var, e in arrows:
        out.setdefault(s, []).append((t, var, e))
    sources2 = [g for g in nodes if len(out.get(g, [])) == 2]
    if len(sources2) != 1:
        return None
    a = sources2[0]
    legs = dict((var, (t, e)) for t, var, e in out[a])
    if set(legs) != {"u", "v"}:
        return None
    b, e1 = legs["u"]
    c, e2 = legs["v"]
    db = out.get(b, [])
    dc = out.get(c, [])
    if len(db) != 1 or len(dc) != 1:
        return None
    (d1, var_b, e3), (d2, var_c, e4) = db[0], dc[0]
    if d1 != d2 or var_b != "v" or var_c != "u":
        return None
    ell = e1
    if {e1, e2, e3, e4} != {ell}:
        return None
    if out.get(d1):
        return None
    return {"ell": ell, "corner": gradings[a], "roles": (a, b, c, d1)}


def _match_staircase(nodes, arrows, gradings):
    """Zigzag path with alternating arrow variables; a dot when trivial."""
    if len(nodes) == 1 and not arrows:
        return {"steps": (), "sign": 1, "anchor": gradings[nodes[0]],
                "roles": (nodes[0],)}
    if len(nodes) % 2 == 0 or len(arrows) != len(nodes) - 1:
        return None
    adj: dict = {g: [] for g in nodes}
    out: dict = {g: [] for g in nodes}
    for s, t, var, e in arrows:
        adj[s].append(t)
        adj[t].append(s)
        out[s].append((t, var, e))
    degrees = {g: len(adj[g]) for g in nodes}
    ends = [g for g in nodes if degrees[g] == 1]
    if len(ends) != 2 or any(d > 2 for d in degrees.values()):
        return None
    start = max(ends, key=lambda g: (gradings[g][0], -nodes.index(g)))
    path = [start]
    prev = None
    while len(path) < len(nodes):
        nxt = [g for g in adj[path[-1]] if g != prev]
        if len(nxt) != 1:
            return None
        prev = path[-1]
        path.append(nxt[0])
    sources = {g for g in nodes if out[g]}
    odd = set(path[1::2])
    even = set(path[0::2])
    if sources == odd:
        sign = 1
    elif sources == even and len(nodes) > 1:
        sign = -1
    else:
        return None
    steps = []
    for g in path:
        for t, var, e in sorted(out[g], key=lambda x: path.index(x[0])):
            steps.append(e)
    # arrow variables must alternate consistently with the gradings; the
    # bidegree contract already forces this on a valid complex
    return {"steps": tuple(steps), "sign": sign, "anchor": gradings[path[0]],
            "roles": tuple(path)}


def recognize_standard(cx: KnotComplex,
                       max_passes: int = 80) -> Optional[StandardForm]:
    """Detect a basis change exhibiting staircase + boxes; None otherwise."""
    got = _recognize(cx, max_passes)
    return got[0] if got else None


# -- basis matrices over the ring -----------------------------------------------

def _identity_cols(n):
    return [{i: P_ONE} for i in range(n)]


def _poly_matmul(a_cols, b_cols):
    """Columns of A o B when both are column-major polynomial matrices."""
    out = []
    for col in b_cols:
        acc: dict = {}
        for t, p in col.items():
            for m in p:
                for tt, q in a_cols[t].items():
                    acc[tt] = padd(acc.get(tt, frozenset()), pscale(m, q))
        out.append({t: p for t, p in acc.items() if p})
    return out


def _moves_matrices(n, moves):
    """(M, M^-1) of a transvection sequence, as polynomial columns."""
    p_cols = _identity_cols(n)
    for i, j, m in moves:
        merged = dict(p_cols[i])
        for t, poly in p_cols[j].items():
            merged[t] = padd(merged.get(t, frozenset()), pscale(m, poly))
        p_cols[i] = {t: poly for t, poly in merged.items() if poly}
    q_cols = _identity_cols(n)
    for i, j, m in moves:
        # coordinates transform contravariantly: c_j gains m * c_i
        for s in range(n):
            p_i = q_cols[s].get(i)
            if p_i:
                q_cols[s][j] = padd(q_cols[s].get(j, frozenset()),
                                    pscale(m, p_i))
                if not q_cols[s][j]:
                    del q_cols[s][j]
    return p_cols, q_cols


def _conjugate_diff(cols, m_cols, q_cols):
    return _poly_matmul(q_cols, _poly_matmul(cols, m_cols))


# -- square-summand peeling -------------------------------------------------------

def _peel_boxes(gradings, cols):
    """Basis (M, M^-1) splitting off every square summand of a uniform
    one-exponent complex, or None when the shape does not apply.

    Writing the differential as U^L A + V^L B with constant F2 matrices,
    squares are detected by the composite P = AB: its image is spanned by
    the square sinks, and the projector onto the spans {x, Ax, Bx, Px}
    built from dual functionals of the P-image commutes with both A and B,
    so its kernel is a complementary subcomplex on the nose.
    """
    n = len(gradings)
    ell = None
    a_cols = [0] * n
    b_cols = [0] * n
    for s, col in enumerate(cols):
        for t, p in col.items():
            if len(p) != 1:
                return None
            ((a, b),) = p
            if (a and b) or (not a and not b):
                return None
            e = a or b
            if ell is None:
                ell = e
            if e != ell:
                return None
            if a:
                a_cols[s] |= 1 << t
            else:
                b_cols[s] |= 1 << t
    if ell is None:
        return None

    def apply(mat, vec):
        out = 0
        i = 0
        while vec:
            if vec & 1:
                out ^= mat[i]
            vec >>= 1
            i += 1
        return out

    p_vecs = [apply(a_cols, b_cols[s]) for s in range(n)]
    span = _PivotSpan()
    xs = []
    for s in range(n):
        if p_vecs[s] and span.insert(p_vecs[s]):
            xs.append(s)
    if not xs:
        return None
    quads = []
    for s in xs:
        x = 1 << s
        quads.append((x, apply(a_cols, x), apply(b_cols, x), p_vecs[s]))
    # full decomposition X + AX + BX + PX + completion, in that order
    order = ([q[0] for q in quads] + [q[1] for q in quads]
             + [q[2] for q in quads] + [q[3] for q in quads])
    deco = _PivotSpan()
    for v in order:
        if not deco.insert(v):
            return None  # quadruples fail to be independent: bail out
    completion = []
    for s in range(n):
        if deco.insert(1 << s):
            completion.append(1 << s)
    r = len(xs)
    px_offset = 3 * r

    def coords(v):
        """Coordinates of v over the recorded decomposition basis."""
        out = [0] * n
        for pos, (pivot, w, _) in enumerate(deco.rows):
            if (v >> pivot) & 1:
                v ^= w
                out[pos] ^= 1
        assert v == 0
        return out

    def sigma(v):
        out = 0
        abv = apply(a_cols, apply(b_cols, v))
        av = apply(a_cols, v)
        bv = apply(b_cols, v)
        c_ab = coords(abv)
        c_b = coords(bv)
        c_a = coords(av)
        c_v = coords(v)
        for i, (x, ax, bx, px) in enumerate(quads):
            k = px_offset + i
            if c_ab[k]:
                out ^= x
            if c_b[k]:
                out ^= ax
            if c_a[k]:
                out ^= bx
            if c_v[k]:
                out ^= px
        return out

    new_basis = []
    for x, ax, bx, px in quads:
        new_basis.extend((x, ax, bx, px))
    for c in completion:
        new_basis.append(c ^ sigma(c))
    check = _PivotSpan()
    for v in new_basis:
        if not check.insert(v):
            return None
    m_bits = new_basis
    # invert the constant change of basis over F2
    inv_cols = _f2_inverse(m_bits, n)
    if inv_cols is None:
        return None
    m_cols = [{t: P_ONE for t in range(n) if (v >> t) & 1} for v in m_bits]
    q_cols = [{t: P_ONE for t in range(n) if (inv_cols[s] >> t) & 1}
              for s in range(n)]
    # each new basis vector is homogeneous; read its grading off any
    # generator in its support
    new_grads = tuple(gradings[(v & -v).bit_length() - 1] for v in m_bits)
    for k, v in enumerate(m_bits):
        for t in range(n):
            if (v >> t) & 1:
                assert gradings[t] == new_grads[k]
    return m_cols, q_cols, new_grads


def _f2_inverse(cols_bits, n):
    """Columns of the inverse of a constant F2 matrix given by columns."""
    work = list(cols_bits)
    inv = [1 << j for j in range(n)]
    for col in range(n):
        sel = None
        for i in range(col, n):
            if (work[i] >> col) & 1:
                sel = i
                break
        if sel is None:
            return None
        work[col], work[sel] = work[sel], work[col]
        inv[col], inv[sel] = inv[sel], inv[col]
        for i in range(n):
            if i != col and ((work[i] >> col) & 1):
                work[i] ^= work[col]
                inv[i] ^= inv[col]
    # inv now holds columns of M^-1 in the transposed sense; work = identity
    return inv


def _match_all(names, gradings, cols):
    n = len(names)
    arrows = _pure_arrows(cols)
    if arrows is None:
        return None
    comps = _components(n, arrows)
    stair = None
    boxes = []
    for nodes in comps:
        sub = [ar for ar in arrows if ar[0] in nodes]
        box = _match_box(nodes, sub, gradings) if len(nodes) == 4 else None
        if box is not None:
            boxes.append(box)
            continue
        cand = _match_staircase(nodes, sub, gradings)
        if cand is None:
            return None
        if stair is not None:
            return None  # two towers: not a knot-shaped complex
        stair = cand
    if stair is None:
        return None
    boxes.sort(key=lambda b: (b["ell"], b["corner"]))
    roles = tuple(stair["roles"]) + tuple(r for b in boxes for r in b["roles"])
    form = StandardForm(
        staircase_steps=stair["steps"],
        staircase_sign=stair["sign"],
        staircase_anchor=stair["anchor"],
        boxes=tuple((b["ell"], b["corner"]) for b in boxes),
        roles=tuple(names[r] for r in roles),
    )
    return form, roles


def _recognize(cx: KnotComplex, max_passes: int = 80):
    cols, moves = _sweep(cx.gradings, [dict(c) for c in cx.diff], max_passes)
    m_cols, q_cols = _moves_matrices(cx.n, moves)
    grads = cx.gradings
    got = _match_all(cx.generators, grads, cols)
    if got is None:
        # try splitting off square summands first, then sweep again
        peeled = _peel_boxes(cx.gradings, cols)
        if peeled is None:
            return None
        m2, q2, grads = peeled
        cols2 = _conjugate_diff(cols, m2, q2)
        cols3, moves3 = _sweep(grads, [dict(c) for c in cols2], max_passes)
        m3, q3 = _moves_matrices(cx.n, moves3)
        names = tuple(f"v{k}" for k in range(cx.n))
        got = _match_all(names, grads, cols3)
        if got is None:
            return None
        m_cols = _poly_matmul(_poly_matmul(m_cols, m2), m3)
        q_cols = _poly_matmul(q3, _poly_matmul(q2, q_cols))
        # the composed change of basis must be an honest conjugation onto
        # a valid complex; cheap to certify, catastrophic if wrong
        assert _poly_matmul(q_cols, m_cols) == _identity_cols(cx.n)
        assert _conjugate_diff([dict(c) for c in cx.diff],
                               m_cols, q_cols) == cols3
        probe = KnotComplex(cx.name, names, grads, tuple(cols3))
        assert validate(probe).ok
    form, roles = got
    return form, m_cols, q_cols, roles


# -- model reconstruction -----------------------------------------------------------

def model_from_form(steps, sign, anchor, boxes,
                    name: str = "standard") -> KnotComplex:
    """Rebuild the canonical complex of a recognised form.

    The staircase is laid out along the recognition path: generator i at
    anchor + i*(-1, 1), sources at odd positions for the builder
    orientation and at even positions for the mirror."""
    if any(s != 1 for s in steps):
        raise ValidationError("only step-one staircases are rebuilt")
    count = len(steps) + 1
    gens = tuple(f"y{i}" for i in range(count))
    grads = tuple((anchor[0] - i, anchor[1] + i) for i in range(count))
    source_parity = 1 if sign > 0 else 0
    cols = []
    for i in range(count):
        col = {}
        if count > 1 and i % 2 == source_parity:
            if i > 0:
                col[i - 1] = frozenset({(1, 0)})
            if i + 1 < count:
                col[i + 1] = frozenset({(0, 1)})
        cols.append(col)
    stair = KnotComplex("stair", gens, grads, tuple(cols))
    parts = [stair]
    for k, (ell, corner) in enumerate(boxes):
        parts.append(box_complex(ell, at=corner, suffix="" if not k else str(k)))
    return direct_sum(*parts, name=name)


# -- connected complexes ---------------------------------------------------------------

@dataclass
class ConnectedResult:
    conn: PhiIotaComplex  # phi is the identity: this is an iota-complex
    form: Optional[StandardForm]
    inclusion: Endomorphism  # conn -> input
    projection: Endomorphism  # input -> conn
    method: str  # "exact-standard" | "greedy"
    caveat: Optional[str] = None
    certificates: dict = field(default_factory=dict)


def connected_complex(x: PhiIotaComplex, seed: int = 0,
                      rounds: int = 64) -> ConnectedResult:
    """Minimal local representative of the iota-complex underlying x.

    Standard forms are answered exactly: the staircase plus one box when
    the box count is odd, the staircase alone when it is even, with
    machine-checked local maps in both directions as certificates.  The
    greedy fallback is labelled and never certifies anything.
    """
    cx = x.complex
    got = _recognize(cx)
    if got is not None:
        form, m_cols, q_cols, roles = got
        if len(form.boxes) <= 1:
            return _conn_whole(x, form, m_cols, q_cols, roles)
        lengths = {ell for ell, _ in form.boxes}
        if len(lengths) == 1:
            res = _conn_reduced(x, form)
            if res is not None:
                return res
    return _conn_greedy(x, seed=seed, rounds=rounds)


def _conn_whole(x: PhiIotaComplex, form: StandardForm, p_cols, q_cols, roles):
    """The input itself is connected; present it in the standard basis."""
    cx = x.complex
    model = model_from_form(form.staircase_steps, form.staircase_sign,
                            form.staircase_anchor, form.boxes,
                            name=f"conn({cx.name})")
    # inclusion: model generator r corresponds to P(e_role[r])
    inc_cols = [dict(p_cols[r]) for r in roles]
    inclusion = Endomorphism(model, cx, tuple(inc_cols), STRAIGHT, (0, 0))
    pos = {r: k for k, r in enumerate(roles)}
    proj_cols = []
    for s in range(cx.n):
        proj_cols.append({pos[t]: p for t, p in q_cols[s].items()})
    projection = Endomorphism(cx, model, tuple(proj_cols), STRAIGHT, (0, 0))
    assert projection.compose(inclusion) == model.identity()
    dm, dc = model.boundary(), cx.boundary()
    assert inclusion.compose(dm) == dc.compose(inclusion)
    iota_conn = projection.compose(x.iota).compose(inclusion)
    conn = iota_complex(model, iota_conn)
    return ConnectedResult(conn=conn, form=form, inclusion=inclusion,
                           projection=projection, method="exact-standard")


def _invert_iso(w: Endomorphism) -> Optional[Endomorphism]:
    sys = MapSystem()
    sys.add_unknown("z", MapShape(w.target, w.source, STRAIGHT, (0, 0)))
    ident = w.source.identity()
    sys.add_equation([("z", lambda z: z.compose(w))], rhs=ident)
    ans, _ = sys.solve()
    if ans is None:
        return None
    z = ans["z"]
    if w.compose(z) == w.target.identity():
        return z
    return None


def _conn_reduced(x: PhiIotaComplex, form: StandardForm):
    """Several boxes of one size: the connected model keeps box-count
    parity.  Certified by local maps both ways against the rebuilt model;
    None when no involution candidate on the model matches."""
    ell = form.boxes[0][0]
    keep = []
    if len(form.boxes) % 2 == 1:
        n = len(form.staircase_steps) // 2
        # centre the surviving box on the middle staircase generator
        model_stair = model_from_form(form.staircase_steps,
                                      form.staircase_sign,
                                      form.staircase_anchor, ())
        middle = model_stair.gradings[n]
        keep = [(ell, middle)]
    model = model_from_form(form.staircase_steps, form.staircase_sign,
                            form.staircase_anchor, tuple(keep),
                            name=f"conn({x.complex.name})")
    x_iota = iota_complex(x.complex, x.iota)
    try:
        candidates = involution_candidates(model)
    except ValidationError:
        return None
    for iota_m in candidates:
        conn = iota_complex(model, iota_m)
        down = local_map_exists(x_iota, conn)
        if not down.exists:
            continue
        up = local_map_exists(conn, x_iota)
        if not up.exists:
            continue
        w = down.f.compose(up.f)  # self-local map of the minimal model
        z = _invert_iso(w)
        if z is None:
            continue
        inclusion = up.f.compose(z)
        projection = down.f
        assert projection.compose(inclusion) == model.identity()
        return ConnectedResult(
            conn=conn, form=StandardForm(
                staircase_steps=form.staircase_steps,
                staircase_sign=form.staircase_sign,
                staircase_anchor=form.staircase_anchor,
                boxes=tuple(keep), roles=tuple(model.generators)),
            inclusion=inclusion, projection=projection,
            method="exact-standard",
            certificates={"down": down, "up": up})
    return None


def _conn_greedy(x: PhiIotaComplex, seed: int, rounds: int):
    """Best-effort kernel growth; the result is the input itself whenever
    no strictly larger kernel is found, and always carries the caveat."""
    from .homotopy import self_local_space

    cx = x.complex
    space = self_local_space(iota_complex(cx, x.iota))
    rng = random.Random(seed)
    best = cx.identity()
    best_rank = _window_kernel_dim(best)
    n_basis = len(space.basis)
    for _ in range(rounds):
        if not n_basis:
            break
        sel = rng.getrandbits(n_basis)
        if not space.locality(sel):
            continue
        g = space.members(sel)
        candidate = g.compose(best)
        rank = _window_kernel_dim(candidate)
        if rank > best_rank:
            best, best_rank = candidate, rank
    if best == cx.identity():
        conn = iota_complex(cx, x.iota)
        return ConnectedResult(conn=conn, form=None,
                               inclusion=cx.identity(),
                               projection=cx.identity(),
                               method="greedy", caveat=GREEDY_CAVEAT)
    image = _image_complex(x, best)
    if image is None:
        conn = iota_complex(cx, x.iota)
        return ConnectedResult(conn=conn, form=None,
                               inclusion=cx.identity(),
                               projection=cx.identity(),
                               method="greedy",
                               caveat=GREEDY_CAVEAT + "; image not free")
    conn, inclusion, projection = image
    return ConnectedResult(conn=conn, form=None, inclusion=inclusion,
                           projection=projection, method="greedy",
                           caveat=GREEDY_CAVEAT)


def _window_kernel_dim(f: Endomorphism) -> int:
    """Total slice-kernel dimension over the generator window."""
    from .algebra import f2_rank

    cx = f.source
    total = 0
    seen = set()
    for gr in cx.gradings:
        for da in (0, 2, 4):
            for db in (0, 2, 4):
                t = (gr[0] - da, gr[1] - db)
                if t in seen:
                    continue
                seen.add(t)
                src = cx.slice(t)
                if not src:
                    continue
                tgt = cx.slice(t)
                tpos = {(m, g): i for i, (m, g) in enumerate(tgt)}
                rows = [0] * len(tgt)
                for j, (m, g) in enumerate(src):
                    img = f.apply({g: frozenset({m})})
                    for gg, p in img.items():
                        for mm in p:
                            rows[tpos[(mm, gg)]] |= 1 << j
                total += len(src) - f2_rank(rows, len(src))
    return total


def _image_complex(x: PhiIotaComplex, f: Endomorphism):
    """Present im(f) as a complex on a minimal homogeneous generating set
    drawn from the columns of f; None when the presentation fails."""
    cx = x.complex
    kept = []  # indices whose column generates
    cols = [f.cols[i] for i in range(cx.n)]
    for i in range(cx.n):
        if not cols[i]:
            continue
        if not _in_span(cx, cols[i], cx.gradings[i],
                        [(cols[k], cx.gradings[k]) for k in kept]):
            kept.append(i)
    if not kept:
        return None
    gens = tuple(f"w{k}" for k in range(len(kept)))
    grads = tuple(cx.gradings[i] for i in kept)
    span = [(cols[k], cx.gradings[k]) for k in kept]
    d = cx.boundary()
    dcols = []
    for i in kept:
        img = d.apply(cols[i])
        combo = _express(cx, img, gr_add(cx.gradings[i], (-1, -1)), span)
        if combo is None:
            return None
        dcols.append(combo)
    model = KnotComplex(f"im({cx.name})", gens, grads, tuple(dcols))
    rep = validate(model)
    if not rep.ok:
        return None
    icols = []
    for i in kept:
        img = f.apply(x.iota.apply({i: P_ONE}))
        from .algebra import gr_swap
        combo = _express(cx, img, gr_swap(cx.gradings[i]), span)
        if combo is None:
            return None
        icols.append(combo)
    from .complexes import SKEW
    iota_m = Endomorphism(model, model, tuple(icols), SKEW, (0, 0),
                          check=False)
    if iota_m.grading_violation():
        return None
    inclusion = Endomorphism(model, cx, tuple({t: p for t, p in cols[i].items()}
                                              for i in kept),
                             STRAIGHT, (0, 0), check=False)
    projection = Endomorphism(cx, model,
                              tuple(_express(cx, f.cols[s],
                                             cx.gradings[s], span) or {}
                                    for s in range(cx.n)),
                              STRAIGHT, (0, 0), check=False)
    try:
        conn = iota_complex(model, iota_m)
    except ValidationError:
        return None
    return conn, inclusion, projection


def _in_span(cx, vec, grading, span) -> bool:
    return _express(cx, vec, grading, span) is not None


def _express(cx, vec, grading, span):
    """Write a homogeneous element over monomial multiples of the spanning
    columns; dict {span-index: Poly} or None."""
    from .algebra import solve_f2_rows

    tgt = cx.slice(grading)
    if not tgt and vec:
        return None
    tpos = {(m, g): i for i, (m, g) in enumerate(tgt)}
    unknowns = []  # (span index, monomial with col_gr + deg = grading)
    for k, (col, col_gr) in enumerate(span):
        m = slice_monomial(col_gr, grading)
        if m is not None:
            unknowns.append((k, m))
    rows = [0] * len(tgt)
    for uidx, (k, m) in enumerate(unknowns):
        scaled: dict = {}
        for t, p in span[k][0].items():
            scaled[t] = pscale(m, p)
        for gg, p in scaled.items():
            for mm in p:
                key = (mm, gg)
                if key not in tpos:
                    return None
                rows[tpos[key]] |= 1 << uidx
    rhs = [0] * len(tgt)
    for gg, p in vec.items():
        for mm in p:
            key = (mm, gg)
            if key not in tpos:
                return None
            rhs[tpos[key]] ^= 1
    sol = solve_f2_rows(rows, rhs, len(unknowns))
    from .algebra import F2Inconsistency
    if isinstance(sol, F2Inconsistency):
        return None
    combo: dict = {}
    for uidx, (k, m) in enumerate(unknowns):
        if (sol.particular >> uidx) & 1:
            combo[k] = padd(combo.get(k, frozenset()), frozenset({m}))
    return {k: p for k, p in combo.items() if p}


# -- the nontriviality decision ----------------------------------------------------------

@dataclass
class TwistTriviality:
    nontrivial: bool
    conn: ConnectedResult
    homotopy: Optional[object]  # witness when trivial
    obstruction: Optional[dict]  # certificate when nontrivial
    caveat: Optional[str]


def s_nontrivial(x: PhiIotaComplex, seed: int = 0) -> TwistTriviality:
    """Is the basepoint full twist homotopic to the identity on the
    connected complex?  Nontrivial means it is not."""
    res = connected_complex(x, seed=seed)
    model = res.conn.complex
    s = sarkar_map(model)
    h = homotopic(s, model.identity())
    if h is not None:
        return TwistTriviality(False, res, h, None, res.caveat)
    return TwistTriviality(True, res, None,
                           {"kind": "twist-id-homotopy-infeasible",
                            "conn": model.name}, res.caveat)
