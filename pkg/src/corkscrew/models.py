"""Builders for the model complexes the detection pipeline runs on, plus
the involution solver.

Grading conventions are pinned here once and for all:

* ``box(L)``: generators a, b, c, d with da = U^L b + V^L c, db = V^L d,
  dc = U^L d;  gr(a) = (1-L, 1-L), gr(b) = (L, -L), gr(c) = (-L, L),
  gr(d) = (L-1, L-1).
* ``staircase(n)`` (n > 0, step one): generators y0..y2n with
  d y(2i+1) = U y(2i) + V y(2i+2), gradings descending from
  gr(y0) = (0, -2n) to gr(y2n) = (-2n, 0); negative n via the dual.
* the figure-eight-shaped model: one extra generator x at (0, 0) beside a
  unit box, iota: x -> x+d, a -> a+x, b <-> c, d -> d; the periodic
  chain symmetry tau: x -> x+d, a -> a+x, b -> b, c -> c, d -> d.
"""

from __future__ import annotations

import json
from itertools import combinations
from typing import Optional

from .algebra import P_ONE, gr_add
from .complexes import (
    Endomorphism,
    KnotComplex,
    PhiIotaComplex,
    SKEW,
    STRAIGHT,
    action_from_dict,
    complex_from_dict,
    direct_sum,
    gr_neg,
    iota_complex,
    sarkar_map,
    tensor,
    validate,
)
from .errors import (
    NoInvolutionError,
    ParseError,
    SearchCapExceeded,
    ValidationError,
)

_U = frozenset({(1, 0)})
_V = frozenset({(0, 1)})


def _mono(a: int, b: int) -> frozenset:
    return frozenset({(a, b)})


# -- bare complexes ------------------------------------------------------------

def dot_complex(label: str = "y0", at=(0, 0), name: str = "dot") -> KnotComplex:
    return KnotComplex(name, (label,), (tuple(at),), ({},))


def box_complex(ell: int, at=None, suffix: str = "",
                name: Optional[str] = None) -> KnotComplex:
    """The square complex with side length ``ell``.

    Default gradings are the symmetric ones (a at (1-L, 1-L), d at
    (L-1, L-1)); passing ``at`` shifts the whole box so that the source
    corner a sits there instead."""
    if ell < 1:
        raise ValueError("box side length must be >= 1")
    a, b, c, d = (f"a{suffix}", f"b{suffix}", f"c{suffix}", f"d{suffix}")
    base = {
        a: (1 - ell, 1 - ell), b: (ell, -ell),
        c: (-ell, ell), d: (ell - 1, ell - 1),
    }
    if at is None:
        at = (1 - ell, 1 - ell)
    off = (at[0] - (1 - ell), at[1] - (1 - ell))
    gens = (a, b, c, d)
    grads = tuple(gr_add(base[g], off) for g in gens)
    cols = (
        {1: _mono(ell, 0), 2: _mono(0, ell)},   # a -> U^L b + V^L c
        {3: _mono(0, ell)},                     # b -> V^L d
        {3: _mono(ell, 0)},                     # c -> U^L d
        {},
    )
    return KnotComplex(name or f"box({ell})", gens, grads, cols)


def staircase_complex(n: int, name: Optional[str] = None) -> KnotComplex:
    """Step-one staircase with 2n+1 generators (a dot when n = 0)."""
    if n < 0:
        raise ValueError("use mirror_staircase_complex for negative n")
    if n == 0:
        return dot_complex(name=name or "dot")
    gens = tuple(f"y{i}" for i in range(2 * n + 1))
    grads = tuple((-i, -2 * n + i) for i in range(2 * n + 1))
    cols = []
    for i in range(2 * n + 1):
        if i % 2 == 1:
            cols.append({i - 1: _U, i + 1: _V})
        else:
            cols.append({})
    return KnotComplex(name or f"staircase({n})", gens, grads, tuple(cols))


def dual_complex(cx: KnotComplex, name: Optional[str] = None) -> KnotComplex:
    """Bare basis dual: gradings negated, matrix transposed."""
    gens = tuple(f"{g}*" for g in cx.generators)
    grads = tuple(gr_neg(g) for g in cx.gradings)
    cols = [dict() for _ in gens]
    for s, col in enumerate(cx.diff):
        for t, p in col.items():
            cols[t][s] = p
    return KnotComplex(name or f"-{cx.name}", gens, grads, tuple(cols))


# -- complexes with actions -----------------------------------------------------

def unknot() -> PhiIotaComplex:
    cx = KnotComplex("unknot", ("u0",), ((0, 0),), ({},))
    iota = Endomorphism(cx, cx, ({0: P_ONE},), SKEW, (0, 0))
    return PhiIotaComplex(cx, cx.identity(), iota, cx.identity())


def trivial() -> PhiIotaComplex:
    """The rank-one complex with identity actions (the unit local class)."""
    cx = KnotComplex("trivial", ("1",), ((0, 0),), ({},))
    iota = Endomorphism(cx, cx, ({0: P_ONE},), SKEW, (0, 0))
    return PhiIotaComplex(cx, cx.identity(), iota, cx.identity())


def _reflection_iota(cx: KnotComplex) -> Endomorphism:
    """y_i -> y_(2n-i) on a staircase-shaped complex."""
    n = cx.n
    cols = tuple({n - 1 - i: P_ONE} for i in range(n))
    return Endomorphism(cx, cx, cols, SKEW, (0, 0))


def staircase_model(tau: int, name: Optional[str] = None) -> PhiIotaComplex:
    """Staircase with the reflection involution; tau < 0 mirrors."""
    cx = staircase_complex(abs(tau), name=name)
    if tau < 0:
        cx = dual_complex(cx, name=name or f"staircase({tau})")
    return iota_complex(cx, _reflection_iota(cx))


def torus_model(q: int) -> PhiIotaComplex:
    """The (2, q) torus knot model, q odd; q < 0 gives the mirror."""
    if q % 2 == 0:
        raise ValueError("only (2, odd) torus knots have these models")
    n = (abs(q) - 1) // 2
    return staircase_model(n if q > 0 else -n, name=f"T(2,{q})")


def figure_eight_with_actions() -> PhiIotaComplex:
    """Dot-plus-box model with its involution and the periodic chain
    symmetry tau as phi; tau^2 equals the basepoint full twist on the
    nose, so tau^-1 = tau^3 exactly."""
    cx = direct_sum(dot_complex("x"), box_complex(1), name="4_1")
    ix, ia, ib, ic, id_ = (cx.index(g) for g in ("x", "a", "b", "c", "d"))
    iota_cols = [dict() for _ in range(cx.n)]
    iota_cols[ix] = {ix: P_ONE, id_: P_ONE}
    iota_cols[ia] = {ia: P_ONE, ix: P_ONE}
    iota_cols[ib] = {ic: P_ONE}
    iota_cols[ic] = {ib: P_ONE}
    iota_cols[id_] = {id_: P_ONE}
    iota = Endomorphism(cx, cx, tuple(iota_cols), SKEW, (0, 0))
    tau_cols = [dict() for _ in range(cx.n)]
    tau_cols[ix] = {ix: P_ONE, id_: P_ONE}
    tau_cols[ia] = {ia: P_ONE, ix: P_ONE}
    tau_cols[ib] = {ib: P_ONE}
    tau_cols[ic] = {ic: P_ONE}
    tau_cols[id_] = {id_: P_ONE}
    tau = Endomorphism(cx, cx, tuple(tau_cols), STRAIGHT, (0, 0))
    tau_inv = tau.compose(tau).compose(tau)
    assert tau.compose(tau_inv) == cx.identity()
    return PhiIotaComplex(cx, tau, iota, tau_inv)


def figure_eight_iota_only() -> PhiIotaComplex:
    """Same underlying model with phi = id (the plain involutive package)."""
    m = figure_eight_with_actions()
    return iota_complex(m.complex, m.iota)


def thin_model(tau: int, box_parity_odd: bool,
               name: Optional[str] = None) -> PhiIotaComplex:
    """Connected model of a thin knot: staircase(|tau|) (mirrored when
    tau < 0) plus one unit box when the box count is odd, the box corner a
    sharing the bigrading of the middle staircase generator."""
    stair = staircase_complex(abs(tau))
    if tau < 0:
        stair = dual_complex(stair)
    n = abs(tau)
    middle = stair.gradings[n]
    parts = [stair]
    if box_parity_odd:
        parts.append(box_complex(1, at=middle))
    cx = direct_sum(*parts, name=name or f"thin(tau={tau},"
                    f"{'odd' if box_parity_odd else 'even'})")
    iota, _ = solve_involution(cx)
    return iota_complex(cx, iota)


def staircase_with_box(tau: int, ell: int,
                       name: Optional[str] = None) -> PhiIotaComplex:
    """Staircase plus one box of side ``ell`` centred on the middle
    generator; the shapes arising as connected models of certain torus-knot
    combinations.

    For ``ell > 1`` the involution must couple the box corner to the middle
    staircase generator, which therefore has to be a cycle: |tau| odd with
    an odd ``ell > 1`` admits no involution and raises."""
    stair = staircase_complex(abs(tau))
    if tau < 0:
        stair = dual_complex(stair)
    middle = stair.gradings[abs(tau)]
    cx = direct_sum(stair, box_complex(ell, at=middle),
                    name=name or f"staircase({tau})+box({ell})")
    iota, _ = solve_involution(cx)
    return iota_complex(cx, iota)


# -- the involution solver --------------------------------------------------------

def involution_candidates(cx: KnotComplex, cap: int = 18) -> list:
    """All skew chain maps squaring to the basepoint twist up to strict
    homotopy of the square, lexicographically ordered.

    The chain-map condition is linear; the squaring condition is quadratic,
    so the affine solution space of the former is enumerated and each
    candidate's square is compared with the twist by a homotopy solve.
    """
    from .homotopy import MapShape, MapSystem, homotopic

    d = cx.boundary()
    s = sarkar_map(cx)
    sys = MapSystem()
    shape = MapShape(cx, cx, SKEW, (0, 0))
    sys.add_unknown("i", shape)
    sys.add_equation([("i", lambda f: f.compose(d) + d.compose(f))])
    sol = sys.solutions_bits()
    if sol is None:
        return []
    if len(sol.kernel) > cap:
        raise SearchCapExceeded(
            f"{cx.name}: {len(sol.kernel)} free bits of skew chain maps "
            f"exceed the enumeration cap {cap}")
    coords = sys.coords["i"]
    found = []
    for r in range(len(sol.kernel) + 1):
        for picks in combinations(range(len(sol.kernel)), r):
            bits = sol.particular
            for p in picks:
                bits ^= sol.kernel[p]
            cand = shape.assemble(bits, coords)
            if homotopic(cand.compose(cand), s) is not None:
                found.append((tuple((bits >> i) & 1
                                    for i in range(len(coords))), cand))
    found.sort(key=lambda t: t[0])
    return [cand for _, cand in found]


def solve_involution(cx: KnotComplex, cap: int = 18):
    """Lexicographically minimal involution candidate plus the homotopy
    certificate for its square; raises when none exists."""
    from .homotopy import homotopic

    cands = involution_candidates(cx, cap=cap)
    if not cands:
        raise NoInvolutionError(f"no involution found on {cx.name}")
    iota = cands[0]
    cert = homotopic(iota.compose(iota), sarkar_map(cx))
    return iota, cert


# -- file ingestion ----------------------------------------------------------------

def parse_complex(path: str, solve_missing_iota: bool = True) -> PhiIotaComplex:
    """Load a complex file, validate it, and fill in missing actions.

    phi defaults to the identity; a missing iota is solved for when the
    complex is of S^3 type.
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_complex_text(text, solve_missing_iota=solve_missing_iota)


def parse_complex_text(text: str,
                       solve_missing_iota: bool = True) -> PhiIotaComplex:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from exc
    return phi_iota_from_dict(doc, solve_missing_iota=solve_missing_iota)


def phi_iota_from_dict(doc: dict,
                       solve_missing_iota: bool = True) -> PhiIotaComplex:
    cx = complex_from_dict(doc)
    if "phi" in doc:
        phi = action_from_dict(cx, doc["phi"], "phi")
        if phi.mode != STRAIGHT:
            raise ValidationError("phi must be straight")
    else:
        phi = cx.identity()
    if "iota" in doc:
        iota = action_from_dict(cx, doc["iota"], "iota")
        if iota.mode != SKEW:
            raise ValidationError("iota must be skew")
    elif solve_missing_iota:
        iota, _ = solve_involution(cx)
    else:
        raise ValidationError(f"{cx.name}: no iota given")
    phi_inv = None
    if phi == cx.identity():
        phi_inv = cx.identity()
    else:
        from .homotopy import homotopy_inverse
        phi_inv = homotopy_inverse(cx, phi)
        if phi_inv is None:
            raise ValidationError(f"{cx.name}: phi has no homotopy inverse")
    return PhiIotaComplex(cx, phi, iota, phi_inv)


# -- bundled registry ----------------------------------------------------------------

def _tensor_tau_tau() -> PhiIotaComplex:
    m = figure_eight_with_actions()
    return tensor(m, m, name="4_1#4_1[tau|tau]")


def _tensor_id_id() -> PhiIotaComplex:
    m = figure_eight_iota_only()
    return tensor(m, m, name="4_1#4_1[id]")


def _twisted_figure_eight() -> PhiIotaComplex:
    """The figure-eight shape carrying the basepoint twist as its action
    (the swallow-follow factor)."""
    m = figure_eight_iota_only()
    s = sarkar_map(m.complex)
    return PhiIotaComplex(m.complex, s, m.iota, s)  # s is its own inverse


def _gompf_pair_tensor() -> PhiIotaComplex:
    """Underlying complex of the swallow-follow package on the double:
    the twist acting on the first factor only."""
    return tensor(_twisted_figure_eight(), figure_eight_iota_only(),
                  name="4_1#4_1[s|id]")


BUNDLED = {
    "unknot": unknot,
    "trivial": trivial,
    "4_1": figure_eight_with_actions,
    "4_1_iota": figure_eight_iota_only,
    "4_1_s": _twisted_figure_eight,
    "T2_3": lambda: torus_model(3),
    "T2_5": lambda: torus_model(5),
    "T2_7": lambda: torus_model(7),
    "mirror_T2_3": lambda: torus_model(-3),
    "T2_3#T2_3": lambda: tensor(torus_model(3), torus_model(3)),
    "4_1x4_1_tau": _tensor_tau_tau,
    "4_1x4_1_id": _tensor_id_id,
    "4_1x4_1_s": _gompf_pair_tensor,
    "stair_box_3": lambda: staircase_with_box(0, 3),
    "stair_box_5": lambda: staircase_with_box(0, 5),
}


def bundled(name: str) -> PhiIotaComplex:
    if name not in BUNDLED:
        raise KeyError(
            f"no bundled complex {name!r}; available: "
            f"{', '.join(sorted(BUNDLED))}")
    return BUNDLED[name]()


def build(model: str, **params) -> PhiIotaComplex:
    """Dispatch builder used by the command line.

    Models: unknot, trivial, box (via thin shapes), staircase(tau),
    torus(2, q), thin(tau, parity), figure_eight, from_file(path), or any
    bundled name.
    """
    if model == "unknot":
        return unknot()
    if model == "trivial":
        return trivial()
    if model == "box":
        # a lone box admits no involution squaring to the twist; it only
        # occurs as a summand (see box_complex for the bare complex)
        raise NoInvolutionError(
            "a lone box carries no involution; build a thin or "
            "staircase_with_box model instead")
    if model == "staircase":
        return staircase_model(params["tau"])
    if model == "torus":
        if params.get("p", 2) != 2:
            raise ValueError("only (2, q) torus models are built in")
        return torus_model(params["q"])
    if model == "thin":
        return thin_model(params["tau"], params["parity_odd"])
    if model == "staircase_with_box":
        return staircase_with_box(params["tau"], params["ell"])
    if model == "figure_eight":
        return figure_eight_with_actions()
    if model == "from_file":
        return parse_complex(params["path"])
    if model in BUNDLED:
        return bundled(model)
    raise ValueError(f"unknown model {model!r}")


def check_phi_iota(x: PhiIotaComplex) -> dict:
    """Full structural audit: chain maps, gradings, square of iota,
    commutation of the actions, invertibility of phi."""
    from .homotopy import commutes_up_to_homotopy, homotopic, homotopy_inverse

    report = {}
    v = validate(x.complex, require_s3_type=False)
    report["complex_ok"] = v.ok
    s = sarkar_map(x.complex)
    report["iota_squares_to_twist"] = (
        homotopic(x.iota.compose(x.iota), s) is not None)
    report["actions_commute"] = (
        commutes_up_to_homotopy(x.phi, x.iota) is not None)
    if x.phi_inverse is not None:
        report["phi_invertible"] = (
            homotopic(x.phi.compose(x.phi_inverse),
                      x.complex.identity()) is not None)
    else:
        report["phi_invertible"] = (
            homotopy_inverse(x.complex, x.phi) is not None)
    return report
