"""Shared helpers: randomized-but-seeded model scrambling and chain-map
sampling used by the property and consistency suites."""

from __future__ import annotations

import random

import pytest

from corkscrew.algebra import padd, pscale, pswap, slice_monomial
from corkscrew.complexes import (
    Endomorphism,
    KnotComplex,
    PhiIotaComplex,
    SKEW,
    STRAIGHT,
)
from corkscrew.homotopy import MapShape, MapSystem
from corkscrew.models import (
    figure_eight_iota_only,
    figure_eight_with_actions,
    staircase_model,
    staircase_with_box,
    thin_model,
    torus_model,
    unknot,
)


def _conjugate_cols(cols, i, j, m, skew: bool):
    """P^-1 F P for the basis change new_i = e_i + m e_j."""
    n = len(cols)
    out = [dict(c) for c in cols]
    add = pswap(frozenset({m})) if skew else frozenset({m})
    merged = dict(out[i])
    for t, p in cols[j].items():
        for mm in add:
            merged[t] = padd(merged.get(t, frozenset()), pscale(mm, p))
    out[i] = {t: p for t, p in merged.items() if p}
    for s in range(n):
        p_i = out[s].get(i)
        if p_i:
            out[s][j] = padd(out[s].get(j, frozenset()), pscale(m, p_i))
            if not out[s][j]:
                del out[s][j]
    return tuple({t: p for t, p in col.items() if p} for col in out)


def scramble(x: PhiIotaComplex, rng: random.Random,
             moves: int = 10) -> PhiIotaComplex:
    """Conjugate everything by random admissible transvections and a
    random relabelling; the result is chain isomorphic to the input."""
    cx = x.complex
    diff = cx.diff
    phi = x.phi.cols
    iota = x.iota.cols
    phi_inv = x.phi_inverse.cols if x.phi_inverse else None
    n = cx.n
    done = 0
    attempts = 0
    while done < moves and attempts < 40 * moves:
        attempts += 1
        i, j = rng.randrange(n), rng.randrange(n)
        if i == j:
            continue
        # new_i = e_i + m e_j is homogeneous iff gr(e_j) + deg(m) = gr(e_i)
        m = slice_monomial(cx.gradings[j], cx.gradings[i])
        if m is None:
            continue
        diff = _conjugate_cols(diff, i, j, m, False)
        phi = _conjugate_cols(phi, i, j, m, False)
        iota = _conjugate_cols(iota, i, j, m, True)
        if phi_inv is not None:
            phi_inv = _conjugate_cols(phi_inv, i, j, m, False)
        done += 1
    perm = list(range(n))
    rng.shuffle(perm)

    def permute(cols):
        out = [dict() for _ in range(n)]
        for s in range(n):
            out[perm[s]] = {perm[t]: p for t, p in cols[s].items()}
        return tuple(out)

    gens = [None] * n
    grads = [None] * n
    for s in range(n):
        gens[perm[s]] = f"g{perm[s]}"
        grads[perm[s]] = cx.gradings[s]
    cx2 = KnotComplex(f"scrambled({cx.name})", tuple(gens), tuple(grads),
                      permute(diff))
    phi2 = Endomorphism(cx2, cx2, permute(phi), STRAIGHT, (0, 0))
    iota2 = Endomorphism(cx2, cx2, permute(iota), SKEW, (0, 0))
    inv2 = None
    if phi_inv is not None:
        inv2 = Endomorphism(cx2, cx2, permute(phi_inv), STRAIGHT, (0, 0))
    return PhiIotaComplex(cx2, phi2, iota2, inv2)


def base_models():
    return [
        unknot(),
        torus_model(3),
        torus_model(-3),
        torus_model(5),
        staircase_model(2),
        figure_eight_with_actions(),
        figure_eight_iota_only(),
        thin_model(1, True),
        thin_model(-1, True),
        thin_model(2, False),
        thin_model(0, True),
        staircase_with_box(2, 3),
        staircase_with_box(0, 2),
    ]


def random_s3_models(seed: int, count: int):
    """Seeded stream of scrambled S^3-type models with valid actions."""
    rng = random.Random(seed)
    bases = base_models()
    out = []
    while len(out) < count:
        x = scramble(bases[rng.randrange(len(bases))], rng,
                     moves=rng.randrange(0, 12))
        out.append(x)
    return out


def random_chain_maps(cx: KnotComplex, seed: int, count: int,
                      bidegree=(0, 0)):
    """Seeded sample of straight chain self-maps of the complex."""
    d = cx.boundary()
    sys = MapSystem()
    shape = MapShape(cx, cx, STRAIGHT, bidegree)
    sys.add_unknown("f", shape)
    sys.add_equation([("f", lambda f: f.compose(d) + d.compose(f))])
    sol = sys.solutions_bits()
    rng = random.Random(seed)
    out = []
    k = len(sol.kernel)
    for _ in range(count):
        bits = sol.particular
        for i in range(k):
            if rng.getrandbits(1):
                bits ^= sol.kernel[i]
        out.append(shape.assemble(bits, sys.coords["f"]))
    return out


@pytest.fixture
def fig8():
    return figure_eight_with_actions()


@pytest.fixture
def fig8_iota():
    return figure_eight_iota_only()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, status, dt, desc in sorted(RESULTS):
        terminalreporter.write_line(
            f"criterion {num:2d}: {status}  ({dt:6.2f}s)  {desc}")
