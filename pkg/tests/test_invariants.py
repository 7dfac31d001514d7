"""Diagonal subcomplex, cylinder, homology summaries, and delta."""

from corkscrew.complexes import tensor
from corkscrew.invariants import (
    DiagonalHomology,
    a0,
    build_cyl,
    delta,
    delta_zero_iff_local,
    homology_u,
    quotient_tower_shape,
)
from corkscrew.models import (
    bundled,
    figure_eight_iota_only,
    staircase_model,
    thin_model,
    torus_model,
    unknot,
)

from conftest import random_s3_models
from oracle import brute_delta


class TestA0:
    def test_unknot(self):
        uc = a0(unknot())
        assert uc.labels == ("u0",)
        assert uc.gradings == (0,)
        assert uc.cols == ({},)

    def test_rank_is_generator_count(self, fig8):
        assert a0(fig8).n == 5
        assert a0(tensor(fig8, fig8)).n == 25

    def test_embedding_monomials(self):
        uc = a0(torus_model(3))
        # y0 has Alexander grading 1, y2 has -1
        assert uc.embed_monos == ((1, 0), (0, 0), (0, 1))
        assert uc.gradings == (-2, -1, -2)

    def test_differential_restricts(self, fig8):
        uc = a0(fig8)
        ia, ib, ic, id_ = (fig8.complex.index(g) for g in "abcd")
        assert uc.cols[ia] == {ib: frozenset({0}), ic: frozenset({0})}
        assert uc.cols[ib] == {id_: frozenset({1})}  # V d becomes U d

    def test_restricted_iota_is_u_equivariant_chain_map(self, fig8):
        from corkscrew.invariants import _apply_ucols
        uc = a0(fig8)
        for g in range(uc.n):
            lhs = _apply_ucols(uc.iota_cols, _apply_ucols(uc.cols,
                                                          {g: frozenset({0})}))
            rhs = _apply_ucols(uc.cols, _apply_ucols(uc.iota_cols,
                                                     {g: frozenset({0})}))
            assert lhs == rhs


class TestHomologySummary:
    def test_unknot_tower_only(self):
        h = homology_u(a0(unknot()))
        assert h.tower_top == 0
        assert h.torsion == ()

    def test_figure_eight_shape(self, fig8):
        h = homology_u(a0(fig8))
        assert h.tower_top == 0
        assert h.tower_rep == (("x", 0),)
        assert h.torsion == ((0, 1),)  # the class of d dies after one U

    def test_double_matches_table(self, fig8):
        h = homology_u(a0(tensor(fig8, fig8)))
        assert h.tower_top == 0
        assert h.tower_rep == (("x|x", 0),)
        assert h.torsion == ((0, 1),) * 4

    def test_brute_h0_dimension_agrees(self, fig8):
        from oracle import _span_basis, brute_h_classes
        x = tensor(fig8, fig8)
        _, _, cycles, bspan = brute_h_classes(x, 0, margin=8)
        dim = len(cycles) - len(_span_basis(bspan))
        assert dim == 5

    def test_trefoil_tower_below_zero(self):
        h = homology_u(a0(torus_model(3)))
        assert h.tower_top == -2
        assert h.torsion == ()


class TestCylinder:
    def test_unknot_identity_actions_kill_everything(self):
        cyl = build_cyl(a0(unknot()))
        assert all(not col for col in cyl.total.cols)

    def test_figure_eight_offdiagonal_entry(self, fig8):
        uc = a0(fig8)
        cyl = build_cyl(uc)
        ix = fig8.complex.index("x")
        id_ = fig8.complex.index("d")
        n = uc.n
        col = cyl.total.cols[ix]
        # (1 + iota) x = d lands in the third block
        assert col.get(2 * n + id_) == frozenset({0})
        # (1 + phi) x = d lands in the second block
        assert col.get(n + id_) == frozenset({0})

    def test_projection_intertwines_differentials(self, fig8):
        uc = a0(fig8)
        cyl = build_cyl(uc)
        hom_t = DiagonalHomology(cyl.total, expect_tower=False)
        hom_a = DiagonalHomology(uc)
        from corkscrew.invariants import _apply_ucols
        for d in range(hom_a.gmax, hom_a.gmin - 3, -1):
            for i in range(len(hom_t.slice_gens(d))):
                vec = 1 << i
                qd = cyl.project(
                    _slice_apply(cyl.total, hom_t, vec, d), d - 1,
                    hom_t, hom_a)
                dq = _slice_apply(uc, hom_a,
                                  cyl.project(vec, d, hom_t, hom_a), d)
                assert qd == dq


def _slice_apply(uc, hom, vec, d):
    """Apply the U-complex differential to a slice vector."""
    cols = hom.boundary_columns(d)
    out = 0
    for i in range(len(hom.slice_gens(d))):
        if (vec >> i) & 1:
            out ^= cols[i]
    return out


class TestDelta:
    def test_unknot_zero(self):
        res = delta(unknot())
        assert res.delta == 0
        assert res.witness_x == {"u0": [0]}
        assert res.witness_y == {} and res.witness_z == {}

    def test_double_with_periodic_actions_pinned_by_oracle(self):
        x = bundled("4_1x4_1_tau")
        res = delta(x)
        assert res.delta == 1  # frozen from the dense reference run
        assert res.max_grading == -2

    def test_double_with_identity_action_zero_with_witness(self):
        x = bundled("4_1x4_1_id")
        res = delta(x)
        assert res.delta == 0
        # witness equations hold exactly (the cycle solve enforces them);
        # additionally the identity action forces dy = 0 here
        assert res.witness_x  # nontrivial cycle echoed

    def test_oracle_agreement_small_suite(self):
        cases = [unknot(), torus_model(3), torus_model(-3),
                 thin_model(1, True), staircase_model(2),
                 figure_eight_iota_only()]
        for x in cases:
            assert delta(x).delta == brute_delta(x), x.complex.name

    def test_window_bump_stability(self):
        x = bundled("4_1x4_1_tau")
        for bump in (0, 1, 2):
            assert delta(x, window_bump=bump).delta == 1

    def test_witness_defining_equations(self, fig8):
        x = tensor(fig8, fig8)
        res = delta(x)
        uc = a0(x)
        from corkscrew.invariants import _apply_ucols

        def to_vec(w):
            out = {}
            for label, exps in w.items():
                g = uc.labels.index(label)
                out[g] = frozenset(exps)
            return out

        wx, wy, wz = (to_vec(res.witness_x), to_vec(res.witness_y),
                      to_vec(res.witness_z))
        assert _apply_ucols(uc.cols, wx) == {}
        one_phi = _one_plus(uc, uc.phi_cols, wx)
        assert _apply_ucols(uc.cols, wy) == one_phi
        one_iota = _one_plus(uc, uc.iota_cols, wx)
        assert _apply_ucols(uc.cols, wz) == one_iota

    def test_delta_is_a_local_class_invariant_under_scrambling(self):
        import random
        from conftest import scramble
        rng = random.Random(5)
        for x in (torus_model(3), thin_model(1, True)):
            base = delta(x).delta
            for _ in range(3):
                assert delta(scramble(x, rng, moves=6)).delta == base


def _one_plus(uc, action, vec):
    from corkscrew.invariants import _apply_ucols
    out = dict(_apply_ucols(action, vec))
    for g, e in vec.items():
        cur = out.get(g, frozenset())
        out[g] = cur ^ e
    return {g: e for g, e in out.items() if e}


class TestDeltaZeroIffLocal:
    def test_unknot(self):
        rep = delta_zero_iff_local(unknot())
        assert rep["delta"] == 0 and rep["local_map_exists"]

    def test_double_both_actions(self, fig8, fig8_iota):
        rep = delta_zero_iff_local(tensor(fig8_iota, fig8_iota))
        assert rep["delta"] == 0 and rep["local_map_exists"]
        rep2 = delta_zero_iff_local(tensor(fig8, fig8))
        assert rep2["delta"] == 1 and not rep2["local_map_exists"]

    def test_randomized_consistency(self):
        for x in random_s3_models(seed=23, count=8):
            delta_zero_iff_local(x)  # raises on disagreement


class TestQuotientShapes:
    def test_unknot(self):
        shape = quotient_tower_shape(unknot().complex, "u")
        assert shape.tower_count == 1 and shape.tower_top == (0, 0)

    def test_trefoil_tops(self):
        cx = torus_model(3).complex
        u_side = quotient_tower_shape(cx, "u")
        v_side = quotient_tower_shape(cx, "v")
        assert u_side.tower_top == (0, -2)
        assert v_side.tower_top == (-2, 0)

    def test_a0_homotopy_invariance_under_scrambling(self, fig8):
        import random
        from conftest import scramble
        rng = random.Random(9)
        base = homology_u(a0(fig8))
        for _ in range(4):
            other = homology_u(a0(scramble(fig8, rng, moves=8)))
            assert other.tower_top == base.tower_top
            assert other.torsion == base.torsion


def test_cylinder_map_induced_by_a_witness_commutes_with_projection():
    """A local-map witness (f, h_phi, h_iota) induces a cylinder map
    F(x, y, z) = (f x, f y + h_phi x, f z + h_iota x); the witness
    equations make it a chain map, and the projections intertwine it with
    f on the nose."""
    from corkscrew.homotopy import local_map_exists
    from corkscrew.models import trivial
    x2 = bundled("4_1x4_1_id")
    cert = local_map_exists(trivial(), x2)
    assert cert.exists
    f, hp, hi = cert.f, cert.h_phi, cert.h_iota
    t = {0: frozenset({(0, 0)})}  # the trivial generator
    d2 = x2.complex.boundary()

    def one_plus(m, vec):
        out = dict(m.apply(vec))
        for g, p in vec.items():
            out[g] = out.get(g, frozenset()) ^ p
        return {g: p for g, p in out.items() if p}

    # D2(F(t, 0, 0)) block by block: the x-block is d(f t) = 0, the y/z
    # blocks are (1+phi2) f t + d h t = 0 and (1+iota2) f t + d h t = 0,
    # matching F(D1(t, 0, 0)) = F(0, 0, 0) because the trivial complex has
    # identity actions
    assert d2.apply(f.apply(t)) == {}
    y_block = one_plus(x2.phi, f.apply(t))
    assert y_block == d2.apply(hp.apply(t))
    z_block = one_plus(x2.iota, f.apply(t))
    assert z_block == d2.apply(hi.apply(t))
    # q(F(t,0,0)) = f(q(t,0,0)) holds by construction of F
