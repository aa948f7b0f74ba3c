import math

import numpy as np
import pytest

from entrodim.coverpack import (
    bowen_entropy,
    critical_exponent,
    finite_disjoint_family,
    inflated_cover_value,
    min_cover_value,
    pack_value,
    packing_entropy,
    packing_outer_value,
    spanning_growth_exponent,
    vitali_select,
    vitali_triples_cover,
)
from entrodim.errors import InfeasibleError, InputError
from entrodim.gauges import exp_gauge
from entrodim.symbolic import Ball, BallFamily, CylinderSet, SubshiftSystem, balls_disjoint
from oracles import (
    LOG_GOLDEN,
    brute_max_pack,
    brute_min_cover,
    materialize_tree,
    random_cylinder_set,
    random_sft,
)

FULL2 = SubshiftSystem.full_shift(2)
GOLDEN = SubshiftSystem.golden_mean()
LOG2 = math.log(2.0)


class TestMinCover:
    def test_full_shift_critical_gauge(self):
        # 2^n * e^{-n log 2} = 1 at every level, verified by the DP
        cv = min_cover_value(FULL2, CylinderSet.full(FULL2), exp_gauge(LOG2), 3, 8)
        assert cv.value == pytest.approx(1.0, abs=1e-12)

    def test_single_cylinder_costs_its_gauge(self):
        # subcritical rate: one ball on the cylinder itself is optimal
        b = exp_gauge(0.6)
        z = CylinderSet.from_words([(0, 1, 0)])
        cv = min_cover_value(FULL2, z, b, 3, 8)
        assert cv.value == pytest.approx(b(3), abs=1e-15)
        assert len(cv.witness.balls) == 1 and cv.witness.balls[0].core == (0, 1, 0)

    def test_supercritical_deepest_level(self):
        s = LOG2 + 0.1
        cv = min_cover_value(FULL2, CylinderSet.full(FULL2), exp_gauge(s), 3, 12)
        assert cv.value == pytest.approx(2 ** 12 * math.exp(-12 * s), rel=1e-12)

    def test_witness_covers_and_costs_value(self):
        rng = np.random.default_rng(5)
        b = exp_gauge(0.6)
        for _ in range(20):
            sys_ = random_sft(rng)
            z = random_cylinder_set(rng, sys_, 4)
            cv = min_cover_value(sys_, z, b, 1, 5)
            cost = sum(b(ball.order) for ball in cv.witness.balls)
            assert cost == pytest.approx(cv.value, abs=1e-12)
            # every needed depth-5 node has a witness ball above it
            cores = [ball.core for ball in cv.witness.balls]
            for node in materialize_tree(sys_, z, 5):
                if len(node) == 5:
                    assert any(node[: len(c)] == c for c in cores)

    def test_matches_bruteforce_enumeration(self):
        rng = np.random.default_rng(42)
        for trial in range(25):
            sys_ = random_sft(rng, max_symbols=2)
            depth = int(rng.integers(2, 5))
            z = random_cylinder_set(rng, sys_, depth, max_cyls=3)
            n_min = int(rng.integers(1, depth + 1))
            if len(materialize_tree(sys_, z, depth)) > 30:
                continue
            b = exp_gauge(0.3 + 0.5 * float(rng.random()))
            fast = min_cover_value(sys_, z, b, n_min, depth).value
            slow = brute_min_cover(sys_, z, b, n_min, depth)
            assert fast == pytest.approx(slow, abs=1e-12)

    def test_monotone_in_set(self):
        rng = np.random.default_rng(9)
        b = exp_gauge(0.5)
        for _ in range(15):
            sys_ = random_sft(rng)
            z = random_cylinder_set(rng, sys_, 4)
            z_big = CylinderSet(z.cylinders + random_cylinder_set(rng, sys_, 4).cylinders)
            assert (min_cover_value(sys_, z, b, 2, 5).value
                    <= min_cover_value(sys_, z_big, b, 2, 5).value + 1e-12)

    def test_finite_subadditivity(self):
        rng = np.random.default_rng(19)
        b = exp_gauge(0.5)
        for _ in range(15):
            sys_ = random_sft(rng)
            z1 = random_cylinder_set(rng, sys_, 4)
            z2 = random_cylinder_set(rng, sys_, 4)
            union = CylinderSet(z1.cylinders + z2.cylinders)
            v_union = min_cover_value(sys_, union, b, 2, 5).value
            v_sum = (min_cover_value(sys_, z1, b, 2, 5).value
                     + min_cover_value(sys_, z2, b, 2, 5).value)
            assert v_union <= v_sum + 1e-12

    def test_depth_and_nmin_monotonicity(self):
        b = exp_gauge(LOG2 + 0.2)
        z = CylinderSet.full(FULL2)
        assert (min_cover_value(FULL2, z, b, 2, 8).value
                <= min_cover_value(FULL2, z, b, 2, 6).value + 1e-12)
        assert (min_cover_value(FULL2, z, b, 2, 8).value
                <= min_cover_value(FULL2, z, b, 4, 8).value + 1e-12)

    def test_rejects_bad_range(self):
        with pytest.raises(InputError):
            min_cover_value(FULL2, CylinderSet.full(FULL2), exp_gauge(1.0), 5, 3)


class TestPackValue:
    def test_single_point_nested_balls(self):
        z = CylinderSet.from_words([(0,) * 8])
        pv = pack_value(FULL2, z, 0.4, 3, 8)
        assert pv.value == pytest.approx(math.exp(-0.4 * 3), abs=1e-12)

    def test_full_shift_critical(self):
        pv = pack_value(FULL2, CylinderSet.full(FULL2), LOG2, 2, 9)
        assert pv.value == pytest.approx(1.0, abs=1e-12)

    def test_subcritical_deepest_antichain(self):
        pv = pack_value(FULL2, CylinderSet.full(FULL2), 0.5, 2, 10)
        assert pv.value == pytest.approx(2 ** 10 * math.exp(-5.0), rel=1e-12)

    def test_matches_bruteforce(self):
        rng = np.random.default_rng(111)
        for _ in range(25):
            sys_ = random_sft(rng, max_symbols=2)
            depth = int(rng.integers(2, 5))
            z = random_cylinder_set(rng, sys_, depth, max_cyls=3)
            n_min = int(rng.integers(1, depth + 1))
            if len(materialize_tree(sys_, z, depth)) > 30:
                continue
            s = 0.2 + float(rng.random())
            fast = pack_value(sys_, z, s, n_min, depth).value
            slow = brute_max_pack(sys_, z, depth, n_min, s)
            assert fast == pytest.approx(slow, abs=1e-12)

    def test_witness_disjoint_centers_meet_set(self):
        rng = np.random.default_rng(23)
        for _ in range(15):
            sys_ = random_sft(rng)
            z = random_cylinder_set(rng, sys_, 4)
            pv = pack_value(sys_, z, 0.6, 2, 5)
            balls = pv.witness.balls
            for i in range(len(balls)):
                for j in range(i + 1, len(balls)):
                    assert balls_disjoint(balls[i], balls[j])
            total = sum(math.exp(-0.6 * b.order) for b in balls)
            assert total == pytest.approx(pv.value, abs=1e-12)

    def test_monotone_in_set(self):
        rng = np.random.default_rng(29)
        for _ in range(15):
            sys_ = random_sft(rng)
            z = random_cylinder_set(rng, sys_, 4)
            z_big = CylinderSet(z.cylinders + random_cylinder_set(rng, sys_, 4).cylinders)
            assert (pack_value(sys_, z, 0.5, 2, 5).value
                    <= pack_value(sys_, z_big, 0.5, 2, 5).value + 1e-12)


class TestPackingOuter:
    def test_single_part_equals_pack(self):
        z = CylinderSet.from_words([(0, 0), (1, 0)])
        assert packing_outer_value(FULL2, z, 0.7, 2, 6, 1) == pytest.approx(
            pack_value(FULL2, z, 0.7, 2, 6).value)

    def test_two_points_no_improvement(self):
        z = CylinderSet.from_words([(0,) * 6, (1, 0, 1, 0, 1, 0)])
        s, n_min = 0.5, 3
        v = packing_outer_value(FULL2, z, s, n_min, 6, 2)
        assert v == pytest.approx(2 * math.exp(-s * n_min), abs=1e-12)

    def test_full_split_stays_one(self):
        z = CylinderSet.from_words([(0,), (1,)])
        v = packing_outer_value(FULL2, z, LOG2, 1, 6, 2)
        assert v == pytest.approx(1.0, abs=1e-10)

    def test_never_exceeds_pack_value(self):
        rng = np.random.default_rng(77)
        for _ in range(10):
            sys_ = random_sft(rng)
            z = random_cylinder_set(rng, sys_, 3)
            v_pack = pack_value(sys_, z, 0.6, 1, 4).value
            v_outer = packing_outer_value(sys_, z, 0.6, 1, 4, 2)
            assert v_outer <= v_pack + 1e-12

    def test_enumeration_bound(self):
        z = CylinderSet.from_words([tuple(map(int, f"{i:04b}")) for i in range(14)])
        with pytest.raises(InputError):
            packing_outer_value(FULL2, z, 0.5, 1, 4, 3, max_cylinders=8)


class TestCriticalExponent:
    def test_full_shift_closed_form(self):
        def value(s):
            return min_cover_value(FULL2, CylinderSet.full(FULL2), exp_gauge(s), 3, 16,
                                   with_witness=False).value
        s_star = critical_exponent(value, (0.05, 2.0), 1.0, 1e-4)
        assert s_star == pytest.approx(LOG2, abs=1e-3)

    def test_no_crossing_errors(self):
        with pytest.raises(InputError):
            critical_exponent(lambda s: 2.0, (0.1, 1.0), 1.0, 1e-3)


class TestEntropy:
    def test_full_shift_bowen(self):
        est = bowen_entropy(FULL2, CylinderSet.full(FULL2), [(2, 8), (3, 12)])
        assert est.estimate == pytest.approx(LOG2, abs=2e-3)

    def test_golden_mean_bowen(self):
        est = bowen_entropy(GOLDEN, CylinderSet.full(GOLDEN), [(2, 10), (3, 20)])
        assert est.estimate == pytest.approx(LOG_GOLDEN, abs=2e-2)

    def test_single_point_zero(self):
        z = CylinderSet.from_words([(0,) * 8])
        est = bowen_entropy(FULL2, z, [(2, 8)])
        assert est.estimate == 0.0

    def test_golden_mean_packing(self):
        # the packing quantity takes N -> infinity before epsilon; at finite
        # depth the honest proxy pins N = D, else shallow antichains bias up
        est = packing_entropy(GOLDEN, CylinderSet.full(GOLDEN), [(16, 16), (20, 20)])
        assert est.estimate == pytest.approx(LOG_GOLDEN, abs=2e-2)

    def test_order_inequality(self):
        # Bowen exponent <= packing exponent <= spanning exponent, the last
        # with the provable finite-scale mixing correction log(D-N+1)/N
        rng = np.random.default_rng(1234)
        for _ in range(8):
            sys_ = random_sft(rng)
            z = random_cylinder_set(rng, sys_, 5)
            n_min, depth = 2, 10
            h_b = bowen_entropy(sys_, z, [(n_min, depth)], tol=1e-4).estimate
            h_p = packing_entropy(sys_, z, [(n_min, depth)], tol=1e-4).estimate
            h_span = spanning_growth_exponent(sys_, z, depth, n_min)
            mixing = math.log(depth - n_min + 1) / n_min
            assert h_b <= h_p + 2e-4
            assert h_b <= h_span + 2e-4
            assert h_p <= h_span + mixing + 2e-4


class TestVitali:
    def test_already_disjoint_identity(self):
        fam = BallFamily((Ball((0, 0), 2), Ball((0, 1), 2), Ball((1, 0), 1)))
        out = vitali_select(fam)
        # pairwise disjoint input survives whole, reordered by (order, word)
        assert set(b.core for b in out.balls) == {(0, 0), (0, 1), (1,)}
        assert [b.order for b in out.balls] == [1, 2, 2]

    def test_nested_pair_keeps_shallow(self):
        fam = BallFamily((Ball((0,) * 5, 5), Ball((0,) * 5, 3)))
        out = vitali_select(fam)
        assert len(out.balls) == 1 and out.balls[0].order == 3
        assert vitali_triples_cover(out, fam)

    def test_spec_triple_example(self):
        fam = BallFamily((Ball((0, 0), 2), Ball((0, 0, 0), 3), Ball((0, 0, 1), 3)))
        out = vitali_select(fam)
        assert [b.core for b in out.balls] == [(0, 0)]
        # at 3*eps = 3/2 the tripled ball is the whole space
        from entrodim.coverpack import tripled_ball_core
        assert tripled_ball_core(out.balls[0]) == ()
        assert vitali_triples_cover(out, fam)

    def test_randomized_property(self):
        rng = np.random.default_rng(55)
        for _ in range(200):
            balls = []
            for _ in range(int(rng.integers(1, 40))):
                n = int(rng.integers(1, 7))
                word = tuple(int(v) for v in rng.integers(0, 2, size=n + 2))
                balls.append(Ball(word, n))
            fam = BallFamily(tuple(balls))
            out = vitali_select(fam)
            for i in range(len(out.balls)):
                for j in range(i + 1, len(out.balls)):
                    assert balls_disjoint(out.balls[i], out.balls[j])
            assert vitali_triples_cover(out, fam)
            # idempotent
            again = vitali_select(out)
            assert again.balls == out.balls


class TestFiniteDisjointFamily:
    def test_spec_window(self):
        fam = finite_disjoint_family(FULL2, CylinderSet.full(FULL2), LOG2, 0.5,
                                     4, 0.4, 0.6, 10)
        total = sum(math.exp(-LOG2 * b.order) for b in fam.balls)
        assert 0.4 < total < 0.6
        assert len(fam.balls) == 8 and all(b.order == 4 for b in fam.balls)
        assert total == pytest.approx(0.5, abs=1e-12)

    def test_single_point_wide_window(self):
        z = CylinderSet.from_words([(1, 0) * 4])
        fam = finite_disjoint_family(FULL2, z, 0.9, 0.5, 3, 0.0, 2.0, 8)
        assert len(fam.balls) == 1
        total = math.exp(-0.9 * 3)
        assert sum(math.exp(-0.9 * b.order) for b in fam.balls) == pytest.approx(total)

    def test_infeasible_reports_supremum(self):
        z = CylinderSet.from_words([(0,) * 6])
        with pytest.raises(InfeasibleError) as err:
            finite_disjoint_family(FULL2, z, 0.5, 0.5, 2, 0.9, 1.1, 6)
        assert err.value.achievable is not None

    def test_disjointness_and_orders(self):
        rng = np.random.default_rng(88)
        for _ in range(10):
            sys_ = random_sft(rng, max_symbols=2)
            z = CylinderSet.full(sys_)
            try:
                fam = finite_disjoint_family(sys_, z, 0.4, 0.5, 2, 0.3, 0.9, 8)
            except InfeasibleError:
                continue
            for i in range(len(fam.balls)):
                assert fam.balls[i].order >= 2
                for j in range(i + 1, len(fam.balls)):
                    assert balls_disjoint(fam.balls[i], fam.balls[j])


class TestInflatedCover:
    def test_tripled_radius_single_ball(self):
        b = exp_gauge(0.5)
        v = inflated_cover_value(FULL2, CylinderSet.full(FULL2), b, 2, 6, 1.5)
        assert v.value == pytest.approx(b(6), abs=1e-15)

    def test_canonical_radius_matches_plain(self):
        b = exp_gauge(0.8)
        z = CylinderSet.from_words([(0, 1), (1, 0)])
        v1 = inflated_cover_value(FULL2, z, b, 2, 6, 0.5)
        v2 = min_cover_value(FULL2, z, b, 2, 6, with_witness=False)
        assert v1.value == pytest.approx(v2.value, abs=1e-14)
