import numpy as np
import pytest

import qpolar as qp
from oracles import erasure_leaf_rates, erasure_rate_along


class TestSignSequence:
    def test_round_trip(self):
        seq = qp.SignSequence.from_string("-+-")
        assert str(seq) == "-+-"
        assert seq.signs == (0, 1, 0)
        assert len(seq) == 3

    def test_root(self):
        assert str(qp.SignSequence()) == ""
        assert len(qp.SignSequence()) == 0

    def test_child(self):
        assert str(qp.SignSequence().child(qp.PLUS).child(qp.MINUS)) == "+-"

    def test_validation(self):
        with pytest.raises(ValueError):
            qp.SignSequence((0, 2))
        with pytest.raises(ValueError):
            qp.SignSequence.from_string("-x")

    def test_hashable(self):
        assert {qp.SignSequence((0, 1)): 1}[qp.SignSequence.from_string("-+")] == 1


class TestErasureRate:
    def test_detects_erasure(self):
        for q, e in ((2, 0.3), (3, 0.5), (5, 0.0), (3, 1.0)):
            got = qp.erasure_rate(qp.erasure_channel(q, e))
            assert got == pytest.approx(e, abs=1e-12)

    def test_detects_after_split(self):
        minus = qp.canonicalize(qp.split(qp.erasure_channel(3, 0.4)).minus)
        assert qp.erasure_rate(minus) == pytest.approx(1 - 0.6 ** 2, abs=1e-12)

    def test_rejects_generic(self):
        assert qp.erasure_rate(qp.random_channel(3, 4, seed=1)) is None

    def test_rejects_near_erasure(self):
        table = qp.erasure_channel(2, 0.3).table.copy()
        table[0] = [0.69, 0.01, 0.30]
        noisy = qp.make_channel(2, range(3), table)
        assert qp.erasure_rate(noisy) is None

    def test_detects_disguised_erasure(self):
        # permuted columns and a proportionally split erasure column still
        # canonicalize to the same channel
        base = qp.erasure_channel(3, 0.4)
        table = np.column_stack([
            base.table[:, 3] * 0.25, base.table[:, 1], base.table[:, 0],
            base.table[:, 3] * 0.75, base.table[:, 2],
        ])
        disguised = qp.make_channel(3, "abcde", table)
        assert qp.erasure_rate(disguised) == pytest.approx(0.4, abs=1e-12)

    def test_noiseless_is_erasure_zero(self):
        assert qp.erasure_rate(qp.noiseless(4)) == 0.0


class TestBuildTree:
    def test_depth_zero(self):
        W = qp.random_channel(3, 4, seed=2)
        report = qp.build_tree(W, 0)
        assert len(report.leaf_capacities) == 1
        assert report.leaf_capacities[qp.SignSequence()] == qp.capacity(W)
        assert report.mean_capacity == report.root_capacity

    def test_erasure_leaves_match_oracle(self):
        report = qp.build_tree(qp.erasure_channel(3, 0.5), 3,
                               erasure_fast_path=False)
        oracle = erasure_leaf_rates(0.5, 3)
        for j, seq in enumerate(sorted(report.leaf_capacities, key=lambda s: s.signs)):
            assert report.leaf_capacities[seq] == pytest.approx(
                1.0 - oracle[j], abs=1e-12
            )

    def test_fast_path_agrees_with_tables(self):
        table = qp.build_tree(qp.erasure_channel(2, 0.3), 6, erasure_fast_path=False)
        scalar = qp.build_tree(qp.erasure_channel(2, 0.3), 6, erasure_fast_path=True)
        assert scalar.used_erasure_fast_path and not table.used_erasure_fast_path
        for seq, cap in table.leaf_capacities.items():
            assert scalar.leaf_capacities[seq] == pytest.approx(cap, abs=1e-9)

    def test_fast_path_requires_erasure_structure(self):
        with pytest.raises(ValueError, match="erasure"):
            qp.build_tree(qp.random_channel(3, 3, seed=3), 2, erasure_fast_path=True)

    def test_mean_preserved_every_depth(self):
        # closed channel families go deep; generic tables stop at depth 3
        # before the output budget kicks in
        deep = [qp.erasure_channel(q, e) for q in (2, 3, 5)
                for e in (0.25, 0.5)] + [qp.noiseless(3), qp.useless(3, 4)]
        for W in deep:
            report = qp.build_tree(W, 6, erasure_fast_path=False)
            for mean in report.depth_mean_capacity:
                assert mean == pytest.approx(report.root_capacity, abs=1e-9)
        for q in (2, 3):
            report = qp.build_tree(qp.random_channel(q, 2, seed=40 + q), 3,
                                   max_outputs=10 ** 6)
            for mean in report.depth_mean_capacity:
                assert mean == pytest.approx(report.root_capacity, abs=1e-9)

    def test_sibling_consistency(self):
        W = qp.random_channel(3, 2, seed=5)
        report = qp.build_tree(W, 3, max_outputs=2 * 10 ** 6, use_reduce=False,
                               delta=0.2)
        # reconstruct each internal node capacity from the report levels
        caps = {qp.SignSequence(): report.root_capacity}
        # only leaf capacities are in the map, so rebuild intermediate levels
        inter = qp.build_tree(W, 2, max_outputs=10 ** 6, use_reduce=False)
        caps.update(inter.leaf_capacities)
        one = qp.build_tree(W, 1, max_outputs=10 ** 6, use_reduce=False)
        caps.update(one.leaf_capacities)
        caps.update(report.leaf_capacities)
        for seq, cap in list(caps.items()):
            left = caps.get(qp.SignSequence(seq.signs + (qp.MINUS,)))
            right = caps.get(qp.SignSequence(seq.signs + (qp.PLUS,)))
            if left is None or right is None:
                continue
            assert left + right == pytest.approx(2 * cap, abs=1e-9)
            assert left <= cap + 1e-9 <= right + 2e-9

    def test_reduce_transparency(self):
        for W in (qp.random_channel(2, 2, seed=6), qp.random_channel(3, 2, seed=7),
                  qp.erasure_channel(2, 0.5)):
            plain = qp.build_tree(W, 3, use_reduce=False, max_outputs=2 * 10 ** 6,
                                  erasure_fast_path=False)
            reduced = qp.build_tree(W, 3, use_reduce=True, max_outputs=2 * 10 ** 6,
                                    erasure_fast_path=False)
            for seq, cap in plain.leaf_capacities.items():
                assert reduced.leaf_capacities[seq] == pytest.approx(cap, abs=1e-9)

    def test_budget_abort_names_branch(self):
        # without reduction the sizes are forced: 2, 4, 16, 256 on the
        # all-minus branch, so the first offender is '---'
        with pytest.raises(qp.OutputBudgetError) as err:
            qp.build_tree(qp.random_channel(2, 2, seed=8), 6, max_outputs=100,
                          use_reduce=False)
        assert str(err.value.sequence) == "---"
        assert err.value.outputs > 100

    def test_budget_root_check(self):
        with pytest.raises(qp.OutputBudgetError) as err:
            qp.build_tree(qp.random_channel(2, 8, seed=9), 1, max_outputs=4)
        assert str(err.value.sequence) == ""

    def test_workers_bit_identical(self):
        W = qp.erasure_channel(2, 0.5)
        serial = qp.build_tree(W, 5, erasure_fast_path=False, workers=1)
        threaded = qp.build_tree(W, 5, erasure_fast_path=False, workers=4)
        assert serial.leaf_capacities == threaded.leaf_capacities
        assert serial.depth_mean_capacity == threaded.depth_mean_capacity
        assert serial.depth_mean_abs_increment == threaded.depth_mean_abs_increment

    def test_validation(self):
        W = qp.noiseless(2)
        with pytest.raises(ValueError):
            qp.build_tree(W, -1)
        with pytest.raises(ValueError):
            qp.build_tree(W, 1, delta=0.7)
        with pytest.raises(ValueError):
            qp.build_tree(W, 1, workers=0)


class TestFractions:
    def test_noiseless_all_high(self):
        report = qp.build_tree(qp.noiseless(3), 4)
        high, low = qp.polarization_fractions(report, 0.01)
        assert high == 1.0
        assert low == 0.0

    def test_trend_toward_polarization(self):
        shallow = qp.build_tree(qp.erasure_channel(3, 0.4), 4, erasure_fast_path=True)
        deep = qp.build_tree(qp.erasure_channel(3, 0.4), 12, erasure_fast_path=True)
        h4, l4 = qp.polarization_fractions(shallow, 0.01)
        h12, l12 = qp.polarization_fractions(deep, 0.01)
        assert h12 + l12 > h4 + l4

    def test_fraction_sum_bounded(self):
        report = qp.build_tree(qp.erasure_channel(2, 0.5), 10)
        assert report.fraction_high + report.fraction_low <= 1.0

    def test_delta_validation(self):
        report = qp.build_tree(qp.noiseless(2), 1)
        with pytest.raises(ValueError):
            qp.polarization_fractions(report, 0.5)


class TestSamplePaths:
    def test_single_trivial_path(self):
        W = qp.random_channel(3, 3, seed=10)
        traces, summary = qp.sample_paths(W, 0, 1, seed=0)
        assert traces[0].capacities == (qp.capacity(W),)
        assert summary.depth_mean_capacity == (qp.capacity(W),)

    def test_paths_match_tree_branches_bitwise(self):
        W = qp.erasure_channel(2, 0.5)
        reports = [qp.build_tree(W, k, erasure_fast_path=False)
                   for k in range(6)]
        traces, _ = qp.sample_paths(W, 5, 8, seed=14, erasure_fast_path=False)
        for trace in traces:
            for k, cap in enumerate(trace.capacities):
                prefix = qp.SignSequence(trace.signs.signs[:k])
                assert cap == reports[k].leaf_capacities[prefix]

    def test_scalar_paths_match_scalar_tree_bitwise(self):
        W = qp.erasure_channel(2, 0.4)
        report = qp.build_tree(W, 6, erasure_fast_path=True)
        traces, _ = qp.sample_paths(W, 6, 8, seed=15, erasure_fast_path=True)
        for trace in traces:
            assert trace.capacities[-1] == report.leaf_capacities[trace.signs]

    def test_oracle_agreement_per_path(self):
        traces, _ = qp.sample_paths(qp.erasure_channel(3, 0.5), 6, 20, seed=16)
        for trace in traces:
            want = 1.0 - erasure_rate_along(0.5, trace.signs.signs)
            assert trace.capacities[-1] == pytest.approx(want, abs=1e-12)

    def test_mean_capacity_near_root(self):
        _, summary = qp.sample_paths(qp.erasure_channel(2, 0.5), 8, 400, seed=17)
        for mean in summary.depth_mean_capacity:
            assert mean == pytest.approx(0.5, abs=0.08)

    def test_workers_bit_identical(self):
        W = qp.erasure_channel(2, 0.5)
        serial = qp.sample_paths(W, 6, 16, seed=18, workers=1)
        threaded = qp.sample_paths(W, 6, 16, seed=18, workers=4)
        assert [t.capacities for t in serial[0]] == [t.capacities for t in threaded[0]]
        assert serial[1] == threaded[1]

    def test_seed_changes_draws(self):
        a, _ = qp.sample_paths(qp.erasure_channel(2, 0.5), 8, 4, seed=1)
        b, _ = qp.sample_paths(qp.erasure_channel(2, 0.5), 8, 4, seed=2)
        assert any(x.signs != y.signs for x, y in zip(a, b))

    def test_validation(self):
        with pytest.raises(ValueError):
            qp.sample_paths(qp.noiseless(2), 2, 0, seed=0)


class TestEpsilonCurve:
    def test_positive_and_monotone(self):
        points = qp.epsilon_curve(2, [0.1, 0.2, 0.3, 0.4], samples=10000, seed=19)
        gaps = [p.min_gap for p in points]
        assert all(g is not None and g > 0.0 for g in gaps)
        # a larger delta keeps a subset of channels, so the min cannot drop
        assert gaps == sorted(gaps)
        counts = [p.channels for p in points]
        assert counts == sorted(counts, reverse=True)

    def test_empty_band_reported(self):
        points = qp.epsilon_curve(2, [0.49], samples=3, seed=20)
        assert points[0].channels == 0
        assert points[0].min_gap is None

    def test_gap_values_match_transform_route(self):
        # the curve's internal kernel path must agree with gap() on the
        # same channels, reconstructed from the identical generator
        rng = np.random.default_rng(33)
        samples = 40
        points = qp.epsilon_curve(3, [0.05], samples=samples, seed=33)
        gaps = []
        for _ in range(samples):
            m = int(rng.choice((2, 3, 4, 5, 6, 7, 8)))
            W = qp.make_channel(3, range(m), rng.dirichlet(np.ones(m), size=3))
            c = qp.capacity(W)
            if 0.05 < c < 0.95:
                gaps.append(qp.gap(W).minus)
        assert points[0].channels == len(gaps)
        assert points[0].min_gap == pytest.approx(min(gaps), abs=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError, match="prime"):
            qp.epsilon_curve(4, [0.1], samples=10, seed=0)
        with pytest.raises(ValueError, match="delta"):
            qp.epsilon_curve(3, [0.6], samples=10, seed=0)


class TestCompositeSearch:
    def test_prime_rejected(self):
        with pytest.raises(ValueError, match="prime"):
            qp.composite_search(5, qp.erasure_channel(5, 0.5), 0.01)

    def test_subgroup_four(self):
        W = qp.subgroup_channel(4, 2)
        result = qp.composite_search(4, W, 0.01)
        assert result.exhaustive
        assert result.searched == 24
        assert abs(result.identity_gap) <= 1e-12
        # exhaustive enumeration: exactly the 16 parity-mixing permutations work
        assert len(result.good) == 16
        assert result.best_gap == pytest.approx(0.5, abs=1e-9)
        mappings = {perm.mapping for perm in result.good}
        assert (0, 1, 2, 3) not in mappings
        assert (0, 2, 1, 3) in mappings

    def test_good_permutation_verified_through_split(self):
        W = qp.subgroup_channel(4, 2)
        result = qp.composite_search(4, W, 0.01)
        pi = result.good[0]
        pair = qp.split_permuted(W, pi)
        assert qp.capacity(W) - qp.capacity(pair.minus) >= 0.01

    def test_subgroup_six_exhaustive(self):
        W = qp.subgroup_channel(6, 2)
        result = qp.composite_search(6, W, 0.01)
        assert result.exhaustive and result.searched == 720
        assert abs(result.identity_gap) <= 1e-12
        assert len(result.good) > 0

    def test_sampled_mode(self):
        W = qp.subgroup_channel(8, 2)
        result = qp.composite_search(8, W, 0.01, samples=300, seed=23)
        assert not result.exhaustive
        assert result.searched <= 301
        assert len(result.good) > 0

    def test_sampled_mode_q9(self):
        W = qp.subgroup_channel(9, 3)
        result = qp.composite_search(9, W, 0.01, samples=300, seed=29)
        assert not result.exhaustive
        assert abs(result.identity_gap) <= 1e-12
        assert len(result.good) > 0

    def test_sampled_gap_verified_through_split(self):
        W = qp.subgroup_channel(8, 2)
        result = qp.composite_search(8, W, 0.01, samples=100, seed=31)
        pi = result.best
        pair = qp.split_permuted(W, pi)
        assert qp.capacity(W) - qp.capacity(pair.minus) == pytest.approx(
            result.best_gap, abs=1e-12
        )

    def test_q_mismatch(self):
        with pytest.raises(ValueError, match="expected"):
            qp.composite_search(4, qp.subgroup_channel(6, 2), 0.01)

    def test_extremal_capacity_rejected(self):
        with pytest.raises(ValueError, match="extremal"):
            qp.composite_search(4, qp.noiseless(4), 0.01)


class TestReportSerialization:
    def test_dict_round_trip_fields(self):
        report = qp.build_tree(qp.erasure_channel(2, 0.5), 3)
        doc = qp.polarize.report_as_dict(report)
        assert doc["depth"] == 3
        assert doc["leaves"] == 8
        assert len(doc["depth_mean_capacity"]) == 4
        assert len(doc["depth_mean_abs_increment"]) == 3

    def test_leaf_rows(self):
        report = qp.build_tree(qp.erasure_channel(2, 0.5), 2)
        rows = list(qp.polarize.leaf_table_rows(report))
        assert [r[0] for r in rows] == ["--", "-+", "+-", "++"]
