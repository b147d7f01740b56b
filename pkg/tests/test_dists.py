import numpy as np
import pytest

import qpolar as qp
from oracles import cyclic_convolve_lists, entropy_base_q

Q3 = qp.Alphabet(3)
Q2 = qp.Alphabet(2)


class TestAlphabet:
    def test_primality_flag(self):
        assert qp.Alphabet(2).is_prime
        assert qp.Alphabet(7).is_prime
        assert not qp.Alphabet(4).is_prime
        assert not qp.Alphabet(9).is_prime

    @pytest.mark.parametrize("bad", [1, 0, -3, 3.7, "3"])
    def test_rejects_bad_sizes(self, bad):
        with pytest.raises(ValueError):
            qp.Alphabet(bad)


class TestDistConstruction:
    def test_rejects_bad_sum(self):
        with pytest.raises(ValueError):
            qp.Dist(Q2, [0.5, 0.4])

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            qp.Dist(Q2, [1.1, -0.1])

    def test_rejects_wrong_length(self):
        with pytest.raises(ValueError):
            qp.Dist(Q2, [1.0])

    def test_renormalizes_small_drift(self):
        p = qp.Dist(Q2, [0.5 + 3e-10, 0.5])
        assert abs(p.mass.sum() - 1.0) <= 1e-12

    def test_exact_input_left_untouched(self):
        vals = np.array([0.7, 0.2, 0.1])
        p = qp.Dist(Q3, vals)
        assert np.array_equal(p.mass, vals)

    def test_immutable(self):
        p = qp.uniform(Q3)
        with pytest.raises(ValueError):
            p.mass[0] = 0.9
        with pytest.raises(AttributeError):
            p.mass = None


class TestEntropy:
    def test_uniform_is_one(self):
        assert qp.entropy(qp.uniform(Q3)) == pytest.approx(1.0, abs=1e-12)

    def test_point_mass_is_zero(self):
        assert qp.entropy(qp.point_mass(qp.Alphabet(5), 0)) == 0.0

    def test_two_point_value(self):
        # direct evaluation: ln(2)/ln(3)
        p = qp.Dist(Q3, [0.5, 0.5, 0.0])
        assert qp.entropy(p) == pytest.approx(0.6309297535714574, abs=1e-15)

    def test_matches_reference_on_samples(self):
        mass = qp.sample_simplex(qp.Alphabet(5), 200, seed=9)
        for row in mass:
            p = qp.Dist(qp.Alphabet(5), row)
            assert qp.entropy(p) == pytest.approx(entropy_base_q(row), abs=1e-12)

    def test_range_and_equality_cases(self):
        for q in (2, 3, 5, 7):
            alphabet = qp.Alphabet(q)
            for row in qp.sample_simplex(alphabet, 500, seed=q):
                h = qp.entropy(qp.Dist(alphabet, row))
                assert 0.0 <= h <= 1.0
                if np.abs(row - 1.0 / q).max() > 0.01:
                    assert h < 1.0 - 1e-9
                if row.max() < 1.0 - 1e-6:
                    assert h > 0.0


class TestShift:
    def test_zero_shift_identity(self):
        p = qp.Dist(Q3, [0.7, 0.2, 0.1])
        assert np.array_equal(qp.cyclic_shift(p, 0).mass, p.mass)

    def test_shift_by_one(self):
        p = qp.Dist(Q3, [0.7, 0.2, 0.1])
        assert np.array_equal(qp.cyclic_shift(p, 1).mass, [0.1, 0.7, 0.2])

    def test_uniform_invariant(self):
        u = qp.uniform(Q3)
        for i in range(3):
            assert np.array_equal(qp.cyclic_shift(u, i).mass, u.mass)

    def test_composes_additively_bitwise(self, rng):
        alphabet = qp.Alphabet(7)
        p = qp.Dist(alphabet, rng.dirichlet(np.ones(7)))
        for i in range(7):
            for j in range(7):
                two = qp.cyclic_shift(qp.cyclic_shift(p, i), j)
                one = qp.cyclic_shift(p, (i + j) % 7)
                assert np.array_equal(two.mass, one.mass)

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            qp.cyclic_shift(qp.uniform(Q3), 3)
        with pytest.raises(IndexError):
            qp.cyclic_shift(qp.uniform(Q3), -1)


class TestConvolve:
    def test_point_mass_is_identity(self):
        p = qp.Dist(Q3, [0.7, 0.2, 0.1])
        out = qp.cyclic_convolve(p, qp.point_mass(Q3, 0))
        assert np.array_equal(out.mass, p.mass)

    def test_uniform_absorbs(self, rng):
        p = qp.Dist(Q3, rng.dirichlet(np.ones(3)))
        out = qp.cyclic_convolve(p, qp.uniform(Q3))
        assert np.abs(out.mass - 1.0 / 3).max() < 1e-12

    def test_binary_hand_value(self):
        p = qp.Dist(Q2, [0.9, 0.1])
        r = qp.Dist(Q2, [0.8, 0.2])
        out = qp.cyclic_convolve(p, r)
        # 0.9*0.8 + 0.1*0.2 and the complement
        assert out.mass == pytest.approx([0.74, 0.26], abs=1e-15)

    def test_matches_reference(self, rng):
        alphabet = qp.Alphabet(5)
        for _ in range(50):
            p = rng.dirichlet(np.ones(5))
            r = rng.dirichlet(np.ones(5))
            got = qp.cyclic_convolve(qp.Dist(alphabet, p), qp.Dist(alphabet, r))
            want = cyclic_convolve_lists(list(p), list(r))
            assert got.mass == pytest.approx(want, abs=1e-14)

    def test_commutative_and_associative(self, rng):
        alphabet = qp.Alphabet(5)
        for _ in range(50):
            p = qp.Dist(alphabet, rng.dirichlet(np.ones(5)))
            r = qp.Dist(alphabet, rng.dirichlet(np.ones(5)))
            s = qp.Dist(alphabet, rng.dirichlet(np.ones(5)))
            pr = qp.cyclic_convolve(p, r)
            rp = qp.cyclic_convolve(r, p)
            assert np.abs(pr.mass - rp.mass).max() <= 1e-12
            left = qp.cyclic_convolve(pr, s)
            right = qp.cyclic_convolve(p, qp.cyclic_convolve(r, s))
            assert np.abs(left.mass - right.mass).max() <= 1e-12

    def test_weak_entropy_monotonicity(self, rng):
        for q in (2, 3, 5):
            alphabet = qp.Alphabet(q)
            for _ in range(200):
                p = qp.Dist(alphabet, rng.dirichlet(np.ones(q)))
                r = qp.Dist(alphabet, rng.dirichlet(np.ones(q)))
                h = qp.entropy(qp.cyclic_convolve(p, r))
                assert h >= max(qp.entropy(p), qp.entropy(r)) - 1e-12

    def test_alphabet_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            qp.cyclic_convolve(qp.uniform(Q2), qp.uniform(Q3))


class TestL1Distance:
    def test_identical_zero(self):
        p = qp.Dist(Q3, [0.7, 0.2, 0.1])
        assert qp.l1_distance(p, p) == 0.0

    def test_point_vs_uniform(self):
        assert qp.l1_distance(qp.point_mass(Q2, 0), qp.uniform(Q2)) == 1.0

    def test_disjoint_supports(self):
        assert qp.l1_distance(qp.point_mass(Q3, 0), qp.point_mass(Q3, 1)) == 2.0


class TestL1UniformBound:
    def test_equality_at_uniform(self):
        got = qp.check_l1_uniform_bound(qp.uniform(Q3))
        assert got.distance == 0.0
        assert abs(got.bound) <= 1e-15
        assert got.holds

    def test_point_mass_value(self):
        got = qp.check_l1_uniform_bound(qp.point_mass(Q2, 0))
        assert got.distance == 1.0
        # (1 - 0) * ln(2) / 2
        assert got.bound == pytest.approx(0.34657359027997264, abs=1e-15)
        assert got.holds

    def test_random_sweep_holds(self):
        for q in (2, 3, 5, 7):
            sweep = qp.sweep_l1_uniform_bound(q, 2000, seed=31 + q)
            assert sweep.violations == 0

    def test_composite_alphabet_allowed(self):
        # this bound does not need primality
        got = qp.check_l1_uniform_bound(qp.point_mass(qp.Alphabet(4), 1))
        assert got.holds


class TestShiftSeparation:
    def test_uniform_degenerate(self):
        got = qp.check_shift_separation(qp.uniform(Q3))
        assert got.min_distance == 0.0
        assert abs(got.bound) <= 1e-15
        assert got.holds

    def test_binary_skewed_value(self):
        got = qp.check_shift_separation(qp.Dist(Q2, [0.9, 0.1]))
        assert got.min_distance == pytest.approx(1.6, abs=1e-12)
        # (1 - H(0.9, 0.1)) * ln(2) / 8 computed directly
        assert got.bound == pytest.approx(0.04600802589606214, abs=1e-15)
        assert got.holds

    def test_rejects_composite(self):
        with pytest.raises(ValueError, match="prime"):
            qp.check_shift_separation(qp.uniform(qp.Alphabet(4)))
        with pytest.raises(ValueError, match="prime"):
            qp.sweep_shift_separation(6, 10, seed=0)

    def test_random_sweep_holds(self):
        for q in (2, 3, 5, 7):
            sweep = qp.sweep_shift_separation(q, 2000, seed=77 + q)
            assert sweep.violations == 0


class TestConvolutionGain:
    def test_uniform_r_fixed_point(self, rng):
        for _ in range(10):
            p = qp.Dist(Q3, rng.dirichlet(np.ones(3)))
            got = qp.check_convolution_gain(p, qp.uniform(Q3), eta=0.1)
            assert abs(got.gain) <= 1e-12

    def test_point_mass_p_no_gain(self, rng):
        r = qp.Dist(Q3, rng.dirichlet(np.ones(3)))
        got = qp.check_convolution_gain(qp.point_mass(Q3, 1), r, eta=0.1)
        assert got.gain == 0.0
        assert not got.hypotheses_met   # H(p) = 0 < eta

    def test_worked_example(self):
        p = qp.Dist(Q3, [0.5, 0.5, 0.0])
        r = qp.Dist(Q3, [0.8, 0.1, 0.1])
        got = qp.check_convolution_gain(p, r, eta=0.3)
        # H(p) = 0.63093 >= 0.3 and H(r) = 0.58167 <= 0.7
        assert got.hypotheses_met
        assert got.gain == pytest.approx(0.28206818678580947, abs=1e-12)
        assert got.gain > 0.0

    def test_validation(self):
        with pytest.raises(ValueError, match="eta"):
            qp.check_convolution_gain(qp.uniform(Q3), qp.uniform(Q3), eta=0.0)
        with pytest.raises(ValueError, match="mismatch"):
            qp.check_convolution_gain(qp.uniform(Q2), qp.uniform(Q3), eta=0.1)
        with pytest.raises(ValueError, match="prime"):
            a4 = qp.Alphabet(4)
            qp.check_convolution_gain(qp.uniform(a4), qp.uniform(a4), eta=0.1)

    def test_sweep_no_violations(self):
        for q in (2, 3, 5):
            sweep = qp.sweep_convolution_gain(q, 2000, seed=13 + q, eta=0.1)
            assert sweep.violations == 0
            assert sweep.strict_violations == 0
            assert sweep.min_gain >= -1e-12
            if sweep.hypothesis_pairs:
                assert sweep.min_hypothesis_gain > 0.0
