import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import naive_convolve, naive_dft, random_indicator, recursive_wht

from arithreg.errors import DomainMismatchError, ResourceBudgetError
from arithreg.groups import make_group
from arithreg.harmonic import (
    DenseFn,
    Spectrum,
    brute_force_zero_sum,
    constant,
    convolve,
    delta,
    dft,
    idft,
    indicator,
    load_dense_fn,
    load_set,
    parseval_gap,
    save_dense_fn,
    save_set,
    zero_sum_count,
)


class TestDft:
    def test_point_mass_transforms_to_ones(self):
        g = make_group([4, 3])
        F = dft(delta(g, 0))
        assert np.allclose(F.values, 1.0)

    def test_constant_transforms_to_point_mass(self):
        g = make_group([12])
        F = dft(constant(g, 1.0))
        expected = np.zeros(12, dtype=complex)
        expected[0] = 12
        assert np.max(np.abs(F.values - expected)) < 1e-10

    def test_indicator_on_z5_matches_naive(self):
        g = make_group([5])
        f = indicator(g, [1, 2])
        assert np.max(np.abs(dft(f).values - naive_dft(f))) < 1e-10

    @pytest.mark.parametrize("factors", [(2,) * 8, (3, 3, 3), (12,), (101,), (5, 5, 3)])
    def test_matches_naive_oracle(self, factors, rng):
        g = make_group(list(factors))
        for _ in range(5):
            f = DenseFn(g, rng.standard_normal(g.order))
            assert np.max(np.abs(dft(f).values - naive_dft(f))) < 1e-9

    def test_wht_is_exact_on_integers(self, rng):
        g = make_group([2] * 8)
        f = DenseFn(g, rng.integers(-50, 50, g.order).astype(float))
        fast = dft(f).values
        oracle = recursive_wht(list(f.values))
        assert np.all(fast.imag == 0.0)
        assert all(fast[i].real == oracle[i] for i in range(g.order))

    def test_round_trip(self, rng):
        for factors in [(7,), (4, 3), (2, 2, 5)]:
            g = make_group(list(factors))
            f = DenseFn(g, rng.standard_normal(g.order))
            back = idft(dft(f))
            assert np.max(np.abs(back.values - f.values)) < 1e-9

    def test_idft_examples(self):
        g = make_group([6])
        ones = Spectrum(g, np.ones(6, dtype=complex))
        assert np.allclose(idft(ones).values, delta(g, 0).values, atol=1e-12)
        point = np.zeros(6, dtype=complex)
        point[0] = 6.0
        assert np.allclose(idft(Spectrum(g, point)).values, 1.0)

    def test_idft_reports_imaginary_residue(self):
        g = make_group([5])
        skew = np.zeros(5, dtype=complex)
        skew[1] = 1.0  # no conjugate partner: inverse is genuinely complex
        _, residue = idft(Spectrum(g, skew), return_residue=True)
        assert residue > 1e-3

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.integers(1, 6), min_size=1, max_size=3), st.integers(0, 2**31))
    def test_parseval_property(self, factors, seed):
        g = make_group(factors)
        f = DenseFn(g, np.random.default_rng(seed).standard_normal(g.order))
        assert parseval_gap(f) < 1e-9


class TestConvolve:
    def test_identity_element(self, rng):
        g = make_group([4, 3])
        f = DenseFn(g, rng.standard_normal(12))
        out = convolve(f, delta(g, 0))
        assert np.max(np.abs(out.values - f.values)) < 1e-10

    def test_matches_direct_sum_on_z12(self, rng):
        g = make_group([12])
        f = DenseFn(g, rng.standard_normal(12))
        h = DenseFn(g, rng.standard_normal(12))
        assert np.max(np.abs(convolve(f, h).values - naive_convolve(f, h))) < 1e-9

    def test_spectral_identity(self, rng):
        g = make_group([5, 4])
        f = DenseFn(g, rng.standard_normal(20))
        h = DenseFn(g, rng.standard_normal(20))
        lhs = dft(convolve(f, h)).values
        rhs = dft(f).values * dft(h).values
        assert np.max(np.abs(lhs - rhs)) < 1e-8

    def test_young_inequalities(self, rng):
        g = make_group([30])
        for _ in range(20):
            f = DenseFn(g, rng.uniform(0, 1, 30))
            h = DenseFn(g, rng.uniform(0, 1, 30))
            out = convolve(f, h).values
            assert out.sum() <= f.values.sum() * h.values.sum() + 1e-9
            assert out.max() <= f.values.max() * h.values.sum() + 1e-9

    def test_group_mismatch(self):
        with pytest.raises(DomainMismatchError):
            convolve(constant(make_group([3]), 1.0), constant(make_group([4]), 1.0))


class TestZeroSum:
    def test_all_ones_k3(self):
        g = make_group([7])
        ones = constant(g, 1.0)
        assert abs(zero_sum_count([ones] * 3) - 49.0) < 1e-9

    def test_point_masses(self):
        g = make_group([3, 3])
        d0 = delta(g, 0)
        assert abs(zero_sum_count([d0] * 3) - 1.0) < 1e-10
        assert abs(brute_force_zero_sum([d0] * 3) - 1.0) < 1e-12

    def test_spectral_equals_brute_force(self, rng):
        g = make_group([11])
        for _ in range(10):
            fs = [random_indicator(g, rng) for _ in range(3)]
            assert abs(zero_sum_count(fs) - brute_force_zero_sum(fs)) < 1e-6

    def test_brute_force_on_z7_is_oracle_for_spectral(self, rng):
        g = make_group([7])
        for k in (3, 4, 5):
            fs = [random_indicator(g, rng) for _ in range(k)]
            assert abs(zero_sum_count(fs) - brute_force_zero_sum(fs)) < 1e-6

    def test_literal_sum_against_python_loops(self, rng):
        g = make_group([2, 3])
        fs = [DenseFn(g, rng.standard_normal(6)) for _ in range(3)]
        total = 0.0
        for x in range(6):
            for y in range(6):
                for z in range(6):
                    ex, ey, ez = (g.element_at(i) for i in (x, y, z))
                    s = tuple(
                        (a + b + c) % m
                        for a, b, c, m in zip(ex.coords, ey.coords, ez.coords, g.factors)
                    )
                    if all(v == 0 for v in s):
                        total += fs[0].values[x] * fs[1].values[y] * fs[2].values[z]
        assert abs(brute_force_zero_sum(fs) - total) < 1e-9

    def test_needs_two_functions(self):
        g = make_group([5])
        with pytest.raises(DomainMismatchError):
            zero_sum_count([constant(g, 1.0)])
        with pytest.raises(DomainMismatchError):
            brute_force_zero_sum([constant(g, 1.0)])

    def test_budget_guard(self):
        g = make_group([101])
        ones = constant(g, 1.0)
        with pytest.raises(ResourceBudgetError):
            brute_force_zero_sum([ones] * 3, budget=100)


class TestSerialization:
    def test_dense_fn_round_trip(self, tmp_path, rng):
        g = make_group([4, 3])
        f = DenseFn(g, rng.standard_normal(12))
        path = tmp_path / "f.csv"
        save_dense_fn(f, path)
        assert np.array_equal(load_dense_fn(g, path).values, f.values)

    def test_set_round_trip(self, tmp_path):
        g = make_group([2, 2, 2])
        members = [g.element_at(i) for i in (0, 3, 5)]
        path = tmp_path / "set.txt"
        save_set(g, members, path)
        assert load_set(g, path) == members

    def test_bad_header_rejected(self, tmp_path):
        g = make_group([3])
        path = tmp_path / "bad.csv"
        path.write_text("foo,bar\n0,1\n")
        with pytest.raises(DomainMismatchError):
            load_dense_fn(g, path)
