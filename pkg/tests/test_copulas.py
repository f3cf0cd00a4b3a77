import numpy as np
import pytest

from copulagrid import (
    CheckerboardCopula,
    CompatibilityError,
    DomainError,
    ValidationError,
    cdf_eval_copula,
    cdf_eval_tensor,
    fit_uniform_margins,
    make_comonotone,
    make_countermonotone,
    make_independence,
    marginalize_copula,
    random_copula,
    to_tensor_measure,
    validate_copula,
)


class TestConstructors:
    def test_one_dim_independence_is_uniform(self):
        c = make_independence((1,), 4)
        assert np.array_equal(c.mass, [0.25, 0.25, 0.25, 0.25])

    def test_two_dim_independence_order_two(self):
        c = make_independence((1, 2), 2)
        assert np.array_equal(c.mass, np.full((2, 2), 0.25))

    def test_independence_margins_uniform(self):
        for labels, n in (((1, 2), 3), ((0, 1, 2), 4), ((5,), 7)):
            assert validate_copula(make_independence(labels, n)).passed

    def test_comonotone_order_two(self):
        c = make_comonotone((1, 2), 2)
        assert np.array_equal(c.mass, [[0.5, 0.0], [0.0, 0.5]])

    def test_comonotone_cdf_diagonal(self):
        c = make_comonotone((0, 1), 8)
        for k in range(9):
            u = k / 8
            expected = sum(c.mass[i, i] for i in range(k))
            assert cdf_eval_copula(c, (u, u)) == pytest.approx(expected, abs=1e-15)
            assert cdf_eval_copula(c, (u, u)) == pytest.approx(u, abs=1e-12)

    def test_comonotone_margins_uniform_any_dimension(self):
        assert validate_copula(make_comonotone((1, 2, 3), 4)).passed

    def test_countermonotone_order_two(self):
        c = make_countermonotone((1, 2), 2)
        assert np.array_equal(c.mass, [[0.0, 0.5], [0.5, 0.0]])

    def test_countermonotone_cdf_corners(self):
        for n in (2, 4, 6):
            c = make_countermonotone((1, 2), n)
            assert cdf_eval_copula(c, (1.0, 1.0)) == pytest.approx(1.0, abs=1e-12)
            assert cdf_eval_copula(c, (0.5, 0.5)) == 0.0

    def test_countermonotone_needs_two_labels(self):
        with pytest.raises(CompatibilityError):
            make_countermonotone((1, 2, 3), 2)

    def test_mass_total_enforced(self):
        with pytest.raises(ValidationError):
            CheckerboardCopula((0, 1), 2, np.full((2, 2), 0.3))


class TestValidate:
    def test_independence_passes(self):
        assert validate_copula(make_independence((1, 2), 3)).passed

    def test_bad_margin_names_axis(self):
        c = CheckerboardCopula((1, 2), 2, [[1.0, 0.0], [0.0, 0.0]])
        report = validate_copula(c)
        assert not report.passed
        assert any("axis 1" in issue.where for issue in report.issues)
        assert report.max_deviation == pytest.approx(0.5)

    def test_comonotone_brute_force_margins(self):
        c = make_comonotone((1, 2, 3), 4)
        for axis in range(3):
            for k in range(4):
                total = sum(
                    c.mass[idx]
                    for idx in np.ndindex(c.mass.shape)
                    if idx[axis] == k
                )
                assert total == pytest.approx(0.25, abs=1e-15)
        assert validate_copula(c).passed


class TestMarginalize:
    def test_independence_projects_to_independence(self):
        c = make_independence((1, 2, 3), 3)
        assert marginalize_copula(c, (1, 3)) == make_independence((1, 3), 3)

    def test_comonotone_projects_to_uniform(self):
        c = make_comonotone((1, 2), 5)
        one = marginalize_copula(c, (1,))
        assert np.allclose(one.mass, 0.2, atol=1e-15)

    def test_closure_under_marginalization(self):
        rng = np.random.default_rng(2)
        for _ in range(25):
            d = int(rng.integers(2, 4))
            n = int(rng.integers(1, 7))
            c = random_copula(tuple(range(d)), n, rng)
            keep = tuple(sorted(rng.choice(d, size=int(rng.integers(1, d + 1)), replace=False)))
            assert validate_copula(marginalize_copula(c, keep)).passed

    def test_empty_subset_rejected(self):
        with pytest.raises(CompatibilityError):
            marginalize_copula(make_independence((1, 2), 2), ())


class TestCdf:
    def test_independence_cdf_is_product(self):
        rng = np.random.default_rng(3)
        for n in (1, 2, 5):
            c = make_independence((0, 1, 2), n)
            for _ in range(20):
                u = rng.uniform(0, 1, size=3)
                assert cdf_eval_copula(c, u) == pytest.approx(np.prod(u), abs=1e-12)

    def test_comonotone_min_with_fraction(self):
        # two full cells below 0.5 on one axis, three below 0.75 on the other
        c = make_comonotone((0, 1), 4)
        assert cdf_eval_copula(c, (0.5, 0.75)) == pytest.approx(0.5, abs=1e-15)

    def test_total_mass_at_ones(self):
        rng = np.random.default_rng(4)
        c = random_copula((0, 1), 5, rng)
        assert cdf_eval_copula(c, (1.0, 1.0)) == pytest.approx(1.0, abs=1e-12)

    def test_domain_error(self):
        c = make_independence((0, 1), 2)
        with pytest.raises(DomainError):
            cdf_eval_copula(c, (0.5, 1.5))

    def test_one_dim_cdf_is_identity(self):
        rng = np.random.default_rng(5)
        for n in (1, 3, 8):
            c = random_copula((0,), n, rng)
            for u in rng.uniform(0, 1, size=10):
                assert cdf_eval_copula(c, (u,)) == pytest.approx(u, abs=1e-12)

    def test_frechet_hoeffding_envelope(self):
        rng = np.random.default_rng(6)
        for _ in range(25):
            d = int(rng.integers(2, 4))
            n = int(rng.integers(1, 7))
            c = random_copula(tuple(range(d)), n, rng)
            for _ in range(8):
                u = rng.uniform(0, 1, size=d)
                val = cdf_eval_copula(c, u)
                assert val >= max(0.0, float(u.sum()) - (d - 1)) - 1e-12
                assert val <= float(u.min()) + 1e-12

    def test_lipschitz_and_monotone_per_coordinate(self):
        rng = np.random.default_rng(7)
        c = random_copula((0, 1), 6, rng)
        for _ in range(50):
            u = rng.uniform(0, 1, size=2)
            h = float(rng.uniform(0, 1 - u[0]))
            lo = cdf_eval_copula(c, u)
            hi = cdf_eval_copula(c, (u[0] + h, u[1]))
            assert lo - 1e-12 <= hi <= lo + h + 1e-12

    def test_exact_at_grid_nodes_dyadic(self):
        c = make_independence((0, 1), 4)
        for i in range(5):
            for j in range(5):
                expected = float(c.mass[:i, :j].sum())
                assert cdf_eval_copula(c, (i / 4, j / 4)) == expected

    def test_matches_partial_sums_at_nodes(self):
        rng = np.random.default_rng(8)
        c = random_copula((0, 1), 5, rng)
        for i in range(6):
            for j in range(6):
                expected = float(c.mass[:i, :j].sum())
                assert cdf_eval_copula(c, (i / 5, j / 5)) == pytest.approx(
                    expected, abs=1e-14
                )


class TestAtomization:
    def test_cdf_agreement_at_nodes(self):
        rng = np.random.default_rng(9)
        c = random_copula((0, 1), 4, rng)
        t = to_tensor_measure(c)
        for i in range(5):
            for j in range(5):
                assert cdf_eval_tensor(t, (i / 4, j / 4)) == pytest.approx(
                    cdf_eval_copula(c, (i / 4, j / 4)), abs=1e-14
                )


class TestFitting:
    def test_margins_within_tolerance(self):
        rng = np.random.default_rng(10)
        for d in (1, 2, 3):
            raw = rng.uniform(0.2, 1.0, size=(4,) * d)
            fitted = fit_uniform_margins(raw)
            for axis in range(d):
                others = tuple(i for i in range(d) if i != axis)
                margin = fitted.sum(axis=others) if others else fitted
                assert np.max(np.abs(margin - 0.25)) <= 1e-13

    def test_zero_slice_rejected(self):
        raw = np.array([[0.0, 0.0], [0.5, 0.5]])
        with pytest.raises(ValidationError):
            fit_uniform_margins(raw)

    def test_random_copula_validates(self):
        rng = np.random.default_rng(11)
        for d in (1, 2, 3):
            assert validate_copula(random_copula(tuple(range(d)), 5, rng)).passed
