import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from gmmnets.errors import DimensionMismatch, NotPositiveDefinite, SpecValidationError
from gmmnets.gmm import factor_component, load_gmm_spec, parse_gmm_spec, save_gmm_spec

from conftest import random_spd, random_spec, single_gaussian_doc, two_gaussian_classes_doc


class TestFactorComponent:
    def test_identity_case(self):
        comp = factor_component([0.0, 0.0], np.eye(2))
        assert_allclose(comp.inv_sqrt, np.eye(2))
        assert comp.log_det == 0.0
        assert comp.eig_min == comp.eig_max == 1.0

    def test_diagonal_case(self):
        # Assert through the defining identity and the log-determinant, not
        # entrywise: A is only pinned up to sign/rotation.
        cov = np.diag([4.0, 1.0])
        comp = factor_component([0.0, 0.0], cov)
        assert_allclose(comp.inv_sqrt.T @ comp.inv_sqrt @ cov, np.eye(2), atol=1e-12)
        assert_allclose(comp.log_det, np.log(4.0), rtol=1e-14)
        assert_allclose([comp.eig_min, comp.eig_max], [1.0, 4.0])

    def test_log_det_from_known_eigendecomposition(self):
        rng = np.random.default_rng(7)
        q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
        lam = np.array([0.3, 0.9, 1.4, 2.2, 3.7])
        cov = (q * lam) @ q.T
        cov = 0.5 * (cov + cov.T)
        comp = factor_component(np.zeros(5), cov)
        assert_allclose(comp.log_det, np.sum(np.log(lam)), rtol=0, atol=1e-10)
        assert_allclose(
            comp.inv_sqrt.T @ comp.inv_sqrt @ cov, np.eye(5), atol=1e-8
        )

    def test_rejects_indefinite(self):
        with pytest.raises(NotPositiveDefinite):
            factor_component([0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]])

    def test_rejects_asymmetric(self):
        with pytest.raises(NotPositiveDefinite):
            factor_component([0.0, 0.0], [[1.0, 1e-6], [0.0, 1.0]])

    def test_rejects_near_singular(self):
        with pytest.raises(NotPositiveDefinite):
            factor_component([0.0, 0.0], [[1.0, 0.0], [0.0, 1e-15]])

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            factor_component([0.0, 0.0], np.eye(3))


class TestQuadratic:
    def test_zero_at_mean(self):
        comp = factor_component([1.5, -2.0], random_spd(np.random.default_rng(0), 2))
        assert comp.quadratic(np.array([1.5, -2.0])) == pytest.approx(0.0, abs=1e-14)

    def test_standard_normal_value(self):
        comp = factor_component([0.0, 0.0], np.eye(2))
        assert comp.quadratic(np.array([3.0, 4.0])) == pytest.approx(12.5)

    def test_against_dense_solve(self):
        rng = np.random.default_rng(3)
        cov = random_spd(rng, 6)
        mu = rng.uniform(-2, 2, 6)
        comp = factor_component(mu, cov)
        for _ in range(20):
            x = rng.uniform(-5, 5, 6)
            direct = 0.5 * (x - mu) @ np.linalg.solve(cov, x - mu)
            assert_allclose(comp.quadratic(x), direct, rtol=1e-10)

    def test_dimension_mismatch(self):
        comp = factor_component([0.0], [[1.0]])
        with pytest.raises(DimensionMismatch):
            comp.quadratic(np.array([1.0, 2.0]))


class TestDiscriminant:
    def test_standard_normal_peak(self):
        spec = parse_gmm_spec(single_gaussian_doc([0.0], [[1.0]]))
        handle = spec.discriminant(0)
        assert_allclose(handle.value(np.array([0.0])), (2 * np.pi) ** -0.5, rtol=1e-12)

    def test_closed_form_2d(self):
        spec = parse_gmm_spec(single_gaussian_doc([0.0, 0.0], np.eye(2)))
        handle = spec.discriminant(0)
        x = np.array([1.0, 1.0])  # ||x||^2 = 2
        assert_allclose(handle.value(x), np.exp(-1.0) / (2 * np.pi), rtol=1e-12)

    def test_log_space_matches_naive(self, mix1d3):
        handle = mix1d3.discriminant(0)
        rng = np.random.default_rng(11)
        x = rng.uniform(-6, 6, (200, 1))
        assert_allclose(handle.value(x), handle.value_naive(x), rtol=1e-12)

    def test_sum_of_discriminants_is_mixture_density(self, twoclass2d):
        rng = np.random.default_rng(5)
        x = rng.uniform(-4, 4, (100, 2))
        total = sum(twoclass2d.discriminant(i).value(x) for i in range(2))
        assert_allclose(total, np.exp(twoclass2d.log_density(x)), rtol=1e-10)

    def test_rotation_invariance(self):
        rng = np.random.default_rng(13)
        n = 4
        q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        mean = rng.uniform(-2, 2, n)
        cov = random_spd(rng, n)
        spec = parse_gmm_spec(single_gaussian_doc(mean, cov))
        rotated = parse_gmm_spec(single_gaussian_doc(q @ mean, q @ cov @ q.T))
        x = rng.uniform(-3, 3, (50, n))
        assert_allclose(
            spec.discriminant(0).value(x),
            rotated.discriminant(0).value(x @ q.T),
            rtol=1e-10,
        )


class TestBayesClassify:
    def test_nearer_mean_wins(self):
        spec = parse_gmm_spec(two_gaussian_classes_doc(-1.0, 1.0))
        assert spec.bayes_classify(np.array([0.3])) == 1

    def test_tie_breaks_to_lowest_index(self):
        spec = parse_gmm_spec(two_gaussian_classes_doc(-1.0, 1.0))
        assert spec.bayes_classify(np.array([0.0])) == 0

    def test_matches_brute_force(self):
        rng = np.random.default_rng(17)
        spec = random_spec(rng, n=3, num_classes=3, max_components=3)
        x, _, _ = spec.sample(1000, seed=23)
        labels = spec.bayes_classify(x)
        brute = np.argmax(
            np.column_stack([spec.discriminant(i).value(x) for i in range(3)]), axis=1
        )
        assert np.array_equal(labels, brute)

    def test_common_scaling_does_not_change_argmax(self):
        # Scaling every discriminant by the same factor shifts all log
        # values by a constant, so the argmax is untouched.
        spec = parse_gmm_spec(two_gaussian_classes_doc(-1.0, 1.0))
        rng = np.random.default_rng(2)
        x = rng.uniform(-3, 3, (200, 1))
        logs = np.column_stack([spec.discriminant(i).log_value(x) for i in range(2)])
        shifted = logs + np.log(37.5)
        assert np.array_equal(np.argmax(logs, axis=1), np.argmax(shifted, axis=1))


class TestSampling:
    def test_deterministic(self, twoclass2d):
        a = twoclass2d.sample(500, seed=99)
        b = twoclass2d.sample(500, seed=99)
        for x, y in zip(a, b):
            assert np.array_equal(x, y)

    def test_component_variances(self):
        spec = parse_gmm_spec(single_gaussian_doc([0.0, 0.0], np.diag([4.0, 1.0])))
        x, _, _ = spec.sample(100000, seed=1)
        var = np.var(x, axis=0)
        assert abs(var[0] - 4.0) / 4.0 < 0.05
        assert abs(var[1] - 1.0) / 1.0 < 0.05

    def test_class_frequencies_within_3_sigma(self, twoclass2d):
        count = 100000
        _, labels, _ = twoclass2d.sample(count, seed=2)
        for i, cls in enumerate(twoclass2d.classes):
            p = cls.prior
            se = np.sqrt(p * (1 - p) / count)
            assert abs(np.mean(labels == i) - p) <= 3 * se

    def test_class_conditional_sampler_mean(self, twoclass2d):
        x = twoclass2d.sample_class(0, 200000, seed=3)
        cls = twoclass2d.classes[0]
        expected = sum(w * c.mean for w, c in zip(cls.weights, cls.components))
        assert_allclose(np.mean(x, axis=0), expected, atol=0.02)


class TestSpecDocuments:
    def test_round_trip(self, tmp_path, twoclass2d):
        path = tmp_path / "spec.json"
        save_gmm_spec(twoclass2d, path)
        again = load_gmm_spec(path)
        assert again.digest() == twoclass2d.digest()

    def test_priors_sum_violation_reports_path(self):
        doc = two_gaussian_classes_doc(-1.0, 1.0)
        doc["classes"][0]["prior"] = 0.4
        with pytest.raises(SpecValidationError) as err:
            parse_gmm_spec(doc)
        assert err.value.path == "classes"

    def test_weight_sum_violation_reports_path(self):
        doc = single_gaussian_doc([0.0], [[1.0]])
        doc["classes"][0]["components"][0]["weight"] = 0.7
        with pytest.raises(SpecValidationError) as err:
            parse_gmm_spec(doc)
        assert err.value.path == "classes[0].components"

    def test_bad_covariance_reports_component_path(self):
        doc = single_gaussian_doc([0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]])
        with pytest.raises(SpecValidationError) as err:
            parse_gmm_spec(doc)
        assert err.value.path == "classes[0].components[0].covariance"

    def test_invalid_json_file(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(SpecValidationError):
            load_gmm_spec(path)
