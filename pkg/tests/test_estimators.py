"""Scikit-learn estimator API conformance for the two wrappers."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from geolab.embedding import SchattenEmbedding
from geolab.lewis import LewisBasis, SubspaceBasis


@pytest.fixture(scope="module")
def stack():
    rng = np.random.default_rng(99)
    return rng.standard_normal((2, 3, 3))


class TestLewisBasis:
    def test_get_set_params_roundtrip(self):
        est = LewisBasis(p=1.5, tol=1e-9)
        params = est.get_params()
        assert params["p"] == 1.5 and params["tol"] == 1e-9
        est.set_params(seed=7)
        assert est.get_params()["seed"] == 7

    def test_clone_preserves_params(self):
        est = LewisBasis(p=3.0, mode="gradient_ascent", max_iters=500)
        twin = clone(est)
        assert twin.get_params() == est.get_params()

    def test_fit_sets_attributes(self, stack):
        est = LewisBasis(p=1.5).fit(stack)
        assert est.basis_.shape == (2, 3, 3)
        assert est.M_.shape == (3, 3)
        assert est.gram_residual_ <= est.tol
        assert est.trace_residual_ <= est.tol
        assert est.n_iter_ >= 1
        assert est.certificate_.p == 1.5

    def test_fit_accepts_subspace_basis(self, stack):
        direct = LewisBasis(p=2.0).fit(SubspaceBasis(2.0, stack))
        raw = LewisBasis(p=2.0).fit(stack)
        assert np.allclose(direct.M_, raw.M_, atol=1e-7)

    def test_refit_overwrites(self, stack):
        est = LewisBasis(p=1.5).fit(stack)
        first = est.M_.copy()
        est.set_params(p=3.0).fit(stack)
        assert not np.allclose(est.M_, first)


class TestSchattenEmbedding:
    def test_clone_and_params(self):
        est = SchattenEmbedding(p=1.0, q=1.5, sample_size=300)
        twin = clone(est)
        assert twin.get_params()["q"] == 1.5
        assert twin.get_params()["sample_size"] == 300

    def test_transform_before_fit_raises(self, stack):
        with pytest.raises(NotFittedError):
            SchattenEmbedding().transform(stack)

    def test_fit_transform_stack(self, stack):
        est = SchattenEmbedding(p=1.5, q=2.0, sample_size=500, seed=1)
        images = est.fit_transform(stack)
        assert images.shape[0] == 2
        assert est.distortion_ <= est.theorem_bound_ * (1 + 1e-8)

    def test_transform_single_matrix(self, stack):
        est = SchattenEmbedding(p=1.0, q=2.0, sample_size=300, seed=2).fit(stack)
        one = est.transform(stack[0])
        many = est.transform(stack)
        assert one.ndim == 2
        assert np.allclose(many[0], one)

    def test_distortion_within_certified_bound(self, stack):
        est = SchattenEmbedding(p=1.0, q=2.0, sample_size=2000, seed=3).fit(stack)
        assert est.certificate_.violations == 0
        assert est.distortion_ <= est.theorem_bound_ * (1 + 1e-8)
        assert est.theorem_bound_ == pytest.approx(2.0 ** 0.5, rel=1e-12)
