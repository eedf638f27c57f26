"""Exact forked-divergence sums on small chains with hand-checkable values.

The level-2 witness value sqrt(1/6) and the diamond ratios k - 1 anchor the
evaluator; the Monte Carlo estimator is the stochastic cross-check.
"""

import math

import numpy as np
import pytest

from geolab.convexity import (
    ChainSpec,
    diamond_convexity_ratio,
    impossibility_certificate,
    laakso_canonical_chain,
    markov_convexity_ratio,
    mc_markov_convexity_ratio,
)
from geolab.errors import InvalidChain, InvalidExponent
from geolab.graphs import (
    FiniteMetric,
    diamond,
    distortion,
    l1_embed,
    laakso,
    pairwise_l1,
    shortest_path_metric,
)

# First-release values of pi2_lower(L_k) under the identity map; the
# growth test bands them at +-5 percent.
PI2_PINS = {2: 0.4082482902737576, 3: 0.8060642550190049, 4: 1.0599982034405644}


def line_metric(points):
    points = np.asarray(points, dtype=float)
    return FiniteMetric(n=points.size, dist=np.abs(points[:, None] - points[None, :]))


def walk_chain(n, horizon, scale_cap=8):
    """Simple forward walk on a path: 0 -> 1 -> ... -> n-1 (absorbing)."""
    p = np.zeros((n, n))
    for i in range(n - 1):
        p[i, i + 1] = 1.0
    p[n - 1, n - 1] = 1.0
    init = np.zeros(n)
    init[0] = 1.0
    return ChainSpec(P=p, initial=init, horizon=horizon, scale_cap=scale_cap)


class TestChainSpec:
    def test_rejects_bad_rows(self):
        with pytest.raises(InvalidChain):
            ChainSpec(P=np.ones((2, 2)), initial=[1, 0], horizon=2, scale_cap=2)

    def test_rejects_bad_initial(self):
        with pytest.raises(InvalidChain):
            ChainSpec(P=np.eye(2), initial=[0.7, 0.7], horizon=2, scale_cap=2)

    def test_rejects_bad_window(self):
        with pytest.raises(InvalidChain):
            ChainSpec(P=np.eye(2), initial=[1, 0], horizon=0, scale_cap=2)

    def test_absorbing_mask_is_exact(self):
        p = np.array([[1.0, 0.0], [0.5, 0.5]])
        chain = ChainSpec(P=p, initial=[1, 0], horizon=2, scale_cap=2)
        assert chain.absorbing_mask().tolist() == [True, False]


class TestExactEvaluator:
    def test_level_two_witness_value(self):
        chain, pmap = laakso_canonical_chain(2)
        rep = markov_convexity_ratio(chain, pmap, shortest_path_metric(laakso(2)))
        assert rep.rhs == pytest.approx(4.0, abs=1e-12)
        assert rep.pi2_lower == pytest.approx(math.sqrt(1.0 / 6.0), abs=1e-7)

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_regression_pins(self, k):
        chain, pmap = laakso_canonical_chain(k)
        rep = markov_convexity_ratio(chain, pmap, shortest_path_metric(laakso(k)))
        assert rep.pi2_lower == pytest.approx(PI2_PINS[k], rel=1e-9)

    def test_deterministic_chain_has_zero_lhs(self):
        chain = walk_chain(8, horizon=8)
        rep = markov_convexity_ratio(chain, np.arange(8), line_metric(np.arange(8)))
        assert rep.lhs == 0.0
        assert rep.pi2_lower == 0.0
        assert rep.rhs == pytest.approx(7.0)  # seven unit steps, then absorbed

    def test_scale_invariance(self):
        chain, pmap = laakso_canonical_chain(2)
        base = shortest_path_metric(laakso(2))
        scaled = FiniteMetric(n=base.n, dist=3.0 * base.dist)
        r1 = markov_convexity_ratio(chain, pmap, base)
        r2 = markov_convexity_ratio(chain, pmap, scaled)
        assert r2.lhs == pytest.approx(9.0 * r1.lhs, rel=1e-10)
        assert r2.rhs == pytest.approx(9.0 * r1.rhs, rel=1e-10)
        assert r2.pi2_lower == pytest.approx(r1.pi2_lower, abs=1e-10)

    def test_truncation_bound_formula(self):
        chain, pmap = laakso_canonical_chain(3)
        metric = shortest_path_metric(laakso(3))
        rep = markov_convexity_ratio(chain, pmap, metric)
        diam2 = float(metric.dist.max()) ** 2
        expected = diam2 * chain.horizon * 4.0 ** (-chain.scale_cap) / 3.0
        assert rep.truncation_error_bound == pytest.approx(expected, rel=1e-12)
        assert rep.truncation_error_bound <= 1e-6 * rep.lhs

    def test_transfer_through_l1_embedding(self):
        # Pushing the chain through a map of distortion D moves pi2_lower by
        # a factor inside [1/D, D].
        for k in (2, 3):
            chain, pmap = laakso_canonical_chain(k)
            g = laakso(k)
            sp = shortest_path_metric(g)
            emb = l1_embed(g)
            img = FiniteMetric(n=g.n, dist=pairwise_l1(emb.images))
            d_val = distortion(pairwise_l1(emb.images), sp.dist)["value"]
            r_id = markov_convexity_ratio(chain, pmap, sp)
            r_img = markov_convexity_ratio(chain, pmap, img)
            ratio = r_img.pi2_lower / r_id.pi2_lower
            assert 1.0 / d_val - 1e-9 <= ratio <= d_val + 1e-9

    def test_height_map_shows_no_growth(self):
        # Projecting onto distance-from-source collapses both forked copies
        # to the same point at every time, so the line sees nothing of the
        # branching: the witness value pins at zero for every level.
        vals = []
        for k in (2, 3, 4):
            chain, pmap = laakso_canonical_chain(k)
            g = laakso(k)
            sp = shortest_path_metric(g)
            rep = markov_convexity_ratio(chain, pmap, line_metric(sp.dist[g.source]))
            vals.append(rep.pi2_lower)
        assert vals == [0.0, 0.0, 0.0]


class TestMonteCarlo:
    def test_agrees_with_exact_within_three_se(self):
        chain, pmap = laakso_canonical_chain(2)
        metric = shortest_path_metric(laakso(2))
        exact = markov_convexity_ratio(chain, pmap, metric)
        mc = mc_markov_convexity_ratio(chain, pmap, metric, n_samples=60_000, seed=7)
        assert abs(mc["lhs"] - exact.lhs) <= 3.0 * mc["lhs_se"]
        if mc["rhs_se"] > 0:
            assert abs(mc["rhs"] - exact.rhs) <= 3.0 * mc["rhs_se"]
        else:
            assert mc["rhs"] == pytest.approx(exact.rhs)

    def test_seeded_runs_reproduce(self):
        chain, pmap = laakso_canonical_chain(2)
        metric = shortest_path_metric(laakso(2))
        a = mc_markov_convexity_ratio(chain, pmap, metric, n_samples=5_000, seed=3)
        b = mc_markov_convexity_ratio(chain, pmap, metric, n_samples=5_000, seed=3)
        assert a == b


class TestDiamondRatio:
    def test_level_two_identity_is_exact(self):
        g = diamond(2)
        out = diamond_convexity_ratio(np.arange(g.n), g, shortest_path_metric(g))
        assert out["lhs"] == 4.0
        assert out["rhs"] == 4.0
        assert out["ratio"] == 1.0

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_identity_ratio_counts_levels(self, k):
        # Each refinement level contributes anti-edge energy equal to the
        # total edge energy, so the identity-map ratio is k - 1.
        g = diamond(k)
        out = diamond_convexity_ratio(np.arange(g.n), g, shortest_path_metric(g))
        assert out["ratio"] == pytest.approx(k - 1.0, rel=1e-12)


class TestCanonicalChain:
    @pytest.mark.parametrize("k", [2, 3])
    def test_walk_structure(self, k):
        chain, pmap = laakso_canonical_chain(k)
        g = laakso(k)
        assert chain.n_states == g.n
        assert chain.horizon == 4 ** (k - 1)
        np.testing.assert_allclose(chain.P.sum(axis=1), 1.0, atol=1e-15)
        assert chain.absorbing_mask()[g.sink]
        assert chain.initial[g.source] == 1.0
        assert pmap.tolist() == list(range(g.n))


class TestCertificate:
    def test_monotone_in_level(self):
        c2 = impossibility_certificate(2, 1.0)
        c3 = impossibility_certificate(3, 1.0)
        assert c3["pi2_lower"] > c2["pi2_lower"]
        assert c3["dim_threshold"] >= c2["dim_threshold"]

    def test_exponent_form_round_trips(self):
        cert = impossibility_certificate(4, 1.0)
        n, a = cert["n_points"], cert["alpha"]
        assert cert["dim_threshold"] == pytest.approx(
            n ** (cert["c_exponent"] / a**2), rel=1e-9
        )
        assert cert["dim_threshold"] > 1.0  # level 4 pushes past the trivial bound

    def test_threshold_solves_the_optimised_bound(self):
        cert = impossibility_certificate(4, 1.0)
        d = cert["dim_threshold"]
        qs = np.linspace(1.0005, 2.0, 4000)
        best = float(np.min(d ** (1.0 - 1.0 / qs) / np.sqrt(qs - 1.0)))
        assert best == pytest.approx(cert["pi2_lower"], rel=1e-3)

    def test_large_alpha_degenerates(self):
        cert = impossibility_certificate(3, 100.0)
        assert cert["dim_threshold"] == 1.0

    def test_alpha_validated(self):
        with pytest.raises(InvalidExponent):
            impossibility_certificate(3, 0.5)
