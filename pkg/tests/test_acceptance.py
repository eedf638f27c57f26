"""Release gate.

Each test carries an ``acceptance(num, title)`` marker; the terminal
summary (see conftest) prints one PASSED/FAILED line per numbered check
so the gate status is readable at a glance.
"""

import itertools
import json
import math
import time

import numpy as np
import pytest

from geolab.cli import main
from geolab.convexity import (
    diamond_convexity_ratio,
    impossibility_certificate,
    laakso_canonical_chain,
    markov_convexity_ratio,
    mc_markov_convexity_ratio,
)
from geolab.embedding import (
    beta_bound_check,
    build_embedding,
    certify_lower,
    certify_upper,
)
from geolab.graphs import (
    diamond,
    distortion,
    l1_embed,
    laakso,
    pairwise_l1,
    shortest_path_metric,
)
from geolab.inequalities import (
    ball_convexity_check,
    clarkson_check,
    enflo_type_check,
    martingale_cotype_check,
    roundness_check,
)
from geolab.lewis import SubspaceBasis, certify_lewis, grad_psi, psi, solve_lewis
from geolab.spectral import (
    holder_check,
    loewner_contraction_check,
    schatten_norm,
    von_neumann_check,
)

# pi2_lower(L_k) under the identity map at first release; criterion 8
# bands the growth curve at +-5 percent around these.
PI2_PINS = {2: 0.4082482902737576, 3: 0.8060642550190049, 4: 1.0599982034405644}

P_CYCLE = [1.0, 1.5, 2.0, 3.0]


@pytest.fixture(scope="module")
def lewis_suite():
    """50 seeded random subspaces solved once, shared by checks 1 and 3."""
    solved = []
    t0 = time.monotonic()
    for i in range(50):
        rng = np.random.default_rng(5000 + i)
        p = P_CYCLE[i % len(P_CYCLE)]
        k = int(rng.integers(1, 6))
        m = int(rng.integers(3, 9))
        basis = SubspaceBasis(p, rng.standard_normal((k, m, m)))
        solved.append(solve_lewis(basis))
    return solved, time.monotonic() - t0


@pytest.mark.acceptance(1, "Lewis certification on 50 seeded subspaces")
def test_lewis_certification(lewis_suite):
    solved, elapsed = lewis_suite
    assert len(solved) == 50
    for cert in solved:
        assert cert.gram_residual <= 1e-6
        assert cert.trace_residual <= 1e-6
        recheck = certify_lewis(cert)
        assert recheck["gram_residual"] <= 1e-6
        assert recheck["trace_residual"] <= 1e-6
    assert elapsed <= 60.0


@pytest.mark.acceptance(2, "gradient matches central finite differences")
def test_gradient_finite_differences():
    h = 1e-5
    for p in (1.0, 1.5, 3.0):
        for trial in range(20):
            rng = np.random.default_rng(700 * trial + int(10 * p))
            basis = SubspaceBasis(p, rng.standard_normal((3, 4, 4)))
            b = np.eye(3) + 0.2 * rng.standard_normal((3, 3))
            direction = rng.standard_normal((3, 3))
            analytic = float(np.sum(grad_psi(b, basis) * direction))
            fd = (psi(b + h * direction, basis)
                  - psi(b - h * direction, basis)) / (2 * h)
            assert analytic == pytest.approx(fd, rel=1e-4, abs=1e-8)


@pytest.mark.acceptance(3, "embedding certifiers report zero violations")
def test_embedding_certifiers(lewis_suite):
    solved, _ = lewis_suite
    violations = 0
    for idx, cert in enumerate(solved):
        rng = np.random.default_rng(9000 + idx)
        p = cert.p
        q = p + 1.0
        coeffs = rng.standard_normal((1000, cert.k))
        betas = 0.5 * (rng.random(1000) * 0.99 + 0.01)
        for c, beta in zip(coeffs, betas):
            a = np.tensordot(c, cert.basis, axes=1)
            low = certify_lower(a, cert, p, q)
            up = certify_upper(a, cert, p, q)
            bb = beta_bound_check(a, cert, p, beta)
            violations += (not low["holds"]) + (not up["holds"])
            violations += (not bb["holds"]) + (not bb["order_holds"])
    assert violations == 0


@pytest.mark.acceptance(4, "diagonal sharpness: hypercube distortion = sqrt(k)")
def test_diagonal_sharpness():
    for k in range(2, 7):
        elements = np.zeros((k, k, k))
        for i in range(k):
            elements[i, i, i] = 1.0
        basis = SubspaceBasis(1.0, elements)
        emb, _ = build_embedding(basis, 2.0, sample_size=256, seed=0)
        corners = np.array(list(itertools.product((-1.0, 1.0), repeat=k)))
        mats = np.einsum("ci,imn->cmn", corners, elements)
        images = np.stack([emb.apply(mat) for mat in mats])
        ratios = []
        for i in range(len(corners)):
            for j in range(i + 1, len(corners)):
                src = schatten_norm(mats[i] - mats[j], 1.0)
                img = schatten_norm(images[i] - images[j], 2.0)
                ratios.append(img / src)
        spread = max(ratios) / min(ratios)
        assert spread == pytest.approx(math.sqrt(k), abs=1e-9)


@pytest.mark.acceptance(5, "matrix-inequality suite: zero violations")
def test_inequality_suite():
    t0 = time.monotonic()
    rng = np.random.default_rng(20260823)
    n_trials = 10_000
    bad = 0

    for _ in range(n_trials):
        s = rng.standard_normal((4, 4))
        t = rng.standard_normal((4, 4))
        bad += not von_neumann_check(s, t)["holds"]

    for _ in range(n_trials):
        x = rng.standard_normal((3, 4))
        y = rng.standard_normal((4, 3))
        a, b = 1.0 + 3.0 * rng.random(2)
        bad += not holder_check(x, y, a, b)["holds"]

    for _ in range(n_trials):
        f = rng.standard_normal((3, 3))
        g = rng.standard_normal((3, 3))
        s = f.T @ f
        t = s + g.T @ g
        beta = 0.5 * (0.01 + 0.99 * rng.random())
        bad += not loewner_contraction_check(s, t, beta)["holds"]

    # the same contraction genuinely fails at beta = 1, so the search
    # below must find a violation -- otherwise the hypothesis check is
    # vacuous.
    found = False
    for _ in range(5000):
        f = rng.standard_normal((2, 2))
        g = rng.standard_normal((2, 2))
        s = f.T @ f
        if not loewner_contraction_check(s, s + g.T @ g, 1.0)["holds"]:
            found = True
            break
    assert found

    for _ in range(n_trials):
        q = 1.0 + rng.random()
        a = rng.standard_normal((3, 3))
        b = rng.standard_normal((3, 3))
        bad += not clarkson_check(q, a, b)["holds"]

    for _ in range(n_trials):
        q = 1.0 + rng.random()
        c1, c2, c3, c4 = rng.standard_normal((4, 3, 3))
        bad += not roundness_check(q, c1, c2, c3, c4)["holds"]

    for _ in range(n_trials):
        q = 1.0 + max(rng.random(), 1e-9)
        x = rng.standard_normal((3, 3))
        y = rng.standard_normal((3, 3))
        bad += not ball_convexity_check(q, x, y)["holds"]

    for _ in range(n_trials):
        q = 1.0 + rng.random()
        kk = int(rng.integers(1, 4))
        values = rng.standard_normal((2 ** kk, 3, 3))
        bad += not enflo_type_check(q, values)["holds"]

    for _ in range(200):
        q = 1.0 + max(rng.random(), 1e-9)
        stages = random_dyadic_martingale(rng, int(rng.integers(2, 6)), 3)
        bad += not martingale_cotype_check(q, stages)["holds"]

    assert bad == 0
    assert time.monotonic() - t0 <= 300.0


def random_dyadic_martingale(rng, n_stages, dim):
    stages = [rng.standard_normal((1, dim, dim))]
    for _ in range(n_stages - 1):
        cur = stages[-1]
        delta = rng.standard_normal(cur.shape)
        stages.append(np.vstack([cur + delta, cur - delta]))
    return stages


@pytest.mark.acceptance(6, "graph counts and source-sink distances")
def test_graph_counts():
    n_v, n_e = 2, 1
    for k in range(1, 7):
        g = diamond(k)
        assert (g.n, len(g.edges)) == (n_v, n_e)
        metric = shortest_path_metric(g)
        assert metric.dist[g.source, g.sink] == 2 ** (k - 1)
        n_v, n_e = n_v + 2 * n_e, 4 * n_e
    n_v, n_e = 2, 1
    for k in range(1, 6):
        g = laakso(k)
        assert (g.n, len(g.edges)) == (n_v, n_e)
        metric = shortest_path_metric(g)
        assert metric.dist[g.source, g.sink] == 4 ** (k - 1)
        n_v, n_e = n_v + 4 * n_e, 6 * n_e


@pytest.mark.acceptance(7, "l1 embeddings certified below distortion 2")
def test_l1_embedding_distortion():
    cases = [diamond(k) for k in range(1, 5)] + [laakso(k) for k in range(1, 4)]
    for g in cases:
        emb = l1_embed(g)
        report = distortion(pairwise_l1(emb.images), shortest_path_metric(g).dist)
        assert report["value"] <= 2.0 + 1e-9


@pytest.mark.acceptance(8, "Markov convexity growth with Monte Carlo agreement")
def test_markov_convexity_growth():
    t0 = time.monotonic()
    pis = {}
    for k in (2, 3, 4):
        chain, pmap = laakso_canonical_chain(k)
        metric = shortest_path_metric(laakso(k))
        report = markov_convexity_ratio(chain, pmap, metric)
        assert report.truncation_error_bound <= 1e-6 * report.lhs
        pis[k] = report.pi2_lower
        if k <= 3:
            mc = mc_markov_convexity_ratio(chain, pmap, metric,
                                           n_samples=100_000, seed=11)
            assert abs(mc["lhs"] - report.lhs) <= 3.0 * mc["lhs_se"]
            if mc["rhs_se"] == 0.0:
                assert mc["rhs"] == pytest.approx(report.rhs, rel=1e-9)
            else:
                assert abs(mc["rhs"] - report.rhs) <= 3.0 * mc["rhs_se"]
    assert pis[2] < pis[3] < pis[4]
    for k, pin in PI2_PINS.items():
        assert abs(pis[k] / math.sqrt(k) - pin / math.sqrt(k)) \
            <= 0.05 * pin / math.sqrt(k)
    assert time.monotonic() - t0 <= 600.0


@pytest.mark.acceptance(9, "diamond ratio on D_2 is exactly 1")
def test_diamond_d2_exact():
    g = diamond(2)
    res = diamond_convexity_ratio(np.arange(g.n), g, shortest_path_metric(g))
    assert res["lhs"] == 4.0
    assert res["rhs"] == 4.0
    assert res["ratio"] == 1.0


@pytest.mark.acceptance(10, "end-to-end certificate: runs, monotone, alpha scaling")
def test_certificate_end_to_end(tmp_path):
    out = tmp_path / "cert"
    argv = ["certificate", "--k", "3", "--alpha", "1.0",
            "--out", str(out), "--no-timestamp"]
    assert main(list(argv)) == 0
    first = {name: (out / name).read_bytes()
             for name in ("certificate.json", "certificate.txt", "manifest.json")}
    assert main(list(argv)) == 0
    for name, data in first.items():
        assert (out / name).read_bytes() == data

    reports = {k: impossibility_certificate(k, 1.0) for k in (2, 3, 4)}
    doc = json.loads(first["certificate.json"])
    assert doc["log_dim_threshold"] == pytest.approx(
        reports[3]["log_dim_threshold"], abs=1e-12)
    assert reports[2]["pi2_lower"] < reports[3]["pi2_lower"] < reports[4]["pi2_lower"]
    assert (reports[2]["log_dim_threshold"] <= reports[3]["log_dim_threshold"]
            <= reports[4]["log_dim_threshold"])
    assert reports[4]["log_dim_threshold"] > reports[3]["log_dim_threshold"]

    for alpha in (1.0, 2.0):
        rep = impossibility_certificate(4, alpha)
        assert rep["dim_threshold"] == pytest.approx(
            rep["n_points"] ** (rep["c_exponent"] / alpha ** 2), rel=1e-9)
        assert rep["bound_form"] == "dim X >= n_points^(c_exponent / alpha^2)"


@pytest.mark.acceptance(11, "asymptotic constant not pinned; checks 1-10 substitute")
def test_constant_caveat():
    # The dimension bound's universal constant has no quantitative target,
    # so this gate ships the measured threshold instead of claiming one;
    # the numbered checks above are the verifiable content.
    report = impossibility_certificate(2, 1.0)
    assert "c_exponent" in report and "statement" in report
    assert report["bound_form"] == "dim X >= n_points^(c_exponent / alpha^2)"
