"""Low-distortion linear maps from subspaces of S_p into S_q.

The pipeline: compress the ambient space onto the span of the top singular
subspaces of sampled subspace elements (``truncate_subspace``), solve for a
Lewis-type basis of the compressed subspace, and weight by a power of the
normalising matrix M:

    Phi(B) = (J B) . M^((p - q) / (2 q)).

For every A in the subspace the certified two-sided bounds are

    (1 - eps) ||A||_p  <=  k^(1/p - 1/q) ||Phi(A)||_q,
    ||Phi(A)||_q       <=  max(k^((p-2)/2 . (1/p - 1/q)), 1) ||A||_p,

so the resulting bi-Lipschitz distortion is at most ``theorem_bound(p, q, k)``
times ``1 / (1 - eps)``.
"""

import json
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import (
    InvalidExponent,
    InvalidExponents,
    NotInSubspace,
    SampleTooSmall,
)
from .lewis import SolverConfig, SubspaceBasis, solve_lewis
from .spectral import SV_CLIP, psd_leq, schatten_norm, sym_power
from .validation import as_square_matrix


@dataclass
class Truncation:
    """Compression J(A) = Q' A Q onto an m-dimensional coordinate patch.

    ``q_basis`` is an (N, m) orthonormal matrix, or None when the sampled
    subspace already fills the ambient space (then J is the identity).
    ``worst_defect`` is the largest relative norm loss observed on the
    sample used to build the compression.
    """

    q_basis: np.ndarray | None
    m: int
    worst_defect: float

    def apply(self, a):
        if self.q_basis is None:
            return np.asarray(a, dtype=float)
        return self.q_basis.T @ np.asarray(a, dtype=float) @ self.q_basis


def truncate_subspace(basis, eps=0.01, sample_size=512, seed=0):
    """Build a norm-preserving compression from sampled subspace elements.

    Samples ``sample_size`` unit coefficient vectors (plus the basis
    directions themselves), keeps for each sampled element the leading
    singular subspaces up to a Schatten-p tail of ``eps / 4``, and spans V
    by all kept singular vectors.  The guarantee checked on the sample is
    ``1 - ||J(A)||_p / ||A||_p <= eps``; the worst observed value is
    reported as ``worst_defect``.
    """
    if not 0 < eps < 1:
        raise InvalidExponent(f"eps must be in (0, 1), got {eps}")
    k, n_amb = basis.k, basis.elements.shape[1]
    if sample_size < k:
        raise SampleTooSmall(
            f"sample_size={sample_size} is below the subspace dimension {k}")
    rng = np.random.default_rng(seed)
    coeffs = rng.standard_normal((sample_size, k))
    coeffs /= np.linalg.norm(coeffs, axis=1, keepdims=True)
    coeffs = np.vstack([np.eye(k), coeffs])

    collected = []
    samples = []
    for c in coeffs:
        a = np.einsum("u,uab->ab", c, basis.elements)
        u, s, vt = np.linalg.svd(a)
        norm_p = float(np.sum(s ** basis.p) ** (1.0 / basis.p)) if s[0] > 0 else 0.0
        samples.append((a, norm_p))
        if norm_p == 0.0:
            continue
        # Smallest r with Schatten-p tail below eps/4, in norm scale.
        tail = np.cumsum((s[::-1] / norm_p) ** basis.p)[::-1]
        keep = np.nonzero(tail > (eps / 4.0) ** basis.p)[0]
        r = (keep[-1] + 1) if keep.size else 0
        if r:
            collected.append(u[:, :r])
            collected.append(vt[:r].T)

    stacked = np.hstack(collected) if collected else np.zeros((n_amb, 0))
    q_full, sv, _ = np.linalg.svd(stacked, full_matrices=False)
    rank = int(np.sum(sv > SV_CLIP * sv[0])) if sv.size else 0
    if rank >= n_amb:
        trunc = Truncation(q_basis=None, m=n_amb, worst_defect=0.0)
    else:
        trunc = Truncation(q_basis=q_full[:, :rank], m=rank, worst_defect=0.0)

    worst = 0.0
    if trunc.q_basis is not None:
        for a, norm_p in samples:
            if norm_p == 0.0:
                continue
            norm_j = schatten_norm(trunc.apply(a), basis.p)
            worst = max(worst, 1.0 - norm_j / norm_p)
    trunc.worst_defect = float(worst)
    return trunc


def theorem_bound(p, q, k):
    """Certified distortion ceiling for the S_p -> S_q pipeline.

    ``k^(1/p - 1/q)`` when p is in [1, 2], and ``k^((p/2)(1/p - 1/q))``
    when p > 2.  Requires 1 <= p < q.
    """
    p, q = float(p), float(q)
    if p < 1:
        raise InvalidExponent(f"theorem_bound requires p >= 1, got {p}")
    if not p < q:
        raise InvalidExponents(f"theorem_bound requires p < q, got p={p}, q={q}")
    k = int(k)
    gap = 1.0 / p - 1.0 / q
    if p <= 2:
        return float(k ** gap)
    return float(k ** (0.5 * p * gap))


@dataclass
class EmbeddingMap:
    """The solved linear map Phi(B) = (J B) . M^((p-q)/(2q))."""

    p: float
    q: float
    truncation: Truncation
    lewis: "LewisCertificate"
    weight: np.ndarray

    @property
    def k(self):
        return self.lewis.k

    @property
    def m(self):
        return self.lewis.m

    def apply(self, a):
        return self.truncation.apply(a) @ self.weight


@dataclass
class DistortionCertificate:
    """Empirical distortion measurements against the proved constants.

    ``lower_const = k^(1/p - 1/q)`` and ``upper_const`` is the proved
    expansion ceiling; ``certified_bound`` folds in the 1/(1-eps) loss of
    the truncation step.  ``violations`` counts probes where either proved
    one-sided bound failed beyond a 1e-8 relative slack.
    """

    p: float
    q: float
    k: int
    m: int
    lower_const: float
    upper_const: float
    certified_bound: float
    empirical_distortion: float
    worst_defect: float
    sample_size: int
    violations: int
    seed: int

    def to_json_dict(self, lower_checks=None, upper_checks=None):
        return {
            "p": self.p,
            "q": self.q,
            "k": self.k,
            "m": self.m,
            "theorem_bound": theorem_bound(self.p, self.q, self.k),
            "empirical_distortion": self.empirical_distortion,
            "lower_checks": int(self.sample_size if lower_checks is None else lower_checks),
            "upper_checks": int(self.sample_size if upper_checks is None else upper_checks),
            "worst_defect": self.worst_defect,
            "seed": self.seed,
        }

    def dumps(self):
        return json.dumps(self.to_json_dict())


def _hypercube_probe_coeffs(k, rng, cap=6):
    """Pairwise differences of hypercube points in coefficient space."""
    if k <= cap:
        signs = np.array(
            [[1.0 if (i >> j) & 1 else -1.0 for j in range(k)]
             for i in range(2 ** k)]
        )
    else:
        signs = np.unique(rng.choice([-1.0, 1.0], size=(2 ** cap, k)), axis=0)
    diffs = signs[:, None, :] - signs[None, :, :]
    diffs = diffs.reshape(-1, k)
    keep = np.any(diffs != 0.0, axis=1)
    return diffs[keep]


def build_embedding(basis, q, solver=None, eps=0.01, sample_size=10_000, seed=0):
    """Assemble the embedding and measure its distortion on probe elements.

    Probes are all pairwise differences of the hypercube points
    sum_i e_i W_i (e in {-1, 1}^k) plus ``sample_size`` random unit
    coefficient vectors.  Returns ``(EmbeddingMap, DistortionCertificate)``.
    """
    p = basis.p
    if p < 1:
        raise InvalidExponent(f"embedding requires p >= 1, got {p}")
    if not p < float(q):
        raise InvalidExponents(f"embedding requires p < q, got p={p}, q={q}")
    q = float(q)
    if solver is None:
        solver = SolverConfig(tol=1e-10)
    trunc = truncate_subspace(basis, eps=eps, seed=seed,
                              sample_size=max(256, 4 * basis.k))
    projected = np.stack([trunc.apply(w) for w in basis.elements])
    cert = solve_lewis(SubspaceBasis(p, projected), solver)
    weight = sym_power(cert.M, (p - q) / (2.0 * q))
    emb = EmbeddingMap(p=p, q=q, truncation=trunc, lewis=cert, weight=weight)

    k = basis.k
    rng = np.random.default_rng(seed)
    random_coeffs = rng.standard_normal((sample_size, k))
    random_coeffs /= np.linalg.norm(random_coeffs, axis=1, keepdims=True)
    probes = np.vstack([_hypercube_probe_coeffs(k, rng), random_coeffs])

    lower_const = k ** (1.0 / p - 1.0 / q)
    upper_const = max(k ** ((p - 2.0) / 2.0 * (1.0 / p - 1.0 / q)), 1.0)

    ratios = np.empty(len(probes))
    violations = 0
    for i, c in enumerate(probes):
        a = np.einsum("u,uab->ab", c, basis.elements)
        norm_p = schatten_norm(a, p)
        norm_q = schatten_norm(emb.apply(a), q)
        ratios[i] = norm_q / norm_p
        slack = 1e-8 * (1.0 + norm_p)
        if (1.0 - eps) * norm_p > lower_const * norm_q + slack:
            violations += 1
        if norm_q > upper_const * norm_p + slack:
            violations += 1
    empirical = float(ratios.max() / ratios.min())
    dist_cert = DistortionCertificate(
        p=p,
        q=q,
        k=k,
        m=emb.m,
        lower_const=float(lower_const),
        upper_const=float(upper_const),
        certified_bound=float(lower_const * upper_const / (1.0 - eps)),
        empirical_distortion=empirical,
        worst_defect=trunc.worst_defect,
        sample_size=len(probes),
        violations=int(violations),
        seed=seed,
    )
    return emb, dist_cert


def _coeffs_in_span(a, t_stack, tol=1e-8):
    """Least-squares coefficients of ``a`` in the span of ``t_stack``."""
    a = as_square_matrix(a, "a")
    flat = t_stack.reshape(t_stack.shape[0], -1).T
    coef, _, _, _ = np.linalg.lstsq(flat, a.ravel(), rcond=None)
    resid = np.linalg.norm(flat @ coef - a.ravel())
    scale = np.linalg.norm(a.ravel())
    if resid > tol * (1.0 + scale):
        raise NotInSubspace(
            f"matrix is outside the certified subspace (residual {resid:.3e})")
    return coef


def certify_lower(a, cert, p, q):
    """Check ``||A||_p <= k^(1/p - 1/q) ||A M^((p-q)/(2q))||_q``.

    ``A`` must lie in the span of the certificate basis.  Returns the slack
    ``rhs - lhs`` and whether the inequality holds within 1e-8 relative.
    """
    p, q = float(p), float(q)
    if not 0 < p < q:
        raise InvalidExponents(f"requires 0 < p < q, got p={p}, q={q}")
    _coeffs_in_span(a, cert.basis)
    lhs = schatten_norm(a, p)
    weight = sym_power(cert.M, (p - q) / (2.0 * q))
    rhs = cert.k ** (1.0 / p - 1.0 / q) * schatten_norm(np.asarray(a) @ weight, q)
    return {"holds": bool(lhs <= rhs + 1e-8 * (1.0 + rhs)), "slack": float(rhs - lhs)}


def certify_upper(a, cert, p, q):
    """Check ``||A M^((p-q)/(2q))||_q <= max(k^((p-2)/2 (1/p-1/q)), 1) ||A||_p``."""
    p, q = float(p), float(q)
    if p < 1:
        raise InvalidExponent(f"upper bound requires p >= 1, got {p}")
    if not p < q:
        raise InvalidExponents(f"requires p < q, got p={p}, q={q}")
    _coeffs_in_span(a, cert.basis)
    weight = sym_power(cert.M, (p - q) / (2.0 * q))
    lhs = schatten_norm(np.asarray(a) @ weight, q)
    rhs = max(cert.k ** ((p - 2.0) / 2.0 * (1.0 / p - 1.0 / q)), 1.0) * schatten_norm(a, p)
    return {"holds": bool(lhs <= rhs + 1e-8 * (1.0 + rhs)), "slack": float(rhs - lhs)}


def beta_bound_check(a, cert, p, beta):
    """Check ``||(A'A)^beta M^(-beta)||_inf <= trace[A'A M^(p/2-1)]^beta``.

    Valid for beta in (0, 1/2].  Also verifies the PSD-order step
    ``A'A <= (sum_i c_i^2) M`` for the coefficients c of A in the basis.
    """
    beta = float(beta)
    if not 0 < beta <= 0.5:
        raise InvalidExponent(f"beta must be in (0, 1/2], got {beta}")
    coef = _coeffs_in_span(a, cert.basis)
    a = as_square_matrix(a, "a")
    ata = a.T @ a
    order_ok = psd_leq(ata, float(np.sum(coef ** 2)) * cert.M, tol=1e-9)
    lhs = schatten_norm(sym_power(ata, beta) @ sym_power(cert.M, -beta), np.inf)
    inner = float(np.trace(ata @ sym_power(cert.M, float(p) / 2.0 - 1.0)))
    rhs = max(inner, 0.0) ** beta
    return {
        "lhs": float(lhs),
        "rhs": float(rhs),
        "holds": bool(lhs <= rhs + 1e-8 * (1.0 + rhs)),
        "order_holds": bool(order_ok),
    }


class SchattenEmbedding(BaseEstimator, TransformerMixin):
    """Transformer from a subspace of S_p^N into S_q^m.

    ``fit`` takes the subspace basis (a ``SubspaceBasis`` or a raw
    (k, N, N) stack interpreted with exponent ``p``) and solves the full
    pipeline; ``transform`` maps stacks of subspace elements through Phi.
    """

    def __init__(self, p=1.0, q=2.0, eps=0.01, sample_size=10_000,
                 tol=1e-10, max_iters=10_000, mode="fixed_point", seed=0):
        self.p = p
        self.q = q
        self.eps = eps
        self.sample_size = sample_size
        self.tol = tol
        self.max_iters = max_iters
        self.mode = mode
        self.seed = seed

    def fit(self, X, y=None):
        basis = X if isinstance(X, SubspaceBasis) else SubspaceBasis(self.p, X)
        solver = SolverConfig(tol=self.tol, max_iters=self.max_iters,
                              mode=self.mode, seed=self.seed)
        self.map_, self.certificate_ = build_embedding(
            basis, self.q, solver=solver, eps=self.eps,
            sample_size=self.sample_size, seed=self.seed)
        self.distortion_ = self.certificate_.empirical_distortion
        self.theorem_bound_ = theorem_bound(basis.p, self.q, basis.k)
        return self

    def transform(self, X):
        if not hasattr(self, "map_"):
            from sklearn.exceptions import NotFittedError
            raise NotFittedError("SchattenEmbedding must be fitted before transform")
        arr = np.asarray(X, dtype=float)
        if arr.ndim == 2:
            return self.map_.apply(arr)
        return np.stack([self.map_.apply(a) for a in arr])
