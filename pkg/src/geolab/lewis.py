"""Lewis-type bases for subspaces of Schatten p-space.

Given a basis W_1..W_k of a k-dimensional subspace of real m x m matrices
and an exponent p > 0, this module computes a new basis T_1..T_k of the same
subspace satisfying, with M = sum_i T_i' T_i,

    trace[ (T_i' T_j + T_j' T_i) / 2 . M^(p/2 - 1) ] = delta_ij,

which forces trace[M^(p/2)] = k.  Such a basis is the maximiser of det(A)
over coefficient matrices A with psi(A) = 1, where

    S_j(A)   = sum_u A[j, u] W_u,
    Lambda(A) = (sum_j S_j(A)' S_j(A))^(1/2),
    psi(A)   = trace[Lambda(A)^p],

and at the maximiser the properly scaled basis is T_j = k^(1/p) S_j(B).

Two solvers are provided: a fixed-point iteration on the normalising Gram
matrix (fast, default) and projected gradient ascent on log det over the
manifold psi = 1 (slower, used as an independent cross-check).
"""

import json
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .errors import (
    DegenerateBasis,
    GeolabError,
    InvalidExponent,
    NoConvergence,
    SingularCoefficient,
)
from .matio import matrix_from_json_dict, matrix_to_json_dict
from .spectral import psd_eigh, sym_power
from .validation import as_matrix_stack

# Relative smallest-singular-value threshold below which a family of matrices
# is declared linearly dependent.
INDEPENDENCE_TOL = 1e-8

# Eigenvalue-gap guard: an unclamped eigenvalue of Lambda(B)^2 in the band
# [SV_CLIP, GAP_GUARD) (relative to the top) makes pseudo-inverse powers
# ill-conditioned, so the solver re-perturbs and restarts.
GAP_GUARD = 1e-10
MAX_RESTARTS = 5


@dataclass
class SubspaceBasis:
    """A basis of a subspace of S_p^m: exponent ``p`` and stacked elements.

    ``elements`` has shape (k, m, m).  Linear independence is validated on
    construction: the stacked (k, m*m) coefficient matrix must have smallest
    singular value at least ``INDEPENDENCE_TOL`` times its largest.
    """

    p: float
    elements: np.ndarray

    def __post_init__(self):
        self.p = float(self.p)
        if not self.p > 0:
            raise InvalidExponent(f"basis exponent must be positive, got {self.p}")
        self.elements = as_matrix_stack(self.elements, "basis elements")
        flat = self.elements.reshape(self.k, -1)
        sv = np.linalg.svd(flat, compute_uv=False)
        if sv[-1] < INDEPENDENCE_TOL * sv[0]:
            raise DegenerateBasis(
                f"basis is numerically dependent (sv ratio {sv[-1] / sv[0]:.3e})"
            )

    @property
    def k(self):
        return self.elements.shape[0]

    @property
    def m(self):
        return self.elements.shape[1]


@dataclass
class SolverConfig:
    tol: float = 1e-8
    max_iters: int = 10_000
    mode: str = "fixed_point"
    seed: int = 0


@dataclass
class LewisCertificate:
    """Solved basis with its normalising matrix and recomputable residuals."""

    p: float
    basis: np.ndarray          # (k, m, m) solved elements T_i
    M: np.ndarray              # sum_i T_i' T_i
    gram_residual: float
    trace_residual: float
    n_iter: int
    mode: str
    seed: int

    @property
    def k(self):
        return self.basis.shape[0]

    @property
    def m(self):
        return self.basis.shape[1]

    def to_json_dict(self):
        return {
            "p": self.p,
            "k": self.k,
            "m": self.m,
            "T": [matrix_to_json_dict(t) for t in self.basis],
            "M": matrix_to_json_dict(self.M),
            "gram_residual": self.gram_residual,
            "trace_residual": self.trace_residual,
            "iters": self.n_iter,
            "mode": self.mode,
            "seed": self.seed,
        }

    @classmethod
    def from_json_dict(cls, d):
        basis = np.stack([matrix_from_json_dict(t) for t in d["T"]])
        return cls(
            p=float(d["p"]),
            basis=basis,
            M=matrix_from_json_dict(d["M"]),
            gram_residual=float(d["gram_residual"]),
            trace_residual=float(d["trace_residual"]),
            n_iter=int(d["iters"]),
            mode=str(d["mode"]),
            seed=int(d["seed"]),
        )

    def dumps(self):
        return json.dumps(self.to_json_dict())

    @classmethod
    def loads(cls, text):
        return cls.from_json_dict(json.loads(text))


def _combine(coeffs, elements):
    """S_j = sum_u coeffs[j, u] * elements[u]."""
    return np.einsum("ju,uab->jab", coeffs, elements)


def lambda_squared(a, basis):
    """The PSD matrix Lambda(A)^2 = sum_j S_j(A)' S_j(A)."""
    s = _combine(np.asarray(a, dtype=float), basis.elements)
    return np.einsum("jca,jcb->ab", s, s)


def lambda_of(a, basis):
    """Lambda(A) = (sum_j S_j(A)' S_j(A))^(1/2)."""
    return sym_power(lambda_squared(a, basis), 0.5)


def psi(a, basis):
    """psi(A) = trace[Lambda(A)^p], evaluated through eigenvalues."""
    w, _ = psd_eigh(lambda_squared(a, basis))
    pos = w[w > 0]
    return float(np.sum(pos ** (basis.p / 2.0)))


def grad_psi(b, basis):
    """Gradient of psi at an invertible coefficient matrix B.

    Entry (u, t) equals (p/2) trace[(S_u(B)' W_t + W_t' S_u(B))
    Lambda(B)^(p-2)] with the pseudo-power convention for the inner matrix.
    Raises ``SingularCoefficient`` when B is numerically singular.
    """
    b = np.asarray(b, dtype=float)
    sv = np.linalg.svd(b, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] < 1e-12 * sv[0]:
        raise SingularCoefficient("grad_psi requires an invertible coefficient matrix")
    p = basis.p
    s = _combine(b, basis.elements)
    lam_pm2 = sym_power(np.einsum("jca,jcb->ab", s, s), p / 2.0 - 1.0)
    # trace[S_u' W_t L] and trace[W_t' S_u L] coincide, hence the factor p.
    return p * np.einsum("ucb,tcd,db->ut", s, basis.elements, lam_pm2)


def _gram(t_stack, p):
    """M, the symmetrised Gram matrix against M^(p/2-1), and trace[M^(p/2)]."""
    m_mat = np.einsum("iba,ibc->ac", t_stack, t_stack)
    w, v = psd_eigh(m_mat)
    pos = w > 0
    half = np.zeros_like(w)
    half[pos] = w[pos] ** (p / 2.0 - 1.0)
    m_pow = (v * half) @ v.T
    e = np.einsum("iba,jbc,ca->ij", t_stack, t_stack, m_pow)
    gram = 0.5 * (e + e.T)
    tr_p2 = float(np.sum(w[pos] ** (p / 2.0)))
    return m_mat, gram, tr_p2


def certify_lewis(cert, p=None):
    """Recompute both residuals of a certificate from scratch.

    Returns ``{"gram_residual": ..., "trace_residual": ...}`` where the gram
    residual is the max-norm distance of the normalising Gram matrix from the
    identity and the trace residual is ``|trace[M^(p/2)] - k|``.
    """
    p = cert.p if p is None else float(p)
    t_stack = as_matrix_stack(cert.basis, "certificate basis")
    k = t_stack.shape[0]
    _, gram, tr = _gram(t_stack, p)
    return {
        "gram_residual": float(np.abs(gram - np.eye(k)).max()),
        "trace_residual": float(abs(tr - k)),
    }


def _initial_coeffs(k, rng):
    return np.eye(k) + 1e-3 * rng.standard_normal((k, k))


def _gap_guard_fails(t_stack):
    """True when Lambda^2 has an eigenvalue in the dangerous near-zero band."""
    m_mat = np.einsum("iba,ibc->ac", t_stack, t_stack)
    w = np.linalg.eigvalsh(0.5 * (m_mat + m_mat.T))
    top = w.max(initial=0.0)
    if top <= 0:
        return True
    rel = w / top
    return bool(np.any((rel >= 1e-12) & (rel < GAP_GUARD)))


def solve_lewis(basis, config=None):
    """Compute a Lewis-type basis certificate for ``basis``.

    ``config.mode`` selects ``"fixed_point"`` (default) or
    ``"gradient_ascent"``.  The result is deterministic for a fixed
    (basis, config) pair.  Raises ``NoConvergence`` when the iteration
    budget is exhausted, with the best residual attached.
    """
    if config is None:
        config = SolverConfig()
    if config.mode not in ("fixed_point", "gradient_ascent"):
        raise GeolabError(f"unknown solver mode {config.mode!r}")
    rng = np.random.default_rng(config.seed)
    last_error = None
    for _ in range(MAX_RESTARTS + 1):
        coeffs = _initial_coeffs(basis.k, rng)
        try:
            if config.mode == "fixed_point":
                return _solve_fixed_point(basis, coeffs, config)
            return _solve_gradient_ascent(basis, coeffs, config)
        except _RestartNeeded as exc:
            last_error = exc
            continue
    raise DegenerateBasis(
        f"eigenvalue-gap guard failed after {MAX_RESTARTS} restarts: {last_error}"
    )


class _RestartNeeded(Exception):
    pass


def _finish(basis, t_stack, p, n_iter, mode, seed):
    m_mat, gram, tr = _gram(t_stack, p)
    k = t_stack.shape[0]
    return LewisCertificate(
        p=p,
        basis=t_stack,
        M=m_mat,
        gram_residual=float(np.abs(gram - np.eye(k)).max()),
        trace_residual=float(abs(tr - k)),
        n_iter=n_iter,
        mode=mode,
        seed=seed,
    )


def _solve_fixed_point(basis, coeffs, config):
    p, k = basis.p, basis.k
    w_stack = basis.elements
    t_stack = _combine(coeffs, w_stack)
    best = np.inf
    stalls = 0
    for it in range(1, config.max_iters + 1):
        if _gap_guard_fails(t_stack):
            raise _RestartNeeded("near-degenerate Lambda^2 spectrum")
        m_mat, gram, tr = _gram(t_stack, p)
        resid = np.abs(gram - np.eye(k)).max()
        if resid <= config.tol:
            return _finish(basis, t_stack, p, it, "fixed_point", config.seed)
        gw = np.linalg.eigvalsh(gram)
        if gw[0] < 1e-12 * gw[-1]:
            raise _RestartNeeded("normalising Gram matrix nearly singular")
        # Full update is G^(-1/2); damp by halving the exponent when the
        # residual refuses to decrease (keeps p near 4 from oscillating).
        accepted = False
        expo = 0.5
        for _ in range(6):
            cand = np.einsum("ij,jab->iab", sym_power(gram, -expo), t_stack)
            _, _, tr_c = _gram(cand, p)
            cand *= (k / tr_c) ** (1.0 / p)
            _, gram_c, _ = _gram(cand, p)
            resid_c = np.abs(gram_c - np.eye(k)).max()
            if resid_c < resid or resid_c <= config.tol:
                t_stack = cand
                accepted = True
                break
            expo *= 0.5
        if not accepted:
            stalls += 1
            t_stack = cand  # take the mildest step anyway
            if stalls >= 3:
                break
        best = min(best, resid)
    final = certify_lewis(
        _finish(basis, t_stack, p, config.max_iters, "fixed_point", config.seed)
    )
    if final["gram_residual"] <= config.tol:
        return _finish(basis, t_stack, p, config.max_iters, "fixed_point", config.seed)
    raise NoConvergence(
        f"fixed_point did not reach tol={config.tol} "
        f"(best residual {min(best, final['gram_residual']):.3e})",
        n_iter=config.max_iters,
        best_residual=float(min(best, final["gram_residual"])),
    )


def _normalise_psi(a, basis):
    val = psi(a, basis)
    if val <= 0:
        raise _RestartNeeded("psi vanished during gradient ascent")
    return a / val ** (1.0 / basis.p)


def _scaled_candidate(a, basis):
    """T_j = k^(1/p) S_j(A) for psi-normalised A."""
    t = _combine(a, basis.elements)
    return basis.k ** (1.0 / basis.p) * t


def _solve_gradient_ascent(basis, coeffs, config):
    p, k = basis.p, basis.k
    a = _normalise_psi(coeffs, basis)
    best = np.inf
    for it in range(1, config.max_iters + 1):
        t_cand = _scaled_candidate(a, basis)
        if _gap_guard_fails(t_cand):
            raise _RestartNeeded("near-degenerate Lambda^2 spectrum")
        _, gram, tr = _gram(t_cand, p)
        resid = max(np.abs(gram - np.eye(k)).max(), abs(tr - k))
        best = min(best, resid)
        if resid <= config.tol:
            # Exact rescale so the trace identity holds to machine precision.
            t_cand *= (k / tr) ** (1.0 / p)
            return _finish(basis, t_cand, p, it, "gradient_ascent", config.seed)
        sign, _ = np.linalg.slogdet(a)
        if sign <= 0:
            # det must stay positive along the ascent; flip one row if the
            # start landed in the negative-determinant component.
            a = a.copy()
            a[0] *= -1.0
            sign, _ = np.linalg.slogdet(a)
        g_det = np.linalg.inv(a).T
        n_psi = grad_psi(a, basis)
        denom = float(np.sum(n_psi * n_psi))
        if denom <= 0:
            raise _RestartNeeded("vanishing psi gradient")
        step_dir = g_det - (float(np.sum(g_det * n_psi)) / denom) * n_psi
        slope = float(np.sum(step_dir * step_dir))
        if slope <= 1e-30:
            break
        _, logdet0 = np.linalg.slogdet(a)
        step = 1.0
        for _ in range(40):
            trial = _normalise_psi(a + step * step_dir, basis)
            sign_t, logdet_t = np.linalg.slogdet(trial)
            if sign_t > 0 and logdet_t >= logdet0 + 1e-4 * step * slope:
                a = trial
                break
            step *= 0.5
        else:
            break
    t_cand = _scaled_candidate(a, basis)
    _, gram, tr = _gram(t_cand, p)
    resid = max(np.abs(gram - np.eye(k)).max(), abs(tr - k))
    if resid <= config.tol:
        t_cand *= (k / tr) ** (1.0 / p)
        return _finish(basis, t_cand, p, config.max_iters, "gradient_ascent", config.seed)
    raise NoConvergence(
        f"gradient_ascent did not reach tol={config.tol} "
        f"(best residual {min(best, resid):.3e})",
        n_iter=config.max_iters,
        best_residual=float(min(best, resid)),
    )


class LewisBasis(BaseEstimator):
    """Estimator wrapper around :func:`solve_lewis`.

    Parameters mirror :class:`SolverConfig`.  ``fit`` accepts either a
    :class:`SubspaceBasis` or a raw (k, m, m) stack of basis matrices.

    Attributes set by ``fit``: ``basis_`` (the solved T stack), ``M_``,
    ``gram_residual_``, ``trace_residual_``, ``n_iter_``, ``certificate_``.
    """

    def __init__(self, p=2.0, tol=1e-8, max_iters=10_000, mode="fixed_point", seed=0):
        self.p = p
        self.tol = tol
        self.max_iters = max_iters
        self.mode = mode
        self.seed = seed

    def fit(self, X, y=None):
        basis = X if isinstance(X, SubspaceBasis) else SubspaceBasis(self.p, X)
        cert = solve_lewis(
            basis,
            SolverConfig(tol=self.tol, max_iters=self.max_iters,
                         mode=self.mode, seed=self.seed),
        )
        self.certificate_ = cert
        self.basis_ = cert.basis
        self.M_ = cert.M
        self.gram_residual_ = cert.gram_residual
        self.trace_residual_ = cert.trace_residual
        self.n_iter_ = cert.n_iter
        return self
