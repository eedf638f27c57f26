"""Spectral primitives for Schatten-norm computations.

All matrix powers follow one kernel-aware convention: a symmetric positive
semidefinite matrix is diagonalised, eigenvalues below ``SV_CLIP`` times the
largest one are treated as exact zeros, and a zero eigenvalue is mapped to
zero by every power, including negative ones.  Consequently
``sym_power(t, 1.0) @ sym_power(t, -1.0)`` is the orthogonal projection onto
the range of ``t`` rather than the identity.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidExponent, NotPsd, OrderViolated
from .validation import as_matrix, as_square_matrix, check_same_shape

# Relative threshold below which singular values / eigenvalues are exact zeros.
SV_CLIP = 1e-12

# Symmetry and semidefiniteness slack for PSD validation.
PSD_TOL = 1e-10


@dataclass
class SpectralForm:
    """Singular value decomposition ``t = left @ diag(singulars) @ right``.

    ``singulars`` is nonincreasing and values below ``SV_CLIP`` times the
    largest are clamped to exact zero.
    """

    left: np.ndarray
    singulars: np.ndarray
    right: np.ndarray

    def reconstruct(self):
        return (self.left * self.singulars) @ self.right


def svd(t):
    """Deterministic SVD of a real matrix with small-value clamping."""
    t = as_matrix(t, "t")
    if not t.any():
        n, m = t.shape
        r = min(n, m)
        return SpectralForm(np.eye(n, r), np.zeros(r), np.eye(r, m))
    u, s, vt = np.linalg.svd(t, full_matrices=False)
    s = _clip_spectrum(s)
    return SpectralForm(u, s, vt)


def singular_values(t):
    """Nonincreasing singular values of ``t`` with small values clamped to 0."""
    t = as_matrix(t, "t")
    if not t.any():
        return np.zeros(min(t.shape))
    return _clip_spectrum(np.linalg.svd(t, compute_uv=False))


def _clip_spectrum(s):
    s = np.array(s, dtype=float)
    top = s.max(initial=0.0)
    s[s < SV_CLIP * top] = 0.0
    return s


def schatten_norm(t, p):
    """Schatten p-norm of ``t``: the l_p norm of its singular values.

    ``p`` may be any real in (0, inf]; values in (0, 1) give the usual
    quasi-norm.  ``p = inf`` returns the operator norm.
    """
    s = singular_values(t)
    return _schatten_from_singulars(s, p)


def schatten_norm_stack(ts, p):
    """Schatten p-norms of a stack of matrices, shape (..., n, m) -> (...)."""
    ts = np.asarray(ts, dtype=float)
    s = np.linalg.svd(ts, compute_uv=False)
    return _schatten_from_singulars(s, p, axis=-1)


def _schatten_from_singulars(s, p, axis=None):
    p = float(p)
    if not p > 0:
        raise InvalidExponent(f"schatten exponent must be in (0, inf], got {p}")
    if axis is None:
        if np.isinf(p):
            return float(s.max(initial=0.0))
        top = s.max(initial=0.0)
        if top == 0.0:
            return 0.0
        # Factor out the top singular value so large p does not overflow.
        return float(top * np.sum((s / top) ** p) ** (1.0 / p))
    if np.isinf(p):
        return s.max(axis=axis)
    top = s.max(axis=axis, keepdims=True)
    safe = np.where(top > 0, top, 1.0)
    out = np.squeeze(safe, axis=axis) * np.sum((s / safe) ** p, axis=axis) ** (1.0 / p)
    return np.where(np.squeeze(top, axis=axis) > 0, out, 0.0)


def psd_eigh(t, tol=PSD_TOL):
    """Eigendecomposition of a symmetric PSD matrix, validated and clamped.

    Raises ``NotPsd`` when ``t`` is materially asymmetric or has an
    eigenvalue below ``-tol * (1 + max eigenvalue)``.  Returns ``(w, v)``
    with small eigenvalues clamped to exact zero.
    """
    t = as_square_matrix(t, "t")
    sym_defect = np.linalg.norm(t - t.T)
    if sym_defect > tol * (1.0 + np.linalg.norm(t)):
        raise NotPsd(f"matrix is not symmetric (defect {sym_defect:.3e})")
    w, v = np.linalg.eigh(0.5 * (t + t.T))
    top = w.max(initial=0.0)
    if w.min(initial=0.0) < -tol * (1.0 + top):
        raise NotPsd(f"matrix has negative eigenvalue {w.min():.3e}")
    w = np.where(w < SV_CLIP * max(top, 0.0), 0.0, w)
    w[w < 0] = 0.0
    return w, v


def sym_power(t, beta, tol=PSD_TOL):
    """Kernel-aware power ``t ** beta`` of a symmetric PSD matrix.

    Zero eigenvalues stay zero for every ``beta``, so negative powers invert
    ``t`` on its range only.  ``beta = 0`` gives the projection onto the
    range of ``t``.
    """
    w, v = psd_eigh(t, tol=tol)
    pw = np.zeros_like(w)
    pos = w > 0
    pw[pos] = w[pos] ** float(beta)
    return (v * pw) @ v.T


def operator_norm(t):
    return schatten_norm(t, np.inf)


def psd_leq(s, t, tol=1e-10):
    """Check the semidefinite order ``s <= t`` up to a relative slack.

    Returns True when the smallest eigenvalue of ``t - s`` is at least
    ``-tol * (1 + ||t||_inf)``.
    """
    s = as_square_matrix(s, "s")
    t = as_square_matrix(t, "t")
    check_same_shape(s, t, "s", "t")
    gap = np.linalg.eigvalsh(0.5 * ((t - s) + (t - s).T)).min()
    scale = 1.0 + np.abs(np.linalg.eigvalsh(0.5 * (t + t.T))).max(initial=0.0)
    return bool(gap >= -tol * scale)


def loewner_contraction_check(s, t, beta):
    """Evaluate ``||s^beta @ t^(-beta)||_inf`` for an ordered PSD pair.

    For ``0 < beta <= 1/2`` the value is at most 1 whenever ``s <= t``; the
    bound genuinely fails for beta = 1, which is why the exponent range is
    not validated away here.  Raises ``OrderViolated`` when ``s <= t`` does
    not hold.
    """
    beta = float(beta)
    if not beta > 0:
        raise InvalidExponent(f"beta must be positive, got {beta}")
    if not psd_leq(s, t, tol=1e-10):
        raise OrderViolated("loewner_contraction_check requires s <= t in the PSD order")
    value = float(operator_norm(sym_power(s, beta) @ sym_power(t, -beta)))
    return {"value": value, "holds": bool(value <= 1.0 + 1e-9)}


def von_neumann_check(s, t, tol=1e-9):
    """Trace--singular-value inequality ``tr(s @ t) <= sum_j sv_j(s) sv_j(t)``."""
    s = as_square_matrix(s, "s")
    t = as_square_matrix(t, "t")
    check_same_shape(s, t, "s", "t")
    lhs = float(np.trace(s @ t))
    rhs = float(np.dot(singular_values(s), singular_values(t)))
    return {"lhs": lhs, "rhs": rhs, "holds": bool(lhs <= rhs + tol * (1.0 + abs(rhs)))}


def holder_exponent(a, b):
    """The exponent c with 1/c = 1/a + 1/b, for a, b in [1, inf]."""
    a, b = float(a), float(b)
    if a < 1 or b < 1:
        raise InvalidExponent(f"holder exponents must be >= 1, got ({a}, {b})")
    inv = (0.0 if np.isinf(a) else 1.0 / a) + (0.0 if np.isinf(b) else 1.0 / b)
    return np.inf if inv == 0.0 else 1.0 / inv


def holder_check(x, y, a, b, tol=1e-9):
    """Schatten Hoelder inequality ``||x y||_c <= ||x||_a ||y||_b``."""
    x = as_matrix(x, "x")
    y = as_matrix(y, "y")
    c = holder_exponent(a, b)
    lhs = float(schatten_norm(x @ y, c))
    rhs = float(schatten_norm(x, a) * schatten_norm(y, b))
    return {"lhs": lhs, "rhs": rhs, "c": c, "holds": bool(lhs <= rhs + tol * (1.0 + rhs))}
