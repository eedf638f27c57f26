"""Uniform-convexity style inequality checks in Schatten q-spaces.

Each check evaluates both sides of a classical inequality on concrete
matrices and reports the numbers together with a boolean verdict at a
small relative slack.  Hypercube-indexed data uses the fixed binary order
of :func:`geolab.graphs.hypercube_metric`: point i of {-1, 1}^k has j-th
coordinate +1 exactly when bit j of i is set.
"""

import numpy as np

from .errors import (
    CollapsedPair,
    DimensionMismatch,
    InvalidExponent,
    InvalidExponents,
    NotAMartingale,
)
from .spectral import schatten_norm, schatten_norm_stack
from .validation import as_matrix_stack, as_square_matrix, check_same_shape

DEFAULT_SLACK = 1e-9


def _hypercube_stack(values, name="values"):
    vals = as_matrix_stack(values, name)
    n = vals.shape[0]
    k = n.bit_length() - 1
    if 2 ** k != n:
        raise DimensionMismatch(f"{name}: leading dimension {n} is not a power of 2")
    return vals, k


def enflo_type_check(q, values, tol=DEFAULT_SLACK):
    """Diagonal-versus-edge comparison for a map of the hypercube into S_q.

    lhs sums ||f(e) - f(-e)||_q^q over all points, rhs sums
    ||f(e) - f(e with bit j flipped)||_q^q over all points and bits.
    Holds for q in [1, 2].
    """
    q = float(q)
    if not 1.0 <= q <= 2.0:
        raise InvalidExponent(f"enflo exponent must be in [1, 2], got {q}")
    vals, k = _hypercube_stack(values)
    n = vals.shape[0]
    full = n - 1
    lhs = float(np.sum(schatten_norm_stack(vals - vals[np.arange(n) ^ full], q) ** q))
    rhs = 0.0
    for j in range(k):
        rhs += float(np.sum(
            schatten_norm_stack(vals - vals[np.arange(n) ^ (1 << j)], q) ** q))
    return {"lhs": lhs, "rhs": rhs, "holds": bool(lhs <= rhs + tol * (1.0 + rhs))}


def roundness_check(q, c1, c2, c3, c4, tol=DEFAULT_SLACK):
    """Quadrilateral roundness-q inequality in S_q for q in [1, 2]:

    ||c1-c3||^q + ||c2-c4||^q <= ||c1-c2||^q + ||c2-c3||^q
                                + ||c3-c4||^q + ||c4-c1||^q.
    """
    q = float(q)
    if not 1.0 <= q <= 2.0:
        raise InvalidExponent(f"roundness exponent must be in [1, 2], got {q}")
    mats = [as_square_matrix(c, f"c{i}") for i, c in enumerate((c1, c2, c3, c4), 1)]
    for m in mats[1:]:
        check_same_shape(mats[0], m)
    lhs = schatten_norm(mats[0] - mats[2], q) ** q + schatten_norm(mats[1] - mats[3], q) ** q
    rhs = (schatten_norm(mats[0] - mats[1], q) ** q
           + schatten_norm(mats[1] - mats[2], q) ** q
           + schatten_norm(mats[2] - mats[3], q) ** q
           + schatten_norm(mats[3] - mats[0], q) ** q)
    return {"lhs": float(lhs), "rhs": float(rhs),
            "holds": bool(lhs <= rhs + tol * (1.0 + rhs))}


def clarkson_check(q, a, b, tol=DEFAULT_SLACK):
    """Clarkson inequality in S_q for q in [1, 2]:

    (||a+b||_q^q + ||a-b||_q^q) / 2 <= ||a||_q^q + ||b||_q^q.
    """
    q = float(q)
    if not 1.0 <= q <= 2.0:
        raise InvalidExponent(f"clarkson exponent must be in [1, 2], got {q}")
    a = as_square_matrix(a, "a")
    b = as_square_matrix(b, "b")
    check_same_shape(a, b)
    lhs = 0.5 * (schatten_norm(a + b, q) ** q + schatten_norm(a - b, q) ** q)
    rhs = schatten_norm(a, q) ** q + schatten_norm(b, q) ** q
    return {"lhs": float(lhs), "rhs": float(rhs),
            "holds": bool(lhs <= rhs + tol * (1.0 + rhs))}


def ball_convexity_check(q, x, y, tol=DEFAULT_SLACK):
    """Two-point 2-convexity inequality in S_q for q in (1, 2]:

    2 ||x||^2 + 2 (q - 1) ||y||^2 <= ||x+y||^2 + ||x-y||^2.

    At q = 2 this is the parallelogram identity.
    """
    q = float(q)
    if not 1.0 < q <= 2.0:
        raise InvalidExponent(f"2-convexity exponent must be in (1, 2], got {q}")
    x = as_square_matrix(x, "x")
    y = as_square_matrix(y, "y")
    check_same_shape(x, y)
    lhs = 2.0 * schatten_norm(x, q) ** 2 + 2.0 * (q - 1.0) * schatten_norm(y, q) ** 2
    rhs = schatten_norm(x + y, q) ** 2 + schatten_norm(x - y, q) ** 2
    return {"lhs": float(lhs), "rhs": float(rhs),
            "holds": bool(lhs <= rhs + tol * (1.0 + rhs))}


def martingale_cotype_check(q, stages, tol=1e-6, martingale_tol=1e-10):
    """Martingale cotype-2 bound for a dyadic S_q martingale, q in (1, 2].

    ``stages[j]`` holds the stage-j values on the 2^j sign histories, in
    binary order.  Verifies adaptedness structurally and the martingale
    identity ``(M_{j+1}(w, +) + M_{j+1}(w, -)) / 2 = M_j(w)`` within
    ``martingale_tol``, then checks

        sum_j E ||M_{j+1} - M_j||_q^2  <=  (1/(q-1)) sup_j E ||M_j||_q^2.
    """
    q = float(q)
    if not 1.0 < q <= 2.0:
        raise InvalidExponent(f"cotype exponent must be in (1, 2], got {q}")
    if len(stages) < 2:
        raise DimensionMismatch("need at least two martingale stages")
    mats = [as_matrix_stack(s, f"stage {j}") for j, s in enumerate(stages)]
    for j, s in enumerate(mats):
        if s.shape[0] != 2 ** j:
            raise DimensionMismatch(
                f"stage {j} has {s.shape[0]} values, expected {2 ** j}")
    scale = max(float(np.abs(s).max()) for s in mats) + 1.0
    for j in range(len(mats) - 1):
        cur, nxt = mats[j], mats[j + 1]
        # Child of history w under sign b sits at index w | (b << j).
        avg = 0.5 * (nxt[: 2 ** j] + nxt[2 ** j:])
        defect = float(np.abs(avg - cur).max())
        if defect > martingale_tol * scale:
            raise NotAMartingale(
                f"stages {j} -> {j + 1} violate the averaging identity "
                f"(defect {defect:.3e})")
    increments = 0.0
    for j in range(len(mats) - 1):
        cur, nxt = mats[j], mats[j + 1]
        parents = np.vstack([cur, cur])
        diffs = schatten_norm_stack(nxt - parents, q)
        increments += float(np.mean(diffs ** 2))
    sup_norm = max(float(np.mean(schatten_norm_stack(s, q) ** 2)) for s in mats)
    rhs_bound = sup_norm / (q - 1.0)
    return {"lhs": float(increments), "rhs_bound": float(rhs_bound),
            "holds": bool(increments <= rhs_bound * (1.0 + tol))}


def hypercube_lower_bound(values, p, q):
    """Distortion lower bound implied by the diagonal-versus-edge comparison.

    ``values`` maps {-1, 1}^k (binary order) into S_q; distances in the
    source are l_p on the cube.  Returns the smallest distortion consistent
    with the type-q inequality given f's measured pair norms, together with
    the exhaustive actual distortion for comparison.  The implied bound
    never exceeds the actual distortion.
    """
    p, q = float(p), float(q)
    if not p > 0:
        raise InvalidExponent(f"p must be positive, got {p}")
    if not (p < q <= 2.0):
        raise InvalidExponents(f"requires p < q <= 2, got p={p}, q={q}")
    vals, k = _hypercube_stack(values)
    n = vals.shape[0]
    full = n - 1
    idx = np.arange(n)
    bits = (idx[:, None] >> np.arange(k)) & 1

    # Source l_p distances: diagonal pairs and edge pairs.
    d_diag = 2.0 * k ** (1.0 / p)
    d_edge = 2.0
    f_diag = schatten_norm_stack(vals - vals[idx ^ full], q)
    f_edges = np.concatenate(
        [schatten_norm_stack(vals - vals[idx ^ (1 << j)], q) for j in range(k)])
    if np.any(f_diag == 0.0) or np.any(f_edges == 0.0):
        raise CollapsedPair("map collapses a hypercube pair")
    e_f = float(np.sum(f_diag ** q))
    r_f = float(np.sum(f_edges ** q))
    src_diag = n * d_diag ** q
    src_edge = k * n * d_edge ** q
    implied = (src_diag / src_edge * (r_f / e_f)) ** (1.0 / q)

    # Exhaustive actual distortion over all pairs.
    ham = (bits[:, None, :] != bits[None, :, :]).sum(axis=2)
    iu = np.triu_indices(n, k=1)
    src = 2.0 * ham[iu] ** (1.0 / p)
    diffs = vals[iu[0]] - vals[iu[1]]
    tgt = schatten_norm_stack(diffs, q)
    if np.any(tgt == 0.0):
        raise CollapsedPair("map collapses a hypercube pair")
    ratio = tgt / src
    actual = float(ratio.max() / ratio.min())
    return {"implied_bound": float(implied), "actual_distortion": actual}
