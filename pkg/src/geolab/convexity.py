"""Markov 2-convexity and diamond 2-convexity evaluation.

The central quantity compares, for a Markov chain (X_t) and a map f of its
states into a metric space, the forked-divergence sum against the one-step
energy:

    lhs = sum_{k'=1..cap} sum_t 4^(-k') E[ d(f(Xf_t), f(X_t))^2 ]
    rhs = sum_t E[ d(f(X_t), f(X_{t-1}))^2 ]

where Xf_t re-runs the chain independently from its state at the fork time
s = t - 2^k'.  Then ``pi2_lower = sqrt(lhs / rhs)`` is a witnessed lower
bound for the Markov 2-convexity constant of the image metric.

Time conventions (these pin the edge cases down): the chain is frozen at
its initial law for t <= 0, transitions apply from time 0 on, and t ranges
over [1, T + 2^cap].  A fork at s < 0 therefore coincides with a fork at 0,
and both copies evolve t - max(s, 0) steps from the law at max(s, 0).
Truncating the scale sum at ``cap`` discards at most
``diam(f)^2 * T * 4^(-cap) / 3``, which is reported alongside the result.

Everything is evaluated exactly: state laws by vector iteration, fork
kernels by repeated-squaring matrix powers, and final sums by ``math.fsum``
so the result does not depend on summation order.  Two structural
shortcuts keep the loops finite, and both are exact because the arithmetic
is nonnegative (zero/nonzero patterns never suffer cancellation): terms
where the fork law is supported on absorbing states vanish, and terms whose
step count is past a power P^j that is deterministic-and-absorbing vanish.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidChain, InvalidExponent, TooLarge
from .graphs import laakso, pairwise_l1, shortest_path_metric, l1_embed
from .validation import as_probability_vector

MAX_EXACT_STATES = 5000


@dataclass
class ChainSpec:
    """A finite Markov chain with the time window used by the evaluator."""

    P: np.ndarray
    initial: np.ndarray
    horizon: int
    scale_cap: int

    def __post_init__(self):
        self.P = np.asarray(self.P, dtype=float)
        if self.P.ndim != 2 or self.P.shape[0] != self.P.shape[1]:
            raise InvalidChain(f"transition matrix must be square, got {self.P.shape}")
        if np.any(self.P < 0) or not np.all(np.isfinite(self.P)):
            raise InvalidChain("transition matrix has negative or non-finite entries")
        if np.abs(self.P.sum(axis=1) - 1.0).max() > 1e-12:
            raise InvalidChain("transition matrix rows must sum to 1")
        self.initial = as_probability_vector(self.initial, self.n_states, "initial law")
        if np.any(self.initial < 0) or abs(self.initial.sum() - 1.0) > 1e-12:
            raise InvalidChain("initial law must be a probability vector")
        self.horizon = int(self.horizon)
        self.scale_cap = int(self.scale_cap)
        if self.horizon < 1:
            raise InvalidChain(f"horizon must be >= 1, got {self.horizon}")
        if self.scale_cap < 1:
            raise InvalidChain(f"scale_cap must be >= 1, got {self.scale_cap}")

    @property
    def n_states(self):
        return self.P.shape[0]

    def absorbing_mask(self):
        """States w with P[w, w] == 1 exactly (conservative detection)."""
        n = self.n_states
        diag_one = np.diag(self.P) == 1.0
        off = self.P.copy()
        off[np.arange(n), np.arange(n)] = 0.0
        return diag_one & (off.sum(axis=1) == 0.0)


@dataclass
class ConvexityReport:
    lhs: float
    rhs: float
    pi2_lower: float
    truncation_error_bound: float
    scale_cap_used: int
    n_terms: int


class _PowerCache:
    """P^j by binary exponentiation with memoised squarings."""

    def __init__(self, p):
        self.squares = [np.asarray(p, dtype=float)]
        self.memo = {1: self.squares[0]}

    def power(self, j):
        if j in self.memo:
            return self.memo[j]
        while (1 << len(self.squares)) <= j:
            s = self.squares[-1]
            self.squares.append(s @ s)
        out = None
        bit = 0
        jj = j
        while jj:
            if jj & 1:
                out = self.squares[bit] if out is None else out @ self.squares[bit]
            jj >>= 1
            bit += 1
        self.memo[j] = out
        return out


def _squared_distance_table(point_map, metric):
    point_map = np.asarray(point_map, dtype=np.int64).ravel()
    d = metric.dist[np.ix_(point_map, point_map)]
    return d * d, point_map


def _deterministic_absorbing(q, absorbing):
    """True when every row of q is a point mass on an absorbing state."""
    nz = q > 0.0
    if np.any(nz.sum(axis=1) != 1):
        return False
    cols = nz.argmax(axis=1)
    return bool(np.all(absorbing[cols]))


def _laws_until_absorbed(chain, t_max, absorbing):
    """State laws for times 0..t_max, truncated at full absorption."""
    rows = [np.asarray(chain.initial, dtype=float)]
    for _ in range(t_max):
        if np.all(absorbing[rows[-1] > 0.0]):
            break
        rows.append(rows[-1] @ chain.P)
    return rows


def markov_convexity_ratio(chain, point_map, metric):
    """Exact forked-divergence ratio for a chain mapped into a metric space.

    ``point_map`` sends state indices to point indices of ``metric``.
    Returns a :class:`ConvexityReport`.
    """
    n = chain.n_states
    if n > MAX_EXACT_STATES:
        raise TooLarge(f"chain has {n} > {MAX_EXACT_STATES} states")
    d2, pmap = _squared_distance_table(point_map, metric)
    if pmap.size != n:
        raise InvalidChain(f"point map covers {pmap.size} states, chain has {n}")
    t_max = chain.horizon + (1 << chain.scale_cap)
    absorbing = chain.absorbing_mask()

    # State laws by vector iteration.  Absorbing states are fixed points, so
    # once a law is supported on them it never changes; stop storing there
    # and clamp lookups to the last row.
    laws = _laws_until_absorbed(chain, t_max, absorbing)

    def law(s):
        return laws[min(s, len(laws) - 1)]

    # One-step energy: rhs terms vanish once the law sits on absorbing states.
    local = np.einsum("wu,wu->w", chain.P, d2)
    rhs_terms = []
    for t in range(1, t_max + 1):
        mu = law(t - 1)
        if np.all(absorbing[mu > 0.0]):
            break
        rhs_terms.append(float(mu @ local))
    rhs = math.fsum(rhs_terms)

    powers = _PowerCache(chain.P)
    spread_cache = {}
    det_absorb_at = None

    def spread(j):
        nonlocal det_absorb_at
        if j not in spread_cache:
            q = powers.power(j)
            if det_absorb_at is None and _deterministic_absorbing(q, absorbing):
                det_absorb_at = j
            spread_cache[j] = np.einsum("wu,uv,wv->w", q, d2, q, optimize=True)
        return spread_cache[j]

    lhs_terms = []
    n_terms = 0
    for kp in range(1, chain.scale_cap + 1):
        lag = 1 << kp
        weight = 4.0 ** (-kp)
        # Fork before time zero: both copies start from the initial law and
        # run t steps.  Once P^t is a point mass into absorbing states every
        # later t gives an identical (absorbed) pair, so the stretch ends.
        mu0 = laws[0]
        if not np.all(absorbing[mu0 > 0.0]):
            for t in range(1, min(lag, t_max) + 1):
                if det_absorb_at is not None and t >= det_absorb_at:
                    break
                lhs_terms.append(weight * float(mu0 @ spread(t)))
                n_terms += 1
        # Fork at positive times: the copies separate for exactly lag steps.
        if det_absorb_at is not None and lag >= det_absorb_at:
            continue
        for t in range(lag + 1, t_max + 1):
            mu = law(t - lag)
            if np.all(absorbing[mu > 0.0]):
                break  # later t only move the fork deeper into absorption
            lhs_terms.append(weight * float(mu @ spread(lag)))
            n_terms += 1
    lhs = math.fsum(lhs_terms)

    diam2 = float(d2.max())
    trunc = diam2 * chain.horizon * (4.0 ** (-chain.scale_cap)) / 3.0
    pi2 = math.sqrt(lhs / rhs) if rhs > 0 else 0.0
    return ConvexityReport(
        lhs=float(lhs),
        rhs=float(rhs),
        pi2_lower=float(pi2),
        truncation_error_bound=float(trunc),
        scale_cap_used=chain.scale_cap,
        n_terms=n_terms,
    )


def _simulate_steps(states, cum_p, absorbing, n_steps, rng):
    """Advance sampled states ``n_steps`` times (early exit once absorbed)."""
    for _ in range(n_steps):
        live = ~absorbing[states]
        if not live.any():
            break
        u = rng.random(live.sum())
        rows = cum_p[states[live]]
        states[live] = (u[:, None] > rows).sum(axis=1)
    return states


def mc_markov_convexity_ratio(chain, point_map, metric, n_samples=1_000_000, seed=0):
    """Monte Carlo estimate of the forked-divergence sums.

    Samples forked trajectories term by term with the same time window as
    the exact evaluator and returns standard errors, so agreement can be
    asserted at a chosen number of sigmas.
    """
    rng = np.random.default_rng(seed)
    d2, _ = _squared_distance_table(point_map, metric)
    t_max = chain.horizon + (1 << chain.scale_cap)
    absorbing = chain.absorbing_mask()
    cum_p = np.cumsum(chain.P, axis=1)
    cum_init = np.cumsum(chain.initial)
    laws = _laws_until_absorbed(chain, t_max, absorbing)

    # Forks at positive times, one term per (k', fork time); the fork-at-zero
    # stretch of each k' is sampled below as a single trajectory sum.
    terms = []
    for kp in range(1, chain.scale_cap + 1):
        lag = 1 << kp
        for s_eff in range(1, t_max - lag + 1):
            mu = laws[min(s_eff, len(laws) - 1)]
            if np.all(absorbing[mu > 0.0]):
                break
            terms.append((kp, s_eff, lag))

    # Half the budget estimates rhs by whole trajectories, half covers lhs.
    n_rhs = max(n_samples // 2, 1)
    n_lhs_units = len(terms) + chain.scale_cap
    n_per_term = max((n_samples - n_rhs) // max(n_lhs_units, 1), 16)

    states = (rng.random(n_rhs)[:, None] > cum_init).sum(axis=1)
    rhs_sums = np.zeros(n_rhs)
    for _ in range(t_max):
        live = ~absorbing[states]
        if not live.any():
            break
        u = rng.random(int(live.sum()))
        nxt = states.copy()
        nxt[live] = (u[:, None] > cum_p[states[live]]).sum(axis=1)
        rhs_sums += d2[states, nxt]
        states = nxt
    rhs = float(rhs_sums.mean())
    rhs_se = float(rhs_sums.std(ddof=1) / math.sqrt(n_rhs))

    lhs_mean = 0.0
    lhs_var = 0.0
    # Fork-at-zero stretches: for each k', sum d^2 between two independent
    # copies over t = 1..lag.  Pairs of absorbed copies keep their distance,
    # so once every sampled pair is absorbed the remaining time is added in
    # closed form.
    for kp in range(1, chain.scale_cap + 1):
        lag = min(1 << kp, t_max)
        a = (rng.random(n_per_term)[:, None] > cum_init).sum(axis=1)
        b = (rng.random(n_per_term)[:, None] > cum_init).sum(axis=1)
        sums = np.zeros(n_per_term)
        for t in range(1, lag + 1):
            if not (~absorbing[a] | ~absorbing[b]).any():
                sums += (lag - t + 1) * d2[a, b]
                break
            a = _simulate_steps(a, cum_p, absorbing, 1, rng)
            b = _simulate_steps(b, cum_p, absorbing, 1, rng)
            sums += d2[a, b]
        vals = (4.0 ** (-kp)) * sums
        lhs_mean += float(vals.mean())
        lhs_var += float(vals.var(ddof=1) / n_per_term)

    for kp, s_eff, steps in terms:
        w = (rng.random(n_per_term)[:, None] > cum_init).sum(axis=1)
        w = _simulate_steps(w, cum_p, absorbing, s_eff, rng)
        a = _simulate_steps(w.copy(), cum_p, absorbing, steps, rng)
        b = _simulate_steps(w.copy(), cum_p, absorbing, steps, rng)
        vals = (4.0 ** (-kp)) * d2[a, b]
        lhs_mean += float(vals.mean())
        lhs_var += float(vals.var(ddof=1) / n_per_term)
    return {
        "lhs": lhs_mean,
        "rhs": rhs,
        "lhs_se": math.sqrt(lhs_var),
        "rhs_se": rhs_se,
        "n_terms": n_lhs_units,
        "n_per_term": n_per_term,
    }


def laakso_canonical_chain(k, edge_budget=None):
    """The uniform forward walk on the level-k Laakso graph.

    From every non-sink vertex the walk moves to a uniformly random
    neighbour strictly farther from the source; the sink absorbs.  Returns
    ``(ChainSpec, point_map)`` with the identity point map into the graph's
    shortest-path metric, horizon 4^(k-1) and scale cap ceil(log2 T) + 13,
    deep enough that the truncation error bound stays below 1e-6 of lhs.
    """
    g = laakso(k) if edge_budget is None else laakso(k, edge_budget=edge_budget)
    metric = shortest_path_metric(g)
    height = metric.dist[g.source]
    p = np.zeros((g.n, g.n))
    adj = g.adjacency()
    for v in range(g.n):
        if v == g.sink:
            p[v, v] = 1.0
            continue
        farther = [u for u in adj[v] if height[u] > height[v]]
        if not farther:
            raise InvalidChain(f"vertex {v} has no strictly farther neighbour")
        for u in farther:
            p[v, u] = 1.0 / len(farther)
    horizon = 4 ** (k - 1)
    cap = max(1, math.ceil(math.log2(horizon)) + 13) if horizon > 1 else 13
    initial = np.zeros(g.n)
    initial[g.source] = 1.0
    chain = ChainSpec(P=p, initial=initial, horizon=horizon, scale_cap=cap)
    return chain, np.arange(g.n)


def diamond_convexity_ratio(point_map, g, metric):
    """Anti-edge versus edge energy ratio on a diamond graph.

    lhs sums d(f(a), f(b))^2 over the anti-edges of every level, rhs sums
    d(f(u), f(v))^2 over the edges.
    """
    d2, pmap = _squared_distance_table(point_map, metric)
    lhs = math.fsum(
        float(d2[a, b]) for pairs in g.anti_edges.values() for a, b in pairs)
    rhs = math.fsum(float(d2[u, v]) for u, v in g.edges)
    return {"lhs": lhs, "rhs": rhs, "ratio": lhs / rhs if rhs > 0 else 0.0}


def _best_upper_log(x, n_grid=4000):
    qs = 1.0 + (np.arange(1, n_grid + 1) / n_grid)
    vals = x * (1.0 - 1.0 / qs) - 0.5 * np.log(qs - 1.0)
    i = int(np.argmin(vals))
    return float(vals[i]), float(qs[i])


def impossibility_certificate(k, alpha, edge_budget=None):
    """Dimension lower bound forced by embedding the Laakso witness set.

    Pushes the canonical chain through the cut-based l1 embedding of the
    level-k Laakso graph, measures pi = pi2_lower there, and emits: any
    subspace X of nuclear-norm space that contains a copy of the witness
    set with bi-Lipschitz distortion at most ``alpha`` must have

        C(dim) * sqrt(log dim X) >= pi / alpha,

    where C(d) = e^(1/q(d)) with q(d) = 1 + 1/log(d) is the constant of
    the optimised Markov-convexity upper bound.  The numeric threshold
    solves the monotone condition min_q d^(1-1/q)/sqrt(q-1) >= pi/alpha.
    """
    alpha = float(alpha)
    if alpha < 1.0:
        raise InvalidExponent(f"distortion alpha must be >= 1, got {alpha}")
    g = laakso(k) if edge_budget is None else laakso(k, edge_budget=edge_budget)
    emb = l1_embed(g)
    from .graphs import FiniteMetric

    image_metric = FiniteMetric(n=g.n, dist=pairwise_l1(emb.images))
    chain, pmap = laakso_canonical_chain(k, edge_budget=edge_budget)
    report = markov_convexity_ratio(chain, pmap, image_metric)
    pi = report.pi2_lower
    target = pi / alpha

    if target <= 1.0:
        log_dim = 0.0
        q_opt = 2.0
    else:
        lo, hi = 0.0, 4.0 * (target * target) + 16.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            val, _ = _best_upper_log(mid)
            if val >= math.log(target):
                hi = mid
            else:
                lo = mid
        log_dim = hi
        _, q_opt = _best_upper_log(log_dim)
    c_const = math.exp(1.0 / (1.0 + 1.0 / log_dim)) if log_dim > 0 else math.e
    n_points = g.n
    c_exponent = log_dim * alpha * alpha / math.log(n_points) if n_points > 1 else 0.0
    return {
        "k": int(k),
        "n_points": int(n_points),
        "pi2_lower": float(pi),
        "alpha": alpha,
        "lhs": report.lhs,
        "rhs": report.rhs,
        "truncation_error_bound": report.truncation_error_bound,
        "statement": (
            "any subspace X of S_1 containing the witness set with distortion"
            f" <= {alpha:g} satisfies C(dim X) * sqrt(log dim X) >= {target:.6g},"
            " with C(d) = exp(1/(1 + 1/log d))"
        ),
        "log_dim_threshold": float(log_dim),
        "dim_threshold": float(math.exp(log_dim)),
        "q_opt": float(q_opt),
        "c_constant": float(c_const),
        "c_exponent": float(c_exponent),
        "bound_form": "dim X >= n_points^(c_exponent / alpha^2)",
    }
