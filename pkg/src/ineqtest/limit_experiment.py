"""Posterior-probability tests of inequality hypotheses in the Gaussian
limit experiment.

The experiment observes a single X ~ N(theta, Sigma); the posterior for
theta given X is N(X, Sigma).  The test of a null region rejects when the
posterior probability of the region is at or below the level alpha.  For
half-spaces this test is exact; for smaller regions (boxes, interval
unions, sign agreement) its size can land on either side of alpha, which
is the behavior this module exists to measure.

Null regions with closed-form posterior probabilities (half-spaces,
scalar interval unions, boxes under independent coordinates, and their
complements) are evaluated analytically; everything else falls back to
Monte Carlo over posterior draws.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .distributions import (
    STANDARD_NORMAL,
    CovarianceMatrix,
    SymmetricLocationFamily,
    mvn_sample,
    std_normal_cdf,
    std_normal_quantile,
)
from .mc_harness import McSummary, SeedPlan, mc_se, run_replications

REJECT = "reject"
ACCEPT = "accept"


# ---------------------------------------------------------------------------
# null regions


@dataclass(frozen=True)
class HalfSpace:
    """{theta : c . theta <= c0} for a nonzero direction c."""

    c: np.ndarray
    c0: float

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        if not np.any(c != 0.0):
            raise ValueError("half-space direction must be nonzero")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "c0", float(self.c0))

    @property
    def dim(self):
        return self.c.shape[0]

    def contains(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return points @ self.c <= self.c0


def LowerHalfLine(c0):
    """Scalar {theta <= c0}; just the d = 1 half-space."""
    return HalfSpace(c=np.array([1.0]), c0=c0)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box with closed faces; bounds may be +-inf.

    The nonnegative orthant is Box(lower=0, upper=+inf in every coordinate).
    """

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.shape != hi.shape:
            raise ValueError("box bounds must have equal length")
        if np.any(lo > hi):
            raise ValueError("box requires lower <= upper")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def orthant(cls, d):
        return cls(lower=np.zeros(d), upper=np.full(d, np.inf))

    @property
    def dim(self):
        return self.lower.shape[0]

    def contains(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return np.all((points >= self.lower) & (points <= self.upper), axis=1)


@dataclass(frozen=True)
class IntervalUnion:
    """Finite union of disjoint closed scalar intervals, sorted ascending.

    Degenerate intervals [a, a] are allowed; under a continuous posterior
    they carry probability zero, which is how measure-zero counterexample
    sets are represented in tests.
    """

    intervals: tuple

    def __post_init__(self):
        ivs = tuple((float(a), float(b)) for a, b in self.intervals)
        if not ivs:
            raise ValueError("need at least one interval")
        for a, b in ivs:
            if a > b:
                raise ValueError(f"interval [{a}, {b}] has a > b")
        for (_, b_prev), (a_next, _) in zip(ivs, ivs[1:]):
            if a_next <= b_prev:
                raise ValueError("intervals must be disjoint and sorted")
        object.__setattr__(self, "intervals", ivs)

    @property
    def dim(self):
        return 1

    def contains(self, points):
        points = np.asarray(points, dtype=float).reshape(-1)
        out = np.zeros(points.shape, dtype=bool)
        for a, b in self.intervals:
            out |= (points >= a) & (points <= b)
        return out


@dataclass(frozen=True)
class SignAgreement:
    """{theta in R^2 : theta_1 * theta_2 >= 0}, the union of the first and
    third quadrants."""

    @property
    def dim(self):
        return 2

    def contains(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return points[:, 0] * points[:, 1] >= 0.0


@dataclass(frozen=True)
class Complement:
    """Set complement of an inner region."""

    inner: object

    @property
    def dim(self):
        return self.inner.dim

    def contains(self, points):
        return ~np.asarray(self.inner.contains(points), dtype=bool)


@dataclass(frozen=True)
class Predicate:
    """Opaque membership test; always evaluated by Monte Carlo.

    ``fn`` maps a (m, d) array of points to a boolean array of length m
    when ``vectorized``; otherwise it is called per point.
    """

    fn: object
    dim: int
    vectorized: bool = False

    def contains(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.vectorized:
            return np.asarray(self.fn(points), dtype=bool)
        return np.array([bool(self.fn(p)) for p in points])


def region_membership(region, theta):
    """Scalar membership test for a single parameter point."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    return bool(np.asarray(region.contains(theta.reshape(1, -1)))[0])


# ---------------------------------------------------------------------------
# the experiment


@dataclass(frozen=True)
class Experiment:
    """One observation X ~ N(theta, Sigma); posterior theta | X ~ N(X, Sigma)."""

    cov: CovarianceMatrix
    family: SymmetricLocationFamily = STANDARD_NORMAL

    @classmethod
    def scalar(cls, variance=1.0):
        return cls(cov=CovarianceMatrix(np.array([[float(variance)]])))

    @classmethod
    def identity(cls, d):
        return cls(cov=CovarianceMatrix.identity(d))

    @property
    def dim(self):
        return self.cov.dim

    def sample(self, theta, rng, size=None):
        return mvn_sample(theta, self.cov, rng, size=size)

    def posterior_sample(self, x, rng, size=None):
        return mvn_sample(x, self.cov, rng, size=size)


# ---------------------------------------------------------------------------
# posterior probabilities


def posterior_prob_halfspace(region: HalfSpace, x, exp: Experiment) -> float:
    """Closed-form posterior probability of a half-space: F((c0 - c.x)/sd)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    var = exp.cov.quad_form(region.c)
    if var <= 0.0:
        raise ValueError("degenerate direction: c' Sigma c = 0")
    sd = np.sqrt(var)
    return float(exp.family.cdf((region.c0 - region.c @ x) / sd))


def _closed_form_posterior(region, x, exp: Experiment):
    """Returns the exact posterior probability, or None when no closed form
    applies (correlated boxes, sign agreement, predicates)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if isinstance(region, HalfSpace):
        return posterior_prob_halfspace(region, x, exp)
    if isinstance(region, IntervalUnion):
        sd = np.sqrt(exp.cov.entries[0, 0])
        if sd <= 0.0:
            raise ValueError("degenerate scalar experiment")
        total = 0.0
        for a, b in region.intervals:
            total += float(exp.family.cdf((b - x[0]) / sd) - exp.family.cdf((a - x[0]) / sd))
        return min(max(total, 0.0), 1.0)
    if isinstance(region, Box):
        off_diag = exp.cov.entries - np.diag(np.diag(exp.cov.entries))
        if np.any(off_diag != 0.0):
            return None
        sds = exp.cov.diag_sd()
        if np.any(sds <= 0.0):
            return None
        hi = exp.family.cdf((region.upper - x) / sds)
        lo = exp.family.cdf((region.lower - x) / sds)
        return float(np.prod(hi - lo))
    if isinstance(region, Complement):
        inner = _closed_form_posterior(region.inner, x, exp)
        if inner is None:
            return None
        return 1.0 - inner
    return None


def posterior_prob_region(region, x, exp: Experiment, draws=2000, rng=None) -> McSummary:
    """Posterior probability that theta lies in the region, given X = x.

    Closed-form branches report mc_se = 0.  The Monte Carlo branch draws
    from the posterior N(x, Sigma); a Complement is evaluated through its
    inner region on the same draws, so the two estimates sum to 1 exactly.
    """
    exact = _closed_form_posterior(region, x, exp)
    if exact is not None:
        return McSummary(estimate=exact, mc_se=0.0, reps=max(int(draws), 1), master_seed=None)
    if isinstance(region, Complement):
        inner = posterior_prob_region(region.inner, x, exp, draws=draws, rng=rng)
        return McSummary(estimate=1.0 - inner.estimate, mc_se=inner.mc_se,
                         reps=inner.reps, master_seed=inner.master_seed)
    if draws < 1:
        raise ValueError("need draws >= 1")
    if rng is None:
        raise ValueError("Monte Carlo branch needs an rng")
    theta_draws = exp.posterior_sample(np.atleast_1d(np.asarray(x, dtype=float)), rng, size=draws)
    hits = np.asarray(region.contains(theta_draws), dtype=bool)
    p = float(hits.mean())
    return McSummary(estimate=p, mc_se=mc_se(p, draws), reps=int(draws), master_seed=None)


def kline_orthant_posterior(x) -> float:
    """Posterior probability that theta is NOT in the nonnegative orthant,
    for identity covariance: 1 - prod_j F(x_j).

    This is the complement-orthant null evaluated at an arbitrary point;
    with every coordinate at the same moderately positive value it stays
    large in high dimensions even though each coordinate looks
    significant on its own.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return float(1.0 - np.prod(std_normal_cdf(x)))


# ---------------------------------------------------------------------------
# testing and operating characteristics


def bayes_test(region, x, exp: Experiment, alpha, draws=2000, rng=None) -> str:
    """Rejects the null region iff its posterior probability is <= alpha.

    The comparison is inclusive and uses the Monte Carlo point estimate
    directly when no closed form exists.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    post = posterior_prob_region(region, x, exp, draws=draws, rng=rng)
    return REJECT if post.estimate <= alpha else ACCEPT


def halfspace_rejection_prob_exact(region: HalfSpace, theta, exp: Experiment, alpha) -> float:
    """Exact rejection probability of the half-space test at any theta.

    Reject iff c.X >= c0 + sd * z_{1-alpha}, and c.X ~ N(c.theta, sd^2).
    At boundary points (c.theta = c0) this equals alpha identically.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    var = exp.cov.quad_form(region.c)
    if var <= 0.0:
        raise ValueError("degenerate direction: c' Sigma c = 0")
    sd = np.sqrt(var)
    z = std_normal_quantile(1.0 - alpha)
    return float(1.0 - exp.family.cdf((region.c0 - region.c @ theta) / sd + z))


def rejection_probability(region, theta, exp: Experiment, alpha, reps=10_000,
                          draws=2000, master_seed=0, method="auto",
                          workers=1) -> McSummary:
    """Frequentist rejection probability of the posterior test at theta.

    method="auto" uses the exact formula for half-spaces and falls back to
    Monte Carlo otherwise; method="mc" forces simulation.  The Monte Carlo
    path simulates X ~ N(theta, Sigma) per replication on a derived stream
    and applies the test, so results are reproducible for any worker count.
    """
    if method not in ("auto", "mc"):
        raise ValueError("method must be 'auto' or 'mc'")
    plan = master_seed if isinstance(master_seed, SeedPlan) else SeedPlan(int(master_seed))
    if method == "auto" and isinstance(region, HalfSpace):
        rp = halfspace_rejection_prob_exact(region, theta, exp, alpha)
        return McSummary(estimate=rp, mc_se=0.0, reps=int(reps), master_seed=plan.master_seed)
    theta = np.atleast_1d(np.asarray(theta, dtype=float))

    def one_rep(_, rng):
        x = exp.sample(theta, rng)
        return bayes_test(region, x, exp, alpha, draws=draws, rng=rng) == REJECT

    report = run_replications(one_rep, reps, plan, workers=workers)
    return report.summary


@dataclass(frozen=True)
class SizeResult:
    """Grid approximation of size: per-point summaries plus the maximizer."""

    thetas: tuple
    summaries: tuple
    argmax_index: int
    closure_indices: tuple = ()

    @property
    def max_summary(self) -> McSummary:
        return self.summaries[self.argmax_index]

    @property
    def argmax_theta(self):
        return self.thetas[self.argmax_index]


def size_over_boundary(region, boundary_grid, exp: Experiment, alpha, reps=10_000,
                       draws=2000, master_seed=0, workers=1) -> SizeResult:
    """Max rejection probability over a user-supplied grid of null points.

    Grid points outside the region are tolerated (a closed null's boundary
    may sit in the closure only) and reported in ``closure_indices``.
    Each point gets its own substream namespace, so adding points never
    perturbs the others.
    """
    grid = [np.atleast_1d(np.asarray(t, dtype=float)) for t in boundary_grid]
    if not grid:
        raise ValueError("empty boundary grid")
    closure = tuple(j for j, t in enumerate(grid) if not region_membership(region, t))
    plan = master_seed if isinstance(master_seed, SeedPlan) else SeedPlan(int(master_seed))
    summaries = []
    for j, t in enumerate(grid):
        def one_rep(_, rng, _theta=t):
            x = exp.sample(_theta, rng)
            return bayes_test(region, x, exp, alpha, draws=draws, rng=rng) == REJECT

        report = run_replications(one_rep, reps, plan.subplan(j), workers=workers)
        summaries.append(report.summary)
    argmax = int(np.argmax([s.estimate for s in summaries]))
    thetas = tuple(tuple(float(v) for v in t) for t in grid)
    return SizeResult(thetas=thetas, summaries=tuple(summaries),
                      argmax_index=argmax, closure_indices=closure)


def minimax_level_bounds(alpha) -> tuple:
    """Open-interval bounds (alpha, alpha/(1-alpha)) for the least favorable
    prior weight in the two-point minimax problem."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    return (float(alpha), float(alpha / (1.0 - alpha)))
