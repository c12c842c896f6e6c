"""First-order stochastic dominance (SD1) inference.

One sample against a reference CDF, or two samples against each other.
The Bayesian side puts a bootstrap posterior on the unknown CDFs and
reports the posterior probability that dominance holds everywhere on an
evaluation grid.  The frequentist side is a battery of p-values: one-sided
Kolmogorov-Smirnov for the null that dominance holds, and order-statistic /
minimum-t-statistic constructions for the null that it does not.

Conventions.  "X dominates" means F_X(t) <= F_Y(t) for all t (X puts more
mass on high values).  Step CDFs are evaluated right-continuously, and all
dominance checks run on the pooled sample points with right-continuous
evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .distributions import beta_cdf, dirichlet_flat_sample, std_normal_cdf
from .mc_harness import McSummary, SeedPlan, mc_se, run_replications

RUBIN = "rubin"
BANKS = "banks"


# ---------------------------------------------------------------------------
# CDF representations


@dataclass(frozen=True)
class StepCdf:
    """Right-continuous step CDF with mass ``weights`` at sorted ``points``."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if pts.ndim != 1 or pts.size == 0 or pts.shape != w.shape:
            raise ValueError("points and weights must be equal-length 1-d arrays")
        if np.any(np.diff(pts) < 0):
            raise ValueError("points must be sorted")
        if np.any(w < -1e-12) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be a probability vector")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        cum = np.concatenate([[0.0], np.cumsum(self.weights)])
        return cum[np.searchsorted(self.points, t, side="right")]


@dataclass(frozen=True)
class PiecewiseLinearCdf:
    """CDF linear between knots; 0 before the first knot, 1 after the last.

    Knot values may jump only implicitly through repeated knots, so the
    smoothed bootstrap draws below carry their endpoint atoms by placing
    knot values directly.
    """

    knots: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if k.shape != v.shape or k.ndim != 1 or k.size == 0:
            raise ValueError("knots and values must be equal-length 1-d arrays")
        if np.any(np.diff(k) < 0) or np.any(np.diff(v) < -1e-12):
            raise ValueError("knots and values must be nondecreasing")
        k.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "knots", k)
        object.__setattr__(self, "values", v)

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        return np.interp(t, self.knots, self.values, left=0.0, right=1.0)


@dataclass(frozen=True)
class ReferenceCdf:
    """Known reference distribution, wrapped as an evaluable CDF."""

    fn: object
    name: str = "reference"

    def evaluate(self, t):
        return np.asarray(self.fn(np.asarray(t, dtype=float)), dtype=float)


UNIFORM01 = ReferenceCdf(fn=lambda t: np.clip(t, 0.0, 1.0), name="uniform01")


@dataclass(frozen=True)
class SdConfig:
    """Knobs for the Bayesian dominance posterior.

    draws: posterior draw count per evaluation.
    bootstrap: "rubin" (weighted step CDF) or "banks" (weights spread
        linearly between order statistics, endpoint atoms at the sample
        min and max, no tail extrapolation).
    grid: evaluation rule; "pooled" uses the union of sample points.
    tol: dominance slack added to the opposing CDF (default 0).
    dd_boot: bootstrap replicates for the two-sample min-t p-value.
    """

    draws: int = 2000
    bootstrap: str = BANKS
    grid: str = "pooled"
    tol: float = 0.0
    dd_boot: int = 999

    def __post_init__(self):
        if self.draws < 1:
            raise ValueError("draws must be >= 1")
        if self.bootstrap not in (RUBIN, BANKS):
            raise ValueError(f"unknown bootstrap variant {self.bootstrap!r}")
        if self.grid != "pooled":
            raise ValueError(f"unknown grid rule {self.grid!r}")


# ---------------------------------------------------------------------------
# plain empirical CDFs and the fixed design


def ecdf(sample) -> StepCdf:
    """Empirical CDF: jumps of 1/n at the order statistics."""
    s = np.sort(np.asarray(sample, dtype=float))
    if s.size == 0:
        raise ValueError("empty sample")
    return StepCdf(points=s, weights=np.full(s.size, 1.0 / s.size))


def fixed_design_sample(n, h):
    """Deterministic near-uniform samples: x_i = i/(n+1) + h/sqrt(n) for
    i = 1..n, y_i = i/n for i = 1..n-1.

    At h = 0 the x sample sits strictly inside (0, 1) and is dominated by
    the y sample and by the uniform reference; h > 0 shifts x upward at
    the local-alternative rate.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    i = np.arange(1, n + 1, dtype=float)
    x = i / (n + 1) + h / math.sqrt(n)
    y = np.arange(1, n, dtype=float) / n
    return x, y


# ---------------------------------------------------------------------------
# bootstrap posterior draws for a CDF


def _banks_rows(sorted_sample, gap_weights, grid):
    """Evaluates the smoothed bootstrap CDF rows at ``grid``.

    gap_weights has n+1 columns: an atom at the sample min, one weight per
    inter-order-statistic gap (mass linear in t across the gap), and an
    atom at the sample max.  Returns an (S, len(grid)) array.
    """
    xs = sorted_sample
    n = xs.size
    grid = np.asarray(grid, dtype=float)
    if n == 1:
        return (grid >= xs[0]).astype(float)[None, :] * np.ones((gap_weights.shape[0], 1))
    cum = np.cumsum(gap_weights, axis=1)
    seg = np.searchsorted(xs, grid, side="right")
    out = np.empty((gap_weights.shape[0], grid.size))
    out[:, seg == 0] = 0.0
    out[:, seg >= n] = 1.0
    interior = np.where((seg > 0) & (seg < n))[0]
    if interior.size:
        k = seg[interior]
        width = xs[k] - xs[k - 1]
        frac = np.where(width > 0, (grid[interior] - xs[k - 1]) / np.where(width > 0, width, 1.0), 1.0)
        out[:, interior] = cum[:, k - 1] + frac[None, :] * gap_weights[:, k]
    return out


def _rubin_rows(sorted_sample, point_weights, grid):
    """Evaluates weighted step CDF rows at ``grid``; (S, len(grid))."""
    cum = np.cumsum(point_weights, axis=1)
    idx = np.searchsorted(sorted_sample, np.asarray(grid, dtype=float), side="right")
    out = np.zeros((point_weights.shape[0], len(grid)))
    pos = idx > 0
    out[:, pos] = cum[:, idx[pos] - 1]
    return out


def _posterior_rows(sample, variant, rng, draws, grid):
    xs = np.sort(np.asarray(sample, dtype=float))
    if variant == RUBIN:
        w = dirichlet_flat_sample(xs.size, rng, size=draws)
        return _rubin_rows(xs, w, grid)
    w = dirichlet_flat_sample(xs.size + 1, rng, size=draws)
    return _banks_rows(xs, w, grid)


# cap on draws * grid floats materialized at once when counting dominance
# events; keeps large-draw posteriors at tens of MB
_BLOCK_ELEMS = 4_000_000


def _dominated_count(x, opp_sample, variant, draws, tol, rng):
    """Number of posterior draws with F_X <= bound + tol on the pooled
    grid, evaluated in fixed-size draw blocks.

    Against a fixed opponent CDF, blocking leaves the result identical to
    one pass: X weight rows come row-major off a single stream.  Against a
    sample opponent the X and Y draws interleave per block, so the block
    size (a module constant) is part of the sampling scheme; results stay
    reproducible for a given stream either way.
    """
    x = np.asarray(x, dtype=float)
    if isinstance(opp_sample, (StepCdf, PiecewiseLinearCdf, ReferenceCdf)):
        grid = np.sort(x)
        fixed_bound = np.asarray(opp_sample.evaluate(grid), dtype=float)[None, :]
        opp = None
    else:
        opp = np.asarray(opp_sample, dtype=float)
        grid = np.sort(np.concatenate([x, opp]))
        fixed_bound = None
    block = max(1, _BLOCK_ELEMS // max(1, grid.size))
    count = 0
    done = 0
    while done < draws:
        take = min(block, draws - done)
        fx_rows = _posterior_rows(x, variant, rng, take, grid)
        bound = fixed_bound if opp is None else _posterior_rows(opp, variant, rng, take, grid)
        count += int(np.sum(np.all(fx_rows <= bound + tol, axis=1)))
        done += take
    return count


def bb_draw(sample, variant, rng):
    """One bootstrap posterior draw of the sample's CDF.

    rubin: Dirichlet(1,..,1) weights on the observed points (step CDF).
    banks: Dirichlet(1,..,1) weights over the n+1 cells delimited by the
    order statistics, spread linearly within each gap; the first and last
    cells sit as atoms at the sample min and max, so there is no mass
    outside the observed range.
    """
    xs = np.sort(np.asarray(sample, dtype=float))
    if xs.size == 0:
        raise ValueError("empty sample")
    if variant == RUBIN:
        return StepCdf(points=xs, weights=dirichlet_flat_sample(xs.size, rng))
    if variant != BANKS:
        raise ValueError(f"unknown bootstrap variant {variant!r}")
    if xs.size == 1:
        return StepCdf(points=xs, weights=np.array([1.0]))
    w = dirichlet_flat_sample(xs.size + 1, rng)
    # knot values: F(min) = atom w0, interior knots accumulate the gap
    # weights up to 1 minus the top atom just below the max; a repeated
    # max knot carries the top atom's jump to 1 (np.interp evaluates the
    # last duplicate, keeping the CDF right-continuous there)
    knots = np.append(xs, xs[-1])
    values = np.concatenate([[w[0]], w[0] + np.cumsum(w[1:-1]), [1.0]])
    return PiecewiseLinearCdf(knots=knots, values=values)


# ---------------------------------------------------------------------------
# Bayesian dominance posterior


def _as_opponent(opponent):
    if isinstance(opponent, ReferenceCdf):
        return "reference", opponent
    if isinstance(opponent, (StepCdf, PiecewiseLinearCdf)):
        return "reference", opponent
    if callable(opponent):
        return "reference", ReferenceCdf(fn=opponent)
    return "sample", np.asarray(opponent, dtype=float)


def posterior_prob_sd1(x_sample, opponent, cfg: SdConfig = SdConfig(), rng=None) -> McSummary:
    """Posterior probability that X's CDF dominates the opponent.

    The event checked per posterior draw is F_X(t) <= opponent(t) + tol at
    every t in the evaluation grid (union of sample points, right-continuous
    values).  Against a raw opponent sample, both CDFs get independent
    posterior draws per iteration.
    """
    if rng is None:
        rng = SeedPlan(0).stream(0)
    x = np.asarray(x_sample, dtype=float)
    kind, opp = _as_opponent(opponent)
    opp_sample = opp if kind == "reference" else np.asarray(opp, dtype=float)
    count = _dominated_count(x, opp_sample, cfg.bootstrap, cfg.draws, cfg.tol, rng)
    p = count / cfg.draws
    return McSummary(estimate=p, mc_se=mc_se(p, cfg.draws), reps=cfg.draws, master_seed=None)


# ---------------------------------------------------------------------------
# frequentist p-values


def ks_pvalue_sd1(x_sample, opponent) -> float:
    """One-sided Kolmogorov-Smirnov p-value for the null that X dominates.

    Large upward excursions of F_X-hat above the opponent are evidence
    against dominance.  Uses the asymptotic exponential tail formula:
    one-sample exp(-2 n D+^2), two-sample exp(-2 D+^2 nm/(n+m)).
    """
    x = np.sort(np.asarray(x_sample, dtype=float))
    n = x.size
    kind, opp = _as_opponent(opponent)
    if kind == "reference":
        fx = np.arange(1, n + 1) / n
        d_plus = float(np.max(fx - np.asarray(opp.evaluate(x), dtype=float)))
        scale = n
    else:
        y = np.sort(opp)
        m = y.size
        grid = np.concatenate([x, y])
        fx = np.searchsorted(x, grid, side="right") / n
        fy = np.searchsorted(y, grid, side="right") / m
        d_plus = float(np.max(fx - fy))
        scale = n * m / (n + m)
    d_plus = max(d_plus, 0.0)
    return float(min(1.0, math.exp(-2.0 * scale * d_plus * d_plus)))


def iu_beta_pvalue_nonsd1(x_sample, f0=UNIFORM01) -> float:
    """Order-statistic p-value for the null that X does NOT dominate f0.

    Under sampling from f0 itself, f0(X_(k)) ~ Beta(k, n+1-k); values far
    in that distribution's upper tail at every k are evidence that X sits
    above f0 everywhere.  Each k contributes the upper-tail p-value
    1 - I_{f0(x_(k))}(k, n+1-k), and the overall p-value is the largest
    component (reject only if every pointwise test rejects).
    """
    x = np.sort(np.asarray(x_sample, dtype=float))
    n = x.size
    _, opp = _as_opponent(f0)
    u = np.clip(np.asarray(opp.evaluate(x), dtype=float), 0.0, 1.0)
    k = np.arange(1, n + 1, dtype=float)
    comp = 1.0 - beta_cdf(u, k, n + 1.0 - k)
    return float(np.max(comp))


def _interior_min_t(x_sorted, y_sorted):
    """Minimum dominance t-statistic over pooled points with both empirical
    CDFs strictly inside (0, 1); returns (t_min, argmin point) or
    (nan, nan) when no such point exists."""
    n, m = x_sorted.size, y_sorted.size
    grid = np.concatenate([x_sorted, y_sorted])
    grid.sort(kind="mergesort")
    fx = np.searchsorted(x_sorted, grid, side="right") / n
    fy = np.searchsorted(y_sorted, grid, side="right") / m
    keep = (fx > 0.0) & (fx < 1.0) & (fy > 0.0) & (fy < 1.0)
    if not keep.any():
        return float("nan"), float("nan")
    se = np.sqrt(fx * (1.0 - fx) / n + fy * (1.0 - fy) / m)
    t = np.where(keep & (se > 0), (fy - fx) / np.where(se > 0, se, 1.0), np.inf)
    j = int(np.argmin(t))
    return float(t[j]), float(grid[j])


def iu_maxt_pvalue_nonsd1(x_sample, y_sample) -> float:
    """Asymptotic max-p / min-t p-value for the null that X does not
    dominate Y: p = max over grid points of 1 - Phi(t), equivalently
    1 - Phi(min t)."""
    x = np.sort(np.asarray(x_sample, dtype=float))
    y = np.sort(np.asarray(y_sample, dtype=float))
    t_min, _ = _interior_min_t(x, y)
    if not np.isfinite(t_min):
        return 1.0
    return float(1.0 - std_normal_cdf(t_min))


def _bootstrap_min_t_rows(x_sorted, y_sorted, wx, wy, n_boot, rng):
    """Min-t statistics for n_boot resamples drawn from reweighted samples.

    The resampled empirical CDFs only change value at original sample
    points, so evaluating every bootstrap min-t on the original pooled
    grid is exact; per-row point counts come from one global bincount.
    """
    n, m = x_sorted.size, y_sorted.size
    grid = np.concatenate([x_sorted, y_sorted])
    order = np.argsort(grid, kind="mergesort")
    grid = grid[order]
    big = grid.size
    # ties in the pooled grid are fine: counts land on the first slot of a
    # tie run and the cumulative sums below restore the correct CDF values
    cx = np.cumsum(wx)
    cy = np.cumsum(wy)
    ux = rng.random((n_boot, n))
    uy = rng.random((n_boot, m))
    ix = np.searchsorted(cx, ux)   # indices into x_sorted
    iy = np.searchsorted(cy, uy)
    sx = np.searchsorted(grid, x_sorted[ix], side="left")
    sy = np.searchsorted(grid, y_sorted[iy], side="left")
    rows = np.arange(n_boot)[:, None]
    countx = np.bincount((sx + rows * big).ravel(), minlength=n_boot * big).reshape(n_boot, big)
    county = np.bincount((sy + rows * big).ravel(), minlength=n_boot * big).reshape(n_boot, big)
    fx = np.cumsum(countx, axis=1) / n
    fy = np.cumsum(county, axis=1) / m
    keep = (fx > 0.0) & (fx < 1.0) & (fy > 0.0) & (fy < 1.0)
    se = np.sqrt(fx * (1.0 - fx) / n + fy * (1.0 - fy) / m)
    t = np.where(keep & (se > 0), (fy - fx) / np.where(se > 0, se, 1.0), np.inf)
    return t.min(axis=1)


def dd_pvalue_nonsd1(x_sample, y_sample, n_boot=999, rng=None) -> float:
    """Bootstrap min-t p-value for the null that X does not dominate Y.

    The observed statistic is the minimum dominance t-statistic over the
    interior pooled grid.  When it is not positive (or no interior point
    exists) there is no dominance evidence and p = 1.  Otherwise both
    samples are reweighted to satisfy the least-favorable one-point null
    F_X = F_Y at the argmin: the common value is estimated by pooling,
    each sample's mass below/above the argmin is rescaled to match, and
    resamples from the weighted samples yield the reference distribution
    for the statistic.  p = (1 + #{t* >= t_obs}) / (n_boot + 1).
    """
    if rng is None:
        rng = SeedPlan(0).stream(0)
    x = np.sort(np.asarray(x_sample, dtype=float))
    y = np.sort(np.asarray(y_sample, dtype=float))
    n, m = x.size, y.size
    if n == 0 or m == 0:
        raise ValueError("empty sample")
    t_obs, z_hat = _interior_min_t(x, y)
    if not np.isfinite(t_obs) or t_obs <= 0.0:
        return 1.0
    kx = int(np.searchsorted(x, z_hat, side="right"))
    ky = int(np.searchsorted(y, z_hat, side="right"))
    q = (kx + ky) / (n + m)
    wx = np.empty(n)
    wy = np.empty(m)
    # degenerate splits cannot occur: the argmin has both ECDFs in (0, 1)
    wx[:kx] = q / kx
    wx[kx:] = (1.0 - q) / (n - kx)
    wy[:ky] = q / ky
    wy[ky:] = (1.0 - q) / (m - ky)
    t_star = _bootstrap_min_t_rows(x, y, wx, wy, n_boot, rng)
    return float((1.0 + np.sum(t_star >= t_obs)) / (n_boot + 1.0))


# ---------------------------------------------------------------------------
# simulated rejection probabilities (uniform shift DGP)


def _draw_shifted_uniform(n, h, rng):
    shift = h / math.sqrt(n)
    return rng.uniform(shift, 1.0 + shift, n)


def sd_rejection_probability(h, n, two_sample, null, method, alpha, reps,
                             cfg: SdConfig = SdConfig(), master_seed=0,
                             workers=1, adaptive_draws=None) -> McSummary:
    """Simulated rejection rate for dominance tests under a uniform shift.

    Per replication, X ~ Unif(h/sqrt(n), 1 + h/sqrt(n)) with n points; the
    opponent is the exact Unif(0, 1) reference (one-sample) or an
    independent Unif(0, 1) sample of the same size (two-sample).

    null="sd1" tests the null that X dominates; null="non_sd1" tests the
    null that it does not.  method is "ks", "iu_beta", "dd", "iu_maxt", or
    "bayes"; the Bayesian test rejects when the posterior probability of
    the null is <= alpha (for null="non_sd1" that probability is one minus
    the dominance posterior, computed from the same draws).

    adaptive_draws, when set to (initial, extra, margin), runs the Bayesian
    posterior with ``initial`` draws first and tops up with ``extra`` more
    (pooling both batches) only when the first-stage estimate of the null
    probability lands within ``margin`` of alpha, where extra precision can
    still change the decision.
    """
    if null not in ("sd1", "non_sd1"):
        raise ValueError("null must be 'sd1' or 'non_sd1'")
    valid = {"ks", "iu_beta", "dd", "iu_maxt", "bayes"}
    if method not in valid:
        raise ValueError(f"method must be one of {sorted(valid)}")
    if method == "iu_beta" and two_sample:
        raise ValueError("iu_beta is a one-sample test")
    if method in ("dd", "iu_maxt") and not two_sample:
        raise ValueError(f"{method} is a two-sample test")

    def one_rep(_, rng):
        x = _draw_shifted_uniform(n, h, rng)
        y = rng.uniform(0.0, 1.0, n) if two_sample else None
        if method == "bayes":
            opponent = y if two_sample else UNIFORM01
            if adaptive_draws is None:
                post_sd1 = posterior_prob_sd1(x, opponent, cfg=cfg, rng=rng).estimate
            else:
                first, extra, margin = adaptive_draws
                p1 = posterior_prob_sd1(x, opponent, cfg=replace(cfg, draws=first),
                                        rng=rng).estimate
                null_p1 = p1 if null == "sd1" else 1.0 - p1
                if abs(null_p1 - alpha) <= margin:
                    p2 = posterior_prob_sd1(x, opponent, cfg=replace(cfg, draws=extra),
                                            rng=rng).estimate
                    post_sd1 = (first * p1 + extra * p2) / (first + extra)
                else:
                    post_sd1 = p1
            post_null = post_sd1 if null == "sd1" else 1.0 - post_sd1
            return post_null <= alpha
        if method == "ks":
            p = ks_pvalue_sd1(x, y if two_sample else UNIFORM01)
        elif method == "iu_beta":
            p = iu_beta_pvalue_nonsd1(x, UNIFORM01)
        elif method == "dd":
            p = dd_pvalue_nonsd1(x, y, n_boot=cfg.dd_boot, rng=rng)
        else:
            p = iu_maxt_pvalue_nonsd1(x, y)
        return p <= alpha

    plan = master_seed if isinstance(master_seed, SeedPlan) else SeedPlan(int(master_seed))
    report = run_replications(one_rep, reps, plan, workers=workers)
    return report.summary
