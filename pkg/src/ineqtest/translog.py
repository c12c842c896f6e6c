"""Translog cost function curvature testing.

A three-input translog cost model with symmetry and linear homogeneity in
input prices imposed.  The hypothesis of interest is local concavity in
prices at the unit point (y, w) = (1, 1, 1, 1): the price Hessian of the
cost function must be negative semidefinite there.  Inference is by a
Dirichlet-weighted least-squares posterior over the ten free coefficients
of the normalized cost regression; the reported quantity is the posterior
probability that every signed principal minor of the implied Hessian is
on the concave side, within a small absolute slack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .distributions import dirichlet_flat_sample
from .mc_harness import McSummary, SeedPlan, mc_se

NSD_TOL = 1e-7


class RankDeficientError(ValueError):
    """Raised when a (weighted) design matrix loses full column rank."""


# ---------------------------------------------------------------------------
# parameterizations


@dataclass(frozen=True)
class FreeParams:
    """The ten estimable coefficients of the normalized cost regression.

    Column order of the design matrix follows the field order below:
    intercept, ln y, (1/2)(ln y)^2, ln y * z1, ln y * z2, z1, z2,
    (1/2)z1^2, z1*z2, (1/2)z2^2, where z_k = ln(w_k / w_3).
    """

    a0: float
    ay: float
    ayy: float
    ay1: float
    ay2: float
    b1: float
    b2: float
    b11: float
    b12: float
    b22: float

    def as_vector(self):
        return np.array([self.a0, self.ay, self.ayy, self.ay1, self.ay2,
                         self.b1, self.b2, self.b11, self.b12, self.b22])

    @classmethod
    def from_vector(cls, v):
        v = np.asarray(v, dtype=float)
        if v.shape != (10,):
            raise ValueError("need a length-10 coefficient vector")
        return cls(*map(float, v))


@dataclass(frozen=True)
class TranslogParams:
    """Full coefficient set with symmetry and homogeneity holding exactly.

    b is the vector of first-order price coefficients (sums to 1), B the
    symmetric matrix of second-order ones (every row sums to 0), ayk the
    output/price interactions (sum to 0).
    """

    a0: float
    ay: float
    ayy: float
    ayk: np.ndarray
    b: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        ayk = np.asarray(self.ayk, dtype=float)
        b = np.asarray(self.b, dtype=float)
        B = np.asarray(self.B, dtype=float)
        if ayk.shape != (3,) or b.shape != (3,) or B.shape != (3, 3):
            raise ValueError("ayk and b must be 3-vectors, B a 3x3 matrix")
        if not np.array_equal(B, B.T):
            raise ValueError("B must be exactly symmetric")
        for arr in (ayk, b, B):
            arr.setflags(write=False)
        object.__setattr__(self, "ayk", ayk)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "B", B)


def expand_params(free: FreeParams) -> TranslogParams:
    """Fills in the coefficients eliminated by symmetry and homogeneity.

    b3 = 1 - b1 - b2, ay3 = -ay1 - ay2, b13 = -(b11 + b12),
    b23 = -(b12 + b22), and b33 = -(b13 + b23) = b11 + 2 b12 + b22.
    Row sums of B cancel term against term, so they are exactly zero in
    floating point, not merely small.
    """
    b3 = 1.0 - free.b1 - free.b2
    ay3 = -(free.ay1 + free.ay2)
    b13 = -(free.b11 + free.b12)
    b23 = -(free.b12 + free.b22)
    b33 = -(b13 + b23)
    B = np.array([[free.b11, free.b12, b13],
                  [free.b12, free.b22, b23],
                  [b13, b23, b33]])
    return TranslogParams(a0=free.a0, ay=free.ay, ayy=free.ayy,
                          ayk=np.array([free.ay1, free.ay2, ay3]),
                          b=np.array([free.b1, free.b2, b3]), B=B)


def default_free_params(delta=0.001) -> FreeParams:
    """Symmetric benchmark coefficients with curvature slack ``delta``:
    the Hessian at the unit point is -delta * C on the diagonal of its
    core, so delta = 0 puts the model exactly on the concavity boundary.
    """
    return FreeParams(a0=1.0, ay=1.0, ayy=0.0, ay1=0.0, ay2=0.0,
                      b1=1.0 / 3.0, b2=1.0 / 3.0,
                      b11=2.0 / 9.0 - delta, b12=-1.0 / 9.0,
                      b22=2.0 / 9.0 - delta)


# ---------------------------------------------------------------------------
# cost function, shares, Hessian


def _check_point(y, w):
    w = np.asarray(w, dtype=float)
    if w.shape != (3,):
        raise ValueError("w must be a 3-vector")
    if not (y > 0) or not np.all(w > 0):
        raise ValueError("y and w must be strictly positive")
    return float(y), w


def log_cost(p: TranslogParams, y, w) -> float:
    """ln C(y, w) for the full translog specification."""
    y, w = _check_point(y, w)
    ly = math.log(y)
    lw = np.log(w)
    return float(p.a0 + p.ay * ly + 0.5 * p.ayy * ly * ly
                 + p.b @ lw + 0.5 * lw @ p.B @ lw + ly * (p.ayk @ lw))


def shares(p: TranslogParams, y, w):
    """Cost shares r_k = d ln C / d ln w_k = b_k + (B lw)_k + ay_k ln y."""
    y, w = _check_point(y, w)
    ly = math.log(y)
    lw = np.log(w)
    return p.b + p.B @ lw + p.ayk * ly


@dataclass(frozen=True)
class Hessian3:
    """Price Hessian of the cost function at one point, with the cost
    level it was scaled by."""

    matrix: np.ndarray
    cost_scale: float

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (3, 3):
            raise ValueError("need a 3x3 matrix")
        scale = max(1.0, float(np.max(np.abs(m))))
        if np.max(np.abs(m - m.T)) > 1e-10 * scale:
            raise ValueError("Hessian must be symmetric")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


def hessian(p: TranslogParams, y, w) -> Hessian3:
    """d2 C / dw dw': H_mk = C (b_mk + r_m r_k - 1{m=k} r_k) / (w_m w_k)."""
    y, w = _check_point(y, w)
    r = shares(p, y, w)
    cost = math.exp(log_cost(p, y, w))
    core = p.B + np.outer(r, r) - np.diag(r)
    return Hessian3(matrix=cost * core / np.outer(w, w), cost_scale=cost)


def is_nsd(h, tol=NSD_TOL) -> bool:
    """Negative semidefiniteness by the all-principal-minors criterion.

    True iff every principal minor of order p, signed by (-1)^p, is at
    least -tol.  All seven nonempty index subsets are checked; leading
    minors alone are not sufficient for semidefiniteness.
    """
    m = h.matrix if isinstance(h, Hessian3) else np.asarray(h, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("need a square matrix")
    d = m.shape[0]
    for order in range(1, d + 1):
        sign = (-1.0) ** order
        for idx in combinations(range(d), order):
            sub = m[np.ix_(idx, idx)]
            minor = sub[0, 0] if order == 1 else float(np.linalg.det(sub))
            if sign * minor < -tol:
                return False
    return True


def _nsd_flags_from_free(free_rows, tol=NSD_TOL):
    """Vectorized concavity check at the unit point for an (S, 10) array
    of free-coefficient rows; returns a boolean (S,) array.

    Same arithmetic as is_nsd(hessian(expand_params(...), 1, (1,1,1)))
    with explicit 2x2 and 3x3 determinant formulas.
    """
    free_rows = np.asarray(free_rows, dtype=float)
    b1, b2 = free_rows[:, 5], free_rows[:, 6]
    b11, b12, b22 = free_rows[:, 7], free_rows[:, 8], free_rows[:, 9]
    b13 = -(b11 + b12)
    b23 = -(b12 + b22)
    b33 = -(b13 + b23)
    b3 = 1.0 - b1 - b2
    cost = np.exp(free_rows[:, 0])

    # H = C * (B + r r' - diag(r)) at w = (1,1,1), where r = b
    h11 = cost * (b11 + b1 * b1 - b1)
    h22 = cost * (b22 + b2 * b2 - b2)
    h33 = cost * (b33 + b3 * b3 - b3)
    h12 = cost * (b12 + b1 * b2)
    h13 = cost * (b13 + b1 * b3)
    h23 = cost * (b23 + b2 * b3)

    ok = (h11 <= tol) & (h22 <= tol) & (h33 <= tol)
    ok &= h11 * h22 - h12 * h12 >= -tol
    ok &= h11 * h33 - h13 * h13 >= -tol
    ok &= h22 * h33 - h23 * h23 >= -tol
    det3 = (h11 * (h22 * h33 - h23 * h23)
            - h12 * (h12 * h33 - h23 * h13)
            + h13 * (h12 * h23 - h22 * h13))
    ok &= det3 <= tol
    return ok


# ---------------------------------------------------------------------------
# simulation DGP and estimation


@dataclass(frozen=True)
class TranslogDgp:
    """Sampling design for the curvature simulation.

    ln y and the three ln w_k are iid N(0, sigma_x^2), mutually
    independent; the response is the normalized regression evaluated at
    the benchmark coefficients (curvature slack ``delta``) plus
    N(0, sigma_eps^2) noise.
    """

    delta: float = 0.001
    sigma_x: float = 3.6
    sigma_eps: float = 0.5
    n: int = 100
    free: FreeParams = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need n >= 1")
        if self.sigma_x < 0 or self.sigma_eps < 0:
            raise ValueError("sds must be nonnegative")
        if self.free is None:
            object.__setattr__(self, "free", default_free_params(self.delta))


@dataclass(frozen=True)
class TranslogData:
    """One simulated sample: raw log regressors and the normalized
    log-cost response ln(C / w3)."""

    ln_y: np.ndarray
    ln_w: np.ndarray
    response: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.ln_y).size
        if np.asarray(self.ln_w).shape != (n, 3) or np.asarray(self.response).shape != (n,):
            raise ValueError("inconsistent sample shapes")

    @property
    def design(self):
        """The 10-column normalized design matrix for these draws."""
        ly = np.asarray(self.ln_y, dtype=float)
        lw = np.asarray(self.ln_w, dtype=float)
        z1 = lw[:, 0] - lw[:, 2]
        z2 = lw[:, 1] - lw[:, 2]
        one = np.ones_like(ly)
        return np.column_stack([one, ly, 0.5 * ly * ly, ly * z1, ly * z2,
                                z1, z2, 0.5 * z1 * z1, z1 * z2, 0.5 * z2 * z2])


def simulate_dataset(dgp: TranslogDgp, rng) -> TranslogData:
    ln_y = rng.normal(0.0, dgp.sigma_x, dgp.n)
    ln_w = rng.normal(0.0, dgp.sigma_x, (dgp.n, 3))
    data = TranslogData(ln_y=ln_y, ln_w=ln_w, response=np.zeros(dgp.n))
    response = data.design @ dgp.free.as_vector()
    if dgp.sigma_eps > 0:
        response = response + rng.normal(0.0, dgp.sigma_eps, dgp.n)
    return TranslogData(ln_y=ln_y, ln_w=ln_w, response=response)


def weighted_fit(data: TranslogData, weights) -> FreeParams:
    """Weighted least squares of the response on the design.

    Weights are normalized by their maximum, so uniform weights of any
    level reproduce ols_fit bit for bit.  Raises RankDeficientError when
    the weighted design drops rank.
    """
    w = np.asarray(weights, dtype=float)
    x = data.design
    if w.shape != (x.shape[0],) or np.any(w < 0) or not w.max() > 0:
        raise ValueError("weights must be nonnegative, not all zero")
    s = np.sqrt(w / w.max())
    coef, _, rank, _ = np.linalg.lstsq(s[:, None] * x, s * data.response, rcond=None)
    if rank < x.shape[1]:
        raise RankDeficientError(f"weighted design has rank {rank} < {x.shape[1]}")
    return FreeParams.from_vector(coef)


def ols_fit(data: TranslogData) -> FreeParams:
    return weighted_fit(data, np.ones(np.asarray(data.ln_y).size))


def monotone_at_unit(free: FreeParams) -> bool:
    """Local monotonicity of the fitted cost function at the unit point:
    all three implied shares (= b_k there) are nonnegative."""
    return free.b1 >= 0.0 and free.b2 >= 0.0 and (1.0 - free.b1 - free.b2) >= 0.0


# ---------------------------------------------------------------------------
# Bayesian bootstrap posterior and the type I error simulation

_MAX_REDRAWS = 10


def _posterior_free_rows(data: TranslogData, draws, rng):
    """(draws, 10) Dirichlet-weighted least-squares coefficient rows.

    Draws whose weighted normal equations are singular (possible in
    principle at extreme weights) are redrawn, at most _MAX_REDRAWS times
    each, then reported as an error.
    """
    x = data.design
    yv = data.response
    n = x.shape[0]

    def solve_rows(wmat):
        xtwx = np.einsum("si,ij,ik->sjk", wmat, x, x)
        xtwy = np.einsum("si,ij,i->sj", wmat, x, yv)
        return np.linalg.solve(xtwx, xtwy[..., None])[..., 0]

    wmat = dirichlet_flat_sample(n, rng, size=draws)
    try:
        rows = solve_rows(wmat)
        if np.all(np.isfinite(rows)):
            return rows
        bad = ~np.all(np.isfinite(rows), axis=1)
    except np.linalg.LinAlgError:
        rows = np.empty((draws, 10))
        bad = np.ones(draws, dtype=bool)
        for i in range(draws):
            try:
                rows[i] = solve_rows(wmat[i:i + 1])[0]
                bad[i] = not np.all(np.isfinite(rows[i]))
            except np.linalg.LinAlgError:
                bad[i] = True
    for i in np.where(bad)[0]:
        for attempt in range(_MAX_REDRAWS):
            wi = dirichlet_flat_sample(n, rng, size=1)
            try:
                cand = solve_rows(wi)[0]
            except np.linalg.LinAlgError:
                continue
            if np.all(np.isfinite(cand)):
                rows[i] = cand
                break
        else:
            raise RankDeficientError(
                f"posterior draw {i} rank-deficient after {_MAX_REDRAWS} redraws")
    return rows


def posterior_prob_nsd(data: TranslogData, draws=200, rng=None) -> McSummary:
    """Posterior probability that the unit-point Hessian is NSD, under
    the flat Dirichlet weighting posterior for the coefficients."""
    if draws < 1:
        raise ValueError("need draws >= 1")
    if rng is None:
        rng = SeedPlan(0).stream(0)
    rows = _posterior_free_rows(data, draws, rng)
    p = float(_nsd_flags_from_free(rows).mean())
    return McSummary(estimate=p, mc_se=mc_se(p, draws), reps=draws, master_seed=None)


@dataclass(frozen=True)
class Type1Result:
    """Rejection-rate summary plus the share of replications whose point
    estimate was locally monotone at the unit point."""

    rejection: McSummary
    monotonicity_rate: float


def type1_error_sim(dgp: TranslogDgp, alpha, reps=500, draws=200,
                    master_seed=0, workers=1) -> Type1Result:
    """Simulated type I error of the curvature test: the fraction of
    samples whose posterior NSD probability falls at or below alpha."""
    if reps < 1:
        raise ValueError("need reps >= 1")
    plan = master_seed if isinstance(master_seed, SeedPlan) else SeedPlan(int(master_seed))
    reject = np.full(reps, -1, dtype=np.int64)
    mono = np.full(reps, -1, dtype=np.int64)

    def run_indices(indices):
        for i in indices:
            rng = plan.stream(i)
            data = simulate_dataset(dgp, rng)
            post = posterior_prob_nsd(data, draws=draws, rng=rng).estimate
            reject[i] = 1 if post <= alpha else 0
            mono[i] = 1 if monotone_at_unit(ols_fit(data)) else 0

    if workers <= 1:
        run_indices(range(reps))
    else:
        from concurrent.futures import ThreadPoolExecutor
        chunks = [range(k, reps, workers) for k in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for fut in [pool.submit(run_indices, c) for c in chunks]:
                fut.result()
    rate = float(reject.sum()) / reps
    summary = McSummary(estimate=rate, mc_se=mc_se(rate, reps), reps=reps,
                        master_seed=plan.master_seed)
    return Type1Result(rejection=summary, monotonicity_rate=float(mono.sum()) / reps)
