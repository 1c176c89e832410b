"""Single-hidden-layer side: lower bound on mean-square error and the
cosine random-feature construction that attains the matching upper bound.

The target function is the normalized Gaussian bump

    mu_c(x) = alpha^{n/4} exp(-||x||^2 / (2 s_f)),   alpha = (s_f + 2 s_x)/s_f,

scaled so E[mu_c^2] = 1 under x ~ N(0, s_x I).  For any single-hidden-layer
f(x) = sum_i a_i h_i(<w_i, x>) with unit-norm directions and unit node
second moments,

    E[(mu_c - f)^2] >= 1 - 2 sqrt(n1) ||a|| (1 + s_x/s_f)^{1/4} rho^{-n/4},

with rho = 1 + s_x^2 / (s_f^2 + 2 s_x s_f) > 1, so the width must grow
like rho^{n/4} unless the output coefficients blow up.  Conversely a
width-n1 layer of cos(<w, x>/sqrt(s_f)) nodes with i.i.d. standard normal
weights and uniform coefficients alpha^{n/4}/n1 achieves expected squared
error below alpha^{n/2}/n1.  The growth-rate constants are m1 = rho and
m2 = alpha^2 (1 < m1 < m2); where between them the transition happens is
not addressed here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .network import FeedforwardNet, IDENTITY, Layer, cosine_activation


@dataclass(frozen=True)
class ShallowProblem:
    """Approximation of the Gaussian bump by one hidden layer.

    n: input dimension; s_x: input variance (x ~ N(0, s_x I));
    s_f: bump variance; n1: hidden width; coeff_norm: ||a|| used when
    evaluating the lower bound.
    """

    n: int
    s_x: float
    s_f: float
    n1: int
    coeff_norm: float = 1.0

    def __post_init__(self):
        if self.n < 1 or self.n1 < 1:
            raise ValueError("n and n1 must be >= 1")
        if self.s_x <= 0 or self.s_f <= 0:
            raise ValueError("s_x and s_f must be positive")

    @property
    def alpha(self) -> float:
        return (self.s_f + 2.0 * self.s_x) / self.s_f

    @property
    def rho(self) -> float:
        return 1.0 + self.s_x**2 / (self.s_f**2 + 2.0 * self.s_x * self.s_f)


def mu_c_log(problem: ShallowProblem, x) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    sq = np.einsum("ij,ij->i", x, x)
    return 0.25 * problem.n * math.log(problem.alpha) - sq / (2.0 * problem.s_f)


def mu_c(problem: ShallowProblem, x) -> np.ndarray:
    """The normalized Gaussian bump, E[mu_c^2] = 1 under x ~ N(0, s_x I)."""
    return np.exp(mu_c_log(problem, x))


@dataclass(frozen=True)
class ShallowBoundReport:
    """Evaluated lower bound and growth-rate constants."""

    rho: float
    bound: float
    n1_min: float
    m1: float
    m2: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def eval_lower_bound(
    problem: ShallowProblem,
    *,
    coeff_norm: float | None = None,
    rms_coeff: float = 1.0,
    epsilon: float = 0.1,
) -> ShallowBoundReport:
    """Lower bound on E[(mu_c - f)^2] plus the minimal width for a target.

    ``n1_min`` rearranges the bound: reaching mean-square error epsilon
    requires n1 >= (1 - epsilon) rho^{n/4} / (2 A (1 + s_x/s_f)^{1/4})
    where A is the root-mean-square output coefficient.
    """
    norm_a = problem.coeff_norm if coeff_norm is None else coeff_norm
    rho = problem.rho
    prefactor = (1.0 + problem.s_x / problem.s_f) ** 0.25
    bound = 1.0 - 2.0 * math.sqrt(problem.n1) * norm_a * prefactor * rho ** (-problem.n / 4.0)
    n1_min = (1.0 - epsilon) * rho ** (problem.n / 4.0) / (2.0 * rms_coeff * prefactor)
    return ShallowBoundReport(
        rho=rho, bound=bound, n1_min=n1_min, m1=rho, m2=problem.alpha**2
    )


def build_cosine_snn(problem: ShallowProblem, seed: int) -> FeedforwardNet:
    """Random cosine-feature layer: w_i ~ N(0, I_n) rows (unnormalized, by
    design), zero biases, activation cos(. / sqrt(s_f)), all output
    coefficients alpha^{n/4} / n1."""
    rng = np.random.default_rng(seed)
    W = rng.standard_normal((problem.n1, problem.n))
    coeff = problem.alpha ** (problem.n / 4.0) / problem.n1
    layers = [
        Layer(W, np.zeros(problem.n1), cosine_activation(problem.s_f)),
        Layer(np.full((1, problem.n1), coeff), np.zeros(1), IDENTITY),
    ]
    meta = {
        "construction": "cosine-random-features",
        "n": problem.n,
        "s_x": problem.s_x,
        "s_f": problem.s_f,
        "seed": int(seed),
        "hidden_widths": [problem.n1],
    }
    return FeedforwardNet(problem.n, layers, meta)


def gaussian_sampler(n: int, s_x: float):
    """Closure (count, seed) -> draws from N(0, s_x I_n)."""
    scale = math.sqrt(s_x)

    def sampler(count, seed):
        rng = np.random.default_rng(seed)
        return scale * rng.standard_normal((count, n))

    return sampler


@dataclass(frozen=True)
class L2Report:
    """Monte Carlo estimate of E[(f-g)^2], E[g^2] and their ratio."""

    mean_sq_diff: float
    se_diff: float
    mean_sq_ref: float
    se_ref: float
    count: int

    @property
    def ratio(self) -> float:
        return self.mean_sq_diff / self.mean_sq_ref

    @property
    def ratio_se(self) -> float:
        # First-order error propagation on the quotient.
        return self.ratio * math.hypot(
            self.se_diff / self.mean_sq_diff if self.mean_sq_diff > 0 else 0.0,
            self.se_ref / self.mean_sq_ref,
        )

    def to_dict(self) -> dict:
        return {
            "mean_sq_diff": self.mean_sq_diff,
            "se_diff": self.se_diff,
            "mean_sq_ref": self.mean_sq_ref,
            "se_ref": self.se_ref,
            "ratio": self.ratio,
            "ratio_se": self.ratio_se,
            "count": self.count,
        }


def estimate_l2_error(f, g, sampler, count: int, seed: int) -> L2Report:
    """Monte Carlo E[(f-g)^2] and E[g^2] with standard errors.

    The ratio of the two is the mean-square accuracy of f relative to g.
    """
    if count < 100:
        raise ValueError("count must be >= 100")
    x = sampler(count, seed)
    fv = np.asarray(f(x), dtype=float).ravel()
    gv = np.asarray(g(x), dtype=float).ravel()
    diff_sq = (fv - gv) ** 2
    ref_sq = gv**2
    return L2Report(
        mean_sq_diff=float(np.mean(diff_sq)),
        se_diff=float(np.std(diff_sq, ddof=1) / math.sqrt(count)),
        mean_sq_ref=float(np.mean(ref_sq)),
        se_ref=float(np.std(ref_sq, ddof=1) / math.sqrt(count)),
        count=count,
    )


def renormalized_coeff_norm(net: FeedforwardNet, s_x: float, count: int, seed: int) -> float:
    """||a|| after rescaling the net to the lower bound's conventions.

    The bound assumes unit-norm weight rows and unit node second moments.
    Rescaling w to unit norm folds ||w|| into the node's scalar argument,
    and dividing each node by its root second moment under
    u ~ N(0, s_x) multiplies the matching coefficient by that moment;
    neither changes the network function.  Second moments are estimated
    by Monte Carlo on the scalar projection.
    """
    if len(net.layers) != 2:
        raise ValueError("expected a single-hidden-layer network")
    hidden, out = net.layers
    rng = np.random.default_rng(seed)
    u = math.sqrt(s_x) * rng.standard_normal(count)
    coeffs = out.weights[0].copy()
    for i in range(hidden.out_dim):
        w_norm = float(np.linalg.norm(hidden.weights[i]))
        node_vals = hidden.activation(w_norm * u + hidden.bias[i])
        root_m2 = math.sqrt(float(np.mean(node_vals**2)))
        coeffs[i] *= root_m2
    return float(np.linalg.norm(coeffs))


def verify_snn_bound(
    net: FeedforwardNet, problem: ShallowProblem, count: int, seed: int
) -> dict:
    """Compare a net's measured mean-square error against the lower bound.

    Returns the measured error with its standard error, the bound
    evaluated at the renormalized coefficient norm, and whether
    ``measured >= bound - 3 SE`` holds.
    """
    seeds = np.random.SeedSequence(seed).spawn(2)
    norm_a = renormalized_coeff_norm(net, problem.s_x, count, seeds[0])
    report = eval_lower_bound(problem, coeff_norm=norm_a)
    sampler = gaussian_sampler(problem.n, problem.s_x)
    l2 = estimate_l2_error(
        net.scalar_fn(), lambda x: mu_c(problem, x), sampler, count, seeds[1]
    )
    ok = l2.mean_sq_diff >= report.bound - 3.0 * l2.se_diff
    return {
        "coeff_norm": norm_a,
        "bound": report.bound,
        "measured": l2.mean_sq_diff,
        "measured_se": l2.se_diff,
        "consistent": bool(ok),
    }
