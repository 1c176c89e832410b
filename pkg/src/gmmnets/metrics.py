"""Monte Carlo verification of approximation and classification guarantees.

Every estimator takes explicit sample counts and seeds and reports
standard errors alongside point estimates; acceptance-level comparisons
always allow three standard errors of slack.  Verdicts about the
(delta, q) conditions are exact counts of violations, with a documented
1e-9 relative slack on the inequalities and a 1e-12 relative exclusion
band around the threshold so floating-point boundary flapping cannot
flip a verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import QOutOfRange
from .gmm import GmmSpec

REL_SLACK = 1e-9
BOUNDARY_BAND = 1e-12


@dataclass(frozen=True)
class ApproxReport:
    """Monte Carlo verdict on the relative/absolute accuracy conditions.

    Membership in the superlevel set S = {d >= t} is decided by the exact
    log-density; samples within the boundary band are excluded from both
    condition checks.  ``passed`` means zero violations of either
    condition; the measured probability of S is reported for the caller
    to compare against 1 - q.
    """

    delta: float
    q: float
    t: float
    count: int
    s_fraction: float
    s_fraction_se: float
    max_rel_error_on_s: float
    mean_rel_error_on_s: float
    max_abs_hat_off_s: float
    cond1_violations: int
    cond2_violations: int
    boundary_excluded: int
    passed: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @property
    def s_mass_ok(self) -> bool:
        """Measured P[S] >= 1 - q within three binomial standard errors."""
        return self.s_fraction >= 1.0 - self.q - 3.0 * self.s_fraction_se


def verify_dq(
    log_d_exact,
    d_hat,
    sampler,
    t: float,
    delta: float,
    count: int,
    seed: int,
    q: float = math.nan,
) -> ApproxReport:
    """Check the two accuracy conditions of a (delta, q)-approximation.

    Parameters
    ----------
    log_d_exact : callable (m, n) -> (m,) exact log discriminant
    d_hat : callable (m, n) -> (m,) approximate discriminant (linear space)
    sampler : callable (count, seed) -> (count, n) draws from p
    t : threshold defining the superlevel set (use the solved tail level)
    delta : relative accuracy target
    count, seed : Monte Carlo size and seed
    q : tail mass target, recorded in the report for context
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if count < 1000:
        raise ValueError("count must be >= 1000")
    x = sampler(count, seed)
    log_d = np.asarray(log_d_exact(x), dtype=float)
    hat = np.asarray(d_hat(x), dtype=float)
    log_t = math.log(t)

    member = log_d >= log_t
    boundary = np.abs(log_d - log_t) <= BOUNDARY_BAND
    check1 = member & ~boundary
    check2 = ~member & ~boundary

    d = np.exp(log_d)
    rel_err = np.abs(hat[check1] - d[check1]) / d[check1]
    cond1_violations = int(np.sum(rel_err > delta * (1.0 + REL_SLACK)))

    off = hat[check2]
    upper = (1.0 + delta) * t
    cond2_violations = int(np.sum((off > upper * (1.0 + REL_SLACK)) | (off < -REL_SLACK * t)))

    frac = float(np.mean(member))
    return ApproxReport(
        delta=delta,
        q=q,
        t=t,
        count=count,
        s_fraction=frac,
        s_fraction_se=math.sqrt(max(frac * (1.0 - frac), 0.0) / count),
        max_rel_error_on_s=float(np.max(rel_err)) if rel_err.size else 0.0,
        mean_rel_error_on_s=float(np.mean(rel_err)) if rel_err.size else 0.0,
        max_abs_hat_off_s=float(np.max(off)) if off.size else 0.0,
        cond1_violations=cond1_violations,
        cond2_violations=cond2_violations,
        boundary_excluded=int(np.sum(boundary)),
        passed=cond1_violations == 0 and cond2_violations == 0,
    )


def dq_to_l2_epsilon(delta: float, q: float) -> float:
    """Mean-square accuracy implied by a (delta, q)-approximation.

    epsilon = delta^2 + (1 + delta)^2 q / (1 - q).
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if not (0.0 <= q < 1.0):
        raise QOutOfRange(f"q must lie in [0, 1), got {q}")
    return delta * delta + (1.0 + delta) ** 2 * q / (1.0 - q)


def error_rate_bound(e_opt_inflated: float, q: float, tail_prob: float) -> float:
    """Upper bound on the class-1 error of a classifier built from
    (delta, q)-approximations:

        e21 <= e_opt[(1+delta)/(1-delta)] + q + P1[d1 < (1+delta) t2 / (1-delta)],

    clamped to [0, 1].  The caller supplies the three terms, typically
    from the estimators below.
    """
    for name, v in (("e_opt_inflated", e_opt_inflated), ("q", q), ("tail_prob", tail_prob)):
        if not (0.0 <= v <= 1.0):
            raise ValueError(f"{name} must lie in [0, 1], got {v}")
    return min(1.0, e_opt_inflated + q + tail_prob)


def estimate_fraction(values: np.ndarray):
    """Mean of a boolean array with its binomial standard error."""
    frac = float(np.mean(values))
    se = math.sqrt(max(frac * (1.0 - frac), 0.0) / values.size)
    return frac, se


def inflated_error_estimate(
    spec: GmmSpec, true_class: int, other_class: int, alpha: float, count: int, seed: int
):
    """Monte Carlo estimate of P_true[d_other > d_true / alpha] with exact densities."""
    x = spec.sample_class(true_class, count, seed)
    log_true = spec.discriminant(true_class).log_value(x)
    log_other = spec.discriminant(other_class).log_value(x)
    return estimate_fraction(log_other > log_true - math.log(alpha))


def sublevel_tail_estimate(log_d, sampler, threshold: float, count: int, seed: int):
    """Monte Carlo estimate of P[d(X) < threshold] under the sampler."""
    x = sampler(count, seed)
    log_vals = np.asarray(log_d(x), dtype=float)
    return estimate_fraction(log_vals < math.log(threshold))


@dataclass(frozen=True)
class EmpiricalErrorReport:
    """Confusion matrix from per-class sampling.

    ``confusion[i, j]`` counts class-i samples declared class j; rows sum
    to the per-class counts exactly.  ``rates`` and ``rate_ses`` are the
    row-normalized frequencies with binomial standard errors.
    """

    counts: tuple
    confusion: np.ndarray
    rates: np.ndarray
    rate_ses: np.ndarray

    def error_rate(self, true_class: int, declared_class: int) -> float:
        return float(self.rates[true_class, declared_class])

    def to_dict(self) -> dict:
        return {
            "counts": list(self.counts),
            "confusion": self.confusion.tolist(),
            "rates": self.rates.tolist(),
            "rate_ses": self.rate_ses.tolist(),
        }


def empirical_error(classifier, spec: GmmSpec, counts, seed: int) -> EmpiricalErrorReport:
    """Sample each class, classify, and tabulate the confusion matrix.

    ``classifier`` maps a batch (m, n) to integer labels; ``counts`` is a
    per-class sample count (>= 1000 each) or a single int for all classes.
    """
    c = spec.num_classes
    if isinstance(counts, int):
        counts = [counts] * c
    counts = [int(v) for v in counts]
    if len(counts) != c or any(v < 1000 for v in counts):
        raise ValueError("need a count >= 1000 for every class")
    seeds = np.random.SeedSequence(seed).spawn(c)
    confusion = np.zeros((c, c), dtype=np.int64)
    for i in range(c):
        child_seed = seeds[i]
        x = spec.sample_class(i, counts[i], child_seed)
        labels = np.asarray(classifier(x))
        confusion[i] = np.bincount(labels, minlength=c)
    rates = confusion / np.array(counts, dtype=float)[:, np.newaxis]
    ses = np.sqrt(np.maximum(rates * (1.0 - rates), 0.0) / np.array(counts, dtype=float)[:, np.newaxis])
    return EmpiricalErrorReport(
        counts=tuple(counts), confusion=confusion, rates=rates, rate_ses=ses
    )


def net_classifier(nets, block_size: int | None = None):
    """argmax classifier over a list of single-output networks."""

    def classify(x):
        scores = np.column_stack([net.eval(x, block_size=block_size)[:, 0] for net in nets])
        return np.argmax(scores, axis=1)

    return classify
