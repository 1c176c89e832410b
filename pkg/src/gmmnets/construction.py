"""Explicit two-hidden-layer approximators for mixture discriminants.

The accuracy pipeline, per class with J components and targets
(delta, q):

  t*     tail level with P[p(X) < t*/rho] <= q under the class-conditional
         mixture p = d / rho, solved in closed form from a chi-squared
         Chernoff bound (``solve_tstar``);
  lam    = t* delta / (2 J (1 + delta)), the per-component level;
  per component j (after normalizing by beta_j = rho w_j gamma_j):
    lam~ = lam / beta_j          trivial component when lam~ >= 1
    R    = sqrt(log(1 / lam~))   relative-accuracy radius in whitened space
    nu   = log(1 + delta/4) / n  squaring-supernode accuracy
    a    = max(2R/r, 8 M R^3 / (3 nu sigma''(tau)), 4 M R / (3 sigma''(tau)))
    T    = 4 R^2                 staircase range
    step <= min(log(1 + delta/80), 1/2), K = ceil(T / step_max),
         then step = T / K so the steps tile [0, T] exactly.

The first hidden layer realizes x^2 on each whitened coordinate with a
two-node supernode

    h(x, a) = a^2 / sigma''(tau) * (sigma(x/a + tau) + sigma(-x/a + tau)
                                    - 2 sigma(tau)),

the second realizes exp(-x) on [0, T] with the staircase

    psi(x) = 1 + sum_{k=1..K} (e^{-k step} - e^{-(k-1) step})
                              sigma(x/step - k),

and the output layer sums beta_j psi_j(g_hat_j(x)).  A reference mode
with exact square / exp(-x) activations reproduces the discriminant to
floating-point accuracy and serves as an oracle, and a ReLU variant
replaces each squaring supernode with a clipped piecewise-linear
interpolant and the staircase activation with a unit-width ramp.

Grid-based sup-norm checks here use densely spaced points over the
stated interval; they are a verification surrogate for the mathematical
supremum, not a proof.
"""

from __future__ import annotations

import hashlib
import json
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import AssumptionNotVerified, DeltaOutOfRange, QOutOfRange
from .gmm import GmmSpec, parse_gmm_spec
from .network import (
    IDENTITY,
    NEGEXP,
    SIGMOID,
    SQUARE,
    Activation,
    ActivationProfile,
    FeedforwardNet,
    Layer,
    check_assumptions,
    count_nodes,
)

SQRT_HALF = math.sqrt(0.5)


# ----------------------------------------------------------------------
# Tail level
# ----------------------------------------------------------------------

def log_solve_tstar(n: int, V: float, q: float, J: int = 1) -> float:
    """log t* for a mixture density: P[p(X) < t*] <= q.

    Derived from the Chernoff bound on the chi-squared tail of the
    heaviest mixture component (whose weight is at least 1/J):

        P[p(X) < t] <= sqrt(J t) * exp((n/4) log(8 pi V)),

    so taking log(1/t*) = (n/2) log(8 pi V) + 2 log(1/q) + log J makes
    the right-hand side exactly q.  Any smaller t* is also valid.  V
    upper-bounds every per-coordinate component variance (the largest
    covariance eigenvalue suffices).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if V <= 0:
        raise ValueError("V must be positive")
    if not (0.0 < q < 1.0):
        raise QOutOfRange(f"q must lie in (0, 1), got {q}")
    if J < 1:
        raise ValueError("J must be >= 1")
    return -(0.5 * n * math.log(8.0 * math.pi * V) + 2.0 * math.log(1.0 / q) + math.log(J))


def solve_tstar(n: int, V: float, q: float, J: int = 1) -> float:
    return math.exp(log_solve_tstar(n, V, q, J))


def plan_staircase(T: float, epsilon: float):
    """Pick (K, step) so step <= min(log(1 + epsilon/40), 1/2) tiles [0, T]."""
    if T <= 0 or epsilon <= 0:
        raise ValueError("T and epsilon must be positive")
    step_max = min(math.log1p(epsilon / 40.0), 0.5)
    K = max(1, math.ceil(T / step_max))
    return K, T / K


# ----------------------------------------------------------------------
# Solved parameters
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class ComponentPlan:
    """Per-component constants of the two-layer construction.

    A component is trivial when its level exceeds its peak
    (lam~ = lam / beta >= 1); the zero function is then an acceptable
    approximation and the component contributes no nodes.
    """

    index: int
    log_beta: float
    trivial: bool
    log_lam_tilde: float
    R: float | None = None
    nu: float | None = None
    a: float | None = None
    T: float | None = None
    K: int | None = None
    step: float | None = None

    @property
    def beta(self) -> float:
        return math.exp(self.log_beta)

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "log_beta": self.log_beta,
            "trivial": self.trivial,
            "log_lam_tilde": self.log_lam_tilde,
            "R": self.R,
            "nu": self.nu,
            "a": self.a,
            "T": self.T,
            "K": self.K,
            "step": self.step,
        }


@dataclass(frozen=True)
class ConstructionParams:
    """Everything needed to assemble a class approximator network."""

    class_index: int
    n: int
    delta: float
    q: float
    J: int
    V: float
    log_tstar: float
    lam: float
    log_lam: float
    plans: tuple
    profile: ActivationProfile

    @property
    def tstar(self) -> float:
        return math.exp(self.log_tstar)

    @property
    def nontrivial(self):
        return [plan for plan in self.plans if not plan.trivial]

    def to_dict(self) -> dict:
        prof = self.profile
        return {
            "class_index": self.class_index,
            "n": self.n,
            "delta": self.delta,
            "q": self.q,
            "J": self.J,
            "V": self.V,
            "log_tstar": self.log_tstar,
            "tstar": self.tstar,
            "lam": self.lam,
            "log_lam": self.log_lam,
            "components": [plan.to_dict() for plan in self.plans],
            "activation": {
                "kind": prof.activation.kind,
                "tau": prof.tau,
                "r": prof.r,
                "sigma2_tau": prof.sigma2_tau,
                "third_max": prof.third_max,
                "decay_scale": None if not prof.decay_ok else prof.decay_scale,
            },
        }

    def digest(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()


@lru_cache(maxsize=None)
def default_sigmoid_profile() -> ActivationProfile:
    """Sigmoid constants at tau = -1, r = 0.5 (any tau < 0 gives positive curvature)."""
    return check_assumptions(SIGMOID, tau=-1.0, r=0.5)


def solve_params(
    spec: GmmSpec,
    class_index: int,
    delta: float,
    q: float,
    profile: ActivationProfile | None = None,
) -> ConstructionParams:
    """Solve the full accuracy pipeline for one class."""
    if not (0.0 < delta < 2.0):
        raise DeltaOutOfRange(f"delta must lie in (0, 2), got {delta}")
    if delta > 1.9:
        warnings.warn(
            f"delta = {delta} is close to 2; construction constants blow up", stacklevel=2
        )
    if not (0.0 < q < 1.0):
        raise QOutOfRange(f"q must lie in (0, 1), got {q}")
    if profile is None:
        profile = default_sigmoid_profile()
    if not (profile.curvature_ok and profile.monotonic_ok):
        raise AssumptionNotVerified("; ".join(profile.failures))

    cls = spec.classes[class_index]
    J = cls.size
    V = cls.variance_bound
    n = spec.n
    log_tstar = math.log(cls.prior) + log_solve_tstar(n, V, q, J)
    log_lam = log_tstar + math.log(delta / (2.0 * J * (1.0 + delta)))
    nu = math.log1p(delta / 4.0) / n

    plans = []
    for j, log_beta in enumerate(cls.log_betas):
        log_lam_tilde = log_lam - log_beta
        if log_lam_tilde >= 0.0:
            plans.append(
                ComponentPlan(
                    index=j, log_beta=float(log_beta), trivial=True,
                    log_lam_tilde=float(log_lam_tilde),
                )
            )
            continue
        R = math.sqrt(-log_lam_tilde)
        a = max(
            2.0 * R / profile.r,
            8.0 * profile.third_max * R**3 / (3.0 * nu * profile.sigma2_tau),
            4.0 * profile.third_max * R / (3.0 * profile.sigma2_tau),
        )
        T = 4.0 * R * R
        K, step = plan_staircase(T, delta / 2.0)
        plans.append(
            ComponentPlan(
                index=j, log_beta=float(log_beta), trivial=False,
                log_lam_tilde=float(log_lam_tilde),
                R=R, nu=nu, a=a, T=T, K=K, step=step,
            )
        )
    return ConstructionParams(
        class_index=class_index, n=n, delta=delta, q=q, J=J, V=V,
        log_tstar=log_tstar, lam=math.exp(log_lam), log_lam=log_lam,
        plans=tuple(plans), profile=profile,
    )


# ----------------------------------------------------------------------
# Supernode fragments
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class SquareSupernode:
    """Two basic nodes realizing h(x, a) ~= x^2.

    The node pre-activations are +-x/a + tau; both carry output
    coefficient a^2/sigma''(tau) and the constant -2 sigma(tau) times
    that coefficient is absorbed into the consuming layer's bias.
    """

    a: float
    tau: float
    sigma2_tau: float
    activation: Activation

    @property
    def out_coeff(self) -> float:
        return self.a * self.a / self.sigma2_tau

    @property
    def out_const(self) -> float:
        return -2.0 * float(self.activation(self.tau)) * self.out_coeff

    def value(self, x):
        x = np.asarray(x, dtype=float)
        s = self.activation(x / self.a + self.tau) + self.activation(-x / self.a + self.tau)
        return self.out_coeff * s + self.out_const


def build_supernode_square(a: float, profile: ActivationProfile) -> SquareSupernode:
    if a <= 0:
        raise ValueError("a must be positive")
    if not (profile.curvature_ok and profile.monotonic_ok):
        raise AssumptionNotVerified("; ".join(profile.failures))
    return SquareSupernode(
        a=a, tau=profile.tau, sigma2_tau=profile.sigma2_tau, activation=profile.activation
    )


def staircase_coeffs(K: int, step: float) -> np.ndarray:
    """Output coefficients e^{-k step} - e^{-(k-1) step}, computed without cancellation."""
    k = np.arange(1, K + 1, dtype=float)
    return -np.expm1(step) * np.exp(-k * step)


@dataclass(frozen=True)
class StaircaseSupernode:
    """K basic nodes realizing psi(x) ~= exp(-x) on [0, T].

    Node k sees x/step - k; the leading constant 1 is absorbed
    downstream.  ``activation`` already carries any decay rescaling.
    """

    T: float
    K: int
    step: float
    activation: Activation

    @property
    def out_const(self) -> float:
        return 1.0

    def coeffs(self) -> np.ndarray:
        return staircase_coeffs(self.K, self.step)

    def value(self, x, band: float | None = None):
        return staircase_value(x, self.K, self.step, self.activation, band=band)


def build_supernode_negexp(
    T: float,
    epsilon: float,
    profile: ActivationProfile,
    *,
    K: int | None = None,
    step: float | None = None,
) -> StaircaseSupernode:
    """Staircase supernode for exp(-x) at relative accuracy ``epsilon`` on [0, T]."""
    activation = profile.staircase_activation()
    if K is None or step is None:
        K, step = plan_staircase(T, epsilon)
    return StaircaseSupernode(T=T, K=K, step=step, activation=activation)


def staircase_value(x, K: int, step: float, sigma, band: float | None = None):
    """Evaluate psi(x) = 1 + sum_k (e^{-k step} - e^{-(k-1) step}) sigma(x/step - k).

    ``band=None`` sums all K terms (in k-chunks to bound memory).  A
    finite ``band`` B only evaluates sigma where |x/step - k| <= B and
    replaces the saturated head by its exact telescoped sum
    e^{-(lo-1) step} - 1; by the decay bounds the truncation error is
    below 2 step e^{-B} / (1 - e^{-1}), i.e. ~1e-19 absolute at B = 45.
    This is a verification shortcut only; built networks always evaluate
    dense.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 0
    x = np.atleast_1d(x)
    z = x / step
    if band is None:
        psi = np.ones_like(x)
        chunk = max(1, int(2**22 // max(1, x.size)))
        for k0 in range(1, K + 1, chunk):
            ks = np.arange(k0, min(k0 + chunk, K + 1), dtype=float)
            coeffs = -np.expm1(step) * np.exp(-ks * step)
            psi += (coeffs[np.newaxis, :] * sigma(z[:, np.newaxis] - ks[np.newaxis, :])).sum(axis=1)
    else:
        band_steps = int(math.ceil(band))
        center = np.floor(z).astype(np.int64)
        lo = np.clip(center - band_steps, 1, K + 1)
        offsets = np.arange(-band_steps, band_steps + 1, dtype=np.int64)
        ks = center[:, np.newaxis] + offsets[np.newaxis, :]
        valid = (ks >= lo[:, np.newaxis]) & (ks <= K)
        ks_f = ks.astype(float)
        vals = np.where(valid, sigma(z[:, np.newaxis] - ks_f), 0.0)
        coeffs = np.where(valid, -np.expm1(step) * np.exp(-ks_f * step), 0.0)
        psi = np.exp(-(lo - 1) * step) + (coeffs * vals).sum(axis=1)
    return float(psi[0]) if single else psi


# ----------------------------------------------------------------------
# Grid checks
# ----------------------------------------------------------------------

def check_square_supernode(plan: ComponentPlan, profile: ActivationProfile, points: int = 100001):
    """Sup-norm surrogate for the squaring supernode bounds.

    Returns (max |h - x^2| on [-2R, 2R], min h on (2R, 10R], min h overall).
    """
    node = build_supernode_square(plan.a, profile)
    inner = np.linspace(-2.0 * plan.R, 2.0 * plan.R, points)
    h_in = node.value(inner)
    outer = np.linspace(2.0 * plan.R, 10.0 * plan.R, points)[1:]
    h_out = node.value(outer)
    return (
        float(np.max(np.abs(h_in - inner**2))),
        float(np.min(h_out)),
        float(min(np.min(h_in), np.min(h_out))),
    )


def check_staircase(
    node: StaircaseSupernode, points: int = 100001, band: float | None = 45.0
):
    """Relative error of psi on [0, T] and its cap on (T, 3T].

    Returns (max relative error on [0, T], max psi on (T, 3T], min psi).
    """
    inner = np.linspace(0.0, node.T, points)
    psi_in = node.value(inner, band=band)
    rel = np.abs(psi_in - np.exp(-inner)) / np.exp(-inner)
    outer = np.linspace(node.T, 3.0 * node.T, points)[1:]
    psi_out = node.value(outer, band=band)
    return (
        float(np.max(rel)),
        float(np.max(psi_out)),
        float(min(np.min(psi_in), np.min(psi_out))),
    )


# ----------------------------------------------------------------------
# Network assembly
# ----------------------------------------------------------------------

def _whitened_affine(component):
    """Rows W, bias b with W x + b = A (x - mu) / sqrt(2), so g = sum of squares."""
    W = component.inv_sqrt * SQRT_HALF
    b = -W @ component.mean
    return W, b


def _net_metadata(spec, class_index, params, construction, widths):
    return {
        "construction": construction,
        "class_index": class_index,
        "spec_digest": spec.digest(),
        "params_digest": None if params is None else params.digest(),
        "hidden_widths": list(widths),
    }


def build_reference_network(
    spec: GmmSpec, class_index: int, params: ConstructionParams | None = None
) -> FeedforwardNet:
    """Exact-activation network: square nodes, exp(-x) nodes, linear output.

    Reproduces the class discriminant to floating-point accuracy (one
    basic node per ideal node, n J in the first layer and J in the
    second); no component is ever dropped.
    """
    cls = spec.classes[class_index]
    n, J = spec.n, cls.size
    W1 = np.zeros((n * J, n))
    b1 = np.zeros(n * J)
    for j, comp in enumerate(cls.components):
        W, b = _whitened_affine(comp)
        W1[j * n : (j + 1) * n] = W
        b1[j * n : (j + 1) * n] = b
    W2 = np.zeros((J, n * J))
    for j in range(J):
        W2[j, j * n : (j + 1) * n] = 1.0
    W3 = np.exp(cls.log_betas)[np.newaxis, :]
    layers = [
        Layer(W1, b1, SQUARE),
        Layer(W2, np.zeros(J), NEGEXP),
        Layer(W3, np.zeros(1), IDENTITY),
    ]
    net = FeedforwardNet(n, layers, _net_metadata(spec, class_index, params, "reference", [n * J, J]))
    return net


def build_class_network(
    spec: GmmSpec,
    class_index: int,
    params: ConstructionParams,
    activation: Activation | None = None,
) -> FeedforwardNet:
    """Assemble the class approximator for the requested activation kind.

    square/negexp selects the exact reference mode, relu the
    piecewise-linear variant; smooth kinds build the supernode +
    staircase network and must match the profile the parameters were
    solved with.
    """
    if activation is None:
        activation = params.profile.activation
    if activation.kind in ("square", "negexp"):
        return build_reference_network(spec, class_index, params)
    if activation.kind == "relu":
        return build_relu_network(spec, class_index, params)
    if activation.kind != params.profile.activation.kind:
        raise AssumptionNotVerified(
            f"parameters were solved for {params.profile.activation.kind}, not {activation.kind}"
        )
    return _build_basic_network(spec, class_index, params)


def _build_basic_network(spec, class_index, params):
    profile = params.profile
    profile.require()  # raises AssumptionViolated when any check failed
    stair_act = profile.staircase_activation()
    cls = spec.classes[class_index]
    n = spec.n
    plans = params.nontrivial
    if not plans:
        return _constant_zero_network(spec, class_index, params, "basic")

    width1 = 2 * n * len(plans)
    width2 = sum(plan.K for plan in plans)
    W1 = np.zeros((width1, n))
    b1 = np.zeros(width1)
    W2 = np.zeros((width2, width1))
    b2 = np.zeros(width2)
    W3 = np.zeros((1, width2))
    out_bias = 0.0

    col = 0
    row2 = 0
    for plan in plans:
        comp = cls.components[plan.index]
        node = build_supernode_square(plan.a, profile)
        W, b = _whitened_affine(comp)
        # Two basic nodes per coordinate: pre-activations +-y_i/a + tau.
        for i in range(n):
            W1[col + 2 * i] = W[i] / plan.a
            b1[col + 2 * i] = b[i] / plan.a + profile.tau
            W1[col + 2 * i + 1] = -W[i] / plan.a
            b1[col + 2 * i + 1] = -b[i] / plan.a + profile.tau
        # g_hat = out_coeff * sum(outputs) + n * out_const feeds each step node.
        g_coeff = node.out_coeff / plan.step
        g_const = n * node.out_const / plan.step
        ks = np.arange(1, plan.K + 1, dtype=float)
        W2[row2 : row2 + plan.K, col : col + 2 * n] = g_coeff
        b2[row2 : row2 + plan.K] = g_const - ks
        beta = plan.beta
        W3[0, row2 : row2 + plan.K] = beta * staircase_coeffs(plan.K, plan.step)
        out_bias += beta  # the staircase's leading 1
        col += 2 * n
        row2 += plan.K

    layers = [
        Layer(W1, b1, profile.activation),
        Layer(W2, b2, stair_act),
        Layer(W3, np.array([out_bias]), IDENTITY),
    ]
    meta = _net_metadata(spec, class_index, params, "basic", [width1, width2])
    return FeedforwardNet(n, layers, meta)


def _constant_zero_network(spec, class_index, params, construction):
    layers = [Layer(np.zeros((1, spec.n)), np.zeros(1), IDENTITY)]
    meta = _net_metadata(spec, class_index, params, construction, [])
    meta["all_components_trivial"] = True
    return FeedforwardNet(spec.n, layers, meta)


# ----------------------------------------------------------------------
# ReLU variant
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class ReluSquareSupernode:
    """Clipped piecewise-linear interpolant of x^2 on [-2R, 2R].

    The interpolant at knots 0, s, 2s, ..., 2R is shifted down by s^2/8
    and clipped at zero, which centers the chord error into +-s^2/8 and
    keeps h >= 0 with h(0) = 0; the response is clamped flat beyond 2R.
    With m = ceil(R / sqrt(2 nu)) segments per side the sup error is at
    most nu using 2(m+1) basic nodes.
    """

    R: float
    nu: float
    m: int
    s: float

    @property
    def node_count(self) -> int:
        return 2 * (self.m + 1)

    def knots_and_gammas(self):
        m, s = self.m, self.s
        knots = [s / 8.0] + [i * s for i in range(1, m)] + [2.0 * self.R]
        gammas = [s] + [2.0 * s] * (m - 1) + [-(2.0 * m - 1.0) * s]
        return np.array(knots), np.array(gammas)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        knots, gammas = self.knots_and_gammas()
        pos = np.maximum(x[..., np.newaxis] - knots, 0.0)
        neg = np.maximum(-x[..., np.newaxis] - knots, 0.0)
        return (pos + neg) @ gammas


def build_relu_square_supernode(R: float, nu: float) -> ReluSquareSupernode:
    if R <= 0 or nu <= 0:
        raise ValueError("R and nu must be positive")
    m = max(1, math.ceil(R / math.sqrt(2.0 * nu)))
    return ReluSquareSupernode(R=R, nu=nu, m=m, s=2.0 * R / m)


RAMP_WIDTH = 1.0  # unit-width ramp keeps |sigma(x)| <= e^x and |sigma(x)-1| <= e^-x


def ramp_sigma(z):
    """Piecewise-linear step surrogate clamp(z + 1/2, 0, 1) built from two ReLUs."""
    z = np.asarray(z, dtype=float)
    half = 0.5 * RAMP_WIDTH
    return (np.maximum(z + half, 0.0) - np.maximum(z - half, 0.0)) / RAMP_WIDTH


def build_relu_network(spec: GmmSpec, class_index: int, params: ConstructionParams):
    """ReLU-only variant: PL squaring supernodes, ramp staircase (2 nodes/step)."""
    cls = spec.classes[class_index]
    n = spec.n
    plans = params.nontrivial
    if not plans:
        return _constant_zero_network(spec, class_index, params, "relu")

    half = 0.5 * RAMP_WIDTH
    rows1, bias1 = [], []
    blocks = []  # (plan, start col, gammas per node) for layer-2 wiring
    col = 0
    for plan in plans:
        comp = cls.components[plan.index]
        node = build_relu_square_supernode(plan.R, plan.nu)
        knots, gammas = node.knots_and_gammas()
        W, b = _whitened_affine(comp)
        out_coeffs = []
        for i in range(n):
            for k, g in zip(knots, gammas):
                rows1.append(W[i])
                bias1.append(b[i] - k)
                out_coeffs.append(g)
            for k, g in zip(knots, gammas):
                rows1.append(-W[i])
                bias1.append(-b[i] - k)
                out_coeffs.append(g)
        width = n * node.node_count
        blocks.append((plan, col, np.array(out_coeffs)))
        col += width

    width1 = col
    W1 = np.vstack(rows1)
    b1 = np.array(bias1)

    width2 = 2 * sum(plan.K for plan, _, _ in blocks)
    W2 = np.zeros((width2, width1))
    b2 = np.zeros(width2)
    W3 = np.zeros((1, width2))
    out_bias = 0.0
    row = 0
    for plan, start, out_coeffs in blocks:
        g_row = np.zeros(width1)
        g_row[start : start + out_coeffs.size] = out_coeffs / plan.step
        coeffs = staircase_coeffs(plan.K, plan.step) * plan.beta / RAMP_WIDTH
        for k in range(1, plan.K + 1):
            W2[row] = g_row
            b2[row] = -k + half
            W2[row + 1] = g_row
            b2[row + 1] = -k - half
            W3[0, row] = coeffs[k - 1]
            W3[0, row + 1] = -coeffs[k - 1]
            row += 2
        out_bias += plan.beta
    layers = [
        Layer(W1, b1, Activation("relu")),
        Layer(W2, b2, Activation("relu")),
        Layer(W3, np.array([out_bias]), IDENTITY),
    ]
    meta = _net_metadata(spec, class_index, params, "relu", [width1, width2])
    return FeedforwardNet(spec.n, layers, meta)


# ----------------------------------------------------------------------
# Node-count scaling
# ----------------------------------------------------------------------

def standard_gaussian_spec(n: int) -> GmmSpec:
    """Single-class standard normal in dimension n (V = 1, J = 1)."""
    doc = {
        "n": n,
        "classes": [
            {
                "prior": 1.0,
                "components": [
                    {
                        "weight": 1.0,
                        "mean": [0.0] * n,
                        "covariance": np.eye(n).tolist(),
                    }
                ],
            }
        ],
    }
    return parse_gmm_spec(doc)


def node_scaling_sweep(ns, delta: float, q: float, profile: ActivationProfile | None = None):
    """Build the basic-mode net for N(0, I_n) at each n and count nodes."""
    rows = []
    for n in ns:
        spec = standard_gaussian_spec(int(n))
        params = solve_params(spec, 0, delta, q, profile)
        net = build_class_network(spec, 0, params)
        counts = count_nodes(net)
        rows.append(
            {
                "n": int(n),
                "first_layer": counts["per_layer"][0],
                "second_layer": counts["per_layer"][1],
                "total": counts["total"],
            }
        )
    return rows


def affine_fit_r2(xs, ys):
    """Least-squares slope/intercept of y ~ a x + b and the fit's R^2."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r2
