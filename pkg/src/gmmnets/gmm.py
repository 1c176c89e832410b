"""Multi-class Gaussian mixture models and their optimal discriminants.

A mixture problem is a set of classes, each holding a prior, a list of
Gaussian components and within-class component weights.  The discriminant
of class ``i`` is

    d_i(x) = rho_i * sum_j w_j * gamma_j * exp(-g_j(x)),   j in class i,

with ``gamma_j = |2 pi Sigma_j|^{-1/2}`` and the quadratic form
``g_j(x) = 0.5 (x - mu_j)^T Sigma_j^{-1} (x - mu_j)``, so each ``d_i``
integrates to ``rho_i`` and their sum is the full mixture density.

All density arithmetic runs in natural-log space (log-sum-exp); values are
exponentiated only at API boundaries.  The normalizer ``gamma_j`` decays
like ``(2 pi)^{-n/2}`` and would underflow double precision near n ~ 150,
so the log forms are the primary interface.

Randomness comes exclusively from numpy's seeded PCG64 generator
(``np.random.default_rng``); every stochastic operation takes an explicit
seed and is bit-reproducible for a fixed numpy version and platform.
All objects are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import logsumexp

from .errors import DimensionMismatch, NotPositiveDefinite, SpecValidationError

SYMMETRY_TOL = 1e-12
EIG_RATIO_TOL = 1e-12
FACTOR_CHECK_TOL = 1e-8
SUM_TOL = 1e-12


def as_points(x, n):
    """Coerce ``x`` to an (m, n) batch; report whether it was a single point."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        if arr.shape[0] != n:
            raise DimensionMismatch(f"expected a length-{n} point, got length {arr.shape[0]}")
        return arr[np.newaxis, :], True
    if arr.ndim == 2:
        if arr.shape[1] != n:
            raise DimensionMismatch(f"expected (m, {n}) points, got shape {arr.shape}")
        return arr, False
    raise DimensionMismatch(f"points must be 1- or 2-dimensional, got shape {arr.shape}")


def _freeze(arr):
    arr = np.ascontiguousarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GaussianComponent:
    """One Gaussian with cached factorization data.

    Attributes
    ----------
    mean : (n,) array
    covariance : (n, n) array, symmetric positive definite
    inv_sqrt : (n, n) array ``A`` with ``A.T @ A == inv(covariance)``
        (inverse of the lower Cholesky factor; ``A`` itself need not be
        symmetric, only the defining identity matters).
    chol_lower : (n, n) lower-triangular ``L`` with ``L @ L.T == covariance``
    log_det : log determinant of the covariance
    eig_min, eig_max : extreme covariance eigenvalues (both > 0)
    """

    mean: np.ndarray
    covariance: np.ndarray
    inv_sqrt: np.ndarray
    chol_lower: np.ndarray
    log_det: float
    eig_min: float
    eig_max: float

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def log_norm_const(self) -> float:
        """log gamma = -0.5 * (n log(2 pi) + log|Sigma|)."""
        return -0.5 * (self.dim * np.log(2.0 * np.pi) + self.log_det)

    def quadratic(self, x):
        """Quadratic form g(x) = 0.5 * ||A (x - mean)||^2, always >= 0."""
        pts, single = as_points(x, self.dim)
        y = (pts - self.mean) @ self.inv_sqrt.T
        g = 0.5 * np.einsum("ij,ij->i", y, y)
        return float(g[0]) if single else g

    def log_density(self, x):
        g = self.quadratic(x)
        return self.log_norm_const - g


def factor_component(mean, covariance) -> GaussianComponent:
    """Validate and factor a Gaussian component.

    Uses the Cholesky factorization ``Sigma = L L^T`` and sets
    ``A = L^{-1}``, which satisfies ``A^T A = Sigma^{-1}``.  Rejects
    matrices whose asymmetry exceeds 1e-12 or whose smallest eigenvalue
    is at most ``1e-12 * largest`` (near-degenerate components are out
    of scope).
    """
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(covariance, dtype=float)
    if mean.ndim != 1 or mean.shape[0] < 1:
        raise DimensionMismatch(f"mean must be a vector of length >= 1, got shape {mean.shape}")
    n = mean.shape[0]
    if cov.shape != (n, n):
        raise DimensionMismatch(f"covariance must be {n}x{n}, got shape {cov.shape}")
    asym = float(np.max(np.abs(cov - cov.T))) if n > 0 else 0.0
    if asym > SYMMETRY_TOL:
        raise NotPositiveDefinite(f"covariance asymmetry {asym:.3e} exceeds {SYMMETRY_TOL:.0e}")

    eigvals = np.linalg.eigvalsh(cov)
    eig_min, eig_max = float(eigvals[0]), float(eigvals[-1])
    if eig_max <= 0.0 or eig_min <= EIG_RATIO_TOL * eig_max:
        raise NotPositiveDefinite(
            f"eigenvalues [{eig_min:.3e}, {eig_max:.3e}] fail the positivity margin"
        )
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"Cholesky factorization failed: {exc}") from exc

    inv_sqrt = solve_triangular(chol, np.eye(n), lower=True)
    log_det = 2.0 * float(np.sum(np.log(np.diag(chol))))
    residual = float(np.max(np.abs(inv_sqrt.T @ inv_sqrt @ cov - np.eye(n))))
    if residual > FACTOR_CHECK_TOL:
        raise NotPositiveDefinite(
            f"factor self-check ||A^T A Sigma - I||_max = {residual:.3e} exceeds {FACTOR_CHECK_TOL:.0e}"
        )
    return GaussianComponent(
        mean=_freeze(mean),
        covariance=_freeze(cov),
        inv_sqrt=_freeze(inv_sqrt),
        chol_lower=_freeze(chol),
        log_det=log_det,
        eig_min=eig_min,
        eig_max=eig_max,
    )


@dataclass(frozen=True)
class DiscriminantHandle:
    """Evaluable discriminant of one class.

    Stores ``log beta_j = log(rho * w_j * gamma_j)`` per component; the
    linear-space value is exposed for convenience but ``log_value`` is
    the underflow-free form.
    """

    class_index: int
    components: tuple
    log_betas: np.ndarray

    @property
    def dim(self) -> int:
        return self.components[0].dim

    def log_value(self, x):
        pts, single = as_points(x, self.dim)
        g = np.column_stack([comp.quadratic(pts) for comp in self.components])
        out = logsumexp(self.log_betas[np.newaxis, :] - g, axis=1)
        return float(out[0]) if single else out

    def value(self, x):
        return np.exp(self.log_value(x))

    def value_naive(self, x):
        """Direct summation without log-sum-exp; underflows for large n."""
        pts, single = as_points(x, self.dim)
        total = np.zeros(pts.shape[0])
        for log_beta, comp in zip(self.log_betas, self.components):
            total += np.exp(log_beta) * np.exp(-comp.quadratic(pts))
        return float(total[0]) if single else total


@dataclass(frozen=True)
class GmmClass:
    prior: float
    weights: np.ndarray
    components: tuple

    @property
    def size(self) -> int:
        return len(self.components)

    @property
    def log_betas(self) -> np.ndarray:
        return np.log(self.prior) + np.log(self.weights) + np.array(
            [comp.log_norm_const for comp in self.components]
        )

    @property
    def variance_bound(self) -> float:
        """Largest covariance eigenvalue over the class (per-coordinate variance cap)."""
        return max(comp.eig_max for comp in self.components)


@dataclass(frozen=True)
class GmmSpec:
    """A full multi-class Gaussian mixture classification problem."""

    n: int
    classes: tuple

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    @property
    def num_components(self) -> int:
        return sum(cls.size for cls in self.classes)

    @property
    def eig_range(self):
        """Global (min, max) covariance eigenvalue over all components."""
        lo = min(c.eig_min for cls in self.classes for c in cls.components)
        hi = max(c.eig_max for cls in self.classes for c in cls.components)
        return lo, hi

    def discriminant(self, class_index: int) -> DiscriminantHandle:
        cls = self.classes[class_index]
        log_betas = cls.log_betas
        if not np.all(np.isfinite(log_betas)):
            raise NotPositiveDefinite("non-finite discriminant coefficient")
        return DiscriminantHandle(class_index, cls.components, _freeze(log_betas))

    def log_density(self, x):
        """Log of the full mixture density p(x) = sum_i d_i(x)."""
        pts, single = as_points(x, self.n)
        logs = np.column_stack([self.discriminant(i).log_value(pts) for i in range(self.num_classes)])
        out = logsumexp(logs, axis=1)
        return float(out[0]) if single else out

    def bayes_classify(self, x):
        """argmax_i log d_i(x); ties break to the lowest class index."""
        pts, single = as_points(x, self.n)
        logs = np.column_stack([self.discriminant(i).log_value(pts) for i in range(self.num_classes)])
        labels = np.argmax(logs, axis=1)
        return int(labels[0]) if single else labels

    def sample(self, count: int, seed: int):
        """Draw ``count`` points; returns (points, class_labels, component_labels).

        Class is drawn by prior, component by within-class weight, and the
        point as ``mu + L z`` with ``L L^T = Sigma`` and ``z`` standard
        normal.  Component labels index components globally, in class order.
        """
        if count < 1:
            raise ValueError("count must be >= 1")
        rng = np.random.default_rng(seed)
        priors = np.array([cls.prior for cls in self.classes])
        class_labels = _categorical(rng.random(count), priors)
        u_comp = rng.random(count)
        z = rng.standard_normal((count, self.n))

        comp_labels = np.empty(count, dtype=np.intp)
        points = np.empty((count, self.n))
        offset = 0
        for i, cls in enumerate(self.classes):
            mask = class_labels == i
            local = _categorical(u_comp[mask], cls.weights)
            comp_labels[mask] = offset + local
            for j, comp in enumerate(cls.components):
                sel = mask.copy()
                sel[mask] = local == j
                points[sel] = comp.mean + z[sel] @ comp.chol_lower.T
            offset += cls.size
        return points, class_labels, comp_labels

    def sample_class(self, class_index: int, count: int, seed: int):
        """Draw from the class-conditional mixture of one class."""
        if count < 1:
            raise ValueError("count must be >= 1")
        cls = self.classes[class_index]
        rng = np.random.default_rng(seed)
        local = _categorical(rng.random(count), cls.weights)
        z = rng.standard_normal((count, self.n))
        points = np.empty((count, self.n))
        for j, comp in enumerate(cls.components):
            mask = local == j
            points[mask] = comp.mean + z[mask] @ comp.chol_lower.T
        return points

    def class_sampler(self, class_index: int):
        """Closure (count, seed) -> points for Monte Carlo estimators."""
        return lambda count, seed: self.sample_class(class_index, count, seed)

    def to_document(self) -> dict:
        return {
            "n": self.n,
            "classes": [
                {
                    "prior": cls.prior,
                    "components": [
                        {
                            "weight": float(w),
                            "mean": comp.mean.tolist(),
                            "covariance": comp.covariance.tolist(),
                        }
                        for w, comp in zip(cls.weights, cls.components)
                    ],
                }
                for cls in self.classes
            ],
        }

    def digest(self) -> str:
        payload = json.dumps(self.to_document(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()


def _categorical(u, probs):
    """Map uniform draws to category indices via the cumulative weights."""
    edges = np.cumsum(probs)
    idx = np.searchsorted(edges, u, side="right")
    return np.minimum(idx, len(probs) - 1)


def _require(condition, path, message):
    if not condition:
        raise SpecValidationError(path, message)


def parse_gmm_spec(doc) -> GmmSpec:
    """Build a validated :class:`GmmSpec` from a plain document (parsed JSON).

    Validation walks the document in order and reports the first violation
    together with its path.
    """
    _require(isinstance(doc, dict), "$", "top level must be an object")
    _require("n" in doc, "n", "missing field")
    n = doc["n"]
    _require(isinstance(n, int) and n >= 1, "n", f"must be a positive integer, got {n!r}")
    _require("classes" in doc, "classes", "missing field")
    raw_classes = doc["classes"]
    _require(isinstance(raw_classes, list) and raw_classes, "classes", "must be a non-empty list")

    classes = []
    for i, raw_cls in enumerate(raw_classes):
        cpath = f"classes[{i}]"
        _require(isinstance(raw_cls, dict), cpath, "must be an object")
        _require("prior" in raw_cls, f"{cpath}.prior", "missing field")
        prior = raw_cls["prior"]
        _require(
            isinstance(prior, (int, float)) and prior > 0,
            f"{cpath}.prior",
            f"must be a positive number, got {prior!r}",
        )
        raw_comps = raw_cls.get("components")
        _require(
            isinstance(raw_comps, list) and raw_comps,
            f"{cpath}.components",
            "must be a non-empty list",
        )
        weights = []
        comps = []
        for j, raw_comp in enumerate(raw_comps):
            kpath = f"{cpath}.components[{j}]"
            _require(isinstance(raw_comp, dict), kpath, "must be an object")
            weight = raw_comp.get("weight")
            _require(
                isinstance(weight, (int, float)) and weight > 0,
                f"{kpath}.weight",
                f"must be a positive number, got {weight!r}",
            )
            mean = np.asarray(raw_comp.get("mean", []), dtype=float)
            _require(mean.shape == (n,), f"{kpath}.mean", f"must be a length-{n} vector")
            cov = np.asarray(raw_comp.get("covariance", []), dtype=float)
            _require(cov.shape == (n, n), f"{kpath}.covariance", f"must be an {n}x{n} matrix")
            try:
                comps.append(factor_component(mean, cov))
            except NotPositiveDefinite as exc:
                raise SpecValidationError(f"{kpath}.covariance", str(exc)) from exc
            weights.append(float(weight))
        wsum = sum(weights)
        _require(
            abs(wsum - 1.0) <= SUM_TOL,
            f"{cpath}.components",
            f"component weights sum to {wsum!r}, must be 1 within {SUM_TOL:.0e}",
        )
        classes.append(GmmClass(float(prior), _freeze(np.array(weights)), tuple(comps)))

    psum = sum(cls.prior for cls in classes)
    _require(
        abs(psum - 1.0) <= SUM_TOL,
        "classes",
        f"class priors sum to {psum!r}, must be 1 within {SUM_TOL:.0e}",
    )
    return GmmSpec(n=n, classes=tuple(classes))


def load_gmm_spec(path) -> GmmSpec:
    """Load and validate a mixture specification from a JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecValidationError("$", f"invalid JSON: {exc}") from exc
    return parse_gmm_spec(doc)


def save_gmm_spec(spec: GmmSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec.to_document(), fh, indent=2)
        fh.write("\n")
