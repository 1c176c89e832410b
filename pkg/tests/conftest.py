import numpy as np
import pytest

from gmmnets.cli import bundled_spec_path
from gmmnets.gmm import load_gmm_spec, parse_gmm_spec


def component_doc(weight, mean, cov):
    return {"weight": weight, "mean": list(mean), "covariance": [list(r) for r in np.atleast_2d(cov)]}


def single_gaussian_doc(mean, cov):
    return {
        "n": len(mean),
        "classes": [{"prior": 1.0, "components": [component_doc(1.0, mean, cov)]}],
    }


def two_gaussian_classes_doc(mu1, mu2, var=1.0):
    """Two equiprobable 1-D unit-variance classes."""
    return {
        "n": 1,
        "classes": [
            {"prior": 0.5, "components": [component_doc(1.0, [mu1], [[var]])]},
            {"prior": 0.5, "components": [component_doc(1.0, [mu2], [[var]])]},
        ],
    }


def random_spd(rng, n, lo=0.3, hi=3.0):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    lam = rng.uniform(lo, hi, n)
    cov = (q * lam) @ q.T
    return 0.5 * (cov + cov.T)


def random_spec(rng, n, num_classes, max_components, lo=0.3, hi=3.0):
    classes = []
    priors = rng.dirichlet(np.ones(num_classes) * 5.0)
    priors = priors / priors.sum()
    for i in range(num_classes):
        J = int(rng.integers(1, max_components + 1))
        weights = rng.dirichlet(np.ones(J) * 5.0)
        weights = weights / weights.sum()
        comps = [
            component_doc(float(w), rng.uniform(-4, 4, n), random_spd(rng, n, lo, hi))
            for w in weights
        ]
        classes.append({"prior": float(priors[i]), "components": comps})
    # re-normalize exactly so the 1e-12 sum tolerance is met
    total = sum(c["prior"] for c in classes)
    classes[-1]["prior"] += 1.0 - total
    for cls in classes:
        wtotal = sum(c["weight"] for c in cls["components"])
        cls["components"][-1]["weight"] += 1.0 - wtotal
    return parse_gmm_spec({"n": n, "classes": classes})


@pytest.fixture(scope="session")
def gauss1d():
    return load_gmm_spec(bundled_spec_path("gauss1d"))


@pytest.fixture(scope="session")
def mix1d3():
    return load_gmm_spec(bundled_spec_path("mix1d3"))


@pytest.fixture(scope="session")
def twoclass2d():
    return load_gmm_spec(bundled_spec_path("twoclass2d"))


@pytest.fixture(scope="session")
def synth8d():
    return load_gmm_spec(bundled_spec_path("synth8d"))
