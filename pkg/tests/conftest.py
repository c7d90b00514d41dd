import numpy as np
import pytest

from pigmm import kernels

ACCEPTANCE_RESULTS = []


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    previous = kernels.use_backend(request.param)
    yield request.param
    kernels.use_backend(previous)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_spd(rng, d):
    A = rng.standard_normal((d, d))
    return A @ A.T + np.eye(d)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)


def identity_pipeline(columns):
    from pigmm.features import FeaturePipeline

    cols = tuple(columns)
    return FeaturePipeline(cols, None, False, cols)


def gaussian_model(mean, cov):
    from pigmm.gaussian import GaussianComponent
    from pigmm.mixture import MixtureModel

    mean = np.atleast_1d(np.asarray(mean, dtype=np.float64))
    cov = np.atleast_2d(np.asarray(cov, dtype=np.float64))
    return MixtureModel([1.0], [GaussianComponent.from_covariance(mean, cov)])


def two_blob(seed, n_per_class, separation=5.0):
    """Unit-variance 2-D blobs at (+/- separation/2, 0); labels a / b."""
    r = np.random.default_rng(seed)
    a = r.standard_normal((n_per_class, 2)) + [-separation / 2, 0.0]
    b = r.standard_normal((n_per_class, 2)) + [separation / 2, 0.0]
    return np.vstack([a, b]), np.array(["a"] * n_per_class + ["b"] * n_per_class, dtype=object)


def two_blob_classifier(seed=0, n_per_class=200, separation=5.0, components=1):
    from pigmm.classifier import ClassifierConfig, fit_classifier

    X, y = two_blob(seed, n_per_class, separation)
    cfg = ClassifierConfig(components=components, standardize=False)
    return fit_classifier(X, y, ["x", "y"], cfg, classes=("a", "b"))


def symmetric_classifier(priors=(0.5, 0.5)):
    """Two identical-shape classes mirrored about x = 0."""
    from pigmm.classifier import GenerativeClassifier

    cov = [[1.0, 0.3], [0.3, 2.0]]
    m = [gaussian_model([-1.5, 0.0], cov), gaussian_model([1.5, 0.0], [[1.0, -0.3], [-0.3, 2.0]])]
    return GenerativeClassifier(("a", "b"), m, list(priors), identity_pipeline(["x", "y"]))
