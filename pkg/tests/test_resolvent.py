import warnings

import numpy as np
import pytest
from sklearn.base import clone

from sparselaw.ensemble import EnsembleConfig, sample_er
from sparselaw.resolvent import (
    Resolvent,
    ResolventBundle,
    compute_green,
    compute_Y,
    gamma_phi,
    local_law_statistic,
    minor_green,
    minor_identity_residual,
    schur_offdiag_residual,
    schur_spsf_residual,
    self_consistency_residual,
    ward_residual,
)
from sparselaw.semicircle import stieltjes_m


@pytest.fixture(scope="module")
def sample():
    return sample_er(EnsembleConfig(60, 3.5, seed=21))


@pytest.mark.parametrize("method", ["eigen", "direct"])
def test_green_matches_numpy_inverse(sample, method):
    z = 0.3 + 0.05j
    A = sample.rescaled
    ref = np.linalg.inv(A - z * np.eye(A.shape[0]))
    b = compute_green(A, z, method=method)
    assert np.max(np.abs(b.G - ref)) < 1e-10
    assert b.s == pytest.approx(np.trace(ref) / A.shape[0], abs=1e-12)


@pytest.mark.parametrize("eta", [1.0, 0.1, 0.01])
def test_ward_identity(sample, eta):
    b = compute_green(sample.rescaled, 0.1 + 1j * eta)
    for k in (0, 7, 33):
        minor_green(b, k)
    assert ward_residual(b, include_minors=True) < 1e-8


def test_minor_identity_vs_direct(sample):
    b = compute_green(sample.rescaled, -0.4 + 0.2j)
    for k in (0, 10, 59):
        assert minor_identity_residual(b, k) < 1e-10


def test_minor_direct_fallback_warns():
    A = np.zeros((4, 4))
    A[0, 1] = A[1, 0] = 1.0
    b = compute_green(A, 1e-9j, method="direct")
    # G_22 = -1/z is huge, G_00 is tiny
    b.G[0, 0] = 1e-8
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        minor_green(b, 0)
    assert any("direct solve" in str(w.message) for w in rec)


def test_schur_identities(sample):
    z = 0.2 + 0.1j
    b = compute_green(sample.rescaled, z)
    tol = 1e-6 * (1 + 1 / z.imag)
    assert schur_offdiag_residual(b, 3, 17) < tol
    assert schur_spsf_residual(b, 5) < tol


def test_Y_decomposition(sample):
    b = compute_green(sample.rescaled, 0.2 + 0.1j)
    y = compute_Y(b, 8, sample.f_value)
    assert len(y.terms) == 7
    assert y.reconstruction_residual < 1e-10
    assert self_consistency_residual(b, sample.f_value) < 1e-10


def test_local_law_statistic_definition(sample):
    z = 0.5j
    b = compute_green(sample.rescaled, z)
    m = stieltjes_m(z)
    D = b.G - m * np.eye(b.n)
    assert local_law_statistic(b) == pytest.approx(np.abs(D).max())


def test_gamma_phi_full_vs_sampled(sample):
    b = compute_green(sample.rescaled, 1j)
    full = gamma_phi(b, range(b.n))
    part = gamma_phi(b, [0, 1])
    assert full.complete and not part.complete
    assert part.Gamma <= full.Gamma
    brute = np.abs(b.G).max()
    for k in range(b.n):
        keep = np.r_[0:k, k + 1:b.n]
        Gk = np.linalg.inv(sample.rescaled[np.ix_(keep, keep)] - 1j * np.eye(b.n - 1))
        brute = max(brute, np.abs(Gk).max())
    assert full.Gamma == pytest.approx(brute, rel=1e-10)
    assert full.phi == int(brute <= 2)


def test_estimator_api(sample):
    est = Resolvent()
    assert est.get_params() == {"method": "eigen"}
    assert clone(est).set_params(method="direct").method == "direct"
    est.fit(sample.rescaled)
    s = est.transform(np.array([[0.1, 0.5], [0.0, 1.0]]))
    direct = Resolvent(method="direct").fit(sample.rescaled)
    assert np.allclose(s, [direct.stieltjes(0.1 + 0.5j), direct.stieltjes(1j)], atol=1e-12)
    assert isinstance(est.green(0.3j), ResolventBundle)
    with pytest.raises(ValueError):
        est.transform([0.1 - 1j])
    with pytest.raises(ValueError):
        Resolvent().fit(np.array([[0.0, 1.0], [2.0, 0.0]]))
