"""Green functions, minors and the resolvent identities they satisfy."""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_symmetric_matrix
from .semicircle import SpectralParam, stieltjes_m

#: Below this |G_kk| the minor identity is replaced by a direct solve.
MINOR_PIVOT_FLOOR = 1e-6


class ResolventError(RuntimeError):
    """Factorisation of ``A - z`` failed."""


def _as_param(z):
    if isinstance(z, SpectralParam):
        return z
    return SpectralParam.from_complex(z)


def eigendecompose(A):
    """Symmetric eigendecomposition ``A = U diag(w) U^T``."""
    return np.linalg.eigh(A)


def green_from_eigen(eigenvalues, eigenvectors, z):
    """``U diag(1/(w - z)) U^T`` assembled from two real products."""
    d = 1.0 / (eigenvalues - complex(z))
    U = eigenvectors
    G = np.empty((U.shape[0], U.shape[0]), dtype=np.complex128)
    G.real = (U * d.real) @ U.T
    G.imag = (U * d.imag) @ U.T
    return G


def green_direct(A, z):
    M = A.astype(np.complex128)
    M[np.diag_indices_from(M)] -= complex(z)
    try:
        return scipy.linalg.inv(M, overwrite_a=True, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ResolventError(f"factorisation of A - z failed at z={complex(z)}: {exc}") from exc


class ResolventBundle:
    """Green function ``G(z) = (A - z)^-1`` of one matrix at one spectral parameter.

    ``s`` is the normalised trace. Minors ``G^(k)`` are computed on demand
    by :func:`minor_green` and cached on the bundle.
    """

    def __init__(self, A, z, G, method):
        self.A = A
        self.z = _as_param(z)
        self.G = G
        self.method = method
        self.s = complex(np.sum(np.diagonal(G)) / G.shape[0])
        self._minors = {}

    @property
    def n(self):
        return self.G.shape[0]

    @property
    def minors(self):
        return dict(self._minors)

    @property
    def Gamma(self):
        return gamma_phi(self, self._minors.keys()).Gamma

    @property
    def phi(self):
        return gamma_phi(self, self._minors.keys()).phi


def compute_green(A, z, method="eigen", decomposition=None):
    """Green function of a real symmetric matrix.

    Parameters
    ----------
    A : array of shape (n, n)
        Real symmetric matrix.
    z : complex or SpectralParam
        Spectral parameter with positive imaginary part.
    method : {"eigen", "direct"}
        ``"eigen"`` assembles G from an eigendecomposition (reused when
        ``decomposition=(w, U)`` is supplied); ``"direct"`` inverts ``A - z``.
    """
    A = check_symmetric_matrix(A)
    z = _as_param(z)
    if method == "eigen":
        w, U = decomposition if decomposition is not None else eigendecompose(A)
        G = green_from_eigen(w, U, z.z)
    elif method == "direct":
        G = green_direct(A, z.z)
    else:
        raise ValueError(f"unknown method {method!r}; expected 'eigen' or 'direct'")
    if not np.all(np.isfinite(G)):
        raise ResolventError(f"non-finite Green function at z={z.z}")
    return ResolventBundle(A, z, G, method)


def ward_residual_matrix(G, eta):
    """Max relative deviation from ``sum_j |G_ij|^2 = Im G_ii / eta`` over rows."""
    lhs = np.einsum("ij,ij->i", G.real, G.real) + np.einsum("ij,ij->i", G.imag, G.imag)
    rhs = np.diagonal(G).imag / eta
    return float(np.max(np.abs(lhs - rhs) / rhs))


def ward_residual(bundle, include_minors=False):
    res = ward_residual_matrix(bundle.G, bundle.z.eta)
    if include_minors:
        for Gk in bundle._minors.values():
            res = max(res, ward_residual_matrix(Gk, bundle.z.eta))
    return res


def _keep(n, k):
    return np.r_[0:k, k + 1:n]


def _reduced(i, k):
    """Position of index ``i`` inside a minor with row/column ``k`` removed."""
    if i == k:
        raise ValueError("index coincides with the removed vertex")
    return i if i < k else i - 1


def minor_by_identity(G, k):
    keep = _keep(G.shape[0], k)
    col = G[keep, k]
    row = G[k, keep]
    return G[np.ix_(keep, keep)] - np.outer(col, row) / G[k, k]


def minor_direct(A, z, k):
    keep = _keep(A.shape[0], k)
    return green_direct(A[np.ix_(keep, keep)], complex(z))


def minor_green(bundle, k, mode="identity", cache=True):
    """Green function of the matrix with row and column ``k`` removed.

    ``mode="identity"`` uses ``G_ij - G_ik G_kj / G_kk`` and falls back to
    a direct solve, with a warning, when ``|G_kk|`` is below
    :data:`MINOR_PIVOT_FLOOR`.
    """
    n = bundle.n
    if not 0 <= k < n:
        raise IndexError(f"vertex {k} out of range for N={n}")
    if mode not in ("identity", "direct"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "identity" and k in bundle._minors:
        return bundle._minors[k]
    if mode == "identity" and abs(bundle.G[k, k]) < MINOR_PIVOT_FLOOR:
        warnings.warn(
            f"|G_kk| = {abs(bundle.G[k, k]):.2e} < {MINOR_PIVOT_FLOOR:g} at k={k}; "
            "computing the minor by direct solve",
            RuntimeWarning,
            stacklevel=2,
        )
        mode = "direct"
    if mode == "identity":
        Gk = minor_by_identity(bundle.G, k)
    else:
        Gk = minor_direct(bundle.A, bundle.z.z, k)
    if cache:
        bundle._minors[k] = Gk
    return Gk


def minor_identity_residual(bundle, k):
    """Max deviation between identity and direct minors, relative to max |G^(k)|."""
    ident = minor_by_identity(bundle.G, k)
    direct = minor_direct(bundle.A, bundle.z.z, k)
    return float(np.max(np.abs(ident - direct)) / np.max(np.abs(direct)))


def schur_offdiag_residual(bundle, i, j):
    """Residual of both forms of the off-diagonal Schur formula at ``(i, j)``."""
    if i == j:
        raise ValueError("the off-diagonal Schur formula needs i != j")
    A, G, n = bundle.A, bundle.G, bundle.n
    Gj = minor_green(bundle, j)
    via_j = -G[j, j] * (Gj[_reduced(i, j)] @ A[_keep(n, j), j])
    Gi = minor_green(bundle, i)
    via_i = -G[i, i] * (A[i, _keep(n, i)] @ Gi[:, _reduced(j, i)])
    return max(abs(G[i, j] - via_j), abs(G[i, j] - via_i))


def schur_spsf_residual(bundle, i):
    """``|1/G_ii - (A_ii - z - sum_{k,l != i} A_ik G^(i)_kl A_li)|``."""
    A, G, n = bundle.A, bundle.G, bundle.n
    if abs(G[i, i]) < MINOR_PIVOT_FLOOR:
        raise ValueError(f"|G_ii| too small at i={i}")
    a = A[i, _keep(n, i)]
    Gi = minor_green(bundle, i)
    rhs = A[i, i] - bundle.z.z - a @ Gi @ a
    return abs(1.0 / G[i, i] - rhs)


@dataclass(frozen=True)
class YDecomposition:
    """The fluctuation term ``Y_i`` and its seven summands."""

    i: int
    total: complex
    terms: tuple
    reconstruction_residual: float


def compute_Y(bundle, i, f):
    """Fluctuation term ``Y_i`` with ``1/G_ii = -z - s + Y_i``.

    The centred matrix is taken as ``H = A - f/N`` entrywise.
    """
    A, G, n = bundle.A, bundle.G, bundle.n
    gii = G[i, i]
    if abs(gii) < MINOR_PIVOT_FLOOR:
        raise ValueError(f"degenerate G_ii at i={i}: |G_ii| = {abs(gii):.2e}")
    fn = f / n
    keep = _keep(n, i)
    h = A[i, keep] - fn
    h_ii = A[i, i] - fn
    Gi = minor_green(bundle, i)
    diag_i = np.diagonal(Gi)
    hGh = h @ Gi @ h
    h2 = h * h
    row_sums = Gi.sum(axis=1)
    col_sums = Gi.sum(axis=0)
    terms = (
        complex(h_ii),
        complex(G[:, i] @ G[i, :] / (n * gii)),
        complex(-(hGh - h2 @ diag_i)),
        complex(-((h2 - 1.0 / n) @ diag_i)),
        complex(fn),
        complex(-(fn**2) * row_sums.sum()),
        complex(-fn * (row_sums @ h + h @ col_sums)),
    )
    total = complex(sum(terms))
    residual = abs(1.0 / gii + bundle.z.z + bundle.s - total)
    return YDecomposition(i, total, terms, float(residual))


def self_consistency_residual(bundle, f, indices=None):
    """``|1 + z s + s^2 - (1/N) sum_i G_ii Y_i|`` over all rows."""
    n = bundle.n
    idx = range(n) if indices is None else indices
    acc = sum(bundle.G[i, i] * compute_Y(bundle, i, f).total for i in idx)
    z, s = bundle.z.z, bundle.s
    return abs(1 + z * s + s * s - acc / n)


def local_law_statistic(bundle, m=None):
    """``max_ij |G_ij - m delta_ij|``."""
    if m is None:
        m = stieltjes_m(bundle.z)
    G = bundle.G
    off = np.abs(G)
    np.fill_diagonal(off, np.abs(np.diagonal(G) - m))
    return float(off.max())


@dataclass(frozen=True)
class GammaReport:
    Gamma: float
    phi: int
    minors_used: tuple
    complete: bool

    @property
    def label(self):
        return "full" if self.complete else "sampled (Gamma lower bound, phi upper bound)"


def _minor_max_abs(G, k):
    """``max_{i,j != k} |G_ij - G_ik G_kj / G_kk|`` without storing the minor."""
    n = G.shape[0]
    keep = _keep(n, k)
    col = G[keep, k] / G[k, k]
    row = G[k, keep]
    best = 0.0
    step = max(1, 2**22 // n)
    for start in range(0, len(keep), step):
        rows = keep[start:start + step]
        block = G[np.ix_(rows, keep)] - np.outer(col[start:start + step], row)
        best = max(best, float(np.abs(block).max()))
    return best


def gamma_phi(bundle, minors_requested=()):
    """Max Green-function entry over G and the requested minors; ``phi = 1(Gamma <= 2)``."""
    requested = tuple(sorted(set(int(k) for k in minors_requested)))
    gamma = float(np.abs(bundle.G).max())
    for k in requested:
        if k in bundle._minors:
            gamma = max(gamma, float(np.abs(bundle._minors[k]).max()))
        elif abs(bundle.G[k, k]) < MINOR_PIVOT_FLOOR:
            Gk = minor_direct(bundle.A, bundle.z.z, k)
            gamma = max(gamma, float(np.abs(Gk).max()))
        else:
            gamma = max(gamma, _minor_max_abs(bundle.G, k))
    complete = len(requested) == bundle.n
    return GammaReport(gamma, int(gamma <= 2.0), requested, complete)


class Resolvent(BaseEstimator):
    """Green-function estimator for a fixed real symmetric matrix.

    ``fit`` stores the matrix and, for ``method="eigen"``, one
    eigendecomposition that is reused by every later call. ``transform``
    maps spectral parameters to the empirical Stieltjes transform
    ``s(z) = tr G(z) / N``.

    Parameters
    ----------
    method : {"eigen", "direct"}, default="eigen"
    """

    def __init__(self, method="eigen"):
        self.method = method

    def fit(self, X, y=None):
        if self.method not in ("eigen", "direct"):
            raise ValueError(f"unknown method {self.method!r}")
        A = check_symmetric_matrix(X, name="X")
        self.matrix_ = A
        self.n_features_in_ = A.shape[0]
        if self.method == "eigen":
            self.eigenvalues_, self.eigenvectors_ = eigendecompose(A)
        return self

    def green(self, z):
        check_is_fitted(self, "matrix_")
        z = _as_param(z)
        if self.method == "eigen":
            G = green_from_eigen(self.eigenvalues_, self.eigenvectors_, z.z)
        else:
            G = green_direct(self.matrix_, z.z)
        return ResolventBundle(self.matrix_, z, G, self.method)

    def stieltjes(self, z):
        check_is_fitted(self, "matrix_")
        z = _as_param(z)
        if self.method == "eigen":
            return complex(np.mean(1.0 / (self.eigenvalues_ - z.z)))
        return self.green(z).s

    def transform(self, X):
        """Stieltjes transform at each spectral parameter.

        ``X`` is a 1-d complex array or an ``(m, 2)`` array of ``(E, eta)`` rows.
        """
        Z = np.asarray(X)
        if Z.ndim == 2 and Z.shape[1] == 2 and Z.dtype.kind != "c":
            Z = Z[:, 0] + 1j * Z[:, 1]
        Z = np.atleast_1d(Z).astype(np.complex128)
        if np.any(Z.imag <= 0):
            raise ValueError("spectral parameters need a positive imaginary part")
        return np.array([self.stieltjes(z) for z in Z])
