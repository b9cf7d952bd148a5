"""Empirical spectral measure of a symmetric matrix."""

import math

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_symmetric_matrix


class EmpiricalSpectralMeasure(BaseEstimator):
    """Eigenvalue counting measure ``mu = (1/N) sum_i delta_{lambda_i}``.

    ``fit`` stores the sorted eigenvalues; ``mass(a, b)`` counts the closed
    interval and ``stieltjes(z)`` evaluates ``(1/N) sum_i 1/(lambda_i - z)``.
    """

    def fit(self, X, y=None):
        A = check_symmetric_matrix(X, name="X")
        self.eigenvalues_ = np.linalg.eigvalsh(A)
        self.n_features_in_ = A.shape[0]
        return self

    def mass(self, a, b):
        check_is_fitted(self, "eigenvalues_")
        if a > b:
            raise ValueError(f"need a <= b, got [{a}, {b}]")
        w = self.eigenvalues_
        count = np.searchsorted(w, b, side="right") - np.searchsorted(w, a, side="left")
        return int(count) / w.size

    def stieltjes(self, z):
        check_is_fitted(self, "eigenvalues_")
        return complex(np.mean(1.0 / (self.eigenvalues_ - complex(z))))

    def im_stieltjes(self, E, eta):
        """``(1/N) sum_i eta / ((lambda_i - E)^2 + eta^2)`` with compensated summation."""
        check_is_fitted(self, "eigenvalues_")
        d = self.eigenvalues_ - E
        return math.fsum(eta / (d * d + eta * eta)) / d.size

    def transform(self, X):
        """Interval masses for an ``(m, 2)`` array of ``(a, b)`` rows."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != 2:
            raise ValueError("expected rows of (a, b)")
        return np.array([self.mass(a, b) for a, b in X])
