"""Input validation helpers shared by the estimators and calculators."""

import numbers

import numpy as np
from sklearn.utils import check_scalar
from sklearn.utils.validation import check_array


def check_symmetric_matrix(A, *, name="A", copy=False):
    """Validate a real square matrix that is exactly symmetric.

    Returns the matrix as a C-contiguous float64 array.
    """
    A = check_array(A, dtype=np.float64, order="C", copy=copy, input_name=name)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    if not np.array_equal(A, A.T):
        raise ValueError(f"{name} must be exactly symmetric")
    return A


def check_coefficients(a, *, ndim, name="coefficients"):
    """Validate a finite real or complex coefficient array of the given rank."""
    a = np.asarray(a)
    if a.dtype.kind not in "biufc":
        raise TypeError(f"{name} must be numeric, got dtype {a.dtype}")
    if a.ndim != ndim:
        raise ValueError(f"{name} must have {ndim} dimension(s), got shape {a.shape}")
    if a.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if ndim == 2 and a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} must be finite")
    if a.dtype.kind == "c":
        return a.astype(np.complex128)
    return a.astype(np.float64)


def check_even_order(r, name="r"):
    """Moment order r: an even integer >= 2."""
    if isinstance(r, bool) or not isinstance(r, numbers.Integral):
        if isinstance(r, numbers.Real) and float(r).is_integer():
            r = int(r)
        else:
            raise TypeError(f"{name} must be an integer, got {r!r}")
    r = int(r)
    if r < 2 or r % 2:
        raise ValueError(f"{name}={r} is invalid. Let r be even (r >= 2 and r % 2 == 0)")
    return r


def check_positive(x, name, *, include_zero=False):
    return float(
        check_scalar(
            x,
            name,
            numbers.Real,
            min_val=0.0,
            include_boundaries="left" if include_zero else "neither",
        )
    )


def check_probability(p, name="p"):
    p = float(check_scalar(p, name, numbers.Real, min_val=0.0, max_val=1.0,
                           include_boundaries="neither"))
    return p
