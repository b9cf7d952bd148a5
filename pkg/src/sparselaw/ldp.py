"""Large-deviation bounds for sparse random vectors and two independent checks.

The four calculators bound L^r norms of linear forms, centred squares,
bilinear forms with independent vectors, and off-diagonal quadratic forms
in variables ``X_i`` with ``E X_i = 0`` and ``E|X_i|^k <= 1/(N q^(k-2))``.
``exact_lr_enumerate`` and ``monte_carlo_lr`` evaluate the norms themselves
for centred, rescaled Bernoulli variables.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_coefficients, check_even_order
from .ensemble import bernoulli_abs_moment, derive_seed

KINDS = ("linear", "squares", "bilinear", "quadratic")
STIRLING_EXACT_MAX = 64
ENUM_MAX_N = {"linear": 14, "squares": 14, "quadratic": 14, "bilinear": 10}
ENUM_MAX_R = 16
MC_MAX_R = 12
MC_MIN_SAMPLES = 10_000


def _stirling_table(n):
    table = [[0] * (n + 1) for _ in range(n + 1)]
    table[0][0] = 1
    for r in range(1, n + 1):
        for k in range(1, r + 1):
            table[r][k] = k * table[r - 1][k] + table[r - 1][k - 1]
    return table


_STIRLING = _stirling_table(STIRLING_EXACT_MAX)


def stirling2(r, k):
    """Stirling number of the second kind, exact (Python integers).

    Only ``0 <= k <= r <= 64`` is supported; use :func:`log_stirling2_upper`
    beyond that.
    """
    if isinstance(r, bool) or isinstance(k, bool):
        raise TypeError("r and k must be integers")
    r, k = int(r), int(k)
    if not 0 <= k <= r:
        raise ValueError(f"need 0 <= k <= r, got r={r}, k={k}")
    if r > STIRLING_EXACT_MAX:
        raise ValueError(f"exact Stirling numbers are limited to r <= {STIRLING_EXACT_MAX}")
    return _STIRLING[r][k]


def log_stirling2_upper(r, k):
    """Log of ``C(r,k) k^(r-k) / 2``, an upper bound for ``S(r,k)`` when ``k < r``."""
    if not 1 <= k <= r:
        raise ValueError(f"need 1 <= k <= r, got r={r}, k={k}")
    log_binom = math.lgamma(r + 1) - math.lgamma(k + 1) - math.lgamma(r - k + 1)
    return log_binom + (r - k) * math.log(k) - math.log(2.0)


def _log_stirling(r, k):
    if r <= STIRLING_EXACT_MAX:
        return math.log(_STIRLING[r][k])
    return log_stirling2_upper(r, k)


def log_R(r, gamma, psi):
    """``log R_r(gamma, psi)`` with ``R_r = sum_{k=1}^{r/2} S(r,k) gamma^(2k) psi^(r-2k)``."""
    r = check_even_order(r)
    if gamma < 0 or psi < 0:
        raise ValueError("gamma and psi must be nonnegative")
    if gamma == 0:
        return -math.inf
    lg = math.log(gamma)
    lp = math.log(psi) if psi > 0 else -math.inf
    logs = []
    for k in range(1, r // 2 + 1):
        if r - 2 * k and lp == -math.inf:
            continue
        tail = (r - 2 * k) * lp if r - 2 * k else 0.0
        logs.append(_log_stirling(r, k) + 2 * k * lg + tail)
    top = max(logs)
    return top + math.log(math.fsum(math.exp(x - top) for x in logs))


def R_r(r, gamma, psi):
    """``R_r(gamma, psi)`` (may overflow to ``inf`` for huge arguments)."""
    r = check_even_order(r)
    if r <= STIRLING_EXACT_MAX and gamma >= 0 and psi >= 0:
        try:
            terms = [_STIRLING[r][k] * gamma ** (2 * k) * psi ** (r - 2 * k)
                     for k in range(1, r // 2 + 1)]
            total = math.fsum(terms)
        except OverflowError:
            total = math.inf
        # direct summation is exact-ish when nothing over/underflows
        if math.isfinite(total) and (total == 0 or total > 1e-290):
            if total > 0 or gamma == 0:
                return total
    lr = log_R(r, gamma, psi)
    if lr == -math.inf:
        return 0.0
    return math.exp(lr) if lr < 709.0 else math.inf


def _log_plus(psi, gamma):
    if psi == 0:
        return 0.0
    if gamma == 0:
        return math.inf
    return max(math.log(psi / gamma), 0.0)


def _check_gp(gamma, psi):
    if gamma < 0 or psi < 0 or not (math.isfinite(gamma) and math.isfinite(psi)):
        raise ValueError(f"gamma and psi must be finite and nonnegative, got {gamma}, {psi}")


def bound_linear(r, gamma, psi):
    r = check_even_order(r)
    _check_gp(gamma, psi)
    if gamma == 0 and psi == 0:
        return 0.0
    pref = max(2 * r / (1 + 2 * _log_plus(psi, gamma)), 2.0)
    return pref * max(gamma, psi)


def bound_squares(r, q, N, max_abs_a):
    r = check_even_order(r)
    if not 1 <= q <= math.sqrt(N) * (1 + 1e-12):
        raise ValueError(f"requires 1 <= q <= sqrt(N), got q={q}, N={N}")
    if max_abs_a < 0:
        raise ValueError("max_abs_a must be nonnegative")
    x = r / q**2
    return 2 * (1 + 2 * q**2 / N) * max_abs_a * max(x, math.sqrt(x))


def bound_bilinear(r, gamma, psi):
    r = check_even_order(r)
    _check_gp(gamma, psi)
    if gamma == 0 and psi == 0:
        return 0.0
    pref = max(2 * r / (1 + _log_plus(psi, gamma)), 2.0)
    return pref**2 * max(gamma, psi)


def bound_quadratic(r, gamma, psi):
    r = check_even_order(r)
    _check_gp(gamma, psi)
    if gamma == 0 and psi == 0:
        return 0.0
    pref = max(4 * r / (1 + _log_plus(psi, gamma)), 4.0)
    return pref**2 * max(gamma, psi)


def derive_gamma_psi(coefficients, N, q, kind):
    """Smallest admissible ``(gamma, psi)`` for the given coefficients.

    Squares instances only use ``max|a|``; ``gamma`` is then reported as the
    same quantity as for a linear form.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")
    if q <= 0:
        raise ValueError("q must be positive")
    if kind in ("linear", "squares"):
        a = np.abs(check_coefficients(coefficients, ndim=1))
        gamma = math.sqrt(math.fsum(a * a) / N)
        psi = float(a.max()) / q
        return gamma, psi
    a = np.abs(check_coefficients(coefficients, ndim=2))
    if kind == "quadratic":
        a = a.copy()
        np.fill_diagonal(a, 0.0)
    a2 = a * a
    gamma = math.sqrt(max(a2.sum(axis=1).max(), a2.sum(axis=0).max()) / N)
    psi = float(a.max()) / q**2
    return gamma, psi


@dataclass(frozen=True)
class LdpInstance:
    """One large-deviation instance.

    ``gamma``/``psi`` default to the tight values from
    :func:`derive_gamma_psi`; supplied values must dominate them.
    """

    kind: str
    coefficients: np.ndarray = field(repr=False)
    N: int
    q: float
    r: int
    gamma: float | None = None
    psi: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        ndim = 1 if self.kind in ("linear", "squares") else 2
        a = check_coefficients(self.coefficients, ndim=ndim)
        if a.shape[0] != self.N:
            raise ValueError(f"coefficients have length {a.shape[0]}, expected N={self.N}")
        object.__setattr__(self, "coefficients", a)
        object.__setattr__(self, "r", check_even_order(self.r))
        if not 1 <= self.q <= math.sqrt(self.N) * (1 + 1e-12):
            raise ValueError(f"requires 1 <= q <= sqrt(N), got q={self.q}, N={self.N}")
        g0, p0 = derive_gamma_psi(a, self.N, self.q, self.kind)
        gamma = g0 if self.gamma is None else float(self.gamma)
        psi = p0 if self.psi is None else float(self.psi)
        if gamma < g0 * (1 - 1e-12) or psi < p0 * (1 - 1e-12):
            raise ValueError(
                f"supplied gamma/psi ({gamma}, {psi}) are below the admissible "
                f"values ({g0}, {p0})"
            )
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "psi", psi)

    @classmethod
    def from_p(cls, kind, coefficients, p, r, **kw):
        """Instance with ``q = sqrt(pN)``."""
        n = np.asarray(coefficients).shape[0]
        return cls(kind, coefficients, n, math.sqrt(p * n), r, **kw)

    @property
    def bound(self):
        if self.kind == "linear":
            return bound_linear(self.r, self.gamma, self.psi)
        if self.kind == "squares":
            return bound_squares(self.r, self.q, self.N, float(np.abs(self.coefficients).max()))
        if self.kind == "bilinear":
            return bound_bilinear(self.r, self.gamma, self.psi)
        return bound_quadratic(self.r, self.gamma, self.psi)

    def scaled(self, c):
        return LdpInstance(self.kind, self.coefficients * c, self.N, self.q, self.r,
                           self.gamma * c, self.psi * c)

    def to_dict(self):
        return {
            "kind": self.kind,
            "N": self.N,
            "q": self.q,
            "r": self.r,
            "gamma": self.gamma,
            "psi": self.psi,
            "bound": self.bound,
        }


def bernoulli_atoms(N, p):
    """Atoms ``(value if B=1, value if B=0)`` of ``X = (B - p)/sqrt(p(1-p)N)``."""
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    s = math.sqrt(p * (1 - p) * N)
    return (1 - p) / s, -p / s


def centered_square_atoms(N, p):
    """Atoms of ``X^2 - E X^2`` in closed form (both vanish exactly at p = 1/2)."""
    return (1 - 2 * p) / (p * N), (2 * p - 1) / ((1 - p) * N)


def hypotheses_hold(instance, p):
    """Whether centred Bernoulli(p) variables meet the moment conditions for this instance."""
    n, q = instance.N, instance.q
    for k in range(2, instance.r + 1):
        if bernoulli_abs_moment(n, p, k) > (1 + 1e-12) / (n * q ** (k - 2)):
            return False
    return True


def _form_values(kind, a, X, Y=None):
    """Form value for each row of ``X`` (and ``Y``).

    For ``squares`` the rows of ``X`` already hold ``X_i^2 - E X_i^2``.
    """
    if kind in ("linear", "squares"):
        return X @ a
    if kind == "bilinear":
        return np.einsum("si,si->s", X @ a, Y)
    a0 = a.copy()
    np.fill_diagonal(a0, 0.0)
    return np.einsum("si,si->s", X @ a0, X)


def _outcomes(n, p):
    bits = np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int64)
    ones = bits.sum(axis=1)
    probs = np.exp(ones * math.log(p) + (n - ones) * math.log1p(-p))
    return bits, probs


def exact_lr_enumerate(instance, p):
    """Exact L^r norm of the instance's form by summing over all outcomes."""
    kind, n, r = instance.kind, instance.N, instance.r
    if n > ENUM_MAX_N[kind]:
        raise ValueError(
            f"enumeration budget exceeded: N={n} > {ENUM_MAX_N[kind]} for kind {kind!r}"
        )
    if r > ENUM_MAX_R:
        raise ValueError(f"enumeration supports r <= {ENUM_MAX_R}, got {r}")
    hi, lo = centered_square_atoms(n, p) if kind == "squares" else bernoulli_atoms(n, p)
    bits, probs = _outcomes(n, p)
    X = np.where(bits == 1, hi, lo)
    a = instance.coefficients
    if kind == "bilinear":
        vals = np.abs((X @ a) @ X.T) ** r
        w = np.outer(probs, probs)
        total = math.fsum((vals * w).ravel())
    else:
        vals = np.abs(_form_values(kind, a, X)) ** r
        total = math.fsum(vals * probs)
    return total ** (1.0 / r)


def _mc_block(kind, a, n, p, r, size, seed):
    rng = np.random.Generator(np.random.Philox(seed))
    hi, lo = centered_square_atoms(n, p) if kind == "squares" else bernoulli_atoms(n, p)
    X = np.where(rng.random((size, n)) < p, hi, lo)
    Y = np.where(rng.random((size, n)) < p, hi, lo) if kind == "bilinear" else None
    v = np.abs(_form_values(kind, a, X, Y)) ** r
    return math.fsum(v), math.fsum(v * v)


@dataclass(frozen=True)
class MonteCarloResult:
    estimate: float
    std_error: float
    samples: int


def monte_carlo_lr(instance, p, samples, seed, block_size=10_000, n_jobs=1):
    """Monte Carlo estimate of the L^r norm with a delta-method standard error.

    Samples are split into fixed blocks seeded from ``seed``; the result does
    not depend on ``n_jobs``.
    """
    r = instance.r
    if r > MC_MAX_R:
        raise ValueError(f"Monte Carlo supports r <= {MC_MAX_R}, got {r}")
    samples = int(samples)
    if samples < MC_MIN_SAMPLES:
        raise ValueError(f"samples must be at least {MC_MIN_SAMPLES}, got {samples}")
    sizes = [block_size] * (samples // block_size)
    if samples % block_size:
        sizes.append(samples % block_size)
    jobs = (
        delayed(_mc_block)(instance.kind, instance.coefficients, instance.N, p, r, size,
                           derive_seed(seed, b))
        for b, size in enumerate(sizes)
    )
    parts = Parallel(n_jobs=n_jobs)(jobs)
    s1 = math.fsum(x for x, _ in parts)
    s2 = math.fsum(y for _, y in parts)
    mean = s1 / samples
    var = max(s2 / samples - mean * mean, 0.0) * samples / (samples - 1)
    if mean == 0:
        return MonteCarloResult(0.0, 0.0, samples)
    est = mean ** (1.0 / r)
    se = est / (r * mean) * math.sqrt(var / samples)
    return MonteCarloResult(est, se, samples)


class LargeDeviationBound(BaseEstimator):
    """Analytic L^r bound for a coefficient vector or matrix.

    ``fit`` derives the tight ``gamma_`` and ``psi_`` and the bound
    ``bound_``. ``q`` defaults to ``sqrt(p N)`` when only ``p`` is set.

    Parameters
    ----------
    kind : {"linear", "squares", "bilinear", "quadratic"}
    r : even int, default=4
    q : float or None
    p : float or None
    """

    def __init__(self, kind="linear", r=4, q=None, p=None):
        self.kind = kind
        self.r = r
        self.q = q
        self.p = p

    def _q(self, n):
        if self.q is not None:
            return float(self.q)
        if self.p is None:
            raise ValueError("set either q or p")
        return math.sqrt(self.p * n)

    def fit(self, X, y=None):
        a = np.asarray(X)
        n = a.shape[0] if a.ndim else 0
        self.instance_ = LdpInstance(self.kind, a, n, self._q(n), self.r)
        self.gamma_ = self.instance_.gamma
        self.psi_ = self.instance_.psi
        self.bound_ = self.instance_.bound
        self.n_features_in_ = n
        return self

    def exact(self, p=None):
        check_is_fitted(self, "instance_")
        return exact_lr_enumerate(self.instance_, self._p(p))

    def monte_carlo(self, samples=MC_MIN_SAMPLES, seed=0, p=None, n_jobs=1):
        check_is_fitted(self, "instance_")
        return monte_carlo_lr(self.instance_, self._p(p), samples, seed, n_jobs=n_jobs)

    def _p(self, p):
        if p is not None:
            return p
        if self.p is not None:
            return self.p
        return self.instance_.q**2 / self.instance_.N
