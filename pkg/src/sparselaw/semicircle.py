"""Semicircle law: Stieltjes transform, stability, error parameter and constants.

Everything here is deterministic and uses natural logarithms.
"""

import math
from dataclasses import dataclass

import numpy as np

#: Universal constant of the local law tail bound.
C_STAR = 1000.0


@dataclass(frozen=True)
class SpectralParam:
    """Spectral parameter ``z = E + i*eta`` with ``eta > 0``."""

    E: float
    eta: float

    def __post_init__(self):
        if not (math.isfinite(self.E) and math.isfinite(self.eta)):
            raise ValueError("spectral parameter must be finite")
        if self.eta <= 0:
            raise ValueError(f"eta must be positive, got {self.eta}")

    @classmethod
    def from_complex(cls, z):
        z = complex(z)
        return cls(z.real, z.imag)

    @property
    def z(self):
        return complex(self.E, self.eta)

    def in_strip(self, n):
        """Membership in ``{N^-1 < eta <= 1}``."""
        return 1.0 / n < self.eta <= 1.0

    def __complex__(self):
        return self.z


def as_complex(z):
    """Accept a SpectralParam, a complex scalar or an array of them."""
    if isinstance(z, SpectralParam):
        return z.z
    if np.ndim(z) == 0:
        return complex(z)
    return np.asarray(z, dtype=np.complex128)


def _roots(z):
    z = np.asarray(z, dtype=np.complex128)
    w = np.sqrt(z * z - 4.0)
    # align w with z so that -(z + w)/2 is the large root without cancellation
    flip = (z.real * w.real + z.imag * w.imag) < 0
    w = np.where(flip, -w, w)
    big = -(z + w) / 2.0
    small = 1.0 / big
    upper = small.imag > 0
    m = np.where(upper, small, big)
    m_tilde = np.where(upper, big, small)
    return m, m_tilde


def _scalar_or_array(x, scalar):
    return complex(x) if scalar else x


def stieltjes_m(z):
    """Stieltjes transform of the semicircle law.

    Root of ``m**2 + z*m + 1 = 0`` with ``Im m > 0``. Accepts scalars,
    :class:`SpectralParam` or complex arrays.
    """
    zc = as_complex(z)
    scalar = np.ndim(zc) == 0
    if np.any(np.imag(zc) <= 0):
        raise ValueError("stieltjes_m requires Im z > 0")
    m, _ = _roots(zc)
    return _scalar_or_array(m, scalar)


def other_root(z):
    """The second root of ``x**2 + z*x + 1 = 0`` (the one with ``Im < 0``)."""
    zc = as_complex(z)
    scalar = np.ndim(zc) == 0
    if np.any(np.imag(zc) <= 0):
        raise ValueError("other_root requires Im z > 0")
    _, mt = _roots(zc)
    return _scalar_or_array(mt, scalar)


def root_gap_fourth_power(E, eta):
    """Closed form of ``|m - m_tilde|**4`` as a polynomial in (E, eta)."""
    return eta**4 + 2 * E**2 * eta**2 + 8 * eta**2 + E**4 + 16 - 8 * E**2


def stability_gap(s, z):
    """Distance of ``s`` to the nearest root, and the self-consistent residual.

    Returns ``(gap, residual)`` with ``gap = min(|s-m|, |s-m~|)`` and
    ``residual = |s**2 + z*s + 1|``. The bound ``gap <= sqrt(residual)``
    holds for every ``s``. Vectorised over broadcastable ``s`` and ``z``.
    """
    zc = as_complex(z)
    s_arr = np.asarray(s, dtype=np.complex128)
    scalar = s_arr.ndim == 0 and np.ndim(zc) == 0
    m, mt = _roots(zc)
    gap = np.minimum(np.abs(s_arr - m), np.abs(s_arr - mt))
    residual = np.abs(s_arr * s_arr + zc * s_arr + 1.0)
    if scalar:
        return float(gap), float(residual)
    return gap, residual


@dataclass(frozen=True)
class ZetaParams:
    N: int
    r: float
    q: float
    eta: float
    f: float = 0.0

    def __post_init__(self):
        if self.r < 2:
            raise ValueError(f"r must be >= 2, got {self.r}")
        if self.q <= 0:
            raise ValueError(f"q must be positive, got {self.q}")
        if self.eta <= 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if self.f < 0:
            raise ValueError(f"f must be nonnegative, got {self.f}")
        if self.N * self.eta <= 1:
            raise ValueError(
                f"N*eta = {self.N * self.eta} must exceed 1 (log N + log eta > 0)"
            )


@dataclass(frozen=True)
class ZetaValue:
    total: float
    terms: tuple


def zeta(params):
    """Error parameter of the local law and its four summands."""
    N, r, q, eta, f = params.N, params.r, params.q, params.eta, params.f
    n_eta = N * eta
    terms = (
        (r / q**2) ** 0.25,
        r / n_eta ** (1.0 / 6.0),
        r / (math.log(n_eta) * q),
        f / n_eta**0.25,
    )
    return ZetaValue(total=math.fsum(terms), terms=terms)


def zeta_value(N, r, q, eta, f=0.0):
    return zeta(ZetaParams(N, r, q, eta, f)).total


@dataclass(frozen=True)
class ExplicitConstants:
    """C(delta, D) and N_0(delta, D), linear and log forms.

    ``N0`` is ``inf`` whenever it overflows a double.
    """

    C: float
    log_C: float
    N0: float
    log_N0: float
    delta: float
    D: float


def _log_k(delta, D, c_star):
    # log(4 C* e^{5+D} / delta)
    return math.log(4.0 * c_star) + 5.0 + D - math.log(delta)


def explicit_constants(delta, D, c_star=C_STAR):
    if not 0 < delta <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    if D <= 0:
        raise ValueError(f"D must be positive, got {D}")
    log_k = _log_k(delta, D, c_star)
    log_C = 2.0 * log_k
    log_N0 = (math.exp(10.0) * log_k) ** 2
    C = math.exp(log_C) if log_C < 709.0 else math.inf
    N0 = math.exp(log_N0) if log_N0 < 709.0 else math.inf
    return ExplicitConstants(C=C, log_C=log_C, N0=N0, log_N0=log_N0, delta=delta, D=D)


@dataclass(frozen=True)
class ConditionCheck:
    """One inequality ``lhs >= rhs`` (or ``<=``), evaluated in log space."""

    name: str
    relation: str
    log_lhs: float
    log_rhs: float
    passed: bool

    def as_dict(self):
        return {
            "name": self.name,
            "relation": self.relation,
            "log_lhs": self.log_lhs,
            "log_rhs": self.log_rhs,
            "passed": self.passed,
        }


def _ge(name, log_lhs, log_rhs):
    return ConditionCheck(name, ">=", log_lhs, log_rhs, bool(log_lhs >= log_rhs))


def _le(name, log_lhs, log_rhs):
    return ConditionCheck(name, "<=", log_lhs, log_rhs, bool(log_lhs <= log_rhs))


def appendix_conditions(q, f, N, tau, delta, D, c_star=C_STAR):
    """Admissibility conditions for the high-probability local law.

    Each inequality is compared through logarithms of both sides so that
    astronomically large constants never overflow. Returns a list of
    :class:`ConditionCheck`.
    """
    if min(q, N, tau, delta, D) <= 0 or f < 0:
        raise ValueError("appendix_conditions requires positive arguments")
    if N <= 1:
        raise ValueError("N must exceed 1")
    log_n = math.log(N)
    loglog_n = math.log(log_n)
    log_q = math.log(q)
    log_k = _log_k(delta, D, c_star)
    log_big_c = 2.0 * log_k
    log_f = math.log(f) if f > 0 else -math.inf
    consts = explicit_constants(delta, D, c_star)

    return [
        _ge("tau", math.log(tau), -0.5 * loglog_n),
        _ge("condition_q_critical", log_q, log_big_c + 0.5 * loglog_n),
        _ge("condition_q_tau", log_q, log_k - math.log(tau)),
        _le("condition_f", log_f, -log_k + 0.25 * tau * log_n),
        _ge("condition_N_tau", tau * log_n, 6.0 * (log_k + loglog_n)),
        _ge("C", log_q, log_big_c + 0.5 * loglog_n),
        _le("qqq", log_q, 10.0 * loglog_n),
        _ge("N_0", log_n, consts.log_N0),
    ]


def semicircle_density(x):
    x = np.asarray(x, dtype=np.float64)
    return np.sqrt(np.clip(4.0 - x * x, 0.0, None)) / (2.0 * math.pi)


def _semicircle_cdf(x):
    x = min(max(x, -2.0), 2.0)
    return (x * math.sqrt(max(4.0 - x * x, 0.0)) + 4.0 * math.asin(x / 2.0)) / (4.0 * math.pi)


def semicircle_mass(a, b):
    """Semicircle measure of the interval ``[a, b]``."""
    if a > b:
        raise ValueError(f"semicircle_mass requires a <= b, got [{a}, {b}]")
    return _semicircle_cdf(b) - _semicircle_cdf(a)
