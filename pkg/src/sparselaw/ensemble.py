"""Sparse random matrices: Erdos-Renyi sampling and general discrete entry laws.

Sampling is counter-based: entry ``(i, j)`` with ``j >= i`` is the
``(j - i)``-th uniform of a Philox stream keyed by ``seed`` whose counter
carries the row index ``i`` in its top word. Rows can therefore be filled
in any order, or in parallel, with identical results.
"""

import dataclasses
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

_SEED_LIMIT = 2**64
_Q_SLACK = 1e-12


def row_uniforms(seed, row, count):
    """``count`` uniforms in [0, 1) for ``row`` of the sample keyed by ``seed``."""
    bitgen = np.random.Philox(key=int(seed), counter=int(row) << 192)
    return np.random.Generator(bitgen).random(count)


def derive_seed(master_seed, *path):
    """Deterministic 64-bit child seed for ``(master_seed, *path)``."""
    seq = np.random.SeedSequence([int(master_seed), *map(int, path)])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class EnsembleConfig:
    """Parameters of a sparse matrix law.

    Parameters
    ----------
    n : int
        Matrix dimension, at least 2.
    q : float
        Sparsity parameter, ``q = sqrt(p n)``; ``1 <= q <= sqrt(n)`` unless
        ``subcritical`` is set.
    f_override : float or None
        Mean-shift magnitude. ``None`` uses the Erdos-Renyi value
        ``q / sqrt(1 - p)``.
    include_diagonal : bool
        Sample diagonal entries (self-loops). ``False`` gives a simple graph.
    seed : int
        Unsigned 64-bit seed.
    subcritical : bool
        Allow ``q < 1`` (``p`` below the critical scale).
    """

    n: int
    q: float
    f_override: float | None = None
    include_diagonal: bool = True
    seed: int = 0
    subcritical: bool = False

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n:
            raise TypeError(f"n must be an integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "q", float(self.q))
        if self.n < 2:
            raise ValueError(f"N must be at least 2, got {self.n}")
        if not math.isfinite(self.q) or self.q <= 0:
            raise ValueError(f"q must be positive and finite, got {self.q}")
        root_n = math.sqrt(self.n)
        if self.q > root_n * (1 + _Q_SLACK):
            raise ValueError(
                f"q={self.q:g} exceeds sqrt(N)={root_n:g}: the ensemble requires "
                "1 <= q <= sqrt(N)"
            )
        if self.q < 1 and not self.subcritical:
            raise ValueError(
                f"q={self.q:g} is below 1: the ensemble requires 1 <= q <= sqrt(N) "
                "(pass subcritical=True for the subcritical regime)"
            )
        if self.f_override is not None:
            f = float(self.f_override)
            if not math.isfinite(f) or f < 0:
                raise ValueError(f"f_override must be nonnegative, got {f}")
            object.__setattr__(self, "f_override", f)
        if not 0 <= int(self.seed) < _SEED_LIMIT:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        object.__setattr__(self, "seed", int(self.seed))

    @classmethod
    def from_p(cls, n, p, **kwargs):
        """Configuration with edge probability ``p`` set directly."""
        q = math.sqrt(p * n)
        kwargs.setdefault("subcritical", q < 1)
        return cls(n=n, q=q, **kwargs)

    @classmethod
    def with_q_multiplier(cls, n, multiplier, **kwargs):
        """``q = multiplier * sqrt(log n)``."""
        return cls(n=n, q=multiplier * math.sqrt(math.log(n)), **kwargs)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    @property
    def p(self):
        return self.q * self.q / self.n

    @property
    def scale(self):
        """Normalisation ``sqrt(p (1 - p) n)`` of the adjacency matrix."""
        p = self.p
        return math.sqrt(p * (1.0 - p) * self.n)

    @property
    def natural_f(self):
        """Mean shift of the rescaled Erdos-Renyi matrix, ``q / sqrt(1 - p)``."""
        return self.q / math.sqrt(1.0 - self.p)

    @property
    def f(self):
        if self.f_override is not None:
            return self.f_override
        return self.natural_f

    @property
    def f_exceeds_q(self):
        return self.f > self.q

    def check_bernoulli(self):
        """Raise unless ``p = q^2/N`` lies strictly inside (0, 1)."""
        p = self.p
        if not 0.0 < p < 1.0:
            raise ValueError(
                f"p = q^2/N = {p!r} out of range: Bernoulli sampling requires 0 < p < 1"
            )
        return self

    def to_dict(self):
        return {
            "n": self.n,
            "q": self.q,
            "p": self.p,
            "f": self.f if self.p < 1 or self.f_override is not None else None,
            "f_override": self.f_override,
            "include_diagonal": self.include_diagonal,
            "seed": self.seed,
            "subcritical": self.subcritical,
        }


class SampleBundle:
    """One realisation of a sparse matrix.

    ``rescaled`` is the matrix A and ``centered`` the matrix
    ``H = A - f e e*``. Both are computed on first access and cached;
    ``adjacency`` is the 0/1 matrix for graph samples and ``None`` for
    samples drawn from a general entry law.
    """

    def __init__(self, config, f_value, *, adjacency=None, rescaled=None, law=None):
        if adjacency is None and rescaled is None:
            raise ValueError("a sample needs an adjacency or a rescaled matrix")
        self.config = config
        self.f_value = float(f_value)
        self.adjacency = adjacency
        self.law = law
        if rescaled is not None:
            self.__dict__["rescaled"] = rescaled

    @property
    def n(self):
        return self.config.n

    @property
    def is_graph(self):
        return self.adjacency is not None

    @property
    def block_diagonal_by_components(self):
        """True when A is the plain rescaling of the adjacency matrix."""
        return self.is_graph and self.config.f_override is None

    @cached_property
    def rescaled(self):
        scale = self.config.scale
        if self.config.f_override is None:
            return self.adjacency / scale
        natural = self.adjacency / scale - self.config.natural_f / self.n
        return natural + self.f_value / self.n

    @cached_property
    def centered(self):
        return self.rescaled - self.f_value / self.n

    @cached_property
    def edges(self):
        """Edge list as an ``(m, 2)`` array of ``i <= j`` pairs, 0-indexed."""
        if self.adjacency is None:
            raise ValueError("sample has no graph structure")
        return np.argwhere(np.triu(self.adjacency)).astype(np.int64)

    @cached_property
    def degrees(self):
        """Vertex degrees, self-loops excluded."""
        e = self.edges
        off = e[e[:, 0] != e[:, 1]]
        return np.bincount(off.ravel(), minlength=self.n)

    def isolated_vertices(self):
        return np.flatnonzero(self.degrees == 0)

    def adjacency_sparse(self):
        e = self.edges
        data = np.ones(len(e), dtype=np.float64)
        upper = sparse.coo_matrix((data, (e[:, 0], e[:, 1])), shape=(self.n, self.n))
        return (upper + sparse.triu(upper, k=1).T).tocsr()

    def components(self):
        """Connected components as a list of sorted index arrays."""
        count, labels = csgraph.connected_components(self.adjacency_sparse(), directed=False)
        order = np.argsort(labels, kind="stable")
        bounds = np.searchsorted(labels[order], np.arange(count + 1))
        return [order[bounds[c]:bounds[c + 1]] for c in range(count)]

    def block(self, index):
        """Principal submatrix of A on ``index``, without materialising A."""
        if "rescaled" in self.__dict__ or not self.block_diagonal_by_components:
            return self.rescaled[np.ix_(index, index)]
        return self.adjacency[np.ix_(index, index)] / self.config.scale


def _fill_rows(config, row_fn, dtype):
    n = config.n
    out = np.zeros((n, n), dtype=dtype)
    for i in range(n):
        values = row_fn(row_uniforms(config.seed, i, n - i))
        if not config.include_diagonal:
            values[0] = 0
        out[i, i:] = values
    # mirror the strict upper triangle
    lower = np.triu(out, 1).T
    out += lower
    return out


def sample_er(config):
    """Sample the Erdos-Renyi adjacency matrix and its rescalings."""
    config.check_bernoulli()
    p = config.p
    adjacency = _fill_rows(config, lambda u: (u < p).astype(np.uint8), np.uint8)
    return SampleBundle(config, config.f, adjacency=adjacency)


@dataclass(frozen=True)
class MomentCheck:
    k: int
    moment: float
    bound: float
    passed: bool


def bernoulli_abs_moment(n, p, k):
    """Exact ``E|H|^k`` for ``H = (B - p) / sqrt(p (1 - p) n)``."""
    return (p * (1 - p) ** k + (1 - p) * p**k) / (p * (1 - p) * n) ** (k / 2)


def verify_moment_conditions(config, k_max):
    """Check the moment conditions of a centred, rescaled Bernoulli entry.

    For ``k = 2`` the variance must equal ``1/N``; for ``k >= 3`` the
    absolute moment must not exceed ``1 / (N q^(k-2))``.
    """
    if k_max < 2:
        raise ValueError(f"k_max must be at least 2, got {k_max}")
    config.check_bernoulli()
    n, q, p = config.n, config.q, config.p
    report = []
    for k in range(2, k_max + 1):
        moment = bernoulli_abs_moment(n, p, k)
        if k == 2:
            bound = 1.0 / n
            passed = math.isclose(moment, bound, rel_tol=1e-12)
        else:
            bound = 1.0 / (n * q ** (k - 2))
            passed = moment <= bound * (1 + 1e-12)
        report.append(MomentCheck(k, moment, bound, passed))
    return report


class MomentConditionError(ValueError):
    """An entry law violates the sparse-matrix moment conditions."""

    def __init__(self, message, condition, k):
        super().__init__(message)
        self.condition = condition
        self.k = k


@dataclass(frozen=True)
class EntryLaw:
    """Finite discrete law of an off-diagonal entry ``H_ij``.

    ``kind`` is one of ``"centered-bernoulli"``, ``"two-point"`` or
    ``"custom-discrete"``. Atoms are drawn by inverse CDF from the same
    uniforms used by :func:`sample_er`, with the first atom taking the
    lowest uniforms.
    """

    kind: str
    values: tuple
    probs: tuple
    p: float | None = None

    def __post_init__(self):
        if len(self.values) != len(self.probs) or not self.values:
            raise ValueError("values and probs must be non-empty and of equal length")
        probs = np.asarray(self.probs, dtype=np.float64)
        if np.any(probs < 0) or not math.isclose(probs.sum(), 1.0, rel_tol=0, abs_tol=1e-12):
            raise ValueError("probs must be nonnegative and sum to 1")

    @classmethod
    def centered_bernoulli(cls, n, p):
        s = math.sqrt(p * (1 - p) * n)
        return cls("centered-bernoulli", ((1 - p) / s, -p / s), (p, 1 - p), p=p)

    @classmethod
    def two_point(cls, n):
        v = 1 / math.sqrt(n)
        return cls("two-point", (v, -v), (0.5, 0.5))

    @classmethod
    def custom(cls, values, probs):
        return cls("custom-discrete", tuple(map(float, values)), tuple(map(float, probs)))

    def moment(self, k, absolute=True):
        v = np.asarray(self.values, dtype=np.float64)
        w = np.asarray(self.probs, dtype=np.float64)
        return math.fsum(w * (np.abs(v) ** k if absolute else v**k))

    def check(self, n, q, k_max=8):
        """Raise :class:`MomentConditionError` at the first violated condition."""
        mean = self.moment(1, absolute=False)
        scale = max(abs(x) for x in self.values)
        if abs(mean) > 1e-12 * scale:
            raise MomentConditionError(
                f"law violates condition (ii): E H = {mean:.3g} is not zero", "ii", 1
            )
        var = self.moment(2)
        if not math.isclose(var, 1.0 / n, rel_tol=1e-9):
            raise MomentConditionError(
                f"law violates condition (ii): E H^2 = {var:.6g} != 1/N = {1 / n:.6g}",
                "ii",
                2,
            )
        for k in range(3, k_max + 1):
            mk = self.moment(k)
            bound = 1.0 / (n * q ** (k - 2))
            if mk > bound * (1 + 1e-9):
                raise MomentConditionError(
                    f"law violates condition (iii) at k={k}: "
                    f"E|H|^{k} = {mk:.6g} > {bound:.6g}",
                    "iii",
                    k,
                )
        return self

    def draw(self, u):
        cdf = np.cumsum(self.probs)
        idx = np.searchsorted(cdf, u, side="right")
        return np.minimum(idx, len(self.values) - 1)


def sample_general_sparse(config, entry_law, k_max=8):
    """Sample ``A = H + f e e*`` with i.i.d. entries of ``H`` drawn from a law.

    The centred-Bernoulli law reproduces :func:`sample_er` exactly for the
    same configuration.
    """
    entry_law.check(config.n, config.q, k_max)
    if entry_law.kind == "centered-bernoulli":
        if not math.isclose(entry_law.p, config.p, rel_tol=1e-12):
            raise ValueError(
                f"law has p={entry_law.p} but the configuration implies p={config.p}"
            )
        return sample_er(config)
    values = np.asarray(entry_law.values, dtype=np.float64)
    centered = _fill_rows(config, lambda u: values[entry_law.draw(u)], np.float64)
    f = config.f_override if config.f_override is not None else 0.0
    rescaled = centered + f / config.n
    bundle = SampleBundle(config, f, rescaled=rescaled, law=entry_law)
    bundle.__dict__["centered"] = centered
    return bundle
