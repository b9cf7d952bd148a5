import math

import numpy as np
import pytest
from scipy import stats

from sparselaw.ensemble import (
    EnsembleConfig,
    EntryLaw,
    MomentConditionError,
    bernoulli_abs_moment,
    derive_seed,
    sample_er,
    sample_general_sparse,
    verify_moment_conditions,
)


def test_config_validation():
    with pytest.raises(ValueError, match="sqrt"):
        EnsembleConfig(100, 40)
    with pytest.raises(ValueError, match="below 1"):
        EnsembleConfig(100, 0.5)
    assert EnsembleConfig(100, 0.5, subcritical=True).q == 0.5
    with pytest.raises(ValueError):
        EnsembleConfig(1, 1)
    with pytest.raises(ValueError):
        EnsembleConfig(100, 2, f_override=-1)
    with pytest.raises(ValueError):
        EnsembleConfig(100, 2, seed=2**64)


def test_config_derived_quantities():
    c = EnsembleConfig(1000, 5)
    assert c.p == pytest.approx(0.025)
    assert c.natural_f == pytest.approx(5 / math.sqrt(0.975))
    assert c.f_exceeds_q
    assert EnsembleConfig(1000, 5, f_override=1.0).f == 1.0
    assert EnsembleConfig.with_q_multiplier(1000, 2).q == pytest.approx(2 * math.sqrt(math.log(1000)))


def test_sample_is_symmetric_and_deterministic():
    c = EnsembleConfig(200, 4, seed=11)
    a, b = sample_er(c), sample_er(c)
    assert np.array_equal(a.rescaled, b.rescaled)
    assert np.array_equal(a.rescaled, a.rescaled.T)
    other = sample_er(c.replace(seed=12))
    assert not np.array_equal(a.adjacency, other.adjacency)


def test_centered_is_rescaled_minus_shift():
    c = EnsembleConfig(100, 3, seed=1)
    s = sample_er(c)
    assert np.allclose(s.centered, s.rescaled - s.f_value / c.n, atol=1e-15)
    # mean of off-diagonal centred entries is near zero
    assert abs(s.centered.mean()) < 3 / c.n


def test_edge_count_binomial():
    c = EnsembleConfig(1000, 5, seed=7, include_diagonal=False)
    s = sample_er(c)
    m = len(s.edges)
    pairs = 1000 * 999 // 2
    lo, hi = stats.binom.interval(0.999999, pairs, c.p)
    assert lo <= m <= hi


def test_no_diagonal_mode():
    s = sample_er(EnsembleConfig(300, 3, seed=2, include_diagonal=False))
    assert np.all(np.diagonal(s.adjacency) == 0)


def test_row_stream_independent_of_diagonal_flag():
    a = sample_er(EnsembleConfig(50, 3, seed=5)).adjacency
    b = sample_er(EnsembleConfig(50, 3, seed=5, include_diagonal=False)).adjacency
    off = ~np.eye(50, dtype=bool)
    assert np.array_equal(a[off], b[off])


def test_isolated_vertices_match_zero_rows():
    c = EnsembleConfig.from_p(2000, 0.5 * math.log(2000) / 2000, include_diagonal=False,
                              subcritical=True, seed=3)
    s = sample_er(c)
    zero_rows = np.flatnonzero(~s.adjacency.any(axis=1))
    assert np.array_equal(s.isolated_vertices(), zero_rows)
    assert sum(len(cmp) for cmp in s.components()) == c.n


def test_f_override_shifts_mean():
    base = EnsembleConfig(100, 3, seed=4)
    over = base.replace(f_override=1.0)
    a, b = sample_er(base), sample_er(over)
    shift = (base.natural_f - 1.0) / 100
    assert np.allclose(a.rescaled - b.rescaled, shift)
    assert np.allclose(a.centered, b.centered)


def test_moment_conditions_bernoulli():
    c = EnsembleConfig(1000, 5)
    report = verify_moment_conditions(c, 8)
    assert all(r.passed for r in report)
    assert report[0].moment == pytest.approx(1 / 1000)
    n, p = 10, 0.3
    x = np.array([(1 - p), -p]) / math.sqrt(p * (1 - p) * n)
    w = np.array([p, 1 - p])
    assert bernoulli_abs_moment(n, p, 5) == pytest.approx(w @ np.abs(x) ** 5, rel=1e-13)


def test_entry_laws():
    law = EntryLaw.two_point(100)
    law.check(100, 10)
    with pytest.raises(MomentConditionError) as exc:
        EntryLaw.custom([1.0, -0.5], [0.5, 0.5]).check(100, 2)
    assert exc.value.condition == "ii"
    heavy = EntryLaw.custom([3 / 10, -3 / 10, 0.0], [1 / 18, 1 / 18, 8 / 9])
    with pytest.raises(MomentConditionError) as exc:
        heavy.check(100, 9)
    assert exc.value.condition == "iii"


def test_general_sample_two_point():
    c = EnsembleConfig(64, 8, seed=9)
    s = sample_general_sparse(c, EntryLaw.two_point(64))
    off = s.centered[~np.eye(64, dtype=bool)]
    assert set(np.round(np.abs(off) * 8, 12)) == {1.0}
    assert s.adjacency is None


def test_general_sample_bernoulli_matches_er():
    c = EnsembleConfig(80, 3, seed=1)
    law = EntryLaw.centered_bernoulli(80, c.p)
    assert np.array_equal(sample_general_sparse(c, law).rescaled, sample_er(c).rescaled)


def test_derive_seed_distinct():
    seeds = {derive_seed(1, t) for t in range(1000)}
    assert len(seeds) == 1000
    assert derive_seed(1, 5) == derive_seed(1, 5)
