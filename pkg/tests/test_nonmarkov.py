import math
from dataclasses import replace

import numpy as np
import pytest

from nmlg import model, nonmarkov
from nmlg.errors import GridError
from nmlg.model import ModelParams, TimeGrid
from conftest import J_HZ

T_MAX = 10e-3
GAMMA_SLOW = 1 / 150e-3


def fine(t_max=T_MAX, n=2001):
    return TimeGrid(0.0, t_max / (n - 1), n)


def test_z_environment_is_divisible():
    r = nonmarkov.divisibility_witness(ModelParams(J_HZ, 0.0), fine())
    assert r.verdict == "divisible" and r.nm_intervals == []
    assert r.witnesses_agree
    assert r.blp_measure == 0.0


def test_default_configuration_is_non_divisible():
    r = nonmarkov.divisibility_witness(ModelParams(J_HZ, math.pi / 3), fine())
    assert r.verdict == "non-divisible"
    # g has period 1/J and is negative on the second half of every period
    period = 1 / J_HZ
    assert len(r.nm_intervals) == 2
    for a, b in r.nm_intervals:
        assert b - a == pytest.approx(period / 2, abs=1e-8)
    assert r.witnesses_agree
    assert r.blp_measure > 0
    assert r.note == ""


def test_intervals_sorted_and_disjoint():
    r = nonmarkov.divisibility_witness(ModelParams(J_HZ, 1.0, 20.0), fine())
    assert r.nm_intervals
    for (a, b), (c, d) in zip(r.nm_intervals, r.nm_intervals[1:]):
        assert a < b < c < d


@pytest.mark.parametrize("gamma", [GAMMA_SLOW, 5.0])
def test_markovian_regime(gamma):
    p = ModelParams(30.0, math.pi / 18, gamma)
    r = nonmarkov.divisibility_witness(p, fine(50e-3, 5001))
    assert r.verdict == "divisible"
    assert r.witnesses_agree
    assert np.all(r.total_rate > 0)
    if gamma == GAMMA_SLOW:
        assert np.all(r.g < gamma / 2)
    assert "exp(-gamma*t)" in r.note


def test_witness_correlation_negative_control():
    r = nonmarkov.divisibility_witness(ModelParams(J_HZ, math.pi / 3), fine())
    corrupted = replace(r, total_rate=-r.total_rate)
    assert not nonmarkov.correlate_witnesses(corrupted)


def test_blp_identical_trajectories():
    p = ModelParams(J_HZ, 0.9)
    g = TimeGrid(0.0, 1e-4, 30)
    a, _ = nonmarkov.evolve_pair(p, g)
    np.testing.assert_array_equal(nonmarkov.blp_from_states(a, a, g.dt), 0.0)
    with pytest.raises(GridError):
        nonmarkov.blp_from_states(a, a[:-1], g.dt)


def test_pair_trace_distance_matches_eta():
    p = ModelParams(J_HZ, 0.6, 4.0)
    g = TimeGrid(0.0, 2e-4, 40)
    a, b = nonmarkov.evolve_pair(p, g, route="oracle")
    d = [nonmarkov.trace_distance(x, y) for x, y in zip(a, b)]
    np.testing.assert_allclose(d, model.trace_distance(p, g.times), atol=1e-13)
    a2, b2 = nonmarkov.evolve_pair(p, g, route="closed")
    np.testing.assert_allclose(np.array(a2), np.array(a), atol=1e-13)


def test_numeric_sigma_converges_to_analytic():
    p = ModelParams(J_HZ, math.pi / 3)
    errs = []
    for n in (201, 401, 801):
        g = fine(2e-3, n)
        a, b = nonmarkov.evolve_pair(p, g)
        num = nonmarkov.blp_from_states(a, b, g.dt)
        errs.append(np.max(np.abs(num - model.sigma_blp(p, g.times))) / np.max(np.abs(model.sigma_blp(p, g.times))))
    assert errs[-1] <= 1e-4
    assert math.log2(errs[0] / errs[1]) >= 1.9
    assert math.log2(errs[1] / errs[2]) >= 1.9


def test_trace_distance_monotone_where_rate_nonnegative():
    p = ModelParams(J_HZ, 0.4, 10.0)
    t = np.linspace(0, T_MAX, 20001)
    rate = nonmarkov.total_rate(p, t)
    d = model.trace_distance(p, t)
    steps = np.diff(d)
    both = (rate[:-1] >= 0) & (rate[1:] >= 0)
    assert np.all(steps[both] <= 1e-15)


def test_blp_equivalent_to_divisibility_at_zero_gamma():
    t = np.linspace(0, T_MAX, 1001)
    for th in np.linspace(0, math.pi / 2, 13):
        p = ModelParams(J_HZ, th)
        backflow = np.nan_to_num(model.sigma_blp(p, t)) > 1e-9
        negative = np.nan_to_num(nonmarkov.total_rate(p, t)) < -1e-9
        assert backflow.any() == negative.any()
        np.testing.assert_array_equal(backflow, negative)


def test_mirror_symmetric_intervals():
    for th in (0.2, 0.5, math.pi / 3):
        a = nonmarkov.divisibility_witness(ModelParams(J_HZ, th), fine())
        b = nonmarkov.divisibility_witness(ModelParams(J_HZ, math.pi / 2 - th), fine())
        assert len(a.nm_intervals) == len(b.nm_intervals)
        np.testing.assert_allclose(a.nm_intervals, b.nm_intervals, atol=1e-8)


def test_singular_points_at_quarter_pi():
    p = ModelParams(J_HZ, math.pi / 4)
    poles = nonmarkov.singular_times(p, 0.0, T_MAX)
    assert poles[0] == pytest.approx(0.5 / J_HZ)
    assert len(poles) == int(T_MAX * J_HZ + 0.5)
    assert nonmarkov.singular_times(ModelParams(J_HZ, 1.0), 0.0, T_MAX) == []
    r = nonmarkov.divisibility_witness(p, fine())
    assert r.singular_times == poles
    assert r.verdict == "non-divisible"


def test_markovianity_map():
    t = np.linspace(1e-4, 50e-3, 500)
    table = nonmarkov.markovianity_map(30.0, GAMMA_SLOW, [math.pi / 18, math.pi / 2, math.pi / 4], t)
    assert table.shape == (3, 500)
    assert table[0].all() and table[1].all()
    assert not table[2].all()


def test_blp_measure_integrates_positive_part():
    assert nonmarkov.blp_measure(np.array([-1.0, 1.0, 1.0, -1.0]), 0.5) == pytest.approx(1.0)
    assert nonmarkov.blp_measure(np.array([np.nan, 2.0, 2.0]), 1.0) == pytest.approx(3.0)


def test_summary_text():
    r = nonmarkov.divisibility_witness(ModelParams(J_HZ, math.pi / 3), fine(n=101))
    s = r.summary()
    assert s.startswith("verdict=non-divisible")
    assert "witnesses_agree=true" in s
