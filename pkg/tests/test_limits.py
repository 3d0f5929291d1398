import math

import numpy as np
import pytest

from oklim import green, limits, local
from oklim.errors import CoincidentPoints, UnequalMasses2D

PI = math.pi


def config(dim, entries):
    return limits.PointConfiguration(dim, entries)


def test_point_configuration_validation():
    with pytest.raises(ValueError):
        config(2, [])
    with pytest.raises(ValueError):
        config(2, [(-1.0, (0.1, 0.2))])
    with pytest.raises(CoincidentPoints):
        config(3, [(1.0, (0.1, 0.2, 0.3)), (1.0, (0.1, 0.2, 0.3))])
    # coincidence across the periodic wrap
    with pytest.raises(CoincidentPoints):
        config(2, [(1.0, (0.0, 0.0)), (1.0, (1.0 - 1e-12, 0.0))])


def test_e0_values_and_position_blindness():
    c1 = config(2, [(5.0, (0.1, 0.1))])
    assert limits.e0(c1) == local.envelope_2d(5.0).envelope_value
    shuffled = config(2, [(2.0, (0.9, 0.3)), (2.0, (0.4, 0.8))])
    base = config(2, [(2.0, (0.1, 0.1)), (2.0, (0.6, 0.6))])
    assert limits.e0(shuffled) == limits.e0(base)  # identical to the last bit

    c3 = config(3, [(1.0, (0, 0, 0)), (2.0, (0.5, 0.5, 0.5))])
    assert limits.e0(c3) == local.e3d_ball(1.0).total + local.e3d_ball(2.0).total


def test_e0_split_comparison_consistent_with_envelope():
    # the envelope is subadditive, so splitting never helps; it is neutral
    # exactly when the envelope already splits the mass the same way
    M = 20.0
    one = config(2, [(M, (0.2, 0.2))])
    two = config(2, [(M / 2, (0.1, 0.1)), (M / 2, (0.6, 0.6))])
    assert local.envelope_2d(M).n == 4  # refines through the even split
    assert limits.e0(two) == pytest.approx(limits.e0(one), rel=1e-14)

    one_small = config(2, [(1.0, (0.2, 0.2))])
    two_small = config(2, [(0.5, (0.1, 0.1)), (0.5, (0.6, 0.6))])
    assert local.envelope_2d(1.0).n == 1
    assert limits.e0(two_small) > limits.e0(one_small)


def test_f0_energy_single_particle_3d(params):
    m = 1.7
    c = config(3, [(m, (0.3, 0.4, 0.9))])
    bd = limits.f0_energy(c, params)
    assert bd.cross_term == 0.0
    expect = green.regular_part_at_zero(3, params) * m * m
    assert abs(bd.total - expect) < 1e-14
    assert bd.total == bd.parts_sum()


def test_f0_energy_two_particles_3d_formula(params):
    m = 1.3
    x1, x2 = (0.1, 0.2, 0.3), (0.6, 0.8, 0.1)
    c = config(3, [(m, x1), (m, x2)])
    bd = limits.f0_energy(c, params)
    g0 = green.regular_part_at_zero(3, params)
    gx = green.green_eval(3, np.array(x1) - np.array(x2), params)
    expect = 2 * g0 * m * m + 2 * m * m * gx
    assert abs(bd.total - expect) <= 1e-12 * abs(expect)
    halved = limits.f0_energy(c, params, "halved")
    assert abs(halved.cross_term - 0.5 * bd.cross_term) < 1e-15
    assert abs(halved.regular_self_term - bd.regular_self_term) == 0.0


def test_f0_energy_2d_formula_and_mass_guard(params):
    m = 2 ** (2.0 / 3.0) * PI
    c = config(2, [(m, (0.0, 0.0)), (m, (0.5, 0.5))])
    bd = limits.f0_energy(c, params)
    g0 = green.regular_part_at_zero(2, params)
    gx = green.green_eval(2, (0.5, 0.5), params)
    expect = 2 * (local.f0(m) + m * m * g0) + 2 * m * m * gx
    assert abs(bd.total - expect) <= 1e-12 * abs(expect)
    with pytest.raises(UnequalMasses2D):
        limits.f0_energy(config(2, [(1.0, (0, 0)), (2.0, (0.5, 0.5))]), params)


def test_f0_energy_translation_and_permutation_invariance(params):
    entries = [(1.0, (0.12, 0.41, 0.77)), (0.7, (0.55, 0.1, 0.3)), (1.4, (0.9, 0.9, 0.02))]
    base = limits.f0_energy(config(3, entries), params).total
    shift = np.array([0.31, 0.62, 0.17])
    moved = [(m, tuple((np.array(x) + shift) % 1.0)) for m, x in entries]
    assert abs(limits.f0_energy(config(3, moved), params).total - base) < 1e-12
    perm = [entries[2], entries[0], entries[1]]
    assert limits.f0_energy(config(3, perm), params).total == base


def test_f0_energy_divergence_at_coalescence(params):
    m = 1.0
    for d in (1e-3, 1e-4):
        c = config(3, [(m, (0, 0, 0)), (m, (d, 0, 0))])
        total = limits.f0_energy(c, params).total
        asymptote = 2 * m * m / (4 * PI * d)
        assert abs(total / asymptote - 1.0) < 0.01


def test_check_admissible_2d_cases():
    m = local.OPTIMAL_PER_MASS
    for n in (1, 2, 3):
        pts = [(m, (0.1 + 0.31 * i, 0.2 + 0.17 * i)) for i in range(n)]
        rep = limits.check_admissible(config(2, pts))
        assert rep.is_optimal_partition

    rep1 = limits.check_admissible(config(2, [(1.0, (0.5, 0.5))]))
    assert rep1.is_compact and rep1.is_optimal_partition

    rep2 = limits.check_admissible(config(2, [(1.0, (0, 0)), (2.0, (0.5, 0.5))]))
    assert not rep2.is_optimal_partition

    # equal masses but wrong count: M = 2 * optimal mass split into 3
    bad = config(2, [(2 * m / 3, (0.1, 0.1)), (2 * m / 3, (0.5, 0.5)),
                     (2 * m / 3, (0.9, 0.6))])
    assert not limits.check_admissible(bad).is_optimal_partition


def test_e0_consistent_with_local_on_optimal_partitions():
    m = local.OPTIMAL_PER_MASS
    c = config(2, [(m, (0.1, 0.1)), (m, (0.5, 0.5)), (m, (0.9, 0.2))])
    assert limits.check_admissible(c).is_optimal_partition
    assert limits.e0(c) == pytest.approx(3 * local.e2d(m), rel=1e-14)


def test_check_admissible_3d_heuristics():
    thresh = local.splitting_threshold_3d()
    single = limits.check_admissible(config(3, [(1.0, (0.2, 0.2, 0.2))]))
    assert single.is_optimal_partition and single.is_compact
    assert any("heuristic" in d for d in single.detail)

    # below the splitting threshold a merge strictly lowers the ball-ansatz sum
    pair = limits.check_admissible(
        config(3, [(1.0, (0, 0, 0)), (1.0, (0.5, 0.5, 0.5))]))
    assert not pair.is_optimal_partition

    heavy = limits.check_admissible(config(3, [(1.5 * thresh, (0.1, 0.1, 0.1))]))
    assert not heavy.is_compact
