import itertools
import math

import numpy as np
import pytest
from numpy.polynomial.legendre import leggauss

from oklim import green
from oklim.errors import SingularPoint

from conftest import direct_fourier_green, random_torus_point


def test_matches_direct_fourier_oracle(params):
    rng = np.random.default_rng(7)
    for dim in (2, 3):
        for _ in range(10):
            x = random_torus_point(rng, dim, min_dist=0.2)
            assert abs(green.green_eval(dim, x, params)
                       - direct_fourier_green(dim, x)) < 1e-10


def test_parameter_independence():
    sets = [green.EwaldParameters.for_alpha(math.sqrt(math.pi)),
            green.EwaldParameters.for_alpha(2 * math.sqrt(math.pi)),
            green.EwaldParameters(alpha=1.1, real_cutoff=7, fourier_cutoff=9)]
    rng = np.random.default_rng(11)
    for dim in (2, 3):
        X = np.array([random_torus_point(rng, dim, min_dist=1e-3) for _ in range(50)])
        vals = [green.green_eval_many(dim, X, p) for p in sets]
        for v in vals[1:]:
            assert np.max(np.abs(v - vals[0])) < 1e-10


def test_evenness_and_lattice_symmetry(params):
    rng = np.random.default_rng(3)
    for dim in (2, 3):
        for _ in range(5):
            x = random_torus_point(rng, dim, min_dist=0.05)
            g = green.green_eval(dim, x, params)
            assert abs(green.green_eval(dim, -x, params) - g) < 1e-12
            for perm in itertools.permutations(range(dim)):
                for signs in itertools.product((1, -1), repeat=dim):
                    px = np.array(signs) * x[list(perm)]
                    assert abs(green.green_eval(dim, px, params) - g) < 1e-12


def test_gradient_matches_finite_differences(params):
    rng = np.random.default_rng(5)
    h = 1e-6
    for dim in (2, 3):
        X = np.array([random_torus_point(rng, dim, min_dist=1e-2) for _ in range(50)])
        grads = green.green_grad_many(dim, X, params)
        for x, g in zip(X, grads):
            fd = np.empty(dim)
            for j in range(dim):
                e = np.zeros(dim)
                e[j] = h
                fd[j] = (green.green_eval(dim, x + e, params)
                         - green.green_eval(dim, x - e, params)) / (2 * h)
            assert np.linalg.norm(fd - g) < 1e-6 * max(np.linalg.norm(g), 1.0)


def test_gradient_symmetries(params):
    assert np.linalg.norm(green.green_grad(2, [0.5, 0.5], params)) < 1e-12
    x = np.array([0.23, 0.61, 0.08])
    s = green.green_grad(3, x, params) + green.green_grad(3, -x, params)
    assert np.linalg.norm(s) < 1e-12


def test_near_origin_2d_log_behavior(params):
    x = np.array([1e-4, 0.0])
    expect = -math.log(1e-4) / (2 * math.pi) + green.regular_part_at_zero(2, params)
    assert abs(green.green_eval(2, x, params) - expect) < 1e-6


def test_regular_part_at_zero_stability():
    for dim in (2, 3):
        vals = [green.regular_part_at_zero(
            dim, green.EwaldParameters(alpha=math.sqrt(math.pi), real_cutoff=rc,
                                       fourier_cutoff=6))
            for rc in (6, 8, 10)]
        assert max(vals) - min(vals) < 1e-8
        a1 = green.regular_part_at_zero(dim, green.EwaldParameters.for_alpha(1.2))
        a2 = green.regular_part_at_zero(dim, green.EwaldParameters.for_alpha(2.4))
        assert abs(a1 - a2) < 1e-10


def test_regular_part_definitional_identity(params):
    x = np.array([0.25, 0.0, 0.0])
    g = green.regular_part(3, x, params)
    expect = green.green_eval(3, x, params) - 1.0 / (4 * math.pi * 0.25)
    assert abs(g - expect) < 1e-12


def test_regular_part_continuity_and_symmetry(params):
    g0 = green.regular_part_at_zero(2, params)
    diffs = [abs(green.regular_part(2, [r, 0.0], params) - g0)
             for r in (1e-2, 1e-3, 1e-4)]
    assert diffs[0] > diffs[1] > diffs[2]
    assert diffs[2] < 1e-6
    x = np.array([0.11, 0.31, 0.05])
    for perm in itertools.permutations(range(3)):
        assert abs(green.regular_part(3, x[list(perm)], params)
                   - green.regular_part(3, x, params)) < 1e-12


def test_regular_part_smooth_through_origin(params):
    # finite differences of g stay bounded across |x| in [0, 1e-2]
    for dim in (2, 3):
        rs = np.linspace(0.0, 1e-2, 41)
        vals = np.array([green.regular_part(dim, [r] + [0.0] * (dim - 1), params)
                         for r in rs])
        slopes = np.diff(vals) / np.diff(rs)
        assert np.max(np.abs(slopes)) < 1.0  # g' ~ r/2 near 0; nowhere near blowup


def test_singular_point_guard(params):
    with pytest.raises(SingularPoint):
        green.green_eval(2, [0.0, 0.0], params)
    with pytest.raises(SingularPoint):
        green.green_eval(3, [1.0 - 1e-12, 0.0, 0.0], params)


def _singular_cell_integral(dim, h):
    """Integral of the free-space singular part over the centered cell cube."""
    xg, wg = leggauss(40)
    if dim == 3:
        inv = 1.0 / np.sqrt(1.0 + xg[:, None] ** 2 + xg[None, :] ** 2)
        return (6 * h * h / 8.0) * np.einsum("i,j,ij->", wg, wg, inv) / (4 * math.pi)
    i1 = float(np.sum(wg * np.log(1.0 + xg**2)))
    return -(h * h / 2.0) * (2 * (math.log(h / 2.0) - 0.5) + 0.5 * i1) / (2 * math.pi)


@pytest.mark.parametrize("dim", [2, 3])
def test_zero_mean_on_grid(dim):
    # midpoint sum over the N^d grid, singular cell replaced by its analytic
    # integral plus the regular part's cell average
    N = 64
    h = 1.0 / N
    p = green.EwaldParameters(alpha=math.sqrt(math.pi), real_cutoff=3, fourier_cutoff=3)
    ax = np.arange(N) / N
    grids = np.meshgrid(*([ax] * dim), indexing="ij")
    X = np.stack([g.ravel() for g in grids], axis=-1)
    X = X[np.any(X != 0.0, axis=1)]
    riemann = float(np.sum(green.green_eval_many(dim, X, p))) * h**dim
    cell = (_singular_cell_integral(dim, h)
            + green.regular_part_at_zero(dim, p) * h**dim + dim * h ** (dim + 2) / 72.0)
    assert abs(riemann + cell) < 1e-4


def test_torus_point_reduction_and_distance():
    p = green.TorusPoint((1.25, -0.25))
    assert p.coords == (0.25, 0.75)
    q = green.TorusPoint((0.95, 0.05))
    assert abs(p.distance(q) - math.hypot(0.30, 0.30)) < 1e-15
    assert p.distance(q) <= math.sqrt(2) / 2 + 1e-15
    with pytest.raises(ValueError):
        green.TorusPoint((0.1,))
