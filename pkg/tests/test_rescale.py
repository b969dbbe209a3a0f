import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cskf import moments, rescale
from cskf.block import ScaleBlock
from cskf.collision import RelaxationDiagonal, default_schedule, relaxation_diagonal
from cskf.lattice import C

from conftest import random_state


def diag(s4, rest=1.9):
    s = np.full(27, rest)
    s[:4] = 0
    s[4:9] = s4
    return RelaxationDiagonal(s=s)


def test_rescaled_viscosity():
    assert rescale.rescaled_viscosity(1e-4, 2, 1) == pytest.approx(2e-4, rel=1e-15)
    assert rescale.rescaled_viscosity(1e-4, 2, 2) == 1e-4
    nu = rescale.rescaled_viscosity(1e-4, 2, 0.5)
    assert nu == pytest.approx(4e-4, rel=1e-15)
    sf = relaxation_diagonal(default_schedule(nu)).s[4]
    sc = relaxation_diagonal(default_schedule(1e-4)).s[4]
    assert 1 / sf - 0.5 == pytest.approx(4 * (1 / sc - 0.5), abs=1e-14)
    with pytest.raises(ValueError):
        rescale.rescaled_viscosity(0, 1, 1)


def test_k4_entry():
    m = rescale.build_mapping(diag(1.9), diag(1.8), 2.0)
    assert m.K[4] == pytest.approx(0.527778, abs=1e-6)
    assert np.all(m.K[9:] == 1) and np.all(m.K[:4] == 1)
    assert np.all(m.K_hat[:4] == 1)


def test_identity_mapping():
    S = relaxation_diagonal(default_schedule(0.01))
    m = rescale.build_mapping(S, S, 1.0)
    assert np.all(m.K_hat == 1.0)
    assert m.is_identity


def test_singular_relaxation():
    with pytest.raises(rescale.SingularRelaxationError):
        rescale.build_mapping(diag(1.0), diag(1.8), 2.0)


@pytest.mark.parametrize("alpha", [0.5, 1.4, 2.0, 3.7])
def test_equilibrium_fixed_point(alpha):
    src = default_schedule(0.01)
    dst = default_schedule(0.01 * alpha)
    m = rescale.mapping_between(src, dst, alpha, 1.0)
    u = np.array([0.03, -0.06, 0.02])
    feq = moments.equilibrium(1.01, u)[:, 0]
    assert np.allclose(rescale.map_distribution(feq, 1.01, u, m), feq, atol=1e-15)


def test_identity_preserves_state(rng):
    S = relaxation_diagonal(default_schedule(0.01))
    f = random_state(rng)
    m = rescale.build_mapping(S, S, 1.0)
    rho = f.sum()
    assert np.allclose(rescale.map_distribution(f, rho, C.T @ f / rho, m), f, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.3, 4.0))
def test_round_trip_and_conservation(seed, alpha):
    rng = np.random.default_rng(seed)
    f = random_state(rng)
    rho = f.sum()
    u = C.T @ f / rho
    src, dst = default_schedule(0.01), default_schedule(0.01 * alpha)
    fwd = rescale.mapping_between(src, dst, alpha, 1.0)
    back = rescale.mapping_between(dst, src, 1.0, alpha)
    g = rescale.map_distribution(f, rho, u, fwd)
    assert g.sum() == pytest.approx(rho, abs=1e-12)
    assert np.allclose(C.T @ g, rho * u, atol=1e-12)
    assert np.allclose(rescale.map_distribution(g, rho, u, back), f, atol=1e-10)


def test_composition(rng):
    a, b, c = default_schedule(0.01), default_schedule(0.02), default_schedule(0.05)
    f = random_state(rng)
    rho = f.sum()
    u = C.T @ f / rho
    ab = rescale.mapping_between(a, b, 2.0, 1.0)
    bc = rescale.mapping_between(b, c, 1.0, 0.4)
    ac = rescale.mapping_between(a, c, 2.0, 0.4)
    two = rescale.map_distribution(rescale.map_distribution(f, rho, u, ab), rho, u, bc)
    assert np.allclose(two, rescale.map_distribution(f, rho, u, ac), atol=1e-10)


def test_field_mapping_matches_cell(rng):
    f = np.array([random_state(rng) for _ in range(6)]).T
    m = rescale.mapping_between(default_schedule(0.01), default_schedule(0.014), 1.4, 1.0)
    out = rescale.map_field(f, m)
    for k in range(6):
        rho = f[:, k].sum()
        expect = rescale.map_distribution(f[:, k], rho, C.T @ f[:, k] / rho, m)
        assert np.allclose(out[:, k], expect, atol=1e-13)


def linear_block():
    b = ScaleBlock((1.0, 2.0, 3.0), 0.5, (5, 6, 7), default_schedule(0.01))
    x = b.positions()
    lin = 0.3 + 0.01 * x[..., 0] - 0.02 * x[..., 1] + 0.005 * x[..., 2]
    b.f[:] = np.arange(1, 28)[:, None, None, None] * lin
    return b


def test_trilinear_exact_on_linear():
    b = linear_block()
    for p in ([1.3, 2.7, 4.1], [2.9, 4.4, 5.9], [1.0, 2.0, 3.0]):
        f, rho, u = rescale.trilinear_f(b, p)
        lin = 0.3 + 0.01 * p[0] - 0.02 * p[1] + 0.005 * p[2]
        assert np.allclose(f, np.arange(1, 28) * lin, atol=1e-14)
        assert rho == pytest.approx(f.sum())


def test_trilinear_at_sample():
    b = linear_block()
    f, _, _ = rescale.trilinear_f(b, b.origin + 0.5 * np.array([2, 3, 4]))
    assert np.array_equal(f, b.f[:, 2, 3, 4])


def test_trilinear_out_of_hull():
    with pytest.raises(rescale.OutOfHullError):
        rescale.trilinear_f(linear_block(), [0.0, 2.5, 3.5])


def test_temporal_linear():
    a, b = np.zeros(27), np.arange(27.0)
    assert np.array_equal(rescale.temporal_linear(a, b, 0), a)
    assert np.array_equal(rescale.temporal_linear(a, b, 1), b)
    assert np.allclose(rescale.temporal_linear(a, b, 0.25), 0.25 * b)
    with pytest.raises(ValueError):
        rescale.temporal_linear(a, b, 1.5)


def test_temporal_quadratic():
    q = lambda t: 2.0 - 3.0 * t + 0.7 * t * t  # noqa: E731
    v = np.ones(27)
    assert np.array_equal(rescale.temporal_quadratic(q(0) * v, q(2) * v, q(3) * v, 0, 2, 3, 2), q(2) * v)
    assert np.allclose(rescale.temporal_quadratic(q(0) * v, q(2) * v, q(3) * v, 0, 2, 3, 2.5),
                       q(2.5) * v, atol=1e-14)


def test_temporal_quadratic_cubic_remainder():
    c = lambda t: t ** 3  # noqa: E731
    t0, t1, t2, t = 0.0, 2.0, 3.0, 2.5
    got = rescale.temporal_quadratic(c(t0), c(t1), c(t2), t0, t1, t2, t)
    # Lagrange remainder with f''' = 6 is exact for a cubic
    assert got == pytest.approx(c(t) - (t - t0) * (t - t1) * (t - t2), abs=1e-13)


def test_temporal_quadratic_errors():
    with pytest.raises(rescale.CoincidentNodesError):
        rescale.temporal_quadratic(0, 0, 0, 0, 0, 1, 0.5)
    with pytest.raises(ValueError):
        rescale.temporal_quadratic(0, 0, 0, 0, 1, 2, 3)
