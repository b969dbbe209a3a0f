import numpy as np

from cskf.lattice import C, LATTICE, OPPOSITE, Q, W


def test_size_and_rest():
    assert Q == 27
    assert C.shape == (27, 3)
    assert np.all(C[0] == 0)


def test_ordering_classes():
    nz = np.count_nonzero(C, axis=1)
    assert list(nz[1:7]) == [1] * 6
    assert list(nz[7:19]) == [2] * 12
    assert list(nz[19:]) == [3] * 8


def test_specific_velocities():
    assert tuple(C[1]) == (1, 0, 0)
    assert tuple(C[13]) == (1, 0, -1)
    assert tuple(C[26]) == (-1, -1, -1)


def test_weights():
    assert np.isclose(W.sum(), 1.0, atol=1e-15)
    assert np.isclose(W[0], 8 / 27)
    assert np.allclose(W[1:7], 2 / 27)
    assert np.allclose(W[7:19], 1 / 54)
    assert np.allclose(W[19:], 1 / 216)


def test_isotropy():
    assert np.allclose(W @ C, 0.0, atol=1e-16)
    second = np.einsum("i,ia,ib->ab", W, C, C)
    assert np.allclose(second, np.eye(3) / 3, atol=1e-15)


def test_opposite():
    opp = np.asarray(OPPOSITE)
    assert np.all(C[opp] == -C)
    assert np.all(opp[opp] == np.arange(27))
    assert LATTICE.opposite == tuple(opp)
