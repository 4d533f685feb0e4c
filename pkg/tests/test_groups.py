import numpy as np
import pytest

from lcashe.errors import IncompatibleMap, NotAutomorphism, NotDiscrete
from lcashe.groups import (Cyclic, FiniteIndexer, Isomorphism, Lattice, Product, RealLine, Torus,
                           Trivial, character_matrix, compose, convolve, dual, dual_points, fourier,
                           haar_weight, inverse, inverse_fourier, modulus, points)


def test_trivial_is_cyclic_one():
    assert Trivial() == Cyclic(1)
    assert Trivial().kind == "Trivial"
    assert haar_weight(Trivial()).tolist() == [1.0]
    assert haar_weight(dual(Trivial())).tolist() == [1.0]


def test_cyclic_weights():
    g = Cyclic(4)
    assert np.all(haar_weight(g) == 1.0)
    assert np.allclose(haar_weight(dual(g)), 0.25)


@pytest.mark.parametrize("bad", [0, -3, 2.5])
def test_cyclic_rejects_bad_order(bad):
    with pytest.raises(ValueError):
        Cyclic(bad)


def test_compactness_under_products():
    assert Product((Cyclic(2), Torus(8))).is_compact
    assert not Product((Cyclic(2), RealLine(5.0, 16))).is_compact
    assert Product((Cyclic(2), Lattice(1, 1.0, 2))).is_discrete
    assert not Product((Cyclic(2), Torus(8))).is_discrete


def test_dual_flips_and_round_trips():
    for g in (Cyclic(5), Lattice(2, 0.5, 3), Torus(8), RealLine(3.0, 20)):
        d = dual(g)
        assert d.is_discrete == g.is_compact and d.is_compact == g.is_discrete
        assert dual(d) == g
    assert dual(Cyclic(6)).as_group() == Cyclic(6)


def test_torus_and_realline_samples():
    assert np.allclose(points(Torus(4)), [0, 0.25, 0.5, 0.75])
    assert dual_points(Torus(4)).tolist() == [-2, -1, 0, 1]
    g = RealLine(2.0, 8)
    assert np.allclose(points(g), -2 + 0.5 * np.arange(8))
    assert np.allclose(dual_points(g), np.pi / 2 * np.arange(-4, 4))
    assert np.isclose(haar_weight(Torus(16)).sum(), 1.0)


def test_cyclic_fourier_matches_numpy_fft():
    rng = np.random.default_rng(1)
    f = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    # fhat(k) = sum_x f(x) exp(2 pi i x k / n)
    assert np.allclose(fourier(Cyclic(7), f), 7 * np.fft.ifft(f))
    assert np.allclose(inverse_fourier(Cyclic(7), fourier(Cyclic(7), f)), f)


def test_fourier_round_trip_on_products():
    g = Product((Cyclic(3), Torus(4)))
    rng = np.random.default_rng(2)
    f = rng.standard_normal(g.size)
    assert np.allclose(inverse_fourier(g, fourier(g, f)), f)


def test_characters_are_homomorphisms():
    g = Cyclic(6)
    C = character_matrix(g)
    ix = FiniteIndexer(g)
    for x in range(6):
        for y in range(6):
            assert np.allclose(C[ix.add(x, y)], C[x] * C[y])


def test_gaussian_fourier_on_realline():
    g = RealLine(20.0, 512)
    x = points(g)
    xi = dual_points(g)
    fhat = fourier(g, np.exp(-x ** 2 / 2))
    assert np.allclose(fhat.real, np.sqrt(2 * np.pi) * np.exp(-xi ** 2 / 2), atol=1e-12)


def test_indexer_on_lattice():
    ix = FiniteIndexer(Lattice(2, 1.0, 2))
    assert ix.size == 25
    assert ix.coords(ix.identity).tolist() == [0, 0]
    i = ix.index(np.array([2, 2]))
    j = ix.index(np.array([1, 0]))
    assert ix.coords(ix.add(i, j)).tolist() == [-2, 2]  # wraps around
    with pytest.raises(NotDiscrete):
        FiniteIndexer(Torus(8))


def test_convolution_matches_direct_sum():
    g = Cyclic(5)
    rng = np.random.default_rng(3)
    f, h = rng.random(5), rng.random(5)
    direct = [sum(f[y] * h[(x - y) % 5] for y in range(5)) for x in range(5)]
    assert np.allclose(convolve(g, f, h), direct)


def test_isomorphisms_and_moduli():
    h = Isomorphism(Cyclic(5), Cyclic(5), "multiplier", 2)
    assert h.apply(np.arange(5)).tolist() == [0, 2, 4, 1, 3]
    assert inverse(h).param == 3
    assert modulus(h) == 1.0
    with pytest.raises(NotAutomorphism):
        Isomorphism(Cyclic(6), Cyclic(6), "multiplier", 2)
    s = Isomorphism(RealLine(1.0, 10), RealLine(2.5, 10), "scaling", -2.5)
    assert modulus(s) == 2.5
    assert modulus(inverse(s)) == pytest.approx(0.4, abs=1e-15)
    t = Isomorphism(RealLine(2.5, 10), RealLine(5.0, 10), "scaling", 2.0)
    assert modulus(compose(t, s)) == pytest.approx(5.0, abs=1e-12)
    with pytest.raises(IncompatibleMap):
        Isomorphism(RealLine(1.0, 10), RealLine(1.0, 10), "scaling", 2.0)


def test_permutation_of_factors():
    src = Product((Cyclic(2), Cyclic(3)))
    tgt = Product((Cyclic(3), Cyclic(2)))
    h = Isomorphism(src, tgt, "permutation", (1, 0))
    img = h.apply(np.arange(6))
    assert sorted(img.tolist()) == list(range(6))
    back = inverse(h).apply(img)
    assert back.tolist() == list(range(6))
