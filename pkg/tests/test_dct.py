import numpy as np
import pytest

from kmdp import dct, idct, truncate


def test_constant_vector_projects_onto_flat_basis():
    y = dct([1.0, 1.0, 1.0, 1.0])
    np.testing.assert_allclose(y, [2.0, 0.0, 0.0, 0.0], atol=1e-14)


def test_two_point_vector_hand_values():
    # c_0 * (1 + 0) = sqrt(1/2); c_1 * cos(pi/4) = cos(pi/4).
    y = dct([1.0, 0.0])
    np.testing.assert_allclose(y, [0.7071067811865476, 0.7071067811865476], atol=1e-12)


def test_parseval_up_to_4096():
    rng = np.random.default_rng(0)
    for n in (1, 2, 3, 17, 100, 1024, 4096):
        x = rng.normal(size=n)
        y = dct(x)
        assert abs(np.linalg.norm(y) - np.linalg.norm(x)) <= 1e-12 * max(1.0, np.linalg.norm(x))


def test_parseval_many_random_vectors():
    rng = np.random.default_rng(1)
    for _ in range(100):
        x = rng.normal(size=rng.integers(1, 200))
        assert abs(np.linalg.norm(dct(x)) - np.linalg.norm(x)) <= 1e-12 * max(1.0, np.linalg.norm(x))


def test_roundtrip_inverse():
    rng = np.random.default_rng(2)
    for n in (1, 2, 5, 64, 1000):
        x = rng.normal(size=n)
        np.testing.assert_allclose(idct(dct(x)), x, atol=1e-10)


def test_roundtrip_toy_curve():
    x = np.array([1.0, 0.8, 0.6, 0.6, 0.3, 0.3])
    np.testing.assert_allclose(idct(dct(x)), x, atol=1e-10)


def test_inverse_of_flat_coefficients():
    np.testing.assert_allclose(idct([2.0, 0.0, 0.0, 0.0]), [1.0, 1.0, 1.0, 1.0], atol=1e-12)


def test_zero_maps_to_zero():
    np.testing.assert_allclose(idct(np.zeros(8)), np.zeros(8), atol=0)


def test_linearity():
    rng = np.random.default_rng(3)
    x, z = rng.normal(size=50), rng.normal(size=50)
    a, b = 2.5, -1.25
    np.testing.assert_allclose(dct(a * x + b * z), a * dct(x) + b * dct(z), atol=1e-10)


def test_matches_reference_fft_implementation():
    # Cross-check the direct matrix evaluation against an independent FFT-based one.
    scipy_fft = pytest.importorskip("scipy.fft")
    rng = np.random.default_rng(4)
    for n in (2, 7, 128, 513):
        x = rng.normal(size=n)
        np.testing.assert_allclose(dct(x), scipy_fft.dct(x, type=2, norm="ortho"), atol=1e-10)
        np.testing.assert_allclose(idct(x), scipy_fft.idct(x, type=2, norm="ortho"), atol=1e-10)


def test_truncate_basics():
    np.testing.assert_allclose(truncate([3.0, 1.0, 2.0], 1), [3.0, 0.0, 0.0])
    np.testing.assert_allclose(truncate([3.0, 1.0, 2.0], 3), [3.0, 1.0, 2.0])


def test_truncate_never_grows_norm():
    rng = np.random.default_rng(5)
    for _ in range(50):
        y = rng.normal(size=20)
        k = int(rng.integers(1, 21))
        assert np.linalg.norm(truncate(y, k)) <= np.linalg.norm(y) + 1e-15


def test_truncate_is_l2_nearest_on_support():
    # Among vectors supported on the first k coefficients, zeroing the tail
    # is the closest one; any perturbation of the kept entries is worse.
    rng = np.random.default_rng(6)
    y = rng.normal(size=8)
    k = 3
    best = truncate(y, k)
    base = np.linalg.norm(y - best)
    for _ in range(200):
        cand = np.zeros(8)
        cand[:k] = best[:k] + rng.normal(scale=0.1, size=k)
        assert np.linalg.norm(y - cand) >= base - 1e-12


def test_truncate_out_of_range_rejected():
    for k in (0, 4, -1):
        with pytest.raises(ValueError):
            truncate([1.0, 2.0, 3.0], k)


def test_empty_vector_rejected():
    with pytest.raises(ValueError):
        dct([])
    with pytest.raises(ValueError):
        idct([])
