import numpy as np
import pytest

from pwmf.metrics import psnr
from pwmf.noise import (
    NoiseSpec,
    add_gaussian,
    add_impulse,
    add_mixed,
    derive_seeds,
    impulse_mask,
    uniform_stream,
)

FLAT = np.full((512, 512), 128.0)


def test_gaussian_sigma_zero_is_identity(rng):
    a = rng.uniform(0, 255, (9, 9))
    assert np.array_equal(add_gaussian(a, 0, 3).pixels, a)


def test_gaussian_moments():
    eta = add_gaussian(FLAT, 20, 11).pixels - FLAT
    assert abs(eta.mean()) < 0.25
    assert abs(eta.std() - 20) < 0.5


def test_gaussian_is_deterministic_and_seed_sensitive():
    a = add_gaussian(FLAT[:32, :32], 20, 5).pixels
    assert np.array_equal(a, add_gaussian(FLAT[:32, :32], 20, 5).pixels)
    assert not np.array_equal(a, add_gaussian(FLAT[:32, :32], 20, 6).pixels)


def test_gaussian_additivity(rng):
    a = rng.uniform(0, 255, (20, 20))
    shifted = add_gaussian(a + 17.0, 10, 9).pixels
    assert np.allclose(shifted, add_gaussian(a, 10, 9).pixels + 17.0, atol=1e-9)


def test_stream_depends_only_on_index():
    long = uniform_stream(42, 1, 1000)
    short = uniform_stream(42, 1, 10)
    assert np.array_equal(long[:10], short)
    assert np.all((long > 0) & (long < 1))


def test_impulse_p_zero_is_identity(rng):
    a = rng.uniform(0, 255, (9, 9))
    assert np.array_equal(add_impulse(a, 0, seed=1).pixels, a)


def test_impulse_fraction_and_values():
    out = add_impulse(FLAT, 0.2, 0, 255, seed=4).pixels
    hit = impulse_mask(FLAT.shape, 0.2, 4)
    assert abs(hit.mean() - 0.2) < 0.01
    assert abs(out[hit].mean() - 127.5) < 3
    assert np.all((out[hit] >= 0) & (out[hit] <= 255))
    # untouched pixels are bit-identical
    assert np.array_equal(out[~hit], FLAT[~hit])


def test_impulse_validation():
    with pytest.raises(ValueError):
        add_impulse(FLAT, 1.0)
    with pytest.raises(ValueError):
        add_impulse(FLAT, 0.1, 10, 10)


def test_mixed_is_composition(rng):
    a = rng.uniform(0, 255, (30, 30))
    s1, s2 = derive_seeds(77)
    expected = add_impulse(add_gaussian(a, 10, s1), 0.2, 0, 255, s2)
    assert np.array_equal(add_mixed(a, 10, 0.2, 77).pixels, expected.pixels)
    assert np.array_equal(add_mixed(a, 0, 0, 77).pixels, a)


def test_mixed_noise_is_heavy():
    y, x = np.mgrid[0:256, 0:256]
    u = 128 + 60 * np.sin(x / 17.0) * np.cos(y / 23.0)
    assert psnr(add_mixed(u, 20, 0.3, 1), u) < 17.0


def test_noise_spec_text_round_trip():
    spec = NoiseSpec("mixed", 12.5, 0.3, 0, 255, 99)
    assert NoiseSpec.from_text(spec.to_text()) == spec
    with pytest.raises(ValueError):
        NoiseSpec.from_text("kind=mixed colour=red")
