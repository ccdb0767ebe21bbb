import numpy as np
import pytest

from bellscope.rng import trial_uniforms


def test_shape_and_range():
    u = trial_uniforms(1, 0, 1000)
    assert u.shape == (1000, 4)
    assert u.min() >= 0.0 and u.max() < 1.0


def test_deterministic():
    assert np.array_equal(trial_uniforms(9, 0, 50), trial_uniforms(9, 0, 50))
    assert not np.array_equal(trial_uniforms(9, 0, 50), trial_uniforms(10, 0, 50))


@pytest.mark.parametrize("cut", [1, 17, 499])
def test_any_slice_regenerates_independently(cut):
    full = trial_uniforms(42, 0, 500)
    assert np.array_equal(full[:cut], trial_uniforms(42, 0, cut))
    assert np.array_equal(full[cut:], trial_uniforms(42, cut, 500))
    assert np.array_equal(full[cut:cut + 1], trial_uniforms(42, cut, cut + 1))


def test_roughly_uniform():
    u = trial_uniforms(3, 0, 200_000)
    assert np.allclose(u.mean(axis=0), 0.5, atol=0.005)
    assert abs(np.corrcoef(u[:, 0], u[:, 1])[0, 1]) < 0.01


def test_bad_arguments():
    with pytest.raises(ValueError):
        trial_uniforms(-1, 0, 10)
    with pytest.raises(ValueError):
        trial_uniforms(1, 5, 2)
