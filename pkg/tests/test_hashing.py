import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hdsft.checks import small_params
from hdsft.errors import InvalidArgument
from hdsft.hashing import (SIGMA_B, HashDraw, apply_h, apply_h_inv, apply_h_inv_star, apply_h_star, bucket_of,
                           draw_hash, fold, grid_index, hashed_frequency, min_last_coord_gap, odd_support)
from hdsft.model import SignalSpec, Tone
from hdsft.oracle_eval import dense_dft, fH_grid

H = HashDraw((3, 5, 7), 0)


def test_odd_support_singleton():
    p = small_params(4.0, 8.0, 4, eta=8.0)
    assert list(odd_support(p.F, p.eta)) == [1]
    assert draw_hash(np.random.default_rng(0), p).h == (1, 1)


def test_odd_draws_uniform():
    p = small_params(4.0, 8.0, 2, eta=1.0)
    rng = np.random.default_rng(0)
    h = np.concatenate([draw_hash(rng, p).h for _ in range(5000)])
    counts = np.array([(h == v).sum() for v in (1, 3, 5, 7)])
    assert counts.sum() == h.size
    sigma = math.sqrt(h.size * 0.25 * 0.75)
    assert np.all(np.abs(counts - h.size / 4) < 3 * sigma)


def test_translation_support():
    p = small_params(2.0, 8.0, 4)  # TF/s = 4
    rng = np.random.default_rng(1)
    assert {draw_hash(rng, p).b for _ in range(400)} == {0, 1, 2, 3}


def test_same_seed_same_draw():
    p = small_params(4.0, 16.0, 4)
    assert draw_hash(np.random.default_rng(9), p) == draw_hash(np.random.default_rng(9), p)


def test_apply_h_examples():
    assert np.array_equal(apply_h(H, [1.0, 1.0, 1.0]), [1, 1, 15])
    assert np.array_equal(apply_h(H, np.zeros(3)), np.zeros(3))
    assert np.array_equal(apply_h_star(H, [0.0, 0.0, 1.0]), [3, 5, 7])
    x = np.array([0.3, -2.0, 0.0])
    assert np.array_equal(apply_h_star(H, x), x)


def test_inverses_on_random_inputs():
    rng = np.random.default_rng(2)
    xi = rng.uniform(-50, 50, size=(1000, 3))
    assert np.abs(apply_h_inv(H, apply_h(H, xi)) - xi).max() < 1e-12
    assert np.abs(apply_h(H, apply_h_inv(H, xi)) - xi).max() < 1e-12
    assert np.abs(apply_h_inv_star(H, apply_h_star(H, xi)) - xi).max() < 1e-12
    assert np.abs(apply_h_star(H, apply_h_inv_star(H, xi)) - xi).max() < 1e-12


def test_dimension_mismatch():
    with pytest.raises(InvalidArgument):
        apply_h(H, [1.0, 2.0])


def test_fold_half_open():
    assert fold(8.0, 16.0) == -8.0
    assert fold(-8.0, 16.0) == -8.0
    assert fold(7.5, 16.0) == 7.5


def test_hashed_frequency_zero():
    p = small_params(4.0, 16.0, 4)
    assert np.array_equal(hashed_frequency(HashDraw((1, 3), 0), p, [0.0, 0.0]), [0.0, 0.0])


def test_hashed_frequency_affine():
    p = small_params(64.0, 256.0, 16)
    hd = HashDraw((3, 5), 17)
    w, w2 = np.array([0.5, 1.0]), np.array([0.75, 1.5])
    diff = hashed_frequency(hd, p, w2) - hashed_frequency(hd, p, w)
    assert np.allclose(diff, apply_h(hd, w2 - w))


def test_bucket_examples():
    p = small_params(1.0, 16.0, 4, eta=2.0)  # TF=16, s=4
    assert bucket_of(-8, p) == 1
    assert bucket_of(0, p) == 3
    assert bucket_of(7, p) == 4
    with pytest.raises(InvalidArgument):
        bucket_of(8, p)


def test_buckets_partition_the_grid():
    p = small_params(4.0, 64.0, 8)
    idx = np.arange(-p.TF // 2, p.TF // 2)
    j = bucket_of(idx, p)
    assert set(j.tolist()) == set(range(1, p.s + 1))
    assert np.all(np.bincount(j)[1:] == p.bucket_width)
    assert np.all(np.diff(j) >= 0)


def test_grid_index_wraps():
    p = small_params(4.0, 16.0, 4)
    assert grid_index(0.0, p) == 0
    assert grid_index(8.0, p) == -32
    assert grid_index(-0.1, p) == -1


def test_min_gap_examples():
    p = small_params(4.0, 16.0, 4)
    one = SignalSpec((Tone(1.0, (0.0, 0.0)),), 2, 4.0, 1.0, 1.0, 1.0)
    assert min_last_coord_gap(HashDraw((1, 1), 0), one, p) == math.inf
    two = SignalSpec((Tone(1.0, (1.0, 0.5)), Tone(1.0, (1.0, 3.0))), 2, 4.0, 1.0, 1.0, 1.0)
    for b in (0, 3):
        assert min_last_coord_gap(HashDraw((5, 1), b), two, p) == pytest.approx(2.5)
    far = SignalSpec((Tone(1.0, (0.0, -3.0)), Tone(1.0, (0.0, 3.5))), 2, 4.0, 1.0, 1.0, 1.0)
    assert min_last_coord_gap(HashDraw((3, 1), 0), far, small_params(4.0, 8.0, 4)) == pytest.approx(1.5)


def test_collision_rate_at_formula_parameters():
    from hdsft.checks import isolation_params
    spec, p = isolation_params()
    rng = np.random.default_rng(3)
    hits = sum(min_last_coord_gap(draw_hash(rng, p), spec, p) <= 2 * p.F / p.s for _ in range(1000))
    assert hits / 1000 <= p.delta


def test_sign_convention_pinned_by_dense_argmax():
    assert SIGMA_B == -1
    p = small_params(4.0, 16.0, 4)
    spec = SignalSpec((Tone(1.0, (1.3, -2.2)),), 2, 4.0, 1.0, 1.0, 1.0)
    rng = np.random.default_rng(4)
    for _ in range(10):
        hd = draw_hash(rng, p)
        hd = HashDraw(hd.h, max(hd.b, 3))
        energy = np.abs(dense_dft(fH_grid(spec, hd, p), p.T, p.F).values)
        peak = (np.array(np.unravel_index(energy.argmax(), energy.shape)) - p.TF // 2) / p.T

        def gap(sigma):
            nu = hashed_frequency(HashDraw(hd.h, hd.b, sigma), p, spec.freqs[0])
            return np.abs(fold(peak - nu, p.F)).max()
        assert gap(SIGMA_B) <= 1 / p.T
        # the flipped sign misplaces the peak by 2b/T
        assert gap(-SIGMA_B) > 1 / p.T


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from([1, 3, 5, 7, 9, 11]), min_size=2, max_size=6),
       st.lists(st.floats(-100, 100), min_size=6, max_size=6))
def test_h_star_inverse_property(h, x):
    hd = HashDraw(tuple(h), 0)
    v = np.array(x[:len(h)])
    assert np.allclose(apply_h_inv_star(hd, apply_h_star(hd, v)), v, atol=1e-12 * (1 + np.abs(v).max()) * max(h))
