import numpy as np
import pytest

from so3fft.gft import (
    GuardError,
    S2Signal,
    S2Spectrum,
    SO3Signal,
    SO3Spectrum,
    bandlimit_s2,
    bandlimit_so3,
    lift_s2_to_so3,
    s2_coefficient_count,
    s2_dft_forward,
    s2_dft_inverse,
    s2_fft_forward,
    s2_fft_inverse,
    so3_coefficient_count,
    so3_dft_forward,
    so3_dft_inverse,
    so3_fft_forward,
    so3_fft_inverse,
)
from so3fft.grids import make_s2_grid, make_so3_grid
from so3fft.harmonics import build_tables


def random_s2(bandwidth, channels=1, seed=0):
    """Random bandlimited sphere signal (grid noise projected down)."""
    rng = np.random.default_rng(seed)
    n = 2 * bandwidth
    return bandlimit_s2(S2Signal(bandwidth, rng.standard_normal((channels, n, n))))


def random_so3(bandwidth, channels=1, seed=0):
    rng = np.random.default_rng(seed)
    n = 2 * bandwidth
    return bandlimit_so3(
        SO3Signal(bandwidth, rng.standard_normal((channels, n, n, n)))
    )


def test_coefficient_counts():
    assert [s2_coefficient_count(b) for b in (1, 2, 3, 4)] == [1, 4, 9, 16]
    assert [so3_coefficient_count(b) for b in (1, 2, 3, 4)] == [1, 10, 35, 84]


def test_cosine_colatitude_is_pure_degree_one():
    b = 4
    grid = make_s2_grid(b)
    f = S2Signal(b, np.broadcast_to(np.cos(grid.betas)[:, None], (8, 8)).copy())
    spec = s2_fft_forward(f)
    np.testing.assert_allclose(spec.block(0, 1)[1], 1.0 / 3.0, rtol=1e-14)
    rest = spec.data.copy()
    rest[0, 2] = 0.0
    np.testing.assert_allclose(rest, 0.0, atol=1e-15)


def test_constant_signal_spectrum():
    b = 3
    f = S2Signal(b, np.full((6, 6), 2.5))
    spec = s2_fft_forward(f)
    np.testing.assert_allclose(spec.block(0, 0), [2.5], atol=1e-14)
    np.testing.assert_allclose(spec.data[0, 1:], 0.0, atol=1e-14)


@pytest.mark.parametrize("b", [1, 2, 3, 4, 8, 16])
def test_s2_round_trip_fast(b):
    f = random_s2(b, channels=2, seed=b)
    back = s2_fft_inverse(s2_fft_forward(f))
    np.testing.assert_allclose(back.samples, f.samples, atol=1e-12)


@pytest.mark.parametrize("b", [1, 2, 3, 4, 8])
def test_so3_round_trip_fast(b):
    f = random_so3(b, seed=b)
    back = so3_fft_inverse(so3_fft_forward(f))
    np.testing.assert_allclose(back.samples, f.samples, atol=1e-12)


@pytest.mark.parametrize("b", [1, 3, 6])
def test_s2_round_trip_direct(b):
    f = random_s2(b, seed=10 + b)
    back = s2_dft_inverse(s2_dft_forward(f))
    np.testing.assert_allclose(back.samples, f.samples, atol=1e-12)


@pytest.mark.parametrize("b", [1, 2, 4])
def test_so3_round_trip_direct(b):
    f = random_so3(b, seed=20 + b)
    back = so3_dft_inverse(so3_dft_forward(f))
    np.testing.assert_allclose(back.samples, f.samples, atol=1e-12)


@pytest.mark.parametrize("b", [2, 4, 8])
def test_fast_and_direct_forward_agree_s2(b):
    f = random_s2(b, channels=3, seed=b)
    fast = s2_fft_forward(f)
    slow = s2_dft_forward(f)
    np.testing.assert_allclose(fast.data, slow.data, atol=1e-11)


@pytest.mark.parametrize("b", [2, 4])
def test_fast_and_direct_agree_so3(b):
    f = random_so3(b, channels=2, seed=b)
    fast = so3_fft_forward(f)
    slow = so3_dft_forward(f)
    np.testing.assert_allclose(fast.data, slow.data, atol=1e-11)
    spec = so3_fft_forward(f)
    np.testing.assert_allclose(
        so3_fft_inverse(spec).samples, so3_dft_inverse(spec).samples, atol=1e-11
    )


def test_parseval_per_channel_s2():
    b = 8
    f = random_s2(b, channels=3, seed=5)
    grid = make_s2_grid(b)
    energy = s2_fft_forward(f).weighted_energy()
    np.testing.assert_allclose(energy, grid.integrate(f.samples**2), rtol=1e-12)


def test_parseval_per_channel_so3():
    b = 4
    f = random_so3(b, channels=2, seed=6)
    grid = make_so3_grid(b)
    energy = so3_fft_forward(f).weighted_energy()
    np.testing.assert_allclose(energy, grid.integrate(f.samples**2), rtol=1e-12)


def test_real_signal_coefficient_symmetry():
    b = 5
    spec = so3_fft_forward(random_so3(b, seed=7))
    for l in range(b):
        blk = spec.block(0, l)
        m = np.arange(-l, l + 1)
        signs = (-1.0) ** (m[:, None] - m[None, :])
        np.testing.assert_allclose(
            blk[::-1, ::-1], signs * blk.conj(), atol=1e-12
        )


def test_real_symmetry_s2():
    spec = s2_fft_forward(random_s2(6, seed=8))
    for l in range(6):
        blk = spec.block(0, l)
        m = np.arange(-l, l + 1)
        np.testing.assert_allclose(
            blk[::-1], (-1.0) ** m * blk.conj(), atol=1e-12
        )


@pytest.mark.parametrize("b", [2, 4, 8])
def test_lift_concentrates_on_zero_column(b):
    f = random_s2(b, channels=2, seed=b)
    s2 = s2_fft_forward(f)
    so3 = so3_fft_forward(lift_s2_to_so3(f))
    for l in range(b):
        blk = so3.blocks(l)
        np.testing.assert_allclose(blk[:, :, l], s2.blocks(l), atol=1e-10)
        off = np.delete(blk, l, axis=2)
        np.testing.assert_allclose(off, 0.0, atol=1e-10)


def test_lift_is_constant_along_last_angle():
    f = random_s2(3, seed=9)
    lifted = lift_s2_to_so3(f)
    assert lifted.samples.shape == (1, 6, 6, 6)
    spread = np.ptp(lifted.samples, axis=3)
    np.testing.assert_allclose(spread, 0.0, atol=0.0)


def test_inverse_guards_against_asymmetric_spectrum():
    spec = S2Spectrum.zeros(3)
    spec.blocks(1)[0] = [0.0, 0.0, 1.0]  # breaks the real-signal symmetry
    with pytest.raises(GuardError, match="residue"):
        s2_fft_inverse(spec)


def test_inverse_guard_so3():
    spec = SO3Spectrum.zeros(2)
    spec.blocks(1)[0, 0, 0] = 1.0j
    with pytest.raises(GuardError):
        so3_fft_inverse(spec)


def test_residue_recorded_on_signal():
    f = random_s2(4, seed=1)
    back = s2_fft_inverse(s2_fft_forward(f))
    assert 0.0 <= back.imag_residue < 1e-12


def test_tables_bandwidth_mismatch():
    f = random_s2(4)
    with pytest.raises(ValueError, match="bandwidth"):
        s2_fft_forward(f, tables=build_tables(5))


def test_signal_shape_validation():
    with pytest.raises(ValueError, match="shaped"):
        S2Signal(3, np.zeros((6, 5)))
    with pytest.raises(ValueError, match="shaped"):
        SO3Signal(2, np.zeros((2, 4, 4, 5)))
    with pytest.raises(ValueError, match="finite"):
        S2Signal(2, np.full((4, 4), np.inf))


def test_spectrum_validation():
    with pytest.raises(ValueError, match="expected data"):
        S2Spectrum(3, np.zeros(8, dtype=np.complex128))
    with pytest.raises(ValueError, match="non-finite"):
        bad = S2Spectrum.zeros(2)
        bad.data[0, 0] = np.nan
        s2_fft_inverse(bad)


def test_spectrum_truncation_keeps_low_degrees():
    spec = so3_fft_forward(random_so3(4, seed=11))
    cut = spec.truncated(2)
    assert cut.bandwidth == 2
    for l in range(2):
        np.testing.assert_allclose(cut.blocks(l), spec.blocks(l))
    with pytest.raises(ValueError, match="truncate"):
        spec.truncated(5)


def test_bandlimit_is_idempotent():
    rng = np.random.default_rng(12)
    raw = S2Signal(5, rng.standard_normal((10, 10)))
    once = bandlimit_s2(raw)
    assert not np.allclose(once.samples, raw.samples)  # noise had high degrees
    np.testing.assert_allclose(bandlimit_s2(once).samples, once.samples, atol=1e-13)
    raw3 = SO3Signal(3, rng.standard_normal((6, 6, 6)))
    once3 = bandlimit_so3(raw3)
    np.testing.assert_allclose(
        bandlimit_so3(once3).samples, once3.samples, atol=1e-13
    )


def test_single_channel_input_promotes_to_channel_axis():
    f = S2Signal(2, np.zeros((4, 4)))
    assert f.samples.shape == (1, 4, 4)
    assert f.channels == 1
