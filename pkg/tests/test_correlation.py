import numpy as np
import pytest

from so3fft.correlation import (
    dh_convolve,
    make_correlation_plan,
    multichannel_correlate,
    relu_spatial,
    rotate_s2_spectral,
    rotate_s2_spectrum,
    rotate_so3_spectral,
    s2_correlate,
    so3_correlate,
    so3_integrate,
    so3_max_pool,
)
from so3fft.gft import (
    S2Signal,
    S2Spectrum,
    SO3Signal,
    SO3Spectrum,
    bandlimit_s2,
    bandlimit_so3,
    s2_fft_forward,
    so3_fft_forward,
    so3_fft_inverse,
)
from so3fft.grids import make_s2_grid, make_so3_grid, random_rotation
from so3fft.oracle import (
    dh_convolve_direct,
    rotate_s2_by_resampling,
    rotate_so3_by_resampling,
    s2_correlate_direct,
    so3_correlate_direct,
    synthesize_so3_at,
)


def noise_s2(b, channels=1, seed=0):
    rng = np.random.default_rng(seed)
    n = 2 * b
    return bandlimit_s2(S2Signal(b, rng.standard_normal((channels, n, n))))


def noise_so3(b, channels=1, seed=0):
    rng = np.random.default_rng(seed)
    n = 2 * b
    return bandlimit_so3(SO3Signal(b, rng.standard_normal((channels, n, n, n))))


def rel_err(got, want):
    return np.linalg.norm(got - want) / np.linalg.norm(want)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_s2_correlation_matches_oracle(seed):
    b = 4
    f = noise_s2(b, channels=2, seed=seed)
    psi = noise_s2(b, channels=2, seed=100 + seed)
    fast = s2_correlate(psi, f)
    slow = s2_correlate_direct(psi, f)
    assert rel_err(fast.samples, slow.samples) < 1e-12


@pytest.mark.parametrize("seed", [0, 1])
def test_so3_correlation_matches_oracle(seed):
    b = 3
    f = noise_so3(b, channels=2, seed=seed)
    psi = noise_so3(b, channels=2, seed=200 + seed)
    fast = so3_correlate(psi, f)
    slow = so3_correlate_direct(psi, f)
    assert rel_err(fast.samples, slow.samples) < 1e-12


def test_correlation_value_at_identity_is_inner_product():
    b = 5
    f = noise_s2(b, seed=3)
    psi = noise_s2(b, seed=4)
    spec = so3_fft_forward(s2_correlate(psi, f))
    at_identity = synthesize_so3_at(spec, [0.0], [0.0], [0.0])[0, 0]
    want = make_s2_grid(b).integrate(f.samples * psi.samples)[0]
    np.testing.assert_allclose(at_identity.real, want, rtol=1e-12)
    np.testing.assert_allclose(at_identity.imag, 0.0, atol=1e-12)


def test_autocorrelation_peaks_at_identity():
    # the match score of f against itself is largest for no rotation at all
    f = noise_s2(4, seed=5)
    corr = s2_correlate(f, f)
    spec = so3_fft_forward(corr)
    at_identity = synthesize_so3_at(spec, [0.0], [0.0], [0.0])[0, 0].real
    assert at_identity >= so3_max_pool(corr)[0] - 1e-10


def test_correlation_is_rotation_equivariant():
    """Correlating a rotated signal equals left-translating the correlation:
    the property every downstream layer relies on."""
    b = 4
    f = noise_s2(b, seed=6)
    psi = noise_s2(b, seed=7)
    r = random_rotation(np.random.default_rng(8))
    lhs = s2_correlate(psi, rotate_s2_spectral(f, r))
    rhs = rotate_so3_spectral(s2_correlate(psi, f), r)
    assert rel_err(lhs.samples, rhs.samples) < 1e-12


def test_character_filter_reproduces_signal():
    # with every coefficient block the identity, correlation acts as the
    # (truncating) identity map
    b = 4
    f = noise_so3(b, seed=9)
    ident = SO3Spectrum.zeros(b, 1)
    for l in range(b):
        ident.blocks(l)[0] = np.eye(2 * l + 1)
    psi = so3_fft_inverse(ident)
    got = so3_correlate(psi, f)
    np.testing.assert_allclose(got.samples, f.samples, atol=1e-12)
    cut = so3_correlate(psi, f, bandwidth_out=2)
    want = so3_fft_inverse(so3_fft_forward(f).truncated(2))
    np.testing.assert_allclose(cut.samples, want.samples, atol=1e-12)


def test_output_bandwidth_truncation_matches_spectrum_slice():
    b, b_out = 5, 3
    f = noise_s2(b, seed=10)
    psi = noise_s2(b, seed=11)
    full = so3_fft_forward(s2_correlate(psi, f))
    cut = so3_fft_forward(s2_correlate(psi, f, bandwidth_out=b_out))
    np.testing.assert_allclose(cut.data, full.truncated(b_out).data, atol=1e-12)


def test_plan_reuse_and_validation():
    plan = make_correlation_plan(4, 2)
    f = noise_s2(4, seed=12)
    psi = noise_s2(4, seed=13)
    out = s2_correlate(psi, f, plan=plan)
    assert out.bandwidth == 2
    with pytest.raises(ValueError, match="plan expects"):
        s2_correlate(noise_s2(3), noise_s2(3), plan=plan)
    with pytest.raises(ValueError, match="conflicts"):
        s2_correlate(psi, f, plan=plan, bandwidth_out=3)
    with pytest.raises(ValueError, match="output bandwidth"):
        make_correlation_plan(4, 5)
    with pytest.raises(ValueError, match="output bandwidth"):
        make_correlation_plan(4, 0)


def test_correlate_input_validation():
    with pytest.raises(ValueError, match="bandwidth"):
        s2_correlate(noise_s2(3), noise_s2(4))
    with pytest.raises(ValueError, match="channels"):
        s2_correlate(noise_s2(3, channels=2), noise_s2(3, channels=1))


def test_multichannel_matches_manual_sum():
    b, k_in, k_out = 3, 2, 3
    f = noise_s2(b, channels=k_in, seed=14)
    bank = noise_s2(b, channels=k_out * k_in, seed=15)
    got = multichannel_correlate(bank, f)
    assert got.channels == k_out
    for o in range(k_out):
        pair = S2Signal(b, bank.samples[o * k_in : (o + 1) * k_in])
        want = s2_correlate(pair, f)
        np.testing.assert_allclose(got.samples[o], want.samples[0], atol=1e-12)


def test_multichannel_accepts_precomputed_bank_spectrum():
    b = 3
    f = noise_so3(b, channels=2, seed=16)
    bank = noise_so3(b, channels=4, seed=17)
    from_signal = multichannel_correlate(bank, f)
    from_spec = multichannel_correlate(so3_fft_forward(bank), f)
    np.testing.assert_allclose(from_spec.samples, from_signal.samples, atol=1e-13)


def test_multichannel_is_linear_in_the_signal():
    b = 3
    bank = noise_s2(b, channels=2, seed=18)
    f = noise_s2(b, seed=19)
    g = noise_s2(b, seed=20)
    combo = S2Signal(b, 2.0 * f.samples - 0.5 * g.samples)
    lhs = multichannel_correlate(bank, combo, out_channels=2)
    rhs = (
        2.0 * multichannel_correlate(bank, f, out_channels=2).samples
        - 0.5 * multichannel_correlate(bank, g, out_channels=2).samples
    )
    np.testing.assert_allclose(lhs.samples, rhs, atol=1e-12)


def test_ragged_bank_rejected():
    f = noise_s2(3, channels=2, seed=21)
    bank = noise_s2(3, channels=5, seed=22)
    with pytest.raises(ValueError, match="multiple"):
        multichannel_correlate(bank, f)
    with pytest.raises(ValueError, match="expected"):
        multichannel_correlate(bank, f, out_channels=2)


def test_bank_domain_mismatch_rejected():
    f = noise_s2(3, channels=1, seed=23)
    bank3 = noise_so3(3, channels=1, seed=24)
    with pytest.raises(ValueError, match="domain"):
        multichannel_correlate(bank3, f)


def test_spectral_rotation_is_unitary():
    spec = s2_fft_forward(noise_s2(6, channels=2, seed=25))
    r = random_rotation(np.random.default_rng(26))
    turned = rotate_s2_spectrum(spec, r)
    np.testing.assert_allclose(
        turned.weighted_energy(), spec.weighted_energy(), rtol=1e-12
    )


@pytest.mark.parametrize("b", [4, 8])
def test_spectral_rotation_matches_resampling_s2(b):
    f = noise_s2(b, seed=b)
    r = random_rotation(np.random.default_rng(27))
    spectral = rotate_s2_spectral(f, r)
    sampled = rotate_s2_by_resampling(f, r)
    np.testing.assert_allclose(spectral.samples, sampled.samples, atol=1e-11)


def test_spectral_rotation_matches_resampling_so3():
    f = noise_so3(3, seed=28)
    r = random_rotation(np.random.default_rng(29))
    spectral = rotate_so3_spectral(f, r)
    sampled = rotate_so3_by_resampling(f, r)
    np.testing.assert_allclose(spectral.samples, sampled.samples, atol=1e-11)


def test_rotation_adjoint_identity():
    # moving the rotation across the inner product flips it to the inverse
    from so3fft.grids import inverse

    b = 4
    f = noise_s2(b, seed=30)
    psi = noise_s2(b, seed=31)
    r = random_rotation(np.random.default_rng(32))
    grid = make_s2_grid(b)
    lhs = grid.integrate(rotate_s2_spectral(psi, r).samples * f.samples)
    rhs = grid.integrate(psi.samples * rotate_s2_spectral(f, inverse(r)).samples)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-11)


def test_dh_convolve_matches_oracle():
    b = 4
    f = noise_s2(b, seed=33)
    psi = noise_s2(b, seed=34)
    got = dh_convolve(f, psi)
    want = dh_convolve_direct(f, psi)
    np.testing.assert_allclose(got.samples, want.samples, atol=1e-12)


def test_dh_convolve_sees_only_the_zonal_part():
    """Convolution projects the filter onto its azimuthal average, while
    correlation keeps the full filter; this pair of checks is the
    expressiveness argument in executable form."""
    b = 4
    f = noise_s2(b, seed=35)
    psi = noise_s2(b, seed=36)
    # zero out every m != 0 filter coefficient to build the zonal average
    ps = s2_fft_forward(psi)
    for l in range(b):
        blk = ps.blocks(l)
        kept = blk[:, l].copy()
        blk[:] = 0.0
        blk[:, l] = kept
    from so3fft.gft import s2_fft_inverse

    zonal = s2_fft_inverse(ps)
    np.testing.assert_allclose(
        dh_convolve(f, psi).samples, dh_convolve(f, zonal).samples, atol=1e-12
    )
    full = s2_correlate(psi, f)
    averaged = s2_correlate(zonal, f)
    assert rel_err(averaged.samples, full.samples) > 1e-3


def test_integrate_and_max_pool_shapes():
    f = noise_so3(2, channels=3, seed=37)
    assert so3_integrate(f).shape == (3,)
    np.testing.assert_allclose(
        so3_integrate(f), make_so3_grid(2).integrate(f.samples)
    )
    pooled = so3_max_pool(f)
    assert pooled.shape == (3,)
    np.testing.assert_allclose(pooled, f.samples.reshape(3, -1).max(axis=1))


def test_relu_clamps_and_keeps_type():
    f = noise_so3(2, seed=38)
    out = relu_spatial(f)
    assert isinstance(out, SO3Signal)
    assert out.samples.min() >= 0.0
    np.testing.assert_allclose(out.samples, np.maximum(f.samples, 0.0))
