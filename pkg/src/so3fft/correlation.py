"""Rotation cross-correlation via the block-diagonal spectral product.

For real inputs, correlating a filter bank against a signal reduces degree
by degree to ``C^l = fhat^l @ conj(psihat^l).T`` (outer product when the
inputs live on the sphere), after which one inverse transform on the
rotation group recovers the correlation values on the full grid.  The same
spectral route gives exact rotation of bandlimited signals and the zonal
spherical convolution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gft import (
    S2Signal,
    S2Spectrum,
    SO3Signal,
    SO3Spectrum,
    s2_fft_forward,
    s2_fft_inverse,
    so3_fft_forward,
    so3_fft_inverse,
)
from .grids import Rotation, make_so3_grid
from .harmonics import WignerTables, cached_tables, wigner_D_matrices

__all__ = [
    "CorrelationPlan",
    "dh_convolve",
    "make_correlation_plan",
    "multichannel_correlate",
    "relu_spatial",
    "rotate_s2_spectral",
    "rotate_s2_spectrum",
    "rotate_so3_spectral",
    "rotate_so3_spectrum",
    "s2_correlate",
    "so3_correlate",
    "so3_integrate",
    "so3_max_pool",
]


@dataclass(frozen=True)
class CorrelationPlan:
    """Precomputed tables for repeated correlations at fixed shapes."""

    bandwidth_in: int
    bandwidth_out: int
    tables_in: WignerTables
    tables_out: WignerTables


def make_correlation_plan(
    bandwidth_in: int, bandwidth_out: int | None = None
) -> CorrelationPlan:
    b_out = bandwidth_in if bandwidth_out is None else bandwidth_out
    if not 1 <= b_out <= bandwidth_in:
        raise ValueError(
            f"output bandwidth must be in 1..{bandwidth_in}, got {b_out}"
        )
    tables_in = cached_tables(bandwidth_in)
    tables_out = tables_in if b_out == bandwidth_in else cached_tables(b_out)
    return CorrelationPlan(bandwidth_in, b_out, tables_in, tables_out)


def _resolve_plan(f, psi, plan, bandwidth_out) -> CorrelationPlan:
    if psi.bandwidth != f.bandwidth:
        raise ValueError(
            f"filter bandwidth {psi.bandwidth} != signal bandwidth {f.bandwidth}"
        )
    if plan is None:
        return make_correlation_plan(f.bandwidth, bandwidth_out)
    if plan.bandwidth_in != f.bandwidth:
        raise ValueError(
            f"plan expects bandwidth {plan.bandwidth_in}, got {f.bandwidth}"
        )
    if bandwidth_out is not None and bandwidth_out != plan.bandwidth_out:
        raise ValueError("bandwidth_out conflicts with the supplied plan")
    return plan


def _split_bank(bank, k_in: int, out_channels: int | None) -> int:
    if out_channels is None:
        if bank.channels % k_in:
            raise ValueError(
                f"bank has {bank.channels} channels, not a multiple of the "
                f"signal's {k_in}"
            )
        return bank.channels // k_in
    if bank.channels != out_channels * k_in:
        raise ValueError(
            f"bank has {bank.channels} channels, expected "
            f"{out_channels} * {k_in}"
        )
    return out_channels


def s2_correlate(
    psi: S2Signal,
    f: S2Signal,
    plan: CorrelationPlan | None = None,
    bandwidth_out: int | None = None,
) -> SO3Signal:
    """Correlation of a filter with a signal over all rotations; channels
    are matched pairwise and summed, giving a single output channel."""
    if psi.channels != f.channels:
        raise ValueError(
            f"filter channels {psi.channels} != signal channels {f.channels}"
        )
    plan = _resolve_plan(f, psi, plan, bandwidth_out)
    fs = s2_fft_forward(f, plan.tables_in)
    ps = s2_fft_forward(psi, plan.tables_in)
    out = SO3Spectrum.zeros(plan.bandwidth_out, 1)
    for l in range(plan.bandwidth_out):
        out.blocks(l)[0] = np.einsum(
            "km,kn->mn", fs.blocks(l), ps.blocks(l).conj()
        )
    return so3_fft_inverse(out, plan.tables_out)


def so3_correlate(
    psi: SO3Signal,
    f: SO3Signal,
    plan: CorrelationPlan | None = None,
    bandwidth_out: int | None = None,
) -> SO3Signal:
    """Correlation on the rotation group itself: per degree a plain matrix
    product of the coefficient blocks."""
    if psi.channels != f.channels:
        raise ValueError(
            f"filter channels {psi.channels} != signal channels {f.channels}"
        )
    plan = _resolve_plan(f, psi, plan, bandwidth_out)
    fs = so3_fft_forward(f, plan.tables_in)
    ps = so3_fft_forward(psi, plan.tables_in)
    out = SO3Spectrum.zeros(plan.bandwidth_out, 1)
    for l in range(plan.bandwidth_out):
        out.blocks(l)[0] = np.einsum(
            "kmn,kpn->mp", fs.blocks(l), ps.blocks(l).conj()
        )
    return so3_fft_inverse(out, plan.tables_out)


def multichannel_correlate(
    bank,
    f,
    plan: CorrelationPlan | None = None,
    bandwidth_out: int | None = None,
    out_channels: int | None = None,
) -> SO3Signal:
    """Correlate a stacked filter bank against a multichannel signal.

    The bank carries ``out_channels * f.channels`` channels, laid out with
    the input channel varying fastest; output channel o is the sum over
    input channels k of the correlation of bank channel ``o * K + k`` with
    signal channel k.  The bank may be passed pre-transformed (as a
    spectrum on the same domain), which callers applying one bank to many
    signals should do.
    """
    on_sphere = isinstance(f, S2Signal)
    spec_cls = S2Spectrum if on_sphere else SO3Spectrum
    k_in = f.channels
    k_out = _split_bank(bank, k_in, out_channels)
    plan = _resolve_plan(f, bank, plan, bandwidth_out)

    fwd = s2_fft_forward if on_sphere else so3_fft_forward
    fs = fwd(f, plan.tables_in)
    if isinstance(bank, spec_cls):
        ps = bank
    elif type(bank) is type(f):
        ps = fwd(bank, plan.tables_in)
    else:
        raise ValueError("bank and signal must live on the same domain")
    out = SO3Spectrum.zeros(plan.bandwidth_out, k_out)
    for l in range(plan.bandwidth_out):
        bank_l = ps.blocks(l).conj().reshape((k_out, k_in) + ps.blocks(l).shape[1:])
        if on_sphere:
            out.blocks(l)[:] = np.einsum(
                "km,okn->omn", fs.blocks(l), bank_l, optimize=True
            )
        else:
            out.blocks(l)[:] = np.einsum(
                "kmn,okpn->omp", fs.blocks(l), bank_l, optimize=True
            )
    return so3_fft_inverse(out, plan.tables_out)


def so3_integrate(signal: SO3Signal) -> np.ndarray:
    """Normalized Haar integral of each channel, shape ``(channels,)``."""
    return make_so3_grid(signal.bandwidth).integrate(signal.samples)


def so3_max_pool(signal: SO3Signal) -> np.ndarray:
    """Per-channel maximum over the rotation grid, shape ``(channels,)``."""
    flat = signal.samples.reshape(signal.channels, -1)
    return flat.max(axis=1)


def relu_spatial(signal):
    """Pointwise max(x, 0) on the grid samples; spills energy past the
    bandlimit, so downstream transforms see an aliased signal."""
    return type(signal)(signal.bandwidth, np.maximum(signal.samples, 0.0))


def rotate_s2_spectrum(spectrum: S2Spectrum, rotation: Rotation) -> S2Spectrum:
    """Coefficients of ``x -> f(R^-1 x)``: left-multiply each degree block
    by the conjugate rotation matrix."""
    d = wigner_D_matrices(spectrum.bandwidth - 1, rotation)
    out = spectrum.copy()
    for l in range(spectrum.bandwidth):
        out.blocks(l)[:] = spectrum.blocks(l) @ d[l].conj().T
    return out


def rotate_so3_spectrum(spectrum: SO3Spectrum, rotation: Rotation) -> SO3Spectrum:
    d = wigner_D_matrices(spectrum.bandwidth - 1, rotation)
    out = spectrum.copy()
    for l in range(spectrum.bandwidth):
        out.blocks(l)[:] = np.einsum(
            "mp,kpn->kmn", d[l].conj(), spectrum.blocks(l)
        )
    return out


def rotate_s2_spectral(
    signal: S2Signal, rotation: Rotation, tables: WignerTables | None = None
) -> S2Signal:
    """Rotate by a round trip through coefficient space; exact for
    bandlimited signals, unlike any pointwise interpolation."""
    spec = rotate_s2_spectrum(s2_fft_forward(signal, tables), rotation)
    return s2_fft_inverse(spec, tables)


def rotate_so3_spectral(
    signal: SO3Signal, rotation: Rotation, tables: WignerTables | None = None
) -> SO3Signal:
    spec = rotate_so3_spectrum(so3_fft_forward(signal, tables), rotation)
    return so3_fft_inverse(spec, tables)


def dh_convolve(
    f: S2Signal, psi: S2Signal, tables: WignerTables | None = None
) -> S2Signal:
    """Spherical convolution; only the azimuthal average of the filter
    survives, which is exactly why correlation is the more expressive
    primitive."""
    if psi.bandwidth != f.bandwidth:
        raise ValueError(
            f"filter bandwidth {psi.bandwidth} != signal bandwidth {f.bandwidth}"
        )
    if psi.channels != f.channels:
        raise ValueError(
            f"filter channels {psi.channels} != signal channels {f.channels}"
        )
    fs = s2_fft_forward(f, tables)
    ps = s2_fft_forward(psi, tables)
    out = S2Spectrum.zeros(f.bandwidth, 1)
    for l in range(f.bandwidth):
        # only the m = 0 line of the filter enters
        out.blocks(l)[0] = np.einsum(
            "km,k->m", fs.blocks(l), ps.blocks(l)[:, l]
        )
    return s2_fft_inverse(out, tables)
