"""Wigner rotation matrices, spherical harmonics, and precomputed tables.

Conventions
-----------
The real matrices ``d^l(beta)`` are stored with rows/columns in ascending
order ``m, n = -l .. l`` (entry ``[m + l, n + l]``).  For l = 1 this is::

    [[(1+cos b)/2,  sin b/sqrt2, (1-cos b)/2],
     [-sin b/sqrt2, cos b,       sin b/sqrt2],
     [(1-cos b)/2,  -sin b/sqrt2, (1+cos b)/2]]

The complex blocks factor as ``D^l_mn(alpha, beta, gamma) =
exp(-i m alpha) d^l_mn(beta) exp(-i n gamma)``; they are unitary, satisfy
``D^l(R1) D^l(R2) = D^l(R1 R2)``, and are orthogonal with norm ``1/(2l+1)``
under the normalised Haar measure.  Spherical harmonics are the ``n = 0``
column, ``Y^l_m(alpha, beta) = D^l_m0(alpha, beta, 0)``, so ``Y^1_0 = cos
beta`` and ``<Y^l_m, Y^l_m> = 1/(2l+1)``.

Evaluation uses a three-term recurrence in the degree for fixed ``(m, n)``,
seeded at ``l = max(|m|, |n|)`` by closed forms for the boundary rows and
columns.  Everything is double precision; the recurrence keeps entries
bounded by 1 (up to rounding) out to l of a few hundred.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .grids import Rotation, beta_samples, ring_weights, validate_bandwidth

__all__ = [
    "DEFAULT_TABLE_MEMORY_CAP",
    "ResourceLimitError",
    "WignerTables",
    "build_tables",
    "cached_tables",
    "estimate_table_bytes",
    "spherical_harmonics",
    "spherical_harmonics_stack",
    "wigner_D_matrices",
    "wigner_D_stack",
    "wigner_d_matrices",
    "wigner_d_stack",
]

DEFAULT_TABLE_MEMORY_CAP = 2 * 1024**3  # bytes


class ResourceLimitError(RuntimeError):
    """Raised when an estimated allocation exceeds the configured cap."""


def _validate_degree(l_max) -> int:
    if isinstance(l_max, bool) or not isinstance(l_max, (int, np.integer)):
        raise TypeError(f"l_max must be an integer, got {l_max!r}")
    if l_max < 0:
        raise ValueError(f"l_max must be >= 0, got {l_max}")
    return int(l_max)


def _edge_row_factors(l: int) -> np.ndarray:
    # sqrt(C(2l, l-n)) for n = -l..l, exact integer binomials
    return np.sqrt([float(math.comb(2 * l, l - n)) for n in range(-l, l + 1)])


def wigner_d_stack(l_max: int, betas) -> list[np.ndarray]:
    """All ``d^l(beta)`` blocks for ``l = 0..l_max`` at many angles at once.

    Returns a list of arrays, entry ``l`` shaped ``(len(betas), 2l+1, 2l+1)``.
    """
    l_max = _validate_degree(l_max)
    betas = np.atleast_1d(np.asarray(betas, dtype=np.float64))
    if betas.ndim != 1:
        raise ValueError("betas must be one-dimensional")
    nb = betas.shape[0]
    x = np.cos(betas)
    sin_b = np.sin(betas)
    c_half = np.cos(0.5 * betas)
    s_half = np.sin(0.5 * betas)

    blocks = [np.ones((nb, 1, 1))]
    if l_max == 0:
        return blocks

    d1 = np.empty((nb, 3, 3))
    d1[:, 0, 0] = 0.5 * (1.0 + x)
    d1[:, 0, 1] = sin_b / np.sqrt(2.0)
    d1[:, 0, 2] = 0.5 * (1.0 - x)
    d1[:, 1, 0] = -d1[:, 0, 1]
    d1[:, 1, 1] = x
    d1[:, 1, 2] = d1[:, 0, 1]
    d1[:, 2, 0] = d1[:, 0, 2]
    d1[:, 2, 1] = -d1[:, 0, 1]
    d1[:, 2, 2] = d1[:, 0, 0]
    blocks.append(d1)

    for l in range(2, l_max + 1):
        d = np.empty((nb, 2 * l + 1, 2 * l + 1))

        # interior |m|, |n| <= l-1: three-term recurrence in the degree
        mi = np.arange(-(l - 1), l, dtype=np.float64)
        mm = mi[:, None]
        nn = mi[None, :]
        lhs = (l - 1) * np.sqrt((l * l - mm * mm) * (l * l - nn * nn))
        c_prev = (2 * l - 1) * ((l - 1) * l * x[:, None, None] - mm * nn)
        low = (l - 1) ** 2 - mm * mm
        low = low * ((l - 1) ** 2 - nn * nn)
        c_prev2 = l * np.sqrt(np.maximum(low, 0.0))
        prev = blocks[l - 1]
        prev2 = np.zeros_like(prev)  # zero-pad d^{l-2} out to d^{l-1}'s frame
        prev2[:, 1:-1, 1:-1] = blocks[l - 2]
        d[:, 1:-1, 1:-1] = (c_prev * prev - c_prev2 * prev2) / lhs

        # boundary rows m = +/-l and columns n = +/-l: closed forms
        root = _edge_row_factors(l)
        j = np.arange(-l, l + 1)
        cj = c_half[:, None]
        sj = s_half[:, None]
        sign_top = np.where((l - j) % 2 == 0, 1.0, -1.0)
        d[:, 2 * l, :] = sign_top * root * cj ** (l + j) * sj ** (l - j)
        d[:, 0, :] = root * cj ** (l - j) * sj ** (l + j)
        sign_neg = np.where((l + j) % 2 == 0, 1.0, -1.0)
        d[:, :, 2 * l] = root * cj ** (l + j) * sj ** (l - j)
        d[:, :, 0] = sign_neg * root * cj ** (l - j) * sj ** (l + j)
        blocks.append(d)
    return blocks


def wigner_d_matrices(l_max: int, beta: float) -> list[np.ndarray]:
    """``d^l(beta)`` for ``l = 0..l_max`` at a single angle."""
    return [blk[0] for blk in wigner_d_stack(l_max, [float(beta)])]


def _phases(l_max: int, angles: np.ndarray) -> np.ndarray:
    # exp(-i m angle) for m = -l_max..l_max, shape (len(angles), 2*l_max+1)
    m = np.arange(-l_max, l_max + 1)
    return np.exp(-1j * np.outer(angles, m))


def wigner_D_stack(l_max: int, alphas, betas, gammas) -> list[np.ndarray]:
    """Complex ``D^l`` blocks at many rotations; entry ``l`` is shaped
    ``(npoints, 2l+1, 2l+1)``."""
    alphas = np.atleast_1d(np.asarray(alphas, dtype=np.float64))
    betas = np.atleast_1d(np.asarray(betas, dtype=np.float64))
    gammas = np.atleast_1d(np.asarray(gammas, dtype=np.float64))
    if not (alphas.shape == betas.shape == gammas.shape):
        raise ValueError("alpha/beta/gamma arrays must have matching shapes")
    d = wigner_d_stack(l_max, betas)
    pa = _phases(l_max, alphas)
    pg = _phases(l_max, gammas)
    out = []
    for l in range(l_max + 1):
        sl = slice(l_max - l, l_max + l + 1)
        out.append(pa[:, sl, None] * d[l] * pg[:, None, sl])
    return out


def wigner_D_matrices(l_max: int, rotation: Rotation) -> list[np.ndarray]:
    """``D^l(rotation)`` for ``l = 0..l_max`` as complex unitary blocks."""
    stack = wigner_D_stack(
        l_max, [rotation.alpha], [rotation.beta], [rotation.gamma]
    )
    return [blk[0] for blk in stack]


def spherical_harmonics_stack(l_max: int, alphas, betas) -> list[np.ndarray]:
    """``Y^l_m`` at many points; entry ``l`` is shaped ``(npoints, 2l+1)``."""
    alphas = np.atleast_1d(np.asarray(alphas, dtype=np.float64))
    betas = np.atleast_1d(np.asarray(betas, dtype=np.float64))
    if alphas.shape != betas.shape:
        raise ValueError("alpha/beta arrays must have matching shapes")
    d = wigner_d_stack(l_max, betas)
    pa = _phases(l_max, alphas)
    out = []
    for l in range(l_max + 1):
        sl = slice(l_max - l, l_max + l + 1)
        out.append(pa[:, sl] * d[l][:, :, l])
    return out


def spherical_harmonics(l_max: int, alpha: float, beta: float) -> list[np.ndarray]:
    """``Y^l_m(alpha, beta)`` for ``l = 0..l_max``, each a ``(2l+1,)`` vector."""
    stack = spherical_harmonics_stack(l_max, [alpha], [beta])
    return [blk[0] for blk in stack]


def estimate_table_bytes(bandwidth: int) -> int:
    """Bytes needed for the ``d^l`` sample tables at one bandwidth."""
    b = validate_bandwidth(bandwidth)
    entries_per_ring = b * (2 * b - 1) * (2 * b + 1) // 3
    return 8 * 2 * b * entries_per_ring


@dataclass(frozen=True)
class WignerTables:
    """``d^l`` samples at the grid colatitudes plus the ring weights.

    ``d[l]`` is shaped ``(2b, 2l+1, 2l+1)`` with the ring index leading, so
    the beta contraction in the transforms streams each degree sequentially.
    ``weights`` are the colatitude ring weights (summing to 1); the uniform
    alpha/gamma factors are supplied by the transforms themselves.
    """

    bandwidth: int
    d: list[np.ndarray] = field(repr=False)
    weights: np.ndarray = field(repr=False)


def build_tables(
    bandwidth: int, memory_cap_bytes: int = DEFAULT_TABLE_MEMORY_CAP
) -> WignerTables:
    """Precompute the sampled Wigner-d tables for one bandwidth.

    The memory footprint is estimated up front; exceeding ``memory_cap_bytes``
    raises :class:`ResourceLimitError` before anything is allocated.
    """
    b = validate_bandwidth(bandwidth)
    estimate = estimate_table_bytes(b)
    if estimate > memory_cap_bytes:
        raise ResourceLimitError(
            f"d tables at bandwidth {b} need ~{estimate / 1e6:.0f} MB, "
            f"over the cap of {memory_cap_bytes / 1e6:.0f} MB"
        )
    return WignerTables(
        bandwidth=b,
        d=wigner_d_stack(b - 1, beta_samples(b)),
        weights=ring_weights(b),
    )


_TABLE_CACHE: OrderedDict[int, WignerTables] = OrderedDict()
_TABLE_CACHE_SLOTS = 4


def cached_tables(bandwidth: int) -> WignerTables:
    """LRU-cached :func:`build_tables`; keeps a handful of bandwidths alive."""
    b = validate_bandwidth(bandwidth)
    if b in _TABLE_CACHE:
        _TABLE_CACHE.move_to_end(b)
        return _TABLE_CACHE[b]
    tables = build_tables(b)
    _TABLE_CACHE[b] = tables
    while len(_TABLE_CACHE) > _TABLE_CACHE_SLOTS:
        _TABLE_CACHE.popitem(last=False)
    return tables
