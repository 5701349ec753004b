"""Signal ingestion and the SSF1 container format.

Ingestion covers two sources: grayscale images pushed onto the northern
hemisphere by inverse stereographic projection, and per-charge Coulomb
potential channels sampled on a sphere around one atom of a molecule.

The container is deliberately dull: a magic string, a version, a JSON
header, a raw little-endian payload, and a trailing CRC-64 so corruption
is loud.  Every object round-trips bitwise.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass

import numpy as np

from .gft import (
    S2Signal,
    S2Spectrum,
    SO3Signal,
    SO3Spectrum,
    s2_coefficient_count,
    so3_coefficient_count,
)
from .grids import make_s2_grid, sphere_to_cartesian, validate_bandwidth
from .harmonics import WignerTables

__all__ = [
    "BadMagicError",
    "ChecksumError",
    "ContainerError",
    "MoleculeSpec",
    "PlanarImage",
    "TruncatedError",
    "VersionError",
    "crc64",
    "default_radius",
    "molecule_channels",
    "project_image",
    "read_container",
    "read_molecule",
    "read_pgm",
    "write_container",
]

MOLECULE_BANDWIDTH_DEFAULT = 10
SINGULAR_DISTANCE = 1e-9

# ---------------------------------------------------------------------------
# planar images


@dataclass(frozen=True)
class PlanarImage:
    """Grayscale raster with values in [0, 1]; row 0 is the top."""

    values: np.ndarray  # (height, width) float64

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError(f"image must be 2-D and non-empty, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("image has non-finite pixels")
        if values.min() < 0.0 or values.max() > 1.0:
            raise ValueError("pixel values must lie in [0, 1]")
        object.__setattr__(self, "values", values)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


def _pgm_tokens(data: bytes):
    """Yield whitespace-separated header tokens, skipping # comments."""
    pos = 0
    while pos < len(data):
        ch = data[pos : pos + 1]
        if ch.isspace():
            pos += 1
        elif ch == b"#":
            end = data.find(b"\n", pos)
            pos = len(data) if end < 0 else end + 1
        else:
            end = pos
            while end < len(data) and not data[end : end + 1].isspace():
                end += 1
            yield data[pos:end], end
            pos = end


def read_pgm(path) -> PlanarImage:
    """Load a portable graymap, either ASCII (P2) or binary (P5)."""
    with open(path, "rb") as fh:
        data = fh.read()

    tokens = _pgm_tokens(data)
    try:
        magic, _ = next(tokens)
    except StopIteration:
        raise ValueError(f"{path}: empty graymap") from None
    if magic not in (b"P2", b"P5"):
        raise ValueError(f"{path}: not a P2/P5 graymap (magic {magic!r})")
    try:
        width, _ = next(tokens)
        height, _ = next(tokens)
        maxval, after = next(tokens)
        width, height, maxval = int(width), int(height), int(maxval)
    except (StopIteration, ValueError):
        raise ValueError(f"{path}: malformed graymap header") from None
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise ValueError(f"{path}: bad graymap dimensions")

    count = width * height
    if magic == b"P2":
        flat = []
        for token, _ in tokens:
            flat.append(int(token))
            if len(flat) == count:
                break
        if len(flat) < count:
            raise ValueError(f"{path}: graymap raster ends early")
        raster = np.array(flat, dtype=np.float64)
    else:
        # single whitespace byte separates the header from the raster
        offset = after + 1
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = count * dtype.itemsize
        raw = data[offset : offset + need]
        if len(raw) < need:
            raise ValueError(f"{path}: graymap raster ends early")
        raster = np.frombuffer(raw, dtype=dtype).astype(np.float64)
    return PlanarImage(raster.reshape(height, width) / maxval)


_SQUARE_HALF = math.sqrt(2.0)  # image square inscribed in the equator disk


def project_image(image: PlanarImage, bandwidth: int) -> S2Signal:
    """Wrap a flat image onto the northern hemisphere.

    The plane touches the sphere at the north pole and points are pulled
    back along rays through the south pole, so the equator maps to the
    radius-2 circle; the image square is scaled to sit inside it, which
    keeps every nonzero sample strictly north of the equator.  Grid points
    that land outside the image are zero; inside, pixels are sampled
    bilinearly.
    """
    validate_bandwidth(bandwidth)
    grid = make_s2_grid(bandwidth)
    av, bv = np.meshgrid(grid.alphas, grid.betas)
    x, y, z = np.moveaxis(sphere_to_cartesian(av, bv), -1, 0)
    # projection from the south pole onto the z = 1 tangent plane
    u = 2.0 * x / (1.0 + z)
    v = 2.0 * y / (1.0 + z)

    # continuous pixel coordinates; (u, v) = (0, 0) is the image center
    col = (u + _SQUARE_HALF) / (2.0 * _SQUARE_HALF) * image.width - 0.5
    row = (_SQUARE_HALF - v) / (2.0 * _SQUARE_HALF) * image.height - 0.5

    c0 = np.floor(col).astype(np.int64)
    r0 = np.floor(row).astype(np.int64)
    fc = col - c0
    fr = row - r0

    values = np.zeros_like(u)
    for dr, dc, weight in (
        (0, 0, (1 - fr) * (1 - fc)),
        (0, 1, (1 - fr) * fc),
        (1, 0, fr * (1 - fc)),
        (1, 1, fr * fc),
    ):
        rr = r0 + dr
        cc = c0 + dc
        inside = (rr >= 0) & (rr < image.height) & (cc >= 0) & (cc < image.width)
        values[inside] += (
            weight[inside] * image.values[rr[inside], cc[inside]]
        )
    return S2Signal(bandwidth, values[None])


# ---------------------------------------------------------------------------
# molecules


@dataclass(frozen=True)
class MoleculeSpec:
    """Atom positions and charges plus the sampling-sphere radius."""

    positions: np.ndarray  # (N, 3)
    charges: np.ndarray  # (N,) positive
    radius: float

    def __post_init__(self) -> None:
        positions = np.asarray(self.positions, dtype=np.float64)
        charges = np.asarray(self.charges, dtype=np.float64)
        if positions.ndim != 2 or positions.shape[1] != 3 or positions.shape[0] < 1:
            raise ValueError(f"positions must be (N, 3) with N >= 1, got {positions.shape}")
        if charges.shape != (positions.shape[0],):
            raise ValueError("one charge per atom required")
        if not np.all(np.isfinite(positions)):
            raise ValueError("positions must be finite")
        if np.any(charges <= 0) or not np.all(np.isfinite(charges)):
            raise ValueError("charges must be positive and finite")
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"radius must be positive, got {self.radius}")
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "charges", charges)

    @property
    def atom_count(self) -> int:
        return self.positions.shape[0]

    @property
    def charge_types(self) -> np.ndarray:
        """Distinct charges, ascending; one signal channel per entry."""
        return np.unique(self.charges)


def default_radius(positions: np.ndarray) -> float:
    """A sphere radius that keeps per-atom spheres from touching: just
    under half the minimum interatomic distance."""
    positions = np.asarray(positions, dtype=np.float64)
    if positions.shape[0] < 2:
        return 1.0
    diffs = positions[:, None, :] - positions[None, :, :]
    dist = np.sqrt((diffs**2).sum(axis=-1))
    np.fill_diagonal(dist, np.inf)
    return 0.45 * float(dist.min())


def read_molecule(path, radius: float | None = None) -> MoleculeSpec:
    """Parse an atom-per-line text file: ``charge x y z``."""
    charges = []
    positions = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            if len(parts) != 4:
                raise ValueError(
                    f"{path}:{lineno}: expected 'charge x y z', got {stripped!r}"
                )
            try:
                z, px, py, pz = (float(p) for p in parts)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric field") from None
            charges.append(z)
            positions.append((px, py, pz))
    if not charges:
        raise ValueError(f"{path}: no atoms found")
    positions = np.array(positions)
    if radius is None:
        radius = default_radius(positions)
    return MoleculeSpec(positions, np.array(charges), radius)


def molecule_channels(
    molecule: MoleculeSpec,
    center: int,
    bandwidth: int = MOLECULE_BANDWIDTH_DEFAULT,
) -> S2Signal:
    """Coulomb-style potential channels on a sphere around one atom.

    Channel t (one per distinct charge z, ascending) holds, at sphere
    point x, the sum over other atoms j with charge z of
    ``z_center * z / |x_world - p_j|`` where x_world lies on the sphere of
    the configured radius centered on the chosen atom.  Translating the
    whole molecule changes nothing; rotating it about the center atom
    rotates the signal.
    """
    validate_bandwidth(bandwidth)
    if not 0 <= center < molecule.atom_count:
        raise ValueError(
            f"center atom {center} out of range 0..{molecule.atom_count - 1}"
        )
    grid = make_s2_grid(bandwidth)
    av, bv = np.meshgrid(grid.alphas, grid.betas)
    points = (
        molecule.positions[center]
        + molecule.radius * sphere_to_cartesian(av, bv)
    )  # (2b, 2b, 3)

    types = molecule.charge_types
    z_center = molecule.charges[center]
    out = np.zeros((types.size,) + av.shape)
    for j in range(molecule.atom_count):
        if j == center:
            continue
        dist = np.sqrt(((points - molecule.positions[j]) ** 2).sum(axis=-1))
        nearest = float(dist.min())
        if nearest < SINGULAR_DISTANCE:
            raise ValueError(
                f"singular potential: atom {j} is {nearest:.3e} from a "
                f"sphere sample point"
            )
        channel = int(np.searchsorted(types, molecule.charges[j]))
        out[channel] += z_center * molecule.charges[j] / dist
    return S2Signal(bandwidth, out)


# ---------------------------------------------------------------------------
# CRC-64 (the xz variant: reflected 0xC96C5795D7870F42, init/xorout all-ones)


def _crc_tables() -> list[list[int]]:
    poly = 0xC96C5795D7870F42
    first = []
    for i in range(256):
        crc = i
        for _ in range(8):
            crc = (crc >> 1) ^ poly if crc & 1 else crc >> 1
        first.append(crc)
    tables = [first]
    for _ in range(7):
        prev = tables[-1]
        tables.append([first[value & 0xFF] ^ (value >> 8) for value in prev])
    return tables


_CRC_TABLES = _crc_tables()
_CRC_MASK = 0xFFFFFFFFFFFFFFFF


def crc64(data: bytes, crc: int = 0) -> int:
    """CRC-64/XZ of a byte string; chainable via the crc argument."""
    t0, t1, t2, t3, t4, t5, t6, t7 = _CRC_TABLES
    crc ^= _CRC_MASK
    view = memoryview(data)
    head = len(view) - len(view) % 8
    for i in range(0, head, 8):
        crc ^= int.from_bytes(view[i : i + 8], "little")
        crc = (
            t7[crc & 0xFF]
            ^ t6[(crc >> 8) & 0xFF]
            ^ t5[(crc >> 16) & 0xFF]
            ^ t4[(crc >> 24) & 0xFF]
            ^ t3[(crc >> 32) & 0xFF]
            ^ t2[(crc >> 40) & 0xFF]
            ^ t1[(crc >> 48) & 0xFF]
            ^ t0[(crc >> 56) & 0xFF]
        )
    for byte in view[head:]:
        crc = t0[(crc ^ byte) & 0xFF] ^ (crc >> 8)
    return crc ^ _CRC_MASK


# ---------------------------------------------------------------------------
# SSF1 container


class ContainerError(Exception):
    """Malformed or unreadable SSF1 file."""


class BadMagicError(ContainerError):
    pass


class VersionError(ContainerError):
    pass


class TruncatedError(ContainerError):
    pass


class ChecksumError(ContainerError):
    pass


_MAGIC = b"SSF1"
_VERSION = 1

_LAYOUTS = {
    "s2": "channel-beta-alpha",
    "so3": "channel-beta-alpha-gamma",
    "s2spec": "channel-major degree-ascending blocks, re/im interleaved",
    "so3spec": "channel-major degree-ascending blocks, re/im interleaved",
    "wigner-tables": "ring weights then degree-ascending d blocks",
}


def _payload_spec(kind: str, bandwidth: int, channels: int):
    """(dtype string, element count) for each container type."""
    n = 2 * bandwidth
    if kind == "s2":
        return "f64", channels * n * n
    if kind == "so3":
        return "f64", channels * n * n * n
    if kind == "s2spec":
        return "c128", channels * s2_coefficient_count(bandwidth)
    if kind == "so3spec":
        return "c128", channels * so3_coefficient_count(bandwidth)
    if kind == "wigner-tables":
        count = n + sum((2 * l + 1) ** 2 * n for l in range(bandwidth))
        return "f64", count
    raise ContainerError(f"unknown container type {kind!r}")


def _object_parts(obj):
    if isinstance(obj, S2Signal):
        return "s2", obj.bandwidth, obj.channels, obj.samples
    if isinstance(obj, SO3Signal):
        return "so3", obj.bandwidth, obj.channels, obj.samples
    if isinstance(obj, S2Spectrum):
        return "s2spec", obj.bandwidth, obj.channels, obj.data
    if isinstance(obj, SO3Spectrum):
        return "so3spec", obj.bandwidth, obj.channels, obj.data
    if isinstance(obj, WignerTables):
        flat = np.concatenate(
            [obj.weights] + [block.ravel() for block in obj.d]
        )
        return "wigner-tables", obj.bandwidth, 0, flat
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_container(path, obj) -> None:
    """Serialize a signal, spectrum, or table set; see read_container."""
    kind, bandwidth, channels, array = _object_parts(obj)
    dtype, count = _payload_spec(kind, bandwidth, channels)
    payload = np.ascontiguousarray(
        array, dtype="<f8" if dtype == "f64" else "<c16"
    ).tobytes()
    assert len(payload) == count * (8 if dtype == "f64" else 16)

    header = json.dumps(
        {
            "type": kind,
            "bandwidth": bandwidth,
            "channels": channels,
            "dtype": dtype,
            "layout": _LAYOUTS[kind],
        },
        sort_keys=True,
    ).encode("utf-8")

    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", _VERSION))
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(payload)
        fh.write(struct.pack("<Q", crc64(payload)))


def _parse_fixed_header(blob: bytes, path) -> tuple[dict, int]:
    """Validate magic/version and return (header dict, payload offset)."""
    if len(blob) < 12:
        raise TruncatedError(f"{path}: shorter than the fixed header")
    if blob[:4] != _MAGIC:
        raise BadMagicError(f"{path}: bad magic {blob[:4]!r}")
    (version,) = struct.unpack("<I", blob[4:8])
    if version != _VERSION:
        raise VersionError(f"{path}: format version {version}, expected {_VERSION}")
    (header_len,) = struct.unpack("<I", blob[8:12])
    if len(blob) < 12 + header_len:
        raise TruncatedError(f"{path}: header ends early")
    try:
        header = json.loads(blob[12 : 12 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ContainerError(f"{path}: unparseable header: {exc}") from None
    for key in ("type", "bandwidth", "channels", "dtype", "layout"):
        if key not in header:
            raise ContainerError(f"{path}: header missing {key!r}")
    return header, 12 + header_len


def read_container_header(path) -> dict:
    """Parse and validate just the JSON header."""
    with open(path, "rb") as fh:
        blob = fh.read(12)
        if len(blob) == 12:
            (header_len,) = struct.unpack("<I", blob[8:12])
            blob += fh.read(header_len)
    header, _ = _parse_fixed_header(blob, path)
    return header


def read_container(path):
    """Load whatever write_container stored, verifying the checksum."""
    with open(path, "rb") as fh:
        blob = fh.read()
    header, offset = _parse_fixed_header(blob, path)

    kind = header["type"]
    bandwidth = header["bandwidth"]
    channels = header["channels"]
    if not isinstance(bandwidth, int) or bandwidth < 1:
        raise ContainerError(f"{path}: bad bandwidth {bandwidth!r}")
    if not isinstance(channels, int) or channels < 0:
        raise ContainerError(f"{path}: bad channel count {channels!r}")
    dtype, count = _payload_spec(kind, bandwidth, channels)
    if header["dtype"] != dtype:
        raise ContainerError(
            f"{path}: dtype {header['dtype']!r} does not match type {kind!r}"
        )
    size = count * (8 if dtype == "f64" else 16)

    payload = blob[offset : offset + size]
    if len(payload) < size:
        raise TruncatedError(f"{path}: payload ends early")
    tail = blob[offset + size :]
    if len(tail) < 8:
        raise TruncatedError(f"{path}: checksum missing")
    if len(tail) > 8:
        raise ContainerError(f"{path}: trailing bytes after checksum")
    (stored,) = struct.unpack("<Q", tail)
    actual = crc64(payload)
    if stored != actual:
        raise ChecksumError(
            f"{path}: checksum {actual:#018x} != stored {stored:#018x}"
        )

    n = 2 * bandwidth
    if kind == "s2":
        flat = np.frombuffer(payload, dtype="<f8")
        return S2Signal(bandwidth, flat.reshape(channels, n, n).copy())
    if kind == "so3":
        flat = np.frombuffer(payload, dtype="<f8")
        return SO3Signal(bandwidth, flat.reshape(channels, n, n, n).copy())
    if kind == "s2spec":
        spec = S2Spectrum.zeros(bandwidth, channels)
        spec.data[:] = np.frombuffer(payload, dtype="<c16").reshape(channels, -1)
        return spec
    if kind == "so3spec":
        spec = SO3Spectrum.zeros(bandwidth, channels)
        spec.data[:] = np.frombuffer(payload, dtype="<c16").reshape(channels, -1)
        return spec
    flat = np.frombuffer(payload, dtype="<f8")
    weights = flat[:n].copy()
    blocks = []
    pos = n
    for l in range(bandwidth):
        width = 2 * l + 1
        blocks.append(flat[pos : pos + width * width * n].reshape(n, width, width).copy())
        pos += width * width * n
    return WignerTables(bandwidth, blocks, weights)
