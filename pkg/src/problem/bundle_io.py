"""
Binary persistence for ProblemBundle.

File layout, all little-endian:

    header   b"CAPPA-SR\\0"  9 bytes magic
             u16 version (1)
             u32 m, u32 n, u32 s (0 when no ground truth)
             f64 lambda, f64 sigma, u64 seed
             u8  truth-present flag
    payload  phi   m*n f64, column-major
             y     m f64
             x_true n f64 (only when the flag is set)

Floats are written bit for bit, so a load after a save reproduces every field
exactly.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Union

import numpy as np

from src.problem.problem_model import GroundTruth, ProblemBundle, SparseProblem
from src.utils.exceptions import BundleIntegrityError, BundleParseError, CappaError
from src.utils.logger import get_logger

logger = get_logger(__name__)

MAGIC = b"CAPPA-SR\0"
VERSION = 1
_HEADER = struct.Struct("<9sHIIIddQB")
_F64 = np.dtype("<f8")

PathLike = Union[str, Path]


def encode_bundle(bundle: ProblemBundle) -> bytes:
    problem, truth = bundle.problem, bundle.truth
    header = _HEADER.pack(
        MAGIC, VERSION, problem.m, problem.n,
        truth.s if truth else 0,
        problem.lam,
        truth.sigma if truth else 0.0,
        truth.seed if truth else 0,
        1 if truth else 0,
    )
    parts = [header,
             problem.phi.astype(_F64).tobytes(order="F"),
             problem.y.astype(_F64).tobytes()]
    if truth is not None:
        parts.append(truth.x_true.astype(_F64).tobytes())
    return b"".join(parts)


def _take(buf: memoryview, offset: int, count: int, record: str):
    end = offset + count * _F64.itemsize
    if end > len(buf):
        raise BundleParseError(
            record, f"truncated: need {count} values, "
                    f"{max(0, len(buf) - offset) // _F64.itemsize} present")
    return np.frombuffer(buf[offset:end], dtype=_F64).copy(), end


def decode_bundle(data: bytes) -> ProblemBundle:
    buf = memoryview(data)
    if len(buf) < _HEADER.size:
        raise BundleParseError("header", f"truncated: {len(buf)} of {_HEADER.size} bytes")
    magic, version, m, n, s, lam, sigma, seed, flag = _HEADER.unpack_from(buf, 0)
    if magic != MAGIC:
        raise BundleParseError("header", "bad magic bytes")
    if version != VERSION:
        raise BundleParseError("header", f"unsupported version {version}")
    if flag not in (0, 1):
        raise BundleParseError("header", f"truth flag must be 0 or 1, got {flag}")
    if m == 0 or n == 0:
        raise BundleIntegrityError(f"empty dimensions m={m}, n={n}")
    if flag == 0 and s != 0:
        raise BundleIntegrityError(f"s={s} recorded without ground truth")
    if flag == 1 and not 1 <= s <= n:
        raise BundleIntegrityError(f"s={s} outside [1, n={n}]")

    offset = _HEADER.size
    phi_flat, offset = _take(buf, offset, m * n, "phi")
    y, offset = _take(buf, offset, m, "y")
    x_true = None
    if flag:
        x_true, offset = _take(buf, offset, n, "x_true")
    if offset != len(buf):
        raise BundleParseError("trailer", f"{len(buf) - offset} unexpected trailing bytes")

    phi = phi_flat.reshape((m, n), order="F")
    try:
        problem = SparseProblem(phi, y, lam)
        truth = GroundTruth(x_true, s, sigma, seed) if flag else None
        return ProblemBundle(problem, truth)
    except CappaError as e:
        raise BundleIntegrityError(str(e)) from e


def save_bundle(bundle: ProblemBundle, path: PathLike) -> None:
    """Write a bundle; parent directories are created."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_bundle(bundle))
    logger.info(f"Saved bundle m={bundle.problem.m} n={bundle.problem.n} to {path}")


def load_bundle(path: PathLike) -> ProblemBundle:
    """Read a bundle; raises BundleParseError or BundleIntegrityError, never returns partial data."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise BundleParseError("file", f"cannot read {path}: {e}") from e
    bundle = decode_bundle(data)
    logger.info(f"Loaded bundle m={bundle.problem.m} n={bundle.problem.n} from {path}")
    return bundle
