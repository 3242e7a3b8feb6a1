"""Binary tensor and image I/O.

DTNS is the on-disk tensor format used by every CLI stage: the magic bytes
``DTNS``, a version byte (1), a u8 rank, ``rank`` little-endian u32 dims,
then float32 little-endian values in row-major order. Writes are fully
deterministic, which the pipeline relies on for byte-identical reruns.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

MAGIC = b"DTNS"
VERSION = 1


def tensor_to_bytes(arr: np.ndarray) -> bytes:
    arr = np.asarray(arr)
    if arr.ndim > 255:
        raise ValueError(f"rank {arr.ndim} exceeds DTNS limit of 255")
    if arr.ndim == 0:
        raise ValueError("DTNS does not store rank-0 tensors")
    for d in arr.shape:
        if d > 0xFFFFFFFF:
            raise ValueError(f"dimension {d} exceeds u32")
    header = MAGIC + struct.pack("<BB", VERSION, arr.ndim)
    header += struct.pack(f"<{arr.ndim}I", *arr.shape)
    body = np.ascontiguousarray(arr, dtype="<f4").tobytes()
    return header + body


def tensor_from_bytes(buf: bytes, offset: int = 0) -> tuple[np.ndarray, int]:
    """Decode one DTNS record starting at ``offset``.

    Returns the tensor (float64) and the offset one past the record, so
    multiple records can be concatenated in a single file.
    """
    if buf[offset : offset + 4] != MAGIC:
        raise ValueError("not a DTNS tensor (bad magic)")
    version, rank = struct.unpack_from("<BB", buf, offset + 4)
    if version != VERSION:
        raise ValueError(f"unsupported DTNS version {version}")
    dims = struct.unpack_from(f"<{rank}I", buf, offset + 6)
    start = offset + 6 + 4 * rank
    count = int(np.prod(dims)) if rank else 1
    end = start + 4 * count
    if end > len(buf):
        raise ValueError("truncated DTNS tensor")
    flat = np.frombuffer(buf[start:end], dtype="<f4")
    return flat.reshape(dims).astype(np.float64), end


def write_tensor(path: str | Path, arr: np.ndarray) -> None:
    Path(path).write_bytes(tensor_to_bytes(arr))


def read_tensor(path: str | Path) -> np.ndarray:
    arr, _ = tensor_from_bytes(Path(path).read_bytes())
    return arr


def write_tensor_stack(path: str | Path, tensors: list[np.ndarray]) -> None:
    """Concatenated DTNS records, one per tensor."""
    Path(path).write_bytes(b"".join(tensor_to_bytes(t) for t in tensors))


def read_tensor_stack(path: str | Path) -> list[np.ndarray]:
    buf = Path(path).read_bytes()
    out = []
    offset = 0
    while offset < len(buf):
        arr, offset = tensor_from_bytes(buf, offset)
        out.append(arr)
    return out


def read_png(path: str | Path) -> np.ndarray:
    """Load a PNG as an (H, W, C) float64 array in [0, 1]."""
    with PILImage.open(path) as im:
        if im.mode not in ("L", "RGB"):
            im = im.convert("RGB")
        arr = np.asarray(im, dtype=np.float64) / 255.0
    if arr.ndim == 2:
        arr = arr[:, :, None]
    return arr


def write_png(path: str | Path, img: np.ndarray) -> None:
    """Write an (H, W, C) array in [0, 1] as an 8-bit PNG (round + clamp)."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] not in (1, 3):
        raise ValueError(f"expected (H, W, 1|3) image, got shape {img.shape}")
    quant = np.clip(np.round(img * 255.0), 0, 255).astype(np.uint8)
    if quant.shape[2] == 1:
        pil = PILImage.fromarray(quant[:, :, 0], mode="L")
    else:
        pil = PILImage.fromarray(quant, mode="RGB")
    pil.save(path, format="PNG")
