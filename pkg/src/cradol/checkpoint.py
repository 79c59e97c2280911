"""Self-describing binary checkpoints.

Layout (all integers little-endian):

    magic   "CRADOL1\\n"
    u32     length of the UTF-8 JSON config blob
    bytes   config JSON (canonical: sorted keys, no whitespace)
    bytes   64 hex chars, sha256 of the JSON blob
    u32     number of parameter blocks
    block*  u16 name length | name UTF-8 | u8 ndim | u32 dims... | f8 data

Parameter payloads are raw little-endian float64, so a save/load round trip
is bit-exact.
"""

from __future__ import annotations

import hashlib
import json
import struct

import numpy as np

MAGIC = b"CRADOL1\n"


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def save_checkpoint(path, config: dict, params: dict) -> str:
    """Write config + named float64 arrays; returns the config hash."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode("utf-8")
    digest = hashlib.sha256(blob).hexdigest()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(blob)))
        f.write(blob)
        f.write(digest.encode("ascii"))
        f.write(struct.pack("<I", len(params)))
        for name, arr in params.items():
            data = np.ascontiguousarray(arr, dtype="<f8")
            enc = name.encode("utf-8")
            f.write(struct.pack("<H", len(enc)))
            f.write(enc)
            f.write(struct.pack("<B", data.ndim))
            f.write(struct.pack(f"<{data.ndim}I", *data.shape))
            f.write(data.tobytes())
    return digest


def load_checkpoint(path):
    """Read a checkpoint; returns (config, params: dict[str, ndarray], hash)."""
    with open(path, "rb") as f:
        raw = f.read()
    if not raw.startswith(MAGIC):
        raise ValueError(f"{path}: not a CRADOL1 checkpoint")
    off = len(MAGIC)
    (blob_len,) = struct.unpack_from("<I", raw, off)
    off += 4
    blob = raw[off : off + blob_len]
    off += blob_len
    digest = raw[off : off + 64].decode("ascii")
    off += 64
    if hashlib.sha256(blob).hexdigest() != digest:
        raise ValueError(f"{path}: config hash mismatch, file corrupt")
    config = json.loads(blob.decode("utf-8"))
    (nblocks,) = struct.unpack_from("<I", raw, off)
    off += 4
    params = {}
    for _ in range(nblocks):
        (nlen,) = struct.unpack_from("<H", raw, off)
        off += 2
        name = raw[off : off + nlen].decode("utf-8")
        off += nlen
        (ndim,) = struct.unpack_from("<B", raw, off)
        off += 1
        shape = struct.unpack_from(f"<{ndim}I", raw, off)
        off += 4 * ndim
        count = int(np.prod(shape)) if ndim else 1
        arr = np.frombuffer(raw, dtype="<f8", count=count, offset=off).reshape(shape)
        off += 8 * count
        params[name] = arr.astype(np.float64)  # writable copy, native order
    return config, params, digest
