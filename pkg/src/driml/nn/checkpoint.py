"""Binary checkpoint format with bit-exact float64 round trips.

Layout (all integers little-endian uint32, floats little-endian float64):
  magic "DRIMLCKPT" | version | n_params
  per parameter: name_len | name utf-8 | rank | dims... | values
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"DRIMLCKPT"
VERSION = 1


def save_checkpoint(path, named_arrays: dict[str, np.ndarray]) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(named_arrays)))
        for name, arr in named_arrays.items():
            arr = np.ascontiguousarray(arr, dtype="<f8")
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<I", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<I", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            fh.write(arr.tobytes())


def load_checkpoint(path) -> dict[str, np.ndarray]:
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise ValueError(f"bad checkpoint magic {magic!r}")
        version, count = struct.unpack("<II", fh.read(8))
        if version != VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        out: dict[str, np.ndarray] = {}
        for _ in range(count):
            (name_len,) = struct.unpack("<I", fh.read(4))
            name = fh.read(name_len).decode("utf-8")
            (rank,) = struct.unpack("<I", fh.read(4))
            dims = struct.unpack(f"<{rank}I", fh.read(4 * rank)) if rank else ()
            n = int(np.prod(dims)) if dims else 1
            data = np.frombuffer(fh.read(8 * n), dtype="<f8").reshape(dims)
            out[name] = data.astype(np.float64).copy()
        return out
