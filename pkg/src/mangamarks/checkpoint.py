"""Versioned binary checkpoint format for cascade models.

Byte layout (all integers little-endian):

    magic            4 bytes  b"MMCK"
    format version   u32      currently 1
    header length    u32
    header           UTF-8 JSON: {"config": {...}, "mean_shape": {"points":
                     [[x, y] * 60], "canvas": int, "margin": float},
                     "n_stages": int}
    per stage:
        tensor count u32
        per tensor:
            name length  u16
            name         UTF-8 bytes
            ndim         u8
            dims         u32 * ndim
            data         float32 little-endian, C order

Tensor order within a stage follows the module's state dict order, so two
writers with identical weights produce byte-identical files.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np
import torch

from .cascade import CascadeConfig, CascadeModel, init_model
from .errors import ConfigError
from .geometry import MeanShape

MAGIC = b"MMCK"
FORMAT_VERSION = 1


def save_checkpoint(model: CascadeModel, path) -> None:
    path = Path(path)
    header = {
        "config": model.config.to_json(),
        "mean_shape": {
            "points": model.mean_shape.points.tolist(),
            "canvas": model.mean_shape.canvas,
            "margin": model.mean_shape.margin,
        },
        "n_stages": model.config.n_stages,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(header_bytes)))
        fh.write(header_bytes)
        for stage in model.stages:
            state = stage.state_dict()
            fh.write(struct.pack("<I", len(state)))
            for name, tensor in state.items():
                data = tensor.detach().numpy().astype("<f4")
                name_bytes = name.encode("utf-8")
                fh.write(struct.pack("<H", len(name_bytes)))
                fh.write(name_bytes)
                fh.write(struct.pack("<B", data.ndim))
                fh.write(struct.pack(f"<{data.ndim}I", *data.shape))
                fh.write(data.tobytes(order="C"))
    tmp.replace(path)


def load_checkpoint(path) -> CascadeModel:
    path = Path(path)
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise ConfigError(f"{path}: not a cascade checkpoint (bad magic)")
        version, header_len = struct.unpack("<II", fh.read(8))
        if version != FORMAT_VERSION:
            raise ConfigError(f"{path}: unsupported checkpoint version {version}")
        header = json.loads(fh.read(header_len).decode("utf-8"))
        config = CascadeConfig.from_json(header["config"])
        ms = header["mean_shape"]
        mean_shape = MeanShape(
            points=np.asarray(ms["points"], dtype=np.float64),
            canvas=int(ms["canvas"]),
            margin=float(ms["margin"]),
        )
        model = init_model(config, mean_shape, seed=0)
        for stage in model.stages:
            (n_tensors,) = struct.unpack("<I", fh.read(4))
            state = {}
            for _ in range(n_tensors):
                (name_len,) = struct.unpack("<H", fh.read(2))
                name = fh.read(name_len).decode("utf-8")
                (ndim,) = struct.unpack("<B", fh.read(1))
                dims = struct.unpack(f"<{ndim}I", fh.read(4 * ndim))
                count = int(np.prod(dims)) if ndim else 1
                data = np.frombuffer(fh.read(4 * count), dtype="<f4").reshape(dims)
                state[name] = torch.from_numpy(data.astype(np.float64))
            stage.load_state_dict(state)
            stage.eval()
    return model
