"""Manifest-driven dataset of codec exports.

A manifest is a JSON file:

    {"records": [
        {"edges": "a/E.pgm", "mask": "a/M.pgm",
         "colors": "a/C.ppm", "target": "a/original.ppm"},
        ...
    ]}

Paths are resolved relative to the manifest's directory. Every record
becomes a (edges, colors, mask, target) tensor tuple on the unit scale:
edges and mask are {0, 1} single-channel planes, colors and target are
3-channel [0, 1] images, all float32 CHW.
"""

import json
import pathlib

import numpy as np
import torch

from .pnm import load_pnm


class ManifestError(ValueError):
    pass


def _plane_tensor(arr: np.ndarray) -> torch.Tensor:
    return torch.from_numpy(arr.astype(np.float32) / 255.0).unsqueeze(0)


def _rgb_tensor(arr: np.ndarray) -> torch.Tensor:
    return torch.from_numpy(arr.astype(np.float32) / 255.0).permute(2, 0, 1)


class Record:
    """One aligned export: binary planes E and M, colors C, ground truth I."""

    __slots__ = ("edges", "colors", "mask", "target")

    def __init__(self, edges, colors, mask, target):
        self.edges = edges
        self.colors = colors
        self.mask = mask
        self.target = target

    def tensors(self) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor, torch.Tensor]:
        e = load_pnm(self.edges)
        m = load_pnm(self.mask)
        c = load_pnm(self.colors)
        t = load_pnm(self.target)
        if e.ndim != 2 or m.ndim != 2:
            raise ManifestError("edge and mask planes must be grayscale")
        if c.ndim != 3 or t.ndim != 3:
            raise ManifestError("colors and target must be 3-channel")
        shapes = {e.shape, m.shape, c.shape[:2], t.shape[:2]}
        if len(shapes) != 1:
            raise ManifestError(f"misaligned record: {sorted(shapes)}")
        # exported planes mark set pixels as 255
        return (
            (_plane_tensor(e) > 0.5).float(),
            _rgb_tensor(c),
            (_plane_tensor(m) > 0.5).float(),
            _rgb_tensor(t),
        )


def load_manifest(path) -> list[Record]:
    path = pathlib.Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest is not valid JSON: {exc}") from None
    records = doc.get("records")
    if not isinstance(records, list) or not records:
        raise ManifestError("manifest needs a non-empty 'records' list")
    out = []
    for i, rec in enumerate(records):
        try:
            paths = {k: path.parent / rec[k] for k in ("edges", "colors", "mask", "target")}
        except (TypeError, KeyError) as exc:
            raise ManifestError(f"record {i} is missing field {exc}") from None
        for k, p in paths.items():
            if not p.exists():
                raise ManifestError(f"record {i}: {k} file {p} does not exist")
        out.append(Record(**paths))
    return out


def batch_tensors(records: list[Record]) -> tuple[torch.Tensor, ...]:
    """Stack same-sized records into (E, C, M, I) batch tensors."""
    tensors = [r.tensors() for r in records]
    sizes = {t[0].shape for t in tensors}
    if len(sizes) != 1:
        raise ManifestError(f"records in a batch must share bounds, got {sorted(sizes)}")
    return tuple(torch.stack([t[i] for t in tensors]) for i in range(4))
