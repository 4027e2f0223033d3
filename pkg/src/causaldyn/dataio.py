"""Bit-exact dataset persistence and plot-ready CSV export.

A dataset root contains one directory per graph:

    <root>/<tier>/<graph_id>/meta.json        generation metadata
    <root>/<tier>/<graph_id>/graphs.json      ground-truth graphs
    <root>/<tier>/<graph_id>/timeseries.cdyn  binary tensor
    <root>/manifest.json                      append-only index

The ``.cdyn`` tensor format, byte for byte:

    offset  size  field
    0       4     magic bytes b"CDYN"
    4       4     u32 little-endian format version (currently 1)
    8       4     u32 little-endian rank (always 4)
    12      32    four u64 little-endian dims [trajectory, time, node, dim]
    44      ...   row-major (last dim fastest) IEEE-754 little-endian float64

Payload length must equal the product of the dims times 8. Reload is
bitwise-exact; CSV export prints 17 significant digits so text round-trips
to the same float64.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    BadMagic,
    CorruptPayload,
    RefusesOverwrite,
    ShapeMismatch,
    VersionMismatch,
)
from .graphs import CausalGraph, summary_graph

MAGIC = b"CDYN"
FORMAT_VERSION = 1
TIERS = ("simple", "coupled", "climate")
_HEADER = struct.Struct("<4sII4Q")


def write_tensor(path, values: np.ndarray) -> None:
    """Write a [trajectory, time, node, dim] float64 tensor as .cdyn."""
    values = np.ascontiguousarray(values, dtype="<f8")
    if values.ndim != 4:
        raise ValueError(f"tensor must have rank 4, got {values.ndim}")
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, 4, *values.shape)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(values.tobytes(order="C"))


def read_tensor(path) -> np.ndarray:
    """Read a .cdyn tensor, validating magic, version, rank and payload size."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 4 or raw[:4] != MAGIC:
        raise BadMagic(f"{path}: expected magic {MAGIC!r}")
    if len(raw) < _HEADER.size:
        raise CorruptPayload(f"{path}: truncated header")
    _, version, rank, d0, d1, d2, d3 = _HEADER.unpack_from(raw)
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"{path}: version {version}, expected {FORMAT_VERSION}")
    if rank != 4:
        raise ShapeMismatch(f"{path}: rank {rank}, expected 4")
    shape = (d0, d1, d2, d3)
    expected = 8 * int(np.prod(shape))
    payload = raw[_HEADER.size:]
    if len(payload) != expected:
        raise CorruptPayload(
            f"{path}: payload is {len(payload)} bytes, header declares {expected}")
    return np.frombuffer(payload, dtype="<f8").reshape(shape).astype(float)


@dataclass
class DatasetRecord:
    """One generated graph: metadata, ground truth and trajectory tensor."""

    graph_id: str
    tier: str
    graph: CausalGraph
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.tier not in TIERS:
            raise ValueError(f"tier must be one of {TIERS}, got {self.tier!r}")
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 4:
            raise ValueError("values must be [trajectory, time, node, dim]")

    def graphs_dict(self) -> dict:
        return {
            "graph": self.graph.to_dict(),
            "summary": summary_graph(self.graph).to_dict(),
        }


def _graph_dir(root, record: DatasetRecord) -> Path:
    return Path(root) / record.tier / record.graph_id


def save_dataset(record: DatasetRecord, root, force: bool = False,
                 update_manifest: bool = True) -> dict:
    """Write one graph directory and append its manifest entry.

    Refuses to overwrite an existing graph directory unless ``force``.
    Returns the manifest entry. Parallel writers targeting distinct graph
    directories pass ``update_manifest=False`` and let a single coordinator
    append the returned entries in a fixed order.
    """
    gdir = _graph_dir(root, record)
    tensor_path = gdir / "timeseries.cdyn"
    if tensor_path.exists() and not force:
        raise RefusesOverwrite(f"{gdir} already holds a dataset (use force)")
    gdir.mkdir(parents=True, exist_ok=True)

    meta = dict(record.meta)
    meta.setdefault("format_version", FORMAT_VERSION)
    meta["graph_id"] = record.graph_id
    meta["tier"] = record.tier
    meta["shape"] = list(record.values.shape)
    meta["all_finite"] = bool(np.all(np.isfinite(record.values)))
    (gdir / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True))
    (gdir / "graphs.json").write_text(
        json.dumps(record.graphs_dict(), indent=2, sort_keys=True))
    write_tensor(tensor_path, record.values)

    entry = {
        "graph_id": record.graph_id,
        "tier": record.tier,
        "path": f"{record.tier}/{record.graph_id}",
        "shape": list(record.values.shape),
        "sha256": hashlib.sha256(tensor_path.read_bytes()).hexdigest(),
    }
    if update_manifest:
        append_manifest(root, entry)
    return entry


def load_dataset(path) -> DatasetRecord:
    """Load one graph directory written by save_dataset.

    Validates the tensor header and that the payload matches both the header
    and the recorded metadata (shape and finiteness).
    """
    gdir = Path(path)
    meta = json.loads((gdir / "meta.json").read_text())
    graphs = json.loads((gdir / "graphs.json").read_text())
    values = read_tensor(gdir / "timeseries.cdyn")
    if list(values.shape) != list(meta.get("shape", values.shape)):
        raise ShapeMismatch(
            f"{gdir}: tensor shape {values.shape} disagrees with metadata "
            f"{meta.get('shape')}")
    if meta.get("all_finite", True) and not np.all(np.isfinite(values)):
        raise CorruptPayload(f"{gdir}: non-finite payload despite all_finite flag")
    return DatasetRecord(
        graph_id=meta["graph_id"],
        tier=meta["tier"],
        graph=CausalGraph.from_dict(graphs["graph"]),
        values=values,
        meta=meta,
    )


def manifest_path(root) -> Path:
    return Path(root) / "manifest.json"


def append_manifest(root, entry: dict) -> None:
    """Append one entry to the root manifest (single-writer discipline)."""
    path = manifest_path(root)
    if path.exists():
        manifest = json.loads(path.read_text())
    else:
        manifest = {"version": FORMAT_VERSION, "entries": []}
    manifest["entries"].append(entry)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True))


def read_manifest(root) -> dict:
    path = manifest_path(root)
    if not path.exists():
        return {"version": FORMAT_VERSION, "entries": []}
    return json.loads(path.read_text())


def iter_graph_dirs(root):
    """Yield (entry, directory) for every manifest entry under root."""
    root = Path(root)
    for entry in read_manifest(root)["entries"]:
        yield entry, root / entry["path"]


def export_csv(record: DatasetRecord, out_dir) -> list[Path]:
    """One CSV per trajectory: header time,node{j}_dim{k},...; values printed
    with 17 significant digits so parsing back reproduces the exact float64."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    R, T, n, d = record.values.shape
    header = "time," + ",".join(
        f"node{j}_dim{k}" for j in range(n) for k in range(d))
    written = []
    for r in range(R):
        path = out_dir / f"{record.graph_id}_traj{r:03d}.csv"
        rows = [header]
        flat = record.values[r].reshape(T, n * d)
        for t in range(T):
            rows.append(str(t) + "," + ",".join(f"{v:.17g}" for v in flat[t]))
        path.write_text("\n".join(rows) + "\n")
        written.append(path)
    return written
