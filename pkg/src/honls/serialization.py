"""Field, trajectory, and image serialization.

Binary field layout (documented in docs/formats.md): little-endian, magic
"FLD1", then uint32 d, uint32 N, float64 L, then N^d samples as
interleaved (re, im) float64 pairs in C row-major order.
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .grid import ComplexField, Grid

MAGIC = b"FLD1"


def write_field(path, f: ComplexField) -> None:
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", f.grid.d, f.grid.n))
        fh.write(struct.pack("<d", f.grid.half_length))
        inter = np.empty(f.grid.n_total * 2, dtype="<f8")
        flat = f.samples.ravel(order="C")
        inter[0::2] = flat.real
        inter[1::2] = flat.imag
        fh.write(inter.tobytes())


def read_field(path) -> ComplexField:
    path = Path(path)
    with path.open("rb") as fh:
        if fh.read(4) != MAGIC:
            raise ValidationError(f"{path} is not a field file (bad magic)")
        d, n = struct.unpack("<II", fh.read(8))
        (half_length,) = struct.unpack("<d", fh.read(8))
        grid = Grid(d, n, half_length)
        inter = np.frombuffer(fh.read(grid.n_total * 16), dtype="<f8")
        if inter.size != grid.n_total * 2:
            raise ValidationError(f"{path} is truncated")
    samples = (inter[0::2] + 1j * inter[1::2]).reshape(grid.shape)
    return ComplexField(grid, samples)


def field_to_csv(path, f: ComplexField) -> None:
    """Row-per-sample CSV for small fields: axis indices, re, im."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        if f.grid.d == 1:
            writer.writerow(["i", "x", "re", "im"])
            for i, (x, v) in enumerate(zip(f.grid.axis, f.samples)):
                writer.writerow([i, repr(float(x)), repr(v.real), repr(v.imag)])
        else:
            writer.writerow(["i", "j", "x1", "x2", "re", "im"])
            for i in range(f.grid.n):
                for j in range(f.grid.n):
                    v = f.samples[i, j]
                    writer.writerow([i, j, repr(float(f.grid.axis[i])),
                                     repr(float(f.grid.axis[j])),
                                     repr(v.real), repr(v.imag)])


def field_from_csv(path, grid: Grid) -> ComplexField:
    path = Path(path)
    samples = np.zeros(grid.shape, dtype=complex)
    with path.open() as fh:
        reader = csv.reader(fh)
        header = next(reader)
        for row in reader:
            if grid.d == 1:
                samples[int(row[0])] = float(row[2]) + 1j * float(row[3])
            else:
                samples[int(row[0]), int(row[1])] = float(row[4]) + 1j * float(row[5])
    return ComplexField(grid, samples)


def write_pgm(path, values: np.ndarray) -> None:
    """16-bit grayscale PGM (P5) of a nonnegative 2-d array, max-normalized."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise ValidationError("PGM output needs a 2-d array")
    peak = values.max()
    scaled = np.zeros_like(values) if peak <= 0 else values / peak
    img = np.round(scaled * 65535).astype(">u2")
    with Path(path).open("wb") as fh:
        fh.write(f"P5\n{values.shape[1]} {values.shape[0]}\n65535\n".encode())
        fh.write(img.tobytes())


def save_trajectory(directory, traj, params_doc: dict) -> None:
    """Checkpoint a trajectory: manifest.json plus one field file per node."""
    from .solver import Trajectory  # local import avoids a cycle

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    names = []
    for i in range(len(traj)):
        name = f"state_{i:05d}.fld"
        write_field(directory / name, traj.field(i))
        names.append(name)
    manifest = {
        "format": "honls-trajectory-1",
        "times": [float(t) for t in traj.times],
        "files": names,
        "grid": {"d": traj.grid.d, "n_points": traj.grid.n,
                 "half_length": traj.grid.half_length},
        "meta": {k: (float(v) if isinstance(v, (int, float, np.floating)) else v)
                 for k, v in traj.meta.items()},
        "params": params_doc,
    }
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2))


def load_trajectory(directory):
    from .solver import Trajectory

    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text())
    if manifest.get("format") != "honls-trajectory-1":
        raise ValidationError(f"{directory} does not hold a trajectory checkpoint")
    g = manifest["grid"]
    grid = Grid(g["d"], g["n_points"], g["half_length"])
    times = np.asarray(manifest["times"], dtype=float)
    states = np.empty((times.shape[0],) + grid.shape, dtype=complex)
    for i, name in enumerate(manifest["files"]):
        states[i] = read_field(directory / name).samples
    return Trajectory(grid, times, states, meta=manifest.get("meta", {}))
