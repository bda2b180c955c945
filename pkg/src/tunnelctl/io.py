"""
File formats.

Snapshot (``.qwv``), all little-endian::

    offset  size        content
    0       4           magic b"QWV1"
    4       4           uint32 dimensionality (1 or 2)
    8       24 * dim    per axis: uint64 n, float64 min, float64 max
    ...     8           float64 time stamp (a.u.)
    ...     16 * N      complex amplitudes as interleaved (re, im) float64,
                        row-major with axis 0 = z, axis 1 = R

Trace: text with ``#`` header lines naming columns and units, one
whitespace-separated row per record. Field history: text, one value per
propagation step.
"""
from __future__ import annotations

import os
import struct
import tempfile

import numpy as np

from .errors import CorruptFileError
from .grid import Grid1D, Grid2D, WaveFunction

MAGIC = b"QWV1"

_UMASK = os.umask(0)
os.umask(_UMASK)


def header_size(dim: int) -> int:
    return 8 + 24 * dim + 8


def _atomic_write(path, data: bytes | str):
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.chmod(tmp, 0o666 & ~_UMASK)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def encode_snapshot(psi: WaveFunction, time: float = 0.0) -> bytes:
    axes = psi.grid.axes if isinstance(psi.grid, Grid2D) else (psi.grid,)
    parts = [MAGIC, struct.pack("<I", len(axes))]
    for g in axes:
        parts.append(struct.pack("<Qdd", g.n_points, g.x_min, g.x_max))
    parts.append(struct.pack("<d", time))
    parts.append(np.ascontiguousarray(psi.amplitudes, dtype="<c16").tobytes())
    return b"".join(parts)


def decode_snapshot(data: bytes) -> tuple[WaveFunction, float]:
    if len(data) < 8:
        raise CorruptFileError("file shorter than the fixed header", offset=len(data))
    if data[:4] != MAGIC:
        raise CorruptFileError(f"bad magic {data[:4]!r}", offset=0)
    (dim,) = struct.unpack_from("<I", data, 4)
    if dim not in (1, 2):
        raise CorruptFileError(f"unsupported dimensionality {dim}", offset=4)
    hsize = header_size(dim)
    if len(data) < hsize:
        raise CorruptFileError("truncated header", offset=len(data))
    axes = []
    for i in range(dim):
        n, lo, hi = struct.unpack_from("<Qdd", data, 8 + 24 * i)
        try:
            axes.append(Grid1D(int(n), lo, hi))
        except ValueError as exc:
            raise CorruptFileError(f"invalid grid descriptor: {exc}", offset=8 + 24 * i) from None
    (time,) = struct.unpack_from("<d", data, 8 + 24 * dim)
    grid = axes[0] if dim == 1 else Grid2D(*axes)
    expected = hsize + 16 * int(np.prod(grid.shape))
    if len(data) != expected:
        raise CorruptFileError(
            f"size {len(data)} does not match expected {expected}", offset=min(len(data), expected)
        )
    amps = np.frombuffer(data, dtype="<c16", offset=hsize).reshape(grid.shape).astype(complex)
    return WaveFunction(amps, grid), time


def write_snapshot(path, psi: WaveFunction, time: float = 0.0):
    _atomic_write(path, encode_snapshot(psi, time))


def read_snapshot(path) -> tuple[WaveFunction, float]:
    with open(path, "rb") as fh:
        return decode_snapshot(fh.read())


def format_trace(trace) -> str:
    lines = ["# tunnelctl observable trace"]
    lines.append("# columns: " + " ".join(f"{c}[{u}]" for c, u in zip(trace.COLUMNS, trace.UNITS)))
    for row in trace.table():
        lines.append(" ".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def write_trace(path, trace):
    _atomic_write(path, format_trace(trace))


def parse_trace(text: str):
    from .propagator import ObservableTrace

    trace = ObservableTrace()
    ncol = len(trace.COLUMNS)
    last_t = -np.inf
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != ncol:
            raise CorruptFileError(f"line {lineno}: expected {ncol} columns, found {len(fields)}")
        values = [float(x) for x in fields]
        if values[0] <= last_t:
            raise CorruptFileError(f"line {lineno}: time column not increasing")
        last_t = values[0]
        for name, v in zip(trace.COLUMNS, values):
            getattr(trace, name).append(v)
    return trace


def read_trace(path):
    with open(path) as fh:
        return parse_trace(fh.read())


def write_field(path, values, dt: float):
    body = "\n".join(repr(float(v)) for v in values)
    _atomic_write(path, f"# per-step field [au_field]\n# dt={dt!r}\n{body}\n")


def read_field(path) -> tuple[np.ndarray, float | None]:
    dt = None
    values = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("# dt="):
                dt = float(line[5:])
            elif line and not line.startswith("#"):
                values.append(float(line))
    return np.array(values), dt
