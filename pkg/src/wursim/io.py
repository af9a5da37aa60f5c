"""File formats.

Result CSVs start with a ``#`` comment line carrying the tool version and
the config hash, then a header row.  I/Q files are interleaved
little-endian float32 ``I, Q`` pairs with a ``<file>.txt`` sidecar of
``key=value`` numerology lines.
"""

import csv
from pathlib import Path

import numpy as np

from ._validation import LengthError
from .ofdm import IqBuffer, ResourceGrid


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def provenance_line(version, config_hash):
    return f"# wursim {version} config {config_hash}"


def write_table(path, columns, rows, version=None, config_hash=None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        if version is not None:
            fh.write(provenance_line(version, config_hash) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def read_table(path):
    """``(columns, rows)`` with rows as lists of strings; comments skipped."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        columns = next(reader)
        return columns, [row for row in reader]


def write_grid_csv(grid, path, version=None, config_hash=None):
    cells = grid.cells
    rows = ((s, k, cells[s, k].real, cells[s, k].imag)
            for s in range(cells.shape[0]) for k in range(cells.shape[1]))
    return write_table(path, ["symbol", "subcarrier", "re", "im"], rows, version, config_hash)


def read_grid_csv(path):
    _, rows = read_table(path)
    sym = np.array([int(r[0]) for r in rows])
    sc = np.array([int(r[1]) for r in rows])
    cells = np.zeros((sym.max() + 1, sc.max() + 1), dtype=np.complex128)
    cells[sym, sc] = [float(r[2]) + 1j * float(r[3]) for r in rows]
    return ResourceGrid(cells)


def write_iq(iq, path, numerology=None):
    """Write interleaved float32 I/Q and the sidecar; returns the data path."""
    path = Path(path)
    x = np.asarray(iq.samples).ravel()
    inter = np.empty(2 * x.size, dtype="<f4")
    inter[0::2] = x.real
    inter[1::2] = x.imag
    path.write_bytes(inter.tobytes())
    meta = {"sample_rate_hz": iq.sample_rate, "num_samples": x.size, "format": "cf32_le"}
    if numerology is not None:
        meta.update(
            subcarrier_spacing_khz=numerology.subcarrier_spacing_khz,
            fft_size=numerology.fft_size,
            cp_length=numerology.cp_length,
            symbol_length=numerology.symbol_length,
        )
    sidecar = path.with_name(path.name + ".txt")
    sidecar.write_text("".join(f"{k}={_fmt(v)}\n" for k, v in meta.items()))
    return path


def read_iq(path):
    path = Path(path)
    raw = np.frombuffer(path.read_bytes(), dtype="<f4")
    if raw.size % 2:
        raise LengthError("I/Q file holds an odd number of floats")
    meta = {}
    sidecar = path.with_name(path.name + ".txt")
    for line in sidecar.read_text().splitlines():
        key, _, value = line.partition("=")
        meta[key] = value
    samples = raw[0::2].astype(np.float64) + 1j * raw[1::2]
    return IqBuffer(samples, float(meta["sample_rate_hz"])), meta
