"""File formats: binary field container, CSV exports, channel ensembles.

Binary field layout (little-endian)::

    offset  size  content
    0       4     magic b"OAMF"
    4       4     version (u32, currently 1)
    8       4     n_samples (u32)
    12      4     reserved, zero
    16      8     dx in meters (f64)
    24      8     wavelength in meters (f64)
    32      ...   n*n (real, imag) f64 pairs, row-major

Phase screens use the same container with the phase in the real plane and
a zero imaginary plane.
"""
from __future__ import annotations

import csv
import json
import struct
from pathlib import Path
from typing import Iterable

import numpy as np

from .grid import ComplexField, SimulationGrid
from .propagation import ChannelEnsemble, ChannelRealization
from .turbulence import PhaseScreen

MAGIC = b"OAMF"
VERSION = 1
_HEADER = struct.Struct("<4sIII dd")
assert _HEADER.size == 32

BER_COLUMNS = ["scheme", "regime", "mode", "snr_db", "trials", "bits_total", "bit_errors", "ber",
               "low_confidence"]
CAPACITY_COLUMNS = ["regime", "mode", "snr_db", "capacity_bps_hz", "cdf"]
UNION_BOUND_COLUMNS = ["scheme", "snr_db", "bound"]


class FormatError(ValueError):
    """A file does not match its documented layout."""


def write_field(path, field: ComplexField) -> None:
    g = field.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, g.n_samples, 0, g.dx, g.wavelength))
        fh.write(np.ascontiguousarray(field.samples, dtype="<c16").tobytes())


def read_field(path) -> ComplexField:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    magic, version, n, _, dx, wl = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    body = raw[_HEADER.size:]
    if len(body) != n * n * 16:
        raise FormatError(f"{path}: expected {n * n * 16} payload bytes, found {len(body)}")
    samples = np.frombuffer(body, dtype="<c16").reshape(n, n)
    return ComplexField(SimulationGrid(n, dx, wl), samples)


def write_screen(path, screen: PhaseScreen) -> None:
    write_field(path, ComplexField(screen.grid, screen.phase.astype(complex)))


def read_screen(path) -> PhaseScreen:
    f = read_field(path)
    return PhaseScreen(f.grid, f.samples.real)


def _grid_rows(grid: SimulationGrid, columns: dict[str, np.ndarray]) -> Iterable[list]:
    x, y = grid.coords()
    cols = [x.ravel(), y.ravel()] + [c.ravel() for c in columns.values()]
    return zip(*cols)


def write_field_csv(path, field: ComplexField) -> None:
    """Lossy plotting export: ``x_m, y_m, intensity, phase_rad``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x_m", "y_m", "intensity", "phase_rad"])
        w.writerows(_grid_rows(field.grid, {"i": field.intensity, "p": field.phase}))


def write_screen_csv(path, screen: PhaseScreen) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x_m", "y_m", "phase_rad"])
        w.writerows(_grid_rows(screen.grid, {"p": screen.phase}))


# -- channel ensembles ---------------------------------------------------------

def realization_record(real: ChannelRealization, wavelength: float, path_length: float) -> dict:
    h = real.matrix
    return {
        "seed": list(real.seed),
        "cn2": real.cn2,
        "modes": {"tx": list(real.tx_modes), "rx": list(real.rx_modes)},
        "H": [[[float(v.real), float(v.imag)] for v in row] for row in h],
        "wavelength": wavelength,
        "path_length": path_length,
    }


def write_ensemble(path, ensemble: ChannelEnsemble) -> None:
    """One JSON object per line, one line per realization."""
    with open(path, "w") as fh:
        for real in ensemble:
            fh.write(json.dumps(realization_record(real, ensemble.wavelength, ensemble.path_length)))
            fh.write("\n")


def read_ensemble(path) -> ChannelEnsemble:
    reals = []
    wavelength, path_length = 1550e-9, 1000.0
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                h = np.array(rec["H"], dtype=float)
                reals.append(ChannelRealization(rec["modes"]["tx"], rec["modes"]["rx"],
                                                h[..., 0] + 1j * h[..., 1], rec["seed"], rec["cn2"]))
                wavelength = rec.get("wavelength", wavelength)
                path_length = rec.get("path_length", path_length)
            except (KeyError, TypeError, ValueError, IndexError) as exc:
                raise FormatError(f"{path}:{lineno}: bad channel record ({exc})") from exc
    if not reals:
        raise FormatError(f"{path}: empty channel ensemble")
    return ChannelEnsemble(tuple(reals), wavelength, path_length)


# -- result tables -----------------------------------------------------------

def write_rows(path, columns: list[str], rows: Iterable[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, extrasaction="raise")
        w.writeheader()
        for row in rows:
            w.writerow(row)


def read_rows(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_ber_csv(path, records) -> None:
    write_rows(path, BER_COLUMNS, (r.as_row() for r in records))


def write_sidecar(path, config: dict) -> None:
    Path(path).write_text(json.dumps(config, indent=2, sort_keys=True) + "\n")
