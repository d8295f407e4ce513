"""Split-step Fourier propagation and modal channel extraction."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
import scipy.fft

from . import rng
from .grid import ComplexField, LgBeamSpec, SimulationGrid, lg_field
from .turbulence import TurbulenceParams, classify_regime, generate_phase_screen

BORDER_FRACTION = 0.05
BORDER_POWER_LIMIT = 0.01
DEFAULT_PATH = 1000.0


class AliasingError(RuntimeError):
    """Too much beam power reached the grid border."""


@lru_cache(maxsize=32)
def _transfer(grid: SimulationGrid, dz: float) -> np.ndarray:
    # exp(+i dz κ²/2k): the sign that carries the analytic LG solution forward
    h = np.exp(1j * dz * grid.kappa_sq() / (2 * grid.k))
    h.flags.writeable = False
    return h


def _step(samples: np.ndarray, grid: SimulationGrid, dz: float) -> np.ndarray:
    if dz == 0:
        return samples
    spec = scipy.fft.fft2(samples, axes=(-2, -1))
    spec *= _transfer(grid, float(dz))
    return scipy.fft.ifft2(spec, axes=(-2, -1))


@lru_cache(maxsize=8)
def _border_mask(n: int) -> np.ndarray:
    w = max(1, int(np.ceil(BORDER_FRACTION * n)))
    mask = np.zeros((n, n), bool)
    mask[:w, :] = mask[-w:, :] = True
    mask[:, :w] = mask[:, -w:] = True
    return mask


def border_power_fraction(samples: np.ndarray) -> np.ndarray:
    """Fraction of power in the outer 5% frame, per leading-axis field."""
    inten = np.abs(samples) ** 2
    total = inten.sum(axis=(-2, -1))
    edge = inten[..., _border_mask(samples.shape[-1])].sum(axis=-1)
    return np.divide(edge, total, out=np.zeros_like(edge), where=total > 0)


def _guard(samples: np.ndarray, where: str) -> None:
    frac = np.max(border_power_fraction(samples))
    if frac > BORDER_POWER_LIMIT:
        raise AliasingError(f"{frac:.2%} of beam power in the grid border {where}; enlarge the grid")


def vacuum_step(field: ComplexField, dz: float) -> ComplexField:
    """Fresnel free-space propagation over ``dz`` meters."""
    if dz < 0:
        raise ValueError(f"dz must be non-negative, got {dz!r}")
    return ComplexField(field.grid, _step(field.samples, field.grid, dz))


def propagate_stack(samples: np.ndarray, grid: SimulationGrid, params: TurbulenceParams | None,
                    seed, *, path_length: float = DEFAULT_PATH, guard: bool = True) -> np.ndarray:
    """Propagate a stack of fields ``(L, n, n)`` through one shared screen stack.

    Each segment is a vacuum step of ``screen_spacing`` followed by screen
    ``i`` drawn from stream ``(seed..., SCREEN, i)``. With ``params=None``
    the path is a single vacuum step of ``path_length``.
    """
    u = np.asarray(samples, dtype=np.complex128)
    if params is None:
        u = _step(u, grid, path_length)
        if guard:
            _guard(u, f"after {path_length} m of vacuum")
        return u
    key = rng.as_key(seed)
    for i in range(params.screen_count):
        u = _step(u, grid, params.screen_spacing)
        screen = generate_phase_screen(grid, params, rng.stream(key, rng.SCREEN, i))
        u = u * screen.transmittance
        if guard:
            _guard(u, f"after screen {i}")
    return u


def turbulent_propagate(field: ComplexField, params: TurbulenceParams | None, seed, *,
                        guard: bool = True) -> ComplexField:
    """Split-step propagation through ``params.screen_count`` screens.

    Raises :class:`AliasingError` when more than 1% of the power reaches the
    outer 5% of the grid.
    """
    out = propagate_stack(field.samples[np.newaxis], field.grid, params, seed, guard=guard)
    return ComplexField(field.grid, out[0])


@lru_cache(maxsize=32)
def _analyzers(grid: SimulationGrid, modes: tuple[int, ...], w0: float, z: float) -> np.ndarray:
    stack = np.stack([lg_field(LgBeamSpec(0, m, w0, z), grid).samples for m in modes])
    stack.flags.writeable = False
    return stack


def _decompose(samples: np.ndarray, grid: SimulationGrid, rx_modes, w0: float, z: float) -> np.ndarray:
    ana = _analyzers(grid, tuple(int(m) for m in rx_modes), float(w0), float(z))
    # [..., rx] = sum(u * conj(analyzer)) dx²
    return np.einsum("...ij,nij->...n", samples, ana.conj()) * grid.dx**2


def modal_decompose(field: ComplexField, rx_modes: Sequence[int], w0: float, z: float) -> np.ndarray:
    """Project ``field`` onto normalized LG(p=0, n) beams evaluated at ``z``.

    Entry ``i`` is ``overlap(field, u_{rx_modes[i]}(z))``; the analyzing beam
    uses the transmit waist (matched detection).
    """
    return _decompose(field.samples, field.grid, rx_modes, w0, z)


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """Modal coupling matrix ``matrix[rx, tx]`` of one turbulence draw."""

    tx_modes: tuple[int, ...]
    rx_modes: tuple[int, ...]
    matrix: np.ndarray = field(repr=False)
    seed: tuple[int, ...] = ()
    cn2: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "tx_modes", tuple(int(m) for m in self.tx_modes))
        object.__setattr__(self, "rx_modes", tuple(int(m) for m in self.rx_modes))
        object.__setattr__(self, "seed", tuple(int(s) for s in self.seed))
        h = np.asarray(self.matrix, dtype=np.complex128)
        if h.shape != (len(self.rx_modes), len(self.tx_modes)):
            raise ValueError(f"matrix shape {h.shape} does not match modes")
        object.__setattr__(self, "matrix", h)

    def gain(self, rx: int, tx: int) -> complex:
        return complex(self.matrix[self.rx_modes.index(rx), self.tx_modes.index(tx)])

    def column_energy(self) -> np.ndarray:
        return np.sum(np.abs(self.matrix) ** 2, axis=0)

    def crosstalk(self, tx: int) -> float:
        """Power leaked from ``tx`` into every other receive mode."""
        col = np.abs(self.matrix[:, self.tx_modes.index(tx)]) ** 2
        own = [i for i, m in enumerate(self.rx_modes) if m == tx]
        return float(col.sum() - col[own].sum())


def sample_channel(tx_modes: Sequence[int], rx_modes: Sequence[int], params: TurbulenceParams | None,
                   seed, *, grid: SimulationGrid | None = None, w0: float = 0.016,
                   path_length: float | None = None, guard: bool = True) -> ChannelRealization:
    """Propagate every transmit mode through the same screens and build H.

    ``path_length`` defaults to ``params.path_length`` (or 1 km without
    turbulence).
    """
    grid = grid or SimulationGrid()
    z = path_length if path_length is not None else (params.path_length if params else DEFAULT_PATH)
    if params is not None and not np.isclose(z, params.path_length):
        raise ValueError("path_length disagrees with screen_count * screen_spacing")
    tx = np.stack([lg_field(LgBeamSpec(0, m, w0, 0.0), grid).samples for m in tx_modes])
    rx_field = propagate_stack(tx, grid, params, seed, path_length=z, guard=guard)
    h = _decompose(rx_field, grid, rx_modes, w0, z).T
    return ChannelRealization(tx_modes, rx_modes, h, rng.as_key(seed), params.cn2 if params else 0.0)


@dataclass(frozen=True, eq=False)
class ChannelEnsemble:
    """A batch of realizations sharing modes and turbulence settings."""

    realizations: tuple[ChannelRealization, ...]
    wavelength: float = 1550e-9
    path_length: float = DEFAULT_PATH

    def __post_init__(self):
        reals = tuple(self.realizations)
        if not reals:
            raise ValueError("channel ensemble is empty")
        first = reals[0]
        for r in reals[1:]:
            if r.tx_modes != first.tx_modes or r.rx_modes != first.rx_modes:
                raise ValueError("all realizations must share tx/rx modes")
        object.__setattr__(self, "realizations", reals)

    def __len__(self) -> int:
        return len(self.realizations)

    def __iter__(self):
        return iter(self.realizations)

    @property
    def tx_modes(self) -> tuple[int, ...]:
        return self.realizations[0].tx_modes

    @property
    def rx_modes(self) -> tuple[int, ...]:
        return self.realizations[0].rx_modes

    @property
    def cn2(self) -> float:
        return self.realizations[0].cn2

    @property
    def regime(self) -> str:
        return classify_regime(self.cn2, self.wavelength, self.path_length)

    @property
    def matrices(self) -> np.ndarray:
        """Stacked ``(R, L_rx, L_tx)`` coupling matrices."""
        return np.stack([r.matrix for r in self.realizations])

    def gains(self, rx: int, tx: int) -> np.ndarray:
        return self.matrices[:, self.rx_modes.index(rx), self.tx_modes.index(tx)]


def _sample_one(args):
    tx, rx, params, seed, grid, w0, z = args
    return sample_channel(tx, rx, params, seed, grid=grid, w0=w0, path_length=z)


def sample_ensemble(tx_modes: Sequence[int], rx_modes: Sequence[int], params: TurbulenceParams | None,
                    count: int, seed: int, *, grid: SimulationGrid | None = None, w0: float = 0.016,
                    workers: int | None = 1, start: int = 0) -> ChannelEnsemble:
    """Draw ``count`` realizations; realization ``t`` uses seed ``(seed, t)``.

    ``workers`` > 1 distributes trials over processes; results do not depend
    on the worker count.
    """
    grid = grid or SimulationGrid()
    z = params.path_length if params else DEFAULT_PATH
    jobs = [(tuple(tx_modes), tuple(rx_modes), params, (seed, t), grid, w0, z)
            for t in range(start, start + count)]
    workers = workers or os.cpu_count() or 1
    if workers > 1 and count > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reals = list(pool.map(_sample_one, jobs, chunksize=max(1, count // (4 * workers))))
    else:
        reals = [_sample_one(j) for j in jobs]
    return ChannelEnsemble(tuple(reals), grid.wavelength, z)


def identity_ensemble(tx_modes: Sequence[int], rx_modes: Sequence[int] | None = None) -> ChannelEnsemble:
    """Single turbulence-free realization with ``H = I`` (AWGN reference)."""
    rx_modes = tuple(rx_modes) if rx_modes is not None else tuple(tx_modes)
    h = np.array([[1.0 + 0j if r == t else 0j for t in tx_modes] for r in rx_modes])
    return ChannelEnsemble((ChannelRealization(tx_modes, rx_modes, h),))
