"""Atmospheric phase screens from the modified Kolmogorov spectrum."""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
import scipy.fft
from scipy.integrate import quad
from scipy.special import j0

from .grid import SimulationGrid
from .rng import SeedLike, stream

REGIME_CN2 = {"weak": 1e-14, "strong": 1e-13}


@dataclass(frozen=True)
class TurbulenceParams:
    """Turbulence strength and the layout of the screen stack.

    Defaults are the 1 km, 20-screen weak-turbulence link.
    """

    cn2: float = 1e-14
    inner_scale: float = 5e-3
    outer_scale: float = 20.0
    screen_count: int = 20
    screen_spacing: float = 50.0

    def __post_init__(self):
        if not self.cn2 > 0:
            raise ValueError(f"cn2 must be positive, got {self.cn2!r}")
        if not 0 < self.inner_scale < self.outer_scale:
            raise ValueError("need 0 < inner_scale < outer_scale")
        if int(self.screen_count) != self.screen_count or self.screen_count < 1:
            raise ValueError(f"screen_count must be a positive integer, got {self.screen_count!r}")
        if not self.screen_spacing > 0:
            raise ValueError(f"screen_spacing must be positive, got {self.screen_spacing!r}")

    @classmethod
    def preset(cls, regime: str, **overrides) -> "TurbulenceParams":
        """``"weak"`` or ``"strong"`` parameter set."""
        try:
            cn2 = REGIME_CN2[regime]
        except KeyError:
            raise ValueError(f"unknown regime {regime!r}; expected one of {sorted(REGIME_CN2)}") from None
        return cls(cn2=cn2, **overrides)

    @property
    def kappa_l(self) -> float:
        return 3.3 / self.inner_scale

    @property
    def path_length(self) -> float:
        return self.screen_count * self.screen_spacing

    def scaled(self, factor: float) -> "TurbulenceParams":
        return replace(self, cn2=self.cn2 * factor)


@dataclass(frozen=True, eq=False)
class PhaseScreen:
    grid: SimulationGrid
    phase: np.ndarray

    def __post_init__(self):
        ph = np.asarray(self.phase, dtype=float)
        n = self.grid.n_samples
        if ph.shape != (n, n):
            raise ValueError(f"phase must have shape {(n, n)}, got {ph.shape}")
        if not np.all(np.isfinite(ph)):
            raise ValueError("phase screen values must be finite")
        ph = ph.copy()
        ph.flags.writeable = False
        object.__setattr__(self, "phase", ph)

    @property
    def transmittance(self) -> np.ndarray:
        return np.exp(1j * self.phase)


def _spectrum_shape(kappa, inner_scale: float, outer_scale: float) -> np.ndarray:
    # everything except 0.033*cn2; clamped where the bump polynomial goes negative
    kappa = np.asarray(kappa, dtype=float)
    q = kappa / (3.3 / inner_scale)
    bump = 1 + 1.802 * q - 0.254 * q ** (7 / 6)
    shape = np.exp(-(q**2)) / (kappa**2 + 1 / outer_scale) ** (11 / 6) * bump
    return np.maximum(shape, 0.0)


def kolmogorov_spectrum(kappa, params: TurbulenceParams):
    """Refractive-index power spectrum Φn(κ) in m³.

    ``0.033 Cn² exp(-κ²/κl²) / (κ² + 1/L0)^(11/6) · f(κ, κl)`` with
    ``f = 1 + 1.802 (κ/κl) - 0.254 (κ/κl)^(7/6)`` and ``κl = 3.3/l0``.
    The outer-scale term is ``1/L0`` exactly as written (not ``1/L0²``).
    Negative values of ``f`` far above κl are clamped to zero.
    """
    kappa = np.asarray(kappa, dtype=float)
    if np.any(kappa < 0):
        raise ValueError("kappa must be non-negative")
    out = params.cn2 * (0.033 * _spectrum_shape(kappa, params.inner_scale, params.outer_scale))
    return out if out.ndim else float(out)


def phase_spectrum(kappa, params: TurbulenceParams, wavelength: float):
    """Phase PSD of one screen, ``2π k² Δz Φn(κ)``, in rad²·m²."""
    k = 2 * np.pi / wavelength
    return 2 * np.pi * k**2 * params.screen_spacing * kolmogorov_spectrum(kappa, params)


@lru_cache(maxsize=16)
def _bin_amplitude(n: int, dx: float, wavelength: float, inner: float, outer: float, dz: float) -> np.ndarray:
    # sqrt(dκ² · Φφ(κ)) / sqrt(cn2), FFT layout, DC removed
    grid = SimulationGrid(n, dx, wavelength)
    kappa = np.sqrt(grid.kappa_sq())
    k = grid.k
    unit = 2 * np.pi * k**2 * dz * 0.033 * _spectrum_shape(kappa, inner, outer)
    amp = np.sqrt(unit) * grid.dkappa
    amp[0, 0] = 0.0
    amp.flags.writeable = False
    return amp


def generate_phase_screen(grid: SimulationGrid, params: TurbulenceParams, seed: SeedLike) -> PhaseScreen:
    """Draw one random phase screen.

    Each FFT bin gets a circular complex Gaussian (unit variance per real
    component) scaled by ``sqrt(dκ² Φφ(κ))``; the inverse transform's real
    part is the screen, so its variance is ``Σ dκ² Φφ``. The piston (DC)
    bin is dropped.
    """
    rng = stream(seed)
    n = grid.n_samples
    amp = _bin_amplitude(n, grid.dx, grid.wavelength, params.inner_scale, params.outer_scale,
                         params.screen_spacing)
    noise = rng.standard_normal((2, n, n))
    spec = (noise[0] + 1j * noise[1]) * (np.sqrt(params.cn2) * amp)
    phase = scipy.fft.ifft2(spec, norm="forward").real
    return PhaseScreen(grid, phase)


def rytov_variance(cn2: float, wavelength: float, z: float) -> float:
    """Plane-wave Rytov variance ``1.23 Cn² k^(7/6) z^(11/6)``."""
    if not (cn2 > 0 and wavelength > 0 and z > 0):
        raise ValueError("cn2, wavelength and z must all be positive")
    return 1.23 * cn2 * (2 * np.pi / wavelength) ** (7 / 6) * z ** (11 / 6)


def classify_regime(cn2: float, wavelength: float, z: float) -> str:
    """``"none"`` for cn2 == 0, else ``"weak"``/``"strong"`` by Rytov variance."""
    if cn2 == 0:
        return "none"
    return "weak" if rytov_variance(cn2, wavelength, z) < 1 else "strong"


def fried_parameter(cn2: float, wavelength: float, dz: float) -> float:
    """Plane-wave coherence diameter r0 of a uniform slab of thickness ``dz``."""
    k = 2 * np.pi / wavelength
    return (0.423 * k**2 * cn2 * dz) ** (-3 / 5)


def kolmogorov_structure_function(r, cn2: float, wavelength: float, dz: float):
    """Pure inertial-range law ``6.88 (r/r0)^(5/3)``."""
    return 6.88 * (np.asarray(r, dtype=float) / fried_parameter(cn2, wavelength, dz)) ** (5 / 3)


def spectrum_structure_function(r: float, params: TurbulenceParams, wavelength: float) -> float:
    """Phase structure function of the full modified spectrum by quadrature.

    ``D(r) = 4π ∫ κ Φφ(κ) (1 - J0(κ r)) dκ``, including the inner-scale bump
    and outer-scale roll-off that the pure 5/3 law ignores.
    """
    upper = 20 * params.kappa_l
    integrand = lambda q: q * phase_spectrum(q, params, wavelength) * (1 - j0(q * r))
    val, _ = quad(integrand, 0, upper, limit=4000, points=[1 / r, 10 / r])
    return 4 * np.pi * val


def empirical_structure_function(phase: np.ndarray, lags, axis: int = 1) -> np.ndarray:
    """Mean ``(φ(x + r) - φ(x))²`` over a periodic screen for integer pixel lags."""
    phase = np.asarray(phase)
    return np.array([np.mean((np.roll(phase, -int(lag), axis=axis) - phase) ** 2) for lag in lags])
