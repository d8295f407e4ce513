"""Monte Carlo link simulation over modal OAM channels."""
from __future__ import annotations

import zlib
from dataclasses import asdict, dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.special import erfc

from . import rng
from .ofdm_im import (OfdmImConfig, detect_block, im_encode, mean_symbol_energy,
                      ofdm_demodulate, ofdm_detect, ofdm_modulate)
from .propagation import ChannelEnsemble, identity_ensemble

LOW_CONFIDENCE_ERRORS = 100
MAX_CANDIDATES = 4096
SUBCARRIER_MODES = ("iid", "block")


def qfunc(x):
    return 0.5 * erfc(np.asarray(x) / np.sqrt(2))


@dataclass(frozen=True)
class NoiseModel:
    """Circular complex AWGN with ``E|n|² = n0`` (n0/2 per real component)."""

    snr_db: float
    n0: float

    def __post_init__(self):
        if self.n0 < 0:
            raise ValueError("n0 must be non-negative")

    def unit_samples(self, shape, seed) -> np.ndarray:
        g = rng.stream(seed)
        w = g.standard_normal((2,) + tuple(np.atleast_1d(shape)))
        return (w[0] + 1j * w[1]) / np.sqrt(2)

    def sample(self, shape, seed) -> np.ndarray:
        return np.sqrt(self.n0) * self.unit_samples(shape, seed)


def mean_block_energy(config: OfdmImConfig) -> float:
    """Expected energy of one transmitted block, cyclic prefix included."""
    active = config.groups * config.active
    return active * mean_symbol_energy(config.mod_order) * (config.n_fft + config.n_cp) / config.n_fft


def measured_block_energy(config: OfdmImConfig, blocks: int, seed) -> float:
    g = rng.stream(seed)
    bits = g.integers(0, 2, (blocks, config.bits_per_block), dtype=np.uint8)
    time = ofdm_modulate(im_encode(bits, config), config)
    return float(np.mean(np.sum(np.abs(time) ** 2, axis=-1)))


def eb_n0_to_n0(snr_db: float, config: OfdmImConfig, block_energy: float | None = None) -> float:
    """Noise density for a target Eb/N0.

    ``Eb`` is the average transmitted block energy (prefix included)
    divided by the ``G*b`` information bits of the block.
    """
    if config.bits_per_block == 0:
        raise ValueError("configuration carries no information bits")
    energy = mean_block_energy(config) if block_energy is None else block_energy
    if not energy > 0:
        raise ValueError("block energy must be positive")
    eb = energy / config.bits_per_block
    return eb / 10 ** (snr_db / 10)


def noise_model(snr_db: float, config: OfdmImConfig) -> NoiseModel:
    return NoiseModel(snr_db, eb_n0_to_n0(snr_db, config))


def apply_channel(x, h, noise: NoiseModel, seed) -> np.ndarray:
    """``y = h ⊙ x + n`` with the noise drawn from ``seed``."""
    x = np.asarray(x)
    h = np.asarray(h)
    if x.shape != h.shape:
        raise ValueError(f"length mismatch: x {x.shape} vs h {h.shape}")
    return h * x + noise.sample(x.shape, seed)


@dataclass(frozen=True)
class BerRecord:
    scheme: str
    regime: str
    mode: int
    snr_db: float
    trials: int
    bits_total: int
    bit_errors: int
    seed: int = 0

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_total if self.bits_total else 0.0

    @property
    def low_confidence(self) -> bool:
        return self.bit_errors < LOW_CONFIDENCE_ERRORS

    @property
    def std_error(self) -> float:
        p = self.ber
        return float(np.sqrt(p * (1 - p) / self.bits_total)) if self.bits_total else 0.0

    def as_row(self) -> dict:
        row = asdict(self)
        row.pop("seed")
        row["ber"] = self.ber
        row["low_confidence"] = self.low_confidence
        return row


def default_schemes(config: OfdmImConfig) -> dict[str, OfdmImConfig]:
    return {"OFDM-IM": config, "OFDM": OfdmImConfig.plain_ofdm(config.n_fft, config.n_cp, config.mod_order)}


def _scheme_tag(name: str) -> int:
    return zlib.crc32(name.encode())


def _is_awgn(channel) -> bool:
    return isinstance(channel, str) and channel == "awgn"


def _as_ensemble(channel) -> ChannelEnsemble:
    if isinstance(channel, ChannelEnsemble):
        return channel
    if _is_awgn(channel):
        return identity_ensemble((0,))
    from .io import read_ensemble  # a path to a JSON-lines ensemble

    return read_ensemble(channel)


def _draw_indices(seed: int, trials: range, width: int, pool: int, subcarrier_mode: str) -> np.ndarray:
    if subcarrier_mode not in SUBCARRIER_MODES:
        raise ValueError(f"subcarrier_mode must be one of {SUBCARRIER_MODES}")
    rows = []
    for t in trials:
        g = rng.stream(seed, rng.DRAW, t)
        if subcarrier_mode == "iid":
            rows.append(g.integers(0, pool, width))
        else:
            rows.append(np.full(width, g.integers(0, pool)))
    return np.array(rows)


def paired_block_errors(schemes: Mapping[str, OfdmImConfig], channel, snr_db: Sequence[float],
                        trials: int, seed: int, *, modes: Sequence[int] | None = None,
                        subcarrier_mode: str = "iid", crosstalk: bool = True,
                        chunk: int = 256) -> dict[str, np.ndarray]:
    """Per-block bit-error counts, shape ``(n_snr, n_modes, trials)`` per scheme.

    All schemes see the same channel draws and the same unit-variance noise
    realization for each trial; only the noise scale differs, set by each
    scheme's Eb. Trial ``t`` draws channel indices from ``(seed, DRAW, t)``,
    noise from ``(seed, NOISE, t)`` and bits from ``(seed, BITS, tag, t)``.

    The received mode-m signal is ``H[m,m] x_m + Σ_n H[m,n] x_n + noise``
    when ``crosstalk`` is on; detection uses ``H[m,m]`` only.
    """
    tx = tuple(modes) if modes is not None else None
    if _is_awgn(channel):
        tx = tx or (1,)
        ens = identity_ensemble(tx)
    else:
        ens = _as_ensemble(channel)
        tx = tx or ens.tx_modes
    missing = [m for m in tx if m not in ens.tx_modes or m not in ens.rx_modes]
    if missing:
        raise ValueError(f"modes {missing} not present in the channel ensemble")
    n_fft = next(iter(schemes.values())).n_fft
    if any(c.n_fft != n_fft for c in schemes.values()):
        raise ValueError("paired schemes must share n_fft")
    snr_db = np.atleast_1d(np.asarray(snr_db, dtype=float))

    mats = ens.matrices
    rx_idx = [ens.rx_modes.index(m) for m in tx]
    tx_idx = [ens.tx_modes.index(m) for m in tx]
    # coupling[r, a, b]: received on mode a from transmitted mode b
    coupling = mats[:, rx_idx][:, :, tx_idx]
    if not crosstalk:
        coupling = coupling * np.eye(len(tx))

    out = {name: np.zeros((len(snr_db), len(tx), trials), dtype=np.int64) for name in schemes}
    for lo in range(0, trials, chunk):
        block = range(lo, min(trials, lo + chunk))
        idx = _draw_indices(seed, block, n_fft, len(ens), subcarrier_mode)
        gains = coupling[idx]                            # (T, n_fft, a, b)
        gains = np.moveaxis(gains, 1, -1)                # (T, a, b, n_fft)
        own = np.einsum("taan->tan", gains)
        noise = np.stack([NoiseModel(0, 1).unit_samples((len(tx), n_fft), (seed, rng.NOISE, t))
                          for t in block])
        for name, cfg in schemes.items():
            tag = _scheme_tag(name)
            bits = np.stack([rng.stream(seed, rng.BITS, tag, t).integers(
                0, 2, (len(tx), cfg.bits_per_block), dtype=np.uint8) for t in block])
            x = ofdm_demodulate(ofdm_modulate(im_encode(bits, cfg), cfg), cfg)
            clean = np.einsum("tabn,tbn->tan", gains, x)
            plain = cfg.groups == cfg.n_fft and cfg.active == 1
            for s, snr in enumerate(snr_db):
                y = clean + np.sqrt(eb_n0_to_n0(snr, cfg)) * noise
                hat = ofdm_detect(y, own, cfg.mod_order) if plain else detect_block(y, own, cfg)
                out[name][s, :, lo:lo + len(block)] = np.sum(hat != bits, axis=-1).T
    return out


def run_ber_sweep(config: OfdmImConfig, channel, snr_db: Sequence[float], trials: int, seed: int, *,
                  schemes: Mapping[str, OfdmImConfig] | None = None, modes: Sequence[int] | None = None,
                  subcarrier_mode: str = "iid", crosstalk: bool = True,
                  regime: str | None = None) -> list[BerRecord]:
    """BER versus Eb/N0 for OFDM-IM and plain OFDM on paired draws.

    ``channel`` is ``"awgn"``, a :class:`ChannelEnsemble`, or a path to a
    channel-ensemble JSON-lines file.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    schemes = dict(schemes) if schemes is not None else default_schemes(config)
    if _is_awgn(channel):
        tx = tuple(modes) if modes is not None else (1,)
        regime = regime or "none"
    else:
        channel = _as_ensemble(channel)
        tx = tuple(modes) if modes is not None else channel.tx_modes
        regime = regime or channel.regime
    errors = paired_block_errors(schemes, channel, snr_db, trials, seed, modes=tx,
                                 subcarrier_mode=subcarrier_mode, crosstalk=crosstalk)
    records = []
    for name, cfg in schemes.items():
        for a, mode in enumerate(tx):
            for s, snr in enumerate(np.atleast_1d(snr_db)):
                records.append(BerRecord(name, regime, int(mode), float(snr), trials,
                                         trials * cfg.bits_per_block, int(errors[name][s, a].sum()), seed))
    return records


# -- analytic bound ----------------------------------------------------------

def _pair_distances(config: OfdmImConfig) -> np.ndarray:
    if config.n_candidates > MAX_CANDIDATES:
        raise ValueError(f"candidate set of {config.n_candidates} exceeds {MAX_CANDIDATES}")
    cb = config.codebook
    d = np.abs(cb[:, None, :] - cb[None, :, :]) ** 2     # (C, C, N_G)
    off = ~np.eye(len(cb), dtype=bool)
    return d[off]                                         # (C*(C-1), N_G)


def union_bound(config: OfdmImConfig, h_groups, n0: float) -> np.ndarray:
    """Union bound on sub-block error probability for each channel row.

    ``h_groups`` is ``(..., N_G)``; returns
    ``(1/|C|) Σ_{i≠j} Q(sqrt(‖h ⊙ (x_i - x_j)‖² / (2 N0)))``.
    """
    d = _pair_distances(config)
    g2 = np.abs(np.asarray(h_groups)) ** 2
    dist = g2 @ d.T                                       # (..., pairs)
    if n0 == 0:
        terms = (dist == 0).astype(float) * 0.5
    else:
        terms = qfunc(np.sqrt(dist / (2 * n0)))
    return terms.sum(axis=-1) / config.n_candidates


def union_bound_ber(config: OfdmImConfig, channel, snr_db: Sequence[float], *, mode: int | None = None,
                    subcarrier_mode: str = "iid", draws: int = 4000, seed: int = 0) -> np.ndarray:
    """Ensemble-averaged union bound at each Eb/N0.

    Channel gains per sub-block are drawn like the Monte Carlo sweep
    (``"iid"``: one realization per subcarrier; ``"block"``: one per group).
    The bound covers sub-block errors, so it also bounds the bit error rate.
    """
    if _is_awgn(channel):
        h = np.ones((1, config.group_size), complex)
    else:
        ens = _as_ensemble(channel)
        m = mode if mode is not None else ens.tx_modes[0]
        pool = ens.gains(m, m)
        idx = _draw_indices(seed, range(draws), config.group_size, len(pool), subcarrier_mode)
        h = pool[idx]
    return np.array([union_bound(config, h, eb_n0_to_n0(s, config)).mean()
                     for s in np.atleast_1d(snr_db)])


# -- capacity ----------------------------------------------------------------

def realization_capacity(ensemble: ChannelEnsemble, snr_db: float, mode: int,
                         crosstalk: bool = True) -> np.ndarray:
    """``log2(1 + ρ|H_mm|² / (1 + ρ Σ_{n≠m}|H_mn|²))`` per realization.

    The interference sum runs over the other transmitted modes; with
    ``crosstalk=False`` it is dropped.
    """
    if mode not in ensemble.tx_modes or mode not in ensemble.rx_modes:
        raise ValueError(f"mode {mode} absent from the ensemble")
    rho = 10 ** (snr_db / 10)
    mats = ensemble.matrices
    r = ensemble.rx_modes.index(mode)
    row = np.abs(mats[:, r, :]) ** 2
    own = row[:, ensemble.tx_modes.index(mode)]
    interference = row.sum(axis=1) - own if crosstalk else 0.0
    return np.log2(1 + rho * own / (1 + rho * interference))


def capacity_cdf(ensemble: ChannelEnsemble, snr_db: float = 15.0, mode: int = 1,
                 crosstalk: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Empirical CDF ``(sorted capacities, cumulative probability)``."""
    caps = np.sort(realization_capacity(ensemble, snr_db, mode, crosstalk))
    return caps, np.arange(1, len(caps) + 1) / len(caps)
