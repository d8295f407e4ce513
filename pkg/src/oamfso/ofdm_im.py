"""OFDM with index modulation: mapping, modulation, ML detection, SE analytics.

Bit arrays are ``uint8`` 0/1 vectors, most significant bit first. Frequency
vectors use unitary transforms, so block energy is the same in both domains
(before the cyclic prefix is added).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import comb, floor, log2

import numpy as np
import scipy.fft

# Table I: b1 bits -> active carrier (0-based)
TABLE1 = {(0, 0): 0, (0, 1): 1, (1, 1): 2, (1, 0): 3}


@dataclass(frozen=True)
class OfdmImConfig:
    """Block layout of an OFDM-IM symbol.

    ``groups`` sub-blocks of ``n_fft // groups`` subcarriers each carry
    ``b1 = floor(log2 C(N_G, K))`` index bits and ``b2 = K log2 M`` symbol
    bits. ``mapper`` is ``"table"`` (only valid for K=1, N_G=4),
    ``"combinadic"``, or ``"auto"`` (table when it applies).
    """

    n_fft: int = 128
    n_cp: int = 16
    groups: int = 32
    active: int = 1
    mod_order: int = 4
    mapper: str = "auto"

    def __post_init__(self):
        if self.n_fft < 1 or self.groups < 1 or self.n_fft % self.groups:
            raise ValueError(f"groups={self.groups} must divide n_fft={self.n_fft}")
        if not 1 <= self.active <= self.group_size:
            raise ValueError(f"active={self.active} must lie in [1, {self.group_size}]")
        m = self.mod_order
        if m < 2 or m & (m - 1):
            raise ValueError(f"mod_order must be a power of two >= 2, got {m}")
        if not 0 <= self.n_cp <= self.n_fft:
            raise ValueError(f"n_cp must lie in [0, n_fft], got {self.n_cp}")
        if self.mapper not in ("auto", "table", "combinadic"):
            raise ValueError(f"unknown mapper {self.mapper!r}")
        if self.mapper == "table" and not self.table_applies:
            raise ValueError("table mapper requires active=1 and group_size=4")

    @classmethod
    def plain_ofdm(cls, n_fft: int = 128, n_cp: int = 16, mod_order: int = 4) -> "OfdmImConfig":
        """Conventional OFDM as the degenerate single-carrier-group case."""
        return cls(n_fft=n_fft, n_cp=n_cp, groups=n_fft, active=1, mod_order=mod_order,
                   mapper="combinadic")

    @property
    def group_size(self) -> int:
        return self.n_fft // self.groups

    @property
    def table_applies(self) -> bool:
        return self.active == 1 and self.group_size == 4

    @property
    def uses_table(self) -> bool:
        return self.mapper == "table" or (self.mapper == "auto" and self.table_applies)

    @property
    def bits_per_symbol(self) -> int:
        return int(log2(self.mod_order))

    @property
    def b1(self) -> int:
        return floor(log2(comb(self.group_size, self.active)))

    @property
    def b2(self) -> int:
        return self.active * self.bits_per_symbol

    @property
    def b(self) -> int:
        return self.b1 + self.b2

    @property
    def bits_per_block(self) -> int:
        return self.groups * self.b

    @property
    def n_candidates(self) -> int:
        return 2**self.b1 * self.mod_order**self.active

    @cached_property
    def patterns(self) -> np.ndarray:
        """``(2**b1, K)`` active-index sets, row ``j`` selected by index bits ``j``."""
        if self.uses_table:
            return np.array([[TABLE1[_to_bits(j, 2)]] for j in range(4)])
        return np.array([index_to_combination(j, self.group_size, self.active) for j in range(2**self.b1)])

    @cached_property
    def codebook(self) -> np.ndarray:
        """All ``(n_candidates, N_G)`` sub-block vectors; row ``j`` encodes bit word ``j``."""
        words = np.arange(self.n_candidates)
        bits = ((words[:, None] >> np.arange(self.b - 1, -1, -1)) & 1).astype(np.uint8)
        return encode_groups(bits, self)

    def as_dict(self) -> dict:
        return {"n_fft": self.n_fft, "n_cp": self.n_cp, "groups": self.groups,
                "active_k": self.active, "mod_order": self.mod_order, "mapper": self.mapper}

    @classmethod
    def from_dict(cls, d: dict) -> "OfdmImConfig":
        allowed = {"n_fft", "n_cp", "groups", "active_k", "mod_order", "mapper"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown OFDM config keys: {sorted(unknown)}")
        kw = {k: v for k, v in d.items() if k != "active_k"}
        if "active_k" in d:
            kw["active"] = d["active_k"]
        return cls(**kw)


def _to_bits(value: int, width: int) -> tuple[int, ...]:
    return tuple((value >> (width - 1 - i)) & 1 for i in range(width))


def _from_bits(bits) -> int:
    out = 0
    for bit in bits:
        out = (out << 1) | int(bit)
    return out


# -- index mappers ---------------------------------------------------------

def index_to_combination(j: int, n: int, k: int) -> tuple[int, ...]:
    """The ``j``-th ``k``-subset of ``range(n)`` in lexicographic order."""
    total = comb(n, k)
    if not 0 <= j < total:
        raise ValueError(f"index {j} outside [0, C({n},{k})={total})")
    out = []
    start = 0
    for slots in range(k, 0, -1):
        for c in range(start, n):
            block = comb(n - c - 1, slots - 1)
            if j < block:
                out.append(c)
                start = c + 1
                break
            j -= block
    return tuple(out)


def combination_to_index(subset, n: int, k: int) -> int:
    """Inverse of :func:`index_to_combination`."""
    subset = tuple(int(s) for s in subset)
    if len(subset) != k or any(b <= a for a, b in zip(subset, subset[1:])) \
            or (subset and (subset[0] < 0 or subset[-1] >= n)):
        raise ValueError(f"{subset} is not a sorted {k}-subset of range({n})")
    j = 0
    start = 0
    for pos, c in enumerate(subset):
        slots = k - pos
        for skipped in range(start, c):
            j += comb(n - skipped - 1, slots - 1)
        start = c + 1
    return j


def table1_lookup(bits) -> int:
    """Active carrier (0-based) for the two index bits of Table I."""
    key = tuple(int(b) for b in bits)
    if key not in TABLE1:
        raise ValueError(f"Table I takes exactly two bits, got {bits!r}")
    return TABLE1[key]


# -- QAM -------------------------------------------------------------------

def _gray(n):
    return n ^ (n >> 1)


def _gray_inverse(g):
    g = np.asarray(g).copy()
    shift = g >> 1
    while np.any(shift):
        g ^= shift
        shift >>= 1
    return g


def _axis_bits(mod_order: int) -> tuple[int, int]:
    nb = int(log2(mod_order))
    return (nb + 1) // 2, nb // 2


def qam_alphabet(mod_order: int) -> np.ndarray:
    """Symbol for every bit word ``0..M-1`` (I bits first, Gray per axis)."""
    words = np.arange(mod_order)
    return qam_map(((words[:, None] >> np.arange(int(log2(mod_order)) - 1, -1, -1)) & 1), mod_order)


def qam_map(bits, mod_order: int = 4) -> np.ndarray:
    """Map ``(..., log2 M)`` bits to unnormalized Gray QAM symbols.

    Levels are odd integers, so M=4 gives exactly ``±1 ± 1j`` and M=2 gives
    ``±1``. Odd bit counts give a rectangular constellation.
    """
    bits = np.asarray(bits, dtype=np.int64)
    bi, bq = _axis_bits(mod_order)
    if bits.shape[-1] != bi + bq:
        raise ValueError(f"M={mod_order} needs {bi + bq} bits per symbol, got {bits.shape[-1]}")
    weights_i = 1 << np.arange(bi - 1, -1, -1)
    weights_q = 1 << np.arange(bq - 1, -1, -1)
    wi = bits[..., :bi] @ weights_i
    re = (2**bi - 1) - 2 * _gray_inverse(wi)
    if bq:
        wq = bits[..., bi:] @ weights_q
        im = (2**bq - 1) - 2 * _gray_inverse(wq)
    else:
        im = np.zeros_like(re)
    return re + 1j * im


def qam_demap(symbols, mod_order: int = 4) -> np.ndarray:
    """Nearest-neighbour inverse of :func:`qam_map`; returns ``(..., log2 M)`` bits."""
    symbols = np.asarray(symbols)
    bi, bq = _axis_bits(mod_order)

    def axis(v, nb):
        levels = 2**nb
        idx = np.clip(np.rint(((levels - 1) - v) / 2), 0, levels - 1).astype(np.int64)
        g = _gray(idx)
        return (g[..., None] >> np.arange(nb - 1, -1, -1)) & 1

    out = axis(symbols.real, bi)
    if bq:
        out = np.concatenate([out, axis(symbols.imag, bq)], axis=-1)
    return out.astype(np.uint8)


def mean_symbol_energy(mod_order: int) -> float:
    return float(np.mean(np.abs(qam_alphabet(mod_order)) ** 2))


# -- block encode / modulate -------------------------------------------------

def encode_groups(bits, config: OfdmImConfig) -> np.ndarray:
    """Map ``(..., b)`` bit words to ``(..., N_G)`` sub-block vectors."""
    bits = np.asarray(bits, dtype=np.uint8)
    b1, k, nb = config.b1, config.active, config.bits_per_symbol
    lead = bits.shape[:-1]
    index_words = bits[..., :b1] @ (1 << np.arange(b1 - 1, -1, -1)) if b1 else np.zeros(lead, int)
    active = config.patterns[index_words]
    syms = qam_map(bits[..., b1:].reshape(*lead, k, nb), config.mod_order)
    out = np.zeros(lead + (config.group_size,), complex)
    np.put_along_axis(out, active, syms, axis=-1)
    return out


def im_encode(bits, config: OfdmImConfig) -> np.ndarray:
    """Frequency-domain OFDM-IM block(s) from ``(..., G*b)`` bits.

    Group ``g`` occupies subcarriers ``[g*N_G, (g+1)*N_G)``.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape[-1] != config.bits_per_block:
        raise ValueError(f"expected {config.bits_per_block} bits per block, got {bits.shape[-1]}")
    lead = bits.shape[:-1]
    sub = encode_groups(bits.reshape(*lead, config.groups, config.b), config)
    return sub.reshape(*lead, config.n_fft)


@dataclass(frozen=True, eq=False)
class OfdmSymbol:
    freq: np.ndarray
    time: np.ndarray


def ofdm_modulate(freq, config: OfdmImConfig) -> np.ndarray:
    """Unitary IFFT plus cyclic prefix; returns ``(..., n_fft + n_cp)`` samples."""
    freq = np.asarray(freq)
    if freq.shape[-1] != config.n_fft:
        raise ValueError(f"expected {config.n_fft} subcarriers, got {freq.shape[-1]}")
    core = scipy.fft.ifft(freq, norm="ortho", axis=-1)
    if config.n_cp == 0:
        return core
    return np.concatenate([core[..., -config.n_cp:], core], axis=-1)


def ofdm_demodulate(time, config: OfdmImConfig) -> np.ndarray:
    """Strip the cyclic prefix and apply the unitary FFT."""
    time = np.asarray(time)
    if time.shape[-1] != config.n_fft + config.n_cp:
        raise ValueError(f"expected {config.n_fft + config.n_cp} samples, got {time.shape[-1]}")
    return scipy.fft.fft(time[..., config.n_cp:], norm="ortho", axis=-1)


def build_symbol(bits, config: OfdmImConfig) -> OfdmSymbol:
    freq = im_encode(bits, config)
    return OfdmSymbol(freq, ofdm_modulate(freq, config))


# -- detection -------------------------------------------------------------

def ml_detect_groups(y, h, config: OfdmImConfig) -> np.ndarray:
    """Vectorized joint ML detection; ``y``, ``h`` are ``(..., N_G)``.

    Returns the winning codeword index (the decoded b-bit word as an
    integer). Ties go to the lowest index.
    """
    y = np.asarray(y)[..., None, :]
    h = np.asarray(h)[..., None, :]
    metric = np.sum(np.abs(y - h * config.codebook) ** 2, axis=-1)
    return np.argmin(metric, axis=-1)


def word_bits(words, width: int) -> np.ndarray:
    words = np.asarray(words)
    return ((words[..., None] >> np.arange(width - 1, -1, -1)) & 1).astype(np.uint8)


def ml_detect(y_g, h_g, config: OfdmImConfig):
    """Detect one sub-block: ``(active indices, symbols, bits)``."""
    word = int(ml_detect_groups(y_g, h_g, config))
    bits = word_bits(word, config.b)
    x = config.codebook[word]
    active = tuple(int(i) for i in np.flatnonzero(x))
    return active, x[list(active)], bits


def detect_block(y, h, config: OfdmImConfig) -> np.ndarray:
    """ML-detect whole ``(..., n_fft)`` blocks to ``(..., G*b)`` bits."""
    y = np.asarray(y)
    h = np.broadcast_to(h, y.shape)
    lead = y.shape[:-1]
    shape = lead + (config.groups, config.group_size)
    words = ml_detect_groups(y.reshape(shape), h.reshape(shape), config)
    return word_bits(words, config.b).reshape(*lead, config.bits_per_block)


def ofdm_detect(y, h, mod_order: int = 4) -> np.ndarray:
    """Per-subcarrier zero-forcing + nearest-neighbour slicing for plain OFDM."""
    y = np.asarray(y)
    eq = y / np.asarray(h)
    bits = qam_demap(eq, mod_order)
    return bits.reshape(*y.shape[:-1], -1)


# -- analytics -------------------------------------------------------------

def group_bits(group_size: int, active: int, mod_order: int) -> int:
    """``b(K) = floor(log2 C(N_G, K)) + K log2 M``."""
    return floor(log2(comb(group_size, active))) + active * int(log2(mod_order))


def spectral_efficiency(config: OfdmImConfig, t_fft: float, t_cp: float, bandwidth: float) -> float:
    """``G (b1 + b2) / ((T_fft + T_cp) B)`` in bit/s/Hz."""
    if not (t_fft > 0 and t_cp >= 0 and bandwidth > 0):
        raise ValueError("durations and bandwidth must be positive")
    return config.groups * config.b / ((t_fft + t_cp) * bandwidth)


def se_ratio(n_fft: int, groups: int, active: int, mod_order: int) -> float:
    """OFDM-IM over plain-OFDM spectral efficiency at equal timing."""
    return groups * group_bits(n_fft // groups, active, mod_order) / (n_fft * log2(mod_order))


def k_opt(n_fft: int, groups: int, mod_order: int) -> int:
    """Closed-form active-carrier count ``floor(M N_FFT / (G (M+1)))`` clamped to [1, N_G]."""
    k = (mod_order * n_fft) // (groups * (mod_order + 1))
    return int(min(max(k, 1), n_fft // groups))
