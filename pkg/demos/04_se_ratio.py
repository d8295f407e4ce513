"""Spectral efficiency of OFDM-IM relative to OFDM as the number of active subcarriers grows."""
from oamfso.ofdm_im import OfdmImConfig, k_opt, se_ratio

n_fft, m = 128, 4
for g in (4, 8, 16, 32):
    ng = n_fft // g
    series = [se_ratio(n_fft, g, k, m) for k in range(1, ng + 1)]
    best = max(range(ng), key=series.__getitem__) + 1
    print(f"G={g:2d} (N_G={ng:2d}): peak {max(series):.3f} at K={best}, k_opt={k_opt(n_fft, g, m)}, "
          f"K=N_G gives {series[-1]:.2f}")

c = OfdmImConfig()
print(f"paper configuration: {c.bits_per_block} bits per block vs {2 * n_fft} for OFDM, "
      f"ratio {se_ratio(n_fft, c.groups, c.active, m)}")
