"""Acceptance criteria, one verdict line per criterion.

Monte Carlo criteria share a session ensemble of paired realizations on a
256² grid: realization ``t`` uses the same screen seed in both regimes.
"""
import itertools
import math
from math import comb, floor, log2

import numpy as np
import pytest

from oamfso import SimulationGrid, TurbulenceParams
from oamfso.grid import LgBeamSpec, lg_field, overlap
from oamfso.linksim import capacity_cdf, paired_block_errors, qfunc, run_ber_sweep, union_bound_ber
from oamfso.ofdm_im import (OfdmImConfig, combination_to_index, detect_block, im_encode, index_to_combination,
                            k_opt, ofdm_demodulate, ofdm_modulate, se_ratio, table1_lookup)
from oamfso.propagation import sample_ensemble, vacuum_step
from oamfso.turbulence import (empirical_structure_function, generate_phase_screen,
                               kolmogorov_structure_function, rytov_variance)

REALIZATIONS = 500
SEED = 7
TX = (1, 3)
RX = tuple(range(-5, 6))
SNR_DB = [0, 5, 10, 15, 20, 25, 30]
Z95 = 1.6448536269514722       # one-sided 95% normal quantile
# 40-digit evaluations of 1.23 Cn² k^(7/6) z^(11/6)
RYTOV_WEAK = 0.19909543851127026272
RYTOV_STRONG = 1.9909543851127026272

IM = OfdmImConfig()
OFDM = OfdmImConfig.plain_ofdm()
SCHEMES = {"OFDM-IM": IM, "OFDM": OFDM}

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def ensembles():
    grid = SimulationGrid(256, 5e-3, 1550e-9)
    return {r: sample_ensemble(TX, RX, TurbulenceParams.preset(r), REALIZATIONS, SEED, grid=grid, workers=None)
            for r in ("weak", "strong")}


def upper95(d):
    d = np.asarray(d, float)
    return d.mean() + Z95 * d.std(ddof=1) / math.sqrt(len(d))


def lower95(d):
    d = np.asarray(d, float)
    return d.mean() - Z95 * d.std(ddof=1) / math.sqrt(len(d))


def rel_error_up_to_phase(u, ref):
    c = np.vdot(u, ref)
    u = u * c / abs(c)
    return np.linalg.norm(u - ref) / np.linalg.norm(ref)


def test_rytov_classification(verdict):
    weak, strong = rytov_variance(1e-14, 1550e-9, 1000), rytov_variance(1e-13, 1550e-9, 1000)
    ok = abs(weak / RYTOV_WEAK - 1) < 5e-3 and abs(strong / RYTOV_STRONG - 1) < 5e-3 and weak < 1 < strong
    verdict("Rytov classification", ok, f"weak {weak:.4f} strong {strong:.4f}")


def test_vacuum_propagation_oracle(verdict):
    grid = SimulationGrid(512, 5e-3, 1550e-9)
    u = vacuum_step(lg_field(LgBeamSpec(0, 1, 0.016, 0), grid), 1000)
    ref = lg_field(LgBeamSpec(0, 1, 0.016, 1000), grid)
    err = rel_error_up_to_phase(u.samples, ref.samples)
    verdict("Vacuum propagation oracle", err <= 0.01, f"relative L2 error {err:.2e}")


def test_orthogonality(verdict):
    grid = SimulationGrid(512, 5e-3, 1550e-9)
    modes = [-3, -1, 1, 3]
    worst = 0.0
    launched = [lg_field(LgBeamSpec(0, m, 0.016, 0), grid) for m in modes]
    for fields in (launched, [vacuum_step(f, 1000) for f in launched]):
        gram = np.array([[overlap(a, b) for b in fields] for a in fields])
        worst = max(worst, np.max(np.abs(gram - np.eye(4))))
    verdict("Orthogonality suite", worst < 1e-3, f"max |G - I| {worst:.1e}")


def test_phase_screen_statistics(verdict):
    grid = SimulationGrid(512, 5e-3, 1550e-9)
    params = TurbulenceParams.preset("weak")
    lo = 5 * params.inner_scale
    hi = min(params.outer_scale / 4, grid.side / 2)
    lags = np.unique(np.geomspace(lo / grid.dx, hi / grid.dx, 16).round().astype(int))
    d = np.zeros(len(lags))
    screens = 200
    for s in range(screens):
        phase = generate_phase_screen(grid, params, (SEED, s)).phase
        d += 0.5 * (empirical_structure_function(phase, lags, 0) + empirical_structure_function(phase, lags, 1))
    d /= screens
    ratio = d / kolmogorov_structure_function(lags * grid.dx, params.cn2, grid.wavelength, params.screen_spacing)
    worst = np.max(np.abs(ratio - 1))
    verdict("Phase-screen structure function", worst <= 0.25,
            f"r in [{lo:.3g}, {hi:.3g}] m, ratio {ratio.min():.2f}..{ratio.max():.2f}, worst deviation {worst:.0%}")


def test_turbulence_ordering(verdict, ensembles):
    weak, strong = ensembles["weak"], ensembles["strong"]
    self_diff = np.abs(weak.gains(1, 1)) ** 2 - np.abs(strong.gains(1, 1)) ** 2
    xt_diff = (np.array([r.crosstalk(1) for r in strong]) - np.array([r.crosstalk(1) for r in weak]))
    ok_self, ok_xt = lower95(self_diff) > 0, lower95(xt_diff) > 0
    detail = (f"self-coupling weak-strong {self_diff.mean():.3f} (lower95 {lower95(self_diff):.3f}); "
              f"crosstalk strong-weak {xt_diff.mean():.4f} (lower95 {lower95(xt_diff):.4f})")
    verdict("Turbulence ordering", ok_self and ok_xt, detail)


def test_capacity_cdf(verdict, ensembles):
    qs = (0.1, 0.5, 0.9)
    weak = np.quantile(capacity_cdf(ensembles["weak"], 15, 1)[0], qs)
    strong = np.quantile(capacity_cdf(ensembles["strong"], 15, 1)[0], qs)
    verdict("Capacity CDF", bool(np.all(strong < weak)),
            "quantiles weak " + " ".join(f"{v:.2f}" for v in weak) + " strong " + " ".join(f"{v:.2f}" for v in strong))


def test_mapper_modem_exactness(verdict):
    bijection = all(
        [index_to_combination(j, n, k) for j in range(comb(n, k))] == list(itertools.combinations(range(n), k))
        and all(combination_to_index(index_to_combination(j, n, k), n, k) == j for j in range(comb(n, k)))
        for n in range(1, 17) for k in range(1, n + 1))
    alphabet = (1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j)
    eq4 = {tuple(np.eye(4)[p] * s) for p in range(4) for s in alphabet}
    subblocks = len(IM.codebook) == 16 and {tuple(v) for v in IM.codebook} == eq4
    table = [table1_lookup(b) for b in ([0, 0], [0, 1], [1, 0], [1, 1])] == [0, 1, 3, 2]
    mini = OfdmImConfig(n_fft=8, n_cp=2, groups=2, active=1, mod_order=4)
    bits = np.array(list(itertools.product([0, 1], repeat=mini.bits_per_block)), dtype=np.uint8)
    y = ofdm_demodulate(ofdm_modulate(im_encode(bits, mini), mini), mini)
    loopback = np.array_equal(detect_block(y, np.ones(8), mini), bits)
    verdict("Mapper/modem exactness", bijection and subblocks and table and loopback,
            f"bijection {bijection}, subblocks {subblocks}, table {table}, loopback {loopback}")


def test_se_analytics(verdict):
    def brute(ng, k, m):
        return floor(log2(comb(ng, k))) + k * int(log2(m))

    exact, near = True, True
    for g in (4, 8, 16, 32):
        ng = 128 // g
        series = [se_ratio(128, g, k, 4) for k in range(1, ng + 1)]
        exact &= series == [g * brute(ng, k, 4) / (128 * 2) for k in range(1, ng + 1)]
        exact &= series == [se_ratio(128, g, k, 4) for k in range(1, ng + 1)]
    for m in (2, 4, 16):
        for ng in range(4, 65):
            b = [brute(ng, k, m) for k in range(1, ng + 1)]
            best = [k + 1 for k, v in enumerate(b) if v == max(b)]
            near &= min(abs(k - k_opt(4 * ng, 4, m)) for k in best) <= 1
    verdict("SE analytics", exact and near, f"series exact {exact}, k_opt within 1 {near}")


def test_awgn_sanity(verdict):
    snrs = [0, 2, 4, 6, 8]
    recs = run_ber_sweep(IM, "awgn", snrs, 2000, SEED, schemes={"OFDM": OFDM})
    worst, ok = 0.0, True
    for r in recs:
        n0 = (OFDM.n_fft + OFDM.n_cp) / OFDM.n_fft / 10 ** (r.snr_db / 10)
        p = float(qfunc(math.sqrt(2 / n0)))
        z = abs(r.ber - p) / math.sqrt(p * (1 - p) / r.bits_total)
        worst = max(worst, z)
        ok &= r.bit_errors >= 100 and z < 3
    verdict("AWGN sanity", ok, f"max deviation {worst:.2f} standard errors")


def test_headline_property(verdict, ensembles):
    trials = 2000
    top = SNR_DB[-1]
    ok, parts = True, []
    for regime, ens in ensembles.items():
        err = paired_block_errors(SCHEMES, ens, [top], trials, SEED, modes=TX, subcarrier_mode="iid")
        for a, mode in enumerate(TX):
            d = err["OFDM-IM"][0, a] / IM.bits_per_block - err["OFDM"][0, a] / OFDM.bits_per_block
            u = upper95(d)
            ok &= u <= 0
            parts.append(f"{regime} m={mode}: IM {err['OFDM-IM'][0, a].sum() / (trials * IM.bits_per_block):.4f} "
                         f"OFDM {err['OFDM'][0, a].sum() / (trials * OFDM.bits_per_block):.4f} upper95 {u:.4f}")
    verdict(f"Headline property at {top} dB", ok, "; ".join(parts))


def test_union_bound(verdict, ensembles):
    trials = 2000
    ok, parts, checked = True, [], 0
    for regime, ens in ensembles.items():
        for mode in TX:
            recs = run_ber_sweep(IM, ens, SNR_DB, trials, SEED, schemes={"OFDM-IM": IM}, modes=[mode],
                                 crosstalk=False)
            bound = union_bound_ber(IM, ens, SNR_DB, mode=mode, seed=SEED)
            for r, b in zip(recs, bound):
                if r.ber < 1e-4:
                    continue
                checked += 1
                if b < r.ber - 3 * r.std_error:
                    ok = False
                    parts.append(f"{regime} m={mode} {r.snr_db:g} dB: BER {r.ber:.2e} > bound {b:.2e}")
    verdict("Union bound", ok and checked > 0, f"{checked} points checked" + ("; " + "; ".join(parts) if parts else ""))
