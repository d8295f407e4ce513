"""Command-line experiments.

Each subcommand reads an optional JSON config, applies flag overrides, runs
one experiment and writes its artifacts plus a ``<experiment>.json`` sidecar
into ``--out``. Feeding the sidecar back through ``--config`` reproduces the
run exactly.
"""
from __future__ import annotations

import argparse
import copy
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import io, rng
from .grid import LgBeamSpec, SimulationGrid, lg_field
from .linksim import capacity_cdf, default_schemes, run_ber_sweep, union_bound_ber
from .ofdm_im import OfdmImConfig, group_bits, k_opt, se_ratio
from .propagation import (AliasingError, modal_decompose, sample_ensemble, turbulent_propagate,
                          vacuum_step)
from .turbulence import REGIME_CN2, TurbulenceParams, generate_phase_screen

log = logging.getLogger("oamfso")

EXPERIMENTS = ("phase-screen", "turbulence-demo", "channel-ensemble", "capacity-cdf", "se-ratio",
               "ber-sweep", "union-bound")

DEFAULTS = {
    "experiment": None,
    "seed": 0,
    "out": "out",
    "workers": None,
    "regime": "weak",
    "grid": {"n_samples": 512, "dx": 5e-3, "wavelength": 1550e-9},
    "beam": {"w0": 0.016, "tx_modes": [1, 3], "rx_modes": list(range(-5, 6))},
    "turbulence": {"cn2": None, "inner_scale": 5e-3, "outer_scale": 20.0, "screen_count": 20,
                   "screen_spacing": 50.0},
    "ofdm": {"n_fft": 128, "n_cp": 16, "groups": 32, "active_k": 1, "mod_order": 4, "mapper": "auto"},
    "link": {"snr_db": [0, 5, 10, 15, 20, 25, 30], "trials": 20000, "subcarrier_mode": "iid",
             "crosstalk": True, "ensemble": None, "realizations": 500},
    "capacity": {"snr_db": 15.0, "mode": 1, "crosstalk": True},
    "se_ratio": {"n_fft": 128, "mod_order": 4, "groups": [4, 8, 16, 32]},
    "union_bound": {"draws": 4000, "mode": 1},
    "demo": {"mode": 1},
}


class ConfigError(ValueError):
    pass


def merge(base: dict, override: dict, where: str = "") -> dict:
    """Recursive merge that rejects keys absent from ``base``."""
    out = copy.deepcopy(base)
    for key, value in override.items():
        if key not in base:
            raise ConfigError(f"unknown config key {where + key!r}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key {where + key!r} must be a table")
            out[key] = merge(base[key], value, f"{where}{key}.")
        else:
            out[key] = value
    return out


def _set_path(cfg: dict, dotted: str, raw: str) -> dict:
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    override: dict = {}
    node = override
    parts = dotted.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value
    return merge(cfg, override)


def load_config(args: argparse.Namespace) -> dict:
    cfg = copy.deepcopy(DEFAULTS)
    if args.config:
        try:
            cfg = merge(cfg, json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    if cfg["experiment"] not in (None, args.experiment):
        raise ConfigError(f"config is for {cfg['experiment']!r}, not {args.experiment!r}")
    cfg["experiment"] = args.experiment
    for item in args.set or []:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        cfg = _set_path(cfg, key, raw)
    for flag in ("seed", "out", "workers", "regime"):
        value = getattr(args, flag)
        if value is not None:
            cfg[flag] = value
    if cfg["workers"] is None:
        cfg["workers"] = os.cpu_count() or 1
    if cfg["regime"] not in ("none", "weak", "strong"):
        raise ConfigError(f"regime must be none, weak or strong, got {cfg['regime']!r}")
    if not isinstance(cfg["seed"], int) or not 0 <= cfg["seed"] < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    return cfg


# -- builders ------------------------------------------------------------------

def build_grid(cfg) -> SimulationGrid:
    return SimulationGrid(**cfg["grid"])


def build_turbulence(cfg) -> TurbulenceParams | None:
    t = dict(cfg["turbulence"])
    if cfg["regime"] == "none":
        return None
    if t["cn2"] is None:
        t["cn2"] = REGIME_CN2[cfg["regime"]]
    return TurbulenceParams(**t)


def build_ofdm(cfg) -> OfdmImConfig:
    return OfdmImConfig.from_dict(cfg["ofdm"])


def _path_length(cfg, params) -> float:
    t = cfg["turbulence"]
    return params.path_length if params else t["screen_count"] * t["screen_spacing"]


def obtain_ensemble(cfg):
    if cfg["link"]["ensemble"]:
        return io.read_ensemble(cfg["link"]["ensemble"])
    params = build_turbulence(cfg)
    count = cfg["link"]["realizations"] if params else 1
    return sample_ensemble(cfg["beam"]["tx_modes"], cfg["beam"]["rx_modes"], params, count, cfg["seed"],
                           grid=build_grid(cfg), w0=cfg["beam"]["w0"], workers=cfg["workers"])


# -- experiments -------------------------------------------------------------

def cmd_phase_screen(cfg, out: Path) -> list[Path]:
    grid = build_grid(cfg)
    params = build_turbulence(cfg)
    if params is None:
        raise ConfigError("phase-screen needs a turbulent regime")
    screen = generate_phase_screen(grid, params, rng.stream(cfg["seed"], 0, rng.SCREEN, 0))
    io.write_screen(out / "phase_screen.oamf", screen)
    io.write_screen_csv(out / "phase_screen.csv", screen)
    return [out / "phase_screen.oamf", out / "phase_screen.csv"]


def cmd_turbulence_demo(cfg, out: Path) -> list[Path]:
    grid = build_grid(cfg)
    params = build_turbulence(cfg)
    w0, mode = cfg["beam"]["w0"], cfg["demo"]["mode"]
    z = _path_length(cfg, params)
    launched = lg_field(LgBeamSpec(0, mode, w0, 0.0), grid)
    if params is None:
        field = vacuum_step(launched, z)
    else:
        field = turbulent_propagate(launched, params, (cfg["seed"], 0))
    rx = cfg["beam"]["rx_modes"]
    purity = np.abs(modal_decompose(field, rx, w0, z)) ** 2
    io.write_field(out / "received_field.oamf", field)
    io.write_field_csv(out / "received_field.csv", field)
    io.write_rows(out / "purity.csv", ["regime", "tx_mode", "rx_mode", "power"],
                  ({"regime": cfg["regime"], "tx_mode": mode, "rx_mode": m, "power": float(p)}
                   for m, p in zip(rx, purity)))
    return [out / "received_field.oamf", out / "received_field.csv", out / "purity.csv"]


def cmd_channel_ensemble(cfg, out: Path) -> list[Path]:
    ens = obtain_ensemble(cfg)
    io.write_ensemble(out / "channels.jsonl", ens)
    return [out / "channels.jsonl"]


def cmd_capacity_cdf(cfg, out: Path) -> list[Path]:
    ens = obtain_ensemble(cfg)
    c = cfg["capacity"]
    caps, cdf = capacity_cdf(ens, c["snr_db"], c["mode"], c["crosstalk"])
    io.write_rows(out / "capacity_cdf.csv", io.CAPACITY_COLUMNS,
                  ({"regime": ens.regime, "mode": c["mode"], "snr_db": c["snr_db"],
                    "capacity_bps_hz": float(v), "cdf": float(p)} for v, p in zip(caps, cdf)))
    return [out / "capacity_cdf.csv"]


def se_ratio_rows(n_fft: int, mod_order: int, groups) -> list[dict]:
    rows = []
    for g in groups:
        ng = n_fft // g
        kopt = k_opt(n_fft, g, mod_order)
        for k in range(1, ng + 1):
            rows.append({"groups": g, "group_size": ng, "active_k": k,
                         "bits_per_group": group_bits(ng, k, mod_order),
                         "ratio": se_ratio(n_fft, g, k, mod_order), "k_opt": kopt})
    return rows


def cmd_se_ratio(cfg, out: Path) -> list[Path]:
    s = cfg["se_ratio"]
    for g in s["groups"]:
        if s["n_fft"] % g:
            raise ConfigError(f"groups={g} does not divide n_fft={s['n_fft']}")
    rows = se_ratio_rows(s["n_fft"], s["mod_order"], s["groups"])
    io.write_rows(out / "se_ratio.csv", list(rows[0]), rows)
    return [out / "se_ratio.csv"]


def cmd_ber_sweep(cfg, out: Path) -> list[Path]:
    ens = obtain_ensemble(cfg)
    link = cfg["link"]
    records = run_ber_sweep(build_ofdm(cfg), ens, link["snr_db"], link["trials"], cfg["seed"],
                            subcarrier_mode=link["subcarrier_mode"], crosstalk=link["crosstalk"],
                            regime=cfg["regime"])
    io.write_ber_csv(out / "ber.csv", records)
    return [out / "ber.csv"]


def cmd_union_bound(cfg, out: Path) -> list[Path]:
    ens = obtain_ensemble(cfg)
    link, ub = cfg["link"], cfg["union_bound"]
    rows = []
    for name, scheme in default_schemes(build_ofdm(cfg)).items():
        bounds = union_bound_ber(scheme, ens, link["snr_db"], mode=ub["mode"],
                                 subcarrier_mode=link["subcarrier_mode"], draws=ub["draws"], seed=cfg["seed"])
        rows += [{"scheme": name, "snr_db": s, "bound": float(b)} for s, b in zip(link["snr_db"], bounds)]
    io.write_rows(out / "union_bound.csv", io.UNION_BOUND_COLUMNS, rows)
    return [out / "union_bound.csv"]


COMMANDS = {
    "phase-screen": cmd_phase_screen,
    "turbulence-demo": cmd_turbulence_demo,
    "channel-ensemble": cmd_channel_ensemble,
    "capacity-cdf": cmd_capacity_cdf,
    "se-ratio": cmd_se_ratio,
    "ber-sweep": cmd_ber_sweep,
    "union-bound": cmd_union_bound,
}


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (a sidecar from an earlier run works)")
    common.add_argument("--seed", type=int, help="master seed (u64)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--workers", type=int, help="worker processes for channel sampling")
    common.add_argument("--regime", choices=("none", "weak", "strong"))
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one config entry, e.g. link.trials=2000")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="oamfso", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        written = COMMANDS[args.experiment](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (TypeError, ValueError) as exc:
        # bad parameter values surface from the dataclass validators
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except AliasingError as exc:
        print(f"numerical guard tripped: {exc}", file=sys.stderr)
        return 3
    sidecar = out / f"{args.experiment}.json"
    io.write_sidecar(sidecar, cfg)
    for path in written + [sidecar]:
        log.info("wrote %s", path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
