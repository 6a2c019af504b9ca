"""Command-line runner: ``stno-reservoir {simulate,digits,sinesquare,sweep,validate}``.

Precedence is flag > config file > built-in default. The config path comes
from ``--config`` or, failing that, ``$STNO_RESERVOIR_CONFIG``. Every file
written carries the config hash, the seeds and the package version in its
``#`` header.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .audio import load_corpus
from .checks import all_checks
from .config import (CONFIG_ENV, FRONTEND_NAMES, MODE_NAMES, ConfigError, ExperimentConfig,
                     config_hash, dump_config, load_config)
from .encoder import encode_drive, make_mask
from .io import read_drive, write_matrix, write_table, write_trace
from .oscillator import DriveWaveform, simulate_envelope, steady_state_amplitude
from .sweep import (BiasGrid, SweepSetup, cell_maps, fom_performance_correlation, run_sweep,
                    threshold_contour)
from .tasks import (DigitSetup, compute_features, compute_states, corpus_slots,
                    enumerate_splits, evaluate_plan, generate_sine_square, select_mask,
                    sine_square_trial,
                    synth_digit_corpus)

log = logging.getLogger("stno_reservoir")


def _meta(cfg: ExperimentConfig, **extra) -> dict:
    seeds = ",".join(f"{k}={v}" for k, v in dataclasses.asdict(cfg.seeds).items())
    return {"config_hash": config_hash(cfg), "seeds": seeds, **extra}


def _out(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.paths.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ------------------------------------------------------------------ commands

def sinesquare_mask(cfg: ExperimentConfig):
    """The sine/square mask chosen on training data at the configured bias."""
    ss = cfg.sinesquare
    seq = generate_sine_square(cfg.seeds.labels, ss.n_waveforms)
    seeds = range(cfg.seeds.mask, cfg.seeds.mask + ss.mask_candidates)
    mask, scores = select_mask(ss.bias, cfg.oscillator, ss.encoding, seq, seeds, ss.alphabet,
                               cfg.seeds.noise, ss.target_shift)
    log.info("mask candidates %s -> training rms %s; chose seed %d",
             list(seeds), [round(s, 4) for s in scores], mask.seed)
    return seq, mask


def simulate_probe(cfg: ExperimentConfig) -> DriveWaveform:
    sim = cfg.simulate
    n = int(round(sim.duration / sim.dt))
    if sim.probe == "constant":
        return DriveWaveform(np.zeros(n), sim.dt)
    if sim.probe == "step":
        drive = np.zeros(n)
        drive[int(round(sim.step_at / sim.dt)):] = sim.step_size
        return DriveWaveform(drive, sim.dt)
    # "mask": the masked sine/square drive
    ss = cfg.sinesquare
    enc = dataclasses.replace(ss.encoding, samples_per_theta=max(1, int(round(ss.encoding.theta / sim.dt))))
    seq, mask = sinesquare_mask(cfg)
    return encode_drive(seq.points[None, :], mask, enc)


def cmd_simulate(cfg: ExperimentConfig, args) -> int:
    if args.drive:
        samples, dt = read_drive(args.drive)
        drive = DriveWaveform(samples, dt)
        probe = f"file:{args.drive}"
    else:
        drive = simulate_probe(cfg)
        probe = cfg.simulate.probe
    bias = cfg.simulate.bias
    trace = simulate_envelope(drive, bias, cfg.oscillator, cfg.seeds.noise)
    path = write_trace(_out(cfg) / "envelope.csv", trace,
                       _meta(cfg, probe=probe, bias=f"{bias.i_dc} mA {bias.field} mT"))
    print(f"wrote {path} ({len(trace)} samples, steady state "
          f"{steady_state_amplitude(bias, cfg.oscillator):.4f} mV)")
    return 0


def load_digit_corpus(cfg: ExperimentConfig):
    if cfg.paths.corpus_root:
        return load_corpus(cfg.paths.corpus_root, cfg.paths.manifest,
                           sample_rate=cfg.digits.sample_rate)
    return synth_digit_corpus(cfg.seeds.corpus, sample_rate=cfg.digits.sample_rate)


def cmd_digits(cfg: ExperimentConfig, args) -> int:
    dg = cfg.digits
    corpus = load_digit_corpus(cfg)
    slots = corpus_slots(corpus)
    labels = np.array([s.label for s in corpus])
    frontends = [args.frontend] if args.frontend else list(dg.frontends)
    modes = [args.mode] if args.mode else list(dg.modes)
    out = _out(cfg)
    curve_rows, detail_rows = [], []
    for fe in frontends:
        features = compute_features(corpus, fe, args.jobs)
        mask = make_mask(features[0].n_channels, dg.encoding.n_theta, dg.alphabet, cfg.seeds.mask)
        for mode in modes:
            setup = DigitSetup(dg.bias, cfg.oscillator, dg.encoding, mask, mode, cfg.seeds.noise)
            states = compute_states(features, corpus, setup, args.jobs)
            for n_train in dg.n_train:
                rep = evaluate_plan(states, labels, slots, enumerate_splits(n_train))
                curve_rows.append([fe, mode, n_train, len(rep.detail),
                                   rep.word_success_rate, rep.wsr_std])
                detail_rows += [[fe, mode, n_train, "-".join(str(i) for i in d["combination"]),
                                 d["wsr"]] for d in rep.detail]
                detail_rows.append([fe, mode, n_train, "mean", rep.word_success_rate])
                detail_rows.append([fe, mode, n_train, "std", rep.wsr_std])
                write_matrix(out / f"confusion_{fe}_{mode}_n{n_train}.csv", range(10), range(10),
                             rep.confusion, "true\\predicted", _meta(cfg, frontend=fe, mode=mode))
                print(f"{fe:12s} {mode:10s} N={n_train}  WSR {100 * rep.word_success_rate:6.2f} "
                      f"+- {100 * rep.wsr_std:5.2f} %  ({len(rep.detail)} combinations)")
    meta = _meta(cfg, corpus=cfg.paths.corpus_root or f"synthetic(seed={cfg.seeds.corpus})")
    write_table(out / "digits_curves.csv",
                ["frontend", "mode", "n_train", "n_combinations", "wsr_mean", "wsr_std"],
                curve_rows, meta)
    write_table(out / "digits_combinations.csv",
                ["frontend", "mode", "n_train", "combination", "wsr"], detail_rows, meta)
    return 0


def cmd_sinesquare(cfg: ExperimentConfig, args) -> int:
    ss = cfg.sinesquare
    seq, mask = sinesquare_mask(cfg)
    rows = []
    for k in range(ss.n_noise_seeds):
        seed = cfg.seeds.noise + k
        rep, _ = sine_square_trial(ss.bias, cfg.oscillator, ss.encoding, seq, mask, seed,
                                   ss.target_shift)
        rows.append([seed, rep.rms_deviation, rep.errors, rep.detail[0]["n_test"],
                     rep.detail[0]["target_shift"]])
        print(f"noise seed {seed}: rms {rep.rms_deviation:.4f}  errors {rep.errors}/"
              f"{rep.detail[0]['n_test']}")
    rms = np.array([r[1] for r in rows])
    rows.append(["mean", rms.mean(), sum(r[2] for r in rows), "", ""])
    rows.append(["std", rms.std(ddof=1) if rms.size > 1 else 0.0, "", "", ""])
    bias = ss.bias
    write_table(_out(cfg) / "sinesquare.csv",
                ["noise_seed", "rms", "errors", "n_test", "target_shift"], rows,
                _meta(cfg, bias=f"{bias.i_dc} mA {bias.field} mT", mask_seed=mask.seed))
    return 0


def cmd_sweep(cfg: ExperimentConfig, args) -> int:
    sw, ss = cfg.sweep, cfg.sinesquare
    grid = BiasGrid(sw.currents.values(), sw.fields.values())
    _, mask = sinesquare_mask(cfg)
    setup = SweepSetup(cfg.oscillator, ss.encoding, mask.seed, cfg.seeds.labels,
                       cfg.seeds.noise, ss.n_waveforms, ss.alphabet, sw.noise_duration,
                       sw.noise_dt)
    cells = run_sweep(grid, setup, args.jobs)
    maps = cell_maps(cells, grid)
    out = _out(cfg)
    meta = _meta(cfg, mask_seed=mask.seed)
    corner = "field_mT\\current_mA"
    for name, key in [("rms", "rms"), ("v_up_x_v_dw", "fom_amp"),
                      ("inv_delta_v", "fom_noise"), ("fom_total", "fom_total")]:
        write_matrix(out / f"sweep_{name}.csv", grid.fields, grid.currents, maps[key], corner, meta)
    write_table(out / "sweep_threshold.csv", ["field_mT", "i_th_mA"],
                zip(grid.fields, threshold_contour(grid, cfg.oscillator)), meta)
    write_table(out / "sweep_cells.csv",
                ["i_dc_mA", "field_mT", "v_up_mV", "v_dw_mV", "delta_v_mV", "rms", "errors",
                 "fom_amp", "fom_noise", "fom_total"],
                [[c.bias.i_dc, c.bias.field, c.v_up, c.v_dw, c.delta_v, c.rms, c.errors,
                  c.fom_amp, c.fom_noise, c.fom_total] for c in cells], meta)
    rho = fom_performance_correlation(cells)
    best = min(cells, key=lambda c: c.rms)
    print(f"{len(cells)} cells; Spearman(fom_total, 1 - rms) = {rho:.3f}; best rms "
          f"{best.rms:.4f} at {best.bias.i_dc:g} mA, {best.bias.field:g} mT")
    return 0


def cmd_validate(cfg: ExperimentConfig, args) -> int:
    checks = all_checks(cfg.oscillator)
    for c in checks:
        print(c.line())
    return 0 if all(c.passed for c in checks) else 1


COMMANDS = {"simulate": cmd_simulate, "digits": cmd_digits, "sinesquare": cmd_sinesquare,
            "sweep": cmd_sweep, "validate": cmd_validate}


# ---------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help=f"YAML config (default: ${CONFIG_ENV}, else built-in defaults)")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--seed", type=int, help="master seed overriding every named seed")
    common.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    common.add_argument("--mode", choices=MODE_NAMES)
    common.add_argument("--frontend", choices=FRONTEND_NAMES)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="stno-reservoir", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common], help=COMMANDS[name].__name__[4:])
        if name == "simulate":
            sp.add_argument("--drive", metavar="FILE", help="t_ns,i_mA drive file instead of the probe")
        if name != "validate":
            sp.add_argument("--dump-config", action="store_true",
                            help="print the effective config and exit")
    return p


def resolve_config(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    if args.out:
        cfg = dataclasses.replace(cfg, paths=dataclasses.replace(cfg.paths, out_dir=args.out))
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return 2
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if getattr(args, "dump_config", False):
        print(dump_config(cfg), end="")
        return 0
    try:
        return COMMANDS[args.command](cfg, args)
    except (ValueError, OSError) as exc:
        log.debug("command failed", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
