"""Command-line entry point: ``simulate``, ``verify`` and ``analyze``."""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import analysis as an
from .errors import ConfigError
from .harness import PRESETS, load_config, run_sweep
from .scene import gen_comm_channel, gen_orthogonal_waveform
from .verify import verify


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="uplink-isac")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte Carlo sweep")
    src = sim.add_mutually_exclusive_group()
    src.add_argument("--config", help="flat-key JSON configuration file")
    src.add_argument("--preset", choices=sorted(PRESETS))
    sim.add_argument("--sweep", help="VAR=START:STOP:STEP or VAR=v1,v2,...")
    sim.add_argument("--trials", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--out")
    sim.add_argument("--format", choices=("csv", "json"))
    sim.add_argument("--schemes", help="comma list of sic,projection,joint_ml,genie")
    sim.add_argument("--detector", choices=("exhaustive", "sdr"))
    sim.add_argument("--threads", type=int)
    sim.add_argument("-v", "--verbose", action="store_true")

    ver = sub.add_parser("verify", help="run the invariant suite")
    ver.add_argument("--seed", type=int, default=0)

    ana = sub.add_parser("analyze", help="print CRB and rates for a system")
    ana.add_argument("--config")
    ana.add_argument("--seed", type=int, default=0)
    ana.add_argument("--channels", type=int, default=200,
                     help="seeded channel draws the ergodic rates average over")
    return p


def _simulate(args) -> int:
    overrides = {k: getattr(args, k) for k in
                 ("sweep", "trials", "seed", "out", "format", "schemes", "detector")}
    if args.preset:
        base = dict(PRESETS[args.preset])
        base.update({k: v for k, v in overrides.items() if v is not None})
        overrides = base
    exp = load_config(args.config, overrides)
    if not exp.output_path:
        raise ConfigError("no output path: pass --out or set 'out' in the config")
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    records = run_sweep(exp, threads=args.threads)
    print(f"wrote {len(records)} records to {exp.output_path}")
    return 0


def _analyze(args) -> int:
    cfg = load_config(args.config).system
    rng = np.random.default_rng(args.seed)
    X_r = gen_orthogonal_waveform(cfg.M_t, cfg.L, cfg.P_r)
    R = X_r @ X_r.conj().T / cfg.L
    print(f"system: M_t={cfg.M_t} M_r={cfg.M_r} N_t={cfg.N_t} L={cfg.L} "
          f"P_c={cfg.P_c:g} P_r={cfg.P_r:g} sigma2={cfg.sigma2:g}")
    print(f"CRB(h_r), orthogonal waveform : {an.crb_target_response(R, cfg.sigma2, cfg.M_r, cfg.L):.6g}")
    print(f"CRB(h_r), closed form         : {an.crb_orthogonal(cfg):.6g}")
    sinr = an.sinr_sic_theory(cfg)
    print(f"SNR_P (projection)            : {an.snr_projected_theory(cfg):.6g}")
    print(f"SINR_SIC                      : {sinr:.6g}")
    reps = [an.ergodic_rates(gen_comm_channel(rng, cfg.M_r, cfg.N_t), cfg, sinr)
            for _ in range(args.channels)]
    print(f"{'rate [bit/s/Hz]':<20}{'mean':>12}")
    for name in ("rate_comm_only", "rate_sic", "rate_projection"):
        print(f"{name:<20}{np.mean([getattr(r, name) for r in reps]):>12.6f}")
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return _simulate(args)
        if args.command == "verify":
            report = verify(args.seed)
            print(report.format())
            return 0 if report.passed else 1
        return _analyze(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
