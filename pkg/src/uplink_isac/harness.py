"""Seeded Monte Carlo sweeps and result files.

Every trial draws from its own generator seeded by
``SeedSequence(master_seed, spawn_key=(sweep_index, trial_index))``, so the
numbers do not depend on how trials are scheduled across threads.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis as an
from . import linalg as la
from .errors import ConfigError, InvalidArgumentError
from .receivers import (ENUMERATION_BUDGET, Method, Strategy,
                        run_genie_receiver, run_projection_receiver,
                        run_sic_receiver, exhaustive_joint_ml)
from .scene import (SystemConfig, complex_noise, gen_orthogonal_waveform,
                    gen_scene, gen_symbols, radar_operators, stack_model,
                    synthesize_block)
from .sdr import SDROptions

log = logging.getLogger(__name__)

THREADS_ENV = "UPLINK_ISAC_THREADS"
SWEEP_VARS = ("L", "P_r_dB", "M_r")
CSV_COLUMNS = ("sweep_var", "sweep_value", "scheme", "metric", "mean",
               "std_err", "trials", "master_seed")


@dataclass(frozen=True)
class Sweep:
    var: str
    values: tuple

    def __post_init__(self):
        if self.var not in SWEEP_VARS:
            raise ConfigError(f"sweep variable must be one of {SWEEP_VARS}, "
                              f"got {self.var!r}")
        if len(self.values) == 0:
            raise ConfigError("sweep range is empty")

    @classmethod
    def parse(cls, text: str) -> "Sweep":
        """``VAR=START:STOP:STEP`` (stop inclusive) or ``VAR=v1,v2,...``."""
        try:
            var, spec = text.split("=", 1)
            if ":" in spec:
                start, stop, step = (float(s) for s in spec.split(":"))
                if step == 0 or (stop - start) * step < 0:
                    raise ConfigError(f"empty sweep range {spec!r}")
                count = int(math.floor((stop - start) / step + 1e-9)) + 1
                values = [start + i * step for i in range(count)]
            else:
                values = [float(v) for v in spec.split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"cannot parse sweep {text!r}: {exc}") from None
        var = var.strip()
        if var in ("L", "M_r"):
            values = [int(round(v)) for v in values]
        return cls(var, tuple(values))

    def apply(self, system: SystemConfig, value) -> SystemConfig:
        if self.var == "P_r_dB":
            return system.replace(P_r=10.0 ** (value / 10.0))
        return system.replace(**{self.var: int(value)})


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemConfig = field(default_factory=SystemConfig)
    sweep: Sweep = field(default_factory=lambda: Sweep("L", (20,)))
    trials: int = 100
    master_seed: int = 0
    schemes: tuple = (Method.SIC, Method.PROJECTION)
    detector_strategy: Strategy = Strategy.SDR
    output_path: str | None = None
    output_format: str = "csv"
    # "mean_ratio" averages per-trial NMSE, "ratio_of_means" divides totals.
    nmse_aggregation: str = "mean_ratio"
    sdr: SDROptions = field(default_factory=SDROptions)

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ConfigError("master_seed must be a 64-bit unsigned integer")
        if self.output_format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.nmse_aggregation not in ("mean_ratio", "ratio_of_means"):
            raise ConfigError("unknown nmse_aggregation")
        object.__setattr__(self, "schemes",
                           tuple(Method(s) for s in self.schemes))
        object.__setattr__(self, "detector_strategy",
                           Strategy(self.detector_strategy))
        if not self.schemes:
            raise ConfigError("no schemes selected")
        points = self.points()
        needs_enum = (Method.JOINT_ML in self.schemes
                      or (Method.PROJECTION in self.schemes
                          and self.detector_strategy is Strategy.EXHAUSTIVE))
        if needs_enum:
            for _, cfg in points:
                n = cfg.L * cfg.N_t
                if cfg.alphabet.size ** n > ENUMERATION_BUDGET:
                    raise ConfigError(
                        f"exhaustive search over {cfg.alphabet.size}^{n} "
                        f"candidates (L={cfg.L}, N_t={cfg.N_t}) exceeds the "
                        f"budget of {ENUMERATION_BUDGET}")

    def points(self):
        """``(value, SystemConfig)`` per sweep point; validates each point."""
        try:
            return [(v, self.sweep.apply(self.system, v))
                    for v in self.sweep.values]
        except InvalidArgumentError as exc:
            raise ConfigError(f"invalid sweep point: {exc}") from None


# --------------------------------------------------------------------------
# configuration files

_SYSTEM_KEYS = {f.name for f in dataclasses.fields(SystemConfig)}
_SDR_KEYS = {f.name for f in dataclasses.fields(SDROptions)}


def config_from_flat(flat: dict) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from flat dotted keys.

    Keys: ``system.<field>``, ``sdr.<field>``, ``sweep`` (string form of
    :meth:`Sweep.parse`), ``trials``, ``seed``, ``out``, ``format``,
    ``schemes`` (comma list or JSON list), ``detector``, ``nmse_aggregation``.
    """
    system, sdr, top = {}, {}, {}
    for key, value in flat.items():
        head, _, rest = key.partition(".")
        if head == "system" and rest in _SYSTEM_KEYS:
            system[rest] = value
        elif head == "sdr" and rest in _SDR_KEYS:
            sdr[rest] = value
        elif key in ("sweep", "trials", "seed", "out", "format", "schemes",
                     "detector", "nmse_aggregation"):
            top[key] = value
        else:
            raise ConfigError(f"unknown configuration key {key!r}")
    try:
        sys_cfg = SystemConfig(**system)
    except (TypeError, InvalidArgumentError) as exc:
        raise ConfigError(f"invalid system configuration: {exc}") from None
    schemes = top.get("schemes", "sic,projection")
    if isinstance(schemes, str):
        schemes = [s.strip() for s in schemes.split(",") if s.strip()]
    sweep = top.get("sweep", f"L={sys_cfg.L}")
    try:
        return ExperimentConfig(
            system=sys_cfg,
            sweep=sweep if isinstance(sweep, Sweep) else Sweep.parse(sweep),
            trials=int(top.get("trials", 100)),
            master_seed=int(top.get("seed", 0)),
            schemes=tuple(schemes),
            detector_strategy=top.get("detector", "sdr"),
            output_path=top.get("out"),
            output_format=top.get("format", "csv"),
            nmse_aggregation=top.get("nmse_aggregation", "mean_ratio"),
            sdr=SDROptions(**sdr),
        )
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    """Read a flat-key JSON file; ``overrides`` win over file values."""
    flat = {}
    if path is not None:
        try:
            flat = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path} is not valid JSON: {exc}") from None
        if not isinstance(flat, dict):
            raise ConfigError(f"{path} must hold a JSON object")
    flat.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return config_from_flat(flat)


PRESETS = {
    # BER and rate versus the number of snapshots.
    "fig2": {"system.M_r": 8, "sweep": "L=8,16,28,40", "trials": 500},
    "fig2_mr12": {"system.M_r": 12, "sweep": "L=8,16,28,40", "trials": 500},
    # Communication and sensing performance versus radar power.
    "fig3": {"system.M_r": 8, "system.L": 20, "sweep": "P_r_dB=-10:2:6",
             "trials": 500, "schemes": "sic,projection,genie"},
}


def preset(name: str, **overrides) -> ExperimentConfig:
    flat = dict(PRESETS[name])
    flat.update(overrides)
    return config_from_flat(flat)


# --------------------------------------------------------------------------
# trials


def trial_rng(master_seed: int, sweep_index: int, trial_index: int):
    ss = np.random.SeedSequence(master_seed, spawn_key=(sweep_index, trial_index))
    return np.random.default_rng(ss)


def run_trial(exp: ExperimentConfig, cfg: SystemConfig, radar, X_r,
              rng: np.random.Generator) -> dict:
    """One block: returns per-scheme metrics plus the power bookkeeping."""
    scene = gen_scene(rng, cfg, X_r)
    X_c = gen_symbols(rng, cfg)
    N = complex_noise(rng, (cfg.M_r, cfg.L), cfg.sigma2)
    Y = synthesize_block(scene, X_c, None, 0.0) + N
    model = stack_model(scene, Y, radar)
    x, h, n = la.vec(X_c), la.vec(scene.H_r), la.vec(N)
    h_energy = float(np.sum(np.abs(h) ** 2))

    sinr = an.sinr_sic_conditional(scene.H_c, scene.H_r, X_r, cfg)
    rates = an.ergodic_rates(scene.H_c, cfg, sinr)
    scheme_rate = {Method.SIC: rates.rate_sic,
                   Method.PROJECTION: rates.rate_projection,
                   Method.JOINT_ML: rates.rate_projection,
                   Method.GENIE: rates.rate_comm_only}
    out = {
        "powers": (float(np.sum(np.abs(model.G @ x) ** 2)),
                   float(np.sum(np.abs(model.Gamma @ n) ** 2)),
                   float(np.sum(np.abs(model.A_c @ x) ** 2)),
                   float(np.sum(np.abs(model.A_r @ h) ** 2)),
                   float(np.sum(np.abs(n) ** 2))),
        "h_energy": h_energy,
        "crb": an.crb_target_response(scene.R, cfg.sigma2, cfg.M_r, cfg.L),
    }
    det_rng = np.random.default_rng(rng.integers(0, 2 ** 63))
    for scheme in exp.schemes:
        if scheme is Method.SIC:
            res = run_sic_receiver(model, cfg, det_rng, exp.sdr)
        elif scheme is Method.PROJECTION:
            res = run_projection_receiver(model, cfg, exp.detector_strategy,
                                          det_rng, exp.sdr)
        elif scheme is Method.JOINT_ML:
            res = exhaustive_joint_ml(model, cfg)
        else:
            res = run_genie_receiver(model, x)
        out[scheme] = {
            "ber": an.ber(x, res.x_hat, cfg),
            "bler": an.bler(x, res.x_hat, x.size),
            "err": float(np.sum(np.abs(res.h_hat - h) ** 2)),
            "rate": scheme_rate[scheme],
        }
    return out


def _thread_count(threads: int | None) -> int:
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        threads = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(threads))


def _aggregate(exp: ExperimentConfig, value, trials: list) -> list:
    powers = an.RatioAccumulator()
    sinr = an.RatioAccumulator()
    for t in trials:
        g, gn, c, r, nn = t["powers"]
        powers.add(g, gn)
        sinr.add(c, r + nn)
    crb = an.MeanAccumulator()
    for t in trials:
        crb.add(t["crb"] / t["h_energy"])
    records = []
    for scheme in exp.schemes:
        acc = {m: an.MeanAccumulator() for m in ("ber", "bler", "nmse", "rate")}
        nmse_ratio = an.RatioAccumulator()
        for t in trials:
            s = t[scheme]
            acc["ber"].add(s["ber"])
            acc["bler"].add(s["bler"])
            acc["rate"].add(s["rate"])
            acc["nmse"].add(s["err"] / t["h_energy"])
            nmse_ratio.add(s["err"], t["h_energy"])
        nm = acc["nmse"] if exp.nmse_aggregation == "mean_ratio" else nmse_ratio
        records.append(an.MetricsRecord(
            sweep_var=exp.sweep.var, sweep_value=value, scheme=scheme.value,
            ber=acc["ber"].mean, bler=acc["bler"].mean, nmse=nm.mean,
            crb=crb.mean, rate=acc["rate"].mean,
            snr_proj_empirical=powers.mean, sinr_sic_empirical=sinr.mean,
            trials=len(trials), seed=exp.master_seed,
            std_err={"ber": acc["ber"].std_err, "bler": acc["bler"].std_err,
                     "nmse": nm.std_err, "crb": crb.std_err,
                     "rate": acc["rate"].std_err,
                     "snr_proj_empirical": powers.std_err,
                     "sinr_sic_empirical": sinr.std_err}))
    return records


def run_sweep(exp: ExperimentConfig, threads: int | None = None) -> list:
    """Run every sweep point and return one MetricsRecord per (point, scheme)."""
    records = []
    n_threads = _thread_count(threads)
    for si, (value, cfg) in enumerate(exp.points()):
        X_r = gen_orthogonal_waveform(cfg.M_t, cfg.L, cfg.P_r)
        radar = radar_operators(X_r, cfg.M_r)

        def one(ti, cfg=cfg, radar=radar, X_r=X_r, si=si):
            return run_trial(exp, cfg, radar, X_r,
                             trial_rng(exp.master_seed, si, ti))

        if n_threads == 1:
            trials = [one(ti) for ti in range(exp.trials)]
        else:
            with ThreadPoolExecutor(n_threads) as pool:
                trials = list(pool.map(one, range(exp.trials)))
        log.info("%s=%s: %d trials done", exp.sweep.var, value, exp.trials)
        records.extend(_aggregate(exp, value, trials))
    if exp.output_path:
        emit_results(records, exp.output_path, exp.output_format)
    return records


# --------------------------------------------------------------------------
# output


def _num(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        raise InvalidArgumentError("boolean is not a numeric field")
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def result_rows(records) -> list:
    rows = []
    for r in records:
        for m in an.METRICS:
            rows.append({"sweep_var": r.sweep_var, "sweep_value": r.sweep_value,
                         "scheme": r.scheme, "metric": m,
                         "mean": getattr(r, m), "std_err": r.std_err.get(m, 0.0),
                         "trials": r.trials, "master_seed": r.seed})
    return rows


def _csv_field(v) -> str:
    return v if isinstance(v, str) else _num(v)


def emit_results(records, path, fmt: str = "csv") -> None:
    """Write one row per (sweep point, scheme, metric) as CSV or JSON."""
    if not records:
        raise InvalidArgumentError("no records to write")
    rows = result_rows(records)
    if fmt == "csv":
        lines = [",".join(CSV_COLUMNS)]
        lines += [",".join(_csv_field(row[c]) for c in CSV_COLUMNS) for row in rows]
        text = "\n".join(lines) + "\n"
    elif fmt == "json":
        objs = ["{" + ", ".join(
            f"{json.dumps(c)}: "
            + (json.dumps(row[c]) if isinstance(row[c], str) else _num(row[c]))
            for c in CSV_COLUMNS) + "}" for row in rows]
        text = "[\n  " + ",\n  ".join(objs) + "\n]\n"
    else:
        raise InvalidArgumentError(f"unknown format {fmt!r}")
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
