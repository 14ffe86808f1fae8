"""Experiment harness: configuration, Monte Carlo sweeps, baselines, CSV, CLI.

Experiments
    convergence    per-round secrecy-rate trace of the alternating optimizer
    power_sweep    average secrecy rate versus transmit power (dBm grid)
    element_sweep  average secrecy rate versus per-surface element count

Schemes
    ao-multi-irs   full alternating optimization on the multi-surface layout
    single-irs     alternating optimization on one consolidated surface at the
                   last listed position, carrying the total element count
    mrt            matched filter over untuned surfaces, eavesdropper ignored
    random-bf      random full-power beamformer and random phases

Determinism: the per-trial stream is derived counter-style from the master
seed, SeedSequence([master, trial, tag]) with tag 0 for channel synthesis
(shared by every scheme, so paired comparisons see the same fading) and
100 + scheme id for scheme-local randomness. Reordering or parallelizing
trials never changes any output byte. The runtime_ms column is 0.0 unless
timing is requested, since wall-clock values would break byte-level
reproducibility.
"""

import argparse
import csv
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .ao import ao_solve
from .channel_gen import gen_channels
from .model import (ChannelSet, SolutionState, SystemConfig, dbm_to_watt,
                    effective_channels, secrecy_rate)

__all__ = [
    "ExperimentRecord",
    "SCHEMES",
    "load_config",
    "default_sweeps",
    "mrt_baseline",
    "random_baseline",
    "consolidate_single_irs",
    "single_irs_baseline",
    "run_experiment",
    "write_csv",
    "main",
]

log = logging.getLogger(__name__)

CSV_HEADER = ["trial", "scheme", "sweep_name", "sweep_value",
              "secrecy_rate", "rounds", "runtime_ms", "seed"]

SCHEMES = ("ao-multi-irs", "single-irs", "mrt", "random-bf")
_SCHEME_IDS = {name: i for i, name in enumerate(SCHEMES)}

EXPERIMENTS = ("convergence", "power_sweep", "element_sweep")


@dataclass(frozen=True)
class ExperimentRecord:
    """One CSV row: a single trial of a single scheme at one sweep point."""

    trial: int
    scheme: str
    sweep_name: str
    sweep_value: float
    secrecy_rate: float
    rounds: int
    runtime_ms: float
    seed: int


def default_sweeps() -> dict:
    return {
        "power_sweep_dbm": [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0],
        "element_sweep": [4, 8, 16, 32, 64],
    }


def load_config(path: str | None):
    """Build (SystemConfig, sweeps) from a JSON file; missing keys keep the
    built-in defaults. Power-like entries are given in dBm in the file and
    converted to watts here, at the boundary."""
    raw = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    kwargs = {}
    for key in ("n_tx", "n_refl", "n_irs", "pathloss_exponent", "pathloss_ref_db",
                "paths_ap_irs", "paths_irs_user", "paths_irs_eve", "seed",
                "ap_position", "irs_positions", "user_position", "eve_position"):
        if key in raw:
            kwargs[key] = raw[key]
    if "noise_user_dbm" in raw:
        kwargs["noise_user"] = dbm_to_watt(raw["noise_user_dbm"])
    if "noise_eve_dbm" in raw:
        kwargs["noise_eve"] = dbm_to_watt(raw["noise_eve_dbm"])
    if "power_dbm" in raw:
        kwargs["power_budget"] = dbm_to_watt(raw["power_dbm"])
    cfg = SystemConfig(**kwargs)
    sweeps = default_sweeps()
    for key in sweeps:
        if key in raw:
            sweeps[key] = list(raw[key])
    return cfg, sweeps


def mrt_baseline(ch: ChannelSet, cfg: SystemConfig) -> SolutionState:
    """Matched-filter baseline: maximize the user rate, ignore the
    eavesdropper.

    All surfaces on with a neutral (uniform) phase configuration; the
    beamformer is the full-power matched filter to the resulting effective
    user channel. The surfaces are deliberately not tuned: this baseline
    captures transmit-side-only optimization.
    """
    ones = np.ones(cfg.n_irs * cfg.n_refl, dtype=complex)
    x = np.ones(cfg.n_irs, dtype=int)
    stub = SolutionState(beamformer=np.zeros(cfg.n_tx, dtype=complex),
                         phases=ones, onoff=x)
    a = effective_channels(ch, stub).eff_user
    norm_a = np.linalg.norm(a)
    if norm_a == 0.0:
        w = np.zeros(cfg.n_tx, dtype=complex)
        w[0] = np.sqrt(cfg.power_budget)
    else:
        w = np.sqrt(cfg.power_budget) * a / norm_a
    return SolutionState(beamformer=w, phases=ones, onoff=x)


def random_baseline(ch: ChannelSet, cfg: SystemConfig,
                    rng: np.random.Generator) -> SolutionState:
    """All surfaces on, random unit-modulus phases, random full-power
    beamformer."""
    n_tx = cfg.n_tx
    v = rng.standard_normal(n_tx) + 1j * rng.standard_normal(n_tx)
    w = np.sqrt(cfg.power_budget) * v / np.linalg.norm(v)
    angles = rng.uniform(0.0, 2.0 * np.pi, size=cfg.n_irs * cfg.n_refl)
    return SolutionState(beamformer=w, phases=np.exp(1j * angles),
                         onoff=np.ones(cfg.n_irs, dtype=int))


def consolidate_single_irs(cfg: SystemConfig) -> SystemConfig:
    """Single-surface comparison geometry: one surface at the last listed
    position carrying the total element count n_irs * n_refl."""
    return replace(cfg,
                   n_irs=1,
                   n_refl=cfg.n_irs * cfg.n_refl,
                   irs_positions=cfg.irs_positions[-1:].copy())


def single_irs_baseline(ch: ChannelSet, cfg: SystemConfig,
                        beamformer: str = "sca") -> SolutionState:
    """Full alternating optimization on a consolidated single-surface
    geometry (cfg and ch must already describe it)."""
    sol, _ = ao_solve(ch, cfg, beamformer=beamformer)
    return sol


def _trial_base_seed(master_seed: int, trial: int) -> int:
    return int(np.random.SeedSequence([master_seed, trial]).generate_state(1)[0])


def _stream(master_seed: int, trial: int, tag: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([master_seed, trial, tag]))


def _run_scheme(scheme, cfg, master_seed, trial, beamformer):
    """Solve one scheme on freshly derived per-trial channels; returns
    (secrecy_rate, rounds)."""
    if scheme == "single-irs":
        cfg_single = consolidate_single_irs(cfg)
        ch = gen_channels(cfg_single, _stream(master_seed, trial, 0))
        sol, trace = ao_solve(ch, cfg_single, beamformer=beamformer)
        return float(trace[-1]), len(trace) - 1

    ch = gen_channels(cfg, _stream(master_seed, trial, 0))
    if scheme == "ao-multi-irs":
        sol, trace = ao_solve(ch, cfg, beamformer=beamformer)
        return float(trace[-1]), len(trace) - 1
    if scheme == "mrt":
        sol = mrt_baseline(ch, cfg)
        return secrecy_rate(ch, sol, cfg), 0
    if scheme == "random-bf":
        rng = _stream(master_seed, trial, 100 + _SCHEME_IDS[scheme])
        sol = random_baseline(ch, cfg, rng)
        return secrecy_rate(ch, sol, cfg), 0
    raise ValueError(f"unknown scheme {scheme!r}")


def _sweep_task(args):
    """One (sweep point, trial) unit of work; top level so it pickles."""
    cfg, schemes, sweep_name, sweep_value, trial, master_seed, beamformer, timing = args
    records = []
    base_seed = _trial_base_seed(master_seed, trial)
    for scheme in schemes:
        start = time.perf_counter()
        rate, rounds = _run_scheme(scheme, cfg, master_seed, trial, beamformer)
        elapsed = (time.perf_counter() - start) * 1000.0
        records.append(ExperimentRecord(
            trial=trial, scheme=scheme, sweep_name=sweep_name,
            sweep_value=sweep_value, secrecy_rate=rate, rounds=rounds,
            runtime_ms=elapsed if timing else 0.0, seed=base_seed))
    return records


def _convergence_task(args):
    cfg, trial, master_seed, beamformer, timing = args
    ch = gen_channels(cfg, _stream(master_seed, trial, 0))
    start = time.perf_counter()
    _, trace = ao_solve(ch, cfg, beamformer=beamformer)
    elapsed = (time.perf_counter() - start) * 1000.0
    base_seed = _trial_base_seed(master_seed, trial)
    rounds = len(trace) - 1
    return [ExperimentRecord(
        trial=trial, scheme="ao-multi-irs", sweep_name="round",
        sweep_value=float(k), secrecy_rate=float(trace[k]), rounds=rounds,
        runtime_ms=elapsed if timing else 0.0, seed=base_seed)
        for k in range(len(trace))]


def run_experiment(cfg: SystemConfig, experiment: str, trials: int,
                   out_path: str | None = None, sweeps: dict | None = None,
                   master_seed: int | None = None, beamformer: str = "sca",
                   schemes=None, workers: int = 1, timing: bool = False):
    """Run one experiment and optionally write the CSV; returns the records.

    Results are a pure function of (cfg, experiment, trials, sweeps,
    master_seed, beamformer, schemes): identical inputs give byte-identical
    CSVs at any worker count (with timing off). The convergence experiment
    always traces the alternating optimizer; the baselines are one-shot and
    have no trace to record.
    """
    if experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {experiment!r}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    sweeps = {**default_sweeps(), **(sweeps or {})}
    master_seed = cfg.seed if master_seed is None else int(master_seed)
    schemes = tuple(schemes) if schemes else (
        ("ao-multi-irs",) if experiment == "convergence" else SCHEMES)
    for scheme in schemes:
        if scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {scheme!r}")

    if experiment == "convergence":
        task_fn = _convergence_task
        tasks = [(cfg, t, master_seed, beamformer, timing) for t in range(trials)]
    elif experiment == "power_sweep":
        task_fn = _sweep_task
        tasks = [(replace(cfg, power_budget=dbm_to_watt(p)), schemes,
                  "power_dbm", float(p), t, master_seed, beamformer, timing)
                 for p in sweeps["power_sweep_dbm"] for t in range(trials)]
    else:
        task_fn = _sweep_task
        tasks = [(replace(cfg, n_refl=int(m)), schemes,
                  "n_refl", float(m), t, master_seed, beamformer, timing)
                 for m in sweeps["element_sweep"] for t in range(trials)]

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(task_fn, tasks))
    else:
        chunks = [task_fn(task) for task in tasks]
    records = [rec for chunk in chunks for rec in chunk]
    records.sort(key=lambda r: (r.trial, r.scheme, r.sweep_name, r.sweep_value))

    log.info("experiment=%s trials=%d schemes=%s records=%d",
             experiment, trials, ",".join(schemes), len(records))
    if out_path is not None:
        write_csv(records, out_path)
    return records


def write_csv(records, out_path: str) -> None:
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in records:
            writer.writerow([r.trial, r.scheme, r.sweep_name,
                             repr(float(r.sweep_value)),
                             repr(float(r.secrecy_rate)),
                             r.rounds,
                             repr(float(r.runtime_ms)),
                             r.seed])


def summarize(records) -> list[str]:
    """Per-(scheme, sweep point) average secrecy rate, as printable lines."""
    groups: dict = {}
    for r in records:
        groups.setdefault((r.scheme, r.sweep_name, r.sweep_value), []).append(r.secrecy_rate)
    lines = []
    for (scheme, name, value), rates in sorted(groups.items()):
        lines.append(f"{scheme} {name}={value:g} trials={len(rates)} "
                     f"asr={float(np.mean(rates)):.6f}")
    return lines


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="irs-secrecy",
        description="Monte Carlo secrecy-rate experiments for a multi-IRS "
                    "mmWave downlink.")
    parser.add_argument("--config", help="JSON config file (defaults built in)")
    parser.add_argument("--experiment", required=True, choices=EXPERIMENTS)
    parser.add_argument("--trials", type=int, default=10)
    parser.add_argument("--seed", type=int, default=None,
                        help="master seed (defaults to the config seed)")
    parser.add_argument("--out", required=True, help="output CSV path")
    parser.add_argument("--beamformer", choices=("sca", "gevd"), default="sca")
    parser.add_argument("--scheme", default=None,
                        help="comma-separated subset of: " + ", ".join(SCHEMES))
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--emit-summary", action="store_true",
                        help="print per-sweep-point average secrecy rates")
    parser.add_argument("--timing", action="store_true",
                        help="record wall-clock runtimes in the CSV (breaks "
                             "byte-level reproducibility)")
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    try:
        cfg, sweeps = load_config(args.config)
        schemes = args.scheme.split(",") if args.scheme else None
        records = run_experiment(
            cfg, args.experiment, args.trials, out_path=args.out,
            sweeps=sweeps, master_seed=args.seed, beamformer=args.beamformer,
            schemes=schemes, workers=args.workers, timing=args.timing)
    except Exception as exc:  # CLI boundary: report and signal failure
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.emit_summary:
        for line in summarize(records):
            print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
