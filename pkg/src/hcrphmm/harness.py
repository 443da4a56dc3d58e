"""Experiment harness: configs, budgeted chains, CSV records and summaries.

A config describes one dataset, one or more samplers, a budget (sweep count
or CPU seconds of sampling time) and the seeds to run.  Every (sampler, seed)
pair becomes an independent chain with its own generator; records collected
at the sampling checkpoints go into one CSV whose rows are fully determined
by (config, seed) in sweep-budget mode.  Metric evaluation runs off the
budget clock: only sweep, split-merge and hyperparameter work is timed.
"""

import csv
import math
import random
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import data as data_mod
from . import diagnostics, hyper, particle
from .splitmerge import split_merge_move
from .sweeps import SweepStats, blocked_sweep, stepwise_sweep

CSV_VERSION = "hcrphmm-csv 1"
COLUMNS = ("sampler", "seed", "sweep", "cpu_seconds", "n_states", "mi",
           "gibbs_accept_rate", "sm_accept_rate", "ppl",
           "gibbs_accepts", "gibbs_trials", "sm_accepts", "sm_trials")
SAMPLERS = ("sgibbs", "sslice", "bgibbs", "beam")


class ConfigError(ValueError):
    """A config line failed validation; the message carries the line number."""


class ExperimentConfig:
    """Parsed experiment description; see :func:`parse_config` for the keys."""

    def __init__(self):
        self.dataset = None
        self.pfa_path = None
        self.text_path = None
        self.length = None
        self.test_tail = 1000
        self.dataset_seed = 0
        self.samplers = ["sgibbs"]
        self.block_size = 8
        self.sm_per_sweep = 0
        self.budget_sweeps = None
        self.budget_seconds = None
        self.burnin = 0.0
        self.sample_every = 1.0
        self.seeds = [0]
        self.out = None
        self.init_particles = particle.DEFAULT_PARTICLES
        self.eval_particles = particle.DEFAULT_PARTICLES
        self.resample_hyper = True
        self.record_time = None
        self.workers = 1

    def validate(self):
        if self.dataset not in ("sequence1", "sequence2", "text"):
            raise ConfigError("dataset must be sequence1, sequence2 or text")
        if self.dataset == "text" and not self.text_path:
            raise ConfigError("text dataset needs text=<path>")
        for s in self.samplers:
            if s not in SAMPLERS:
                raise ConfigError("unknown sampler %r" % s)
        if (self.budget_sweeps is None) == (self.budget_seconds is None):
            raise ConfigError("exactly one of sweeps= or seconds= is required")
        budget = self.budget_sweeps if self.budget_sweeps is not None \
            else self.budget_seconds
        if budget < 0:
            raise ConfigError("budget must be non-negative")
        if budget and budget <= self.burnin:
            raise ConfigError("budget must exceed burnin")
        if self.block_size < 1:
            raise ConfigError("block_size must be >= 1")
        if self.sm_per_sweep < 0:
            raise ConfigError("sm_per_sweep must be >= 0")
        if self.sample_every <= 0:
            raise ConfigError("sample_every must be positive")
        if self.record_time is None:
            self.record_time = self.budget_seconds is not None
        return self


_INT_KEYS = {"length": "length", "test_tail": "test_tail",
             "dataset_seed": "dataset_seed", "block_size": "block_size",
             "sm_per_sweep": "sm_per_sweep", "sweeps": "budget_sweeps",
             "init_particles": "init_particles",
             "eval_particles": "eval_particles", "workers": "workers"}
_FLOAT_KEYS = {"seconds": "budget_seconds", "burnin": "burnin",
               "sample_every": "sample_every"}
_BOOL_KEYS = {"resample_hyper": "resample_hyper", "record_time": "record_time"}


def parse_config(text):
    """Parse ``key=value`` lines (``#`` comments allowed) into a config."""
    cfg = ExperimentConfig()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("line %d: expected key=value, got %r" % (lineno, raw))
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            if key == "dataset":
                cfg.dataset = value
            elif key == "pfa":
                cfg.pfa_path = value
            elif key == "text":
                cfg.text_path = value
            elif key == "sampler":
                cfg.samplers = [v.strip() for v in value.split(",") if v.strip()]
            elif key == "seeds":
                cfg.seeds = [int(v) for v in value.replace(",", " ").split()]
            elif key == "out":
                cfg.out = value
            elif key in _INT_KEYS:
                setattr(cfg, _INT_KEYS[key], int(value))
            elif key in _FLOAT_KEYS:
                setattr(cfg, _FLOAT_KEYS[key], float(value))
            elif key in _BOOL_KEYS:
                if value.lower() not in ("true", "false", "0", "1"):
                    raise ValueError(value)
                setattr(cfg, _BOOL_KEYS[key], value.lower() in ("true", "1"))
            else:
                raise ConfigError("line %d: unknown key %r" % (lineno, key))
        except ConfigError:
            raise
        except ValueError:
            raise ConfigError("line %d: bad value for %s: %r"
                              % (lineno, key, value)) from None
    return cfg.validate()


def load_config(path):
    with open(path, "r", encoding="utf-8") as fp:
        return parse_config(fp.read())


def load_dataset(cfg):
    """Return ``(y_train, truth, n_symbols, y_test)`` for a config."""
    if cfg.dataset == "sequence1":
        y, truth = data_mod.sequence1(cfg.length or data_mod.SEQUENCE1_LENGTH)
        return y, truth, 1 + max(y), None
    if cfg.dataset == "sequence2":
        pfa = (data_mod.load_pfa(cfg.pfa_path) if cfg.pfa_path
               else data_mod.default_pfa())
        rng = random.Random(derive_seed(cfg.dataset_seed, -1))
        y, truth = pfa.simulate(cfg.length or data_mod.SEQUENCE2_LENGTH, rng)
        return y, truth, pfa.n_symbols, None
    with open(cfg.text_path, "r", encoding="utf-8") as fp:
        corpus = data_mod.ingest_text(fp.read(), cfg.test_tail)
    return corpus.train, None, corpus.n_symbols, corpus.test


class RunRecord:
    """One sampling checkpoint of one chain."""

    __slots__ = ("sampler", "seed", "sweep", "cpu_seconds", "n_states", "mi",
                 "ppl", "gibbs_accepts", "gibbs_trials", "sm_accepts",
                 "sm_trials")

    def __init__(self, sampler, seed, sweep, cpu_seconds, n_states, mi, ppl,
                 gibbs_accepts, gibbs_trials, sm_accepts, sm_trials):
        self.sampler = sampler
        self.seed = seed
        self.sweep = sweep
        self.cpu_seconds = cpu_seconds
        self.n_states = n_states
        self.mi = mi
        self.ppl = ppl
        self.gibbs_accepts = gibbs_accepts
        self.gibbs_trials = gibbs_trials
        self.sm_accepts = sm_accepts
        self.sm_trials = sm_trials

    @property
    def gibbs_accept_rate(self):
        return self.gibbs_accepts / self.gibbs_trials if self.gibbs_trials \
            else float("nan")

    @property
    def sm_accept_rate(self):
        return self.sm_accepts / self.sm_trials if self.sm_trials \
            else float("nan")

    def row(self):
        return (self.sampler, self.seed, self.sweep,
                _fmt(self.cpu_seconds), self.n_states, _fmt(self.mi),
                _fmt(self.gibbs_accept_rate), _fmt(self.sm_accept_rate),
                _fmt(self.ppl), self.gibbs_accepts, self.gibbs_trials,
                self.sm_accepts, self.sm_trials)


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float) and math.isnan(value):
        return ""
    return repr(float(value))


def _parse_cell(cell):
    return None if cell == "" else float(cell)


def derive_seed(root, chain):
    ss = np.random.SeedSequence([int(root) & 0x7FFFFFFF, int(chain) & 0x7FFFFFFF])
    return int(ss.generate_state(1, np.uint64)[0])


def _sweep_once(sampler, h, cfg, rng):
    if sampler == "sgibbs":
        return stepwise_sweep(h, rng)
    if sampler == "sslice":
        return blocked_sweep(h, 1, rng, beam=True)
    if sampler == "bgibbs":
        return blocked_sweep(h, cfg.block_size, rng)
    return blocked_sweep(h, cfg.block_size, rng, beam=True)


def run_chain(cfg, sampler, seed, y, truth, n_symbols, y_test):
    """Run one budgeted chain and return its records."""
    rng = random.Random(derive_seed(seed, 0))
    h = particle.init_state(y, n_symbols, rng,
                            n_particles=cfg.init_particles)
    gibbs = SweepStats()
    sm = SweepStats()
    clock = 0.0
    records = []

    def snapshot(sweep):
        mi = None
        if truth is not None and h.x:
            mi = diagnostics.mutual_information(h.x, truth)
        ppl = None
        if y_test:
            rows = [particle.predictive_likelihoods(
                h, y_test, rng, n_particles=cfg.eval_particles)]
            ppl = diagnostics.perplexity(rows)
        records.append(RunRecord(
            sampler, seed, sweep, clock if cfg.record_time else 0.0,
            h.num_states(), mi, ppl, gibbs.accepted, gibbs.trials,
            sm.accepted, sm.trials))

    snapshot(0)
    sweep = 0
    next_checkpoint = cfg.burnin + cfg.sample_every
    while True:
        if cfg.budget_sweeps is not None:
            if sweep >= cfg.budget_sweeps:
                break
        elif clock >= cfg.budget_seconds:
            break
        start = time.process_time()
        gibbs.merge(_sweep_once(sampler, h, cfg, rng))
        for _ in range(cfg.sm_per_sweep):
            sm.count(split_merge_move(h, rng).accepted)
        if cfg.resample_hyper:
            hyper.resample_hyperparameters(h, rng)
        clock += time.process_time() - start
        sweep += 1
        progress = sweep if cfg.budget_sweeps is not None else clock
        if progress >= next_checkpoint:
            snapshot(sweep)
            while next_checkpoint <= progress:
                next_checkpoint += cfg.sample_every
    return records


def run_experiment(cfg):
    """Run every (sampler, seed) chain; returns the records, sorted."""
    y, truth, n_symbols, y_test = load_dataset(cfg)
    jobs = [(cfg, sampler, seed, y, truth, n_symbols, y_test)
            for sampler in cfg.samplers for seed in cfg.seeds]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(_run_chain_star, jobs))
    else:
        chunks = [_run_chain_star(job) for job in jobs]
    records = [rec for chunk in chunks for rec in chunk]
    records.sort(key=lambda r: (r.sampler, r.seed, r.sweep))
    if cfg.out:
        write_csv(cfg.out, records, summarize(records))
    return records


def _run_chain_star(job):
    return run_chain(*job)


def write_csv(path, records, summary=None):
    with open(path, "w", encoding="utf-8", newline="") as fp:
        fp.write("# %s\n" % CSV_VERSION)
        writer = csv.writer(fp)
        writer.writerow(COLUMNS)
        for rec in records:
            writer.writerow(rec.row())
        for row in summary or ():
            fp.write("# summary %s\n"
                     % " ".join("%s=%s" % (k, v) for k, v in row.items()))


def read_csv(path):
    records = []
    with open(path, "r", encoding="utf-8") as fp:
        reader = csv.reader(line for line in fp if not line.startswith("#"))
        header = next(reader, None)
        if header is None or tuple(header) != COLUMNS:
            raise ConfigError("%s: not a harness CSV" % path)
        for row in reader:
            records.append(RunRecord(
                row[0], int(row[1]), int(row[2]), _parse_cell(row[3]) or 0.0,
                int(float(row[4])), _parse_cell(row[5]), _parse_cell(row[8]),
                int(row[9]), int(row[10]), int(row[11]), int(row[12])))
    return records


def _mean(values):
    values = [v for v in values if v is not None and not math.isnan(v)]
    return sum(values) / len(values) if values else float("nan")


def summarize(records):
    """Per-sampler summary rows in the layout of the result tables.

    Accept rates aggregate raw counters (total accepts over total trials);
    the states autocorrelation time is computed per chain over its recorded
    series and then averaged.
    """
    rows = []
    samplers = sorted({r.sampler for r in records})
    for sampler in samplers:
        recs = [r for r in records if r.sampler == sampler]
        chains = sorted({r.seed for r in recs})
        acts = []
        finals = []
        for seed in chains:
            series = [r.n_states for r in recs if r.seed == seed]
            finals.append(max((r for r in recs if r.seed == seed),
                              key=lambda r: r.sweep))
            try:
                acts.append(diagnostics.autocorrelation_time(series))
            except (ValueError, diagnostics.ZeroVarianceError):
                acts.append(float("nan"))
        total_sweeps = sum(r.sweep for r in finals)
        total_cpu = sum(r.cpu_seconds for r in finals)
        gibbs_trials = sum(r.gibbs_trials for r in finals)
        sm_trials = sum(r.sm_trials for r in finals)
        rows.append({
            "sampler": sampler,
            "chains": len(chains),
            "mi": _mean([r.mi for r in recs]),
            "act_n_states": _mean(acts),
            "n_states": _mean([float(r.n_states) for r in recs]),
            "secs_per_sweep": total_cpu / total_sweeps if total_sweeps
                              else float("nan"),
            "gibbs_accept_rate": (sum(r.gibbs_accepts for r in finals)
                                  / gibbs_trials) if gibbs_trials
                                 else float("nan"),
            "sm_accept_rate": (sum(r.sm_accepts for r in finals)
                               / sm_trials) if sm_trials else float("nan"),
            "ppl": _mean([r.ppl for r in recs]),
        })
    return rows


def mi_histogram(records, bins=20):
    """Plot-ready histogram rows of the final mutual information per chain."""
    rows = []
    samplers = sorted({r.sampler for r in records})
    values_by_sampler = {}
    lo, hi = math.inf, -math.inf
    for sampler in samplers:
        recs = [r for r in records if r.sampler == sampler]
        finals = {}
        for r in recs:
            if r.mi is not None and (r.seed not in finals
                                     or r.sweep > finals[r.seed].sweep):
                finals[r.seed] = r
        values = [r.mi for r in finals.values()]
        values_by_sampler[sampler] = values
        if values:
            lo = min(lo, min(values))
            hi = max(hi, max(values))
    if not math.isfinite(lo):
        return rows
    if lo == hi:
        hi = lo + 1.0
    width = (hi - lo) / bins
    for sampler in samplers:
        counts = [0] * bins
        for v in values_by_sampler[sampler]:
            idx = min(int((v - lo) / width), bins - 1)
            counts[idx] += 1
        for i, c in enumerate(counts):
            rows.append({"sampler": sampler, "bin_lo": lo + i * width,
                         "bin_hi": lo + (i + 1) * width, "count": c})
    return rows
