"""Command line interface: run experiments, summarise CSVs, ingest text."""

import argparse
import csv
import sys

from . import data as data_mod
from . import harness


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="hcrphmm",
        description="Collapsed samplers for infinite HMMs: experiment runner")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the chains described by a config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--seed", type=int, default=None,
                       help="replace the config's seed list with this one seed")
    p_run.add_argument("--out", default=None, help="override the output CSV path")

    p_sum = sub.add_parser(
        "summarize",
        help="summarise one or more record CSVs",
        description="Per-sampler means, accept-rate aggregates and the "
                    "autocorrelation time of the state-count series. "
                    "Mutual information columns are in nats.")
    p_sum.add_argument("csv", nargs="+")
    p_sum.add_argument("--out", default=None, help="write the summary CSV here")
    p_sum.add_argument("--hist-out", default=None,
                       help="write plot-ready MI histogram rows here")

    p_ing = sub.add_parser("ingest", help="preprocess a text file into a corpus")
    p_ing.add_argument("text")
    p_ing.add_argument("--out", required=True)
    p_ing.add_argument("--test-tail", type=int, default=1000)

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _run(args)
        if args.command == "summarize":
            return _summarize(args)
        return _ingest(args)
    except (harness.ConfigError, data_mod.PfaFormatError,
            data_mod.EmptyCorpusError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


def _run(args):
    cfg = harness.load_config(args.config)
    if args.seed is not None:
        cfg.seeds = [args.seed]
    if args.out is not None:
        cfg.out = args.out
    if not cfg.out:
        raise harness.ConfigError("no output path: set out= or pass --out")
    records = harness.run_experiment(cfg)
    print("wrote %d records to %s" % (len(records), cfg.out))
    return 0


def _write_rows(path_or_stdout, rows):
    if not rows:
        return
    header = list(rows[0])
    writer = csv.writer(path_or_stdout)
    writer.writerow(header)
    for row in rows:
        writer.writerow([row[k] for k in header])


def _summarize(args):
    records = []
    for path in args.csv:
        records.extend(harness.read_csv(path))
    rows = harness.summarize(records)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fp:
            _write_rows(fp, rows)
    else:
        _write_rows(sys.stdout, rows)
    if args.hist_out:
        hist = harness.mi_histogram(records)
        with open(args.hist_out, "w", encoding="utf-8", newline="") as fp:
            _write_rows(fp, hist)
    return 0


def _ingest(args):
    with open(args.text, "r", encoding="utf-8") as fp:
        corpus = data_mod.ingest_text(fp.read(), args.test_tail)
    corpus.save(args.out)
    print("corpus: %d train, %d test, %d word vocabulary"
          % (len(corpus.train), len(corpus.test), corpus.n_symbols))
    return 0


if __name__ == "__main__":
    sys.exit(main())
