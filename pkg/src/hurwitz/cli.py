"""Command line entry point: ``hurwitz <command> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .pipeline import STAGES, ConfigMismatch, OracleMismatch, RunConfig, resume, run_pipeline

log = logging.getLogger("hurwitz")


def _primes(text: str) -> list[int] | None:
    if text == "auto":
        return None
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or a comma-separated prime list, got {text!r}")


def _default_out(degree: int | None) -> Path:
    env = os.environ.get("HURWITZ_OUT")
    if env:
        return Path(env)
    return Path(f"hurwitz-d{degree}")


def cmd_run(args) -> int:
    out = args.out or _default_out(args.degree)
    if args.resume:
        if not (Path(out) / "manifest.json").exists():
            log.error("nothing to resume in %s", out)
            return 2
        resume(out, threads=args.threads, stage=args.stage, oracle_check=args.oracle_check)
        return 0
    if args.degree is None:
        log.error("--degree is required unless --resume is given")
        return 2
    cfg = RunConfig(
        degree=args.degree,
        out=Path(out),
        batch_size=args.batch_size,
        primes=args.primes,
        prime_start=args.prime_start,
        threads=args.threads,
        stage=args.stage,
        oracle_check=args.oracle_check,
    )
    pipe = run_pipeline(cfg)
    if cfg.stage in (None, "classify"):
        print(f"{len(pipe.results())} exceptional triples for d={cfg.degree}; results in {pipe.out / 'results.jsonl'}")
    return 0


def cmd_oracle(args) -> int:
    from .oracle import exceptional_set

    for tri in sorted(exceptional_set(args.degree)):
        print(json.dumps([list(lam) for lam in tri]))
    return 0


def cmd_layer(args) -> int:
    from .partitions import PartitionTable, format_layer

    print(format_layer(PartitionTable(args.n), args.n))
    return 0


def cmd_chars(args) -> int:
    from .modchar import CharacterTables, format_character_layer
    from .partitions import PartitionTable

    print(format_character_layer(CharacterTables(PartitionTable(args.n), args.prime), args.n))
    return 0


def cmd_certificate(args) -> int:
    from .verify import BoundCertificate

    cert = BoundCertificate.build(args.degree, start=args.prime_start)
    print(json.dumps(cert.to_manifest(), indent=1))
    return 0


def cmd_dump_accumulator(args) -> int:
    from .batchfile import read_header
    from .engine import FieldTables, accumulate
    from .partitions import PartitionTable

    paths = sorted(Path(args.batches).glob("batch_*.bin"))
    if not paths:
        log.error("no batch files in %s", args.batches)
        return 2
    h = read_header(paths[0].read_bytes()[:64])
    ft = FieldTables(PartitionTable(h.d), h.p)
    acc = accumulate(args.index, paths, ft, min_index=0 if args.all_pairs else None)
    acc.dump(sys.stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hurwitz", description="Exceptional branch data of degree-d covers over three points.")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run (or resume) the full pipeline")
    run.add_argument("--degree", "-d", type=int)
    run.add_argument("--batch-size", type=int, default=150)
    run.add_argument("--primes", type=_primes, default=None, help="'auto' or comma-separated primes")
    run.add_argument("--prime-start", type=int, default=1_000_000_007, help="first prime tried by the auto policy")
    run.add_argument("--out", type=Path, help="output directory (env HURWITZ_OUT)")
    run.add_argument("--resume", action="store_true", help="continue the run recorded in --out")
    run.add_argument("--stage", choices=STAGES, help="stop after this stage")
    run.add_argument("--threads", type=int, default=1)
    run.add_argument("--oracle-check", action="store_true", help="compare with brute force (d <= 8)")
    run.set_defaults(func=cmd_run)

    ora = sub.add_parser("oracle", help="brute-force exceptional set as JSON lines")
    ora.add_argument("--degree", "-d", type=int, required=True)
    ora.set_defaults(func=cmd_oracle)

    lay = sub.add_parser("layer", help="print the partitions of n in reverse-lex order")
    lay.add_argument("n", type=int)
    lay.set_defaults(func=cmd_layer)

    ch = sub.add_parser("chars", help="print the character table of S_n modulo a prime")
    ch.add_argument("n", type=int)
    ch.add_argument("--prime", type=int, default=1_000_000_007)
    ch.set_defaults(func=cmd_chars)

    cert = sub.add_parser("certificate", help="print the prime certificate for a degree")
    cert.add_argument("--degree", "-d", type=int, required=True)
    cert.add_argument("--prime-start", type=int, default=1_000_000_007)
    cert.set_defaults(func=cmd_certificate)

    dump = sub.add_parser("dump-accumulator", help="print 'j k residue' lines for one first index")
    dump.add_argument("batches", type=Path, help="directory of batch_*.bin files")
    dump.add_argument("--index", type=int, required=True)
    dump.add_argument("--all-pairs", action="store_true", help="include pairs with j below the index")
    dump.set_defaults(func=cmd_dump_accumulator)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigMismatch, ValueError) as exc:
        log.error("%s", exc)
        return 2
    except OracleMismatch as exc:
        log.error("%s", exc)
        return 3


if __name__ == "__main__":
    sys.exit(main())
