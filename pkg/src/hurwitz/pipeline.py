"""Checkpointed pipeline: precompute, batches, accumulate, confirm, classify.

All progress lives in ``<out>/manifest.json``, rewritten atomically after
every unit of work together with SHA-256 digests of the files it produced.
A later run with the same configuration picks up where the last one
stopped; any file whose digest no longer matches is rebuilt and everything
downstream of it is invalidated.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from . import kernels
from .batchfile import BatchData, read_batch, write_records
from .classify import assign_label
from .engine import (
    DEFAULT_BATCH_SIZE,
    FieldTables,
    accumulate,
    batch_primaries,
    compatible_pairs,
    detect_exceptional,
    iter_contributions,
    pair_values,
)
from .partitions import PartitionTable, count_secondary
from .verify import CONFIRMED, DEFAULT_START, BoundCertificate, confirm

log = logging.getLogger(__name__)

STAGES = ("precompute", "batches", "accumulate", "confirm", "classify")
MANIFEST = "manifest.json"
MANIFEST_VERSION = 1
RESULTS_FORMAT = "hurwitz-exceptional-triples"


class ConfigMismatch(RuntimeError):
    pass


class OracleMismatch(RuntimeError):
    pass


class SimulatedCrash(RuntimeError):
    """Raised by the test hook to emulate the process dying."""


@dataclass
class RunConfig:
    degree: int
    out: Path
    batch_size: int = DEFAULT_BATCH_SIZE
    primes: list[int] | None = None
    prime_start: int = DEFAULT_START
    threads: int = 1
    stage: str | None = None
    oracle_check: bool = False
    crash_at: int | None = field(default=None, repr=False)

    def validate(self) -> None:
        if self.degree < 2:
            raise ValueError("degree must be at least 2")
        if self.batch_size < 1:
            raise ValueError("batch size must be at least 1")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        if self.stage is not None and self.stage not in STAGES:
            raise ValueError(f"unknown stage {self.stage!r}; choose from {STAGES}")
        if self.oracle_check and self.degree > 8:
            raise ValueError("--oracle-check is only available for d <= 8")

    def identity(self) -> dict:
        """The part of the configuration that determines the results."""
        return {
            "degree": self.degree,
            "batch_size": self.batch_size,
            "primes": self.primes,
            "prime_start": self.prime_start,
        }


def file_digest(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def _dumps(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, indent=1) + "\n").encode()


class Pipeline:
    def __init__(self, config: RunConfig):
        config.validate()
        self.cfg = config
        self.out = Path(config.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self._ticks = 0
        self._table: PartitionTable | None = None
        self._ft: dict[int, FieldTables] = {}
        self.manifest = self._load_manifest()

    # manifest ----------------------------------------------------------------

    def _load_manifest(self) -> dict:
        path = self.out / MANIFEST
        if path.exists():
            manifest = json.loads(path.read_text())
            if manifest.get("version") != MANIFEST_VERSION:
                raise ConfigMismatch(f"{path}: unsupported manifest version")
            if manifest["config"] != self.cfg.identity():
                raise ConfigMismatch(
                    f"{path} was written for {manifest['config']}, not {self.cfg.identity()}; use a fresh --out"
                )
            return manifest
        return {
            "version": MANIFEST_VERSION,
            "config": self.cfg.identity(),
            "stages": {s: {"done": False, "inputs": {}, "outputs": {}, "seconds": 0.0} for s in STAGES},
        }

    def _save(self) -> None:
        atomic_write(self.out / MANIFEST, _dumps(self.manifest))

    def _tick(self, what: str) -> None:
        self._ticks += 1
        if self.cfg.crash_at is not None and self._ticks >= self.cfg.crash_at:
            raise SimulatedCrash(f"simulated crash at tick {self._ticks} ({what})")

    def _stage(self, name: str) -> dict:
        return self.manifest["stages"][name]

    def _record(self, stage: str, rel: str) -> None:
        self._stage(stage)["outputs"][rel] = file_digest(self.out / rel)
        self._save()

    def _intact(self, stage: str, rel: str) -> bool:
        digest = self._stage(stage)["outputs"].get(rel)
        path = self.out / rel
        return digest is not None and path.exists() and file_digest(path) == digest

    def _invalidate_from(self, stage: str) -> None:
        for s in STAGES[STAGES.index(stage) :]:
            self.manifest["stages"][s] = {"done": False, "inputs": {}, "outputs": {}, "seconds": 0.0}
        self._save()

    def _begin(self, stage: str, inputs: dict) -> bool:
        """True if ``stage`` is already complete for exactly these inputs."""
        st = self._stage(stage)
        if st["inputs"] != inputs:
            if st["inputs"] or st["outputs"]:
                log.info("%s: inputs changed, restarting stage", stage)
            self._invalidate_from(stage)
            st = self._stage(stage)
            st["inputs"] = inputs
            self._save()
            return False
        if st["done"] and all(self._intact(stage, rel) for rel in st["outputs"]):
            return True
        if st["done"]:
            log.info("%s: outputs damaged, resuming stage", stage)
            st["done"] = False
            next_stage = STAGES.index(stage) + 1
            if next_stage < len(STAGES):
                self._invalidate_from(STAGES[next_stage])
        return False

    def _finish(self, stage: str, started: float) -> None:
        st = self._stage(stage)
        st["done"] = True
        st["seconds"] = round(st["seconds"] + time.perf_counter() - started, 3)
        self._save()

    # shared state --------------------------------------------------------------

    @property
    def table(self) -> PartitionTable:
        if self._table is None:
            self._table = PartitionTable(self.cfg.degree)
        return self._table

    def field_tables(self, p: int) -> FieldTables:
        if p not in self._ft:
            self._ft[p] = FieldTables(self.table, p)
        return self._ft[p]

    def certificate(self) -> BoundCertificate:
        return BoundCertificate.build(self.cfg.degree, self.cfg.primes, self.cfg.prime_start)

    def _outputs(self, stage: str) -> dict:
        return dict(self._stage(stage)["outputs"])

    # stages ---------------------------------------------------------------------

    def run(self) -> int:
        last = STAGES.index(self.cfg.stage) if self.cfg.stage else len(STAGES) - 1
        log.info("degree %d, backend %s, batch size %d", self.cfg.degree, kernels.backend(), self.cfg.batch_size)
        for name in STAGES[: last + 1]:
            getattr(self, f"stage_{name}")()
        if self.cfg.oracle_check and last == len(STAGES) - 1:
            self.check_oracle()
        return 0

    def stage_precompute(self) -> None:
        t0 = time.perf_counter()
        if self._begin("precompute", {"config": json.dumps(self.cfg.identity(), sort_keys=True)}):
            return
        cert = self.certificate()
        ft = self.field_tables(cert.primes[0])
        table = self.table
        summary = {
            "degree": table.d,
            "layer_counts": [int(c) for c in table.counts],
            "p2": count_secondary(table.d),
            "first_prime": ft.p,
            "class_sizes_top": [str(c) for c in table.class_sizes[int(table.offsets[table.d]) :]],
        }
        atomic_write(self.out / "tables.json", _dumps(summary))
        atomic_write(self.out / "certificate.json", _dumps(cert.to_manifest()))
        self._record("precompute", "tables.json")
        self._record("precompute", "certificate.json")
        log.info("precompute: %d partitions of %d, p2=%d, %d certificate primes", ft.n_top, table.d, summary["p2"], len(cert.primes))
        self._tick("precompute")
        self._finish("precompute", t0)

    def _batch_dir(self, p: int) -> str:
        return f"batches/p{p}"

    def _ensure_batches(self, stage: str, p: int) -> list[str]:
        """Write (or verify) every batch file for prime ``p``; returns their paths."""
        ft = self.field_tables(p)
        groups = batch_primaries(self.table, self.cfg.batch_size)
        rels = []
        (self.out / self._batch_dir(p)).mkdir(parents=True, exist_ok=True)
        regenerated = False
        records = 0
        for b, prims in enumerate(groups):
            rel = f"{self._batch_dir(p)}/batch_{b:05d}.bin"
            rels.append(rel)
            if self._intact(stage, rel):
                continue
            if rel in self._stage(stage)["outputs"]:
                regenerated = True
                log.warning("%s: digest mismatch, rebuilding", rel)
            contrib = self._ticking(iter_contributions(prims, ft), f"batch {b}")
            write_records(self.out / rel, ft.d, p, b, len(prims), contrib)
            records += read_batch(self.out / rel).header.n_records
            self._record(stage, rel)
            self._tick(f"batch {b} recorded")
        if records:
            log.info("batches p=%d: %d primaries in %d batches, %d records written", p, len(self.table.layers[self.table.d]), len(groups), records)
        if regenerated and stage == "batches":
            nxt = STAGES[STAGES.index(stage) + 1]
            self._invalidate_from(nxt)
        return rels

    def _ticking(self, it: Iterable, what: str) -> Iterator:
        for n, item in enumerate(it):
            if n == 1:
                self._tick(f"{what} mid-write")
            yield item

    def stage_batches(self) -> None:
        t0 = time.perf_counter()
        inputs = self._outputs("precompute")
        if self._begin("batches", inputs):
            return
        self._ensure_batches("batches", self.certificate().primes[0])
        self._finish("batches", t0)

    def _load_batches(self, rels: list[str], p: int) -> list[BatchData]:
        return [read_batch(self.out / rel, self.cfg.degree, p) for rel in rels]

    def stage_accumulate(self) -> None:
        t0 = time.perf_counter()
        inputs = self._outputs("batches")
        if self._begin("accumulate", inputs):
            return
        p = self.certificate().primes[0]
        ft = self.field_tables(p)
        (self.out / "accumulate").mkdir(exist_ok=True)
        todo = [i for i in range(ft.trivial) if not self._intact("accumulate", f"accumulate/i{i:05d}.json")]
        batches = self._load_batches(sorted(inputs), p) if todo else []

        def task(i: int) -> dict:
            acc = accumulate(i, batches, ft)
            cands = detect_exceptional(i, acc, ft.top_lengths, ft.d)
            return {"i": i, "entries": len(acc), "capacity": acc.capacity, "overflow": acc.overflow_used, "candidates": cands}

        def store(res: dict) -> None:
            rel = f"accumulate/i{res['i']:05d}.json"
            atomic_write(self.out / rel, _dumps({"i": res["i"], "candidates": res["candidates"]}))
            self._record("accumulate", rel)
            log.debug("accumulate i=%d: %d keys (capacity %d, overflow %d), %d candidates",
                      res["i"], res["entries"], res["capacity"], res["overflow"], len(res["candidates"]))
            self._tick(f"accumulate {res['i']}")

        if self.cfg.threads > 1 and len(todo) > 1:
            with ThreadPoolExecutor(self.cfg.threads) as pool:
                for res in pool.map(task, todo):
                    store(res)
        else:
            for i in todo:
                store(task(i))

        cands = []
        for i in range(ft.trivial):
            data = json.loads((self.out / f"accumulate/i{i:05d}.json").read_text())
            cands.extend(tuple(t) for t in data["candidates"])
        cands.sort()
        lines = [json.dumps({"indices": list(t), "residue": 0, "prime": p}) for t in cands]
        atomic_write(self.out / "candidates.jsonl", ("\n".join(lines) + "\n" if lines else "").encode())
        self._record("accumulate", "candidates.jsonl")
        log.info("accumulate p=%d: %d candidate triples", p, len(cands))
        self._finish("accumulate", t0)

    def _candidates(self) -> list[tuple[int, int, int]]:
        text = (self.out / "candidates.jsonl").read_text()
        return [tuple(json.loads(line)["indices"]) for line in text.splitlines() if line.strip()]

    def _evaluate(self, p: int, triples: list[tuple[int, int, int]]) -> dict:
        rel = f"confirm/p{p}.json"
        if self._intact("confirm", rel):
            data = json.loads((self.out / rel).read_text())
            got = {tuple(t): v for t, v in data["residues"]}
            if all(t in got for t in triples):
                return got
        rels = self._ensure_batches("confirm", p)
        ft = self.field_tables(p)
        batches = self._load_batches(rels, p)
        by_i: dict[int, list[tuple[int, int]]] = {}
        for i, j, k in triples:
            by_i.setdefault(i, []).append((j, k))
        out = {}
        for i in sorted(by_i):
            acc = accumulate(i, batches, ft)
            jk = np.array(by_i[i], dtype=np.int64)
            for (j, k), v in zip(by_i[i], pair_values(acc, jk[:, 0], jk[:, 1])):
                out[(i, j, k)] = int(v)
        (self.out / "confirm").mkdir(exist_ok=True)
        atomic_write(self.out / rel, _dumps({"prime": p, "residues": [[list(t), v] for t, v in sorted(out.items())]}))
        self._record("confirm", rel)
        self._tick(f"confirm p={p}")
        return out

    def stage_confirm(self) -> None:
        t0 = time.perf_counter()
        inputs = self._outputs("accumulate")
        if self._begin("confirm", inputs):
            return
        cert = self.certificate()
        cands = self._candidates()
        first = cert.primes[0]
        statuses = confirm(cands, cert, self._evaluate, known={first: {t: 0 for t in cands}})
        rows = [
            {
                "indices": list(s.triple),
                "residues": [[p, r] for p, r in s.residues.items()],
                "verdict": s.verdict,
                "rejected_by": s.rejected_by,
            }
            for s in statuses
        ]
        atomic_write(self.out / "statuses.json", _dumps({"certificate": cert.to_manifest(), "statuses": rows}))
        self._record("confirm", "statuses.json")
        n_fp = sum(1 for s in statuses if s.verdict != CONFIRMED)
        log.info("confirm: %d candidates, %d confirmed, %d false positives removed", len(statuses), len(statuses) - n_fp, n_fp)
        self._finish("confirm", t0)

    def stage_classify(self) -> None:
        t0 = time.perf_counter()
        inputs = self._outputs("confirm")
        if self._begin("classify", inputs):
            return
        data = json.loads((self.out / "statuses.json").read_text())
        rows = data["statuses"]
        primes = data["certificate"]["primes"]
        table = self.table
        results, false_pos = [], []
        for row in sorted(rows, key=lambda r: r["indices"]):
            tri = tuple(table.top_parts(i) for i in row["indices"])
            record = {
                "triple": [list(lam) for lam in tri],
                "indices": row["indices"],
                "residues": row["residues"],
                "verdict": row["verdict"],
            }
            if row["verdict"] == CONFIRMED:
                lab = assign_label(tri)
                record.update(label=lab.label, genus=lab.genus, witness=lab.witness)
                results.append(record)
            else:
                record["rejected_by"] = row["rejected_by"]
                false_pos.append(record)
        header = {"kind": "header", "format": RESULTS_FORMAT, "version": 1, "degree": self.cfg.degree,
                  "primes": primes, "count": len(results)}
        text = "".join(json.dumps(r, sort_keys=True) + "\n" for r in [header, *results])
        atomic_write(self.out / "results.jsonl", text.encode())
        atomic_write(self.out / "false_positives.jsonl", "".join(json.dumps(r, sort_keys=True) + "\n" for r in false_pos).encode())
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lambda1", "lambda2", "lambda3", "genus", "label", "witness"])
        for r in results:
            w.writerow([json.dumps(lam) for lam in r["triple"]] + [r["genus"], r["label"], json.dumps(r["witness"], sort_keys=True)])
        atomic_write(self.out / "results.csv", buf.getvalue().encode())
        for rel in ("results.jsonl", "results.csv", "false_positives.jsonl"):
            self._record("classify", rel)
        counts = {}
        for r in results:
            counts[r["label"]] = counts.get(r["label"], 0) + 1
        log.info("classify: %d exceptional triples %s", len(results), counts)
        self._finish("classify", t0)

    def results(self) -> list[dict]:
        lines = (self.out / "results.jsonl").read_text().splitlines()
        return [json.loads(line) for line in lines[1:]]

    def check_oracle(self) -> None:
        from .oracle import exceptional_set

        got = {tuple(tuple(lam) for lam in r["triple"]) for r in self.results()}
        want = exceptional_set(self.cfg.degree)
        if got != want:
            raise OracleMismatch(f"pipeline and oracle disagree: missing {sorted(want - got)}, extra {sorted(got - want)}")
        log.info("oracle check: %d exceptional triples agree", len(want))


def run_pipeline(config: RunConfig) -> Pipeline:
    pipe = Pipeline(config)
    pipe.run()
    return pipe


def resume(out: str | os.PathLike, **overrides) -> Pipeline:
    """Continue the run recorded in ``out/manifest.json``."""
    manifest = json.loads((Path(out) / MANIFEST).read_text())
    cfg = RunConfig(out=Path(out), **manifest["config"], **overrides)
    return run_pipeline(cfg)


def config_dict(cfg: RunConfig) -> dict:
    d = asdict(cfg)
    d["out"] = str(d["out"])
    return d
