"""Compare the numba and numpy kernel backends.

    python3 benchmarks/bench_kernels.py --degree 13
"""

import argparse
import tempfile
import time

import numpy as np

from hurwitz import kernels
from hurwitz.engine import FieldTables, accumulate, batch_primaries, write_batch
from hurwitz.hashtable import Accumulator
from hurwitz.partitions import PartitionTable

P = 1_000_000_007


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_poly_mul(table, rng):
    n1, n2 = table.d // 2, table.d - table.d // 2
    block = table.product_block(n1, n2)
    a = rng.integers(0, P, block.shape[0])
    b = rng.integers(0, P, block.shape[1])
    out_len = int(table.counts[n1 + n2])
    mul = kernels.impl().poly_mul
    return lambda: [mul(a, b, block, out_len, P) for _ in range(2000)]


def bench_upsert(rng, n=1_000_000):
    keys = rng.integers(0, 200_000, n).astype(np.uint64)
    vals = rng.integers(0, P, n)

    def go():
        acc = Accumulator(0, P, expected=200_000)
        for s in range(0, n, 10_000):
            acc.upsert_keys(keys[s : s + 10_000], vals[s : s + 10_000])

    return go


def bench_accumulate(ft, paths):
    def go():
        for i in range(0, ft.trivial, max(1, ft.trivial // 8)):
            accumulate(i, paths, ft)

    return go


def bench_batches(ft, batch_size):
    groups = batch_primaries(ft.table, batch_size)

    def go():
        with tempfile.TemporaryDirectory() as tmp:
            for b, prims in enumerate(groups):
                write_batch(f"{tmp}/batch_{b:05d}.bin", prims, ft, b)

    return go


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--degree", type=int, default=13)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--batch-size", type=int, default=150)
    args = ap.parse_args()

    table = PartitionTable(args.degree)
    ft = FieldTables(table, P)
    workdir = tempfile.TemporaryDirectory()
    paths = [
        write_batch(f"{workdir.name}/batch_{b:05d}.bin", prims, ft, b)
        for b, prims in enumerate(batch_primaries(table, args.batch_size))
    ]

    rows = []
    for name in ("numba", "numpy"):
        kernels.set_backend(name)
        rng = np.random.default_rng(0)
        cases = {
            f"poly_mul x2000 (d={args.degree})": bench_poly_mul(table, rng),
            "hash upsert 10^6": bench_upsert(rng),
            f"write batches (d={args.degree})": bench_batches(ft, args.batch_size),
            f"accumulate sample (d={args.degree})": bench_accumulate(ft, paths),
        }
        for case, fn in cases.items():
            fn()  # warm up, includes numba compilation
            rows.append((case, name, best_of(fn, args.repeat)))
    workdir.cleanup()

    by_case: dict[str, dict[str, float]] = {}
    for case, name, t in rows:
        by_case.setdefault(case, {})[name] = t
    width = max(len(c) for c in by_case)
    print(f"{'case':<{width}}  {'numba':>9}  {'numpy':>9}  speedup")
    for case, t in by_case.items():
        print(f"{case:<{width}}  {t['numba']:9.4f}  {t['numpy']:9.4f}  {t['numpy'] / t['numba']:6.1f}x")


if __name__ == "__main__":
    main()
