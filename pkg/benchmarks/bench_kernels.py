"""Benchmark the compiled kernels against the pure-Python fallback.

Run from the repository root:

    python3 benchmarks/bench_kernels.py

Workloads mirror real usage: sentence-pair n-gram scoring at evaluation
scale, and the all-pairs counting behind Kendall tau on judgement sets.
"""

from __future__ import annotations

import random
import time

from pncinterp._kernels import _speedups_py

try:
    from pncinterp._kernels import _speedups
except ImportError:
    _speedups = None


def _sentence_pairs(n_pairs: int, length: int, vocab: int, seed: int = 0):
    rng = random.Random(seed)
    return [
        (
            [rng.randrange(vocab) for _ in range(length)],
            [rng.randrange(vocab) for _ in range(length)],
        )
        for _ in range(n_pairs)
    ]


def _time(fn, repeats: int = 3) -> float:
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - started)
    return best


def bench_ngram(module, pairs) -> float:
    def run():
        for gold, pred in pairs:
            module.ngram_overlap_counts(gold, pred, 4)

    return _time(run)


def bench_kendall(module, x, y) -> float:
    return _time(lambda: module.kendall_pair_counts(x, y))


def main() -> None:
    print(f"compiled kernels available: {_speedups is not None}\n")
    rows = []

    for n_pairs, length in ((2000, 12), (2000, 30), (500, 80)):
        pairs = _sentence_pairs(n_pairs, length, vocab=50)
        python_time = bench_ngram(_speedups_py, pairs)
        label = f"ngram counts  {n_pairs} pairs x {length} tokens"
        if _speedups is not None:
            compiled_time = bench_ngram(_speedups, pairs)
            rows.append((label, python_time, compiled_time))
        else:
            rows.append((label, python_time, None))

    rng = random.Random(1)
    for n in (500, 2000):
        x = [float(rng.randrange(3)) for _ in range(n)]
        y = [rng.random() for _ in range(n)]
        python_time = bench_kendall(_speedups_py, x, y)
        label = f"kendall pairs n={n} ({n * (n - 1) // 2} comparisons)"
        if _speedups is not None:
            compiled_time = bench_kendall(_speedups, x, y)
            rows.append((label, python_time, compiled_time))
        else:
            rows.append((label, python_time, None))

    width = max(len(label) for label, _, _ in rows)
    header = f"{'workload'.ljust(width)}  {'python':>10}  {'compiled':>10}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for label, python_time, compiled_time in rows:
        if compiled_time is None:
            print(f"{label.ljust(width)}  {python_time * 1e3:>8.2f}ms  {'n/a':>10}  {'n/a':>8}")
        else:
            print(
                f"{label.ljust(width)}  {python_time * 1e3:>8.2f}ms  {compiled_time * 1e3:>8.2f}ms"
                f"  {python_time / compiled_time:>7.1f}x"
            )


if __name__ == "__main__":
    main()
