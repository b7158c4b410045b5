#!/usr/bin/env python3
"""Wall-time harness for the audit algorithms.

Times the single-pass and per-threshold audits over a grid of instance
sizes, spot-checking that both return the same JR value. The large square
case (n = m = 2000) demonstrates the practical gap between the two.

Usage: python3 scripts/benchmark_audit.py [--sizes 500,1000,2000] [--k 8]
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from slateaudit.audit import audit_fast, audit_naive  # noqa: E402
from slateaudit.model import UtilityMatrix, slate_from_indices  # noqa: E402


def instance(n: int, m: int, k: int, seed: int = 7):
    rng = np.random.default_rng(seed)
    matrix = UtilityMatrix(
        values=rng.uniform(0.0, 1.0, (n, m)),
        participant_ids=tuple(f"p{i}" for i in range(n)),
        question_ids=tuple(f"q{j}" for j in range(m)),
    )
    return matrix, slate_from_indices(matrix, range(k))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="500,1000,2000")
    parser.add_argument("--k", type=int, default=8)
    parser.add_argument("--skip-naive-above", type=int, default=2000)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    print(f"{'n=m':>6} {'fast (s)':>10} {'naive (s)':>10} {'speedup':>8}  jrv")
    for n in sizes:
        matrix, slate = instance(n, n, args.k)
        t0 = time.perf_counter()
        fast = audit_fast(matrix, slate, args.k)
        t_fast = time.perf_counter() - t0
        if n <= args.skip_naive_above:
            t0 = time.perf_counter()
            naive = audit_naive(matrix, slate, args.k)
            t_naive = time.perf_counter() - t0
            assert naive.jr_value == fast.jr_value, "audit mismatch"
            print(
                f"{n:>6} {t_fast:>10.3f} {t_naive:>10.3f} "
                f"{t_naive / t_fast:>7.1f}x  {fast.jr_value:.4f}"
            )
        else:
            print(f"{n:>6} {t_fast:>10.3f} {'-':>10} {'-':>8}  {fast.jr_value:.4f}")


if __name__ == "__main__":
    main()
