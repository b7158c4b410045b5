"""JR-value audits.

Three independent routes compute the same quantity: the size c of the largest
coalition S for which some alternative question q and threshold tau satisfy
``u_j(q) > tau`` and ``v_j(W) <= tau`` for every j in S. The JR value is then
c*k/n.

* ``audit_oracle`` scans every threshold appearing anywhere in the utilities
  (deliberately more than necessary) and counts coalitions directly.
* ``audit_naive`` scans only the slate-utility thresholds {v_i(W)}, one per
  participant, in O(m n^2).
* ``audit_fast`` merges the two sorted orders (by slate utility and by
  alternative utility) in a single pass per question, in O(m n log n).

Equivalence of the three on every input is the central test property of this
module; witnesses are only extracted on the naive path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    AuditReport,
    Slate,
    UtilityMatrix,
    Witness,
    jr_value_from_coalition,
    slate_values,
)


@dataclass(frozen=True)
class AuditConfig:
    algorithm: str = "fast"
    collect_witnesses: bool = False
    max_witnesses: int = 10

    def __post_init__(self) -> None:
        if self.algorithm not in ("oracle", "naive", "fast"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.collect_witnesses and self.max_witnesses < 1:
            raise ValueError("max_witnesses must be >= 1 when collecting witnesses")


def _resolve_k(slate: Slate, k: int | None) -> int:
    if k is None:
        k = len(slate)
    if k < 1:
        raise ValueError("k must be positive")
    return k


def audit_oracle(matrix: UtilityMatrix, slate: Slate, k: int | None = None) -> AuditReport:
    """Brute-force audit scanning every distinct utility value as a threshold.

    Quadratic-plus; intended as an independent validator at desk scale, not
    for large instances.
    """
    k = _resolve_k(slate, k)
    v = slate_values(matrix, slate)
    thresholds = np.unique(np.concatenate([matrix.values.ravel(), v]))
    # vle[t, j] : participant j gets at most threshold t from the slate
    vle = v[None, :] <= thresholds[:, None]
    best = 0
    for col in range(matrix.m):
        u_q = matrix.values[:, col]
        counts = ((u_q[None, :] > thresholds[:, None]) & vle).sum(axis=1)
        c_q = int(counts.max()) if counts.size else 0
        if c_q > best:
            best = c_q
    return AuditReport(
        jr_value=jr_value_from_coalition(best, matrix.n, k),
        max_coalition_size=best,
        n=matrix.n,
        k=k,
        algorithm="oracle",
    )


def audit_naive(matrix: UtilityMatrix, slate: Slate, k: int | None = None) -> AuditReport:
    """Audit scanning, per alternative question, the n slate-utility
    thresholds {v_i(W)} (duplicates kept). O(m n^2)."""
    k = _resolve_k(slate, k)
    v = slate_values(matrix, slate)
    # taus are the per-participant slate utilities; row t of vle marks the
    # participants j with v_j <= tau_t.
    vle = v[None, :] <= v[:, None]
    best = 0
    for col in range(matrix.m):
        u_q = matrix.values[:, col]
        counts = ((u_q[None, :] > v[:, None]) & vle).sum(axis=1)
        c_q = int(counts.max()) if counts.size else 0
        if c_q > best:
            best = c_q
    return AuditReport(
        jr_value=jr_value_from_coalition(best, matrix.n, k),
        max_coalition_size=best,
        n=matrix.n,
        k=k,
        algorithm="naive",
    )


def audit_fast(matrix: UtilityMatrix, slate: Slate, k: int | None = None) -> AuditReport:
    """Single-pass audit over sorted utilities. O(m n log n).

    Participants are sorted once by slate utility (descending) giving the
    threshold order, and per question by their utility for that question.
    A cursor walks the thresholds downward; participants whose slate utility
    exceeds the current threshold are blacklisted (and evicted from the
    running coalition), everyone else joins it.  Sort ties break by
    participant index so repeated runs are identical.
    """
    k = _resolve_k(slate, k)
    v = slate_values(matrix, slate)
    n, m = matrix.n, matrix.m
    gamma = np.argsort(-v, kind="stable")
    rank = np.empty(n, dtype=np.int64)
    rank[gamma] = np.arange(n)
    v_sorted = v[gamma].tolist()
    gamma_l = gamma.tolist()
    rank_l = rank.tolist()
    order = np.argsort(-matrix.values, axis=0, kind="stable")
    best = 0
    for col in range(m):
        delta = order[:, col].tolist()
        u_sorted = matrix.values[delta, col].tolist()
        in_coalition = bytearray(n)
        c_q = 0
        t = 0
        for i in range(n):
            u_i = u_sorted[i]
            while t < n and u_i <= v_sorted[t]:
                p = gamma_l[t]
                if in_coalition[p]:
                    in_coalition[p] = 0
                    c_q -= 1
                t += 1
            if t >= n:
                break
            p = delta[i]
            if rank_l[p] >= t:
                in_coalition[p] = 1
                c_q += 1
                if c_q > best:
                    best = c_q
    return AuditReport(
        jr_value=jr_value_from_coalition(best, matrix.n, k),
        max_coalition_size=best,
        n=matrix.n,
        k=k,
        algorithm="fast",
    )


def find_witnesses(
    matrix: UtilityMatrix, slate: Slate, k: int | None = None, cap: int = 10
) -> tuple[Witness, ...]:
    """Up to ``cap`` maximal blocking coalitions achieving the top size.

    Runs on the naive threshold set. Witnesses are ordered by question id,
    then by threshold descending; coalition members are sorted participant
    ids. Distinct coalitions for the same question are all reported; each is
    tagged with its tight threshold, max over the coalition of v(W).
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    _resolve_k(slate, k)
    v = slate_values(matrix, slate)
    taus = np.unique(v)[::-1]  # descending distinct slate utilities
    vle = v[None, :] <= taus[:, None]
    best = 0
    per_question: list[np.ndarray] = []
    for col in range(matrix.m):
        u_q = matrix.values[:, col]
        hits = (u_q[None, :] > taus[:, None]) & vle
        per_question.append(hits)
        c_q = int(hits.sum(axis=1).max()) if hits.size else 0
        if c_q > best:
            best = c_q
    if best == 0:
        return ()
    found: list[Witness] = []
    order = sorted(range(matrix.m), key=lambda j: matrix.question_ids[j])
    for col in order:
        hits = per_question[col]
        counts = hits.sum(axis=1)
        coalitions: list[tuple[int, ...]] = []
        seen: set[tuple[int, ...]] = set()
        for t in range(len(taus)):
            if counts[t] != best:
                continue
            members = tuple(np.flatnonzero(hits[t]).tolist())
            if members not in seen:
                seen.add(members)
                coalitions.append(members)
        entries = [
            (float(v[list(members)].max()), members) for members in coalitions
        ]
        for tau, members in sorted(entries, key=lambda e: -e[0]):
            found.append(
                Witness(
                    question_id=matrix.question_ids[col],
                    threshold=tau,
                    coalition=tuple(
                        sorted(matrix.participant_ids[j] for j in members)
                    ),
                )
            )
    return tuple(found[:cap])


def verify_witness(matrix: UtilityMatrix, slate: Slate, witness: Witness) -> bool:
    """Independent check of the deviation condition:
    min over the coalition of u(q) > tau >= max over the coalition of v(W)."""
    v = slate_values(matrix, slate)
    idx = {pid: i for i, pid in enumerate(matrix.participant_ids)}
    rows = [idx[pid] for pid in witness.coalition]
    if not rows:
        return False
    u_q = matrix.column(witness.question_id)
    return bool(
        min(u_q[i] for i in rows) > witness.threshold
        and witness.threshold >= max(v[i] for i in rows)
    )


_ALGORITHMS = {"oracle": audit_oracle, "naive": audit_naive, "fast": audit_fast}


def audit(
    matrix: UtilityMatrix,
    slate: Slate,
    k: int | None = None,
    config: AuditConfig = AuditConfig(),
) -> AuditReport:
    """Dispatch an audit per config, optionally attaching witnesses
    (always extracted via the naive path)."""
    report = _ALGORITHMS[config.algorithm](matrix, slate, k)
    if config.collect_witnesses and report.max_coalition_size > 0:
        witnesses = find_witnesses(matrix, slate, k, cap=config.max_witnesses)
        report = AuditReport(
            jr_value=report.jr_value,
            max_coalition_size=report.max_coalition_size,
            n=report.n,
            k=report.k,
            algorithm=report.algorithm,
            witnesses=witnesses,
        )
    return report
