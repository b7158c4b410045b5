"""Core domain types: sessions, utility matrices, slates, and audit reports.

All types are immutable after construction and safe to share across threads.
Utilities are plain 64-bit floats and every comparison in the audit pipeline
is an exact float comparison; nothing here applies epsilon fuzzing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

PROVENANCES = ("human", "random", "ip", "llm", "llm_best", "custom")


@dataclass(frozen=True)
class Question:
    """A single proposed question. ``author_id`` is absent for generated ones."""

    id: str
    text: str
    author_id: str | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.id, str) or not self.id:
            raise ValueError("question id must be a non-empty string")
        if not isinstance(self.text, str) or not self.text.strip():
            raise ValueError(f"question {self.id!r}: text is empty")


@dataclass(frozen=True)
class Session:
    """The unit of ingestion: m proposed questions, a slate size k, and
    optionally a human slate with sibling groups.

    ``n_explicit`` overrides the participant count for co-authored sessions;
    by default there is one participant per question (n = m).
    """

    questions: tuple[Question, ...]
    k: int
    sibling_groups: tuple[frozenset[str], ...] = ()
    human_slate: tuple[str, ...] | None = None
    n_explicit: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "questions", tuple(self.questions))
        object.__setattr__(
            self, "sibling_groups", tuple(frozenset(g) for g in self.sibling_groups)
        )
        if self.human_slate is not None:
            object.__setattr__(self, "human_slate", tuple(self.human_slate))
        m = len(self.questions)
        if m == 0:
            raise ValueError("session has no questions")
        ids = [q.id for q in self.questions]
        if len(set(ids)) != m:
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate question ids: {dup}")
        if not isinstance(self.k, int) or self.k < 1:
            raise ValueError("k must be a positive integer")
        if self.k > m:
            raise ValueError(f"k exceeds question count (k={self.k}, m={m})")
        known = set(ids)
        seen: set[str] = set()
        for group in self.sibling_groups:
            if len(group) < 2:
                raise ValueError("sibling group smaller than 2")
            unknown = group - known
            if unknown:
                raise ValueError(f"sibling group references unknown ids: {sorted(unknown)}")
            if group & seen:
                raise ValueError("sibling groups are not disjoint")
            seen |= group
        if self.human_slate is not None:
            unknown = set(self.human_slate) - known
            if unknown:
                raise ValueError(f"human slate references unknown ids: {sorted(unknown)}")
            if len(set(self.human_slate)) != len(self.human_slate):
                raise ValueError("human slate contains duplicate ids")
        if self.n_explicit is not None:
            if self.n_explicit < 1:
                raise ValueError("n must be positive")
            if self.n_explicit != m:
                authors = [q.author_id for q in self.questions]
                if any(a is None for a in authors):
                    raise ValueError(
                        "explicit n requires an author_id on every question"
                    )
                distinct = len(dict.fromkeys(authors))
                if self.n_explicit != distinct:
                    raise ValueError(
                        f"explicit n={self.n_explicit} does not match "
                        f"{distinct} distinct authors"
                    )

    @property
    def m(self) -> int:
        return len(self.questions)

    @property
    def n(self) -> int:
        return self.n_explicit if self.n_explicit is not None else self.m

    @property
    def question_ids(self) -> tuple[str, ...]:
        return tuple(q.id for q in self.questions)

    def question_by_id(self, qid: str) -> Question:
        for q in self.questions:
            if q.id == qid:
                return q
        raise KeyError(qid)

    def participant_ids(self) -> tuple[str, ...]:
        """One participant per question by default (ids from authors when they
        are unique), or the distinct authors in co-author mode."""
        if self.n_explicit is not None and self.n_explicit != self.m:
            return tuple(dict.fromkeys(q.author_id for q in self.questions))  # type: ignore[arg-type]
        authors = [q.author_id for q in self.questions]
        if all(a is not None for a in authors) and len(set(authors)) == len(authors):
            return tuple(authors)  # type: ignore[arg-type]
        return tuple(f"p@{q.id}" for q in self.questions)

    def owned_question_indices(self) -> tuple[tuple[int, ...], ...]:
        """For each participant, the indices of the questions they proposed."""
        if self.n_explicit is not None and self.n_explicit != self.m:
            by_author: dict[str, list[int]] = {}
            for j, q in enumerate(self.questions):
                by_author.setdefault(q.author_id, []).append(j)  # type: ignore[arg-type]
            return tuple(tuple(v) for v in by_author.values())
        return tuple((j,) for j in range(self.m))


@dataclass(frozen=True)
class UtilityMatrix:
    """Dense n x m matrix of non-negative utilities u_i(q); rows are
    participants, columns are the proposed questions."""

    values: np.ndarray
    participant_ids: tuple[str, ...]
    question_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError("utility matrix must be 2-dimensional")
        if arr.shape != (len(self.participant_ids), len(self.question_ids)):
            raise ValueError(
                f"matrix shape {arr.shape} does not match "
                f"{len(self.participant_ids)} participants x "
                f"{len(self.question_ids)} questions"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("utility matrix contains non-finite entries")
        if np.any(arr < 0):
            raise ValueError("utility matrix contains negative entries")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "participant_ids", tuple(self.participant_ids))
        object.__setattr__(self, "question_ids", tuple(self.question_ids))
        object.__setattr__(
            self, "_col", {qid: j for j, qid in enumerate(self.question_ids)}
        )

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    def column_index(self, qid: str) -> int:
        try:
            return self._col[qid]  # type: ignore[attr-defined]
        except KeyError:
            raise KeyError(f"unknown question id {qid!r}") from None

    def column(self, qid: str) -> np.ndarray:
        return self.values[:, self.column_index(qid)]


@dataclass(frozen=True)
class SlateMember:
    """One slate entry: either a reference into the proposed questions
    (``index`` set) or an external question carrying its own utility column."""

    question_id: str
    index: int | None = None
    utilities: tuple[float, ...] | None = None
    text: str | None = None

    def __post_init__(self) -> None:
        if self.index is None and self.utilities is None:
            raise ValueError(
                f"slate member {self.question_id!r} needs either an index "
                "or a utility column"
            )
        if self.utilities is not None:
            object.__setattr__(self, "utilities", tuple(float(u) for u in self.utilities))


@dataclass(frozen=True)
class Slate:
    """An ordered set of slate members plus how the slate was produced."""

    members: tuple[SlateMember, ...]
    provenance: str = "custom"

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise ValueError("empty slate")
        ids = [mem.question_id for mem in self.members]
        if len(set(ids)) != len(ids):
            raise ValueError("slate contains duplicate members")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")

    def __len__(self) -> int:
        return len(self.members)

    @property
    def member_ids(self) -> tuple[str, ...]:
        return tuple(mem.question_id for mem in self.members)


def slate_from_indices(
    matrix: UtilityMatrix, indices: Iterable[int], provenance: str = "custom"
) -> Slate:
    members = []
    for j in indices:
        j = int(j)
        if not 0 <= j < matrix.m:
            raise IndexError(f"question index {j} out of range")
        members.append(SlateMember(question_id=matrix.question_ids[j], index=j))
    return Slate(members=tuple(members), provenance=provenance)


def slate_from_ids(
    matrix: UtilityMatrix, qids: Iterable[str], provenance: str = "custom"
) -> Slate:
    return slate_from_indices(matrix, (matrix.column_index(q) for q in qids), provenance)


def member_column(matrix: UtilityMatrix, member: SlateMember) -> np.ndarray:
    """The n-entry utility column backing one slate member."""
    if member.index is not None:
        if not 0 <= member.index < matrix.m:
            raise IndexError(f"member index {member.index} out of range")
        return matrix.values[:, member.index]
    col = np.asarray(member.utilities, dtype=np.float64)
    if col.shape != (matrix.n,):
        raise ValueError(
            f"external member {member.question_id!r} carries "
            f"{col.shape[0]} utilities, expected {matrix.n}"
        )
    if np.any(col < 0) or not np.all(np.isfinite(col)):
        raise ValueError(f"external member {member.question_id!r} has invalid utilities")
    return col


def slate_values(matrix: UtilityMatrix, slate: Slate) -> np.ndarray:
    """Per-participant slate utility vector v_i = max over members of u_i."""
    cols = np.column_stack([member_column(matrix, mem) for mem in slate.members])
    return cols.max(axis=1)


def slate_utility(matrix: UtilityMatrix, slate: Slate, participant: int) -> float:
    """Unit-demand utility of one participant: the best member on the slate."""
    if not slate.members:
        raise ValueError("empty slate")
    if not 0 <= participant < matrix.n:
        raise IndexError(f"participant index {participant} out of range")
    return float(
        max(member_column(matrix, mem)[participant] for mem in slate.members)
    )


def jr_value_from_coalition(c: int, n: int, k: int) -> float:
    """Convert a largest-blocking-coalition size into the JR value c*k/n."""
    if n < 1:
        raise ValueError("n must be positive")
    if k < 1:
        raise ValueError("k must be positive")
    if not 0 <= c <= n:
        raise ValueError(f"coalition size {c} outside [0, {n}]")
    return (c * k) / n


@dataclass(frozen=True)
class Witness:
    """A blocking coalition: every member strictly prefers ``question_id``
    above ``threshold`` while getting at most ``threshold`` from the slate."""

    question_id: str
    threshold: float
    coalition: tuple[str, ...]


@dataclass(frozen=True)
class AuditReport:
    """Result of a JR audit: the JR value, the witnessing coalition size, and
    optional witness diagnostics. ``jr_value < 1`` means the slate satisfies JR."""

    jr_value: float
    max_coalition_size: int
    n: int
    k: int
    algorithm: str
    witnesses: tuple[Witness, ...] = ()

    def __post_init__(self) -> None:
        expected = jr_value_from_coalition(self.max_coalition_size, self.n, self.k)
        if self.jr_value != expected:
            raise ValueError(
                f"jr_value {self.jr_value} != c*k/n = {expected} "
                f"(c={self.max_coalition_size}, n={self.n}, k={self.k})"
            )

    @property
    def satisfies_jr(self) -> bool:
        return self.jr_value < 1.0
