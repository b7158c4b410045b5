"""Utility inference from question embeddings, plus its validation tools.

A participant's utility for a question is the cosine similarity between the
embedding of that question and the embedding of the participant's own
question, clamped at zero so utilities stay non-negative. Byte-identical
embedding vectors get similarity exactly 1.0 (duplicate texts produce the
same vector, and their mathematical cosine is 1), which keeps the
own-question diagonal exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .audit import audit_fast
from .embedding import EmbeddingCache, EmbeddingMatrix, EmbeddingProvider, embed_questions
from .model import Session, UtilityMatrix
from .optimize import ThresholdGrid, optimize_ip


def cosine_similarity(a, b) -> float:
    """Plain cosine in [-1, 1]; rejects zero vectors and mixed dimensions."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine similarity undefined for a zero vector")
    if a.tobytes() == b.tobytes():
        return 1.0
    return float(np.dot(a, b) / (na * nb))


def _unit_rows(vectors: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise ValueError("zero vector in embedding matrix")
    return vectors / norms


def _snap_identical(sims: np.ndarray, rows_a: np.ndarray, rows_b: np.ndarray) -> None:
    """Force similarity 1.0 wherever the raw vectors are byte-identical."""
    keys_a = [r.tobytes() for r in rows_a]
    keys_b = [r.tobytes() for r in rows_b]
    index: dict[bytes, list[int]] = {}
    for j, key in enumerate(keys_b):
        index.setdefault(key, []).append(j)
    for i, key in enumerate(keys_a):
        for j in index.get(key, ()):
            sims[i, j] = 1.0


def clamped_similarity(rows_a: np.ndarray, rows_b: np.ndarray) -> np.ndarray:
    """Pairwise clamped-cosine utilities in [0, 1] between two vector sets."""
    rows_a = np.asarray(rows_a, dtype=np.float64)
    rows_b = np.asarray(rows_b, dtype=np.float64)
    sims = _unit_rows(rows_a) @ _unit_rows(rows_b).T
    _snap_identical(sims, rows_a, rows_b)
    return np.clip(sims, 0.0, 1.0)


def build_utility_matrix(embeddings: EmbeddingMatrix, session: Session) -> UtilityMatrix:
    """The n x m utility matrix for a session: rows are participants (each
    tied to their proposed question), columns the proposed questions.

    Co-authored sessions (explicit n) use the best similarity over a
    participant's own questions. Errors name any question missing from the
    embedding matrix.
    """
    available = set(embeddings.question_ids)
    missing = [q.id for q in session.questions if q.id not in available]
    if missing:
        raise ValueError(f"missing embedding for question {missing[0]!r}")
    order = [embeddings.question_ids.index(qid) for qid in session.question_ids]
    vectors = embeddings.vectors[order]
    sims = clamped_similarity(vectors, vectors)
    owned = session.owned_question_indices()
    rows = np.vstack([sims[list(idxs)].max(axis=0) for idxs in owned])
    for i, idxs in enumerate(owned):
        for j in idxs:
            rows[i, j] = 1.0  # own question
    return UtilityMatrix(
        values=rows,
        participant_ids=session.participant_ids(),
        question_ids=session.question_ids,
    )


def utility_columns(
    embeddings: EmbeddingMatrix, session: Session, new_vectors: np.ndarray
) -> np.ndarray:
    """Per-participant utility columns for external questions (n x len(new))."""
    order = [embeddings.question_ids.index(qid) for qid in session.question_ids]
    vectors = embeddings.vectors[order]
    sims = clamped_similarity(vectors, np.asarray(new_vectors, dtype=np.float64))
    owned = session.owned_question_indices()
    return np.vstack([sims[list(idxs)].max(axis=0) for idxs in owned])


@dataclass(frozen=True)
class LabeledPair:
    """A question pair with a binary same-meaning label."""

    text_a: str
    text_b: str
    label: int

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")


@dataclass(frozen=True)
class RocResult:
    points: tuple[tuple[float, float], ...]  # (fpr, tpr), threshold descending
    auc: float


def roc_auc_from_scores(labels: Sequence[int], scores: Sequence[float]) -> RocResult:
    """ROC curve from sweeping a score threshold, and the exact pairwise AUC
    (ties count one half) via the rank formulation."""
    labels_arr = np.asarray(labels, dtype=np.int64)
    scores_arr = np.asarray(scores, dtype=np.float64)
    if labels_arr.shape != scores_arr.shape or labels_arr.ndim != 1:
        raise ValueError("labels and scores must be aligned 1-d sequences")
    pos = int((labels_arr == 1).sum())
    neg = int((labels_arr == 0).sum())
    if pos == 0 or neg == 0:
        raise ValueError("need at least one positive and one negative label")

    from scipy.stats import rankdata

    ranks = rankdata(scores_arr)  # average ranks on ties
    auc = float((ranks[labels_arr == 1].sum() - pos * (pos + 1) / 2) / (pos * neg))

    order = np.argsort(-scores_arr, kind="stable")
    sorted_scores = scores_arr[order]
    sorted_labels = labels_arr[order]
    tp = np.cumsum(sorted_labels == 1)
    fp = np.cumsum(sorted_labels == 0)
    # one operating point per distinct threshold
    boundary = np.flatnonzero(np.diff(sorted_scores)) if len(sorted_scores) > 1 else np.array([], dtype=int)
    cut = np.append(boundary, len(sorted_scores) - 1)
    points = [(0.0, 0.0)]
    points.extend((float(fp[i] / neg), float(tp[i] / pos)) for i in cut)
    return RocResult(points=tuple(points), auc=auc)


def eval_roc_auc(
    pairs: Sequence[LabeledPair],
    provider: EmbeddingProvider,
    cache: EmbeddingCache | None = None,
    batch_size: int = 100,
) -> RocResult:
    """Score each pair by the raw cosine of its two embeddings and sweep the
    threshold. Raw (unclamped) similarity is used: clamping would only merge
    the sub-zero thresholds."""
    if not pairs:
        raise ValueError("no pairs given")
    texts = list(dict.fromkeys(t for p in pairs for t in (p.text_a, p.text_b)))
    emb = embed_questions(texts, provider, ids=texts, cache=cache, batch_size=batch_size)
    units = _unit_rows(emb.vectors)
    row = {t: units[i] for i, t in enumerate(texts)}
    raw = {t: emb.vectors[i] for i, t in enumerate(texts)}
    scores = []
    for p in pairs:
        if raw[p.text_a].tobytes() == raw[p.text_b].tobytes():
            scores.append(1.0)
        else:
            scores.append(float(np.dot(row[p.text_a], row[p.text_b])))
    return roc_auc_from_scores([p.label for p in pairs], scores)


@dataclass(frozen=True)
class CrossValidation:
    """jrv of the slate optimized under the column model, audited under the
    row model."""

    model_ids: tuple[str, ...]
    values: tuple[tuple[float, ...], ...]  # [eval_model][opt_model]
    slate_ids: tuple[tuple[str, ...], ...]  # per opt_model


def cross_validate(
    models: Sequence[EmbeddingMatrix],
    session: Session,
    grid: ThresholdGrid | None = None,
    solver: str = "auto",
) -> CrossValidation:
    if len(models) < 2:
        raise ValueError("cross-validation needs at least two embedding models")
    matrices = [build_utility_matrix(emb, session) for emb in models]
    slates = [
        optimize_ip(mat, session.k, grid=grid, solver=solver).slate for mat in matrices
    ]
    values = tuple(
        tuple(audit_fast(mat_eval, slate, session.k).jr_value for slate in slates)
        for mat_eval in matrices
    )
    return CrossValidation(
        model_ids=tuple(emb.model_id for emb in models),
        values=values,
        slate_ids=tuple(s.member_ids for s in slates),
    )
