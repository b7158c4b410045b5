"""Session and report documents.

All documents are JSON with a versioned ``schema`` field. Serialization goes
through one canonical path (sorted keys, two-space indent, full double
precision via repr round-tripping) so the CLI and the HTTP service emit
byte-identical bytes for identical inputs. Wall-clock timings are surfaced
out of band (logs / headers), never inside the documents, to keep them
reproducible byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .model import AuditReport, Question, Session, Slate, UtilityMatrix, member_column

SESSION_SCHEMA = "slateaudit/session-v1"
REPORT_SCHEMA = "slateaudit/report-v1"
HEATMAP_SCHEMA = "slateaudit/heatmap-v1"

_SESSION_FIELDS = {"schema", "questions", "k", "n", "human_slate", "sibling_groups", "embeddings"}
_QUESTION_FIELDS = {"id", "author_id", "text"}


@dataclass(frozen=True)
class EmbeddingsRef:
    """Pointer from a session file to a precomputed embedding cache."""

    model_id: str
    cache_path: str  # relative to the session file


@dataclass(frozen=True)
class LoadedSession:
    session: Session
    embeddings_ref: EmbeddingsRef | None
    path: Path | None


def load_session(path) -> LoadedSession:
    """Parse and validate a session file; every referential invariant is
    enforced before anything downstream runs."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValueError(f"cannot read session file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(
            f"{path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return LoadedSession(
        session=session_from_document(doc), embeddings_ref=_ref_from(doc), path=path
    )


def _ref_from(doc: dict) -> EmbeddingsRef | None:
    ref = doc.get("embeddings")
    if ref is None:
        return None
    unknown = set(ref) - {"model_id", "cache_path"}
    if unknown:
        raise ValueError(f"unknown field {sorted(unknown)[0]!r} in embeddings reference")
    return EmbeddingsRef(model_id=ref["model_id"], cache_path=ref["cache_path"])


def session_from_document(doc: dict) -> Session:
    if not isinstance(doc, dict):
        raise ValueError("session document must be an object")
    if doc.get("schema") != SESSION_SCHEMA:
        raise ValueError(
            f"unsupported schema {doc.get('schema')!r}, expected {SESSION_SCHEMA!r}"
        )
    unknown = set(doc) - _SESSION_FIELDS
    if unknown:
        raise ValueError(f"unknown field {sorted(unknown)[0]!r} in session document")
    questions = []
    for i, q in enumerate(doc.get("questions", [])):
        extra = set(q) - _QUESTION_FIELDS
        if extra:
            raise ValueError(f"unknown field {sorted(extra)[0]!r} in question {i}")
        if "id" not in q or "text" not in q:
            raise ValueError(f"question {i} must carry id and text")
        questions.append(
            Question(id=q["id"], text=q["text"], author_id=q.get("author_id"))
        )
    if "k" not in doc:
        raise ValueError("session document is missing k")
    return Session(
        questions=tuple(questions),
        k=doc["k"],
        sibling_groups=tuple(frozenset(g) for g in doc.get("sibling_groups", [])),
        human_slate=tuple(doc["human_slate"]) if doc.get("human_slate") else None,
        n_explicit=doc.get("n"),
    )


def session_to_document(session: Session, embeddings_ref: EmbeddingsRef | None = None) -> dict:
    doc: dict = {
        "schema": SESSION_SCHEMA,
        "k": session.k,
        "questions": [
            {
                "id": q.id,
                "text": q.text,
                **({"author_id": q.author_id} if q.author_id is not None else {}),
            }
            for q in session.questions
        ],
    }
    if session.n_explicit is not None:
        doc["n"] = session.n_explicit
    if session.human_slate is not None:
        doc["human_slate"] = list(session.human_slate)
    if session.sibling_groups:
        doc["sibling_groups"] = [sorted(g) for g in session.sibling_groups]
    if embeddings_ref is not None:
        doc["embeddings"] = {
            "model_id": embeddings_ref.model_id,
            "cache_path": embeddings_ref.cache_path,
        }
    return doc


def dumps_canonical(doc) -> bytes:
    """The one serialization path shared by the CLI and the service."""
    return (
        json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    ).encode("utf-8")


def save_session(session: Session, path, embeddings_ref: EmbeddingsRef | None = None) -> None:
    Path(path).write_bytes(dumps_canonical(session_to_document(session, embeddings_ref)))


def write_document(doc: dict, path) -> None:
    path = Path(path)
    if path.parent.name:
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dumps_canonical(doc))


def audit_result_block(report: AuditReport) -> dict:
    return {
        "jr_value": report.jr_value,
        "max_coalition_size": report.max_coalition_size,
        "satisfies_jr": report.satisfies_jr,
        "n": report.n,
        "k": report.k,
        "algorithm": report.algorithm,
        "witnesses": [
            {
                "question_id": w.question_id,
                "threshold": w.threshold,
                "coalition": list(w.coalition),
            }
            for w in report.witnesses
        ],
    }


def slate_block(slate: Slate, session: Session | None = None) -> dict:
    members = []
    for mem in slate.members:
        entry: dict = {"question_id": mem.question_id}
        text = mem.text
        if text is None and session is not None:
            try:
                text = session.question_by_id(mem.question_id).text
            except KeyError:
                text = None
        if text is not None:
            entry["text"] = text
        members.append(entry)
    return {"provenance": slate.provenance, "members": members}


@dataclass(frozen=True)
class HeatmapExport:
    """k x m similarity grid: rows are slate questions, columns the
    participants (one per proposed question in the standard setup)."""

    row_ids: tuple[str, ...]
    row_texts: tuple[str | None, ...]
    column_ids: tuple[str, ...]
    cells: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        if len(self.cells) != len(self.row_ids):
            raise ValueError("one cell row per slate question required")
        for row in self.cells:
            if len(row) != len(self.column_ids):
                raise ValueError("cell row length must match column count")
            for v in row:
                if not 0.0 <= v <= 1.0:
                    raise ValueError(f"heatmap cell {v} outside [0, 1]")


def build_heatmap(matrix: UtilityMatrix, slate: Slate, session: Session | None = None) -> HeatmapExport:
    """Cells are exactly the utility entries the audit reads; nothing is
    recomputed."""
    rows = []
    texts = []
    cells = []
    for mem in slate.members:
        rows.append(mem.question_id)
        text = mem.text
        if text is None and session is not None:
            try:
                text = session.question_by_id(mem.question_id).text
            except KeyError:
                text = None
        texts.append(text)
        cells.append(tuple(float(x) for x in member_column(matrix, mem)))
    return HeatmapExport(
        row_ids=tuple(rows),
        row_texts=tuple(texts),
        column_ids=matrix.participant_ids,
        cells=tuple(cells),
    )


def heatmap_document(heatmap: HeatmapExport) -> dict:
    return {
        "schema": HEATMAP_SCHEMA,
        "rows": list(heatmap.row_ids),
        "row_texts": list(heatmap.row_texts),
        "columns": list(heatmap.column_ids),
        "cells": [list(r) for r in heatmap.cells],
    }


def matrix_document(matrix: UtilityMatrix) -> dict:
    return {
        "participant_ids": list(matrix.participant_ids),
        "question_ids": list(matrix.question_ids),
        "values": [list(map(float, row)) for row in matrix.values],
    }
