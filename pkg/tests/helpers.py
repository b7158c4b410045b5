"""Shared instance builders for the test suite."""

from __future__ import annotations

import numpy as np

from slateaudit.model import Question, Session, UtilityMatrix, slate_from_indices


def make_matrix(values, participant_ids=None, question_ids=None) -> UtilityMatrix:
    arr = np.asarray(values, dtype=np.float64)
    n, m = arr.shape
    return UtilityMatrix(
        values=arr,
        participant_ids=tuple(participant_ids or (f"p{i:03d}" for i in range(n))),
        question_ids=tuple(question_ids or (f"q{j:03d}" for j in range(m))),
    )


def make_session(m: int, k: int, **kwargs) -> Session:
    questions = tuple(
        Question(id=f"q{j:03d}", author_id=f"p{j:03d}", text=f"question number {j}?")
        for j in range(m)
    )
    return Session(questions=questions, k=k, **kwargs)


def random_instance(rng: np.random.Generator, n_max=40, m_max=20, k_max=6, grid=0.05):
    """A random matrix + slate of the shape used throughout the properties:
    utilities drawn uniformly then snapped to a grid to force ties."""
    n = int(rng.integers(2, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    k = int(rng.integers(1, min(m, k_max) + 1))
    values = rng.uniform(0.0, 1.0, size=(n, m))
    if grid:
        values = np.round(values / grid) * grid
    matrix = make_matrix(values)
    members = rng.choice(m, size=k, replace=False)
    slate = slate_from_indices(matrix, sorted(int(j) for j in members))
    return matrix, slate, k
