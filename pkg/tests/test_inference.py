import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slateaudit.audit import audit_oracle
from slateaudit.embedding import EmbeddingMatrix, HashEmbeddingProvider
from slateaudit.inference import (
    LabeledPair,
    build_utility_matrix,
    cosine_similarity,
    cross_validate,
    eval_roc_auc,
    roc_auc_from_scores,
    utility_columns,
)
from slateaudit.model import Question, Session, slate_from_ids
from slateaudit.optimize import optimize_ip, threshold_grid

from helpers import make_session


def embeddings_for(session, vectors, model_id="test-model"):
    return EmbeddingMatrix(
        vectors=np.asarray(vectors, dtype=np.float64),
        model_id=model_id,
        question_ids=session.question_ids,
    )


class TestCosine:
    def test_identity(self):
        assert cosine_similarity((1.0, 0.0), (1.0, 0.0)) == 1.0

    def test_orthogonal(self):
        assert cosine_similarity((1.0, 0.0), (0.0, 1.0)) == 0.0

    def test_antipodal(self):
        assert cosine_similarity((1.0, 0.0), (-1.0, 0.0)) == -1.0

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError, match="zero vector"):
            cosine_similarity((0.0, 0.0), (1.0, 0.0))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            cosine_similarity((1.0,), (1.0, 0.0))


class TestBuildUtilityMatrix:
    def test_orthogonal_pair_gives_identity(self):
        session = make_session(2, 1)
        emb = embeddings_for(session, [[1.0, 0.0], [0.0, 1.0]])
        mat = build_utility_matrix(emb, session)
        assert mat.values.tolist() == [[1.0, 0.0], [0.0, 1.0]]

    def test_antipodal_clamps_to_zero(self):
        session = make_session(2, 1)
        emb = embeddings_for(session, [[1.0, 0.0], [-1.0, 0.0]])
        mat = build_utility_matrix(emb, session)
        assert mat.values.tolist() == [[1.0, 0.0], [0.0, 1.0]]

    def test_duplicate_texts_full_similarity(self):
        session = make_session(2, 1)
        vec = [0.3, 0.4, 0.5]
        emb = embeddings_for(session, [vec, vec])
        mat = build_utility_matrix(emb, session)
        assert mat.values.tolist() == [[1.0, 1.0], [1.0, 1.0]]

    def test_diagonal_exactly_one(self):
        session = make_session(6, 2)
        rng = np.random.default_rng(3)
        emb = embeddings_for(session, rng.normal(size=(6, 16)))
        mat = build_utility_matrix(emb, session)
        assert all(mat.values[i, i] == 1.0 for i in range(6))
        assert np.all(mat.values >= 0.0) and np.all(mat.values <= 1.0)

    def test_missing_embedding_names_question(self):
        session = make_session(3, 1)
        emb = EmbeddingMatrix(
            vectors=np.eye(2), model_id="m", question_ids=("q000", "q001")
        )
        with pytest.raises(ValueError, match="q002"):
            build_utility_matrix(emb, session)

    def test_coauthor_mode_max_over_own(self):
        qs = (
            Question(id="a", author_id="alice", text="first?"),
            Question(id="b", author_id="alice", text="second?"),
            Question(id="c", author_id="bob", text="third?"),
        )
        session = Session(questions=qs, k=1, n_explicit=2)
        emb = EmbeddingMatrix(
            vectors=np.array([[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]]),
            model_id="m",
            question_ids=("a", "b", "c"),
        )
        mat = build_utility_matrix(emb, session)
        assert mat.values.shape == (2, 3)
        assert mat.values[0].tolist() == [1.0, 1.0, 0.8]  # max over alice's two
        assert mat.values[1, 2] == 1.0

    def test_utility_columns_for_external(self):
        session = make_session(2, 1)
        emb = embeddings_for(session, [[1.0, 0.0], [0.0, 1.0]])
        cols = utility_columns(emb, session, np.array([[1.0, 0.0], [-1.0, 0.0]]))
        assert cols.tolist() == [[1.0, 0.0], [0.0, 0.0]]


class TestRocAuc:
    def test_perfect_separation(self):
        res = roc_auc_from_scores([1, 1, 0, 0], [0.9, 0.8, 0.4, 0.1])
        assert res.auc == 1.0
        assert res.points[0] == (0.0, 0.0) and res.points[-1] == (1.0, 1.0)

    def test_four_pair_derived_example(self):
        # pairwise: (0.9 beats 0.5, 0.1), (0.3 beats 0.1 only) -> 3/4
        res = roc_auc_from_scores([1, 1, 0, 0], [0.9, 0.3, 0.5, 0.1])
        assert res.auc == 0.75

    def test_ties_count_half(self):
        res = roc_auc_from_scores([1, 0], [0.5, 0.5])
        assert res.auc == 0.5

    def test_single_class_rejected(self):
        with pytest.raises(ValueError, match="positive and one negative"):
            roc_auc_from_scores([1, 1], [0.4, 0.2])

    @settings(max_examples=60, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32 - 1))
    def test_invariance_under_increasing_transform(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(4, 40))
        labels = rng.integers(0, 2, size=n)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        scores = rng.uniform(-1, 1, size=n)
        base = roc_auc_from_scores(labels, scores).auc
        transformed = roc_auc_from_scores(labels, np.exp(2.0 * scores)).auc
        assert base == pytest.approx(transformed, abs=1e-12)

    def test_eval_roc_auc_via_provider(self):
        pairs = [
            LabeledPair("how do birds fly?", "how do birds fly?", 1),
            LabeledPair("what is rain?", "why does it rain?", 0),
        ]
        res = eval_roc_auc(pairs, HashEmbeddingProvider(dim=8))
        assert res.auc == 1.0  # identical texts hit similarity exactly 1

    def test_label_validation(self):
        with pytest.raises(ValueError, match="label"):
            LabeledPair("a", "b", 2)


class TestCrossValidate:
    def _session_and_models(self):
        session = make_session(6, 2)
        rng = np.random.default_rng(11)
        base = rng.normal(size=(6, 12))
        other = base + rng.normal(scale=0.4, size=(6, 12))
        return (
            session,
            embeddings_for(session, base, "model-a"),
            embeddings_for(session, other, "model-b"),
        )

    def test_requires_two_models(self):
        session, a, _ = self._session_and_models()
        with pytest.raises(ValueError, match="two"):
            cross_validate([a], session)

    def test_diagonal_is_own_ip_value(self):
        session, a, b = self._session_and_models()
        cv = cross_validate([a, b], session, solver="builtin")
        for i, emb in enumerate((a, b)):
            mat = build_utility_matrix(emb, session)
            own = optimize_ip(mat, session.k, threshold_grid(mat, "exact"), solver="builtin")
            assert cv.values[i][i] == own.jr_value

    def test_identical_models_constant_grid(self):
        session, a, _ = self._session_and_models()
        twin = EmbeddingMatrix(
            vectors=a.vectors, model_id="model-a2", question_ids=a.question_ids
        )
        cv = cross_validate([a, twin], session, solver="builtin")
        flat = {v for row in cv.values for v in row}
        assert len(flat) == 1

    def test_cells_reproducible_by_oracle(self):
        session, a, b = self._session_and_models()
        cv = cross_validate([a, b], session, solver="builtin")
        matrices = [build_utility_matrix(m, session) for m in (a, b)]
        for r, mat in enumerate(matrices):
            for c in range(2):
                slate = slate_from_ids(mat, cv.slate_ids[c])
                assert cv.values[r][c] == audit_oracle(mat, slate, session.k).jr_value
