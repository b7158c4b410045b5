import numpy as np
import pytest

from slateaudit.model import (
    AuditReport,
    Question,
    Session,
    Slate,
    SlateMember,
    jr_value_from_coalition,
    slate_from_indices,
    slate_utility,
    slate_values,
)

from helpers import make_matrix, make_session


class TestQuestion:
    def test_blank_text_rejected(self):
        with pytest.raises(ValueError, match="text is empty"):
            Question(id="q1", text="   \n")

    def test_empty_id_rejected(self):
        with pytest.raises(ValueError):
            Question(id="", text="why?")


class TestSession:
    def test_defaults_n_to_m(self):
        s = make_session(5, 2)
        assert s.n == 5 and s.m == 5

    def test_k_exceeds_m(self):
        with pytest.raises(ValueError, match="k exceeds question count"):
            make_session(3, 4)

    def test_duplicate_ids(self):
        qs = (Question(id="a", text="x?"), Question(id="a", text="y?"))
        with pytest.raises(ValueError, match="duplicate question ids"):
            Session(questions=qs, k=1)

    def test_sibling_group_unknown_id(self):
        with pytest.raises(ValueError, match="unknown ids"):
            make_session(3, 2, sibling_groups=(frozenset({"q000", "zzz"}),))

    def test_sibling_groups_disjoint(self):
        with pytest.raises(ValueError, match="not disjoint"):
            make_session(
                4,
                2,
                sibling_groups=(
                    frozenset({"q000", "q001"}),
                    frozenset({"q001", "q002"}),
                ),
            )

    def test_sibling_group_too_small(self):
        with pytest.raises(ValueError, match="smaller than 2"):
            make_session(3, 2, sibling_groups=(frozenset({"q000"}),))

    def test_human_slate_unknown_id(self):
        with pytest.raises(ValueError, match="unknown ids"):
            make_session(3, 2, human_slate=("q000", "nope"))

    def test_explicit_n_requires_matching_authors(self):
        qs = (
            Question(id="a", author_id="alice", text="x?"),
            Question(id="b", author_id="alice", text="y?"),
            Question(id="c", author_id="bob", text="z?"),
        )
        s = Session(questions=qs, k=2, n_explicit=2)
        assert s.n == 2
        assert s.participant_ids() == ("alice", "bob")
        assert s.owned_question_indices() == ((0, 1), (2,))
        with pytest.raises(ValueError, match="distinct authors"):
            Session(questions=qs, k=2, n_explicit=5)


class TestUtilityMatrix:
    def test_rejects_negative(self):
        with pytest.raises(ValueError, match="negative"):
            make_matrix([[0.2, -0.1]])

    def test_rejects_nan(self):
        with pytest.raises(ValueError, match="non-finite"):
            make_matrix([[0.2, np.nan]])

    def test_immutable(self):
        mat = make_matrix([[0.1, 0.2]])
        with pytest.raises(ValueError):
            mat.values[0, 0] = 7.0

    def test_column_lookup(self):
        mat = make_matrix([[0.1, 0.2]])
        assert mat.column("q001").tolist() == [0.2]
        with pytest.raises(KeyError):
            mat.column_index("missing")


class TestSlateUtility:
    def test_max_of_two(self):
        mat = make_matrix([[0.3, 0.7]])
        slate = slate_from_indices(mat, [0, 1])
        assert slate_utility(mat, slate, 0) == 0.7

    def test_singleton(self):
        mat = make_matrix([[0.42]])
        slate = slate_from_indices(mat, [0])
        assert slate_utility(mat, slate, 0) == 0.42

    def test_all_zero(self):
        mat = make_matrix([[0.0, 0.0]])
        slate = slate_from_indices(mat, [0, 1])
        assert slate_utility(mat, slate, 0) == 0.0

    def test_empty_slate_rejected(self):
        with pytest.raises(ValueError, match="empty slate"):
            Slate(members=())

    def test_participant_out_of_range(self):
        mat = make_matrix([[0.3, 0.7]])
        slate = slate_from_indices(mat, [0])
        with pytest.raises(IndexError):
            slate_utility(mat, slate, 5)

    def test_external_member_column(self):
        mat = make_matrix([[0.3], [0.1]])
        slate = Slate(
            members=(SlateMember(question_id="x", utilities=(0.9, 0.0)),),
            provenance="llm",
        )
        assert slate_values(mat, slate).tolist() == [0.9, 0.0]

    def test_external_member_wrong_length(self):
        mat = make_matrix([[0.3], [0.1]])
        slate = Slate(members=(SlateMember(question_id="x", utilities=(0.9,)),))
        with pytest.raises(ValueError, match="expected 2"):
            slate_values(mat, slate)

    def test_duplicate_members_rejected(self):
        mat = make_matrix([[0.3, 0.7]])
        with pytest.raises(ValueError, match="duplicate"):
            slate_from_indices(mat, [1, 1])


class TestJrValueFromCoalition:
    def test_zero_coalition(self):
        assert jr_value_from_coalition(0, 10, 3) == 0.0

    def test_table_row_value(self):
        # c=3, n=57, k=8 -> 24/57 ~ 0.421
        assert jr_value_from_coalition(3, 57, 8) == 24 / 57

    def test_whole_population(self):
        assert jr_value_from_coalition(20, 20, 4) == 4.0

    def test_invalid_n_k(self):
        with pytest.raises(ValueError):
            jr_value_from_coalition(1, 0, 3)
        with pytest.raises(ValueError):
            jr_value_from_coalition(1, 3, 0)
        with pytest.raises(ValueError):
            jr_value_from_coalition(5, 3, 1)

    def test_linear_in_c(self):
        # exact rational oracle: c*k/n rounds once, so it must equal the
        # correctly-rounded value of the fraction
        from fractions import Fraction

        for c in range(58):
            assert jr_value_from_coalition(c, 57, 8) == float(Fraction(c * 8, 57))


class TestAuditReport:
    def test_consistency_enforced(self):
        with pytest.raises(ValueError, match="jr_value"):
            AuditReport(jr_value=0.5, max_coalition_size=2, n=4, k=2, algorithm="fast")

    def test_satisfies_jr_boundary(self):
        at_one = AuditReport(
            jr_value=1.0, max_coalition_size=2, n=4, k=2, algorithm="fast"
        )
        assert not at_one.satisfies_jr
        below = AuditReport(
            jr_value=0.5, max_coalition_size=1, n=4, k=2, algorithm="fast"
        )
        assert below.satisfies_jr
