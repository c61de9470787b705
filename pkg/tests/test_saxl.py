"""Tests for the suborbit census and the base-pair engine."""
from fractions import Fraction

import numpy as np
import pytest

from src.errors import CensusError, GeometryError
from src.geometry import GRAM_IDENTITY, SHAPE_A4_PROFILE, SHAPE_SUBLINE_POLE, intersect_subplanes
from src.group import build_action, orbit_size, stabilizer_order
from src.saxl import (
    CLASS_TAGS, K_ALTERNATING, K_BOREL, K_DIHEDRAL_PLUS, K_INVOLUTION_A, K_KLEIN_A, REGULAR,
    base_pair_mask, census_checks, class_orders, classify_stabilizer, constructive_common_neighbor,
    construct_for_reps, equivariance_check, extra_fix_expected, gamma_r_closed_form,
    gamma_r_lower_bound, involution_a_count, is_base_pair, manning_prediction, oracle_agreement,
    regular_count, shared_nonisotropic, stabilizer_oracle, suborbit_census, table_one, verify_bg,
)


class TestClosedForms:
    """Tests for the table of nonregular suborbits and |Gamma_r|."""

    def test_x_vector_at_seven(self):
        """Test the predicted class counts at q = 7."""
        assert [row.x for row in table_one(7)] == [7, 7, 7, 21, 2, 20, 34, 0]

    def test_x_vector_at_eleven(self):
        """Test the d = 3 block at q = 11 has one A4 suborbit."""
        assert [row.x for row in table_one(11)] == [3, 3, 6, 19, 2, 18, 24, 1]

    @pytest.mark.parametrize("q,x6,x7,listed", [
        (9, 53, 35, (37, 51)),
        (13, 103, 77, (66, 114)),
        (17, 55, 45, (34, 66)),
    ])
    def test_involution_rows_when_four_divides_q_minus_one(self, q, x6, x7, listed):
        """Test Z2A/Z2B come from the fixed-point count and the listed pair keeps its sum."""
        rows = table_one(q)
        assert (rows[5].x, rows[6].x) == (x6, x7)
        assert (rows[5].x_listed, rows[6].x_listed) == listed
        assert x6 + x7 == sum(listed)
        assert all(row.x == row.x_listed for row in rows[:5] + rows[7:])

    @pytest.mark.parametrize("q", [7, 11])
    def test_listed_column_kept_when_q_is_three_mod_four(self, q):
        """Test the listed and counted columns agree when q = 3 mod 4."""
        assert all(row.x == row.x_listed for row in table_one(q))

    def test_involution_a_count_at_nine(self):
        """Test x6 at q = 9 from the other rows and k6 = q^2 (q+1)."""
        rows = table_one(9)
        xs = [Fraction(row.x) for row in rows]
        assert involution_a_count(9, Fraction(810), xs) == 53

    @pytest.mark.parametrize("q,expected", [(7, 5040), (9, 18000), (11, 17160), (13, 115752)])
    def test_gamma_r_closed_form(self, q, expected):
        """Test |Gamma_r| for each supported q."""
        assert gamma_r_closed_form(q) == expected

    @pytest.mark.parametrize("q", [7, 9, 11, 13])
    def test_lengths_partition_omega(self, q):
        """Test w0, the nonregular suborbits and Gamma_r partition Omega."""
        order_m = stabilizer_order(q)
        orders = class_orders(q)
        nonregular = sum(row.x * order_m // orders[row.tag] for row in table_one(q))
        assert 1 + nonregular + gamma_r_closed_form(q) == orbit_size(q)

    @pytest.mark.parametrize("q", [7, 9, 11, 13])
    def test_manning_prediction_matches_k(self, q):
        """Test the normalizer quotient sums give the k column."""
        prediction = manning_prediction(q)
        for row in table_one(q):
            assert prediction[row.tag] == row.k

    def test_gamma_r_lower_bound(self):
        """Test |Gamma_r| stays above (q^5 - q^4)/(3d)."""
        for q in (7, 9, 11, 13):
            assert gamma_r_closed_form(q) >= gamma_r_lower_bound(q)


class TestClassifyStabilizer:
    """Tests for the subgroup catalogue."""

    def test_regular(self):
        """Test the trivial stabilizer is regular."""
        assert classify_stabilizer(7, 1, 0, 336) == REGULAR

    def test_involution_split_by_normalizer(self):
        """Test Z2A and Z2B are told apart by |N_M(K)| = 2(q -+ eps)."""
        assert classify_stabilizer(7, 2, 1, 16) == K_INVOLUTION_A
        assert classify_stabilizer(7, 2, 1, 12) != K_INVOLUTION_A

    def test_klein_and_alternating(self):
        """Test D4A and A4 by order, involutions and normalizer."""
        assert classify_stabilizer(11, 4, 3, 24) == K_KLEIN_A
        assert classify_stabilizer(11, 12, 3, 24) == K_ALTERNATING

    def test_unknown_subgroup_raises(self):
        """Test a subgroup outside the catalogue raises CensusError."""
        with pytest.raises(CensusError):
            classify_stabilizer(7, 6, 3, 12)


class TestCensus:
    """Tests for the enumerated census at q = 7."""

    def test_x_vector(self, census7):
        """Test the enumerated class counts match the table."""
        assert census7.x_tuple() == (7, 7, 7, 21, 2, 20, 34, 0)

    def test_gamma_r(self, census7):
        """Test the enumerated |Gamma_r| matches the closed form."""
        assert census7.gamma_r == 5040
        assert int(census7.regular_mask().sum()) == 5040
        assert len(census7.regular_reps) == 15

    def test_suborbit_count(self, census7):
        """Test the number of nontrivial suborbits."""
        assert census7.to_dict()['suborbit_count'] == 113

    def test_fix_counts(self, census7):
        """Test Fix(K_i) equals the k column."""
        for row in census7.table:
            if row.tag in census7.fix_counts:
                assert census7.fix_counts[row.tag] == row.k

    def test_extra_fix(self, census7):
        """Test the extra subgroups fix the predicted number of subplanes."""
        expected = extra_fix_expected(7)
        for name, value in census7.extra_fix.items():
            assert value == expected[name]

    def test_all_checks_pass(self, census7):
        """Test every census check passes at q = 7."""
        for check in census_checks(census7):
            assert check.passed, check

    def test_tag_of(self, census7):
        """Test w0 has no tag and a representative carries its class."""
        borel = census7.representative(K_BOREL)
        tags = census7.tag_of([0, borel.rep])
        assert tags[0] == ''
        assert tags[1] == K_BOREL

    def test_borel_record(self, census7):
        """Test the Borel stabilizer has order 2q with q involutions."""
        borel = census7.representative(K_BOREL)
        assert borel.stabilizer_order == 14
        assert borel.length == 24
        assert borel.involutions == 7

    def test_shared_involutions(self, census7):
        """Test a dihedral neighbour shares q + 2 nonisotropic points with w0."""
        rec = census7.representative(K_DIHEDRAL_PLUS)
        assert shared_nonisotropic(census7.action, 0, rec.rep) == rec.involutions == 9

    def test_dihedral_intersection_shape(self, census7):
        """Test a D2(q+1) neighbour meets w0 in a Baer subline plus its pole."""
        action = census7.action
        rec = census7.representative(K_DIHEDRAL_PLUS)
        profile = intersect_subplanes(action.base, action.subplane(rec.rep))
        assert len(profile.points) == 9
        assert profile.isotropic_count == 0
        assert profile.shape == SHAPE_SUBLINE_POLE

    def test_intersection_needs_distinct_subplanes(self, action7):
        """Test a subplane is not profiled against itself."""
        with pytest.raises(GeometryError):
            intersect_subplanes(action7.base, action7.subplane(0))

    def test_to_dict_lists_every_class(self, census7):
        """Test the report lists each class present at q = 7."""
        classes = [row['class'] for row in census7.to_dict()['suborbits']]
        assert classes == [t for t in CLASS_TAGS if t != K_ALTERNATING] + [REGULAR]

    def test_records_carry_intersection(self, census7):
        """Test each record keeps its meet with w0 and the report lists the shapes."""
        rec = census7.representative(K_DIHEDRAL_PLUS)
        assert rec.profile.shape == SHAPE_SUBLINE_POLE
        assert rec.to_dict()['intersection'] == {'size': 9, 'isotropic': 0,
                                                 'shape': SHAPE_SUBLINE_POLE}
        row = census7.to_dict()['suborbits'][0]
        assert row['shapes'] == [SHAPE_SUBLINE_POLE]
        assert all(r.profile.shape != SHAPE_A4_PROFILE for r in census7.records)

    def test_listed_column_is_report_only(self, census7):
        """Test the published x column is recorded without deciding the run."""
        listed = [c for c in census7.checks if c.tag == 'table-one-x-listed']
        assert len(listed) == 1
        assert not listed[0].asserted
        assert listed[0].passed


class TestGramModels:
    """Tests that the census does not depend on the Gram model."""

    def test_identity_model_census_matches(self, field7, census7):
        """Test the identity model gives the same x-vector and |Gamma_r| at q = 7."""
        census = suborbit_census(build_action(field7, GRAM_IDENTITY))
        assert census.action.size == 16856
        assert census.x_tuple() == census7.x_tuple()
        assert census.gamma_r == census7.gamma_r
        assert not [c for c in census.checks if c.failed]


class TestBasePairs:
    """Tests for the base-pair predicate and its oracle."""

    def test_regular_rep_is_base_pair(self, census7):
        """Test a regular representative forms a base pair with w0."""
        action = census7.action
        rep = census7.regular_reps[0]
        assert is_base_pair(action.base, action.subplane(rep))
        assert bool(base_pair_mask(action, 0, np.array([rep]))[0])
        assert stabilizer_oracle(action, 0, rep)

    def test_nonregular_rep_is_not(self, census7):
        """Test a Klein representative is not a base pair with w0."""
        action = census7.action
        rep = census7.representative(K_KLEIN_A).rep
        assert not is_base_pair(action.base, action.subplane(rep))
        assert not stabilizer_oracle(action, 0, rep)

    def test_mask_excludes_self(self, action7):
        """Test a subplane is never its own base partner."""
        assert not base_pair_mask(action7, 0, np.array([0]))[0]

    def test_regular_count(self, action7):
        """Test |Gamma_r(w0)| by the geometric test."""
        assert regular_count(action7, 0) == 5040

    def test_oracle_agreement(self, action7):
        """Test the geometric test agrees with the stabilizer oracle."""
        check = oracle_agreement(action7, 40, seed=1)
        assert check.checked == 40
        assert check.passed

    def test_oracle_needs_distinct_subplanes(self, action7):
        """Test the oracle rejects i = j."""
        with pytest.raises(GeometryError):
            stabilizer_oracle(action7, 3, 3)

    def test_equivariance(self, action7):
        """Test Gamma_r(w0)^T_i = Gamma_r(Omega[i]) on a few samples."""
        assert equivariance_check(action7, 3, seed=2).passed


class TestBg:
    """Tests for common regular neighbours."""

    def test_verify_bg(self, census7):
        """Test every representative shares a regular neighbour with w0."""
        report = verify_bg(census7.action, census7.orbits)
        assert report.verified
        assert report.check().passed
        assert report.gamma_r == 5040

    def test_verify_bg_with_cap(self, action7):
        """Test the representative cap limits the scan."""
        report = verify_bg(action7, max_reps=5)
        assert len(report.verdicts) == 5

    def test_constructive_witness(self, census7):
        """Test the constructive finder returns a common base partner."""
        action = census7.action
        rep = census7.representative(K_INVOLUTION_A).rep
        witness = constructive_common_neighbor(action, 0, rep)
        both = base_pair_mask(action, witness.index, np.array([0, rep]))
        assert bool(both.all())

    def test_construct_for_reps(self, census7):
        """Test the Delta size check over a few representatives."""
        witnesses, check = construct_for_reps(census7, max_reps=6)
        assert len(witnesses) == 6
        assert check.passed

    def test_constructive_needs_distinct_subplanes(self, action7):
        """Test the finder rejects i1 = i2."""
        with pytest.raises(GeometryError):
            constructive_common_neighbor(action7, 4, 4)


@pytest.mark.slow
class TestCensusAtNine:
    """The census at q = 9, the first q with 4 | q - 1 (slow)."""

    def test_x_vector(self, census9):
        """Test the enumerated class counts at q = 9."""
        assert census9.x_tuple() == (9, 9, 12, 36, 2, 53, 35, 0)
        assert census9.x_tuple() == tuple(row.x for row in table_one(9))
        assert census9.gamma_r == 18000

    def test_no_asserted_check_fails(self, census9):
        """Test the census passes with the listed column as a note."""
        assert not [c for c in census_checks(census9) if c.failed]
        listed = [c for c in census9.checks if c.tag == 'table-one-x-listed'][0]
        assert listed.violation_count == 2

    def test_verify_bg(self, census9):
        """Test every representative shares a regular neighbour with w0."""
        report = verify_bg(census9.action, census9.orbits)
        assert report.verified
        assert report.gamma_r == 18000


@pytest.mark.slow
class TestCensusAtEleven:
    """The census at q = 11, where d = 3 (slow)."""

    def test_x_vector(self, census11):
        """Test the enumerated class counts at q = 11."""
        assert census11.x_tuple() == (3, 3, 6, 19, 2, 18, 24, 1)
        assert census11.gamma_r == 17160
        assert not [c for c in census_checks(census11) if c.failed]

    def test_alternating_profile(self, census11):
        """Test the A4 neighbour meets w0 in three nonisotropic points tagged A4-profile."""
        rec = census11.representative(K_ALTERNATING)
        assert rec.stabilizer_order == 12
        assert rec.to_dict()['intersection'] == {'size': 3, 'isotropic': 0,
                                                 'shape': SHAPE_A4_PROFILE}
        rows = {row['class']: row for row in census11.to_dict()['suborbits']}
        assert rows[K_ALTERNATING]['shapes'] == [SHAPE_A4_PROFILE]

    def test_verify_bg(self, census11):
        """Test every representative shares a regular neighbour with w0."""
        report = verify_bg(census11.action, census11.orbits)
        assert report.verified
        assert report.check().passed


@pytest.mark.slow
class TestCensusAtThirteen:
    """The census at q = 13, the default cap (slow)."""

    def test_x_vector(self, census13):
        """Test the enumerated class counts at q = 13."""
        assert census13.x_tuple() == (13, 13, 26, 78, 2, 103, 77, 0)
        assert census13.gamma_r == 115752

    def test_no_asserted_check_fails(self, census13):
        """Test the census passes at q = 13."""
        assert not [c for c in census13.checks if c.failed]
