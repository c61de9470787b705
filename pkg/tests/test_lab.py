"""Tests for the counting laboratory."""
from fractions import Fraction

import pytest

from src.errors import LabError
from src.lab import (
    A_ALT, A_BOREL, A_KLEIN, A_MINUS, A_ONE, A_PLUS, A_TWO, Surd, applicable, bounds_report,
    ell_criterion, enumerate_pair_quantities, nonregular_orbit_mask, nprime_formulas, pair_checks,
    run_bounds, run_pair_lab, subgroup_label, closed_form_bounds, transported_indices,
)
from src.involutions import PRODUCT_P, PRODUCT_TWO
from src.saxl import K_BOREL, K_DIHEDRAL_PLUS, K_KLEIN_B


class TestSurd:
    """Tests for exact comparison of a + b sqrt(q)."""

    def test_exact_equality(self):
        """Test 1 + sqrt(4) compares equal to 3."""
        assert Surd(4, 1, 1).sign_against(3) == 0

    def test_mixed_signs(self):
        """Test -1 + sqrt(9) = 2 against 1, 2 and 3."""
        s = Surd(9, -1, 1)
        assert s.sign_against(1) == 1
        assert s.sign_against(2) == 0
        assert s.sign_against(3) == -1

    def test_irrational(self):
        """Test sqrt(2) lies between 1 and 2."""
        s = Surd(2, 0, 1)
        assert s >= 1
        assert s <= 2
        assert not s <= 1

    def test_negative_root_part(self):
        """Test 10 - sqrt(9) >= 7 and <= 7."""
        s = Surd(9, 10, -1)
        assert s >= 7 and s <= 7

    def test_fraction_input(self):
        """Test rational parts keep exact fractions."""
        s = Surd(7, Fraction(1, 3))
        assert s.rational == Fraction(1, 3)
        assert s.to_dict()['rational'] == '1/3'


class TestFormulas:
    """Tests for the closed-form bounds."""

    def test_nprime_two(self):
        """Test n'(2) for d = 1 and d = 3."""
        assert nprime_formulas(7, 2) == Fraction(19, 2)
        assert nprime_formulas(49, 2) == 49 + Fraction(5, 2)
        assert nprime_formulas(11, 2) == Fraction(35, 6)

    def test_nprime_odd_prime(self):
        """Test n'(3) at q = 125 with q1 = 5 and d = 3."""
        assert nprime_formulas(125, 3) == Fraction(25, 3) + Fraction(1, 2)

    def test_nprime_rejects_non_prime_r(self):
        """Test r must be a prime."""
        with pytest.raises(LabError):
            nprime_formulas(49, 4)

    def test_nprime_rejects_r_not_dividing(self):
        """Test r must divide 2m."""
        with pytest.raises(LabError):
            nprime_formulas(49, 7)

    def test_nprime_rejects_non_prime_power(self):
        """Test q must be a prime power."""
        with pytest.raises(LabError):
            nprime_formulas(15, 2)

    def test_applicability(self):
        """Test sqrt(q) >= 15d decided as q >= 225 d^2."""
        assert not applicable(7)
        assert applicable(229)
        assert not applicable(227)

    def test_closed_form_bounds_keys(self):
        """Test every bound is present and exact."""
        bounds = closed_form_bounds(7)
        for key in ('common_nonregular_lower', 'A_lower', 'B_upper', 'C_upper', 'D_upper',
                    'E_t_lower', 'gamma_r_lower', 'f2_upper', 'nprime_2'):
            assert isinstance(bounds[key], Surd)
        assert bounds['C_upper'].rational == Fraction('3.85') * 7 ** 4
        assert bounds['E_t_lower'].rational == 7 ** 3 - 43

    def test_d_three_constants(self):
        """Test the d = 3 bounds at q = 11."""
        bounds = closed_form_bounds(11)
        assert bounds['D_upper'].rational == Fraction('2.503') * 11 ** 4
        assert bounds['E_t_lower'].rational == Fraction(11 ** 3 - 3 * 11 - 2, 3)
        assert bounds['B_upper'].root == Fraction(31, 27) * 11 ** 4

    def test_bounds_report(self):
        """Test the serialized bound table."""
        report = bounds_report(7)
        assert report['d'] == 1
        assert report['applicable'] is False
        assert set(report['bounds']) >= {'A_lower', 'f2_upper'}


class TestSubgroupLabel:
    """Tests for the intersection labels."""

    @pytest.mark.parametrize("order,involutions,label", [
        (1, 0, A_ONE), (2, 1, A_TWO), (4, 3, A_KLEIN), (12, 3, A_ALT),
        (14, 7, A_BOREL), (16, 9, A_PLUS), (12, 7, A_MINUS), (6, 3, 'order-6'),
    ])
    def test_labels(self, order, involutions, label):
        """Test each catalogue subgroup at q = 7."""
        assert subgroup_label(7, order, involutions) == label


class TestPairQuantities:
    """Tests for the enumerated pair quantities at q = 7."""

    def test_needs_second_subplane(self, census7):
        """Test rep 0 is rejected."""
        with pytest.raises(LabError):
            enumerate_pair_quantities(census7, 0)

    def test_regular_pair(self, census7):
        """Test a regular pair: q^2 poles each and the closed identity for E(t)."""
        rep = census7.regular_reps[0]
        ctx = enumerate_pair_quantities(census7, rep)
        assert ctx.shared == 0
        assert len(ctx.poles) == 49
        assert len(ctx.poles_prime) == 49
        for k in range(len(ctx.poles)):
            two = int(ctx.tallies[PRODUCT_TWO][k])
            p = int(ctx.tallies[PRODUCT_P][k])
            assert int(ctx.e_t[k]) == 7 * 7 * 8 + 56 * two - p
            assert two <= 1

    def test_dihedral_pair_shares_involutions(self, census7):
        """Test a D2(q+1) pair shares q + 2 poles."""
        rep = census7.representative(K_DIHEDRAL_PLUS).rep
        ctx = enumerate_pair_quantities(census7, rep)
        assert ctx.shared == 9
        assert len(ctx.poles) == 40

    def test_parts_decompose_w(self, census7):
        """Test |W| = A - B - C - D."""
        rep = census7.representative(K_KLEIN_B).rep
        ctx = enumerate_pair_quantities(census7, rep)
        p = ctx.parts
        assert ctx.w_size == p['A'] - p['B'] - p['C'] - p['D']
        assert p['A'] == ctx.e_by_subplane

    def test_cells_cover_w(self, census7):
        """Test the cells n_{j,k,l} sum to |W|."""
        rep = census7.representative(K_BOREL).rep
        ctx = enumerate_pair_quantities(census7, rep)
        assert sum(ctx.cells.values()) == ctx.w_size

    def test_pair_checks_pass(self, census7):
        """Test every asserted pair fact on one representative per class."""
        reps = [census7.representative(t).rep for t in census7.x_vector if census7.x_vector[t]]
        reps.append(census7.regular_reps[0])
        contexts = [enumerate_pair_quantities(census7, rep) for rep in reps]
        for check in pair_checks(census7, contexts):
            if check.asserted:
                assert check.passed, check


class TestTransport:
    """Tests for moving the neighbourhood of w' back to w0."""

    def test_transport_sends_rep_to_w0(self, census7):
        """Test Omega[rep] is carried onto w0."""
        rep = census7.regular_reps[0]
        assert transported_indices(census7.action, rep)[rep] == 0

    def test_nonregular_mask(self, census7):
        """Test Gamma_nr(w0) has |Omega| - 1 - |Gamma_r| members."""
        mask = nonregular_orbit_mask(census7)
        assert int(mask.sum()) == census7.action.size - 1 - census7.gamma_r
        assert not mask[0]


class TestEll:
    """Tests for the ell criterion."""

    def test_ell_rows(self, census7):
        """Test one row per representative and the diagonal value."""
        report = ell_criterion(census7, max_reps=10)
        assert len(report.rows) == 10
        assert report.diagonal == 5039
        assert report.ell == report.minimum_common - 16856 + 2 * 5040

    def test_ell_check_is_report_only(self, census7):
        """Test the ell sign never fails a run."""
        report = ell_criterion(census7, max_reps=3)
        assert not report.check().asserted
        assert not report.bound_check().asserted


class TestDrivers:
    """Tests for the lab drivers."""

    def test_run_pair_lab(self, census7):
        """Test the pair lab section and its asserted checks."""
        section, checks = run_pair_lab(census7, max_reps=8)
        assert len(section['pairs']) == 8
        classes = {row['class'] for row in section['pairs']}
        assert len(classes) == 8
        assert not [c for c in checks if c.failed]

    def test_run_bounds(self, census7):
        """Test the bound section lists n'(2) and the ell report."""
        section, checks = run_bounds(census7, max_reps=4)
        assert section['nprime'] == {'2': '19/2'}
        assert section['ell']['diagonal'] == 5039
        assert not [c for c in checks if c.failed]

    def test_parallel_matches_serial(self, census7):
        """Test results do not depend on the worker count."""
        serial, _ = run_pair_lab(census7, jobs=1, max_reps=3)
        threaded, _ = run_pair_lab(census7, jobs=3, max_reps=3)
        assert serial == threaded


@pytest.mark.slow
class TestLabAtEleven:
    """The pair lab at q = 11, where d = 3 (slow)."""

    def test_pair_checks(self, census11):
        """Test the asserted pair facts with d = 3."""
        _, checks = run_pair_lab(census11, max_reps=9)
        assert not [c for c in checks if c.failed]
