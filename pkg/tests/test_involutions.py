"""Tests for the involution calculus."""
import numpy as np
import pytest

from src.errors import GeometryError
from src.geometry import perp
from src.involutions import (
    COMMUTING, DIHEDRAL_2L, DIHEDRAL_2P, PRODUCT_P, PRODUCT_Q_MINUS, PRODUCT_Q_PLUS, PRODUCT_TWO,
    apply, dihedral_fix_h, fixed_isotropic_count, frame_commutation_check, involutions_of,
    pair_type, product_classes, tau,
)


@pytest.fixture(scope="module")
def geom(action7):
    return action7.geom


class TestInvolution:
    """Tests for single involutions tau_y."""

    def test_isotropic_pole_rejected(self, geom):
        """Test tau needs a nonisotropic pole."""
        with pytest.raises(GeometryError):
            tau(geom.point([1, 0, 0]))

    def test_order_two(self, geom):
        """Test tau_y has order 2."""
        assert tau(geom.point([0, 1, 0])).element.order() == 2

    def test_fixes_pole_and_perp(self, geom):
        """Test tau_y fixes y and every point of perp(y)."""
        y = geom.point([0, 1, 0])
        t = tau(y)
        assert apply(t, y) == y
        for index in perp(y).points[:10].tolist():
            p = geom.point_at(index)
            assert apply(t, p) == p

    def test_fixed_isotropic_count(self, geom):
        """Test Fix_H(tau_y) = q + 1."""
        assert fixed_isotropic_count(tau(geom.point([0, 1, 0]))) == 8

    def test_involutions_of_w0(self, action7):
        """Test w0 carries q^2 involutions, all in M."""
        invs = involutions_of(action7.base)
        assert len(invs) == 49
        positions = action7.stab_position(np.stack([t.matrix for t in invs[:10]]))
        assert np.all(positions >= 0)


class TestPairType:
    """Tests for the dihedral type of <t1, t2>."""

    def test_orthogonal_poles_commute(self, geom):
        """Test orthogonal poles give commuting involutions."""
        kind, order = pair_type(tau(geom.point([0, 1, 0])), tau(geom.point([1, 0, 1])))
        assert kind == COMMUTING
        assert order == 2

    def test_equal_poles_rejected(self, geom):
        """Test a pair needs two distinct poles."""
        t = tau(geom.point([0, 1, 0]))
        with pytest.raises(GeometryError):
            pair_type(t, t)

    def test_orders_divide_the_catalogue(self, action7):
        """Test products of involutions of w0 have order 2, p or dividing q +- 1."""
        invs = involutions_of(action7.base)
        for t in invs[1:15]:
            kind, order = pair_type(invs[0], t)
            if kind == DIHEDRAL_2P:
                assert order == 7
            elif kind == DIHEDRAL_2L:
                assert 8 % order == 0 or 6 % order == 0

    def test_dihedral_fix_h_commuting(self, geom):
        """Test commuting involutions fix only their frame, which has no isotropic point."""
        assert dihedral_fix_h(geom.point([0, 1, 0]), geom.point([1, 0, 1])) == 0


class TestProductClasses:
    """Tests for the batched product classification."""

    def test_labels_and_symmetry(self, action7):
        """Test labels come from the catalogue and do not depend on the order."""
        geom = action7.geom
        pts = action7.points[0].astype(np.int64)
        non = pts[geom.nonisotropic[pts]][:12]
        classes = product_classes(geom, non, non)
        allowed = {PRODUCT_TWO, PRODUCT_P, PRODUCT_Q_PLUS, PRODUCT_Q_MINUS}
        for a in range(len(non)):
            assert classes[a, a] == ''
            for b in range(len(non)):
                if a != b:
                    assert classes[a, b] in allowed
                    assert classes[a, b] == classes[b, a]

    def test_agrees_with_pair_type(self, action7):
        """Test batched labels match pair_type on individual pairs."""
        geom = action7.geom
        pts = action7.points[0].astype(np.int64)
        non = pts[geom.nonisotropic[pts]]
        ys, zs = non[:3], non[3:12]
        classes = product_classes(geom, ys, zs)
        for a, y in enumerate(ys.tolist()):
            for b, z in enumerate(zs.tolist()):
                kind, order = pair_type(tau(geom.point_at(y)), tau(geom.point_at(z)))
                label = classes[a, b]
                if kind == COMMUTING:
                    assert label == PRODUCT_TWO
                elif kind == DIHEDRAL_2P:
                    assert label == PRODUCT_P
                elif label == PRODUCT_Q_PLUS:
                    assert 8 % order == 0
                else:
                    assert label == PRODUCT_Q_MINUS
                    assert 6 % order == 0


class TestFrameCommutation:
    """Tests for the frame property of census pairs."""

    def test_frame_property_holds(self, census7):
        """Test the frame property for a few representatives."""
        for record in census7.records[:5]:
            result = frame_commutation_check(census7.action, record.rep)
            assert result.ok
