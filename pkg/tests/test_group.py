"""Tests for the unitary group and its action on Baer subplanes."""
import numpy as np
import pytest

from src.errors import GroupError
from src.geometry import GRAM_IDENTITY, standard_subplane
from src.group import (
    GroupElement, act, act_subplane, closure, cube_criterion_report, h_matrix, orbit_size,
    psu_order, q_matrix, stabilizer_order, su3_generators, tau_matrix, transport_pair,
)


class TestOrders:
    """Tests for the closed-form orders."""

    def test_psu_order(self):
        """Test |PSU(3,7)| and |PSU(3,11)|."""
        assert psu_order(7) == 5663616
        assert psu_order(11) == 11 ** 3 * 120 * 1332 // 3

    def test_orbit_times_stabilizer(self):
        """Test |Omega| |M| = |G| for the supported q."""
        for q in (7, 9, 11, 13):
            assert orbit_size(q) * stabilizer_order(q) == psu_order(q)


class TestGroupElement:
    """Tests for projective matrices."""

    def test_generators_are_unitary(self, action7):
        """Test every SU(3,q) generator preserves the form."""
        for g in action7.gens:
            assert g.is_unitary()

    def test_normalization_ignores_scalars(self, action7):
        """Test a scalar multiple normalizes to the same element."""
        F = action7.field
        g = action7.gens[0]
        scaled = GroupElement(action7.geom, F.MUL[F.xi, g.matrix])
        assert scaled == g

    def test_inverse(self, action7):
        """Test g * g^-1 is the identity."""
        for g in action7.gens:
            assert (g * g.inverse()).is_identity()

    def test_tau_is_an_involution(self, action7):
        """Test the anti-diagonal generator has order 2."""
        assert tau_matrix(action7.geom).order() == 2

    def test_unipotent_order_is_p(self, action7):
        """Test q(a, b) has order p."""
        g = action7.gens[0]
        assert g.order() == 7

    def test_h_xi_order(self, action7):
        """Test h(xi) has projective order dividing q^2 - 1."""
        h = h_matrix(action7.geom, action7.field.xi)
        assert 48 % h.order(cap=48) == 0

    def test_order_cap(self, action7):
        """Test exceeding the cap raises GroupError."""
        with pytest.raises(GroupError):
            action7.gens[0].order(cap=3)

    def test_power(self, action7):
        """Test g^-1 and g^(p-1) agree for a unipotent element."""
        g = action7.gens[0]
        assert g ** -1 == g ** 6

    def test_bad_shape(self, action7):
        """Test a group element needs nine entries."""
        with pytest.raises(GroupError):
            GroupElement(action7.geom, [1, 0, 0, 1])

    def test_q_matrix_unitarity_condition(self, action7):
        """Test q(0, b) is unitary only when b + conj(b) = 0."""
        F = action7.field
        assert q_matrix(action7.geom, 0, F.i_elem).is_unitary()
        assert not q_matrix(action7.geom, 0, 1).is_unitary()

    def test_generators_need_antidiag(self, field7):
        """Test su3_generators rejects the identity model."""
        from src.geometry import GeomCtx
        with pytest.raises(GroupError):
            su3_generators(GeomCtx(field7, GRAM_IDENTITY))

    def test_closure_limit(self, action7):
        """Test a closure beyond the limit raises GroupError."""
        with pytest.raises(GroupError):
            closure(action7.gens, limit=100)

    def test_closure_of_tau(self, action7):
        """Test the closure of tau has two elements."""
        assert len(closure([tau_matrix(action7.geom)])) == 2


class TestAction:
    """Tests for the enumerated orbit of w0."""

    def test_orbit_size(self, action7):
        """Test |Omega| = q^2 (q^3 + 1)/d at q = 7."""
        assert action7.size == 16856

    def test_stabilizer_order(self, action7):
        """Test |M| = q (q^2 - 1)."""
        assert len(action7.stab) == 336

    def test_w0_is_first(self, action7):
        """Test Omega[0] is the standard subplane."""
        assert action7.index_of(standard_subplane(action7.geom)) == 0

    def test_transversal_maps_w0(self, action7):
        """Test T_i maps w0 onto Omega[i]."""
        for i in (1, 100, 5000, action7.size - 1):
            image = act_subplane(action7.element(i), action7.base)
            assert np.array_equal(image.points, action7.points[i])

    def test_lookup_of_generator_images(self, action7):
        """Test the orbit is closed under every generator."""
        idx = np.arange(0, action7.size, 97)
        for perm in action7.gen_perms:
            images = action7.image_indices(idx, perm)
            assert np.all(images >= 0)

    def test_stabilizer_fixes_w0(self, action7):
        """Test every element of M fixes w0."""
        for k in range(0, len(action7.stab), 17):
            assert bool(action7.fixed_mask(action7.stab_perm(k), [0])[0])

    def test_stabilizer_involution_count(self, action7):
        """Test M = PGL(2,q) has q^2 involutions."""
        assert int(action7.stab_involutions.sum()) == 49

    def test_stabilizer_within(self, action7):
        """Test the stabilizer of w0 inside M is all of M."""
        assert len(action7.stabilizer_within(0)) == 336

    def test_act_on_point(self, action7):
        """Test act agrees with the point permutation."""
        g = action7.gens[1]
        point = action7.geom.point_at(123)
        assert act(g, point).index == int(action7.geom.point_perm(g.matrix)[123])

    def test_transport_pair(self, action7):
        """Test transport_pair maps (Omega[i], X) to (w0, <e1>)."""
        geom = action7.geom
        i = 321
        pts = action7.points[i]
        iso = int(pts[geom.isotropic[pts]][0])
        g = transport_pair(action7, i, geom.point_at(iso))
        assert act(g, geom.point_at(iso)).index == int(geom.index_of(np.array([1, 0, 0])))
        image = act_subplane(g, action7.subplane(i))
        assert action7.index_of(image) == 0

    def test_transport_pair_needs_isotropic_point(self, action7):
        """Test a nonisotropic point is rejected."""
        geom = action7.geom
        pts = action7.points[5]
        non = int(pts[geom.nonisotropic[pts]][0])
        with pytest.raises(GroupError):
            transport_pair(action7, 5, geom.point_at(non))


class TestCubeCriterion:
    """Tests for the frame-subplane cube criterion report."""

    def test_in_orbit_count(self, action7):
        """Test (q + 1)^2/d frame subplanes lie in the orbit."""
        report = cube_criterion_report(action7)
        assert report.total == 64
        assert report.in_orbit == 64
        count, literal = report.checks()
        assert count.passed
        assert not literal.asserted
