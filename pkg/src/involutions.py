"""Involutions tau_y of PSU(3,q) indexed by nonisotropic points."""
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import GeometryError, GroupError
from .geometry import BaerSubplane, GeomCtx, ProjPoint, cross, mat_mul, orthogonal_frames
from .group import GroupElement, batch_normalize

logger = logging.getLogger('baersaxl.involutions')

COMMUTING = 'commuting'
DIHEDRAL_2P = 'dihedral-2p'
DIHEDRAL_2L = 'dihedral-2l'

# Product classes used by the pair counting
PRODUCT_TWO = '2'
PRODUCT_P = 'p'
PRODUCT_Q_PLUS = 'q+1'
PRODUCT_Q_MINUS = 'q-1'


def tau_matrices(geom: GeomCtx, poles: np.ndarray) -> np.ndarray:
    """
    Matrices of x -> -x + 2(x,y)/(y,y) y for pole vectors (..., 3), acting on
    row vectors: T = -I + (2/(y,y)) l^T y with l the line coordinates of y^perp.
    """
    F = geom.field
    poles = np.asarray(poles)
    yy = geom.herm_codes(poles, poles)
    if np.any(yy == 0):
        raise GeometryError("an involution needs a nonisotropic pole")
    c = np.asarray(F.MUL[2 % F.p, F.INV[yy]])
    lines = geom.dual_of_pole(poles)
    outer = F.MUL[F.MUL[c[..., None, None], lines[..., :, None]], poles[..., None, :]]
    minus_one = F.py_neg[1]
    eye = np.where(np.eye(3, dtype=bool), minus_one, 0)
    return F.ADD[outer, eye]


class Involution:
    """tau_y for a nonisotropic pole y."""

    def __init__(self, pole: ProjPoint):
        if pole.is_isotropic():
            raise GeometryError("an involution needs a nonisotropic pole")
        self.pole = pole
        self.geom = pole.geom
        self.element = GroupElement(pole.geom, tau_matrices(pole.geom, pole.vector))

    @property
    def matrix(self) -> np.ndarray:
        return self.element.matrix

    def __eq__(self, other):
        return isinstance(other, Involution) and other.element == self.element

    def __hash__(self):
        return hash(self.element)

    def __repr__(self):
        return f"Involution(pole={self.pole!r})"


def tau(pole: ProjPoint) -> Involution:
    return Involution(pole)


def apply(inv: Involution, point: ProjPoint) -> ProjPoint:
    if inv.geom is not point.geom:
        raise GeometryError("objects belong to different geometry contexts")
    return ProjPoint(point.geom, int(point.geom.transform(point.index, inv.matrix)))


def involutions_of(w: BaerSubplane) -> List[Involution]:
    """tau_y for every nonisotropic point y of w."""
    geom = w.geom
    non = w.points[geom.nonisotropic[w.points]]
    return [Involution(ProjPoint(geom, int(i))) for i in non]


def pair_type(t1: Involution, t2: Involution) -> Tuple[str, int]:
    """Classify <t1, t2> and return the order of t1 t2."""
    if t1.pole == t2.pole:
        raise GeometryError("pair_type needs two distinct poles")
    geom = t1.geom
    F = geom.field
    prod = t1.element * t2.element
    order = prod.order(cap=2 * (F.q + 1))
    if int(geom.herm_codes(t1.pole.vector, t2.pole.vector)) == 0:
        return COMMUTING, order
    if order == F.p:
        return DIHEDRAL_2P, order
    return DIHEDRAL_2L, order


def fixed_isotropic_count(inv: Involution) -> int:
    """Fix_H(tau_y)."""
    geom = inv.geom
    perm = geom.point_perm(inv.matrix)
    fixed = perm == np.arange(geom.num_points)
    return int((fixed & geom.isotropic).sum())


def common_fixed_isotropic_count(invs: Sequence[Involution]) -> int:
    geom = invs[0].geom
    fixed = geom.isotropic.copy()
    ident = np.arange(geom.num_points)
    for inv in invs:
        fixed &= geom.point_perm(inv.matrix) == ident
    return int(fixed.sum())


def batch_power(F, mats: np.ndarray, e: int) -> np.ndarray:
    """mats**e projectively, for a batch of (k, 3, 3) matrices."""
    result = np.broadcast_to(np.eye(3, dtype=np.int64), mats.shape).copy()
    base = batch_normalize(F, mats)
    while e:
        if e & 1:
            result = batch_normalize(F, mat_mul(F, result, base))
        base = batch_normalize(F, mat_mul(F, base, base))
        e >>= 1
    return result


def _is_identity(mats: np.ndarray) -> np.ndarray:
    return np.all(mats.reshape(-1, 9) == np.array([1, 0, 0, 0, 1, 0, 0, 0, 1]), axis=1)


def product_classes(geom: GeomCtx, ys: np.ndarray, zs: np.ndarray) -> np.ndarray:
    """
    For every pair of poles (y_a, z_b) classify the order of tau_y tau_z as
    '2', 'p', 'q+1' (divides q+1) or 'q-1' (divides q-1). Returns an array of
    shape (len(ys), len(zs)) of those labels. Equal poles are labelled ''.
    """
    F = geom.field
    q = F.q
    yv = geom.points[np.asarray(ys)]
    zv = geom.points[np.asarray(zs)]
    out = np.full((len(yv), len(zv)), '', dtype=object)
    same = np.asarray(ys)[:, None] == np.asarray(zs)[None, :]

    orth = geom.herm_codes(yv[:, None, :], zv[None, :, :]) == 0
    duals_y = geom.dual_of_pole(yv)
    duals_z = geom.dual_of_pole(zv)
    u = cross(F, duals_y[:, None, :], duals_z[None, :, :])
    u_nonzero = np.any(u != 0, axis=-1)
    coperp = np.zeros_like(orth)
    if np.any(u_nonzero):
        idx = np.zeros(u.shape[:2], dtype=np.int64)
        idx[u_nonzero] = geom.index_of(u[u_nonzero])
        coperp = u_nonzero & geom.isotropic[idx]

    out[orth & ~same] = PRODUCT_TWO
    out[coperp & ~orth & ~same] = PRODUCT_P
    rest = ~orth & ~coperp & ~same
    if np.any(rest):
        ia, ib = np.nonzero(rest)
        ty = tau_matrices(geom, yv[ia])
        tz = tau_matrices(geom, zv[ib])
        prod = mat_mul(F, ty, tz)
        plus = _is_identity(batch_power(F, prod, q + 1))
        minus = _is_identity(batch_power(F, prod, q - 1))
        if not np.all(plus | minus):
            raise GroupError("a product of two involutions has order outside 2p, 2(q+1), 2(q-1)")
        out[ia[plus], ib[plus]] = PRODUCT_Q_PLUS
        out[ia[~plus], ib[~plus]] = PRODUCT_Q_MINUS
    return out


def dihedral_fix_h(y: ProjPoint, z: ProjPoint) -> int:
    """Fix_H of <tau_y, tau_z>."""
    return common_fixed_isotropic_count([Involution(y), Involution(z)])


class FrameCheck:
    """Outcome of the frame commutation property for one pair of subplanes."""

    def __init__(self, checked: int, failures: List[Tuple[int, int, int]]):
        self.checked = checked
        self.failures = failures

    @property
    def ok(self) -> bool:
        return not self.failures


def frame_commutation_check(action, rep: int,
                            frames: Optional[Sequence[Tuple[int, int, int]]] = None) -> FrameCheck:
    """
    For every orthogonal frame of w0 with no pole on Omega[rep], some
    nonisotropic point of Omega[rep] must be orthogonal to one of the poles,
    i.e. some involution of its stabilizer commutes with a frame involution.
    """
    geom = action.geom
    if frames is None:
        frames = orthogonal_frames(action.base)
    other_points = action.points[rep].astype(np.int64)
    other_mask = np.zeros(geom.num_points, dtype=bool)
    other_mask[other_points] = True
    other_non = geom.points[other_points[geom.nonisotropic[other_points]]]
    checked = 0
    failures = []
    for frame in frames:
        if other_mask[list(frame)].any():
            continue
        checked += 1
        poles = geom.points[list(frame)]
        orth = geom.herm_codes(other_non[:, None, :], poles[None, :, :]) == 0
        if not orth.any():
            failures.append(tuple(frame))
    return FrameCheck(checked, failures)
