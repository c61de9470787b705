"""The Hermitian projective plane PG(2,q^2) and its Baer subplanes."""
import logging
from collections import Counter
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import GeometryError
from .field import FieldCtx, FieldElement

logger = logging.getLogger('baersaxl.geometry')

# Built-in Gram models
GRAM_IDENTITY = 'identity'
GRAM_ANTIDIAG = 'antidiag'
GRAM_MODELS = (GRAM_IDENTITY, GRAM_ANTIDIAG)

ISOTROPIC = 'isotropic'
NONISOTROPIC = 'nonisotropic'

# Intersection shape tags
SHAPE_EMPTY = 'empty'
SHAPE_ONE_ISOTROPIC = 'one-isotropic'
SHAPE_ONE_NONISOTROPIC = 'one-nonisotropic'
SHAPE_THREE_NONISOTROPIC = 'three-nonisotropic'
SHAPE_Q_SET = 'q-set'
SHAPE_SUBLINE = 'subline(q+1)'
SHAPE_SUBLINE_POLE = 'subline-plus-pole(q+2)'
SHAPE_A4_PROFILE = 'A4-profile'
SHAPE_OTHER = 'other'


# -- vector and matrix helpers over F_{q^2} -----------------------------------
# All helpers take code arrays with trailing shape (3,) or (3, 3) and broadcast
# over any leading batch axes.

def vec_mat(F: FieldCtx, x, A):
    """Row vector(s) times matrix: (..., 3) x (..., 3, 3) -> (..., 3)."""
    x = np.asarray(x)
    A = np.asarray(A)
    cols = [F.dot(x, A[..., :, c]) for c in range(3)]
    return np.stack(cols, axis=-1)


def mat_mul(F: FieldCtx, A, B):
    A = np.asarray(A)
    B = np.asarray(B)
    shape = np.broadcast_shapes(A.shape, B.shape)
    out = np.empty(shape, dtype=np.int64)
    for r in range(3):
        for c in range(3):
            out[..., r, c] = F.dot(A[..., r, :], B[..., :, c])
    return out


def mat_adjugate(F: FieldCtx, A):
    """Classical adjugate; a scalar multiple of the inverse."""
    A = np.asarray(A)
    out = np.empty(A.shape, dtype=np.int64)
    for i in range(3):
        for j in range(3):
            a = F.MUL[A[..., (j + 1) % 3, (i + 1) % 3], A[..., (j + 2) % 3, (i + 2) % 3]]
            b = F.MUL[A[..., (j + 1) % 3, (i + 2) % 3], A[..., (j + 2) % 3, (i + 1) % 3]]
            out[..., i, j] = F.SUB[a, b]
    return out


def mat_det(F: FieldCtx, A):
    A = np.asarray(A)
    adj = mat_adjugate(F, A)
    return F.dot(A[..., 0, :], adj[..., :, 0])


def mat_inverse(F: FieldCtx, A):
    det = mat_det(F, A)
    if np.any(det == 0):
        raise GeometryError("singular matrix")
    adj = mat_adjugate(F, A)
    return F.MUL[adj, F.INV[det][..., None, None]]


def conj_transpose(F: FieldCtx, A):
    return F.CONJ[np.swapaxes(np.asarray(A), -1, -2)]


def cross(F: FieldCtx, x, y):
    """Coordinates of the line through two points (or the point on two lines)."""
    x = np.asarray(x)
    y = np.asarray(y)
    comps = []
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        comps.append(F.SUB[F.MUL[x[..., j], y[..., k]], F.MUL[x[..., k], y[..., j]]])
    return np.stack(comps, axis=-1)


def gram_matrix(F: FieldCtx, kind: str) -> np.ndarray:
    if kind == GRAM_IDENTITY:
        return np.eye(3, dtype=np.int64)
    if kind == GRAM_ANTIDIAG:
        return np.eye(3, dtype=np.int64)[::-1].copy()
    raise GeometryError(f"unknown Gram model: {kind}")


def _as_codes(F: FieldCtx, vec) -> np.ndarray:
    if isinstance(vec, ProjPoint):
        return vec.vector
    out = []
    for c in vec:
        if isinstance(c, FieldElement):
            if c.ctx is not F:
                raise GeometryError("coordinate from a different field")
            out.append(c.code)
        else:
            out.append(int(c))
    return np.array(out, dtype=np.int64)


class GeomCtx:
    """
    PG(2,q^2) with a fixed Hermitian Gram matrix.

    Points are stored once, normalized so the first nonzero coordinate is 1,
    in the order (0,0,1), (0,1,b), (1,a,b) with a, b running over element codes.
    """

    def __init__(self, field: FieldCtx, gram: str = GRAM_ANTIDIAG):
        self.field = field
        self.gram_kind = gram
        self.gram = gram_matrix(field, gram)
        F = field
        Q = F.order
        q = F.q

        codes = np.arange(Q, dtype=np.int64)
        head = np.array([[0, 0, 1]], dtype=np.int64)
        line_at_inf = np.stack([np.zeros(Q, dtype=np.int64), np.ones(Q, dtype=np.int64), codes], axis=1)
        aa, bb = np.meshgrid(codes, codes, indexing='ij')
        affine = np.stack([np.ones(Q * Q, dtype=np.int64), aa.ravel(), bb.ravel()], axis=1)
        self.points = np.concatenate([head, line_at_inf, affine])
        self.num_points = len(self.points)

        self.herm_diag = self.herm_codes(self.points, self.points)
        self.isotropic = self.herm_diag == 0
        self.nonisotropic = ~self.isotropic
        self.index_dtype = np.int16 if self.num_points < 2 ** 15 else np.int32

        rng = np.random.default_rng([F.p, F.m, 0x5EED])
        self.point_weights = rng.integers(1, 2 ** 63, size=self.num_points, dtype=np.int64).astype(np.uint64)

        # Normalized F_q-triples: each gives one point of a subplane from its basis
        fq = F.subfield_codes
        f1, f2 = np.meshgrid(fq, fq, indexing='ij')
        affine_q = np.stack([np.ones(q * q, dtype=np.int64), f1.ravel(), f2.ravel()], axis=1)
        inf_q = np.stack([np.zeros(q, dtype=np.int64), np.ones(q, dtype=np.int64), fq], axis=1)
        self.fq_triples = np.concatenate([np.array([[0, 0, 1]]), inf_q, affine_q])

        logger.debug("geometry over F_%d (%s): %d points, %d isotropic",
                     Q, gram, self.num_points, int(self.isotropic.sum()))

    # -- point indexing -------------------------------------------------------

    def index_of(self, coords) -> np.ndarray:
        """Normalize homogeneous coordinates and return point indices."""
        F = self.field
        Q = F.order
        c = np.asarray(coords, dtype=np.int64)
        x0, x1, x2 = c[..., 0], c[..., 1], c[..., 2]
        pivot = np.where(x0 != 0, x0, np.where(x1 != 0, x1, x2))
        if np.any(pivot == 0):
            raise GeometryError("the zero vector is not a projective point")
        inv = F.INV[pivot]
        y1 = F.MUL[x1, inv]
        y2 = F.MUL[x2, inv]
        return np.where(x0 != 0, 1 + Q + y1 * Q + y2, np.where(x1 != 0, 1 + y2, 0))

    def point(self, coords) -> 'ProjPoint':
        return ProjPoint(self, int(self.index_of(_as_codes(self.field, coords))))

    def point_at(self, index: int) -> 'ProjPoint':
        return ProjPoint(self, int(index))

    def transform(self, indices, mat) -> np.ndarray:
        """Images of points under x -> x.mat (row-vector convention)."""
        return self.index_of(vec_mat(self.field, self.points[indices], np.asarray(mat)))

    def point_perm(self, mat) -> np.ndarray:
        """The permutation of all points induced by a matrix."""
        return self.transform(np.arange(self.num_points), mat).astype(self.index_dtype)

    # -- hermitian form -------------------------------------------------------

    def herm_codes(self, xs, ys):
        """(x, y) = x G conj(y)^T on code arrays (..., 3)."""
        F = self.field
        ys_bar = F.CONJ[np.asarray(ys)]
        gy = np.stack([F.dot(self.gram[i], ys_bar) for i in range(3)], axis=-1)
        return F.dot(np.asarray(xs), gy)

    def dual_of_pole(self, vec) -> np.ndarray:
        """Line coordinates l with x in perp(vec) iff sum x_i l_i = 0."""
        F = self.field
        vbar = F.CONJ[np.asarray(vec)]
        return np.stack([F.dot(self.gram[i], vbar) for i in range(3)], axis=-1)

    def set_key(self, points) -> int:
        """Order-independent 64-bit key of a point set."""
        return int(np.sum(self.point_weights[np.asarray(points)], dtype=np.uint64))

    def set_keys(self, rows) -> np.ndarray:
        return self.point_weights[np.asarray(rows)].sum(axis=-1, dtype=np.uint64)

    def points_on(self, dual) -> np.ndarray:
        mask = self.field.dot(self.points, np.asarray(dual)) == 0
        return np.flatnonzero(mask)

    def __repr__(self):
        return f"GeomCtx(q={self.field.q}, gram={self.gram_kind})"


class ProjPoint:
    """A point of PG(2,q^2), identified by its index in the context."""

    __slots__ = ('geom', 'index')

    def __init__(self, geom: GeomCtx, index: int):
        self.geom = geom
        self.index = index

    @property
    def vector(self) -> np.ndarray:
        return self.geom.points[self.index]

    @property
    def coords(self) -> Tuple[FieldElement, FieldElement, FieldElement]:
        F = self.geom.field
        return tuple(FieldElement(F, int(c)) for c in self.vector)

    def is_isotropic(self) -> bool:
        return bool(self.geom.isotropic[self.index])

    def __eq__(self, other):
        return isinstance(other, ProjPoint) and other.geom is self.geom and other.index == self.index

    def __hash__(self):
        return hash((id(self.geom), self.index))

    def __repr__(self):
        return f"ProjPoint({[int(c) for c in self.vector]})"


class Line:
    """A line of PG(2,q^2) with its point set."""

    def __init__(self, geom: GeomCtx, dual):
        self.geom = geom
        self.dual_index = int(geom.index_of(dual))
        self.dual = geom.points[self.dual_index]
        self.points = geom.points_on(self.dual)

    def __contains__(self, point: ProjPoint) -> bool:
        return bool(self.geom.field.dot(point.vector, self.dual) == 0)

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        return isinstance(other, Line) and other.geom is self.geom and other.dual_index == self.dual_index

    def __hash__(self):
        return hash((id(self.geom), 'line', self.dual_index))

    def isotropic_count(self) -> int:
        return int(self.geom.isotropic[self.points].sum())


class BaerSubplane:
    """An F_q-form of the plane, given by a basis and its cached point set."""

    def __init__(self, geom: GeomCtx, basis, points: np.ndarray):
        self.geom = geom
        self.basis = np.asarray(basis, dtype=np.int64)
        self.points = np.sort(np.asarray(points)).astype(geom.index_dtype)
        self.key = geom.set_key(self.points)
        self._mask = None

    @property
    def mask(self) -> np.ndarray:
        if self._mask is None:
            self._mask = np.zeros(self.geom.num_points, dtype=bool)
            self._mask[self.points] = True
        return self._mask

    def __contains__(self, point: ProjPoint) -> bool:
        return bool(self.mask[point.index])

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        return (isinstance(other, BaerSubplane) and other.geom is self.geom
                and other.key == self.key and np.array_equal(other.points, self.points))

    def __hash__(self):
        return hash(self.key)

    def to_dict(self) -> Dict:
        return {
            'basis': [[list(map(int, self.geom.field.DIGITS[c])) for c in row] for row in self.basis],
            'key': f"{self.key:016x}",
        }

    def __repr__(self):
        return f"BaerSubplane(key={self.key:016x}, points={len(self.points)})"


# -- operations -----------------------------------------------------------------

def _check_ctx(geom: GeomCtx, *items) -> None:
    for item in items:
        if isinstance(item, (ProjPoint, BaerSubplane, Line)) and item.geom is not geom:
            raise GeometryError("objects belong to different geometry contexts")


def herm(geom: GeomCtx, x, y) -> FieldElement:
    """The Hermitian form (x, y), sesquilinear in the second argument."""
    _check_ctx(geom, x, y)
    F = geom.field
    return FieldElement(F, int(geom.herm_codes(_as_codes(F, x), _as_codes(F, y))))


def classify_point(point: ProjPoint) -> str:
    return ISOTROPIC if point.is_isotropic() else NONISOTROPIC


class PointCensus:
    """All points of the plane split by isotropy."""

    def __init__(self, geom: GeomCtx):
        self.geom = geom
        self.isotropic = np.flatnonzero(geom.isotropic)
        self.nonisotropic = np.flatnonzero(geom.nonisotropic)
        self.total = geom.num_points

    def to_dict(self) -> Dict:
        return {'total': self.total, 'isotropic': len(self.isotropic),
                'nonisotropic': len(self.nonisotropic)}


def enumerate_points(geom: GeomCtx) -> PointCensus:
    return PointCensus(geom)


def perp(point: ProjPoint) -> Line:
    """The line PG(v^perp)."""
    return Line(point.geom, point.geom.dual_of_pole(point.vector))


def line_through(p1: ProjPoint, p2: ProjPoint) -> Line:
    if p1.geom is not p2.geom:
        raise GeometryError("objects belong to different geometry contexts")
    if p1 == p2:
        raise GeometryError("a line needs two distinct points")
    return Line(p1.geom, cross(p1.geom.field, p1.vector, p2.vector))


def span_points(geom: GeomCtx, basis) -> np.ndarray:
    """Point indices of <sum a_i alpha_i>, a_i in F_q."""
    return geom.index_of(vec_mat(geom.field, geom.fq_triples, np.asarray(basis)[None, :, :]))


def iso_matrix(geom: GeomCtx, basis) -> np.ndarray:
    basis = np.asarray(basis)
    return geom.herm_codes(basis[:, None, :], basis[None, :, :])


def subplane_from_basis(geom: GeomCtx, basis, validate: bool = True) -> BaerSubplane:
    """
    Build the subplane PG(<alpha_1, alpha_2, alpha_3>_{F_q}).

    Raises GeometryError when the basis is not a unitary F_q-form, i.e. when
    the vectors are dependent or their Gram matrix is not in GL(3,q).
    """
    F = geom.field
    basis = np.array([_as_codes(F, row) for row in basis], dtype=np.int64)
    if basis.shape != (3, 3):
        raise GeometryError("a subplane basis has three vectors of length three")
    if validate:
        if int(mat_det(F, basis)) == 0:
            raise GeometryError("not a unitary F_q-form: basis vectors are dependent")
        iso = iso_matrix(geom, basis)
        if not np.all(F.in_subfield_code(iso)) or int(mat_det(F, iso)) == 0:
            raise GeometryError("not a unitary F_q-form: Gram matrix is not in GL(3,q)")
    points = np.unique(span_points(geom, basis))
    q = F.q
    if len(points) != q * q + q + 1:
        raise GeometryError(f"span has {len(points)} points, expected {q * q + q + 1}")
    return BaerSubplane(geom, basis, points)


def standard_subplane(geom: GeomCtx) -> BaerSubplane:
    """w0 = PG(<e1, e2, e3>_{F_q})."""
    return subplane_from_basis(geom, np.eye(3, dtype=np.int64))


def subplane_contains(w: BaerSubplane, point: ProjPoint) -> bool:
    """Membership via the F_q-rationality of (a.P, beta_j) for some scalar a."""
    _check_ctx(w.geom, w, point)
    geom = w.geom
    F = geom.field
    scalars = F.EXP[:F.q + 1]
    scaled = F.MUL[scalars[:, None], point.vector[None, :]]
    values = geom.herm_codes(scaled[:, None, :], w.basis[None, :, :])
    return bool(np.any(np.all(F.in_subfield_code(values), axis=1)))


class IntersectionProfile:
    """Exact intersection of two subplanes with its isotropy census."""

    def __init__(self, geom: GeomCtx, points: np.ndarray):
        self.points = np.asarray(points)
        self.isotropic_count = int(geom.isotropic[self.points].sum())
        self.nonisotropic_count = len(self.points) - self.isotropic_count
        self.shape = intersection_shape(len(self.points), self.isotropic_count, geom.field.q)

    def to_dict(self) -> Dict:
        return {'size': len(self.points), 'isotropic': self.isotropic_count, 'shape': self.shape}

    def __repr__(self):
        return f"IntersectionProfile({self.shape}, size={len(self.points)})"


def intersection_shape(size: int, isotropic: int, q: int) -> str:
    """Shape tag from point counts alone."""
    nonisotropic = size - isotropic
    if size == 0:
        return SHAPE_EMPTY
    if size == 1:
        return SHAPE_ONE_ISOTROPIC if isotropic else SHAPE_ONE_NONISOTROPIC
    if nonisotropic == q and isotropic == 1:
        return SHAPE_Q_SET
    if size == q + 2:
        return SHAPE_SUBLINE_POLE
    if size == q + 1:
        return SHAPE_SUBLINE
    if size == 3 and isotropic == 0:
        return SHAPE_THREE_NONISOTROPIC
    return SHAPE_OTHER


def intersect_subplanes(w1: BaerSubplane, w2: BaerSubplane) -> IntersectionProfile:
    if w1.geom is not w2.geom:
        raise GeometryError("objects belong to different geometry contexts")
    if w1 == w2:
        raise GeometryError("cannot profile a subplane against itself")
    common = np.intersect1d(w1.points, w2.points, assume_unique=True)
    return IntersectionProfile(w1.geom, common)


def baer_subline(p1: ProjPoint, p2: ProjPoint, p3: ProjPoint) -> np.ndarray:
    """The unique Baer subline through three distinct collinear points."""
    geom = p1.geom
    F = geom.field
    _check_ctx(geom, p2, p3)
    if len({p1.index, p2.index, p3.index}) != 3:
        raise GeometryError("a Baer subline needs three distinct points")
    if int(F.dot(cross(F, p1.vector, p2.vector), p3.vector)) != 0:
        raise GeometryError("points are not collinear")
    v1, v2, v3 = p1.vector, p2.vector, p3.vector
    # solve v3 = a v1 + b v2 on two coordinates where v1, v2 are independent
    for i, j in ((0, 1), (0, 2), (1, 2)):
        det = F.SUB[F.MUL[v1[i], v2[j]], F.MUL[v1[j], v2[i]]]
        if det:
            inv = F.INV[det]
            a = F.MUL[F.SUB[F.MUL[v3[i], v2[j]], F.MUL[v3[j], v2[i]]], inv]
            b = F.MUL[F.SUB[F.MUL[v1[i], v3[j]], F.MUL[v1[j], v3[i]]], inv]
            break
    u1 = F.MUL[a, v1]
    u2 = F.MUL[b, v2]
    fq = F.subfield_codes
    combos = F.ADD[F.MUL[fq[:, None], u1[None, :]], u2[None, :]]
    return np.unique(np.concatenate([[int(geom.index_of(u1))], geom.index_of(combos)]))


def line_profile_through(w: BaerSubplane, point: ProjPoint) -> Counter:
    """How many points of w each line through an outside point carries."""
    geom = w.geom
    F = geom.field
    duals = geom.index_of(cross(F, np.broadcast_to(point.vector, (len(w.points), 3)), geom.points[w.points]))
    per_line = Counter(np.bincount(duals)[np.unique(duals)].tolist())
    missing = F.q ** 2 + 1 - len(np.unique(duals))
    if missing:
        per_line[0] += missing
    return per_line


def orthogonal_frames(w: BaerSubplane) -> List[Tuple[int, int, int]]:
    """All triples of pairwise orthogonal nonisotropic points of w."""
    geom = w.geom
    F = geom.field
    non = w.points[geom.nonisotropic[w.points]].astype(np.int64)
    vecs = geom.points[non]
    gram = geom.herm_codes(vecs[:, None, :], vecs[None, :, :])
    frames = set()
    ii, jj = np.nonzero(np.triu(gram == 0, k=1))
    if len(ii):
        duals_i = geom.dual_of_pole(vecs[ii])
        duals_j = geom.dual_of_pole(vecs[jj])
        third = geom.index_of(cross(F, duals_i, duals_j))
        for a, b, c in zip(non[ii].tolist(), non[jj].tolist(), third.tolist()):
            frames.add(tuple(sorted((a, b, c))))
    return sorted(frames)


def frame_vectors(geom: GeomCtx, frame: Sequence[int], w: Optional[BaerSubplane] = None) -> np.ndarray:
    """
    Representative vectors of a frame, scaled into the F_q-form of w when given
    (so that the Gram matrix of the frame has entries in F_q).
    """
    F = geom.field
    vecs = geom.points[list(frame)].copy()
    if w is not None:
        for r in range(3):
            for s in F.EXP[:F.q + 1]:
                cand = F.MUL[s, vecs[r]]
                vals = geom.herm_codes(cand[None, :], w.basis)
                if np.all(F.in_subfield_code(vals)):
                    vecs[r] = cand
                    break
    return vecs


def frame_subplanes(geom: GeomCtx, vectors) -> List[Tuple[Tuple[int, int], BaerSubplane]]:
    """
    Every subplane <alpha, b'beta, c'gamma>_{F_q} containing an orthogonal frame,
    with b', c' running over xi^0..xi^q (representatives of F_{q^2}^*/F_q^*).
    """
    F = geom.field
    vectors = np.asarray(vectors)
    out = []
    for j in range(F.q + 1):
        for k in range(F.q + 1):
            basis = np.stack([vectors[0],
                              F.MUL[F.EXP[j], vectors[1]],
                              F.MUL[F.EXP[k], vectors[2]]])
            out.append(((j, k), subplane_from_basis(geom, basis)))
    return out


class GramConverter:
    """
    Congruence between the anti-diagonal and identity Gram models.

    U has rows orthonormal for the anti-diagonal form, found by a deterministic
    Gram-Schmidt pass over points in index order. A vector x in anti-diagonal
    coordinates corresponds to x.U^-1 in identity coordinates.
    """

    def __init__(self, field: FieldCtx):
        self.field = field
        self.antidiag = GeomCtx(field, GRAM_ANTIDIAG)
        self.identity = GeomCtx(field, GRAM_IDENTITY)
        self.U = self._orthonormal_rows()
        self.U_inv = mat_inverse(field, self.U)

    def _orthonormal_rows(self) -> np.ndarray:
        geom = self.antidiag
        F = self.field
        rows = []
        candidates = np.arange(geom.num_points)
        for _ in range(3):
            mask = geom.nonisotropic[candidates]
            for prev in rows:
                mask &= geom.herm_codes(geom.points[candidates], prev) == 0
            idx = int(candidates[np.flatnonzero(mask)[0]])
            vec = geom.points[idx]
            lam = F.sqrt_norm_preimage(int(F.INV[geom.herm_diag[idx]]))
            rows.append(F.MUL[lam, vec])
        return np.stack(rows)

    def to_identity(self, vec) -> np.ndarray:
        return vec_mat(self.field, vec, self.U_inv)

    def to_antidiag(self, vec) -> np.ndarray:
        return vec_mat(self.field, vec, self.U)

    def matrix_to_identity(self, mat) -> np.ndarray:
        return mat_mul(self.field, mat_mul(self.field, self.U, mat), self.U_inv)

    def matrix_to_antidiag(self, mat) -> np.ndarray:
        return mat_mul(self.field, mat_mul(self.field, self.U_inv, mat), self.U)
