"""Separating checks and pointwise-form recovery on algebras of matrix-valued
functions over finite discrete point sets.

A function algebra over a finite label set is a direct sum of matrix
algebras, one summand per point, with pointwise multiplication.  A linear
map between two such algebras is stored block-wise: ``blocks[x2][x1]``
maps the input value at point x1 to its contribution at output point x2.

The algebraic separating property splits exactly along this block
structure:

* cross-point: functions concentrated at distinct input points always
  multiply to zero, so for x != y every pair of basis images of
  blocks (x2, x) and (x2, y) must multiply to zero at every output
  point x2 (both orders, by symmetry of the quantifier);
* same-point: a zero-product pair concentrated at one input point x
  forces, at every output point x2, the single block (x2, x) to be a
  separating map of matrix algebras.

Both families of conditions are bilinear in the pair, so basis pairs
decide them; sufficiency follows by expanding T(F) T(G) into block
terms.  The strict variant (disjoint pointwise-norm supports map to
disjoint supports) is a statement about which blocks carry mass at all:
it holds iff the reach sets {x2 : block (x2, x1) is nonzero} are
pairwise disjoint across input points.
"""

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, FieldConfig
from .errors import (
    DegenerateMap,
    DimensionMismatch,
    EquivalenceViolated,
    NotLocal,
    NotStandardForm,
    PhiNotBijective,
    RecoveryError,
    SingularMatrix,
)
from .linalg import frob, invert, numeric_rank
from .separating import (
    NOT_SEPARATING,
    SEPARATING,
    Verdict,
    is_separating_exact,
)
from .structure import ConjugationForm, recover_conjugation
from .superop import Superoperator


@dataclass(frozen=True)
class DiscreteSpace:
    """Finite set of distinct point labels with a fixed order."""

    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        if len(labels) < 1:
            raise ValueError("a discrete space needs at least one point")
        if len(set(labels)) != len(labels):
            raise ValueError("labels must be unique")
        object.__setattr__(self, "labels", labels)

    @property
    def k(self):
        return len(self.labels)

    def index(self, label):
        return self.labels.index(label)


@dataclass(frozen=True)
class MatrixFunction:
    """A function from a DiscreteSpace into n x n matrices; values stacked (k, n, n)."""

    space: DiscreteSpace
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 3 or values.shape[0] != self.space.k or values.shape[1] != values.shape[2]:
            raise DimensionMismatch(f"values shape {values.shape} does not fit {self.space.k} points")
        object.__setattr__(self, "values", values)

    @property
    def n(self):
        return self.values.shape[1]

    def at(self, label):
        return self.values[self.space.index(label)]


def delta_fn(space: DiscreteSpace, label: str, A, cfg: FieldConfig = DEFAULT) -> MatrixFunction:
    """Function equal to A at one point and zero elsewhere."""
    A = cfg.asarray(A)
    values = np.zeros((space.k,) + A.shape, dtype=cfg.dtype)
    values[space.index(label)] = A
    return MatrixFunction(space=space, values=values)


def constant_fn(space: DiscreteSpace, A, cfg: FieldConfig = DEFAULT) -> MatrixFunction:
    A = cfg.asarray(A)
    return MatrixFunction(space=space, values=np.broadcast_to(A, (space.k,) + A.shape).copy())


def multiply(F: MatrixFunction, G: MatrixFunction) -> MatrixFunction:
    if F.space != G.space:
        raise DimensionMismatch("functions live on different spaces")
    return MatrixFunction(space=F.space, values=F.values @ G.values)


@dataclass(frozen=True)
class BigSuperoperator:
    """Block map between function algebras: blocks has shape (k2, k1, m^2, n^2)."""

    space_in: DiscreteSpace
    space_out: DiscreteSpace
    n_in: int
    n_out: int
    blocks: np.ndarray
    cfg: FieldConfig = DEFAULT

    def __post_init__(self):
        blocks = self.cfg.asarray(self.blocks)
        want = (self.space_out.k, self.space_in.k, self.n_out**2, self.n_in**2)
        if blocks.shape != want:
            raise DimensionMismatch(f"blocks shape {blocks.shape} != {want}")
        object.__setattr__(self, "blocks", blocks)

    def block(self, x2: int, x1: int) -> Superoperator:
        return Superoperator(n_in=self.n_in, n_out=self.n_out, mat=self.blocks[x2, x1], cfg=self.cfg)

    def flat_matrix(self) -> np.ndarray:
        """The map as one matrix on stacked per-point vectorizations
        (point-major: global vec index = point_index * n^2 + local vec index)."""
        k2, k1 = self.space_out.k, self.space_in.k
        m2, n2 = self.n_out**2, self.n_in**2
        return self.blocks.transpose(0, 2, 1, 3).reshape(k2 * m2, k1 * n2)


def from_flat_matrix(mat, space_in, space_out, n_in, n_out, cfg: FieldConfig = DEFAULT) -> BigSuperoperator:
    k2, k1 = space_out.k, space_in.k
    m2, n2 = n_out**2, n_in**2
    blocks = np.asarray(mat).reshape(k2, m2, k1, n2).transpose(0, 2, 1, 3)
    return BigSuperoperator(space_in=space_in, space_out=space_out, n_in=n_in, n_out=n_out, blocks=blocks, cfg=cfg)


def apply_fn(T: BigSuperoperator, F: MatrixFunction) -> MatrixFunction:
    """Apply the block map to a function."""
    if F.space != T.space_in or F.n != T.n_in:
        raise DimensionMismatch("function does not match the map's input algebra")
    vecs = F.values.transpose(0, 2, 1).reshape(T.space_in.k, -1)  # column-major per point
    out = np.einsum("yxab,xb->ya", T.blocks, vecs)
    values = out.reshape(T.space_out.k, T.n_out, T.n_out).transpose(0, 2, 1)
    return MatrixFunction(space=T.space_out, values=values)


def inverse_fn(T: BigSuperoperator) -> BigSuperoperator:
    """Inverse of the block map as a map of function algebras."""
    flat = T.flat_matrix()
    if flat.shape[0] != flat.shape[1]:
        raise SingularMatrix(f"non-square block map {flat.shape} has no inverse")
    inv, _ = invert(flat, T.cfg)
    return from_flat_matrix(inv, T.space_out, T.space_in, T.n_out, T.n_in, T.cfg)


@dataclass(frozen=True)
class PointwiseForm:
    """Certificate for (T F)(x) = alpha(x) * S_x F(phi(x)) S_x^{-1}.

    ``phi`` maps output labels to input labels; ``alphas`` and ``S`` are
    keyed by output label, each S_x in the ConjugationForm gauge.
    """

    phi: dict[str, str]
    alphas: dict[str, complex | float]
    S: dict[str, np.ndarray]

    def point_form(self, label) -> ConjugationForm:
        return ConjugationForm(alpha=self.alphas[label], S=self.S[label])


@dataclass(frozen=True)
class FunctionCounterexample:
    """Zero-product pair of matrix functions whose images fail to separate.

    ``point`` is the output label where the image product (algebraic
    check) or the image support overlap (strict check) shows up.
    """

    F1: MatrixFunction
    F2: MatrixFunction
    point: str
    product_in_norm: float
    violation_norm: float


def support(F: MatrixFunction, cfg: FieldConfig = DEFAULT) -> set[str]:
    """Labels where F is nonzero relative to its largest value."""
    norms = np.linalg.norm(F.values, axis=(1, 2))
    top = norms.max(initial=0.0)
    if top <= cfg.tol_abs:
        return set()
    keep = norms > cfg.tol_rel * top
    return {lab for lab, k in zip(F.space.labels, keep) if k}


def ai_membership(F: MatrixFunction, cfg: FieldConfig = DEFAULT) -> bool:
    """True iff every value of F is zero or invertible.

    This characterizes the functions whose left annihilator is contained
    in their right annihilator: a value of intermediate rank admits a
    one-sided annihilator built from a covector killing its range and a
    vector outside its kernel.  (Validated by brute force in the tests.)
    """
    supp = support(F, cfg)
    n = F.n
    for lab in supp:
        if numeric_rank(F.at(lab), cfg) != n:
            return False
    return True


def zero_product_iff_disjoint_support(
    F1: MatrixFunction, F2: MatrixFunction, cfg: FieldConfig = DEFAULT
) -> bool:
    """Evaluate both sides of the equivalence "F1 F2 = 0 iff supports disjoint"
    (valid whenever F2 is pointwise zero-or-invertible) and return the common
    truth value; raises EquivalenceViolated if the sides disagree."""
    if not ai_membership(F2, cfg):
        raise ValueError("F2 must be pointwise zero-or-invertible")
    prod = multiply(F1, F2)
    scale = max(
        np.linalg.norm(F1.values, axis=(1, 2)).max(initial=0.0)
        * np.linalg.norm(F2.values, axis=(1, 2)).max(initial=0.0),
        0.0,
    )
    product_zero = np.linalg.norm(prod.values, axis=(1, 2)).max(initial=0.0) <= cfg.threshold(scale)
    disjoint = not (support(F1, cfg) & support(F2, cfg))
    product_zero = bool(product_zero)
    if product_zero != disjoint:
        raise EquivalenceViolated(
            f"product-zero = {product_zero} but disjoint-support = {disjoint}"
        )
    return product_zero


def _block_mass(T: BigSuperoperator) -> np.ndarray:
    return np.linalg.norm(T.blocks, axis=(2, 3))


def _block_images(T: BigSuperoperator) -> np.ndarray:
    """IMB[x2, x1, i, j] = blocks[x2][x1](E_ij), shape (k2, k1, n, n, m, m)."""
    k2, k1 = T.space_out.k, T.space_in.k
    n, m = T.n_in, T.n_out
    return T.blocks.reshape(k2, k1, m, m, n, n).transpose(0, 1, 5, 4, 3, 2)


def _best_unit(block_imgs):
    """Index (i, j) of the basis unit with the largest image norm."""
    norms = np.linalg.norm(block_imgs, axis=(2, 3))
    return np.unravel_index(int(np.argmax(norms)), norms.shape)


def is_strictly_separating(T: BigSuperoperator, cfg: FieldConfig | None = None) -> Verdict:
    """Disjoint input supports must map to disjoint output supports.

    Exact via block reach: the set of output points reached by each input
    point (blocks above the global mass threshold) must be pairwise
    disjoint.  A collision yields a pair of single-point functions whose
    images overlap at a common output point.
    """
    cfg = cfg or T.cfg
    mass = _block_mass(T)
    thr = cfg.threshold(mass.max(initial=0.0))
    reach = mass > thr  # reach[x2, x1]
    k1 = T.space_in.k
    imgs = _block_images(T)
    for xa in range(k1):
        for xb in range(xa + 1, k1):
            common = np.flatnonzero(reach[:, xa] & reach[:, xb])
            if common.size == 0:
                continue
            x2 = int(common[0])
            ia, ja = _best_unit(imgs[x2, xa])
            ib, jb = _best_unit(imgs[x2, xb])
            unit_a = np.zeros((T.n_in, T.n_in), dtype=cfg.dtype)
            unit_a[ia, ja] = 1
            unit_b = np.zeros((T.n_in, T.n_in), dtype=cfg.dtype)
            unit_b[ib, jb] = 1
            F1 = delta_fn(T.space_in, T.space_in.labels[xa], unit_a, cfg)
            F2 = delta_fn(T.space_in, T.space_in.labels[xb], unit_b, cfg)
            out1 = apply_fn(T, F1)
            out2 = apply_fn(T, F2)
            label2 = T.space_out.labels[x2]
            ce = FunctionCounterexample(
                F1=F1,
                F2=F2,
                point=label2,
                product_in_norm=0.0,
                violation_norm=float(frob(out1.at(label2)) * frob(out2.at(label2))),
            )
            return Verdict(NOT_SEPARATING, counterexample=ce)
    return Verdict(SEPARATING)


def is_separating_fn(T: BigSuperoperator, cfg: FieldConfig | None = None) -> Verdict:
    """Exact algebraic separating check on the direct-sum algebra.

    Cross-point conditions first (ordered input pairs, then output point,
    in label order), then the per-block scalar-identity reduction; the
    first violation is returned as a function-pair counterexample with
    its point labels."""
    cfg = cfg or T.cfg
    k2, k1 = T.space_out.k, T.space_in.k
    imgs = _block_images(T)
    s_img = float(np.linalg.norm(imgs, axis=(4, 5)).max(initial=0.0))
    scale = s_img**2
    thr = cfg.threshold(scale)

    def lifted(x, y, A, B, x2):
        F1 = delta_fn(T.space_in, T.space_in.labels[x], A, cfg)
        F2 = delta_fn(T.space_in, T.space_in.labels[y], B, cfg)
        prod_in = float(np.linalg.norm(multiply(F1, F2).values, axis=(1, 2)).max())
        out = multiply(apply_fn(T, F1), apply_fn(T, F2))
        violation = float(np.linalg.norm(out.values, axis=(1, 2)).max())
        return FunctionCounterexample(
            F1=F1,
            F2=F2,
            point=T.space_out.labels[x2],
            product_in_norm=prod_in,
            violation_norm=violation,
        )

    # cross-point: concentrated at distinct input points, every product is zero
    for x in range(k1):
        for y in range(k1):
            if x == y:
                continue
            for x2 in range(k2):
                prods = np.einsum("ijpr,klrq->ijklpq", imgs[x2, x], imgs[x2, y])
                bad = np.abs(prods) > thr
                if bad.any():
                    i, j, k, l, _p, _q = np.argwhere(bad)[0]
                    A = np.zeros((T.n_in, T.n_in), dtype=cfg.dtype)
                    A[i, j] = 1
                    B = np.zeros((T.n_in, T.n_in), dtype=cfg.dtype)
                    B[k, l] = 1
                    return Verdict(NOT_SEPARATING, counterexample=lifted(x, y, A, B, x2))

    # same-point: each block must be separating on its own, at the global scale
    for x in range(k1):
        for x2 in range(k2):
            verdict = is_separating_exact(T.block(x2, x), cfg, scale=scale)
            if not verdict:
                ce = verdict.counterexample
                return Verdict(
                    NOT_SEPARATING, counterexample=lifted(x, x, ce.A, ce.B, x2)
                )
    return Verdict(SEPARATING)


def recover_pointwise(T: BigSuperoperator, cfg: FieldConfig | None = None) -> PointwiseForm:
    """Reconstruct the permutation phi and the per-point (alpha, S) data.

    Raises NotLocal when some output point hears several input points,
    PhiNotBijective when the point map cannot be a bijection, and wraps
    per-point conjugation-recovery errors with the output label.
    """
    cfg = cfg or T.cfg
    if T.n_in != T.n_out:
        raise DimensionMismatch(f"pointwise recovery needs n_in = n_out, got {T.n_in} != {T.n_out}")
    if T.space_in.k != T.space_out.k:
        raise PhiNotBijective(
            f"input has {T.space_in.k} points but output has {T.space_out.k}; no bijection exists"
        )
    mass = _block_mass(T)
    thr = cfg.threshold(mass.max(initial=0.0))
    phi = {}
    forms = {}
    for x2 in range(T.space_out.k):
        hot = np.flatnonzero(mass[x2] > thr)
        label2 = T.space_out.labels[x2]
        if hot.size != 1:
            raise NotLocal(
                f"output point {label2!r} hears {hot.size} input points (need exactly 1)"
            )
        x1 = int(hot[0])
        phi[label2] = T.space_in.labels[x1]
        try:
            forms[label2] = recover_conjugation(T.block(x2, x1), cfg)
        except RecoveryError as exc:
            wrapped = type(exc)(f"at output point {label2!r}: {exc}", residual=exc.residual)
            raise wrapped from exc
    if len(set(phi.values())) != len(phi):
        raise PhiNotBijective(f"point map {phi} is not injective")
    form = PointwiseForm(
        phi=phi,
        alphas={lab: f.alpha for lab, f in forms.items()},
        S={lab: f.S for lab, f in forms.items()},
    )
    residual = verify_pointwise(T, form, cfg)
    if residual > cfg.tol_rel:
        raise NotStandardForm(
            f"pointwise residual {residual:.3e} exceeds tolerance", residual=residual
        )
    return form


def verify_pointwise(T: BigSuperoperator, form: PointwiseForm, cfg: FieldConfig | None = None) -> float:
    """Residual of the pointwise form: basis deviation on the phi-blocks
    (relative to the largest basis image) combined with the relative mass
    of all off-phi blocks."""
    cfg = cfg or T.cfg
    imgs = _block_images(T)
    img_scale = float(np.linalg.norm(imgs, axis=(4, 5)).max(initial=0.0))
    if img_scale <= cfg.tol_abs:
        raise DegenerateMap("all blocks vanish; residual is undefined")
    mass = _block_mass(T)
    n = T.n_in
    worst = 0.0
    off_mass = 0.0
    for x2, label2 in enumerate(T.space_out.labels):
        x1 = T.space_in.index(form.phi[label2])
        S = np.asarray(form.S[label2])
        S_inv, _ = invert(S, cfg)
        model = form.alphas[label2] * np.einsum("pi,jq->ijpq", S, S_inv)
        dev = np.linalg.norm(imgs[x2, x1] - model, axis=(2, 3)).max()
        worst = max(worst, float(dev))
        others = np.delete(mass[x2], x1)
        if others.size:
            off_mass = max(off_mass, float(others.max()))
    return max(worst / img_scale, off_mass / float(mass.max()))
