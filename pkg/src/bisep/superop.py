"""Linear maps between matrix algebras M_n -> M_m, stored as vectorized matrices.

Vectorization is column-major throughout the package: entry (p, q) of an
n x n matrix sits at vec index q*n + p, so the superoperator column for
the matrix unit E_pq is q*n + p.  Mixing conventions silently corrupts
everything downstream, so the convention is asserted here and recorded
in the file format.
"""

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, FieldConfig
from .errors import DimensionMismatch, SingularMatrix
from .linalg import invert

VEC_CONVENTION = "column-major"


def vec(A):
    """Column-major vectorization of a matrix."""
    return np.asarray(A).reshape(-1, order="F")


def unvec(v, rows, cols=None):
    """Inverse of :func:`vec`."""
    cols = rows if cols is None else cols
    return np.asarray(v).reshape(rows, cols, order="F")


@dataclass(frozen=True)
class Superoperator:
    """A linear map M_{n_in} -> M_{n_out} as an n_out^2 x n_in^2 matrix."""

    n_in: int
    n_out: int
    mat: np.ndarray
    cfg: FieldConfig = DEFAULT

    def __post_init__(self):
        mat = self.cfg.asarray(self.mat)
        if mat.shape != (self.n_out**2, self.n_in**2):
            raise DimensionMismatch(
                f"superoperator matrix shape {mat.shape} != {(self.n_out**2, self.n_in**2)}"
            )
        object.__setattr__(self, "mat", mat)

    @property
    def is_endo(self):
        return self.n_in == self.n_out


def apply(T: Superoperator, A) -> np.ndarray:
    """Apply T to a matrix: unvec(T.mat @ vec(A))."""
    A = np.asarray(A)
    if A.shape != (T.n_in, T.n_in):
        raise DimensionMismatch(f"input shape {A.shape} != {(T.n_in, T.n_in)}")
    return unvec(T.mat @ vec(A), T.n_out)


def basis_images(T: Superoperator):
    """Images T(E_pq) for all matrix units, ordered by column-major basis index.

    Element k = q*n_in + p is T(E_pq); this is just the columns of T.mat
    reshaped, so the list is exact (no arithmetic).
    """
    return [unvec(T.mat[:, k], T.n_out) for k in range(T.n_in**2)]


def basis_image_array(T: Superoperator) -> np.ndarray:
    """Basis images as an array IM with IM[p, q] = T(E_pq), shape (n, n, m, m)."""
    n, m = T.n_in, T.n_out
    # column q*n+p holds vec(T(E_pq)); peel both column-major indexings apart
    return T.mat.reshape(m, m, n, n).transpose(3, 2, 1, 0)


def from_basis_images(images, cfg: FieldConfig = DEFAULT) -> Superoperator:
    """Assemble a superoperator from the list of basis images.

    Inverse of :func:`basis_images`: the round trip is bit-identical.
    """
    count = len(images)
    n_in = int(round(count**0.5))
    if n_in * n_in != count:
        raise DimensionMismatch(f"image list length {count} is not a perfect square")
    shapes = {np.asarray(im).shape for im in images}
    if len(shapes) != 1:
        raise DimensionMismatch(f"basis images disagree on shape: {sorted(shapes)}")
    (shape,) = shapes
    if len(shape) != 2 or shape[0] != shape[1]:
        raise DimensionMismatch(f"basis images must be square, got {shape}")
    n_out = shape[0]
    mat = np.column_stack([vec(np.asarray(im)) for im in images])
    return Superoperator(n_in=n_in, n_out=n_out, mat=mat, cfg=cfg)


def identity_superop(n, cfg: FieldConfig = DEFAULT) -> Superoperator:
    return Superoperator(n_in=n, n_out=n, mat=np.eye(n * n, dtype=cfg.dtype), cfg=cfg)


def compose(T2: Superoperator, T1: Superoperator) -> Superoperator:
    """T2 after T1."""
    if T1.n_out != T2.n_in:
        raise DimensionMismatch(f"cannot compose: inner dims {T1.n_out} != {T2.n_in}")
    return Superoperator(n_in=T1.n_in, n_out=T2.n_out, mat=T2.mat @ T1.mat, cfg=T2.cfg)


def inverse(T: Superoperator) -> Superoperator:
    """Inverse superoperator; raises SingularMatrix when T is not a bijection."""
    if not T.is_endo:
        raise SingularMatrix(f"non-endomorphism {T.n_in} -> {T.n_out} has no inverse")
    inv, _cond = invert(T.mat, T.cfg)
    return Superoperator(n_in=T.n_out, n_out=T.n_in, mat=inv, cfg=T.cfg)


def conjugation_superop(alpha, S, cfg: FieldConfig = DEFAULT) -> Superoperator:
    """The map A -> alpha * S A S^{-1} as a superoperator.

    Requires S invertible at tolerance and |alpha| > tol_abs.
    """
    S = cfg.asarray(S)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DimensionMismatch(f"S must be square, got {S.shape}")
    if abs(alpha) <= cfg.tol_abs:
        raise ValueError(f"alpha = {alpha} is zero at tolerance")
    S_inv, _cond = invert(S, cfg)
    n = S.shape[0]
    # vec(S A S^{-1}) = (S^{-T} kron S) vec(A) under column-major stacking
    mat = complex(alpha) if cfg.is_complex else float(alpha)
    mat = mat * np.kron(S_inv.T, S)
    return Superoperator(n_in=n, n_out=n, mat=mat, cfg=cfg)
