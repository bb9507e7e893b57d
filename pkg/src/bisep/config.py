"""Scalar-field configuration and the shared tolerance policy.

Every "is this zero" decision in the package goes through
:meth:`FieldConfig.threshold`: a quantity x at context scale s is zero
iff ``|x| <= tol_abs + tol_rel * s``.
"""

from dataclasses import dataclass

import numpy as np

REAL = "real"
COMPLEX = "complex"


@dataclass(frozen=True)
class FieldConfig:
    """Scalar field plus the relative/absolute tolerance pair."""

    field: str = REAL
    tol_rel: float = 1e-9
    tol_abs: float = 1e-12

    def __post_init__(self):
        if self.field not in (REAL, COMPLEX):
            raise ValueError(f"field must be {REAL!r} or {COMPLEX!r}, got {self.field!r}")
        if not (self.tol_rel > 0 and self.tol_abs > 0):
            raise ValueError("tolerances must be positive")

    @property
    def dtype(self):
        return np.complex128 if self.field == COMPLEX else np.float64

    @property
    def is_complex(self):
        return self.field == COMPLEX

    def threshold(self, scale):
        """Zero-threshold at the given context scale."""
        return self.tol_abs + self.tol_rel * float(scale)

    def is_zero(self, value, scale):
        return abs(value) <= self.threshold(scale)

    def asarray(self, a):
        """Coerce to a dense array of the configured dtype, rejecting non-finite entries."""
        out = np.asarray(a, dtype=self.dtype)
        if not np.isfinite(out).all():
            raise ValueError("non-finite entries are not admitted")
        return out


DEFAULT = FieldConfig()
