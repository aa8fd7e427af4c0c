"""
Global radial basis functions with a shape parameter.

====================  =============================
Name                  Expression
====================  =============================
``gauss``             exp(-(alpha r)^2)
``iq``                1 / (1 + (alpha r)^2)
``tps``               (alpha r)^2 log(alpha r)
====================  =============================

All three depend on ``r`` only through the product ``alpha * r``. The
thin-plate spline keeps ``alpha`` inside the logarithm, so unlike the
classical TPS it is not scale free; ``phi(0)`` is set to its limit 0.
"""
import enum
import math
from dataclasses import dataclass

import numpy as np

from rbfrepro.exceptions import DomainError

__all__ = ["KernelKind", "KernelSpec", "eval_kernel", "phi"]


class KernelKind(enum.Enum):
    GAUSS = "gauss"
    INVERSE_QUADRIC = "iq"
    THIN_PLATE_SPLINE = "tps"

    @classmethod
    def parse(cls, name):
        """Case-insensitive lookup by serialized name (``gauss``, ``iq``, ``tps``)."""
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            choices = ", ".join(k.value for k in cls)
            raise DomainError(f"unknown kernel {name!r}; expected one of {choices}") from None


@dataclass(frozen=True)
class KernelSpec:
    """A kernel family together with its shape parameter ``alpha`` (1/length)."""

    kind: KernelKind
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "kind", KernelKind.parse(self.kind))
        alpha = float(self.alpha)
        if not math.isfinite(alpha) or alpha <= 0.0:
            raise DomainError(f"shape parameter must be finite and positive, got {self.alpha!r}")
        object.__setattr__(self, "alpha", alpha)

    @property
    def name(self):
        return self.kind.value

    def __call__(self, r):
        return phi(self, r)


def phi(spec, r):
    """Evaluate the kernel on an array of distances without validation.

    This is the single code path for kernel values; `eval_kernel` and the
    matrix assembly both go through it so that entries agree bitwise.
    """
    t = spec.alpha * np.asarray(r, dtype=float)
    kind = spec.kind
    if kind is KernelKind.GAUSS:
        return np.exp(-(t * t))
    if kind is KernelKind.INVERSE_QUADRIC:
        return 1.0 / (1.0 + t * t)
    # thin-plate spline: explicit r == 0 branch, no epsilon guard
    out = np.zeros_like(t)
    pos = t > 0.0
    tp = t[pos]
    out[pos] = (tp * tp) * np.log(tp)
    return out


def eval_kernel(spec, r):
    """Return ``phi(r)`` for a single non-negative finite distance ``r``."""
    r = float(r)
    if not math.isfinite(r) or r < 0.0:
        raise DomainError(f"distance must be finite and non-negative, got {r!r}")
    return float(phi(spec, np.array([r]))[0])
