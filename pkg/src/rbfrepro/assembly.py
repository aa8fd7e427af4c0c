"""
Design matrices and normal systems for RBF least squares with a linear
polynomial term, in two dimensions.

For data sites ``x_i`` (N of them), centers ``xi_j`` (M of them) and values
``h``::

    A[i, j] = phi(|x_i - xi_j|)          (N x M)
    P[i]    = (x_i, y_i, 1)              (N x 3)
    Xi      = [[xi_1 .. xi_M],
               [eta_1 .. eta_M],
               [1 .. 1]]                 (3 x M)

The unconstrained ("proposed") formulation minimizes ``|A c + P k - h|^2``
and its normal matrix is ``[[A'A, A'P], [P'A, P'P]]``. The constrained
("original") formulation appends the side-condition rows ``[Xi, 0] = 0`` to
the overdetermined system, which adds ``Xi'Xi`` to the ``A'A`` block.
"""
import enum
from dataclasses import dataclass

import numpy as np

from rbfrepro.exceptions import AssemblyError, ContractError
from rbfrepro.kernels import phi

__all__ = [
    "Method",
    "DesignMatrices",
    "NormalSystem",
    "distance_matrix",
    "kernel_matrix",
    "polynomial_matrix",
    "constraint_matrix",
    "build_design",
    "assemble_proposed",
    "assemble_original",
    "assemble",
    "stacked_system",
    "residual_and_gradient",
]


class Method(enum.Enum):
    ORIGINAL = "original"
    PROPOSED = "proposed"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise ContractError(f"unknown method {name!r}; expected original or proposed") from None


def _frozen(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DesignMatrices:
    A: np.ndarray
    P: np.ndarray
    Xi: np.ndarray
    h: np.ndarray

    @property
    def n_data(self):
        return self.A.shape[0]

    @property
    def n_centers(self):
        return self.A.shape[1]


@dataclass(frozen=True, eq=False)
class NormalSystem:
    """Symmetric system ``B @ lam = f`` with ``lam = (c_1..c_M, a_x, a_y, a_0)``."""

    B: np.ndarray
    f: np.ndarray
    method: Method

    @property
    def size(self):
        return self.f.shape[0]


def distance_matrix(points, centers):
    p = np.asarray(points, dtype=float).reshape(-1, 2)
    c = np.asarray(centers, dtype=float).reshape(-1, 2)
    return np.hypot(p[:, None, 0] - c[None, :, 0], p[:, None, 1] - c[None, :, 1])


def kernel_matrix(kernel, points, centers):
    """``phi(|p_i - c_j|)`` for every pair, through `rbfrepro.kernels.phi`."""
    return phi(kernel, distance_matrix(points, centers))


def polynomial_matrix(points):
    p = np.asarray(points, dtype=float).reshape(-1, 2)
    return np.column_stack([p, np.ones(p.shape[0])])


def constraint_matrix(centers):
    c = np.asarray(centers, dtype=float).reshape(-1, 2)
    return np.vstack([c[:, 0], c[:, 1], np.ones(c.shape[0])])


def build_design(data, centers, kernel):
    """Build A, P, Xi and h for ``data`` (ScatteredData) and ``centers`` (PointSet)."""
    if len(data) < 1 or len(centers) < 1:
        raise ContractError(f"need N >= 1 and M >= 1, got N={len(data)}, M={len(centers)}")
    A = kernel_matrix(kernel, data.points.points, centers.points)
    bad = ~np.isfinite(A)
    if bad.any():
        i, j = (int(v) for v in np.argwhere(bad)[0])
        raise AssemblyError(f"non-finite kernel value at (i={i}, j={j})")
    return DesignMatrices(
        A=_frozen(A),
        P=_frozen(polynomial_matrix(data.points.points)),
        Xi=_frozen(constraint_matrix(centers.points)),
        h=_frozen(data.values),
    )


def _mirror_upper(G):
    """Symmetric matrix from the upper triangle of ``G``; exact by construction."""
    U = np.triu(G)
    return U + np.triu(G, 1).T


def _assemble(d, method):
    AP = np.hstack([d.A, d.P])
    G = AP.T @ AP
    if method is Method.ORIGINAL:
        M = d.n_centers
        G[:M, :M] += d.Xi.T @ d.Xi
    f = AP.T @ d.h
    return NormalSystem(_frozen(_mirror_upper(G)), _frozen(f), method)


def assemble_proposed(d):
    return _assemble(d, Method.PROPOSED)


def assemble_original(d):
    return _assemble(d, Method.ORIGINAL)


def assemble(d, method):
    return _assemble(d, Method.parse(method))


def stacked_system(d, method):
    """Rectangular least-squares system whose normal equations are `assemble(d, method)`.

    Proposed: ``[A P] lam = h``. Original: ``[[A, P], [Xi, 0]] lam = [h; 0]``.
    """
    S = np.hstack([d.A, d.P])
    rhs = np.array(d.h, dtype=float)
    if Method.parse(method) is Method.ORIGINAL:
        S = np.vstack([S, np.hstack([d.Xi, np.zeros((3, 3))])])
        rhs = np.concatenate([rhs, np.zeros(3)])
    return S, rhs


def residual_and_gradient(d, c, k):
    """Squared residual ``R^2 = |A c + P k - h|^2`` and its gradients.

    Returns
    -------
    r2 : float
    grad_c : (M,) array, ``2 (A'A c + A'P k - A'h)``
    grad_k : (3,) array, ``2 (P'A c + P'P k - P'h)``
    """
    c = np.asarray(c, dtype=float).reshape(-1)
    k = np.asarray(k, dtype=float).reshape(-1)
    if c.shape[0] != d.n_centers or k.shape[0] != 3:
        raise ContractError(
            f"expected c of length {d.n_centers} and k of length 3, got {c.shape[0]} and {k.shape[0]}"
        )
    res = d.A @ c + d.P @ k - d.h
    return float(res @ res), 2.0 * (d.A.T @ res), 2.0 * (d.P.T @ res)
