"""
Solving the normal systems and the fitted approximant

    f(x) = sum_j c_j phi(|x - xi_j|) + a . x + a0

Two solver paths are available. ``normal`` factors the symmetric normal
matrix with Cholesky, escalating a diagonal ridge when the factorization
breaks down. ``qr`` solves the equivalent rectangular least-squares system
with a column-pivoted QR (complete orthogonal factorization) after scaling
every column to unit norm; it does not square the condition number.
"""
import enum
import json
import logging
import math
from dataclasses import asdict, dataclass, replace

import numpy as np
import scipy.linalg as sla

from rbfrepro.assembly import (
    Method,
    assemble,
    build_design,
    kernel_matrix,
    polynomial_matrix,
    stacked_system,
)
from rbfrepro.exceptions import ContractError, ParseError, SingularSystemError
from rbfrepro.kernels import KernelSpec
from rbfrepro.pointgen import PointSet, Provenance

__all__ = [
    "SolverPath",
    "FitOptions",
    "SolveInfo",
    "Diagnostics",
    "Model",
    "solve_normal",
    "solve_stacked",
    "fit",
    "evaluate",
    "data_residual",
    "save_model",
    "load_model",
    "MODEL_FORMAT_VERSION",
]

logger = logging.getLogger(__name__)

MODEL_FORMAT_VERSION = 1


class SolverPath(enum.Enum):
    NORMAL_EQ = "normal"
    STACKED_QR = "qr"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise ContractError(f"unknown solver {name!r}; expected normal or qr") from None


@dataclass(frozen=True)
class FitOptions:
    """Solver configuration.

    ``initial_ridge`` is an absolute Tikhonov term added to the diagonal of
    B (for ``qr``, as extra rows ``sqrt(ridge) * I``). On a failed Cholesky
    factorization, or a relative normal residual above ``tolerance``, the
    ``normal`` path retries with ``initial_ridge + ridge_start * mean(diag B) * 10**k``
    for ``k = 0 .. max_escalations - 1``.
    """

    solver_path: SolverPath = SolverPath.NORMAL_EQ
    tolerance: float = 1e-8
    initial_ridge: float = 0.0
    ridge_start: float = 1e-14
    max_escalations: int = 6
    refine: bool = False

    def __post_init__(self):
        object.__setattr__(self, "solver_path", SolverPath.parse(self.solver_path))
        if not (self.tolerance > 0.0):
            raise ContractError(f"tolerance must be positive, got {self.tolerance!r}")
        if not (self.initial_ridge >= 0.0) or not math.isfinite(self.initial_ridge):
            raise ContractError(f"initial_ridge must be finite and >= 0, got {self.initial_ridge!r}")


@dataclass(frozen=True)
class SolveInfo:
    normal_residual: float
    condition_estimate: float
    ridge_used: float


@dataclass(frozen=True)
class Diagnostics:
    residual_norm: float
    normal_residual: float
    condition_estimate: float
    ridge_used: float
    solver_path: SolverPath
    warnings: tuple = ()

    def to_dict(self):
        d = asdict(self)
        d["solver_path"] = self.solver_path.value
        d["warnings"] = list(self.warnings)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(
            residual_norm=float(d["residual_norm"]),
            normal_residual=float(d["normal_residual"]),
            condition_estimate=float(d["condition_estimate"]),
            ridge_used=float(d["ridge_used"]),
            solver_path=SolverPath.parse(d["solver_path"]),
            warnings=tuple(d.get("warnings", ())),
        )


def _relative_normal_residual(B, f, lam):
    return float(np.linalg.norm(B @ lam - f) / max(np.linalg.norm(f), 1.0))


def solve_normal(system, options=FitOptions()):
    """Solve ``(B + initial_ridge I) lam = f`` by Cholesky with ridge escalation.

    The relative residual is measured against ``B + initial_ridge I``, the
    system the caller asked for; escalated ridge shows up in it. Returns ``(lam, SolveInfo)``. The condition estimate is the squared
    ratio of the largest to smallest Cholesky pivot, an order-of-magnitude
    indicator only.
    """
    B = np.asarray(system.B, dtype=float)
    f = np.asarray(system.f, dtype=float)
    n = f.shape[0]
    if B.shape != (n, n):
        raise ContractError(f"B has shape {B.shape}, f has length {n}")
    if not (np.all(np.isfinite(B)) and np.all(np.isfinite(f))):
        raise ContractError("normal system contains non-finite entries")

    if options.initial_ridge:
        B = B + options.initial_ridge * np.eye(n)
    diag_mean = float(np.mean(np.diag(B))) if n else 1.0
    scale = diag_mean if diag_mean > 0.0 else 1.0
    extras = [0.0] + [options.ridge_start * scale * 10.0**k for k in range(options.max_escalations)]
    cond = math.inf
    last_residual = math.inf
    for extra in extras:
        Br = B + extra * np.eye(n) if extra else B
        try:
            factor = sla.cho_factor(Br, lower=False, check_finite=False)
        except np.linalg.LinAlgError:
            logger.debug("Cholesky failed with extra ridge %g", extra)
            continue
        pivots = np.abs(np.diag(factor[0]))
        cond = float((pivots.max() / pivots.min()) ** 2) if pivots.min() > 0 else math.inf
        lam = sla.cho_solve(factor, f, check_finite=False)
        if options.refine:
            lam = lam + sla.cho_solve(factor, f - Br @ lam, check_finite=False)
        if not np.all(np.isfinite(lam)):
            continue
        last_residual = _relative_normal_residual(B, f, lam)
        if last_residual <= options.tolerance:
            ridge = options.initial_ridge + extra
            if extra:
                logger.info("normal system solved with escalated ridge %g", ridge)
            return lam, SolveInfo(last_residual, cond, float(ridge))
    raise SingularSystemError(
        f"normal system not solvable to tolerance {options.tolerance:g} after "
        f"{options.max_escalations} ridge escalations (last relative residual {last_residual:.3g})",
        condition_estimate=cond,
    )


def solve_stacked(S, rhs, ridge=0.0):
    """Least-squares solve of the rectangular system ``S lam ~ rhs``.

    Columns are scaled to unit norm before LAPACK ``gelsy``. A positive
    ``ridge`` appends ``sqrt(ridge) * I`` rows, which matches adding
    ``ridge`` to the diagonal of ``S'S``. Returns ``(lam, condition_estimate)``
    where the estimate is the squared diagonal ratio of the pivoted R factor.
    """
    S = np.asarray(S, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    n = S.shape[1]
    if ridge > 0.0:
        S = np.vstack([S, math.sqrt(ridge) * np.eye(n)])
        rhs = np.concatenate([rhs, np.zeros(n)])
    norms = np.linalg.norm(S, axis=0)
    norms[norms == 0.0] = 1.0
    Se = S / norms
    lam_e = sla.lstsq(Se, rhs, lapack_driver="gelsy", check_finite=False)[0]
    R = sla.qr(Se, mode="r", pivoting=True, check_finite=False)[0]
    rdiag = np.abs(np.diag(R))
    cond = float((rdiag[0] / rdiag[-1]) ** 2) if rdiag.size and rdiag[-1] > 0 else math.inf
    return lam_e / norms, cond


@dataclass(frozen=True, eq=False)
class Model:
    """Fitted approximant. Immutable; evaluate with `Model.evaluate` or `evaluate`."""

    kernel: KernelSpec
    centers: PointSet
    c: np.ndarray
    a: np.ndarray
    a0: float
    method: Method
    diagnostics: Diagnostics

    def __post_init__(self):
        c = np.array(self.c, dtype=float).reshape(-1)
        a = np.array(self.a, dtype=float).reshape(-1)
        if c.shape[0] != len(self.centers):
            raise ContractError(f"{c.shape[0]} weights for {len(self.centers)} centers")
        if a.shape != (2,):
            raise ContractError("linear coefficients must have length 2")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(a)) and math.isfinite(self.a0)):
            raise ContractError("model coefficients must be finite")
        c.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "a0", float(self.a0))
        object.__setattr__(self, "method", Method.parse(self.method))

    @property
    def coefficients(self):
        """``(c_1 .. c_M, a_x, a_y, a_0)`` as one vector."""
        return np.concatenate([self.c, self.a, [self.a0]])

    def evaluate(self, points):
        """Vectorized evaluation at a PointSet or an ``(n, 2)`` array."""
        if isinstance(points, PointSet):
            points = points.points
        p = np.asarray(points, dtype=float).reshape(-1, 2)
        return kernel_matrix(self.kernel, p, self.centers.points) @ self.c + p @ self.a + self.a0

    def __call__(self, points):
        return self.evaluate(points)


def evaluate(model, point):
    """Value of ``model`` at a single 2D point."""
    p = np.asarray(point, dtype=float).reshape(2)
    if not np.all(np.isfinite(p)):
        raise ContractError("evaluation point must be finite")
    return float(model.evaluate(p[None, :])[0])


def fit(data, centers, kernel, method=Method.PROPOSED, options=FitOptions()):
    """Fit ``data`` with M RBFs at ``centers`` plus a linear polynomial.

    Parameters
    ----------
    data : ScatteredData
    centers : PointSet
    kernel : KernelSpec
    method : Method or str
        ``proposed`` minimizes the plain squared residual; ``original``
        additionally carries the side conditions ``sum c = 0`` and
        ``sum c xi = 0`` as unit-weight least-squares rows.
    options : FitOptions

    Raises
    ------
    SingularSystemError
        When the ``normal`` path cannot reach the residual tolerance.
    """
    method = Method.parse(method)
    d = build_design(data, centers, kernel)
    system = assemble(d, method)
    warnings = []
    N, M = d.n_data, d.n_centers
    if N < M + 3:
        warnings.append(f"underdetermined: N={N} < M+3={M + 3}")

    if options.solver_path is SolverPath.NORMAL_EQ:
        lam, info = solve_normal(system, options)
    else:
        S, rhs = stacked_system(d, method)
        lam, cond = solve_stacked(S, rhs, options.initial_ridge)
        rel = _relative_normal_residual(system.B, system.f, lam)
        if options.initial_ridge:
            # measured against the ridged system actually solved
            rel = _relative_normal_residual(
                system.B + options.initial_ridge * np.eye(M + 3), system.f, lam
            )
        info = SolveInfo(rel, cond, float(options.initial_ridge))
        if rel > options.tolerance:
            warnings.append(f"normal residual {rel:.3g} above tolerance {options.tolerance:g}")

    resid = d.A @ lam[:M] + d.P @ lam[M:] - d.h
    diag = Diagnostics(
        residual_norm=float(np.linalg.norm(resid)),
        normal_residual=info.normal_residual,
        condition_estimate=info.condition_estimate,
        ridge_used=info.ridge_used,
        solver_path=options.solver_path,
        warnings=tuple(warnings),
    )
    return Model(kernel, centers, lam[:M], lam[M : M + 2], lam[M + 2], method, diag)


def data_residual(model, data):
    """``|f(x_i) - h_i|_2`` over a data set; recomputes ``diagnostics.residual_norm``."""
    return float(np.linalg.norm(model.evaluate(data.points.points) - data.values))


_MODEL_FIELDS = ("kernel", "alpha", "method", "centers", "weights", "a", "a0", "diagnostics")


def model_to_dict(model):
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "kernel": model.kernel.name,
        "alpha": model.kernel.alpha,
        "method": model.method.value,
        "centers": model.centers.points.tolist(),
        "center_provenance": model.centers.provenance.value,
        "weights": model.c.tolist(),
        "a": model.a.tolist(),
        "a0": model.a0,
        "diagnostics": model.diagnostics.to_dict(),
    }


def model_from_dict(d, source="<dict>"):
    version = d.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ParseError(f"{source}: unsupported format_version {version!r}")
    for name in _MODEL_FIELDS:
        if name not in d:
            raise ParseError(f"{source}: missing field {name!r}")
    try:
        centers = PointSet(
            np.array(d["centers"], dtype=float).reshape(-1, 2),
            Provenance(d.get("center_provenance", "external")),
        )
        return Model(
            kernel=KernelSpec(d["kernel"], d["alpha"]),
            centers=centers,
            c=d["weights"],
            a=d["a"],
            a0=d["a0"],
            method=d["method"],
            diagnostics=Diagnostics.from_dict(d["diagnostics"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{source}: invalid model: {exc}") from exc


def save_model(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=1)
        fh.write("\n")


def load_model(path):
    try:
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(d, dict):
        raise ParseError(f"{path}: expected a JSON object")
    return model_from_dict(d, source=str(path))


def with_solver(options, solver_path):
    return replace(options, solver_path=SolverPath.parse(solver_path))
