"""
Error statistics and the original-vs-proposed comparison experiments.

The headline number is the mean-error ratio

    ratio = mean_error(original) / mean_error(proposed)

computed with both methods fitted on identical data sites and centers.
Values above one favor the unconstrained (proposed) formulation.

Errors are measured by default on a dense regular grid against the analytic
field; ``eval_at="training"`` switches to the data sites.
"""
import csv
import json
import math
import platform
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from dataclasses import field as dc_field
from pathlib import Path

import numpy as np
import scipy

from rbfrepro.assembly import Method
from rbfrepro.exceptions import ContractError, ParseError, RBFError
from rbfrepro.fields import (
    SINC_DOMAIN,
    Field,
    ScatteredData,
    get_field,
    load_scattered,
    sample_field,
)
from rbfrepro.fit import FitOptions, fit
from rbfrepro.kernels import KernelKind, KernelSpec
from rbfrepro.pointgen import (
    Domain2,
    PointSet,
    epsilon_points,
    grid_shape,
    halton_points,
    regular_grid,
)

__all__ = [
    "GridEval",
    "TRAINING",
    "ErrorReport",
    "error_report",
    "PointSpec",
    "ExperimentConfig",
    "Comparison",
    "compare",
    "SweepRow",
    "sweep_alpha",
    "write_sweep_csv",
    "read_sweep_csv",
    "unfavorable_counts",
    "error_grid",
    "write_error_grid",
    "write_manifest",
    "load_config",
    "save_config",
    "alpha_range",
    "DEFAULT_ALPHA_RANGES",
    "sinc_gauss_config",
    "franke_iq_config",
    "shape_sweep_config",
]

TRAINING = "training"

# a mean error at or below this fraction of max|truth| counts as zero
ZERO_ERROR_RTOL = 1e-12

# (low, high) per kernel; 20 log-spaced values, one decade either side of
# the domain-scale shape parameter for the 1000 x 500 sinc domain
DEFAULT_ALPHA_RANGES = {
    "gauss": (1e-4, 1e-2),
    "iq": (5e-4, 5e-2),
    "tps": (1e-4, 1e-2),
}
DEFAULT_SWEEP_POINTS = 20


def _fmt(x):
    return format(float(x), ".17g")


@dataclass(frozen=True)
class GridEval:
    nx: int
    ny: int

    def __post_init__(self):
        if int(self.nx) < 2 or int(self.ny) < 2:
            raise ContractError(f"evaluation grid needs nx, ny >= 2, got {self.nx}x{self.ny}")

    @property
    def label(self):
        return f"grid({self.nx}x{self.ny})"


@dataclass(frozen=True)
class ErrorReport:
    max_abs: float
    mean_abs: float
    rms: float
    eval_set: str
    count: int


def _eval_points(truth, eval_set):
    """Return ``(points, true_values, label)`` for an error evaluation."""
    if isinstance(truth, ScatteredData):
        if eval_set not in (None, TRAINING):
            raise ContractError("scattered-data truth can only be evaluated at its own sites")
        return truth.points.points, truth.values, TRAINING
    if not isinstance(truth, Field):
        raise ContractError(f"truth must be a Field or ScatteredData, got {type(truth).__name__}")
    if isinstance(eval_set, GridEval):
        pts = regular_grid(eval_set.nx, eval_set.ny, truth.domain).points
        return pts, truth.values_at(pts), eval_set.label
    if isinstance(eval_set, PointSet):
        return eval_set.points, truth.values_at(eval_set.points), TRAINING
    raise ContractError("a Field truth needs a GridEval or a PointSet to evaluate on")


def _report(err, label):
    err = np.abs(err)
    return ErrorReport(
        max_abs=float(err.max()),
        mean_abs=float(err.mean()),
        rms=float(math.sqrt(np.mean(err * err))),
        eval_set=label,
        count=int(err.size),
    )


def error_report(model, truth, eval_set=None):
    """Absolute-error statistics of ``model`` against ``truth``.

    ``truth`` is a `Field` (with ``eval_set`` a `GridEval` or a `PointSet`)
    or `ScatteredData` (evaluated at its own sites).
    """
    pts, true_vals, label = _eval_points(truth, eval_set)
    if len(true_vals) == 0:
        raise ContractError("empty evaluation set")
    return _report(model.evaluate(pts) - true_vals, label)


# ---------------------------------------------------------------- configs


@dataclass(frozen=True)
class PointSpec:
    """How to generate a point set: ``halton`` (n), ``grid`` or ``epsilon`` (nx, ny or n)."""

    kind: str = "halton"
    n: int | None = None
    nx: int | None = None
    ny: int | None = None
    seed: int = 0
    jitter: float = 0.5
    start_index: int = 1

    def __post_init__(self):
        kind = str(self.kind).strip().lower()
        if kind not in ("halton", "epsilon", "grid"):
            raise ContractError(f"unknown point distribution {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if kind == "halton":
            if self.n is None:
                raise ContractError("halton points need n")
        else:
            if self.nx is None or self.ny is None:
                if self.n is None:
                    raise ContractError(f"{kind} points need n or nx and ny")
                nx, ny = grid_shape(self.n)
                object.__setattr__(self, "nx", nx)
                object.__setattr__(self, "ny", ny)
            object.__setattr__(self, "n", int(self.nx) * int(self.ny))

    @property
    def count(self):
        return int(self.n)

    def generate(self, domain):
        if self.kind == "halton":
            return halton_points(self.n, self.start_index, domain)
        if self.kind == "grid":
            return regular_grid(self.nx, self.ny, domain)
        return epsilon_points(self.nx, self.ny, self.jitter, self.seed, domain)

    @property
    def seed_label(self):
        # only epsilon points consume randomness
        return self.seed if self.kind == "epsilon" else ""


def alpha_range(lo, hi, n=DEFAULT_SWEEP_POINTS):
    """``n`` logarithmically spaced shape parameters from ``lo`` to ``hi``."""
    return tuple(float(a) for a in np.geomspace(lo, hi, int(n)))


def _default_eval_grid(field_name):
    return (101, 51) if field_name == "sinc2d" else (101, 101)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to rerun an experiment; round-trips through JSON.

    ``field`` is ``sinc2d``, ``franke`` or a path to an ``x,y,h`` CSV.
    ``alphas`` maps kernel name to a tuple of shape parameters; a plain
    sequence is applied to every kernel.
    """

    field: str = "sinc2d"
    domain: Domain2 | None = None
    data: PointSpec = PointSpec("halton", n=1089)
    centers: tuple = (PointSpec("halton", n=81),)
    kernels: tuple = ("gauss",)
    alphas: dict = dc_field(default_factory=lambda: {"gauss": (0.001,)})
    methods: tuple = ("original", "proposed")
    eval_at: str = "grid"
    eval_grid: tuple | None = None
    solver: str = "qr"
    tolerance: float = 1e-8
    initial_ridge: float = 0.0

    def __post_init__(self):
        kernels = tuple(KernelKind.parse(k).value for k in self.kernels)
        object.__setattr__(self, "kernels", kernels)
        if isinstance(self.centers, PointSpec):
            object.__setattr__(self, "centers", (self.centers,))
        else:
            object.__setattr__(self, "centers", tuple(self.centers))
        if isinstance(self.alphas, dict):
            alphas = {KernelKind.parse(k).value: tuple(float(a) for a in v) for k, v in self.alphas.items()}
        else:
            seq = tuple(float(a) for a in self.alphas)
            alphas = {k: seq for k in kernels}
        missing = [k for k in kernels if k not in alphas]
        if missing:
            raise ContractError(f"no alphas given for kernel(s) {missing}")
        alphas = {k: alphas[k] for k in kernels}
        for k, vals in alphas.items():
            if not vals or not all(math.isfinite(a) and a > 0 for a in vals):
                raise ContractError(f"alphas for {k} must be a nonempty list of positive numbers")
        object.__setattr__(self, "alphas", alphas)
        methods = tuple(Method.parse(m).value for m in self.methods)
        if len(methods) != 2:
            raise ContractError("exactly two methods are compared (numerator, denominator)")
        object.__setattr__(self, "methods", methods)
        if self.eval_at not in ("grid", TRAINING):
            raise ContractError(f"eval_at must be grid or training, got {self.eval_at!r}")
        if self.eval_grid is None and self.is_analytic:
            object.__setattr__(self, "eval_grid", _default_eval_grid(self.field))
        elif self.eval_grid is not None:
            object.__setattr__(self, "eval_grid", tuple(int(v) for v in self.eval_grid))
        if self.is_analytic:
            m_max = max(c.count for c in self.centers)
            if self.data.count <= m_max + 3:
                raise ContractError(
                    f"need more data points than centers + 3: n={self.data.count}, m={m_max}"
                )

    @property
    def is_analytic(self):
        return self.field in ("sinc2d", "franke")

    def resolved_domain(self):
        if self.domain is not None:
            return self.domain
        if self.field == "sinc2d":
            return SINC_DOMAIN
        if self.field == "franke":
            return Domain2(0.0, 1.0, 0.0, 1.0)
        return None

    def fit_options(self):
        return FitOptions(
            solver_path=self.solver, tolerance=self.tolerance, initial_ridge=self.initial_ridge
        )

    def to_dict(self):
        d = {
            "field": self.field,
            "domain": list(self.domain.as_tuple()) if self.domain else None,
            "data": asdict(self.data),
            "centers": [asdict(c) for c in self.centers],
            "kernels": list(self.kernels),
            "alphas": {k: list(v) for k, v in self.alphas.items()},
            "methods": list(self.methods),
            "eval_at": self.eval_at,
            "eval_grid": list(self.eval_grid) if self.eval_grid else None,
            "solver": self.solver,
            "tolerance": self.tolerance,
            "initial_ridge": self.initial_ridge,
        }
        return d

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ParseError(f"unknown config field(s): {sorted(unknown)}")
        d = dict(d)
        try:
            if d.get("domain") is not None:
                dom = d["domain"]
                d["domain"] = Domain2.parse(dom) if isinstance(dom, str) else Domain2(*dom)
            if "data" in d:
                d["data"] = PointSpec(**d["data"])
            if "centers" in d:
                cs = d["centers"]
                cs = [cs] if isinstance(cs, dict) else cs
                d["centers"] = tuple(PointSpec(**c) for c in cs)
            if "alphas" in d:
                d["alphas"] = _parse_alphas(d["alphas"])
            for key in ("kernels", "methods"):
                if key in d:
                    d[key] = tuple(d[key])
            return cls(**d)
        except TypeError as exc:
            raise ParseError(f"invalid config: {exc}") from exc


def _parse_alphas(spec):
    """Accept a list, ``{"logspace": [lo, hi, n]}``, or a per-kernel mapping of either."""
    if isinstance(spec, dict):
        if "logspace" in spec:
            return alpha_range(*spec["logspace"])
        return {k: _parse_alphas(v) for k, v in spec.items()}
    return tuple(float(a) for a in spec)


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON: {exc}") from exc
    return ExperimentConfig.from_dict(d)


def save_config(config, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config.to_dict(), fh, indent=1)
        fh.write("\n")


def sinc_gauss_config():
    """1089 Halton sinc samples, 81 Halton Gaussians, alpha = 0.001."""
    return ExperimentConfig(
        field="sinc2d",
        data=PointSpec("halton", n=1089),
        centers=(PointSpec("halton", n=81),),
        kernels=("gauss",),
        alphas={"gauss": (0.001,)},
    )


def franke_iq_config():
    """4225 Halton Franke samples, 17 x 17 grid of inverse quadrics, alpha = 0.005.

    Franke's function is placed on the 1000 x 500 rectangle of the sinc
    experiments; on the unit square this alpha makes the kernel constant to
    about 5e-5 and neither method can resolve the surface.
    """
    return ExperimentConfig(
        field="franke",
        domain=SINC_DOMAIN,
        data=PointSpec("halton", n=4225),
        centers=(PointSpec("grid", nx=17, ny=17),),
        kernels=("iq",),
        alphas={"iq": (0.005,)},
        eval_grid=(101, 101),
    )


def shape_sweep_config(n_alphas=DEFAULT_SWEEP_POINTS, ranges=None, seed=0):
    """Shape-parameter sweep: 3 kernels x {Halton, epsilon, grid} 81-point center sets."""
    ranges = dict(DEFAULT_ALPHA_RANGES if ranges is None else ranges)
    return ExperimentConfig(
        field="sinc2d",
        data=PointSpec("halton", n=1089),
        centers=(
            PointSpec("halton", n=81),
            PointSpec("epsilon", nx=9, ny=9, seed=seed, jitter=0.5),
            PointSpec("grid", nx=9, ny=9),
        ),
        kernels=tuple(ranges),
        alphas={k: alpha_range(lo, hi, n_alphas) for k, (lo, hi) in ranges.items()},
    )


# ---------------------------------------------------------------- experiments


@dataclass(frozen=True)
class _Setup:
    truth: object
    data: ScatteredData
    centers: tuple
    eval_set: object


def _setup(config):
    domain = config.resolved_domain()
    if config.is_analytic:
        truth = get_field(config.field, domain)
        data = sample_field(truth, config.data.generate(truth.domain))
        centers = tuple(spec.generate(truth.domain) for spec in config.centers)
        if config.eval_at == "grid":
            eval_set = GridEval(*config.eval_grid)
        else:
            eval_set = data.points
    else:
        data = load_scattered(config.field)
        truth = data
        cdom = domain or data.points.bounding_domain()
        centers = tuple(spec.generate(cdom) for spec in config.centers)
        if config.eval_at != TRAINING:
            raise ContractError("external data has no analytic truth; use eval_at='training'")
        eval_set = TRAINING
        m_max = max(len(c) for c in centers)
        if len(data) <= m_max + 3:
            raise ContractError(f"need more data points than centers + 3: n={len(data)}, m={m_max}")
    return _Setup(truth, data, centers, eval_set)


@dataclass(frozen=True, eq=False)
class Comparison:
    """Result of fitting both methods on identical inputs.

    ``reports`` and ``models`` follow ``methods`` order: numerator first.
    """

    methods: tuple
    reports: tuple
    models: tuple
    ratio: float
    ratio_infinite: bool

    @property
    def original(self):
        return self.reports[0]

    @property
    def proposed(self):
        return self.reports[1]

    @property
    def max_ratio(self):
        num, den = self.reports[0].max_abs, self.reports[1].max_abs
        return num / den if den > 0 else math.inf

    def __iter__(self):
        return iter((self.reports[0], self.reports[1], self.ratio))


def _ratio(num, den, scale):
    if den <= ZERO_ERROR_RTOL * scale:
        return math.inf, True
    return num / den, False


def _compare_one(setup, centers, kernel, methods, options):
    pts, true_vals, label = _eval_points(setup.truth, setup.eval_set)
    if len(true_vals) == 0:
        raise ContractError("empty evaluation set")
    models, reports = [], []
    for m in methods:
        model = fit(setup.data, centers, kernel, m, options)
        models.append(model)
        reports.append(_report(model.evaluate(pts) - true_vals, label))
    scale = max(float(np.max(np.abs(true_vals))), np.finfo(float).tiny)
    ratio, inf = _ratio(reports[0].mean_abs, reports[1].mean_abs, scale)
    return Comparison(tuple(methods), tuple(reports), tuple(models), ratio, inf)


def compare(config):
    """Fit both configured methods for a single (kernel, alpha, center set)."""
    if len(config.kernels) != 1 or len(config.centers) != 1:
        raise ContractError("compare needs exactly one kernel and one center distribution")
    kernel_name = config.kernels[0]
    if len(config.alphas[kernel_name]) != 1:
        raise ContractError("compare needs a single alpha; use sweep_alpha for several")
    setup = _setup(config)
    kernel = KernelSpec(kernel_name, config.alphas[kernel_name][0])
    return _compare_one(setup, setup.centers[0], kernel, config.methods, config.fit_options())


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    kernel: str
    center_distribution: str
    mean_err_original: float
    mean_err_proposed: float
    ratio: float
    max_err_original: float
    max_err_proposed: float
    cond_original: float
    cond_proposed: float
    ridge_original: float
    ridge_proposed: float
    ratio_infinite: bool
    data_seed: str
    center_seed: str
    error: str = ""


SWEEP_HEADER = tuple(f.name for f in fields(SweepRow))
_NAN = float("nan")


def _sweep_task(setup, config, kernel_name, ci, alpha):
    spec = config.centers[ci]
    common = dict(
        alpha=float(alpha),
        kernel=kernel_name,
        center_distribution=spec.kind,
        data_seed=str(config.data.seed_label),
        center_seed=str(spec.seed_label),
    )
    try:
        cmp = _compare_one(
            setup, setup.centers[ci], KernelSpec(kernel_name, alpha), config.methods, config.fit_options()
        )
    except (RBFError, np.linalg.LinAlgError) as exc:
        nan = dict.fromkeys(
            ("mean_err_original", "mean_err_proposed", "ratio", "max_err_original",
             "max_err_proposed", "cond_original", "cond_proposed", "ridge_original",
             "ridge_proposed"),
            _NAN,
        )
        return SweepRow(**common, **nan, ratio_infinite=False, error=f"{type(exc).__name__}: {exc}")
    o, p = cmp.reports
    mo, mp = cmp.models
    return SweepRow(
        **common,
        mean_err_original=o.mean_abs,
        mean_err_proposed=p.mean_abs,
        ratio=cmp.ratio,
        max_err_original=o.max_abs,
        max_err_proposed=p.max_abs,
        cond_original=mo.diagnostics.condition_estimate,
        cond_proposed=mp.diagnostics.condition_estimate,
        ridge_original=mo.diagnostics.ridge_used,
        ridge_proposed=mp.diagnostics.ridge_used,
        ratio_infinite=cmp.ratio_infinite,
    )


def sweep_alpha(config, workers=1):
    """One `SweepRow` per (kernel, center distribution, alpha), in config order.

    A failed fit produces a row with ``error`` set and NaN statistics; the
    sweep carries on. ``workers > 1`` runs rows on a thread pool without
    changing the output.
    """
    if sum(len(v) for v in config.alphas.values()) < 2:
        raise ContractError("a sweep needs at least two alpha values")
    setup = _setup(config)
    tasks = [
        (k, ci, a)
        for k in config.kernels
        for ci in range(len(config.centers))
        for a in config.alphas[k]
    ]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda t: _sweep_task(setup, config, *t), tasks))
    return [_sweep_task(setup, config, *t) for t in tasks]


def _cell(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return _fmt(v)
    return str(v)


def write_sweep_csv(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for r in rows:
            w.writerow([_cell(getattr(r, name)) for name in SWEEP_HEADER])


def read_sweep_csv(path):
    types = {f.name: f.type for f in fields(SweepRow)}
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != SWEEP_HEADER:
            raise ParseError(f"{path}: line 1: unexpected sweep header {reader.fieldnames}")
        for rec in reader:
            try:
                vals = {}
                for name, text in rec.items():
                    t = types[name]
                    if t in ("float", float):
                        vals[name] = float(text)
                    elif t in ("bool", bool):
                        vals[name] = text == "1"
                    else:
                        vals[name] = text
                rows.append(SweepRow(**vals))
            except (ValueError, TypeError) as exc:
                raise ParseError(f"{path}: line {reader.line_num}: {exc}") from None
    return rows


def unfavorable_counts(rows):
    """Count rows with ratio <= 1 per (kernel, center distribution)."""
    counts = {}
    for r in rows:
        key = (r.kernel, r.center_distribution)
        counts.setdefault(key, 0)
        if not r.error and not r.ratio > 1.0:
            counts[key] += 1
    return counts


def error_grid(model, truth, nx, ny):
    """``(nx*ny, 5)`` array of x, y, true, approx, abs_error on a row-major grid."""
    pts = regular_grid(nx, ny, truth.domain).points
    true_vals = truth.values_at(pts)
    approx = model.evaluate(pts)
    return np.column_stack([pts, true_vals, approx, np.abs(approx - true_vals)])


def write_error_grid(table, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "true", "approx", "abs_error"])
        for row in table:
            w.writerow([_fmt(v) for v in row])


def write_manifest(path, config, extra=None):
    """JSON record of the config, seeds and library versions behind an output."""
    from rbfrepro import __version__

    manifest = {
        "config": config.to_dict(),
        "seeds": {
            "data": config.data.seed_label,
            "centers": [c.seed_label for c in config.centers],
        },
        "versions": {
            "rbfrepro": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
    }
    if extra:
        manifest.update(extra)
    Path(path).write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
    return manifest
