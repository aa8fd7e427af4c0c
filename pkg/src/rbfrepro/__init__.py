"""Least-squares radial basis function approximation with linear reproduction."""

from rbfrepro.assembly import (
    DesignMatrices,
    Method,
    NormalSystem,
    assemble_original,
    assemble_proposed,
    build_design,
    residual_and_gradient,
)
from rbfrepro.exceptions import (
    AssemblyError,
    ContractError,
    DomainError,
    ParseError,
    RBFError,
    SingularSystemError,
)
from rbfrepro.fields import (
    Field,
    ScatteredData,
    franke,
    franke_field,
    load_scattered,
    sample_field,
    save_scattered,
    sinc2d,
    sinc_field,
)
from rbfrepro.fit import (
    FitOptions,
    Model,
    SolverPath,
    evaluate,
    fit,
    load_model,
    save_model,
    solve_normal,
)
from rbfrepro.kernels import KernelKind, KernelSpec, eval_kernel
from rbfrepro.pointgen import (
    Domain2,
    PointSet,
    epsilon_points,
    halton_points,
    regular_grid,
)

__version__ = "0.1.0"
