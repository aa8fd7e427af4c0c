"""
Point distributions on an axis-aligned rectangle: Halton, regular grid and
"epsilon" points (a regular grid with bounded uniform drift per coordinate).
"""
import csv
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from rbfrepro.exceptions import ContractError, DomainError, ParseError

__all__ = [
    "Domain2",
    "Provenance",
    "PointSet",
    "radical_inverse",
    "halton_points",
    "regular_grid",
    "epsilon_points",
    "grid_shape",
    "save_points",
    "load_points",
]


@dataclass(frozen=True)
class Domain2:
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        vals = [float(v) for v in (self.x_min, self.x_max, self.y_min, self.y_max)]
        if not all(math.isfinite(v) for v in vals):
            raise DomainError(f"domain bounds must be finite: {vals}")
        if not (vals[0] < vals[1] and vals[2] < vals[3]):
            raise DomainError(f"domain must satisfy x_min < x_max and y_min < y_max: {vals}")
        for name, v in zip(("x_min", "x_max", "y_min", "y_max"), vals):
            object.__setattr__(self, name, v)

    @classmethod
    def parse(cls, text):
        """Parse ``"xmin,xmax,ymin,ymax"``."""
        try:
            parts = [float(p) for p in str(text).split(",")]
        except ValueError:
            raise DomainError(f"cannot parse domain {text!r}") from None
        if len(parts) != 4:
            raise DomainError(f"domain needs 4 comma-separated numbers, got {text!r}")
        return cls(*parts)

    @property
    def width(self):
        return self.x_max - self.x_min

    @property
    def height(self):
        return self.y_max - self.y_min

    def as_tuple(self):
        return (self.x_min, self.x_max, self.y_min, self.y_max)

    def from_unit(self, u, v):
        """Affine map from the unit square; no snapping at the boundary."""
        return self.x_min + u * self.width, self.y_min + v * self.height

    def to_unit(self, x, y):
        return (x - self.x_min) / self.width, (y - self.y_min) / self.height

    def contains(self, points):
        """Boolean mask of points inside the closed rectangle."""
        p = np.asarray(points, dtype=float).reshape(-1, 2)
        return (
            (p[:, 0] >= self.x_min)
            & (p[:, 0] <= self.x_max)
            & (p[:, 1] >= self.y_min)
            & (p[:, 1] <= self.y_max)
        )

    def __str__(self):
        return ",".join(repr(v) for v in self.as_tuple())


UNIT_SQUARE = Domain2(0.0, 1.0, 0.0, 1.0)


class Provenance(enum.Enum):
    HALTON = "halton"
    EPSILON = "epsilon"
    REGULAR_GRID = "grid"
    EXTERNAL = "external"


@dataclass(frozen=True, eq=False)
class PointSet:
    """An ordered, read-only set of 2D points.

    ``points`` is stored as a ``(n, 2)`` float array with the write flag
    cleared. ``seed`` records the RNG seed for generated epsilon sets.
    """

    points: np.ndarray
    provenance: Provenance = Provenance.EXTERNAL
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        p = np.array(self.points, dtype=float).reshape(-1, 2)
        if not np.all(np.isfinite(p)):
            raise ContractError("point coordinates must be finite")
        p.setflags(write=False)
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "provenance", Provenance(self.provenance))

    def __len__(self):
        return self.points.shape[0]

    def __iter__(self):
        return iter(self.points)

    @property
    def x(self):
        return self.points[:, 0]

    @property
    def y(self):
        return self.points[:, 1]

    def bounding_domain(self):
        if len(self) == 0:
            raise ContractError("empty point set has no bounding box")
        lo = self.points.min(axis=0)
        hi = self.points.max(axis=0)
        return Domain2(lo[0], hi[0], lo[1], hi[1])


def radical_inverse(i, base):
    """Van der Corput radical inverse of the non-negative integer ``i``.

    The reversed digit string is accumulated as an integer numerator over
    ``base**k`` and divided once, so the result is the correctly rounded
    double of the exact fraction.
    """
    if i < 0:
        raise DomainError("radical inverse index must be non-negative")
    num, den = 0, 1
    while i > 0:
        i, digit = divmod(i, base)
        num = num * base + digit
        den *= base
    return num / den


def halton_points(n, start_index=1, domain=UNIT_SQUARE):
    """Halton points in bases (2, 3), starting at sequence index ``start_index``.

    Index 0 is the degenerate point (0, 0), hence the default of 1.
    """
    n = int(n)
    start_index = int(start_index)
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    if start_index < 1:
        raise DomainError(f"start_index must be >= 1, got {start_index}")
    idx = range(start_index, start_index + n)
    u = np.array([radical_inverse(i, 2) for i in idx], dtype=float)
    v = np.array([radical_inverse(i, 3) for i in idx], dtype=float)
    x, y = domain.from_unit(u, v)
    return PointSet(np.column_stack([x, y]), Provenance.HALTON, meta={"start_index": start_index})


def _check_grid(nx, ny):
    nx, ny = int(nx), int(ny)
    if nx < 2 or ny < 2:
        raise DomainError(f"grid needs nx >= 2 and ny >= 2, got ({nx}, {ny})")
    return nx, ny


def _grid_array(nx, ny, domain):
    xs = np.linspace(domain.x_min, domain.x_max, nx)
    ys = np.linspace(domain.y_min, domain.y_max, ny)
    gx, gy = np.meshgrid(xs, ys)  # y outer, x inner
    return np.column_stack([gx.ravel(), gy.ravel()])


def regular_grid(nx, ny, domain=UNIT_SQUARE):
    """Tensor grid including the domain corners, row-major (y outer, x inner)."""
    nx, ny = _check_grid(nx, ny)
    return PointSet(_grid_array(nx, ny, domain), Provenance.REGULAR_GRID, meta={"nx": nx, "ny": ny})


def epsilon_points(nx, ny, jitter_fraction=0.5, seed=0, domain=UNIT_SQUARE):
    """Regular grid with every coordinate displaced by a uniform draw.

    The drift in each axis is uniform on ``[-j*s/2, j*s/2]`` with ``s`` the
    grid spacing of that axis, and the result is clamped to the domain.
    Draws come from numpy's PCG64 generator seeded with ``seed``, x and y
    drifts interleaved per point.
    """
    nx, ny = _check_grid(nx, ny)
    j = float(jitter_fraction)
    if not 0.0 <= j <= 1.0:
        raise DomainError(f"jitter_fraction must lie in [0, 1], got {jitter_fraction!r}")
    base = _grid_array(nx, ny, domain)
    half = 0.5 * j * np.array([domain.width / (nx - 1), domain.height / (ny - 1)])
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    drift = rng.uniform(-1.0, 1.0, size=base.shape) * half
    pts = base + drift
    pts[:, 0] = np.clip(pts[:, 0], domain.x_min, domain.x_max)
    pts[:, 1] = np.clip(pts[:, 1], domain.y_min, domain.y_max)
    return PointSet(
        pts, Provenance.EPSILON, seed=int(seed), meta={"nx": nx, "ny": ny, "jitter": j}
    )


def grid_shape(m):
    """Factor ``m`` as ``nx * ny`` with the factors as close as possible.

    ``nx >= ny`` and both must be at least 2, otherwise `DomainError`.
    """
    m = int(m)
    for ny in range(math.isqrt(m), 1, -1):
        if m % ny == 0:
            return m // ny, ny
    raise DomainError(f"{m} points cannot be arranged on a grid with both sides >= 2")


def save_points(points, path):
    """Write a point set as CSV with header ``x,y``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y"])
        for x, y in points.points:
            w.writerow([format(x, ".17g"), format(y, ".17g")])


def load_points(path):
    """Read a CSV with (at least) columns ``x`` and ``y``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError(f"{path}: empty file, expected header x,y") from None
        try:
            ix, iy = header.index("x"), header.index("y")
        except ValueError:
            raise ParseError(f"{path}: line 1: header must contain x and y, got {header}") from None
        rows = []
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append((float(row[ix]), float(row[iy])))
            except (ValueError, IndexError):
                raise ParseError(f"{path}: line {reader.line_num}: cannot parse {row}") from None
    return PointSet(np.array(rows, dtype=float).reshape(-1, 2), Provenance.EXTERNAL)
