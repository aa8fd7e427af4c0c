"""
Ground-truth test surfaces and scattered-data containers.

``sinc2d`` lives on [0, 1000] x [0, 500]. ``franke`` is the classical
four-exponential surface on the unit square; `franke_field` can place it on
any rectangle by an affine change of variables.
"""
import csv
from dataclasses import dataclass
from typing import Callable

import numpy as np

from rbfrepro.exceptions import ContractError, DomainError, ParseError
from rbfrepro.pointgen import UNIT_SQUARE, Domain2, PointSet, Provenance

__all__ = [
    "ScatteredData",
    "Field",
    "sinc2d",
    "franke",
    "SINC_DOMAIN",
    "sinc_field",
    "franke_field",
    "get_field",
    "sample_field",
    "save_scattered",
    "load_scattered",
]

SINC_DOMAIN = Domain2(0.0, 1000.0, 0.0, 500.0)


@dataclass(frozen=True, eq=False)
class ScatteredData:
    """Sample sites ``points`` with one scalar value each."""

    points: PointSet
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        if v.shape[0] != len(self.points):
            raise ContractError(
                f"{v.shape[0]} values for {len(self.points)} points; lengths must match"
            )
        if not np.all(np.isfinite(v)):
            raise ContractError("values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.points)

    def scaled(self, s):
        return ScatteredData(self.points, s * self.values)


@dataclass(frozen=True)
class Field:
    """A named analytic surface ``func(x, y)`` and the rectangle it lives on."""

    name: str
    func: Callable
    domain: Domain2

    def __call__(self, x, y):
        return self.func(x, y)

    def values_at(self, points):
        p = np.asarray(points, dtype=float).reshape(-1, 2)
        return np.asarray(self.func(p[:, 0], p[:, 1]), dtype=float).reshape(-1)


def _sinc(t):
    t = np.asarray(t, dtype=float)
    out = np.ones_like(t)
    nz = t != 0.0
    out[nz] = np.sin(t[nz]) / t[nz]
    return out


def sinc2d(x, y):
    """``sinc(pi x / 1000) * sinc(pi y / 500)`` with the unnormalized sinc(t) = sin(t)/t."""
    val = _sinc(np.pi * np.asarray(x, dtype=float) / 1000.0) * _sinc(
        np.pi * np.asarray(y, dtype=float) / 500.0
    )
    return float(val) if val.ndim == 0 else val


def franke(x, y):
    """Franke's test function on the unit square."""
    x = 9.0 * np.asarray(x, dtype=float)
    y = 9.0 * np.asarray(y, dtype=float)
    val = (
        0.75 * np.exp(-((x - 2.0) ** 2 + (y - 2.0) ** 2) / 4.0)
        + 0.75 * np.exp(-((x + 1.0) ** 2) / 49.0 - (y + 1.0) / 10.0)
        + 0.5 * np.exp(-((x - 7.0) ** 2 + (y - 3.0) ** 2) / 4.0)
        - 0.2 * np.exp(-((x - 4.0) ** 2) - (y - 7.0) ** 2)
    )
    return float(val) if val.ndim == 0 else val


def sinc_field():
    return Field("sinc2d", sinc2d, SINC_DOMAIN)


def franke_field(domain=UNIT_SQUARE):
    """Franke's function, affinely transplanted from the unit square to ``domain``."""
    if domain == UNIT_SQUARE:
        return Field("franke", franke, UNIT_SQUARE)

    def func(x, y):
        u, v = domain.to_unit(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        return franke(u, v)

    return Field("franke", func, domain)


def get_field(name, domain=None):
    """Look up a field by name. ``domain`` only applies to ``franke``."""
    key = str(name).strip().lower()
    if key == "sinc2d":
        if domain is not None and domain != SINC_DOMAIN:
            raise DomainError("sinc2d is defined on 0,1000,0,500 only")
        return sinc_field()
    if key == "franke":
        return franke_field(domain or UNIT_SQUARE)
    raise DomainError(f"unknown field {name!r}; expected sinc2d or franke")


def sample_field(field, sites):
    """Evaluate ``field`` at every site, preserving order."""
    inside = field.domain.contains(sites.points)
    if not np.all(inside):
        bad = int(np.flatnonzero(~inside)[0])
        raise DomainError(
            f"site {bad} at {tuple(sites.points[bad])} lies outside the {field.name} domain "
            f"{field.domain.as_tuple()}"
        )
    return ScatteredData(sites, field.values_at(sites.points))


def save_scattered(data, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "h"])
        for (x, y), h in zip(data.points.points, data.values):
            w.writerow([format(x, ".17g"), format(y, ".17g"), format(h, ".17g")])


def load_scattered(path):
    """Read ``x,y,h`` CSV. Errors carry the 1-based file line number."""
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError(f"{path}: empty file, expected header x,y,h") from None
        missing = [c for c in ("x", "y", "h") if c not in header]
        if missing:
            raise ParseError(f"{path}: line 1: missing column(s) {', '.join(missing)}")
        cols = [header.index(c) for c in ("x", "y", "h")]
        rows = []
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"{path}: line {reader.line_num}: expected {len(header)} cells, got {len(row)}"
                )
            try:
                vals = [float(row[c]) for c in cols]
            except ValueError:
                raise ParseError(
                    f"{path}: line {reader.line_num}: non-numeric cell in {row}"
                ) from None
            if not all(np.isfinite(vals)):
                raise ParseError(f"{path}: line {reader.line_num}: non-finite value in {row}")
            rows.append(vals)
    arr = np.array(rows, dtype=float).reshape(-1, 3)
    return ScatteredData(PointSet(arr[:, :2], Provenance.EXTERNAL), arr[:, 2])
