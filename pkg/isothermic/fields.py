"""Gridded v-independent fields along the profile parameter u.

A :class:`ScalarField` stores a *jet*: row ``m`` of ``jet`` holds the samples
of the m-th u-derivative. Arithmetic acts on whole jets (Leibniz rule for
products) so derivatives of assembled quantities stay exact while the
profile supplies enough of them. Past the end of a jet, :func:`differentiate`
falls back to 4th-order finite-difference stencils.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from numbers import Real
from typing import Sequence

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.sparse import csr_matrix

from .config import settings
from .errors import InsufficientSmoothnessError, NonFiniteFieldError, StencilError

logger = logging.getLogger(__name__)

MAX_FD_ORDER = 4


class GridSpec(BaseModel):
    """Uniform 1-D grid in u; periodic grids exclude the right endpoint."""

    n: int = Field(default_factory=lambda: settings.grid_n, ge=16)
    u_min: float = Field(default_factory=lambda: settings.u_min)
    u_max: float = Field(default_factory=lambda: settings.u_max)
    periodic: bool = False

    model_config = ConfigDict(frozen=True, extra="forbid")

    @model_validator(mode="after")
    def _check_interval(self) -> "GridSpec":
        if not self.u_max > self.u_min:
            raise ValueError("u_max must be greater than u_min")
        return self

    @property
    def length(self) -> float:
        return self.u_max - self.u_min

    @property
    def h(self) -> float:
        if self.periodic:
            return self.length / self.n
        return self.length / (self.n - 1)

    def nodes(self) -> np.ndarray:
        return self.u_min + self.h * np.arange(self.n)


class DerivativeSource(str, Enum):
    ANALYTIC = "analytic"
    FINITE_DIFFERENCE = "finite_difference"


def _combine_sources(a: DerivativeSource, b: DerivativeSource) -> DerivativeSource:
    if DerivativeSource.FINITE_DIFFERENCE in (a, b):
        return DerivativeSource.FINITE_DIFFERENCE
    return DerivativeSource.ANALYTIC


def _stencil_weights(offsets: np.ndarray, order: int) -> np.ndarray:
    """Weights w with sum_j w_j f(x + s_j h) = h^order f^(order)(x) + O(h^len)."""
    size = len(offsets)
    taylor = np.array(
        [[float(s) ** q / math.factorial(q) for s in offsets] for q in range(size)]
    )
    rhs = np.zeros(size)
    rhs[order] = 1.0
    return np.linalg.solve(taylor, rhs)


@lru_cache(maxsize=64)
def _stencil_operator(n: int, order: int, periodic: bool) -> csr_matrix:
    """Unit-spacing 4th-order differentiation matrix."""
    if not 1 <= order <= MAX_FD_ORDER:
        raise StencilError(f"finite-difference order must be in 1..{MAX_FD_ORDER}, got {order}")
    half = 2 if order <= 2 else 3
    width = order + 4
    if n < max(width, 2 * half + 1):
        raise StencilError(f"grid with n={n} is too small for an order-{order} stencil")

    central_offsets = np.arange(-half, half + 1)
    central = _stencil_weights(central_offsets, order)
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []
    for i in range(n):
        if periodic:
            idx = (i + central_offsets) % n
            weights = central
        elif half <= i < n - half:
            idx = i + central_offsets
            weights = central
        else:
            start = min(max(i - width // 2, 0), n - width)
            idx = np.arange(start, start + width)
            weights = _stencil_weights(idx - i, order)
        rows.append(np.full(len(idx), i))
        cols.append(idx)
        vals.append(weights)
    return csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )


def fd_derivative(
    samples: np.ndarray, grid: GridSpec, order: int, periodic: bool | None = None
) -> np.ndarray:
    """4th-order finite-difference derivative along axis 0 of ``samples``."""
    wrap = grid.periodic if periodic is None else periodic
    operator = _stencil_operator(grid.n, order, wrap)
    return np.asarray(operator @ samples) / grid.h**order


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: GridSpec
    jet: np.ndarray
    derivative_source: DerivativeSource = DerivativeSource.ANALYTIC

    def __post_init__(self) -> None:
        jet = np.atleast_2d(np.asarray(self.jet, dtype=float))
        if jet.shape[1] != self.grid.n:
            raise ValueError(f"jet has {jet.shape[1]} samples but the grid has n={self.grid.n}")
        if not np.all(np.isfinite(jet)):
            raise NonFiniteFieldError("field contains non-finite values")
        object.__setattr__(self, "jet", jet)

    @classmethod
    def from_samples(cls, grid: GridSpec, samples: Sequence[float] | np.ndarray) -> "ScalarField":
        return cls(grid, np.asarray(samples, dtype=float)[None, :], DerivativeSource.FINITE_DIFFERENCE)

    @classmethod
    def constant(cls, grid: GridSpec, value: float, order: int = 0) -> "ScalarField":
        jet = np.zeros((order + 1, grid.n))
        jet[0] = value
        return cls(grid, jet, DerivativeSource.ANALYTIC)

    @property
    def samples(self) -> np.ndarray:
        return self.jet[0]

    @property
    def order(self) -> int:
        return self.jet.shape[0] - 1

    @property
    def is_analytic(self) -> bool:
        return self.derivative_source is DerivativeSource.ANALYTIC

    def truncated(self, order: int) -> "ScalarField":
        return ScalarField(self.grid, self.jet[: order + 1], self.derivative_source)

    def derivative(self, order: int = 1) -> "ScalarField":
        if order < 1:
            raise ValueError("derivative order must be positive")
        if order <= self.order:
            return ScalarField(self.grid, self.jet[order:], self.derivative_source)
        missing = order - self.order
        if missing > MAX_FD_ORDER:
            raise InsufficientSmoothnessError(
                f"need {order} derivatives but only {self.order} are known and stencils reach {MAX_FD_ORDER}"
            )
        if self.is_analytic:
            logger.warning(
                "Analytic jet exhausted at order %d; using finite differences for order %d",
                self.order,
                order,
            )
        top = fd_derivative(self.jet[-1], self.grid, missing)
        return ScalarField(self.grid, top[None, :], DerivativeSource.FINITE_DIFFERENCE)

    def _coerce(self, other: object) -> "ScalarField | None":
        if isinstance(other, ScalarField):
            if other.grid != self.grid:
                raise ValueError("fields live on different grids")
            return other
        if isinstance(other, Real):
            return ScalarField.constant(self.grid, float(other), self.order)
        return None

    def __add__(self, other: object) -> "ScalarField":
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        m = min(self.order, rhs.order) + 1
        return ScalarField(
            self.grid,
            self.jet[:m] + rhs.jet[:m],
            _combine_sources(self.derivative_source, rhs.derivative_source),
        )

    __radd__ = __add__

    def __neg__(self) -> "ScalarField":
        return ScalarField(self.grid, -self.jet, self.derivative_source)

    def __sub__(self, other: object) -> "ScalarField":
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return self + (-rhs)

    def __rsub__(self, other: object) -> "ScalarField":
        return (-self) + other

    def __mul__(self, other: object) -> "ScalarField":
        if isinstance(other, Real):
            return ScalarField(self.grid, self.jet * float(other), self.derivative_source)
        if not isinstance(other, ScalarField):
            return NotImplemented
        rhs = self._coerce(other)
        m = min(self.order, rhs.order) + 1
        product = np.zeros((m, self.grid.n))
        for j in range(m):
            for i in range(j + 1):
                product[j] += math.comb(j, i) * self.jet[i] * rhs.jet[j - i]
        return ScalarField(
            self.grid, product, _combine_sources(self.derivative_source, rhs.derivative_source)
        )

    __rmul__ = __mul__

    def __truediv__(self, other: object) -> "ScalarField":
        if isinstance(other, Real):
            return self * (1.0 / float(other))
        return NotImplemented

    def __pow__(self, exponent: int) -> "ScalarField":
        if not isinstance(exponent, int) or exponent < 0:
            return NotImplemented
        result = ScalarField.constant(self.grid, 1.0, self.order)
        for _ in range(exponent):
            result = result * self
        return result


def differentiate(f: ScalarField, order: int) -> ScalarField:
    """∂_u^order of ``f``: exact from the jet when available, otherwise stencils."""
    if not 1 <= order <= MAX_FD_ORDER:
        raise StencilError(f"order must be in 1..{MAX_FD_ORDER}, got {order}")
    return f.derivative(order)


def derivative_agreement(f: ScalarField) -> dict[int, float]:
    """Max |jet row m - finite difference of samples| for m = 1..min(4, order)."""
    return {
        m: float(np.max(np.abs(f.jet[m] - fd_derivative(f.samples, f.grid, m))))
        for m in range(1, min(MAX_FD_ORDER, f.order) + 1)
    }


# Rounding in an order-m stencil grows like eps * max|f| / h^m. On the
# default grid this floor passes the h^4 truncation term at orders 3 and 4.
ROUNDOFF_FACTOR = 1e3


def agreement_bound(f: ScalarField, m: int) -> float:
    """Reachable bound for ``derivative_agreement(f)[m]``.

    100 h⁴ max|f^(m+4)| for truncation plus the rounding floor; needs a jet
    of order m + 4.
    """
    if f.order < m + 4:
        raise InsufficientSmoothnessError(f"bound for order {m} needs a jet of order {m + 4}, have {f.order}")
    h = f.grid.h
    truncation = 100 * h**4 * max_norm(f.jet[m + 4])
    roundoff = ROUNDOFF_FACTOR * np.finfo(float).eps * max(1.0, max_norm(f.samples)) / h**m
    return float(truncation + roundoff)


@dataclass(frozen=True, eq=False)
class VectorField:
    """Samples of an R^{4,1}-valued field, shape ``(n, 5)``."""

    grid: GridSpec
    samples: np.ndarray

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=float)
        if samples.shape != (self.grid.n, 5):
            raise ValueError(f"expected shape ({self.grid.n}, 5), got {samples.shape}")
        if not np.all(np.isfinite(samples)):
            raise NonFiniteFieldError("vector field contains non-finite values")
        object.__setattr__(self, "samples", samples)

    @classmethod
    def constant(cls, grid: GridSpec, vec: np.ndarray) -> "VectorField":
        return cls(grid, np.tile(np.asarray(vec, dtype=float), (grid.n, 1)))

    @classmethod
    def zeros(cls, grid: GridSpec) -> "VectorField":
        return cls(grid, np.zeros((grid.n, 5)))

    def differentiate(self, order: int = 1) -> "VectorField":
        # Ambient curves need not close up, so periodic wrap is never used here.
        return VectorField(self.grid, fd_derivative(self.samples, self.grid, order, periodic=False))

    def mean(self) -> np.ndarray:
        return self.samples.mean(axis=0)

    def __add__(self, other: "VectorField") -> "VectorField":
        if not isinstance(other, VectorField):
            return NotImplemented
        return VectorField(self.grid, self.samples + other.samples)

    def __sub__(self, other: "VectorField") -> "VectorField":
        if not isinstance(other, VectorField):
            return NotImplemented
        return VectorField(self.grid, self.samples - other.samples)

    def __neg__(self) -> "VectorField":
        return VectorField(self.grid, -self.samples)

    def __mul__(self, other: object) -> "VectorField":
        if isinstance(other, ScalarField):
            return VectorField(self.grid, self.samples * other.samples[:, None])
        if isinstance(other, Real):
            return VectorField(self.grid, self.samples * float(other))
        if isinstance(other, np.ndarray) and other.shape == (self.grid.n,):
            return VectorField(self.grid, self.samples * other[:, None])
        return NotImplemented

    __rmul__ = __mul__


def max_norm(samples: np.ndarray) -> float:
    return float(np.max(np.abs(samples))) if samples.size else 0.0


@dataclass(frozen=True)
class ConstancyResult:
    is_constant: bool
    value: float
    deviation: float


def constancy_test(f: ScalarField | np.ndarray, tol: float) -> ConstancyResult:
    if tol <= 0:
        raise ValueError("tol must be positive")
    samples = f.samples if isinstance(f, ScalarField) else np.asarray(f, dtype=float)
    mean = float(np.mean(samples))
    deviation = float(np.max(np.abs(samples - mean))) / max(1.0, abs(mean))
    return ConstancyResult(deviation < tol, mean, deviation)


@dataclass(frozen=True)
class FitResult:
    coefficients: tuple[float, ...]
    residual: float
    degenerate: bool = False
    rank: int = 0
    remainder: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)


def fit_constants(
    basis: Sequence[ScalarField | np.ndarray],
    target: ScalarField | np.ndarray,
    rcond: float | None = None,
) -> FitResult:
    """Least-squares constants c minimizing ||target + sum_i c_i basis_i||_2.

    Columns are normalized before the solve so ``rcond`` is a relative
    singular-value cutoff; a rank-deficient system is flagged degenerate and
    answered with the minimum-norm solution.
    """
    if not basis:
        raise ValueError("basis must not be empty")
    columns = [b.samples if isinstance(b, ScalarField) else np.asarray(b, dtype=float) for b in basis]
    rhs = target.samples if isinstance(target, ScalarField) else np.asarray(target, dtype=float)
    if any(col.shape != rhs.shape for col in columns):
        raise ValueError("basis and target must share a grid")

    matrix = np.column_stack(columns)
    norms = np.linalg.norm(matrix, axis=0)
    live = norms > 0
    coefficients = np.zeros(matrix.shape[1])
    rank = 0
    if np.any(live):
        scaled = matrix[:, live] / norms[live]
        solution, _, rank, _ = scipy.linalg.lstsq(
            scaled, -rhs, cond=settings.lstsq_rcond if rcond is None else rcond
        )
        coefficients[live] = solution / norms[live]
    degenerate = int(rank) < matrix.shape[1]
    if degenerate:
        logger.debug("Degenerate fit: rank %d for %d basis fields", rank, matrix.shape[1])
    remainder = rhs + matrix @ coefficients
    residual = float(np.sqrt(np.mean(remainder**2)))
    return FitResult(tuple(float(c) for c in coefficients), residual, degenerate, int(rank), remainder)
