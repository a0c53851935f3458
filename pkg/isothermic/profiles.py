"""Profile-curve curvature data 𝐤(u) with derivative jets."""

from __future__ import annotations

import logging
import math

import numpy as np
from numpy.polynomial import Polynomial
from scipy.ndimage import gaussian_filter1d

from .config import settings
from .errors import ProfileEscapedError, SurfaceSpecError
from .fields import MAX_FD_ORDER, DerivativeSource, GridSpec, ScalarField, fd_derivative
from .models import (
    ConstantProfile,
    ElasticProfile,
    NoiseProfile,
    PolynomialProfile,
    ProfileSpec,
    SamplesProfile,
    SineProfile,
)

logger = logging.getLogger(__name__)


def default_order(depth: int | None = None) -> int:
    """Derivative budget for a series of the given depth."""
    return 2 * (settings.depth if depth is None else depth) + 2


def generate(p: ProfileSpec, g: GridSpec, order: int | None = None) -> ScalarField:
    order = default_order() if order is None else order
    if order < 0:
        raise ValueError("order must be non-negative")
    u = g.nodes()
    if isinstance(p, ConstantProfile):
        return ScalarField.constant(g, p.value, order)
    if isinstance(p, SineProfile):
        jet = np.array(
            [
                p.amplitude * p.frequency**m * np.sin(p.frequency * u + p.phase + m * math.pi / 2)
                for m in range(order + 1)
            ]
        )
        jet[0] += p.offset
        return ScalarField(g, jet)
    if isinstance(p, PolynomialProfile):
        poly = Polynomial(p.coefficients)
        return ScalarField(g, np.array([poly.deriv(m)(u) for m in range(order + 1)]))
    if isinstance(p, ElasticProfile):
        return _elastic(p, g, order)
    if isinstance(p, SamplesProfile):
        if p.values is not None:
            samples = np.asarray(p.values, dtype=float)
        else:
            from .stores import read_profile_csv

            samples = read_profile_csv(p.path)
        return sampled_profile(g, samples)
    if isinstance(p, NoiseProfile):
        return sampled_profile(
            g, smoothed_noise(g, p.seed, width=p.width, amplitude=p.amplitude, offset=p.offset)
        )
    raise SurfaceSpecError(f"Unknown profile kind '{p.kind}'")


def sampled_profile(g: GridSpec, samples: np.ndarray) -> ScalarField:
    """Raw samples with a finite-difference jet of order 4."""
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (g.n,):
        raise SurfaceSpecError(f"profile has {samples.size} samples but the grid has n={g.n}")
    jet = [samples] + [fd_derivative(samples, g, m) for m in range(1, MAX_FD_ORDER + 1)]
    return ScalarField(g, np.array(jet), DerivativeSource.FINITE_DIFFERENCE)


def smoothed_noise(
    grid: GridSpec, seed: int, width: float = 8.0, amplitude: float = 1.0, offset: float = 2.0
) -> np.ndarray:
    """Gaussian-smoothed white noise scaled to ``offset ± amplitude``."""
    rng = np.random.default_rng(seed)
    white = rng.standard_normal(grid.n)
    smooth = gaussian_filter1d(white, sigma=width, mode="wrap" if grid.periodic else "reflect")
    peak = float(np.max(np.abs(smooth)))
    if peak > 0:
        smooth = smooth / peak
    return offset + amplitude * smooth


def _elastic_rhs(p: ElasticProfile, k: float, kp: float) -> tuple[float, float]:
    a = p.alpha + p.inverse_c
    return kp, p.forcing - a * k - 0.5 * k**3


def _elastic(p: ElasticProfile, g: GridSpec, order: int) -> ScalarField:
    h = g.h
    k = np.empty(g.n)
    kp = np.empty(g.n)
    k[0], kp[0] = p.k0, p.k1
    for i in range(g.n - 1):
        y0, y1 = k[i], kp[i]
        a0, b0 = _elastic_rhs(p, y0, y1)
        a1, b1 = _elastic_rhs(p, y0 + 0.5 * h * a0, y1 + 0.5 * h * b0)
        a2, b2 = _elastic_rhs(p, y0 + 0.5 * h * a1, y1 + 0.5 * h * b1)
        a3, b3 = _elastic_rhs(p, y0 + h * a2, y1 + h * b2)
        k[i + 1] = y0 + h * (a0 + 2 * a1 + 2 * a2 + a3) / 6
        kp[i + 1] = y1 + h * (b0 + 2 * b1 + 2 * b2 + b3) / 6
        if not (abs(k[i + 1]) <= settings.blowup_threshold and math.isfinite(kp[i + 1])):
            raise ProfileEscapedError(
                f"profile escaped: |k| exceeded {settings.blowup_threshold:g} at u={g.u_min + (i + 1) * h:g}"
            )
    logger.debug("Integrated elastic profile alpha=%g forcing=%g over n=%d", p.alpha, p.forcing, g.n)
    return ScalarField(g, _elastic_jet(p, k, kp, order))


def _elastic_jet(p: ElasticProfile, k: np.ndarray, kp: np.ndarray, order: int) -> np.ndarray:
    # Differentiate the ODE: k^(m) = [m == 2]*forcing - a*k^(m-2) - (k^3)^(m-2) / 2
    a = p.alpha + p.inverse_c
    rows = [k, kp][: order + 1]
    square: list[np.ndarray] = []
    cube: list[np.ndarray] = []
    for m in range(2, order + 1):
        j = m - 2
        square.append(sum(math.comb(j, i) * rows[i] * rows[j - i] for i in range(j + 1)))
        cube.append(sum(math.comb(j, i) * square[i] * rows[j - i] for i in range(j + 1)))
        row = -a * rows[j] - 0.5 * cube[j]
        if m == 2:
            row = row + p.forcing
        rows.append(row)
    return np.array(rows)


def elastic_energy(field: ScalarField, spec: ElasticProfile) -> ScalarField:
    """First integral k'^2/2 + k^4/8 + (alpha + 1/C) k^2/2 - forcing*k."""
    a = spec.alpha + spec.inverse_c
    kp = field.derivative(1)
    k = field.truncated(kp.order)
    return 0.5 * kp * kp + k**4 / 8 + (0.5 * a) * k * k - spec.forcing * k
