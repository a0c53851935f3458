"""Truncated formal conserved quantities p(t) = Σ_{i≤0} p_i tⁱ in codimension 1.

Each coefficient is p_i = α_iψ + β_iψ_u + γ_iψ̂ + δ_iN. The recursion

    γ_{i-1} = γ_i''/2 + cγ_i + 2kδ_i
    δ_{i-1} = (r_{i-1} - Σ_{k,l<0, k+l=i-1} <p_k, p_l>) / (2δ₀)

with β_i = -γ_i' and α_i = γ_i''/2 + 2k²γ_i is fully algebraic once p₀ = δ₀N
is fixed, so the build is deterministic. The residual operations below
check the defining identities independently of how the series was built.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import settings
from .errors import ConfigError, InsufficientSmoothnessError
from .fields import ScalarField, VectorField, constancy_test, max_norm
from .frame import Direction, FrameBundle, eta_apply
from .lorentz import inner

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RSeries:
    """Target series r(t) = (p(t), p(t)); ``coefficients[m]`` is r_{-m}."""

    coefficients: tuple[float, ...] = (1.0,)

    def __post_init__(self) -> None:
        coefficients = tuple(float(x) for x in self.coefficients)
        if not coefficients or not coefficients[0] > 0:
            raise ConfigError("r0 must be positive")
        object.__setattr__(self, "coefficients", coefficients)

    def __getitem__(self, index: int) -> float:
        if index > 0:
            raise IndexError("r(t) has no positive powers")
        return self.coefficients[-index] if -index < len(self.coefficients) else 0.0

    @property
    def r0(self) -> float:
        return self.coefficients[0]


@dataclass(frozen=True, eq=False)
class FCQSeries:
    frame: FrameBundle
    r: RSeries
    depth: int
    gamma: dict[int, ScalarField]
    delta: dict[int, ScalarField]
    alpha: dict[int, ScalarField]
    beta: dict[int, ScalarField]
    p: dict[int, VectorField]
    sign: int = 1
    shift_coefficients: tuple[float, ...] = field(default=())

    @property
    def indices(self) -> range:
        return range(0, -self.depth - 1, -1)

    @property
    def delta0(self) -> float:
        return float(self.delta[0].samples[0])


def assemble(
    frame: FrameBundle,
    alpha: ScalarField,
    beta: ScalarField,
    gamma: ScalarField,
    delta: ScalarField,
) -> VectorField:
    return (
        frame.psi * alpha
        + frame.psi_u * beta
        + frame.psi_hat * gamma
        + frame.N * delta
    )


def gram_product(i: int, j: int, s: FCQSeries) -> ScalarField:
    """<p_i, p_j> from the coefficient fields."""
    return (
        -(s.alpha[i] * s.gamma[j])
        - s.gamma[i] * s.alpha[j]
        + s.beta[i] * s.beta[j]
        + s.delta[i] * s.delta[j]
    )


def extend(frame: FrameBundle, r: RSeries, D: int, sign: int = 1) -> FCQSeries:
    if D < 1:
        raise ValueError("depth must be at least 1")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if frame.sampled and D > settings.max_sampled_depth:
        raise InsufficientSmoothnessError(
            f"insufficient smoothness: sampled profiles support depth <= {settings.max_sampled_depth}, got {D}"
        )
    if frame.k.order < 2 * D + 2 and not frame.sampled:
        logger.warning(
            "Profile jet has order %d but depth %d wants %d; deep coefficients use finite differences",
            frame.k.order,
            D,
            2 * D + 2,
        )

    order = frame.k.order
    grid = frame.grid
    k, c = frame.k, frame.c
    delta0 = sign * math.sqrt(r.r0)
    zero = ScalarField.constant(grid, 0.0, order)
    gamma = {0: zero}
    delta = {0: ScalarField.constant(grid, delta0, order)}
    alpha = {0: zero}
    beta = {0: zero}
    p = {0: frame.N * delta0}

    series = FCQSeries(frame, r, D, gamma, delta, alpha, beta, p, sign)
    for i in range(0, -D, -1):
        if i == 0:
            g_next = k * (2 * delta0)
        else:
            g_next = gamma[i].derivative(2) * 0.5 + c * gamma[i] + k * delta[i] * 2
        terms = [gram_product(a, i - 1 - a, series) for a in range(i, 0) if i <= i - 1 - a < 0]
        if terms:
            d_next = (r[i - 1] - sum(terms[1:], terms[0])) * (1.0 / (2 * delta0))
        else:
            d_next = ScalarField.constant(grid, r[i - 1] / (2 * delta0), order)
        gamma[i - 1] = g_next
        delta[i - 1] = d_next
        beta[i - 1] = -g_next.derivative(1)
        alpha[i - 1] = g_next.derivative(2) * 0.5 + k * k * g_next * 2
        p[i - 1] = assemble(frame, alpha[i - 1], beta[i - 1], g_next, d_next)
        logger.debug(
            "Coefficient %d: max|gamma|=%.3g max|delta|=%.3g jet order %d",
            i - 1,
            max_norm(g_next.samples),
            max_norm(d_next.samples),
            g_next.order,
        )
    logger.info("Extended formal conserved quantity to depth %d", D)
    return series


def flip_sign(s: FCQSeries) -> FCQSeries:
    """Rebuild with p₀ -> -p₀; every coefficient is negated."""
    return extend(s.frame, s.r, s.depth, sign=-s.sign)


def shift(s: FCQSeries, coefficients: Sequence[float]) -> FCQSeries:
    """Multiply p(t) by f(t) = 1 + a₁t⁻¹ + … + a_m t⁻ᵐ.

    p̂_i = Σ_j a_j p_{i+j} (a₀ = 1) and r̂ = f²r, truncated at the series depth.
    """
    a = (1.0, *(float(x) for x in coefficients))
    if not all(math.isfinite(x) for x in a):
        raise ValueError("shift coefficients must be finite")

    def combine(table: dict[int, ScalarField | VectorField]) -> dict:
        out = {}
        for i in s.indices:
            acc = table[i]
            for j in range(1, len(a)):
                if i + j <= 0 and a[j] != 0.0:
                    acc = acc + table[i + j] * a[j]
            out[i] = acc
        return out

    f_squared = np.convolve(a, a)
    r_hat = np.convolve(f_squared, np.array(s.r.coefficients))[: 2 * s.depth + 1]
    return FCQSeries(
        frame=s.frame,
        r=RSeries(tuple(r_hat)),
        depth=s.depth,
        gamma=combine(s.gamma),
        delta=combine(s.delta),
        alpha=combine(s.alpha),
        beta=combine(s.beta),
        p=combine(s.p),
        sign=s.sign,
        shift_coefficients=a[1:],
    )


@dataclass(frozen=True)
class ConservationRow:
    m: int
    value: float
    deviation: float
    offset: float
    ambient_deviation: float
    ambient_offset: float

    @property
    def worst(self) -> float:
        return max(self.deviation, self.offset, self.ambient_deviation, self.ambient_offset)


def conservation_residual(s: FCQSeries) -> list[ConservationRow]:
    """Coefficients of (p(t), p(t)) for 0 ≥ m ≥ -D.

    Each coefficient is formed twice: from the coefficient fields and from
    the assembled ambient vectors with the Lorentz pairing.
    """
    rows = []
    for m in s.indices:
        pairs = [(a, m - a) for a in range(m, 1) if m <= m - a <= 0]
        field_sum = sum(gram_product(a, b, s).samples for a, b in pairs)
        ambient_sum = sum(inner(s.p[a].samples, s.p[b].samples) for a, b in pairs)
        constancy = constancy_test(field_sum, 1.0)
        ambient = constancy_test(ambient_sum, 1.0)
        target = s.r[m]
        rows.append(
            ConservationRow(
                m=m,
                value=constancy.value,
                deviation=constancy.deviation,
                offset=max_norm(field_sum - target) / max(1.0, abs(target)),
                ambient_deviation=ambient.deviation,
                ambient_offset=max_norm(ambient_sum - target) / max(1.0, abs(target)),
            )
        )
        logger.debug("Conservation m=%d deviation=%.3g", m, rows[-1].worst)
    return rows


@dataclass(frozen=True)
class ParallelismRow:
    index: int
    u: float
    v: float

    @property
    def worst(self) -> float:
        return max(self.u, self.v)


def parallelism_residual(s: FCQSeries) -> list[ParallelismRow]:
    """Rows of (d + tη)p(t) = 0: the t¹ row ηp₀ = 0, then dp_i + ηp_{i-1} = 0."""
    fb = s.frame
    v = fb.v_data
    rows = [
        ParallelismRow(
            index=1,
            u=max_norm(eta_apply(fb, Direction.U, s.p[0]).samples),
            v=max_norm(eta_apply(fb, Direction.V, s.p[0]).samples),
        )
    ]
    for i in range(0, -s.depth, -1):
        du = s.p[i].differentiate(1) + eta_apply(fb, Direction.U, s.p[i - 1])
        dv = (
            v.psi_v * s.alpha[i]
            + v.psi_uv * s.beta[i]
            + v.psi_hat_v * s.gamma[i]
            + v.N_v * s.delta[i]
            + eta_apply(fb, Direction.V, s.p[i - 1])
        )
        rows.append(ParallelismRow(index=i, u=max_norm(du.samples), v=max_norm(dv.samples)))
        logger.debug("Parallelism row %d: u=%.3g v=%.3g", i, rows[-1].u, rows[-1].v)
    return rows


def consistency_q_residual(s: FCQSeries) -> dict[int, float]:
    """max |δ_i'/2 - (γ_i'k - γ_ik')| per index."""
    k = s.frame.k
    k_u = k.derivative(1)
    out = {}
    for i in s.indices:
        gamma_u = s.gamma[i].derivative(1)
        expression = s.delta[i].derivative(1) * 0.5 - (gamma_u * k - s.gamma[i] * k_u)
        out[i] = max_norm(expression.samples)
    return out


@dataclass(frozen=True)
class EtaPairing:
    real: float
    imag: float

    @property
    def worst(self) -> float:
        return max(self.real, self.imag)


def eta_pairing_identity(s: FCQSeries, i: int, j: int) -> EtaPairing:
    """<η_{∂z} p_i, p_j> against γ_{i,z̄}γ_j - γ_iγ_{j,z̄}.

    With η_{∂z} = (η_{∂u} - iη_{∂v})/2 the real part reads
    <η_{∂u}p_i, p_j>/2 = (γ_i'γ_j - γ_iγ_j')/2 and the imaginary part
    -<η_{∂v}p_i, p_j>/2 = 0.
    """
    fb = s.frame
    left_u = inner(eta_apply(fb, Direction.U, s.p[i]).samples, s.p[j].samples) * 0.5
    left_v = -inner(eta_apply(fb, Direction.V, s.p[i]).samples, s.p[j].samples) * 0.5
    gi, gj = s.gamma[i], s.gamma[j]
    right = (gi.derivative(1) * gj - gi * gj.derivative(1)).samples * 0.5
    return EtaPairing(real=max_norm(left_u - right), imag=max_norm(left_v))
