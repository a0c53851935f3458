"""Conformal frames of profile-curve surfaces on the line v = 0.

Surfaces of revolution and cones are products of a curve φ₁ in a conic of
W with a circle (resp. hyperbola) φ₂ in W^⊥; cylinders use the null pair
v₀, v_∞. Every frame quantity is v-independent, so v-derivatives come from
the closed forms of φ₂ and only u is sampled.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np
from scipy.interpolate import BPoly

from .config import settings
from .errors import IntegrationAccuracyError, SurfaceSpecError
from .fields import GridSpec, ScalarField, VectorField, fd_derivative, max_norm
from .lorentz import E0, E1, E2, E3, E4, V0, V_INF, WedgeAction, inner, wedge_apply
from .models import SurfaceKind, SurfaceSpec
from .profiles import generate

logger = logging.getLogger(__name__)

GAUSS_EDGE = 6


class Direction(str, Enum):
    U = "u"
    V = "v"


@dataclass(frozen=True, eq=False)
class VDerivatives:
    """∂_v of the frame vectors at v = 0."""

    psi_v: VectorField
    psi_uv: VectorField
    psi_vv: VectorField
    N_v: VectorField
    psi_hat_v: VectorField


@dataclass(frozen=True, eq=False)
class FrameBundle:
    kind: SurfaceKind
    C: float | None
    curvature: ScalarField
    psi: VectorField
    psi_u: VectorField
    psi_hat: VectorField
    N: VectorField
    c: ScalarField
    k: ScalarField
    phi1: VectorField
    phi1_u: VectorField
    normal: VectorField
    phi2: np.ndarray
    phi2_v: np.ndarray
    v_data: VDerivatives
    # Vectors the constant term of a type-1 series is orthogonal to.
    complement: dict[str, np.ndarray] = field(default_factory=dict)
    drift: float = 0.0

    @property
    def grid(self) -> GridSpec:
        return self.curvature.grid

    @property
    def sampled(self) -> bool:
        return not self.curvature.is_analytic


def _half_step_curvature(curvature: ScalarField) -> np.ndarray:
    """𝐤 at the RK4 midpoints from a Hermite interpolant of the jet."""
    g = curvature.grid
    u = g.nodes()
    rows = min(curvature.order, 2) + 1
    interpolant = BPoly.from_derivatives(u, curvature.jet[:rows].T)
    return interpolant(u[:-1] + 0.5 * g.h)


def _rk4(
    rhs: Callable[[np.ndarray, float], np.ndarray],
    y0: np.ndarray,
    curvature: ScalarField,
) -> np.ndarray:
    """Classical RK4 with step h; rhs(y, 𝐤) sees 𝐤 at nodes and midpoints."""
    h = curvature.grid.h
    kappa = curvature.samples
    mid = _half_step_curvature(curvature)
    states = np.empty((curvature.grid.n, y0.size))
    states[0] = y0
    for i in range(curvature.grid.n - 1):
        y = states[i]
        s1 = rhs(y, kappa[i])
        s2 = rhs(y + 0.5 * h * s1, mid[i])
        s3 = rhs(y + 0.5 * h * s2, mid[i])
        s4 = rhs(y + h * s3, kappa[i + 1])
        states[i + 1] = y + h * (s1 + 2 * s2 + 2 * s3 + s4) / 6
    return states


def build_frame(spec: SurfaceSpec, order: int | None = None) -> FrameBundle:
    curvature = generate(spec.profile, spec.grid, order)
    if spec.kind is SurfaceKind.CYLINDER:
        fb = _cylinder_frame(curvature)
    elif spec.C is None or spec.C == 0.0:
        raise SurfaceSpecError(f"{spec.kind.value} needs a nonzero C")
    else:
        fb = _product_frame(spec.kind, spec.C, curvature)
    logger.info("Built %s frame on n=%d (drift %.3g)", spec.kind.value, spec.grid.n, fb.drift)
    return fb


def _product_frame(kind: SurfaceKind, C: float, curvature: ScalarField) -> FrameBundle:
    g = curvature.grid
    radius = math.sqrt(abs(C))
    if kind is SurfaceKind.REVOLUTION:
        if C >= 0:
            raise SurfaceSpecError("surfaces of revolution need C < 0")
        phi1_0, complement = radius * E0, {"e3": E3, "e4": E4}
        phi2, phi2_v = radius * E3, E4.copy()
    else:
        if C <= 0:
            raise SurfaceSpecError("cones need C > 0")
        phi1_0, complement = radius * E3, {"e4": E4, "e0": E0}
        phi2, phi2_v = radius * E0, E4.copy()

    def rhs(y: np.ndarray, kappa: float) -> np.ndarray:
        phi, tangent, normal = y[:5], y[5:10], y[10:]
        return np.concatenate([tangent, kappa * normal - phi / C, -kappa * tangent])

    states = _rk4(rhs, np.concatenate([phi1_0, E1, E2]), curvature)
    phi1, tangent, normal = states[:, :5], states[:, 5:10], states[:, 10:]
    drift = float(np.max(np.abs(inner(phi1, phi1) - C)))
    if drift > settings.drift_tolerance:
        raise IntegrationAccuracyError(
            f"<phi1, phi1> drifted from C={C:g} by {drift:.3g}; refine the grid"
        )

    kappa = curvature.samples[:, None]
    psi = phi1 + phi2
    N = normal + 0.5 * kappa * psi
    quarter = kappa**2 / 4
    psi_hat = 0.5 * (quarter - 1.0 / C) * phi1 + 0.5 * (quarter + 1.0 / C) * phi2 + 0.5 * kappa * normal

    c = curvature * curvature * 0.25 + 0.5 / C
    k = curvature * 0.25
    psi_v = VectorField.constant(g, phi2_v)
    v_data = VDerivatives(
        psi_v=psi_v,
        psi_uv=VectorField.zeros(g),
        psi_vv=VectorField.constant(g, phi2 / C),
        N_v=psi_v * (curvature * 0.5),
        psi_hat_v=psi_v * ((curvature * curvature * 0.25 + 1.0 / C) * 0.5),
    )
    return FrameBundle(
        kind=kind,
        C=C,
        curvature=curvature,
        psi=VectorField(g, psi),
        psi_u=VectorField(g, tangent),
        psi_hat=VectorField(g, psi_hat),
        N=VectorField(g, N),
        c=c,
        k=k,
        phi1=VectorField(g, phi1),
        phi1_u=VectorField(g, tangent),
        normal=VectorField(g, normal),
        phi2=phi2,
        phi2_v=phi2_v,
        v_data=v_data,
        complement=complement,
        drift=drift,
    )


def _cylinder_frame(curvature: ScalarField) -> FrameBundle:
    g = curvature.grid

    def rhs(y: np.ndarray, kappa: float) -> np.ndarray:
        return np.array([math.cos(y[2]), math.sin(y[2]), kappa])

    states = _rk4(rhs, np.zeros(3), curvature)
    x, y, theta = states[:, 0], states[:, 1], states[:, 2]
    zeros = np.zeros(g.n)
    phi1 = np.column_stack([x, y, zeros, zeros, zeros])
    tangent = np.column_stack([np.cos(theta), np.sin(theta), zeros, zeros, zeros])
    normal = np.column_stack([-np.sin(theta), np.cos(theta), zeros, zeros, zeros])

    kappa = curvature.samples[:, None]

    def lift(vec: np.ndarray) -> np.ndarray:
        return vec + inner(vec, phi1)[:, None] * V_INF

    psi = phi1 + V0 + 0.5 * inner(phi1, phi1)[:, None] * V_INF
    psi_u = lift(tangent)
    m = lift(normal)
    N = m + 0.5 * kappa * psi
    psi_hat = V_INF + 0.5 * kappa * m + (kappa**2 / 8) * psi

    c = curvature * curvature * 0.25
    k = curvature * 0.25
    psi_v = VectorField.constant(g, E3)
    v_data = VDerivatives(
        psi_v=psi_v,
        psi_uv=VectorField.zeros(g),
        psi_vv=VectorField.constant(g, V_INF),
        N_v=psi_v * (curvature * 0.5),
        psi_hat_v=psi_v * (curvature * curvature * 0.125),
    )
    return FrameBundle(
        kind=SurfaceKind.CYLINDER,
        C=None,
        curvature=curvature,
        psi=VectorField(g, psi),
        psi_u=VectorField(g, psi_u),
        psi_hat=VectorField(g, psi_hat),
        N=VectorField(g, N),
        c=c,
        k=k,
        phi1=VectorField(g, phi1),
        phi1_u=VectorField(g, tangent),
        normal=VectorField(g, normal),
        phi2=np.zeros(5),
        phi2_v=E3.copy(),
        v_data=v_data,
        complement={"v_inf": V_INF, "e3": E3},
    )


def gram_report(fb: FrameBundle) -> dict[str, float]:
    """Max pointwise deviation of each frame pairing from its prescribed value."""
    vectors = {
        "psi": fb.psi.samples,
        "psi_u": fb.psi_u.samples,
        "psi_v": fb.v_data.psi_v.samples,
        "psi_hat": fb.psi_hat.samples,
        "N": fb.N.samples,
    }
    expected = {
        ("psi_u", "psi_u"): 1.0,
        ("psi_v", "psi_v"): 1.0,
        ("N", "N"): 1.0,
        ("psi_hat", "psi"): -1.0,
    }
    names = list(vectors)
    report: dict[str, float] = {}
    for a, name_a in enumerate(names):
        for name_b in names[a:]:
            value = expected.get((name_a, name_b), expected.get((name_b, name_a), 0.0))
            pairing = inner(vectors[name_a], vectors[name_b])
            report[f"{name_a}.{name_b}"] = max_norm(pairing - value)
    uu = inner(vectors["psi_u"], vectors["psi_u"])
    vv = inner(vectors["psi_v"], vectors["psi_v"])
    report["psi_z.psi_z"] = max(max_norm(0.25 * (uu - vv)), 0.5 * report["psi_u.psi_v"])
    report["psi_z.psi_zbar"] = max_norm(0.25 * (uu + vv) - 0.5)
    return report


@dataclass(frozen=True)
class StructureResiduals:
    psi_zz_real: float
    psi_zz_imag: float
    psi_zzbar: float
    psi_hat_u: float
    psi_hat_v: float
    gauss: float
    gauss_closed_form: float
    c_mismatch: float
    k_mismatch: float

    def as_dict(self) -> dict[str, float]:
        return dict(self.__dict__)

    def max(self) -> float:
        return max(self.as_dict().values())


def structure_residuals(fb: FrameBundle) -> StructureResiduals:
    g = fb.grid
    psi = fb.psi.samples
    psi_uu = fb.psi.differentiate(2).samples
    v = fb.v_data
    c = fb.c.samples[:, None]
    k = fb.k.samples[:, None]
    k_u = fb.k.derivative(1).samples[:, None]

    difference = psi_uu - v.psi_vv.samples
    zz_real = 0.25 * difference + 0.5 * c * psi - k * fb.N.samples
    zz_imag = -0.5 * fd_derivative(v.psi_v.samples, g, 1, periodic=False)
    zzbar = 0.25 * (psi_uu + v.psi_vv.samples) + k**2 * psi - 0.5 * fb.psi_hat.samples
    hat_u = (
        fb.psi_hat.differentiate(1).samples
        + (2 * k**2 + c) * fb.psi_u.samples
        - 2 * k_u * fb.N.samples
    )
    hat_v = v.psi_hat_v.samples - (c - 2 * k**2) * v.psi_v.samples

    c_frame = 0.5 * inner(difference, fb.psi_hat.samples)
    k_frame = 0.25 * inner(difference, fb.N.samples)
    # Gauss uses first-derivative forms of c and k: <psi_uu, N> = -<psi_u, N_u>.
    psi_u = fb.psi_u.samples
    k_first = -0.25 * (inner(psi_u, fb.N.differentiate(1).samples) + inner(v.psi_vv.samples, fb.N.samples))
    c_first = -inner(psi_u, fb.psi_hat.differentiate(1).samples) - 2 * k_first**2
    gauss = 0.5 * fd_derivative(c_first, g, 1) - 2 * fd_derivative(k_first**2, g, 1)
    # Rows next to one-sided stencils are left out.
    interior = slice(GAUSS_EDGE, g.n - GAUSS_EDGE)
    closed = fb.c.derivative(1) * 0.5 - (fb.k * fb.k).derivative(1) * 2

    return StructureResiduals(
        psi_zz_real=max_norm(zz_real),
        psi_zz_imag=max_norm(zz_imag),
        psi_zzbar=max_norm(zzbar),
        psi_hat_u=max_norm(hat_u),
        psi_hat_v=max_norm(hat_v),
        gauss=max_norm(gauss[interior]),
        gauss_closed_form=max_norm(closed.samples),
        c_mismatch=max_norm(c_frame - fb.c.samples),
        k_mismatch=max_norm(k_frame - fb.k.samples),
    )


def eta_action(fb: FrameBundle, direction: Direction | str) -> WedgeAction:
    """η(∂_u) = -ψ∧ψ_u and η(∂_v) = ψ∧ψ_v at v = 0."""
    if Direction(direction) is Direction.U:
        return WedgeAction(-fb.psi.samples, fb.psi_u.samples)
    return WedgeAction(fb.psi.samples, fb.v_data.psi_v.samples)


def eta_product_action(fb: FrameBundle, direction: Direction | str) -> WedgeAction:
    """η in product form (dφ₁ - dφ₂)∧ψ, with the v_∞ lift on cylinders."""
    psi = fb.psi.samples
    if Direction(direction) is Direction.U:
        velocity = fb.phi1_u.samples
        if fb.kind is SurfaceKind.CYLINDER:
            velocity = velocity + inner(velocity, fb.phi1.samples)[:, None] * V_INF
        return WedgeAction(velocity, psi)
    velocity = np.broadcast_to(fb.phi2_v, psi.shape)
    if fb.kind is SurfaceKind.CYLINDER:
        velocity = velocity + inner(fb.phi2_v, fb.phi2) * V_INF
    return WedgeAction(-velocity, psi)


def eta_apply(fb: FrameBundle, direction: Direction | str, x: VectorField) -> VectorField:
    return VectorField(fb.grid, wedge_apply(eta_action(fb, direction), x.samples))


def eta_cross_check(fb: FrameBundle) -> float:
    """Max entry difference between the generic and product matrices of η."""
    deviation = 0.0
    for direction in Direction:
        generic = eta_action(fb, direction).matrix()
        product = eta_product_action(fb, direction).matrix()
        deviation = max(deviation, max_norm(generic - product))
    return deviation


def closedness_residual(fb: FrameBundle) -> float:
    """dη(∂_u, ∂_v) = ∂_u η(∂_v) - ∂_v η(∂_u) applied to ψ, ψ_u, ψ̂ and N."""
    g = fb.grid
    v = fb.v_data
    eta_v = eta_action(fb, Direction.V).matrix()
    d_u_eta_v = fd_derivative(eta_v.reshape(g.n, 25), g, 1, periodic=False).reshape(g.n, 5, 5)
    # ∂_v(-ψ∧ψ_u) = -ψ_v∧ψ_u - ψ∧ψ_uv
    d_v_eta_u = (
        WedgeAction(-v.psi_v.samples, fb.psi_u.samples).matrix()
        + WedgeAction(-fb.psi.samples, v.psi_uv.samples).matrix()
    )
    curvature = d_u_eta_v - d_v_eta_u
    residual = 0.0
    for x in (fb.psi, fb.psi_u, fb.psi_hat, fb.N):
        residual = max(residual, max_norm(np.einsum("nij,nj->ni", curvature, x.samples)))
    return residual
