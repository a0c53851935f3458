"""Explicit differential conditions on k (conformal) and 𝐤 (profile ODEs)."""

from __future__ import annotations

import logging

import numpy as np

from ..errors import InsufficientSmoothnessError
from ..fields import ScalarField, constancy_test, fit_constants, max_norm
from ..frame import FrameBundle
from ..models import CheckResult, SurfaceKind, SurfaceSpec, Verdict
from ..profiles import generate

logger = logging.getLogger(__name__)


def _rms(samples: np.ndarray) -> float:
    return float(np.sqrt(np.mean(samples**2)))


def cmc_test(frame: FrameBundle, tol: float) -> CheckResult:
    """Least-squares H in k''/2 + ck = Hk."""
    k = frame.k
    if max_norm(k.samples) < 1e-12:
        return CheckResult(
            check="cmc",
            verdict=Verdict.INCONCLUSIVE,
            tolerance=tol,
            message="inconclusive: k vanishes identically",
        )
    target = k.derivative(2) * 0.5 + frame.c * k
    fit = fit_constants([k], target)
    H = -fit.coefficients[0]
    return CheckResult(
        check="cmc",
        verdict=Verdict.below(fit.residual, tol),
        residual=fit.residual,
        constants={"H": H},
        tolerance=tol,
    )


def musso_nicolodi_field(frame: FrameBundle) -> ScalarField:
    """(k''/4)k + k⁴ - k'²/4"""
    k = frame.k
    k_u = k.derivative(1)
    return k.derivative(2) * k * 0.25 + k**4 - k_u * k_u * 0.25


def musso_nicolodi_test(frame: FrameBundle, tol: float) -> CheckResult:
    result = constancy_test(musso_nicolodi_field(frame), tol)
    return CheckResult(
        check="musso_nicolodi",
        verdict=Verdict.PASS if result.is_constant else Verdict.FAIL,
        residual=result.deviation,
        constants={"value": result.value},
        tolerance=tol,
    )


def type2_conformal_test(frame: FrameBundle, tol: float) -> CheckResult:
    """Fit s1, s2 in the type-2 condition written in u-derivatives:

    k''''/4 + ck'' + c'k' + (c''/2 + c²)k + 8((k''/4)k + k⁴ - k'²/4)k
        + s1 (k''/2 + ck) + s2 k = 0
    """
    k, c = frame.k, frame.c
    if k.order < 4:
        raise InsufficientSmoothnessError(f"type-2 condition needs 4 derivatives of k, have {k.order}")
    k1, k2, k4 = k.derivative(1), k.derivative(2), k.derivative(4)
    c1, c2 = c.derivative(1), c.derivative(2)
    fixed = (
        k4 * 0.25
        + c * k2
        + c1 * k1
        + (c2 * 0.5 + c * c) * k
        + musso_nicolodi_field(frame) * k * 8
    )
    fit = fit_constants([k2 * 0.5 + c * k, k], fixed)
    return CheckResult(
        check="type2_conformal",
        verdict=Verdict.below(fit.residual, tol),
        residual=fit.residual,
        constants={"s1": fit.coefficients[0], "s2": fit.coefficients[1]},
        tolerance=tol,
        detail={"degenerate": fit.degenerate},
    )


def _relative(fit_residual: float, target: np.ndarray) -> float:
    return fit_residual / max(1.0, _rms(target))


def profile_ode_tests(spec: SurfaceSpec, tol: float, curvature: ScalarField | None = None) -> list[CheckResult]:
    """Profile-curve forms of the type-1 and type-2 conditions.

    Residuals are RMS values relative to max(1, RMS of the fitted target).
    Cylinders additionally get the conditions for type 1, 2 and 3 in E(v_∞),
    where the fitted combination only has to be constant.
    """
    kk = curvature if curvature is not None else generate(spec.profile, spec.grid, order=4)
    inv = spec.inverse_c
    k1, k2, k4 = kk.derivative(1), kk.derivative(2), kk.derivative(4)
    elastic = kk * inv + kk**3 * 0.5 + k2
    quintic = (
        kk * (inv * inv)
        + kk**3 * inv
        + kk**5 * 0.375
        + k2 * (2 * inv)
        + (kk * k1 * k1 + kk * kk * k2) * 2.5
        + k4
    )
    results = []

    type1 = fit_constants([kk], elastic)
    results.append(
        CheckResult(
            check="profile_ode.type1",
            verdict=Verdict.below(_relative(type1.residual, elastic.samples), tol),
            residual=_relative(type1.residual, elastic.samples),
            constants={"alpha": type1.coefficients[0]},
            tolerance=tol,
        )
    )
    type2 = fit_constants([elastic, kk], quintic)
    results.append(
        CheckResult(
            check="profile_ode.type2",
            verdict=Verdict.below(_relative(type2.residual, quintic.samples), tol),
            residual=_relative(type2.residual, quintic.samples),
            constants={"alpha": type2.coefficients[0], "beta": type2.coefficients[1]},
            tolerance=tol,
            detail={"degenerate": type2.degenerate},
        )
    )

    if spec.kind is SurfaceKind.CYLINDER:
        ones = np.ones(kk.grid.n)
        flat = constancy_test(kk, tol)
        results.append(
            CheckResult(
                check="profile_ode.type1_v_inf",
                verdict=Verdict.PASS if flat.is_constant else Verdict.FAIL,
                residual=flat.deviation,
                constants={"k": flat.value},
                tolerance=tol,
                gating=False,
            )
        )
        for name, basis, target, labels in (
            ("profile_ode.type2_v_inf", [kk], elastic, ("alpha",)),
            ("profile_ode.type3_v_inf", [elastic, kk], quintic, ("alpha", "beta")),
        ):
            fit = fit_constants([*(b.samples for b in basis), ones], target)
            remainder = target.samples + sum(
                coefficient * b.samples for coefficient, b in zip(fit.coefficients, basis)
            )
            level = constancy_test(remainder, tol)
            constants = dict(zip(labels, fit.coefficients))
            constants["constant"] = level.value
            results.append(
                CheckResult(
                    check=name,
                    verdict=Verdict.PASS if level.is_constant else Verdict.FAIL,
                    residual=level.deviation,
                    constants=constants,
                    tolerance=tol,
                    gating=False,
                    detail={"degenerate": fit.degenerate},
                )
            )
    for result in results:
        logger.debug("%s residual=%.3g", result.check, result.residual)
    return results
