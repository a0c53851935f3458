"""Type-d criteria read off a formal conserved quantity."""

from __future__ import annotations

import logging

import numpy as np

from ..config import settings
from ..errors import UndefinedConicError
from ..fcq import FCQSeries, gram_product, shift
from ..fields import constancy_test, fit_constants, max_norm
from ..lorentz import classify_space_form, inner
from ..models import CheckResult, DetectionReport, SurfaceKind, Verdict

logger = logging.getLogger(__name__)


def _too_shallow(name: str, s: FCQSeries, needed: int, tol: float, gating: bool = True) -> CheckResult | None:
    if s.depth >= needed:
        return None
    return CheckResult(
        check=name,
        verdict=Verdict.INCONCLUSIVE,
        tolerance=tol,
        gating=gating,
        message=f"series depth {s.depth} is too shallow; need {needed}",
    )


def vanishes_somewhere(samples: np.ndarray) -> bool:
    scale = max_norm(samples)
    return scale == 0.0 or float(np.min(np.abs(samples))) <= settings.vanishing_tolerance * scale


def type_d_ratio_test(s: FCQSeries, d: int, tol: float) -> CheckResult:
    """γ_{-d-1}/γ_{-d} constant, then the shifted γ̂_{-d-1} vanishes."""
    name = f"type{d}.ratio"
    shallow = _too_shallow(name, s, d + 1, tol, gating=d == 1)
    if shallow is not None:
        return shallow
    lower, upper = s.gamma[-d - 1].samples, s.gamma[-d].samples
    if vanishes_somewhere(upper):
        return CheckResult(
            check=name,
            verdict=Verdict.INCONCLUSIVE,
            tolerance=tol,
            gating=d == 1,
            message=f"inconclusive: gamma_{-d} vanishes on the grid",
        )
    ratio = constancy_test(lower / upper, tol)
    remainder = lower - ratio.value * upper
    shifted = max_norm(remainder) / max(1.0, max_norm(lower))
    verdict = Verdict.PASS if ratio.is_constant and shifted < tol else Verdict.FAIL
    return CheckResult(
        check=name,
        verdict=verdict,
        residual=max(ratio.deviation, shifted),
        constants={"s": ratio.value},
        tolerance=tol,
        gating=d == 1,
        detail={"ratio_deviation": ratio.deviation, "shifted_gamma": shifted},
    )


def type_d_norm_test(s: FCQSeries, d: int, tol: float) -> CheckResult:
    """(p_{-d}, p_{-d}) or, for d > 1, (p_{-d}, p_{-d+1}) is constant."""
    name = f"type{d}.norm"
    shallow = _too_shallow(name, s, d, tol, gating=d == 1)
    if shallow is not None:
        return shallow
    square = constancy_test(gram_product(-d, -d, s), tol)
    detail = {"square_deviation": square.deviation}
    constants = {"square": square.value}
    best = square.deviation
    if d > 1:
        mixed = constancy_test(gram_product(-d, -d + 1, s), tol)
        detail["mixed_deviation"] = mixed.deviation
        constants["mixed"] = mixed.value
        best = min(best, mixed.deviation)
    return CheckResult(
        check=name,
        verdict=Verdict.below(best, tol),
        residual=best,
        constants=constants,
        tolerance=tol,
        gating=d == 1,
        detail=detail,
    )


def type_d_span_test(s: FCQSeries, d: int, tol: float) -> CheckResult:
    """Constants a_1..a_d with γ_{-d-1} + Σ_j a_j γ_{-d-1+j} ≈ 0."""
    name = f"type{d}.span"
    shallow = _too_shallow(name, s, d + 1, tol)
    if shallow is not None:
        return shallow
    target = s.gamma[-d - 1].samples
    basis = [s.gamma[-d - 1 + j].samples for j in range(1, d + 1)]
    fit = fit_constants(basis, target)
    relative = fit.residual / max(1.0, float(np.sqrt(np.mean(target**2))))
    if fit.degenerate:
        logger.warning("Degenerate span fit for type %d (rank %d)", d, fit.rank)
    return CheckResult(
        check=name,
        verdict=Verdict.below(relative, tol),
        residual=relative,
        constants={f"a{j}": a for j, a in enumerate(fit.coefficients, start=1)},
        tolerance=tol,
        detail={"degenerate": fit.degenerate, "rank": fit.rank},
    )


def shift_coefficients(span: CheckResult, d: int) -> list[float]:
    return [span.constants.get(f"a{j}", 0.0) for j in range(1, d + 1)]


def constant_term_location(s: FCQSeries, d: int, tol: float, coefficients: list[float]) -> list[CheckResult]:
    """Locate p̂_{-d} of the shifted series f(t)p(t).

    Returns the gating constancy/complement check, the informational
    space-form classification, and on cylinders the E(v_∞) membership check.
    """
    shifted = shift(s, coefficients)
    kind = s.frame.kind
    constant = shifted.p[-d].samples
    mean = constant.mean(axis=0)
    spread = max_norm(constant - mean) / max(1.0, max_norm(mean))
    components = {name: float(inner(mean, vec)) for name, vec in s.frame.complement.items()}
    worst_component = max(abs(x) for x in components.values())
    location = CheckResult(
        check=f"type{d}.constant_term",
        verdict=Verdict.below(max(spread, worst_component), tol),
        residual=max(spread, worst_component),
        constants={f"p.{i}": float(x) for i, x in enumerate(mean)},
        tolerance=tol,
        detail={"spread": spread, "complement": components},
    )
    results = [location]

    try:
        form = classify_space_form(mean, tol=tol)
        results.append(
            CheckResult(
                check=f"type{d}.space_form",
                verdict=Verdict.PASS,
                constants={"curvature": form.curvature, "norm": float(inner(mean, mean))},
                gating=False,
                message=form.tag.value,
            )
        )
    except UndefinedConicError as exc:
        results.append(
            CheckResult(check=f"type{d}.space_form", verdict=Verdict.INCONCLUSIVE, gating=False, message=str(exc))
        )

    if kind is SurfaceKind.CYLINDER:
        gamma = constancy_test(shifted.gamma[-d], tol)
        results.append(
            CheckResult(
                check=f"type{d}.euclidean_v_inf",
                verdict=Verdict.PASS if gamma.is_constant else Verdict.FAIL,
                residual=gamma.deviation,
                constants={"gamma": gamma.value},
                tolerance=tol,
                gating=False,
            )
        )
    return results


def minimal_type(report: DetectionReport) -> int | None:
    """Smallest d whose type-d verdict passed."""
    passed = [int(d) for d, verdict in report.type_verdicts.items() if verdict is Verdict.PASS]
    return min(passed) if passed else None
