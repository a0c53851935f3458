from __future__ import annotations

import logging
from functools import cached_property
from pathlib import Path

from .detect import (
    cmc_test,
    constant_term_location,
    minimal_type,
    musso_nicolodi_field,
    musso_nicolodi_test,
    profile_ode_tests,
    type2_conformal_test,
    type_d_norm_test,
    type_d_ratio_test,
    type_d_span_test,
)
from .detect.criteria import shift_coefficients
from .fcq import (
    FCQSeries,
    RSeries,
    conservation_residual,
    consistency_q_residual,
    eta_pairing_identity,
    extend,
    parallelism_residual,
)
from .frame import FrameBundle, build_frame, closedness_residual, eta_cross_check, gram_report, structure_residuals
from .models import CheckResult, DetectionReport, RunConfig, Verdict
from .stores import write_field_csv, write_report, write_series_json

logger = logging.getLogger(__name__)

FRAME_GROUPS = ("gram", "structure", "closedness", "eta_cross")
FCQ_GROUPS = ("conservation", "parallelism", "consistency", "eta_pairing")
DETECT_GROUPS = ("cmc", "musso_nicolodi", "type2_conformal", "profile_ode")

COMMAND_GROUPS = {
    "frame-check": FRAME_GROUPS,
    "fcq": FCQ_GROUPS,
    "detect": DETECT_GROUPS + ("types",),
    "report": FRAME_GROUPS + FCQ_GROUPS + DETECT_GROUPS + ("types",),
}

# Deepest index pairs checked by the η pairing identity.
ETA_PAIRING_FLOOR = -4


class SurfaceRunner:
    """Builds the frame and series of one run configuration and checks them."""

    def __init__(self, config: RunConfig) -> None:
        self.config = config
        self.sampled = config.surface.sampled
        self.detection_tol = config.tolerances.detection_for(self.sampled)
        self.residual_tol = config.tolerances.residual_for(self.sampled)

    @cached_property
    def frame(self) -> FrameBundle:
        return build_frame(self.config.surface, order=max(2 * self.config.depth + 2, 4))

    @cached_property
    def series(self) -> FCQSeries:
        return extend(self.frame, RSeries(tuple(self.config.r)), self.config.depth)

    def _wanted(self, command: str) -> list[str]:
        return [group for group in COMMAND_GROUPS[command] if group == "types" or self.config.requested(group)]

    def run(self, command: str = "report") -> DetectionReport:
        report = DetectionReport(
            surface=self.config.surface.model_dump(mode="json"),
            depth=self.config.depth,
            r=list(self.config.r),
        )
        wanted = self._wanted(command)
        for group in wanted:
            if group in FRAME_GROUPS:
                self._frame_check(group, report)
            elif group in FCQ_GROUPS:
                self._fcq_check(group, report)
            elif group in DETECT_GROUPS:
                self._detect_check(group, report)
        if "types" in wanted:
            for d in self.config.requested_types():
                self._type_checks(d, report)
            report.minimal_type = minimal_type(report)
        if "series" in self.__dict__:
            report.series = {
                "depth": self.series.depth,
                "sign": self.series.sign,
                "delta0": self.series.delta0,
                "jet_order": self.frame.k.order,
                "derivative_source": self.frame.k.derivative_source.value,
            }
        logger.info("Run finished with %d checks; exit code %d", len(report.checks), report.exit_code())
        return report

    def _frame_check(self, group: str, report: DetectionReport) -> None:
        tolerances = self.config.tolerances
        if group == "gram":
            values = gram_report(self.frame)
            worst = max(values.values())
            report.add(
                CheckResult(
                    check="gram",
                    verdict=Verdict.below(worst, tolerances.gram),
                    residual=worst,
                    tolerance=tolerances.gram,
                    detail=values,
                )
            )
        elif group == "structure":
            residuals = structure_residuals(self.frame)
            report.add(
                CheckResult(
                    check="structure",
                    verdict=Verdict.below(residuals.max(), self.residual_tol),
                    residual=residuals.max(),
                    tolerance=self.residual_tol,
                    detail=residuals.as_dict(),
                )
            )
        elif group == "closedness":
            residual = closedness_residual(self.frame)
            report.add(
                CheckResult(
                    check="closedness",
                    verdict=Verdict.below(residual, self.residual_tol),
                    residual=residual,
                    tolerance=self.residual_tol,
                )
            )
        elif group == "eta_cross":
            residual = eta_cross_check(self.frame)
            report.add(
                CheckResult(
                    check="eta_cross",
                    verdict=Verdict.below(residual, tolerances.eta_cross),
                    residual=residual,
                    tolerance=tolerances.eta_cross,
                )
            )

    def _fcq_check(self, group: str, report: DetectionReport) -> None:
        s = self.series
        tol = self.residual_tol
        if group == "conservation":
            rows = conservation_residual(s)
            worst = max(row.worst for row in rows)
            detail = {str(row.m): {"value": row.value, "deviation": row.deviation, "offset": row.offset} for row in rows}
        elif group == "parallelism":
            rows = parallelism_residual(s)
            worst = max(row.worst for row in rows)
            detail = {str(row.index): {"u": row.u, "v": row.v} for row in rows}
        elif group == "consistency":
            values = consistency_q_residual(s)
            worst = max(values.values())
            detail = {str(i): value for i, value in values.items()}
        else:
            floor = max(ETA_PAIRING_FLOOR, -s.depth)
            detail = {}
            for i in range(0, floor - 1, -1):
                for j in range(0, floor - 1, -1):
                    detail[f"{i},{j}"] = eta_pairing_identity(s, i, j).worst
            worst = max(detail.values())
        report.add(
            CheckResult(
                check=group,
                verdict=Verdict.below(worst, tol),
                residual=worst,
                tolerance=tol,
                detail=detail,
            )
        )

    def _detect_check(self, group: str, report: DetectionReport) -> None:
        tol = self.detection_tol
        if group == "cmc":
            report.add(cmc_test(self.frame, tol))
        elif group == "musso_nicolodi":
            report.add(musso_nicolodi_test(self.frame, tol))
        elif group == "type2_conformal":
            report.add(type2_conformal_test(self.frame, tol))
        elif group == "profile_ode":
            for result in profile_ode_tests(self.config.surface, tol, curvature=self.frame.curvature):
                report.add(result)

    def _type_checks(self, d: int, report: DetectionReport) -> None:
        tol = self.detection_tol
        s = self.series
        report.add(type_d_ratio_test(s, d, tol))
        report.add(type_d_norm_test(s, d, tol))
        span = report.add(type_d_span_test(s, d, tol))
        report.type_verdicts[str(d)] = span.verdict
        if span.verdict is Verdict.PASS:
            for result in constant_term_location(s, d, tol, shift_coefficients(span, d)):
                report.add(result)
        logger.info("Type <= %d: %s", d, span.verdict.value)

    def write_outputs(self, report: DetectionReport, out_dir: str | Path | None = None) -> Path:
        out = Path(out_dir if out_dir is not None else self.config.output.dir)
        write_report(report, out / "report.json")
        output = self.config.output
        if output.fields and "frame" in self.__dict__:
            fields_dir = out / "fields"
            derived = {
                "curvature": lambda: self.frame.curvature,
                "k": lambda: self.frame.k,
                "c": lambda: self.frame.c,
                "musso_nicolodi": lambda: musso_nicolodi_field(self.frame),
            }
            for name in output.derived:
                column = "k" if name == "curvature" else "value"
                write_field_csv(derived[name](), fields_dir / f"{name}.csv", column=column)
            if "series" in self.__dict__:
                for i in self.series.indices:
                    write_field_csv(self.series.gamma[i], fields_dir / f"gamma_{i}.csv")
                    write_field_csv(self.series.delta[i], fields_dir / f"delta_{i}.csv")
        if output.series and "series" in self.__dict__:
            write_series_json(self.series, out / "series.json")
        return out
