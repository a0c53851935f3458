from __future__ import annotations

import math
import re
from enum import Enum
from typing import Annotated, Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .config import settings
from .errors import SurfaceSpecError
from .fields import GridSpec


class ConstantProfile(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["constant"] = "constant"
    value: float


class SineProfile(BaseModel):
    """offset + amplitude * sin(frequency * u + phase)"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["sine"] = "sine"
    offset: float = 0.0
    amplitude: float = 1.0
    frequency: float = 1.0
    phase: float = 0.0


class PolynomialProfile(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["polynomial"] = "polynomial"
    # lowest order first
    coefficients: list[float] = Field(min_length=1)


class ElasticProfile(BaseModel):
    """Solution of k'' = forcing - k/C - k^3/2 - alpha*k; ``C=None`` is the cylinder ODE."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["elastic"] = "elastic"
    C: Optional[float] = None
    alpha: float = 0.0
    k0: float
    k1: float = 0.0
    forcing: float = 0.0

    @field_validator("C", "alpha", "k0", "k1", "forcing")
    @classmethod
    def _finite(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not math.isfinite(value):
            raise ValueError("elastic profile data must be finite")
        return value

    @property
    def inverse_c(self) -> float:
        return 0.0 if self.C is None else 1.0 / self.C


class SamplesProfile(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["samples"] = "samples"
    values: Optional[list[float]] = None
    path: Optional[str] = None

    @model_validator(mode="after")
    def _one_source(self) -> "SamplesProfile":
        if (self.values is None) == (self.path is None):
            raise ValueError("samples profile needs exactly one of 'values' or 'path'")
        return self


class NoiseProfile(BaseModel):
    """Smoothed white noise; a deterministic non-special control profile."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["noise"] = "noise"
    seed: int = 0
    width: float = Field(default=8.0, gt=0)
    amplitude: float = 1.0
    offset: float = 2.0


ProfileSpec = Annotated[
    Union[ConstantProfile, SineProfile, PolynomialProfile, ElasticProfile, SamplesProfile, NoiseProfile],
    Field(discriminator="kind"),
]

SAMPLED_KINDS = ("samples", "noise")


class SurfaceKind(str, Enum):
    REVOLUTION = "revolution"
    CONE = "cone"
    CYLINDER = "cylinder"


class SurfaceSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: SurfaceKind
    C: Optional[float] = None
    profile: ProfileSpec
    grid: GridSpec = Field(default_factory=GridSpec)

    @model_validator(mode="before")
    @classmethod
    def _share_c_with_elastic_profile(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        profile = data.get("profile")
        if isinstance(profile, dict) and profile.get("kind") == "elastic" and "C" not in profile:
            data = dict(data)
            data["profile"] = {**profile, "C": data.get("C")}
        return data

    @model_validator(mode="after")
    def _check_kind(self) -> "SurfaceSpec":
        if self.kind is SurfaceKind.CYLINDER:
            if self.C is not None:
                raise SurfaceSpecError("cylinders take no C")
        else:
            if self.C is None or self.C == 0.0:
                raise SurfaceSpecError(f"{self.kind.value} needs a nonzero C")
            if self.kind is SurfaceKind.REVOLUTION and self.C > 0:
                raise SurfaceSpecError("surfaces of revolution need C < 0")
            if self.kind is SurfaceKind.CONE and self.C < 0:
                raise SurfaceSpecError("cones need C > 0")
        if isinstance(self.profile, ElasticProfile) and self.profile.C != self.C:
            raise SurfaceSpecError(
                f"elastic profile C={self.profile.C} does not match surface C={self.C}"
            )
        return self

    @property
    def inverse_c(self) -> float:
        return 0.0 if self.C is None else 1.0 / self.C

    @property
    def sampled(self) -> bool:
        return self.profile.kind in SAMPLED_KINDS


class Tolerances(BaseModel):
    model_config = ConfigDict(extra="forbid")

    detection: Optional[float] = Field(default=None, gt=0)
    residual: Optional[float] = Field(default=None, gt=0)
    gram: float = Field(default_factory=lambda: settings.gram_tolerance, gt=0)
    eta_cross: float = Field(default_factory=lambda: settings.eta_cross_tolerance, gt=0)

    def detection_for(self, sampled: bool) -> float:
        return self.detection if self.detection is not None else settings.default_tolerance(sampled)

    def residual_for(self, sampled: bool) -> float:
        return self.residual if self.residual is not None else settings.default_tolerance(sampled)


class OutputSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dir: str = Field(default_factory=lambda: settings.output_dir)
    fields: bool = True
    series: bool = True
    derived: list[Literal["curvature", "k", "c", "musso_nicolodi"]] = Field(
        default_factory=lambda: ["curvature", "k", "c", "musso_nicolodi"]
    )


CHECK_GROUPS = (
    "gram",
    "structure",
    "closedness",
    "eta_cross",
    "conservation",
    "parallelism",
    "consistency",
    "eta_pairing",
    "cmc",
    "musso_nicolodi",
    "type2_conformal",
    "profile_ode",
)
_TYPE_CHECK = re.compile(r"^type([1-9][0-9]*)$")


def type_check_depth(name: str) -> Optional[int]:
    match = _TYPE_CHECK.match(name)
    return int(match.group(1)) if match else None


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    schema_version: Literal[1] = Field(alias="schema")
    surface: SurfaceSpec
    grid: Optional[GridSpec] = None
    depth: int = Field(default_factory=lambda: settings.depth, ge=1)
    r: list[float] = Field(default_factory=lambda: [1.0], min_length=1)
    tolerances: Tolerances = Field(default_factory=Tolerances)
    checks: Optional[list[str]] = None
    output: OutputSpec = Field(default_factory=OutputSpec)

    @field_validator("r")
    @classmethod
    def _r0_positive(cls, value: list[float]) -> list[float]:
        if not value[0] > 0:
            raise ValueError("r0 must be positive")
        if not all(math.isfinite(x) for x in value):
            raise ValueError("r coefficients must be finite")
        return value

    @field_validator("checks")
    @classmethod
    def _known_checks(cls, value: Optional[list[str]]) -> Optional[list[str]]:
        if value is None:
            return value
        for name in value:
            if name not in CHECK_GROUPS and type_check_depth(name) is None:
                raise ValueError(f"Unknown check '{name}'")
        return value

    @model_validator(mode="after")
    def _apply_grid(self) -> "RunConfig":
        if self.grid is not None:
            self.surface = self.surface.model_copy(update={"grid": self.grid})
        return self

    def requested(self, name: str) -> bool:
        return self.checks is None or name in self.checks

    def requested_types(self) -> list[int]:
        if self.checks is None:
            return list(range(1, self.depth))
        return sorted(d for d in map(type_check_depth, self.checks) if d is not None)


class Verdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"

    @classmethod
    def below(cls, value: float, tolerance: float) -> "Verdict":
        if not math.isfinite(value):
            return cls.FAIL
        return cls.PASS if value < tolerance else cls.FAIL


class CheckResult(BaseModel):
    check: str
    verdict: Verdict
    residual: Optional[float] = None
    constants: dict[str, float] = Field(default_factory=dict)
    tolerance: Optional[float] = None
    gating: bool = True
    message: Optional[str] = None
    detail: dict[str, Any] = Field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS


class DetectionReport(BaseModel):
    schema_version: Literal[1] = Field(default=1, serialization_alias="schema")
    surface: dict[str, Any] = Field(default_factory=dict)
    depth: int = 0
    r: list[float] = Field(default_factory=list)
    checks: list[CheckResult] = Field(default_factory=list)
    type_verdicts: dict[str, Verdict] = Field(default_factory=dict)
    minimal_type: Optional[int] = None
    series: dict[str, Any] = Field(default_factory=dict)

    def add(self, result: CheckResult) -> CheckResult:
        self.checks.append(result)
        return result

    def gating(self) -> list[CheckResult]:
        return [check for check in self.checks if check.gating]

    def exit_code(self) -> int:
        gating = self.gating()
        if any(check.verdict is Verdict.FAIL for check in gating):
            return 1
        if any(check.verdict is Verdict.INCONCLUSIVE for check in gating):
            return 2
        return 0
