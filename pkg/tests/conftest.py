from __future__ import annotations

from typing import Any

import pytest

from isothermic.fcq import RSeries, extend
from isothermic.fields import GridSpec
from isothermic.frame import build_frame
from isothermic.models import SurfaceSpec


def make_surface(
    kind: str,
    profile: dict[str, Any],
    C: float | None = None,
    n: int = 512,
    u_max: float = 1.0,
) -> SurfaceSpec:
    data: dict[str, Any] = {"kind": kind, "profile": profile, "grid": GridSpec(n=n, u_min=0.0, u_max=u_max)}
    if C is not None:
        data["C"] = C
    return SurfaceSpec.model_validate(data)


ROUND_CYLINDER = ("cylinder", {"kind": "constant", "value": 2.0}, None)
FLAT_CYLINDER = ("cylinder", {"kind": "constant", "value": 0.0}, None)
ELASTIC_CONE = ("cone", {"kind": "elastic", "alpha": -3.0, "k0": 2.2, "k1": 0.0}, 1.0)
ELASTIC_REVOLUTION = ("revolution", {"kind": "elastic", "alpha": 0.0, "k0": 1.5, "k1": 0.0}, -1.0)
FORCED_CYLINDER = ("cylinder", {"kind": "elastic", "alpha": 1.0, "k0": 1.0, "k1": 0.0, "forcing": 0.5}, None)
NOISY_CYLINDER = ("cylinder", {"kind": "noise", "seed": 7, "width": 12.0, "amplitude": 1.0, "offset": 2.0}, None)


def frame_for(case: tuple[str, dict[str, Any], float | None], **kwargs: Any):
    kind, profile, C = case
    return build_frame(make_surface(kind, profile, C, **kwargs))


@pytest.fixture(scope="session")
def round_cylinder():
    return frame_for(ROUND_CYLINDER)


@pytest.fixture(scope="session")
def round_cylinder_series(round_cylinder):
    return extend(round_cylinder, RSeries((1.0,)), 6)


@pytest.fixture(scope="session")
def flat_cylinder():
    return frame_for(FLAT_CYLINDER)


@pytest.fixture(scope="session")
def elastic_cone():
    return frame_for(ELASTIC_CONE)


@pytest.fixture(scope="session")
def elastic_cone_series(elastic_cone):
    return extend(elastic_cone, RSeries((1.0,)), 4)


@pytest.fixture(scope="session")
def elastic_revolution():
    return frame_for(ELASTIC_REVOLUTION)


@pytest.fixture(scope="session")
def elastic_revolution_series(elastic_revolution):
    return extend(elastic_revolution, RSeries((1.0,)), 4)


@pytest.fixture(scope="session")
def forced_cylinder():
    return frame_for(FORCED_CYLINDER)


@pytest.fixture(scope="session")
def forced_cylinder_series(forced_cylinder):
    return extend(forced_cylinder, RSeries((1.0,)), 4)


@pytest.fixture(scope="session")
def noisy_cylinder():
    return frame_for(NOISY_CYLINDER)


@pytest.fixture(scope="session")
def noisy_cylinder_series(noisy_cylinder):
    return extend(noisy_cylinder, RSeries((1.0,)), 2)
