import numpy as np
import pytest
from pydantic import ValidationError

from conftest import ELASTIC_CONE, ELASTIC_REVOLUTION, ROUND_CYLINDER, frame_for, make_surface
from isothermic.errors import IntegrationAccuracyError, SurfaceSpecError
from isothermic.fields import GridSpec, fd_derivative
from isothermic.frame import (
    Direction,
    build_frame,
    closedness_residual,
    eta_action,
    eta_cross_check,
    gram_report,
    structure_residuals,
)
from isothermic.lorentz import E2, E3, V_INF, inner
from isothermic.models import SurfaceKind

SINE_CASES = [
    ("cylinder", {"kind": "sine", "offset": 2.0, "amplitude": 0.5, "frequency": 2.0}, None),
    ("cone", {"kind": "sine", "offset": 1.0, "amplitude": 0.5, "frequency": 2.0}, 1.0),
    ("revolution", {"kind": "sine", "offset": 1.5, "amplitude": 0.3, "frequency": 2.0}, -1.0),
]
CONSTANT_CASES = [
    ROUND_CYLINDER,
    ("cone", {"kind": "constant", "value": 1.0}, 1.0),
    ("revolution", {"kind": "constant", "value": 1.5}, -1.0),
]
ELASTIC_CASES = [
    ("cylinder", {"kind": "elastic", "alpha": 1.0, "k0": 1.0}, None),
    ELASTIC_CONE,
    ELASTIC_REVOLUTION,
]
ALL_CASES = SINE_CASES + CONSTANT_CASES + ELASTIC_CASES


@pytest.mark.parametrize("case", ALL_CASES, ids=lambda case: f"{case[0]}-{case[1]['kind']}")
def test_frame_gram_invariants(case):
    report = gram_report(frame_for(case))
    assert max(report.values()) < 1e-10


@pytest.mark.parametrize("case", ALL_CASES, ids=lambda case: f"{case[0]}-{case[1]['kind']}")
def test_structure_equations(case):
    residuals = structure_residuals(frame_for(case))
    assert residuals.max() < 1e-7, residuals.as_dict()


@pytest.mark.parametrize("case", ALL_CASES, ids=lambda case: f"{case[0]}-{case[1]['kind']}")
def test_eta_forms_agree(case):
    fb = frame_for(case)
    assert eta_cross_check(fb) < 1e-12
    assert closedness_residual(fb) < 1e-7


def test_round_cylinder_coefficients(round_cylinder):
    assert np.all(round_cylinder.c.samples == 1.0)
    assert np.all(round_cylinder.k.samples == 0.5)
    assert round_cylinder.kind is SurfaceKind.CYLINDER


def test_flat_cylinder_normal_is_constant(flat_cylinder):
    assert np.all(flat_cylinder.c.samples == 0.0)
    assert np.allclose(flat_cylinder.N.samples, E2, atol=1e-15)
    assert np.max(np.abs(flat_cylinder.N.differentiate().samples)) < 1e-10


def test_cylinder_v_data(round_cylinder):
    v = round_cylinder.v_data
    assert np.allclose(v.psi_v.samples, E3)
    assert np.allclose(v.psi_vv.samples, V_INF)


def test_geodesic_cone_profile_is_great_circle():
    fb = frame_for(("cone", {"kind": "constant", "value": 0.0}, 1.0))
    phi1 = fb.phi1.samples
    assert np.allclose(fb.c.samples, 0.5)
    assert np.max(np.abs(inner(phi1, phi1) - 1.0)) < 1e-12
    second = fd_derivative(phi1, fb.grid, 2, periodic=False)
    assert np.max(np.abs(second + phi1)) < 1e-7


def test_revolution_drift_is_small(elastic_revolution):
    assert elastic_revolution.drift < 1e-10


def test_coarse_grid_drift_is_reported():
    spec = make_surface("revolution", {"kind": "sine", "offset": 30.0, "amplitude": 5.0, "frequency": 40.0}, -1.0, n=16)
    with pytest.raises(IntegrationAccuracyError, match="drifted"):
        build_frame(spec)


@pytest.mark.parametrize(
    "kind, C, message",
    [
        ("revolution", 1.0, "surfaces of revolution need C < 0"),
        ("cone", -1.0, "cones need C > 0"),
        ("cylinder", 1.0, "cylinders take no C"),
    ],
)
def test_mismatched_c_is_rejected(kind, C, message):
    with pytest.raises(ValidationError, match=message):
        make_surface(kind, {"kind": "constant", "value": 1.0}, C)


def test_frame_rejects_c_of_the_wrong_sign():
    spec = make_surface("cone", {"kind": "constant", "value": 1.0}, 1.0)
    spec = spec.model_copy(update={"kind": SurfaceKind.REVOLUTION})
    with pytest.raises(SurfaceSpecError, match="C < 0"):
        build_frame(spec)


@pytest.mark.parametrize("case", [ROUND_CYLINDER, ELASTIC_CONE, ELASTIC_REVOLUTION], ids=lambda case: case[0])
def test_complement_is_orthogonal_to_profile_curve(case):
    fb = frame_for(case)
    assert len(fb.complement) == 2
    for vec in fb.complement.values():
        assert np.max(np.abs(inner(fb.phi1.samples, vec))) < 1e-12
        assert np.max(np.abs(inner(fb.phi1_u.samples, vec))) < 1e-12


def test_eta_annihilates_psi(elastic_cone):
    for direction in Direction:
        action = eta_action(elastic_cone, direction)
        assert np.max(np.abs(action.apply(elastic_cone.psi.samples))) < 1e-10


def test_periodic_grid_frame():
    spec = make_surface("cylinder", {"kind": "sine", "offset": 2.0, "amplitude": 0.5, "frequency": 1.0}, None)
    spec = spec.model_copy(update={"grid": GridSpec(n=512, u_min=0.0, u_max=2 * np.pi, periodic=True)})
    fb = build_frame(spec)
    assert max(gram_report(fb).values()) < 1e-10
