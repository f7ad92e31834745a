import json
import math
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ionsquid.errors import ParameterError
from ionsquid.params import (
    HBAR,
    CircuitParams,
    DriveParams,
    IonParams,
    SystemParams,
    derive,
    from_dimensionless,
    load_params,
    mathieu_AQ,
    params_from_dict,
    paper_params,
    to_dimensionless,
)

W0 = 2 * math.pi * 1e9


def test_inductance_for_1ghz():
    p = paper_params()
    assert p.circuit.C_sigma == pytest.approx(46e-15)
    assert p.circuit.L == pytest.approx(0.5507e-6, rel=1e-3)  # henry
    assert p.derived.omega_0 == pytest.approx(W0, rel=1e-12)


def test_zero_point_length():
    p = paper_params()
    assert p.derived.omega_i == pytest.approx(2 * math.pi * 1e6, rel=1e-12)
    assert p.derived.z_0 == pytest.approx(math.sqrt(HBAR / (2 * 1.5e-26 * 2 * math.pi * 1e6)))
    assert p.derived.z_0 == pytest.approx(23.65e-9, rel=1e-3)


def test_beta_and_critical_current():
    p = paper_params()
    assert p.derived.beta == pytest.approx(0.08, rel=1e-12)
    assert p.circuit.I_c == pytest.approx(p.circuit.E_J / p.circuit.phi0_tilde)


def test_no_geometric_coupling_keeps_bare_frequency():
    p = paper_params()
    ion = replace(p.ion, xi=0.0)
    assert derive(p.circuit, ion).omega_i == ion.omega_z


@settings(max_examples=50)
@given(st.floats(1e-3, 1.0))
def test_dressing_raises_frequency(xi):
    p = paper_params()
    ion = replace(p.ion, xi=xi)
    assert derive(p.circuit, ion).omega_i > ion.omega_z


@pytest.mark.parametrize(
    "wd,eta,A,Q",
    [(1.0, 0.0, 4.0, 0.0), (0.999, 0.0, 4 / 0.999**2, 0.0), (0.999, 0.06, 4 / 0.999**2, -0.12 / 0.999**2)],
)
def test_mathieu_mapping(wd, eta, A, Q):
    a, q = mathieu_AQ(eta, wd)
    assert a == pytest.approx(A, rel=1e-14) and q == pytest.approx(Q, rel=1e-14)


@settings(max_examples=50)
@given(st.floats(0, 0.5), st.floats(0.3, 3.0))
def test_dimensionless_round_trip(eta, wd):
    p = paper_params(eta=eta, omega_d=wd * W0)
    s = to_dimensionless(p)
    back = from_dimensionless(s, p.derived.omega_0)
    assert back["omega_d"] == pytest.approx(p.drive.omega_d, rel=1e-12)
    assert back["eta"] == pytest.approx(eta, rel=1e-12, abs=1e-15)
    assert back["omega_i"] == pytest.approx(p.derived.omega_i, rel=1e-12)
    assert back["beta"] == p.derived.beta
    assert s.omega_d_over_omega_0 == pytest.approx(wd, rel=1e-12)


@pytest.mark.parametrize("field", ["L", "C", "C_J", "E_J"])
@pytest.mark.parametrize("value", [0.0, -1.0, math.nan])
def test_circuit_validation_names_field(field, value):
    good = dict(L=1e-9, C=1e-15, C_J=1e-15, E_J=1e-24)
    with pytest.raises(ParameterError) as exc:
        CircuitParams(**{**good, field: value})
    assert exc.value.field == field


@pytest.mark.parametrize("kwargs", [dict(m=0), dict(omega_z=-1), dict(d=0), dict(xi=1.5), dict(xi=-0.1)])
def test_ion_validation(kwargs):
    base = dict(m=1e-26, omega_z=1e6, d=1e-5, xi=0.2)
    with pytest.raises(ParameterError):
        IonParams(**{**base, **kwargs})


@pytest.mark.parametrize("kwargs", [dict(eta=-0.1), dict(omega_d=0), dict(eta=math.inf)])
def test_drive_validation(kwargs):
    with pytest.raises(ParameterError):
        DriveParams(**{**dict(eta=0.1, omega_d=1.0), **kwargs})


def test_drive_period():
    assert DriveParams(0.0, W0).tau == pytest.approx(1e-9)


def test_json_round_trip(tmp_path):
    p = paper_params()
    path = tmp_path / "p.json"
    path.write_text(json.dumps(p.to_dict()))
    q = load_params(path)
    assert q == p and q.derived == p.derived


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.update(extra={}),
        lambda d: d["ion"].update(mass=1.0),
        lambda d: d.pop("drive"),
        lambda d: d["circuit"].pop("L"),
    ],
)
def test_json_rejects_bad_documents(mutate):
    doc = paper_params().to_dict()
    mutate(doc)
    with pytest.raises(ParameterError):
        params_from_dict(doc)


def test_with_drive_keeps_rest():
    p = paper_params()
    q = p.with_drive(eta=0.01)
    assert q.drive.eta == 0.01 and q.drive.omega_d == p.drive.omega_d
    assert isinstance(q, SystemParams) and q.circuit == p.circuit
