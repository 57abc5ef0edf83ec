import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from joycekit.axiomcheck import sample_a2_states, sample_points
from joycekit.errors import NoPeriodStructure, PoleEncountered
from joycekit.models import A1Point, A2_CHART, a1_model, a1_phi, a2_phi, flat_model, standard_omega
from joycekit.tensorcore import PlebanskiModel, SymplecticData, TangentPoint
from joycekit.twistor import (
    asymptotic_probe,
    descent_drift,
    leaf_flow,
    leaf_path,
    twistor_line_residual,
)

from conftest import complex_strategy

A1_POINTS = sample_points(a1_model(), 5, seed=4)


def test_flat_leaf_flow_is_translation():
    end = leaf_flow(flat_model(), TangentPoint([0.5, 1], [0, 2]), 2.0, np.array([1.0, 0.0]), 1.0)
    assert np.allclose(end.z, [1.5, 1]) and np.allclose(end.theta, [0.5, 2])


def test_leaf_flow_reversible():
    m = a1_model()
    start = A1_POINTS[0]
    u = np.array([0.4, -0.2j])
    there = leaf_flow(m, start, 1j, u, 1.0, tol=1e-12)
    back = leaf_flow(m, there, 1j, u, -1.0, tol=1e-12)
    assert np.max(np.abs(back.x - start.x)) < 1e-8


def test_leaf_path_hits_pole():
    with pytest.raises(PoleEncountered) as info:
        leaf_path(a1_model(), TangentPoint([1, 0], [0, 0]), 1.0, np.array([-1.0, 0.0]), 2.0)
    assert info.value.partial is not None


def test_twistor_line_flat_exact():
    for pt in sample_points(flat_model(), 4, seed=1):
        for eps in (1.0, 2j, -0.3):
            assert twistor_line_residual(flat_model(), pt, eps) < 1e-12


@pytest.mark.parametrize("eps", [1.0, 2j, 0.5 - 0.5j])
def test_twistor_line_a1(eps):
    for pt in A1_POINTS:
        assert twistor_line_residual(a1_model(), pt, eps) < 1e-8


def test_twistor_line_detects_perturbation():
    bump = np.array([0, 0, 0.1, 0])
    for pt in A1_POINTS:
        assert twistor_line_residual(a1_model(), pt, 1.0, perturbation=bump) > 1e-3


def test_twistor_line_needs_period_structure():
    bare = PlebanskiModel(SymplecticData(standard_omega(2)), W=lambda z, t: 0j)
    with pytest.raises(NoPeriodStructure):
        twistor_line_residual(bare, TangentPoint([1, 1], [0, 0]), 1.0)


def test_descent_a1():
    inv = [lambda p: a1_phi(A1Point(*p.x))[0], lambda p: a1_phi(A1Point(*p.x))[1]]
    for pt in A1_POINTS[:3]:
        assert descent_drift(a1_model(), pt, math.inf, inv, 0.5, tol=1e-12) < 1e-8


def test_descent_a2():
    inv = [lambda x: a2_phi(x)[0], lambda x: a2_phi(x)[1]]
    for s in sample_a2_states(3, seed=7):
        assert descent_drift(A2_CHART, s.vector, math.inf, inv, 1.0) < 1e-6


def test_descent_vertical_keeps_base():
    inv = [lambda p: p.z[0], lambda p: p.z[1]]
    assert descent_drift(a1_model(), A1_POINTS[1], 0, inv, 1.0) == 0.0


def test_descent_detects_non_invariant():
    inv = [lambda p: p.theta[0]]
    assert descent_drift(a1_model(), A1_POINTS[1], 1.0, inv, 1.0) > 1e-3


@given(complex_strategy(0.5, 2.0))
def test_asymptotic_probe_records(eps):
    out = asymptotic_probe(a1_model(), TangentPoint([1.5, 0.2], [0.1, 0.3]), [eps])
    assert len(out) == 1 and len(out[0]["t"]) == 2 and out[0]["eps"] == eps
