from fractions import Fraction

import numpy as np
import pytest
from pydantic import ValidationError

from data_models import (
    AlgebraName, ContractViolation, OrbitFamily, OrbitFunctionSpec, TorusPoint, Weight
)
from lie_library import PRINTED_ERRATA
from agents.orbit_evaluation_agent import NeumaierAccumulator, permanent


def _spec(algebra, family, coords):
    return OrbitFunctionSpec(algebra=algebra, family=family, weight=Weight(coords=coords))


def test_values_at_the_origin(evaluator):
    assert abs(evaluator.eval_generic(_spec("B3", "C", (0, 0, 0)), (0, 0, 0)) - 48) < 1e-12
    assert abs(evaluator.eval_generic(_spec("C3", "C", (2, 0, 1)), TorusPoint(coords=(0, 0, 0))) - 48) < 1e-12
    assert abs(evaluator.eval_generic(_spec("B3", "S", (1, 1, 1)), (0, 0, 0))) < 1e-12


def test_weights_outside_the_cone_are_rejected():
    with pytest.raises(ValidationError):
        _spec("B3", "S", (1, 0, 1))
    with pytest.raises(ValidationError):
        _spec("B3", "Ss", (2, 3, 0))
    with pytest.raises(ValidationError):
        _spec("C3", "Sl", (2, 3, 0))
    with pytest.raises(ValidationError):
        _spec("C3", "C", (-1, 0, 0))
    _spec("C3", "Ss", (1, 1, 0))


def test_float_and_exact_evaluation_agree(evaluator):
    spec = _spec("C3", "Sl", (1, 3, 2))
    coords = (Fraction(1, 7), Fraction(2, 9), Fraction(1, 5))
    exact = evaluator.eval_generic(spec, coords)
    approximate = evaluator.eval_generic(spec, np.array([float(c) for c in coords]))
    assert abs(exact - approximate) < 1e-12


@pytest.mark.parametrize("algebra", list(AlgebraName))
@pytest.mark.parametrize("family", [OrbitFamily.SS, OrbitFamily.SL])
def test_explicit_expansion_matches_generic_sum(evaluator, algebra, family):
    rng = np.random.default_rng(7)
    _, _, is_sine = evaluator.library.get_expansion(algebra, family)
    strict = evaluator.lie_core.get_algebra(algebra).short_set if family == OrbitFamily.SS \
        else evaluator.lie_core.get_algebra(algebra).long_set
    for _ in range(40):
        coords = tuple(int(rng.integers(1 if i in strict else 0, 7)) for i in (1, 2, 3))
        spec = _spec(algebra, family, coords)
        x = rng.random(3)
        generic = evaluator.eval_generic(spec, x)
        explicit = evaluator.eval_explicit(spec, x)
        assert abs(generic - explicit) < 1e-10 * max(1.0, abs(generic))
        if is_sine:
            assert abs(generic.real) < 1e-10 * max(1.0, abs(generic))
        else:
            assert abs(generic.imag) < 1e-10 * max(1.0, abs(generic))


def test_explicit_expansion_is_only_for_short_and_long(evaluator):
    with pytest.raises(ContractViolation):
        evaluator.eval_explicit(_spec("B3", "C", (1, 0, 0)), (0.1, 0.2, 0.3))


@pytest.mark.parametrize("algebra", list(AlgebraName))
@pytest.mark.parametrize("family", [OrbitFamily.SS, OrbitFamily.SL])
def test_stored_expansions_pass_the_audit(evaluator, algebra, family):
    assert evaluator.audit_expansion(algebra, family) == []


@pytest.mark.parametrize("algebra", list(AlgebraName))
def test_printed_errata_are_flagged(evaluator, algebra):
    terms, _, _ = evaluator.library.get_expansion(algebra, OrbitFamily.SS)
    printed = sorted(index for (alg, index) in PRINTED_ERRATA if alg == algebra)
    for index in printed:
        terms[index - 1] = PRINTED_ERRATA[(algebra, index)]
    assert evaluator.audit_expansion(algebra, OrbitFamily.SS, terms) == printed


def test_duplicate_term_is_flagged(evaluator):
    terms, _, _ = evaluator.library.get_expansion("B3", OrbitFamily.SL)
    terms[5] = terms[2]
    assert evaluator.audit_expansion("B3", OrbitFamily.SL, terms) == [6]


@pytest.mark.parametrize("algebra", list(AlgebraName))
@pytest.mark.parametrize("family", list(OrbitFamily))
def test_symmetries(evaluator, algebra, family):
    coords = {OrbitFamily.C: (2, 0, 1), OrbitFamily.S: (1, 2, 3)}.get(family, (3, 1, 2))
    report = evaluator.verify_symmetries(_spec(algebra, family, coords), trials=40, seed=1)
    assert report.passed, report
    if family == OrbitFamily.C:
        assert report.boundary_deviation is None
    else:
        assert report.boundary_deviation < 1e-10


def test_symmetry_trials_must_be_positive(evaluator):
    with pytest.raises(ValueError):
        evaluator.verify_symmetries(_spec("B3", "C", (1, 0, 0)), trials=0)


@pytest.mark.parametrize("algebra, family", [("B3", "s"), ("B3", "l"), ("C3", "s"), ("C3", "l")])
def test_boundary_zeros(evaluator, algebra, family):
    values = evaluator.boundary_values(algebra, family, (2, 2, 2), n_points=30, seed=4)
    assert np.max(np.abs(values)) < 1e-10


def test_high_precision_agrees_with_grid_phases(evaluator, grid_agent):
    M = 6
    numerators = grid_agent.grid_numerators("B3", "s", M)
    weights = grid_agent.weight_coords("B3", "s", M)
    basis = evaluator.grid_basis("B3", OrbitFamily.SS, weights, numerators, M)
    for i, j in [(0, 0), (3, 5), (len(weights) - 1, len(numerators) - 2)]:
        coords = [Fraction(int(v), 2 * M) for v in numerators[j]]
        exact = complex(evaluator.eval_high_precision("B3", OrbitFamily.SS, weights[i], coords))
        assert abs(basis[i, j] - exact) < 1e-12 * max(1.0, abs(exact))


@pytest.mark.parametrize("algebra", list(AlgebraName))
@pytest.mark.parametrize("family", list(OrbitFamily))
def test_product_decomposition(evaluator, algebra, family):
    first = {OrbitFamily.C: (1, 0, 2), OrbitFamily.S: (1, 1, 1)}.get(family, (1, 1, 1))
    second = {OrbitFamily.C: (0, 3, 0), OrbitFamily.S: (2, 1, 3)}.get(family, (2, 1, 3))
    lhs, rhs, deviation = evaluator.product_decomposition_check(algebra, family, first, second, (0.13, 0.41, 0.07))
    assert deviation < 1e-9 * max(1.0, abs(lhs))


@pytest.mark.parametrize("family", list(OrbitFamily))
def test_C3_trigonometric_forms(evaluator, family):
    weight = {OrbitFamily.C: (0, 2, 1), OrbitFamily.S: (1, 2, 1), OrbitFamily.SS: (1, 1, 0)}.get(family, (0, 1, 2))
    rng = np.random.default_rng(9)
    for _ in range(10):
        value, closed, deviation = evaluator.trig_correspondence_C3(family, weight, rng.random(3))
        assert deviation < 1e-10 * max(1.0, abs(value))


def test_neumaier_accumulator_recovers_cancelled_terms():
    accumulator = NeumaierAccumulator((1,))
    for term in (1e16, 1.0, -1e16):
        accumulator.add(np.array([term + 0j]))
    assert accumulator.result()[0] == 1.0


def test_permanent():
    assert permanent(np.array([[1, 2], [3, 4]])) == 10
