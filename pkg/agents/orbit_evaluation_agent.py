"""
Orbit Evaluation Agent - evaluates C, S, Ss and Sl orbit functions through
the generic 48-term sum and through the explicit 24-term expansions, and
checks their symmetry properties.
"""

import itertools
import logging
import math
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from data_models import (
    FAMILY_HOMOMORPHISM, AlgebraName, ContractViolation, GridFamily, OrbitFamily,
    OrbitFunctionSpec, SymmetryReport, TorusPoint, Weight
)
from lie_library import POINT_STRICT_INDICES, ExpansionTerm
from agents.grid_agent import GridAgent
from agents.lie_core_agent import LieCoreAgent

logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-10
ORACLE_DIGITS = 50


class NeumaierAccumulator:
    """Elementwise compensated summation of complex arrays."""

    def __init__(self, shape):
        self._sum = [np.zeros(shape), np.zeros(shape)]
        self._carry = [np.zeros(shape), np.zeros(shape)]

    def add(self, term: np.ndarray) -> None:
        for k, part in enumerate((np.real(term), np.imag(term))):
            total = self._sum[k] + part
            self._carry[k] += np.where(
                np.abs(self._sum[k]) >= np.abs(part),
                (self._sum[k] - total) + part,
                (part - total) + self._sum[k],
            )
            self._sum[k] = total

    def result(self) -> np.ndarray:
        return (self._sum[0] + self._carry[0]) + 1j * (self._sum[1] + self._carry[1])


def _is_exact(point) -> bool:
    if isinstance(point, TorusPoint):
        return True
    return all(isinstance(v, (Fraction, int, np.integer)) and not isinstance(v, bool) for v in point)


def permanent(matrix: np.ndarray) -> complex:
    n = matrix.shape[0]
    return sum(
        np.prod([matrix[i, perm[i]] for i in range(n)])
        for perm in itertools.permutations(range(n))
    )


class OrbitEvaluationAgent:
    """Evaluates orbit functions of B3 and C3."""

    def __init__(self, lie_core: Optional[LieCoreAgent] = None, grid_agent: Optional[GridAgent] = None):
        self.name = "OrbitEvaluationAgent"
        self.lie_core = lie_core or LieCoreAgent()
        self.grid_agent = grid_agent or GridAgent(self.lie_core)
        self.library = self.lie_core.library

    # ------------------------------------------------------------------
    # Generic sums
    # ------------------------------------------------------------------

    def eval_generic(self, spec: OrbitFunctionSpec, x) -> complex:
        """Signed 48-term exponential sum at one point in alpha-vee coordinates."""
        if isinstance(x, TorusPoint) or _is_exact(x):
            coords = x.coords if isinstance(x, TorusPoint) else tuple(Fraction(v) for v in x)
            return self._eval_exact(spec.algebra, spec.family, spec.weight.coords, coords)
        values = self.evaluate(spec.algebra, spec.family, spec.weight.coords, np.asarray(x, dtype=float)[None, :])
        return complex(values[0])

    def _eval_exact(self, algebra, family, weight, coords: Sequence[Fraction]) -> complex:
        group = self.lie_core.group(algebra)
        signs = group.signs[FAMILY_HOMOMORPHISM[OrbitFamily(family)]]
        images = group.omega @ np.asarray(weight, dtype=np.int64)
        real, imag = [], []
        for sign, image in zip(signs, images):
            phase = sum((int(a) * c for a, c in zip(image, coords)), Fraction(0)) % 1
            angle = 2.0 * math.pi * float(phase)
            real.append(sign * math.cos(angle))
            imag.append(sign * math.sin(angle))
        return complex(math.fsum(real), math.fsum(imag))

    def evaluate(self, algebra, family, weight, points: np.ndarray) -> np.ndarray:
        """One orbit function at many points; no cone check, so any integer weight is accepted."""
        return self.evaluate_weights(algebra, family, np.atleast_2d(weight), points)[0]

    def evaluate_weights(self, algebra, family, weights: np.ndarray, points: np.ndarray) -> np.ndarray:
        """(m, n) matrix of psi_lambda(x) for weight rows and alpha-vee point rows."""
        group = self.lie_core.group(algebra)
        signs = group.signs[FAMILY_HOMOMORPHISM[OrbitFamily(family)]]
        weights = np.asarray(weights, dtype=np.int64).reshape(-1, 3)
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        accumulator = NeumaierAccumulator((weights.shape[0], points.shape[0]))
        for sign, matrix in zip(signs, group.omega):
            phase = (weights @ matrix.T) @ points.T
            phase -= np.floor(phase)
            accumulator.add(sign * np.exp(2j * np.pi * phase))
        return accumulator.result()

    def grid_basis(self, algebra, family, weights: np.ndarray, numerators: np.ndarray, M: int) -> np.ndarray:
        """
        (m, n) basis matrix at grid points q / (2M). Phases are reduced exactly
        mod 2M and looked up in a shared table of 2M roots of unity.
        """
        group = self.lie_core.group(algebra)
        signs = group.signs[FAMILY_HOMOMORPHISM[OrbitFamily(family)]]
        modulus = 2 * M
        table = np.exp(1j * np.pi * np.arange(modulus) / M)
        weights = np.asarray(weights, dtype=np.int64).reshape(-1, 3)
        numerators = np.asarray(numerators, dtype=np.int64).reshape(-1, 3)
        accumulator = NeumaierAccumulator((weights.shape[0], numerators.shape[0]))
        for sign, matrix in zip(signs, group.omega):
            index = ((weights @ matrix.T) @ numerators.T) % modulus
            accumulator.add(sign * table[index])
        return accumulator.result()

    def eval_high_precision(self, algebra, family, weight, coords: Sequence[Fraction], dps: int = ORACLE_DIGITS):
        """Independent mpmath summation with exact phases."""
        group = self.lie_core.group(algebra)
        signs = group.signs[FAMILY_HOMOMORPHISM[OrbitFamily(family)]]
        images = group.omega @ np.asarray(weight, dtype=np.int64)
        with mpmath.workdps(dps):
            total = mpmath.mpc(0)
            for sign, image in zip(signs, images):
                phase = sum((int(a) * Fraction(c) for a, c in zip(image, coords)), Fraction(0))
                total += int(sign) * mpmath.expjpi(2 * mpmath.mpf(phase.numerator) / phase.denominator)
            return total

    # ------------------------------------------------------------------
    # Explicit expansions
    # ------------------------------------------------------------------

    def eval_explicit(self, spec: OrbitFunctionSpec, x) -> complex:
        """Evaluate the transcribed 24-term sine/cosine expansion."""
        if spec.family not in (OrbitFamily.SS, OrbitFamily.SL):
            raise ContractViolation(f"no explicit expansion for family {spec.family.value}")
        terms, signs, is_sine = self.library.get_expansion(spec.algebra, spec.family)
        exact = isinstance(x, TorusPoint) or _is_exact(x)
        coords = x.coords if isinstance(x, TorusPoint) else x
        weight = np.asarray(spec.weight.coords, dtype=np.int64)
        parts = []
        for sign, term in zip(signs, terms):
            image = np.asarray(term, dtype=np.int64) @ weight
            if exact:
                phase = float(sum((int(a) * Fraction(c) for a, c in zip(image, coords)), Fraction(0)) % 1)
            else:
                phase = float(np.dot(image, np.asarray(coords, dtype=float)))
                phase -= math.floor(phase)
            angle = 2.0 * math.pi * phase
            parts.append(sign * (math.sin(angle) if is_sine else math.cos(angle)))
        total = 2.0 * math.fsum(parts)
        return complex(0.0, total) if is_sine else complex(total, 0.0)

    def audit_expansion(self, algebra, family, terms: Optional[List[ExpansionTerm]] = None) -> List[int]:
        """
        1-based indices of expansion terms that are not W-images of lambda with
        the matching sign, or that repeat an earlier term up to w0 = -1.
        """
        library_terms, signs, is_sine = self.library.get_expansion(algebra, family)
        terms = library_terms if terms is None else terms
        group = self.lie_core.group(algebra)
        hom_signs = group.signs[FAMILY_HOMOMORPHISM[OrbitFamily(family)]]
        longest = int(np.argmax(np.all(group.omega == -np.eye(3, dtype=np.int64), axis=(1, 2))))
        if (hom_signs[longest] == -1) != is_sine:
            return list(range(1, len(terms) + 1))

        used = set()
        mismatches = []
        for k, (term, sign) in enumerate(zip(terms, signs), start=1):
            matrix = np.asarray(term, dtype=np.int64)
            hits = np.flatnonzero(np.all(group.omega == matrix, axis=(1, 2)))
            if hits.size == 0 or hom_signs[hits[0]] != sign or matrix.tobytes() in used:
                mismatches.append(k)
                continue
            used.add(matrix.tobytes())
            used.add((-matrix).tobytes())
        if mismatches:
            logger.warning("%s %s expansion: terms %s disagree with the Weyl orbit",
                           AlgebraName(algebra).value, OrbitFamily(family).value, mismatches)
        return mismatches

    # ------------------------------------------------------------------
    # Properties
    # ------------------------------------------------------------------

    def verify_symmetries(self, spec: OrbitFunctionSpec, trials: int = 100, seed: int = 0,
                          tol: float = SYMMETRY_TOLERANCE) -> SymmetryReport:
        """Shift invariance, point (anti)invariance, weight (anti)invariance and boundary zeros."""
        if trials < 1:
            raise ValueError("trials must be positive")
        rng = np.random.default_rng(seed)
        group = self.lie_core.group(spec.algebra)
        signs = group.signs[spec.homomorphism]
        weight = np.asarray(spec.weight.coords, dtype=np.int64)

        points = rng.random((trials, 3))
        shifts = rng.integers(-3, 4, size=(trials, 3))
        chosen = rng.integers(0, len(group.elements), size=trials)

        base = self.evaluate(spec.algebra, spec.family, weight, points)
        scale = np.maximum(np.abs(base), 1.0)
        shifted = self.evaluate(spec.algebra, spec.family, weight, points + shifts)
        moved = np.einsum("nij,nj->ni", group.alphavee[chosen], points)
        moved_values = self.evaluate(spec.algebra, spec.family, weight, moved)
        images = group.omega[chosen] @ weight
        image_values = np.array([
            self.evaluate(spec.algebra, spec.family, image, point[None, :])[0]
            for image, point in zip(images, points)
        ])

        report = SymmetryReport(
            algebra=spec.algebra,
            family=spec.family,
            weight=spec.weight.coords,
            trials=trials,
            seed=seed,
            shift_deviation=float(np.max(np.abs(shifted - base) / scale)),
            point_deviation=float(np.max(np.abs(moved_values - signs[chosen] * base) / scale)),
            weight_deviation=float(np.max(np.abs(image_values - signs[chosen] * base) / scale)),
        )

        walls = self._vanishing_walls(spec.algebra, spec.family)
        if walls:
            boundary = np.array([self.grid_agent.wall_point(spec.algebra, walls, rng) for _ in range(trials)])
            report.boundary_deviation = float(np.max(np.abs(self.evaluate(spec.algebra, spec.family, weight, boundary))))

        deviations = [report.shift_deviation, report.point_deviation, report.weight_deviation]
        if report.boundary_deviation is not None:
            deviations.append(report.boundary_deviation)
        report.max_deviation = max(deviations)
        report.passed = report.max_deviation < tol
        return report

    def _vanishing_walls(self, algebra, family) -> Tuple[int, ...]:
        """Barycentric walls of F on which the family vanishes."""
        family = OrbitFamily(family)
        if family == OrbitFamily.S:
            return (0, 1, 2, 3)
        if family == OrbitFamily.SS:
            return POINT_STRICT_INDICES[(AlgebraName(algebra), GridFamily.SHORT)]
        if family == OrbitFamily.SL:
            return POINT_STRICT_INDICES[(AlgebraName(algebra), GridFamily.LONG)]
        return ()

    def boundary_values(self, algebra, family: GridFamily, weight, n_points: int, seed: int = 0) -> np.ndarray:
        """Values of the Ss/Sl function at random points of H^s/H^l."""
        rng = np.random.default_rng(seed)
        orbit_family = OrbitFamily.SS if GridFamily(family) == GridFamily.SHORT else OrbitFamily.SL
        points = np.array([self.grid_agent.boundary_point(algebra, family, rng) for _ in range(n_points)])
        return self.evaluate(algebra, orbit_family, weight, points)

    def product_decomposition_check(self, algebra, family, weight, other_weight, x) -> Tuple[complex, complex, float]:
        """phi_lambda phi_lambda' against sum_w sigma(w) Phi_{lambda + w lambda'}."""
        family = OrbitFamily(family)
        first = OrbitFunctionSpec(algebra=algebra, family=family, weight=Weight(coords=tuple(weight)))
        second = OrbitFunctionSpec(algebra=algebra, family=family, weight=Weight(coords=tuple(other_weight)))
        point = np.asarray(x, dtype=float)[None, :]
        lhs = complex(
            self.evaluate(algebra, family, first.weight.coords, point)[0]
            * self.evaluate(algebra, family, second.weight.coords, point)[0]
        )
        group = self.lie_core.group(algebra)
        signs = group.signs[first.homomorphism]
        shifted = np.asarray(weight, dtype=np.int64) + group.omega @ np.asarray(other_weight, dtype=np.int64)
        symmetric = self.evaluate_weights(algebra, OrbitFamily.C, shifted, point)[:, 0]
        rhs = complex(math.fsum((signs * symmetric.real).tolist()), math.fsum((signs * symmetric.imag).tolist()))
        return lhs, rhs, abs(lhs - rhs)

    def trig_correspondence_C3(self, family, weight, x) -> Tuple[complex, complex, float]:
        """Compare a C3 orbit function with 8 per/det of cos or sin matrices in orthonormal coordinates."""
        family = OrbitFamily(family)
        lam = self.lie_core.weight_to_orthonormal(AlgebraName.C3, weight)
        point = self.lie_core.point_to_orthonormal(AlgebraName.C3, x)
        angles = 2.0 * np.pi * np.outer(lam, point)
        if family == OrbitFamily.C:
            closed = 8.0 * permanent(np.cos(angles))
        elif family == OrbitFamily.S:
            closed = -8j * np.linalg.det(np.sin(angles))
        elif family == OrbitFamily.SS:
            closed = 8.0 * np.linalg.det(np.cos(angles))
        else:
            closed = -8j * permanent(np.sin(angles))
        value = complex(self.evaluate(AlgebraName.C3, family, weight, np.asarray(x, dtype=float)[None, :])[0])
        closed = complex(closed)
        return value, closed, abs(value - closed)
