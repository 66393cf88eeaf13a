"""
Transform Agent - discrete Ss/Sl transforms on F_M, their inverses and
interpolants, discrete Gram matrices and continuous inner products.
"""

import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from data_models import (
    GRID_TO_ORBIT_FAMILY, AlgebraName, ContractViolation, GridFamily, IntegrationMethod,
    OrbitFamily, OrbitFunctionSpec, SampledField, SpectralField, Weight
)
from agents.grid_agent import GridAgent
from agents.lie_core_agent import LieCoreAgent
from agents.orbit_evaluation_agent import OrbitEvaluationAgent

logger = logging.getLogger(__name__)

DEFAULT_CHUNK_ROWS = 256
MC_BATCH = 100_000


def rowwise_fsum(matrix: np.ndarray) -> np.ndarray:
    """Correctly rounded sum along axis 1, independent of summation order."""
    matrix = np.asarray(matrix, dtype=complex)
    return np.array(
        [complex(math.fsum(row.real.tolist()), math.fsum(row.imag.tolist())) for row in matrix],
        dtype=complex,
    ).reshape(matrix.shape[0])


class TransformAgent:
    """Forward and inverse discrete orbit-function transforms."""

    def __init__(self, lie_core: Optional[LieCoreAgent] = None, grid_agent: Optional[GridAgent] = None,
                 evaluator: Optional[OrbitEvaluationAgent] = None, threads: Optional[int] = None,
                 chunk_rows: int = DEFAULT_CHUNK_ROWS, corrupt_epsilon: bool = False):
        self.name = "TransformAgent"
        self.lie_core = lie_core or LieCoreAgent()
        self.grid_agent = grid_agent or GridAgent(self.lie_core)
        self.evaluator = evaluator or OrbitEvaluationAgent(self.lie_core, self.grid_agent)
        self.threads = max(1, threads or min(8, os.cpu_count() or 1))
        self.chunk_rows = chunk_rows
        self.corrupt_epsilon = corrupt_epsilon

    # ------------------------------------------------------------------
    # Coefficient tables
    # ------------------------------------------------------------------

    def epsilon_table(self, algebra, family, M: int) -> np.ndarray:
        """epsilon(x) for every grid point, canonical order."""
        numerators = self.grid_agent.grid_numerators(algebra, family, M)
        if numerators.shape[0] == 0:
            return np.zeros(0, dtype=np.int64)
        stabilizers = self.lie_core.torus_stabilizer_orders(algebra, numerators, 2 * M)
        epsilon = 48 // stabilizers
        if self.corrupt_epsilon:
            epsilon = epsilon.copy()
            epsilon[0] += 1
            logger.warning("epsilon table deliberately corrupted for a negative control run")
        return epsilon

    def dual_stabilizer_table(self, algebra, family, M: int) -> np.ndarray:
        """h-vee for every weight, canonical order."""
        weights = self.grid_agent.weight_coords(algebra, family, M)
        if weights.shape[0] == 0:
            return np.zeros(0, dtype=np.int64)
        return self.lie_core.dual_stabilizer_orders(algebra, weights, M)

    def basis_matrix(self, algebra, family, M: int) -> np.ndarray:
        """(|Lambda_M|, |F_M|) matrix of phi_lambda(x), built in parallel row chunks."""
        weights = self.grid_agent.weight_coords(algebra, family, M)
        numerators = self.grid_agent.grid_numerators(algebra, family, M)
        orbit_family = GRID_TO_ORBIT_FAMILY[GridFamily(family)]
        if weights.shape[0] == 0:
            return np.zeros((0, numerators.shape[0]), dtype=complex)
        chunks = [weights[start:start + self.chunk_rows] for start in range(0, weights.shape[0], self.chunk_rows)]
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            blocks = list(pool.map(
                lambda block: self.evaluator.grid_basis(algebra, orbit_family, block, numerators, M), chunks
            ))
        return np.vstack(blocks)

    def _check_length(self, algebra, family, M: int, length: int, kind: str) -> int:
        expected = self.grid_agent.grid_barycentric(algebra, family, M).shape[0]
        if length != expected:
            raise ContractViolation(
                f"{kind} of length {length} does not match |F_{M}| = {expected} for "
                f"{AlgebraName(algebra).value} {GridFamily(family).value}"
            )
        return expected

    # ------------------------------------------------------------------
    # Transforms
    # ------------------------------------------------------------------

    def forward_transform(self, field: SampledField) -> SpectralField:
        """c_lambda = (1 / (k M^3 h_lambda)) sum_x epsilon(x) f(x) conj(phi_lambda(x))."""
        values = field.to_array()
        self._check_length(field.algebra, field.family, field.M, values.shape[0], "sampled field")
        if values.shape[0] == 0:
            return SpectralField.from_values(field.algebra, field.family, field.M, [])

        logger.info("Forward transform %s %s M=%d (%d points)",
                    field.algebra.value, field.family.value, field.M, values.shape[0])
        k_const = self.lie_core.get_algebra(field.algebra).k_const
        basis = self.basis_matrix(field.algebra, field.family, field.M)
        weighted = self.epsilon_table(field.algebra, field.family, field.M) * values
        sums = self._parallel_rowsum(np.conj(basis) * weighted[None, :])
        h = self.dual_stabilizer_table(field.algebra, field.family, field.M)
        coefficients = sums / (k_const * field.M ** 3 * h)
        return SpectralField.from_values(field.algebra, field.family, field.M, coefficients)

    def inverse_transform(self, spec: SpectralField, x) -> complex:
        """Interpolant I_M(x) = sum_lambda c_lambda phi_lambda(x) at one alpha-vee point."""
        return complex(self.inverse_transform_points(spec, np.asarray(x, dtype=float)[None, :])[0])

    def inverse_transform_points(self, spec: SpectralField, points: np.ndarray) -> np.ndarray:
        """Interpolant at many alpha-vee points."""
        coefficients = spec.to_array()
        weights = self.grid_agent.weight_coords(spec.algebra, spec.family, spec.M)
        if coefficients.shape[0] != weights.shape[0]:
            raise ContractViolation(
                f"spectral field of length {coefficients.shape[0]} does not match |Lambda_{spec.M}| = {weights.shape[0]}"
            )
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        if weights.shape[0] == 0:
            return np.zeros(points.shape[0], dtype=complex)
        orbit_family = GRID_TO_ORBIT_FAMILY[spec.family]
        chunks = [points[start:start + self.chunk_rows] for start in range(0, points.shape[0], self.chunk_rows)]

        def _evaluate(block: np.ndarray) -> np.ndarray:
            basis = self.evaluator.evaluate_weights(spec.algebra, orbit_family, weights, block)
            return rowwise_fsum((coefficients[:, None] * basis).T)

        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            blocks = list(pool.map(_evaluate, chunks))
        return np.concatenate(blocks) if blocks else np.zeros(0, dtype=complex)

    def inverse_on_grid(self, spec: SpectralField) -> np.ndarray:
        """Interpolant at the points of F_M, using exact grid phases."""
        coefficients = spec.to_array()
        self._check_length(spec.algebra, spec.family, spec.M, coefficients.shape[0], "spectral field")
        if coefficients.shape[0] == 0:
            return np.zeros(0, dtype=complex)
        basis = self.basis_matrix(spec.algebra, spec.family, spec.M)
        return self._parallel_rowsum((coefficients[:, None] * basis).T)

    def _parallel_rowsum(self, matrix: np.ndarray) -> np.ndarray:
        chunks = [matrix[start:start + self.chunk_rows] for start in range(0, matrix.shape[0], self.chunk_rows)]
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            return np.concatenate(list(pool.map(rowwise_fsum, chunks)))

    def roundtrip_residual(self, field: SampledField) -> float:
        """Max relative difference between f and the interpolant on the grid."""
        values = field.to_array()
        if values.shape[0] == 0:
            return 0.0
        reconstructed = self.inverse_on_grid(self.forward_transform(field))
        return float(np.max(np.abs(reconstructed - values)) / max(np.max(np.abs(values)), 1e-300))

    def parseval_deviation(self, field: SampledField, spec: Optional[SpectralField] = None) -> float:
        """Relative gap between sum eps |f|^2 and k M^3 sum h |c|^2."""
        spec = spec or self.forward_transform(field)
        values, coefficients = field.to_array(), spec.to_array()
        if values.shape[0] == 0:
            return 0.0
        k_const = self.lie_core.get_algebra(field.algebra).k_const
        lhs = math.fsum((self.epsilon_table(field.algebra, field.family, field.M) * np.abs(values) ** 2).tolist())
        h = self.dual_stabilizer_table(field.algebra, field.family, field.M)
        rhs = k_const * field.M ** 3 * math.fsum((h * np.abs(coefficients) ** 2).tolist())
        return abs(lhs - rhs) / max(abs(lhs), 1e-300)

    # ------------------------------------------------------------------
    # Orthogonality
    # ------------------------------------------------------------------

    def discrete_gram_matrix(self, algebra, family, M: int) -> np.ndarray:
        """G[lambda, lambda'] = sum_x epsilon(x) phi_lambda(x) conj(phi_lambda'(x))."""
        basis = self.basis_matrix(algebra, family, M)
        if basis.shape[0] == 0:
            return np.zeros((0, 0), dtype=complex)
        epsilon = self.epsilon_table(algebra, family, M)
        return (basis * epsilon[None, :]) @ np.conj(basis).T

    def expected_gram_diagonal(self, algebra, family, M: int) -> np.ndarray:
        k_const = self.lie_core.get_algebra(algebra).k_const
        return k_const * M ** 3 * self.dual_stabilizer_table(algebra, family, M).astype(float)

    def gram_deviation(self, algebra, family, M: int) -> Tuple[float, float]:
        """(worst off-diagonal / diagonal ratio, worst relative diagonal error)."""
        gram = self.discrete_gram_matrix(algebra, family, M)
        if gram.shape[0] == 0:
            return 0.0, 0.0
        expected = self.expected_gram_diagonal(algebra, family, M)
        off_diagonal = np.abs(gram - np.diag(np.diag(gram))) / expected[:, None]
        diagonal = np.abs(np.diag(gram) - expected) / expected
        return float(off_diagonal.max()), float(diagonal.max())

    def continuous_inner_product(self, algebra, family, weight, other_weight,
                                 method: Union[IntegrationMethod, str] = IntegrationMethod.MONTE_CARLO,
                                 n_samples: int = 1_000_000, seed: int = 0, order: int = 24) -> complex:
        """Estimate of the integral over F of phi_lambda conj(phi_lambda')."""
        family = OrbitFamily(family)
        first = OrbitFunctionSpec(algebra=algebra, family=family, weight=Weight(coords=tuple(weight)))
        second = OrbitFunctionSpec(algebra=algebra, family=family, weight=Weight(coords=tuple(other_weight)))
        volume = self.lie_core.get_algebra(algebra).fundamental_volume

        def integrand(points: np.ndarray) -> np.ndarray:
            return (self.evaluator.evaluate(algebra, family, first.weight.coords, points)
                    * np.conj(self.evaluator.evaluate(algebra, family, second.weight.coords, points)))

        if IntegrationMethod(method) == IntegrationMethod.QUADRATURE:
            return self._collapsed_quadrature(algebra, integrand, order) * 6.0 * volume

        rng = np.random.default_rng(seed)
        real, imag = [], []
        remaining = n_samples
        while remaining > 0:
            size = min(MC_BATCH, remaining)
            values = integrand(self.grid_agent.sample_domain(algebra, size, rng))
            real.append(float(values.real.sum()))
            imag.append(float(values.imag.sum()))
            remaining -= size
        return volume * complex(math.fsum(real), math.fsum(imag)) / n_samples

    def _collapsed_quadrature(self, algebra, integrand, order: int) -> complex:
        """Gauss-Legendre rule on the unit simplex through the collapsed cube map."""
        nodes, weights = np.polynomial.legendre.leggauss(order)
        nodes, weights = (nodes + 1.0) / 2.0, weights / 2.0
        u1, u2, u3 = np.meshgrid(nodes, nodes, nodes, indexing="ij")
        w = (weights[:, None, None] * weights[None, :, None] * weights[None, None, :]).ravel()
        b1 = u1.ravel()
        b2 = ((1.0 - u1) * u2).ravel()
        b3 = ((1.0 - u1) * (1.0 - u2) * u3).ravel()
        jacobian = ((1.0 - u1) ** 2 * (1.0 - u2)).ravel()
        arrays = self.lie_core.arrays(algebra)
        y = np.column_stack([b1, b2, b3]) / arrays.marks
        points = y @ (arrays.cartan_inverse_2.T / 2.0)
        values = integrand(points) * w * jacobian
        return complex(math.fsum(values.real.tolist()), math.fsum(values.imag.tolist()))

    # ------------------------------------------------------------------
    # Throughput
    # ------------------------------------------------------------------

    def benchmark(self, algebra, family, M: int, seed: int = 0) -> Dict[str, float]:
        """Timings of the basis build and a forward transform of random data."""
        n = self.grid_agent.grid_barycentric(algebra, family, M).shape[0]
        rng = np.random.default_rng(seed)
        field = SampledField.from_values(algebra, family, M, rng.standard_normal(n) + 1j * rng.standard_normal(n))
        start = time.perf_counter()
        self.basis_matrix(algebra, family, M)
        basis_seconds = time.perf_counter() - start
        start = time.perf_counter()
        self.forward_transform(field)
        transform_seconds = time.perf_counter() - start
        terms = float(n) * n * 48
        return {
            "points": n,
            "basis_seconds": basis_seconds,
            "transform_seconds": transform_seconds,
            "terms_per_second": terms / basis_seconds if basis_seconds > 0 else float("inf"),
        }
