"""
Grid Agent - fundamental domains, the point grids F_M^s / F_M^l, the weight
sets Lambda_M^s / Lambda_M^l and reduction of points into F.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from data_models import (
    AlgebraName, GridFamily, GridPoint, GridWeight, ReductionError, Region
)
from lie_library import (
    POINT_GRID_COEFFICIENTS, POINT_STRICT_INDICES, WEIGHT_SET_COEFFICIENTS, WEIGHT_STRICT_INDICES
)
from agents.lie_core_agent import LieCoreAgent

logger = logging.getLogger(__name__)

BOUNDARY_TOLERANCE = 1e-12
MAX_REDUCTION_STEPS = 10_000


@dataclass(frozen=True)
class AffineWeylTransform:
    """x -> linear @ x + shift in alpha-vee coordinates; linear in W, shift in Q-vee."""
    linear: np.ndarray
    shift: np.ndarray
    steps: int = 0

    @property
    def is_identity(self) -> bool:
        return bool(np.array_equal(self.linear, np.eye(3, dtype=np.int64)) and not self.shift.any())

    def apply(self, point):
        return self.linear @ np.asarray(point) + self.shift


def _enumerate_constrained(coeffs: Sequence[int], M: int, strict: Sequence[int]) -> List[Tuple[int, int, int, int]]:
    """Solutions of v0 + c1 v1 + c2 v2 + c3 v3 = M, lexicographic in (v1, v2, v3)."""
    low = [1 if i in strict else 0 for i in range(4)]
    c1, c2, c3 = coeffs
    rows = []
    for v1 in range(low[1], M // c1 + 1):
        rest1 = M - c1 * v1
        for v2 in range(low[2], rest1 // c2 + 1):
            rest2 = rest1 - c2 * v2
            for v3 in range(low[3], rest2 // c3 + 1):
                v0 = rest2 - c3 * v3
                if v0 >= low[0]:
                    rows.append((v0, v1, v2, v3))
    return rows


def _frozen_rows(rows) -> np.ndarray:
    result = np.array(rows, dtype=np.int64).reshape(-1, 4)
    result.setflags(write=False)
    return result


@lru_cache(maxsize=64)
def _point_grid(algebra: AlgebraName, family: GridFamily, M: int) -> np.ndarray:
    rows = _enumerate_constrained(POINT_GRID_COEFFICIENTS[algebra], M, POINT_STRICT_INDICES[(algebra, family)])
    return _frozen_rows(rows)


@lru_cache(maxsize=64)
def _weight_set(algebra: AlgebraName, family: GridFamily, M: int) -> np.ndarray:
    rows = _enumerate_constrained(WEIGHT_SET_COEFFICIENTS[algebra], M, WEIGHT_STRICT_INDICES[(algebra, family)])
    return _frozen_rows(rows)


class GridAgent:
    """Enumerates grids and weight sets and tests region membership."""

    def __init__(self, lie_core: Optional[LieCoreAgent] = None):
        self.name = "GridAgent"
        self.lie_core = lie_core or LieCoreAgent()

    # ------------------------------------------------------------------
    # Enumeration
    # ------------------------------------------------------------------

    def enumerate_grid(self, algebra, family, M: int) -> List[GridPoint]:
        algebra, family = AlgebraName(algebra), GridFamily(family)
        return [
            GridPoint(barycentric=tuple(int(v) for v in row), modulus=M, algebra=algebra, family=family)
            for row in self.grid_barycentric(algebra, family, M)
        ]

    def enumerate_weights(self, algebra, family, M: int) -> List[GridWeight]:
        algebra, family = AlgebraName(algebra), GridFamily(family)
        return [
            GridWeight(barycentric=tuple(int(v) for v in row), modulus=M, algebra=algebra, family=family)
            for row in self.weight_barycentric(algebra, family, M)
        ]

    def grid_barycentric(self, algebra, family, M: int) -> np.ndarray:
        """(n, 4) integer array of (u0, u1, u2, u3) in canonical order."""
        if M < 1:
            raise ValueError("M must be at least 1")
        return _point_grid(AlgebraName(algebra), GridFamily(family), int(M))

    def weight_barycentric(self, algebra, family, M: int) -> np.ndarray:
        """(n, 4) integer array of (t0, t1, t2, t3) in canonical order."""
        if M < 1:
            raise ValueError("M must be at least 1")
        return _weight_set(AlgebraName(algebra), GridFamily(family), int(M))

    def grid_numerators(self, algebra, family, M: int) -> np.ndarray:
        """Integer q with alpha-vee coordinates q / (2M) for every grid point."""
        u = self.grid_barycentric(algebra, family, M)[:, 1:]
        return u @ self.lie_core.arrays(algebra).cartan_inverse_2.T

    def grid_alphavee(self, algebra, family, M: int) -> np.ndarray:
        return self.grid_numerators(algebra, family, M) / (2.0 * M)

    def grid_orthonormal(self, algebra, family, M: int) -> np.ndarray:
        return self.lie_core.point_to_orthonormal(algebra, self.grid_alphavee(algebra, family, M))

    def weight_coords(self, algebra, family, M: int) -> np.ndarray:
        """(m, 3) omega-basis coordinates of the weight set."""
        return self.weight_barycentric(algebra, family, M)[:, 1:]

    # ------------------------------------------------------------------
    # Regions
    # ------------------------------------------------------------------

    def barycentric_coordinates(self, algebra, point_alphavee) -> np.ndarray:
        """(y0, y1, y2, y3) of a point; y_i = <alpha_i, x>, y0 = 1 - <xi, x>."""
        arrays = self.lie_core.arrays(algebra)
        y = np.asarray(point_alphavee, dtype=float) @ arrays.cartan.T
        y0 = 1.0 - y @ arrays.marks
        return np.concatenate([np.expand_dims(y0, -1), y], axis=-1)

    def dual_barycentric_coordinates(self, algebra, point_orthonormal) -> np.ndarray:
        """(z0, z1, z2, z3); z_i = <x, alpha-vee_i>, z0 = 1 - <x, eta>."""
        arrays = self.lie_core.arrays(algebra)
        z = np.asarray(point_orthonormal, dtype=float) @ arrays.coroots.T
        z0 = 1.0 - z @ arrays.dual_marks
        return np.concatenate([[z0], z])

    def domain_membership(self, algebra, region: Union[Region, str], point, tol: float = BOUNDARY_TOLERANCE) -> bool:
        """Membership of an orthonormal point in F, Fs, Fl, F-vee, Fs-vee or Fl-vee."""
        algebra, region = AlgebraName(algebra), Region(region)
        alg = self.lie_core.get_algebra(algebra)
        if region in (Region.F, Region.FS, Region.FL):
            coords = self.barycentric_coordinates(algebra, self.lie_core.orthonormal_to_point(algebra, point))
            strict = {Region.F: (), Region.FS: alg.short_set, Region.FL: (0,) + alg.long_set}[region]
        else:
            coords = self.dual_barycentric_coordinates(algebra, point)
            strict = {Region.FVEE: (), Region.FSVEE: (0,) + alg.short_set, Region.FLVEE: alg.long_set}[region]
        if np.any(coords < -tol):
            return False
        return all(coords[i] > tol for i in strict)

    def region_for(self, family: GridFamily, dual: bool = False) -> Region:
        family = GridFamily(family)
        if dual:
            return Region.FSVEE if family == GridFamily.SHORT else Region.FLVEE
        return Region.FS if family == GridFamily.SHORT else Region.FL

    # ------------------------------------------------------------------
    # Reduction into F
    # ------------------------------------------------------------------

    def reduce_to_domain(self, algebra, point) -> Tuple[np.ndarray, AffineWeylTransform]:
        """Fold an orthonormal point into F; returns the folded point and the transform used."""
        p = self.lie_core.orthonormal_to_point(algebra, point)
        reduced, transform = self.reduce_alphavee(algebra, p, tol=BOUNDARY_TOLERANCE)
        return self.lie_core.point_to_orthonormal(algebra, reduced.astype(float)), transform

    def reduce_alphavee(self, algebra, point, tol: float = 0.0, exact: bool = False) -> Tuple[np.ndarray, AffineWeylTransform]:
        """
        Alcove walk in alpha-vee coordinates: shift into [0,1)^3, then reflect
        through any wall of F the point lies beyond until none remains.
        With exact=True the walk runs on Fractions.
        """
        arrays = self.lie_core.arrays(algebra)
        if exact:
            p = np.array([Fraction(v) for v in point], dtype=object)
            cast = lambda matrix: matrix.astype(object)
        else:
            p = np.asarray(point, dtype=float).copy()
            cast = lambda matrix: matrix
        cartan = cast(arrays.cartan)
        identity = np.eye(3, dtype=np.int64)
        floor = np.array([math.floor(v) for v in p], dtype=np.int64)
        p = p - floor
        linear, shift = identity.copy(), -floor
        xi, xi_coroot = arrays.highest_root, arrays.highest_root_coroot
        affine_linear = identity - np.outer(xi_coroot, xi)
        xi_cast, xi_coroot_cast, affine_cast = cast(xi), cast(xi_coroot), cast(affine_linear)

        for step in range(MAX_REDUCTION_STEPS):
            y = cartan @ p
            below = [i for i in range(3) if y[i] < -tol]
            if below:
                reflection = identity.copy()
                reflection[below[0], :] -= arrays.cartan[below[0], :]
                p = cast(reflection) @ p
                linear, shift = reflection @ linear, reflection @ shift
                continue
            if xi_cast @ p > 1 + tol:
                p = affine_cast @ p + xi_coroot_cast
                linear, shift = affine_linear @ linear, affine_linear @ shift + xi_coroot
                continue
            return p, AffineWeylTransform(linear=linear, shift=shift, steps=step)
        raise ReductionError(f"no convergence after {MAX_REDUCTION_STEPS} reflections for {point}")

    def brute_force_grid(self, algebra, family, M: int) -> Set[Tuple[int, int, int, int]]:
        """All points of (1/M)P-vee/Q-vee folded into F and filtered by the family pattern."""
        algebra, family = AlgebraName(algebra), GridFamily(family)
        arrays = self.lie_core.arrays(algebra)
        strict = POINT_STRICT_INDICES[(algebra, family)]
        modulus = 2 * M
        seen: Set[Tuple[int, int, int]] = set()
        found: Set[Tuple[int, int, int, int]] = set()
        for n in itertools.product(range(modulus), repeat=3):
            key = tuple(int(v) for v in (arrays.cartan_inverse_2 @ np.array(n)) % modulus)
            if key in seen:
                continue
            seen.add(key)
            reduced, _ = self.reduce_alphavee(algebra, [Fraction(v, modulus) for v in key], exact=True)
            y = arrays.cartan.astype(object) @ reduced
            u = [M * v for v in y]
            if any(Fraction(v).denominator != 1 for v in u):
                raise ReductionError(f"folded point {reduced} left the grid lattice")
            u = [int(v) for v in u]
            bary = (M - int(np.dot(arrays.marks, u)),) + tuple(u)
            if all(bary[i] >= 1 for i in strict):
                found.add(bary)
        return found

    # ------------------------------------------------------------------
    # Sampling
    # ------------------------------------------------------------------

    def sample_domain(self, algebra, n: int, rng: np.random.Generator) -> np.ndarray:
        """Uniform samples of F in alpha-vee coordinates (Dirichlet barycentric weights)."""
        arrays = self.lie_core.arrays(algebra)
        bary = rng.dirichlet(np.ones(4), size=n)
        y = bary[:, 1:] / arrays.marks
        return y @ (arrays.cartan_inverse_2.T / 2.0)

    def boundary_point(self, algebra, family, rng: np.random.Generator) -> np.ndarray:
        """Random point of F on the wall set H^s or H^l, alpha-vee coordinates."""
        algebra, family = AlgebraName(algebra), GridFamily(family)
        return self.wall_point(algebra, POINT_STRICT_INDICES[(algebra, family)], rng)

    def wall_point(self, algebra, walls: Sequence[int], rng: np.random.Generator) -> np.ndarray:
        """Random point of F with one of the given barycentric coordinates set to zero."""
        arrays = self.lie_core.arrays(algebra)
        bary = rng.dirichlet(np.ones(4))
        bary[int(rng.choice(list(walls)))] = 0.0
        bary /= bary.sum()
        y = bary[1:] / arrays.marks
        return (arrays.cartan_inverse_2 @ y) / 2.0

    # ------------------------------------------------------------------
    # Export tables
    # ------------------------------------------------------------------

    def grid_table(self, algebra, family, M: int) -> Dict[str, object]:
        """Rows (u0..u3, x1..x3) with orthonormal coordinates."""
        bary = self.grid_barycentric(algebra, family, M)
        coords = self.grid_orthonormal(algebra, family, M)
        return {
            "columns": ["u0", "u1", "u2", "u3", "x1", "x2", "x3"],
            "rows": [list(map(int, b)) + list(map(float, x)) for b, x in zip(bary, coords.reshape(-1, 3))],
        }

    def weight_table(self, algebra, family, M: int) -> Dict[str, object]:
        """Rows (t0..t3, l1..l3) with orthonormal weight coordinates."""
        bary = self.weight_barycentric(algebra, family, M)
        coords = self.lie_core.weight_to_orthonormal(algebra, bary[:, 1:])
        return {
            "columns": ["t0", "t1", "t2", "t3", "l1", "l2", "l3"],
            "rows": [list(map(int, b)) + list(map(float, x)) for b, x in zip(bary, coords.reshape(-1, 3))],
        }
