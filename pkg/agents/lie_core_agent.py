"""
Lie Core Agent - exact root-system data, Weyl group generation, sign
homomorphisms and orbit/stabilizer coefficients for B3 and C3.
"""

import logging
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from data_models import (
    Algebra, AlgebraName, GroupClosureError, SignHomomorphism, TorusPoint, Weight, WeylElement
)
from lie_library import RootSystemLibrary, default_library

logger = logging.getLogger(__name__)

WEYL_ORDER = 48
HOMOMORPHISM_ORDER = (SignHomomorphism.ONE, SignHomomorphism.E, SignHomomorphism.S, SignHomomorphism.L)


@dataclass(frozen=True)
class GroupTables:
    """Dense arrays of one Weyl group, in canonical element order."""
    elements: Tuple[WeylElement, ...]
    omega: np.ndarray        # (48, 3, 3) action on weights
    alphavee: np.ndarray     # (48, 3, 3) action on points
    signs: Dict[SignHomomorphism, np.ndarray]  # (48,) per homomorphism


@dataclass(frozen=True)
class AlgebraArrays:
    """Numpy views of the algebra data used in the numeric kernels."""
    cartan: np.ndarray
    cartan_inverse_2: np.ndarray       # 2 C^-1, integer
    cartan_transpose_adj: np.ndarray   # 2 (C^T)^-1, integer
    roots: np.ndarray
    coroots: np.ndarray
    weights: np.ndarray
    coroots_inverse: np.ndarray
    highest_root: np.ndarray
    highest_root_coroot: np.ndarray
    dual_highest_root: np.ndarray
    dual_highest_root_coroot: np.ndarray
    marks: np.ndarray
    dual_marks: np.ndarray


def _round_int(matrix: np.ndarray) -> np.ndarray:
    rounded = np.rint(matrix)
    if not np.allclose(matrix, rounded, atol=1e-9):
        raise ValueError(f"expected an integer matrix, got {matrix}")
    return rounded.astype(np.int64)


class LieCoreAgent:
    """Builds B3/C3 data and answers group-theoretic questions exactly."""

    def __init__(self, library: RootSystemLibrary = None):
        self.name = "LieCoreAgent"
        self.library = library or default_library()
        self._algebras: Dict[AlgebraName, Algebra] = {}
        self._arrays: Dict[AlgebraName, AlgebraArrays] = {}
        self._groups: Dict[AlgebraName, GroupTables] = {}
        for name in AlgebraName:
            algebra = self.build_algebra(name)
            self._algebras[name] = algebra
            self._arrays[name] = self._make_arrays(algebra)
            elements = self.generate_weyl_group(algebra)
            self._groups[name] = self._make_group_tables(elements)

    # ------------------------------------------------------------------
    # Algebra data
    # ------------------------------------------------------------------

    def build_algebra(self, name: Union[AlgebraName, str]) -> Algebra:
        """Derive coroots, weights, coweights and matrices from the simple roots."""
        name = AlgebraName(name)
        data = self.library.get_root_system(name)
        roots = np.array(data.simple_roots, dtype=float)
        coroots = 2.0 * roots / np.sum(roots ** 2, axis=1)[:, None]
        cartan = _round_int(roots @ coroots.T)
        weights = np.linalg.inv(coroots).T
        coweights = np.linalg.inv(roots).T

        marks = np.array(data.marks)
        dual_marks = np.array(data.dual_marks)
        xi_omega = marks @ cartan
        xi = marks @ roots
        xi_coroot = _round_int((2.0 * xi / (xi @ xi)) @ np.linalg.inv(coroots))
        eta = dual_marks @ coroots
        eta_coroot = _round_int((2.0 * eta / (eta @ eta)) @ np.linalg.inv(weights))

        return Algebra(
            name=name,
            simple_roots=roots.tolist(),
            coroots=coroots.tolist(),
            weights=weights.tolist(),
            coweights=coweights.tolist(),
            cartan_matrix=cartan.tolist(),
            coxeter_matrix=[list(row) for row in data.coxeter_matrix],
            marks=data.marks,
            dual_marks=data.dual_marks,
            short_set=data.short_set,
            long_set=data.long_set,
            K_const=data.K_const,
            k_const=data.k_const,
            highest_root=tuple(int(v) for v in xi_omega),
            highest_root_coroot=tuple(int(v) for v in xi_coroot),
            dual_highest_root=data.dual_marks,
            dual_highest_root_coroot=tuple(int(v) for v in eta_coroot),
        )

    def get_algebra(self, name: Union[AlgebraName, str]) -> Algebra:
        return self._algebras[AlgebraName(name)]

    def arrays(self, name: Union[AlgebraName, str]) -> AlgebraArrays:
        return self._arrays[AlgebraName(name)]

    def group(self, name: Union[AlgebraName, str]) -> GroupTables:
        return self._groups[AlgebraName(name)]

    def _make_arrays(self, algebra: Algebra) -> AlgebraArrays:
        cartan = np.array(algebra.cartan_matrix, dtype=np.int64)
        coroots = np.array(algebra.coroots)
        return AlgebraArrays(
            cartan=cartan,
            cartan_inverse_2=_round_int(2.0 * np.linalg.inv(cartan)),
            cartan_transpose_adj=_round_int(2.0 * np.linalg.inv(cartan.T)),
            roots=np.array(algebra.simple_roots),
            coroots=coroots,
            weights=np.array(algebra.weights),
            coroots_inverse=np.linalg.inv(coroots),
            highest_root=np.array(algebra.highest_root, dtype=np.int64),
            highest_root_coroot=np.array(algebra.highest_root_coroot, dtype=np.int64),
            dual_highest_root=np.array(algebra.dual_highest_root, dtype=np.int64),
            dual_highest_root_coroot=np.array(algebra.dual_highest_root_coroot, dtype=np.int64),
            marks=np.array(algebra.marks, dtype=np.int64),
            dual_marks=np.array(algebra.dual_marks, dtype=np.int64),
        )

    # ------------------------------------------------------------------
    # Coordinate changes
    # ------------------------------------------------------------------

    def point_to_orthonormal(self, name, points) -> np.ndarray:
        """alpha-vee coordinates -> orthonormal coordinates (rows are points)."""
        return np.asarray(points, dtype=float) @ self.arrays(name).coroots

    def orthonormal_to_point(self, name, points) -> np.ndarray:
        return np.asarray(points, dtype=float) @ self.arrays(name).coroots_inverse

    def weight_to_orthonormal(self, name, weights) -> np.ndarray:
        return np.asarray(weights, dtype=float) @ self.arrays(name).weights

    def weight_norms(self, name, weights) -> np.ndarray:
        """Euclidean lengths of weights given in the omega basis."""
        return np.linalg.norm(self.weight_to_orthonormal(name, weights), axis=-1)

    # ------------------------------------------------------------------
    # Weyl group
    # ------------------------------------------------------------------

    def generate_weyl_group(self, algebra: Algebra) -> List[WeylElement]:
        """Close the simple reflections under left multiplication, breadth first."""
        cartan = np.array(algebra.cartan_matrix, dtype=np.int64)
        identity = np.eye(3, dtype=np.int64)
        generators = []
        for i in range(3):
            reflection = identity.copy()
            reflection[:, i] -= cartan[i, :]
            generators.append((str(i + 1), reflection, self._generator_signs(algebra, i + 1)))

        start = (identity, identity, "", np.ones(4, dtype=np.int64))
        seen = {identity.tobytes()}
        found = [start]
        queue = deque([start])
        while queue:
            omega, alphavee, word, signs = queue.popleft()
            for label, reflection, gen_signs in generators:
                new_omega = reflection @ omega
                key = new_omega.tobytes()
                if key in seen:
                    continue
                seen.add(key)
                item = (new_omega, reflection.T @ alphavee, label + word, gen_signs * signs)
                found.append(item)
                queue.append(item)
                if len(found) > WEYL_ORDER:
                    raise GroupClosureError(f"{algebra.name.value}: group exceeds {WEYL_ORDER} elements")

        if len(found) != WEYL_ORDER:
            raise GroupClosureError(f"{algebra.name.value}: closure stopped at {len(found)} elements")

        logger.debug("Generated W(%s) with %d elements", algebra.name.value, len(found))
        return [
            WeylElement(
                index=index,
                word=word,
                matrix_omega=tuple(tuple(int(v) for v in row) for row in omega),
                matrix_alphavee=tuple(tuple(int(v) for v in row) for row in alphavee),
                signs=tuple(int(s) for s in signs),
            )
            for index, (omega, alphavee, word, signs) in enumerate(found)
        ]

    def _generator_signs(self, algebra: Algebra, i: int) -> np.ndarray:
        """Values of (one, e, s, l) on the simple reflection r_i."""
        return np.array([
            1,
            -1,
            -1 if i in algebra.short_set else 1,
            -1 if i in algebra.long_set else 1,
        ], dtype=np.int64)

    def _make_group_tables(self, elements: List[WeylElement]) -> GroupTables:
        signs = np.array([e.signs for e in elements], dtype=np.int64)
        return GroupTables(
            elements=tuple(elements),
            omega=np.array([e.matrix_omega for e in elements], dtype=np.int64),
            alphavee=np.array([e.matrix_alphavee for e in elements], dtype=np.int64),
            signs={hom: signs[:, k] for k, hom in enumerate(HOMOMORPHISM_ORDER)},
        )

    def sign_value(self, hom: Union[SignHomomorphism, str], w: WeylElement) -> int:
        return w.sign(SignHomomorphism(hom))

    def multiply(self, name, w1: WeylElement, w2: WeylElement) -> WeylElement:
        """Return the element w1 w2 from the canonical list."""
        product = np.array(w1.matrix_omega) @ np.array(w2.matrix_omega)
        tables = self.group(name)
        matches = np.all(tables.omega == product, axis=(1, 2))
        if not matches.any():
            raise GroupClosureError("product left the generated group")
        return tables.elements[int(np.argmax(matches))]

    def admissibility_check(self, hom_generator_values: Sequence[int],
                            algebra: Union[AlgebraName, str] = AlgebraName.B3) -> bool:
        """True iff the +-1 assignment respects every Coxeter relation."""
        coxeter = self.get_algebra(algebra).coxeter_matrix
        values = list(hom_generator_values)
        if len(values) != 3 or any(v not in (1, -1) for v in values):
            return False
        return all(
            (values[i] * values[j]) ** coxeter[i][j] == 1
            for i in range(3) for j in range(3)
        )

    # ------------------------------------------------------------------
    # Stabilizers and orbits
    # ------------------------------------------------------------------

    def stabilizer_order_d(self, name, weight: Union[Weight, Sequence[int]]) -> int:
        """|Stab_W(lambda)| by exact integer comparison."""
        lam = np.asarray(weight.coords if isinstance(weight, Weight) else weight, dtype=np.int64)
        images = self.group(name).omega @ lam
        return int(np.all(images == lam, axis=1).sum())

    def torus_stabilizer_order(self, name, point: TorusPoint) -> int:
        """|{w : wx = x mod Q-vee}|."""
        denominator = point.denominator
        numerators = np.array([int(c * denominator) for c in point.coords], dtype=np.int64)
        return int(self.torus_stabilizer_orders(name, numerators[None, :], denominator)[0])

    def torus_stabilizer_orders(self, name, numerators: np.ndarray, denominator: int) -> np.ndarray:
        """Vectorised stabilizer orders of points numerators / denominator."""
        numerators = np.asarray(numerators, dtype=np.int64)
        images = np.einsum("wij,nj->wni", self.group(name).alphavee, numerators)
        fixed = np.all((images - numerators[None, :, :]) % denominator == 0, axis=2)
        return fixed.sum(axis=0)

    def orbit_size_eps(self, name, point: TorusPoint) -> int:
        """epsilon(x) = |Wx| on the torus, by collecting the orbit itself."""
        coords = np.array(point.coords, dtype=object)
        orbit = {
            tuple(Fraction(v) % 1 for v in matrix.astype(object) @ coords)
            for matrix in self.group(name).alphavee
        }
        return len(orbit)

    def stabilizer_order_h(self, name, weight: Union[Weight, Sequence[int]], M: int) -> int:
        """|{w : w lambda = lambda mod MQ}|."""
        lam = np.asarray(weight.coords if isinstance(weight, Weight) else weight, dtype=np.int64)
        return int(self.dual_stabilizer_orders(name, lam[None, :], M)[0])

    def dual_stabilizer_orders(self, name, weights: np.ndarray, M: int) -> np.ndarray:
        """Vectorised h-vee over rows of weights."""
        weights = np.asarray(weights, dtype=np.int64)
        images = np.einsum("wij,nj->wni", self.group(name).omega, weights)
        # lambda - mu in MQ  <=>  2 (C^T)^-1 (lambda - mu) in 2M Z^3
        root_coords = np.einsum("ij,wnj->wni", self.arrays(name).cartan_transpose_adj, images - weights[None, :, :])
        fixed = np.all(root_coords % (2 * M) == 0, axis=2)
        return fixed.sum(axis=0)

    # ------------------------------------------------------------------
    # Affine reflections
    # ------------------------------------------------------------------

    def affine_reflection(self, name, point):
        """r0: x -> x - (<xi, x> - 1) xi-vee, alpha-vee coordinates."""
        arrays = self.arrays(name)
        p = np.asarray(point)
        return p - (arrays.highest_root @ p - 1) * arrays.highest_root_coroot

    def dual_affine_reflection(self, name, weight, M: int = 1):
        """r0-vee on weights scaled by M: lambda -> lambda - (<lambda, eta> - M) eta-vee."""
        arrays = self.arrays(name)
        lam = np.asarray(weight)
        return lam - (arrays.dual_highest_root @ lam - M) * arrays.dual_highest_root_coroot
