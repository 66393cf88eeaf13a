"""
Root System Library

Static data for the rank-3 root systems B3 and C3: orthonormal simple roots,
Coxeter matrices, marks, normalisation constants, the stabilizer tables used
as fixtures and the explicit 24-term sine/cosine expansions of the Ss and Sl
orbit functions.
"""

import math
from functools import lru_cache
from dataclasses import dataclass
from typing import Dict, List, Tuple

from data_models import AlgebraName, GridFamily, OrbitFamily

Triple = Tuple[int, int, int]
ExpansionTerm = Tuple[Triple, Triple, Triple]


@dataclass(frozen=True)
class RootSystemData:
    """Defining data of one root system; everything else is derived from it."""
    simple_roots: Tuple[Tuple[float, float, float], ...]
    coxeter_matrix: Tuple[Triple, ...]
    marks: Triple
    dual_marks: Triple
    short_set: Tuple[int, ...]
    long_set: Tuple[int, ...]
    K_const: float
    k_const: int


# Barycentric linear forms u0 + sum(coeff_i * u_i) = M of the point grids and
# t0 + sum(coeff_i * t_i) = M of the weight sets.
POINT_GRID_COEFFICIENTS: Dict[AlgebraName, Triple] = {
    AlgebraName.B3: (1, 2, 2),
    AlgebraName.C3: (2, 2, 1),
}

WEIGHT_SET_COEFFICIENTS: Dict[AlgebraName, Triple] = {
    AlgebraName.B3: (2, 2, 1),
    AlgebraName.C3: (1, 2, 2),
}

# Barycentric indices (0..3) that must be strictly positive.
POINT_STRICT_INDICES: Dict[Tuple[AlgebraName, GridFamily], Tuple[int, ...]] = {
    (AlgebraName.B3, GridFamily.SHORT): (3,),
    (AlgebraName.B3, GridFamily.LONG): (0, 1, 2),
    (AlgebraName.C3, GridFamily.SHORT): (1, 2),
    (AlgebraName.C3, GridFamily.LONG): (0, 3),
}

WEIGHT_STRICT_INDICES: Dict[Tuple[AlgebraName, GridFamily], Tuple[int, ...]] = {
    (AlgebraName.B3, GridFamily.SHORT): (0, 3),
    (AlgebraName.B3, GridFamily.LONG): (1, 2),
    (AlgebraName.C3, GridFamily.SHORT): (0, 1, 2),
    (AlgebraName.C3, GridFamily.LONG): (3,),
}

# Printed forms of expansion terms that disagree with the Weyl orbit.
# Keyed by (algebra, 1-based term index); the library stores the corrected form.
PRINTED_ERRATA: Dict[Tuple[AlgebraName, int], ExpansionTerm] = {
    (AlgebraName.B3, 10): ((0, -1, 0), (-1, 0, 0), (-2, -2, -1)),
    (AlgebraName.C3, 10): ((0, -1, 0), (-1, 0, 0), (-1, -1, -1)),
    (AlgebraName.C3, 21): ((0, 1, 2), (-1, -2, -1), (1, 1, 1)),
}

SINE_SIGNS = (1, 1, 1, -1, 1, -1, 1, -1, -1, 1, -1, -1,
              -1, -1, -1, 1, -1, -1, -1, 1, -1, -1, 1, 1)
COSINE_SIGNS = (1, -1, -1, 1, 1, -1, 1, -1, -1, -1, 1, 1,
                1, 1, 1, -1, -1, -1, -1, 1, -1, -1, 1, 1)


def grid_count(algebra: AlgebraName, family: GridFamily, M: int) -> int:
    """Closed-form cardinality of F_M and Lambda_M."""
    k, odd = divmod(M, 2)
    large = (algebra, family) in ((AlgebraName.B3, GridFamily.SHORT), (AlgebraName.C3, GridFamily.LONG))
    if large:
        return k * (k + 1) * (k + 2) // 3 if odd else k * (k + 1) * (2 * k + 1) // 6
    return (k + 1) * k * (k - 1) // 3 if odd else k * (k - 1) * (2 * k - 1) // 6


class RootSystemLibrary:
    """
    Library of root-system data, stabilizer tables and explicit expansions
    for B3 and C3.
    """

    def __init__(self):
        self.root_systems = self._initialize_root_systems()
        self.expansions = self._initialize_expansions()
        self.expansion_signs = self._initialize_expansion_signs()
        self.stabilizer_table = self._initialize_stabilizer_table()
        self.orbit_size_tables = self._initialize_orbit_size_tables()
        self.dual_stabilizer_tables = self._initialize_dual_stabilizer_tables()

    def get_root_system(self, algebra: AlgebraName) -> RootSystemData:
        return self.root_systems[AlgebraName(algebra)]

    def get_expansion(self, algebra: AlgebraName, family: OrbitFamily) -> Tuple[List[ExpansionTerm], Tuple[int, ...], bool]:
        """Return (terms, signs, is_sine) for an Ss/Sl expansion."""
        key = (AlgebraName(algebra), OrbitFamily(family))
        if key not in self.expansion_signs:
            raise KeyError(f"No explicit expansion for {key[0].value} {key[1].value}")
        signs, is_sine = self.expansion_signs[key]
        return list(self.expansions[key[0]]), signs, is_sine

    def _initialize_root_systems(self) -> Dict[AlgebraName, RootSystemData]:
        """Orthonormal simple roots and Coxeter data."""
        r2 = math.sqrt(2.0)
        coxeter = ((1, 3, 2), (3, 1, 4), (2, 4, 1))
        return {
            AlgebraName.B3: RootSystemData(
                simple_roots=((1.0, -1.0, 0.0), (0.0, 1.0, -1.0), (0.0, 0.0, 1.0)),
                coxeter_matrix=coxeter,
                marks=(1, 2, 2),
                dual_marks=(2, 2, 1),
                short_set=(3,),
                long_set=(1, 2),
                K_const=2.0,
                k_const=96,
            ),
            AlgebraName.C3: RootSystemData(
                simple_roots=((1 / r2, -1 / r2, 0.0), (0.0, 1 / r2, -1 / r2), (0.0, 0.0, r2)),
                coxeter_matrix=coxeter,
                marks=(2, 2, 1),
                dual_marks=(1, 2, 2),
                short_set=(1, 2),
                long_set=(3,),
                K_const=2.0 * r2,
                k_const=96,
            ),
        }

    def _initialize_expansions(self) -> Dict[AlgebraName, Tuple[ExpansionTerm, ...]]:
        """
        The 24 orbit representatives of the explicit expansions. Each term lists
        the coefficients of x, y and z as integer combinations of (a, b, c).
        """
        return {
            AlgebraName.B3: (
                ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
                ((-1, 0, 0), (1, 1, 0), (0, 0, 1)),
                ((1, 1, 0), (0, -1, 0), (0, 2, 1)),
                ((1, 0, 0), (0, 1, 1), (0, 0, -1)),
                ((0, 1, 0), (-1, -1, 0), (2, 2, 1)),
                ((-1, 0, 0), (1, 1, 1), (0, 0, -1)),
                ((-1, -1, 0), (1, 0, 0), (0, 2, 1)),
                ((1, 1, 0), (0, 1, 1), (0, -2, -1)),
                ((1, 1, 1), (0, -1, -1), (0, 2, 1)),
                ((0, -1, 0), (-1, 0, 0), (2, 2, 1)),
                ((0, 1, 0), (1, 1, 1), (-2, -2, -1)),
                ((0, 1, 1), (-1, -1, -1), (2, 2, 1)),
                ((-1, -1, 0), (1, 2, 1), (0, -2, -1)),
                ((1, 2, 1), (0, -1, -1), (0, 0, 1)),
                ((-1, -1, -1), (1, 0, 0), (0, 2, 1)),
                ((1, 1, 1), (0, 1, 0), (0, -2, -1)),
                ((0, -1, 0), (1, 2, 1), (-2, -2, -1)),
                ((1, 2, 1), (-1, -1, -1), (0, 0, 1)),
                ((0, -1, -1), (-1, 0, 0), (2, 2, 1)),
                ((0, 1, 1), (1, 1, 0), (-2, -2, -1)),
                ((0, 1, 1), (-1, -2, -1), (2, 2, 1)),
                ((-1, -2, -1), (1, 1, 0), (0, 0, 1)),
                ((1, 2, 1), (0, -1, 0), (0, 0, -1)),
                ((-1, -1, -1), (1, 2, 1), (0, -2, -1)),
            ),
            AlgebraName.C3: (
                ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
                ((-1, 0, 0), (1, 1, 0), (0, 0, 1)),
                ((1, 1, 0), (0, -1, 0), (0, 1, 1)),
                ((1, 0, 0), (0, 1, 2), (0, 0, -1)),
                ((0, 1, 0), (-1, -1, 0), (1, 1, 1)),
                ((-1, 0, 0), (1, 1, 2), (0, 0, -1)),
                ((-1, -1, 0), (1, 0, 0), (0, 1, 1)),
                ((1, 1, 0), (0, 1, 2), (0, -1, -1)),
                ((1, 1, 2), (0, -1, -2), (0, 1, 1)),
                ((0, -1, 0), (-1, 0, 0), (1, 1, 1)),
                ((0, 1, 0), (1, 1, 2), (-1, -1, -1)),
                ((0, 1, 2), (-1, -1, -2), (1, 1, 1)),
                ((-1, -1, 0), (1, 2, 2), (0, -1, -1)),
                ((1, 2, 2), (0, -1, -2), (0, 0, 1)),
                ((-1, -1, -2), (1, 0, 0), (0, 1, 1)),
                ((1, 1, 2), (0, 1, 0), (0, -1, -1)),
                ((0, -1, 0), (1, 2, 2), (-1, -1, -1)),
                ((1, 2, 2), (-1, -1, -2), (0, 0, 1)),
                ((0, -1, -2), (-1, 0, 0), (1, 1, 1)),
                ((0, 1, 2), (1, 1, 0), (-1, -1, -1)),
                ((0, 1, 2), (-1, -2, -2), (1, 1, 1)),
                ((-1, -2, -2), (1, 1, 0), (0, 0, 1)),
                ((1, 2, 2), (0, -1, 0), (0, 0, -1)),
                ((-1, -1, -2), (1, 2, 2), (0, -1, -1)),
            ),
        }

    def _initialize_expansion_signs(self) -> Dict[Tuple[AlgebraName, OrbitFamily], Tuple[Tuple[int, ...], bool]]:
        """Sign pattern and sine/cosine kind per (algebra, family)."""
        return {
            (AlgebraName.B3, OrbitFamily.SS): (SINE_SIGNS, True),
            (AlgebraName.B3, OrbitFamily.SL): (COSINE_SIGNS, False),
            (AlgebraName.C3, OrbitFamily.SS): (COSINE_SIGNS, False),
            (AlgebraName.C3, OrbitFamily.SL): (SINE_SIGNS, True),
        }

    def _initialize_stabilizer_table(self) -> Dict[str, int]:
        """Orders of Stab_W(lambda) by zero pattern of (a, b, c); same for B3 and C3."""
        return {
            "+++": 1, "++0": 2, "+0+": 2, "0++": 2,
            "+00": 8, "0+0": 4, "00+": 6, "000": 48,
        }

    def _initialize_orbit_size_tables(self) -> Dict[Tuple[AlgebraName, GridFamily], Dict[str, int]]:
        """epsilon(x) by zero pattern of (u0, u1, u2, u3)."""
        return {
            (AlgebraName.B3, GridFamily.SHORT): {
                "++++": 48, "0+++": 24, "+0++": 24, "++0+": 24,
                "00++": 12, "+00+": 8, "0+0+": 8, "000+": 2,
            },
            (AlgebraName.B3, GridFamily.LONG): {"++++": 48, "+++0": 24},
            (AlgebraName.C3, GridFamily.SHORT): {"++++": 48, "0+++": 24, "+++0": 24, "0++0": 12},
            (AlgebraName.C3, GridFamily.LONG): {"++++": 48, "+0++": 24, "++0+": 24, "+00+": 8},
        }

    def _initialize_dual_stabilizer_tables(self) -> Dict[Tuple[AlgebraName, GridFamily], Dict[str, int]]:
        """h_lambda by zero pattern of (t0, t1, t2, t3)."""
        return {
            (AlgebraName.B3, GridFamily.SHORT): {"++++": 1, "+0++": 2, "++0+": 2, "+00+": 6},
            (AlgebraName.B3, GridFamily.LONG): {"++++": 1, "0+++": 2, "+++0": 2, "0++0": 4},
            (AlgebraName.C3, GridFamily.SHORT): {"++++": 1, "+++0": 2},
            (AlgebraName.C3, GridFamily.LONG): {
                "++++": 1, "0+++": 2, "+0++": 2, "++0+": 2,
                "00++": 4, "+00+": 6, "0+0+": 6, "000+": 24,
            },
        }


def zero_pattern(coords) -> str:
    """'+' for a nonzero coordinate, '0' for a zero one."""
    return "".join("0" if c == 0 else "+" for c in coords)


@lru_cache(maxsize=None)
def default_library() -> RootSystemLibrary:
    """Shared library instance."""
    return RootSystemLibrary()
