"""
Data models for the orbit-function transform toolkit.
"""

import math
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class OrbitError(Exception):
    """Base class for toolkit errors."""


class ContractViolation(OrbitError):
    """An operation was called with inputs outside its contract."""


class GroupClosureError(OrbitError):
    """Weyl group generation did not close at the expected order."""


class ReductionError(OrbitError):
    """Reduction of a point to the fundamental domain did not converge."""


class FieldDataError(OrbitError):
    """A field or point file could not be parsed or does not match its grid."""


class AlgebraName(str, Enum):
    B3 = "B3"
    C3 = "C3"


class OrbitFamily(str, Enum):
    C = "C"
    S = "S"
    SS = "Ss"
    SL = "Sl"


class GridFamily(str, Enum):
    SHORT = "s"
    LONG = "l"


class Region(str, Enum):
    F = "F"
    FS = "Fs"
    FL = "Fl"
    FVEE = "Fvee"
    FSVEE = "Fsvee"
    FLVEE = "Flvee"


class SignHomomorphism(str, Enum):
    ONE = "one"
    E = "e"
    S = "s"
    L = "l"


class IntegrationMethod(str, Enum):
    MONTE_CARLO = "monte_carlo"
    QUADRATURE = "quadrature"


class ErrorMethod(str, Enum):
    SPECTRAL = "spectral"
    MONTE_CARLO = "monte_carlo"


class SliceComponent(str, Enum):
    REAL = "real"
    IMAG = "imag"
    MODULUS = "modulus"


FAMILY_HOMOMORPHISM = {
    OrbitFamily.C: SignHomomorphism.ONE,
    OrbitFamily.S: SignHomomorphism.E,
    OrbitFamily.SS: SignHomomorphism.S,
    OrbitFamily.SL: SignHomomorphism.L,
}

GRID_TO_ORBIT_FAMILY = {
    GridFamily.SHORT: OrbitFamily.SS,
    GridFamily.LONG: OrbitFamily.SL,
}


class Algebra(BaseModel):
    """Static data of B3 or C3, coordinates with respect to the orthonormal basis."""
    model_config = ConfigDict(frozen=True)

    name: AlgebraName
    simple_roots: List[List[float]]
    coroots: List[List[float]]
    weights: List[List[float]]
    coweights: List[List[float]]
    cartan_matrix: List[List[int]]
    coxeter_matrix: List[List[int]]
    marks: Tuple[int, int, int]
    dual_marks: Tuple[int, int, int]
    short_set: Tuple[int, ...]
    long_set: Tuple[int, ...]
    K_const: float
    k_const: int
    highest_root: Tuple[int, int, int] = Field(description="xi in the omega basis")
    highest_root_coroot: Tuple[int, int, int] = Field(description="2 xi / <xi, xi> in the alpha-vee basis")
    dual_highest_root: Tuple[int, int, int] = Field(description="eta in the alpha-vee basis")
    dual_highest_root_coroot: Tuple[int, int, int] = Field(description="2 eta / <eta, eta> in the omega basis")

    @property
    def fundamental_volume(self) -> float:
        """Lebesgue volume of F, K / |W|."""
        return self.K_const / 48.0


class Weight(BaseModel):
    """Integer weight in the omega basis."""
    model_config = ConfigDict(frozen=True)

    coords: Tuple[int, int, int]

    @property
    def is_dominant(self) -> bool:
        return all(c >= 0 for c in self.coords)

    @property
    def is_strictly_dominant(self) -> bool:
        return all(c >= 1 for c in self.coords)

    def as_array(self) -> np.ndarray:
        return np.array(self.coords, dtype=np.int64)


class TorusPoint(BaseModel):
    """Point of R^3/Q-vee with exact coordinates in the alpha-vee basis, reduced mod 1."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    coords: Tuple[Fraction, Fraction, Fraction]
    modulus: int = Field(default=1, ge=1)

    @field_validator("coords", mode="before")
    @classmethod
    def _reduce_mod_one(cls, value: Any) -> Tuple[Fraction, Fraction, Fraction]:
        values = tuple(Fraction(v) % 1 for v in value)
        if len(values) != 3:
            raise ValueError("torus points have three coordinates")
        return values

    @property
    def denominator(self) -> int:
        return math.lcm(*(c.denominator for c in self.coords))


class WeylElement(BaseModel):
    """One element of W, acting on weights and on points."""
    model_config = ConfigDict(frozen=True)

    index: int
    word: str = Field(description="reduced-by-construction generator word, e.g. '213'")
    matrix_omega: Tuple[Tuple[int, int, int], Tuple[int, int, int], Tuple[int, int, int]]
    matrix_alphavee: Tuple[Tuple[int, int, int], Tuple[int, int, int], Tuple[int, int, int]]
    signs: Tuple[int, int, int, int] = Field(description="values of (one, e, s, l)")

    def sign(self, hom: SignHomomorphism) -> int:
        order = [SignHomomorphism.ONE, SignHomomorphism.E, SignHomomorphism.S, SignHomomorphism.L]
        return self.signs[order.index(SignHomomorphism(hom))]


class GridPoint(BaseModel):
    """Point of F_M^s or F_M^l given by its barycentric integers."""
    model_config = ConfigDict(frozen=True)

    barycentric: Tuple[int, int, int, int]
    modulus: int = Field(ge=1)
    algebra: AlgebraName
    family: GridFamily

    @model_validator(mode="after")
    def _check_constraint(self) -> "GridPoint":
        from lie_library import POINT_GRID_COEFFICIENTS, POINT_STRICT_INDICES
        coeffs = POINT_GRID_COEFFICIENTS[self.algebra]
        u = self.barycentric
        if any(v < 0 for v in u):
            raise ValueError("barycentric coordinates must be nonnegative")
        if u[0] + sum(c * v for c, v in zip(coeffs, u[1:])) != self.modulus:
            raise ValueError(f"{u} does not satisfy the grid constraint for M={self.modulus}")
        if any(u[i] < 1 for i in POINT_STRICT_INDICES[(self.algebra, self.family)]):
            raise ValueError(f"{u} violates the positivity pattern of family {self.family.value}")
        return self


class GridWeight(BaseModel):
    """Weight of Lambda_M^s or Lambda_M^l given by its barycentric integers."""
    model_config = ConfigDict(frozen=True)

    barycentric: Tuple[int, int, int, int]
    modulus: int = Field(ge=1)
    algebra: AlgebraName
    family: GridFamily

    @model_validator(mode="after")
    def _check_constraint(self) -> "GridWeight":
        from lie_library import WEIGHT_SET_COEFFICIENTS, WEIGHT_STRICT_INDICES
        coeffs = WEIGHT_SET_COEFFICIENTS[self.algebra]
        t = self.barycentric
        if any(v < 0 for v in t):
            raise ValueError("barycentric coordinates must be nonnegative")
        if t[0] + sum(c * v for c, v in zip(coeffs, t[1:])) != self.modulus:
            raise ValueError(f"{t} does not satisfy the weight constraint for M={self.modulus}")
        if any(t[i] < 1 for i in WEIGHT_STRICT_INDICES[(self.algebra, self.family)]):
            raise ValueError(f"{t} violates the positivity pattern of family {self.family.value}")
        return self

    @property
    def weight(self) -> Weight:
        return Weight(coords=self.barycentric[1:])


class OrbitFunctionSpec(BaseModel):
    """Selects one orbit function: algebra, family and a weight in the family's cone."""
    model_config = ConfigDict(frozen=True)

    algebra: AlgebraName
    family: OrbitFamily
    weight: Weight

    @model_validator(mode="after")
    def _check_cone(self) -> "OrbitFunctionSpec":
        from lie_library import default_library
        coords = self.weight.coords
        if not self.weight.is_dominant:
            raise ValueError(f"weight {coords} is not dominant")
        if self.family == OrbitFamily.S:
            strict = (1, 2, 3)
        elif self.family == OrbitFamily.SS:
            strict = default_library().get_root_system(self.algebra).short_set
        elif self.family == OrbitFamily.SL:
            strict = default_library().get_root_system(self.algebra).long_set
        else:
            strict = ()
        if any(coords[i - 1] < 1 for i in strict):
            raise ValueError(
                f"weight {coords} lies outside the {self.family.value} cone of {self.algebra.value}"
            )
        return self

    @property
    def homomorphism(self) -> SignHomomorphism:
        return FAMILY_HOMOMORPHISM[self.family]


class _ComplexArrayModel(BaseModel):
    """Complex vector stored as [re, im] pairs."""
    algebra: AlgebraName
    family: GridFamily
    M: int = Field(ge=1)
    index_order: str = "lex"
    data: List[Tuple[float, float]] = Field(default_factory=list)

    @field_validator("data")
    @classmethod
    def _finite(cls, value: List[Tuple[float, float]]) -> List[Tuple[float, float]]:
        if not all(math.isfinite(re) and math.isfinite(im) for re, im in value):
            raise ValueError("values must be finite")
        return value

    def to_array(self) -> np.ndarray:
        if not self.data:
            return np.zeros(0, dtype=complex)
        pairs = np.asarray(self.data, dtype=float)
        return pairs[:, 0] + 1j * pairs[:, 1]

    @staticmethod
    def pairs_from_array(values) -> List[Tuple[float, float]]:
        values = np.asarray(values, dtype=complex)
        return [(float(v.real), float(v.imag)) for v in values]


class SampledField(_ComplexArrayModel):
    """Samples of a function on F_M^s or F_M^l in canonical grid order."""
    kind: str = "sampled"

    @classmethod
    def from_values(cls, algebra, family, M: int, values) -> "SampledField":
        return cls(algebra=algebra, family=family, M=M, data=cls.pairs_from_array(values))


class SpectralField(_ComplexArrayModel):
    """Expansion coefficients c_lambda in canonical weight-set order."""
    kind: str = "spectral"

    @classmethod
    def from_values(cls, algebra, family, M: int, values) -> "SpectralField":
        return cls(algebra=algebra, family=family, M=M, data=cls.pairs_from_array(values))


class BumpSpec(BaseModel):
    """Smooth characteristic function of a ball, radii alpha < beta."""
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(gt=0)
    beta: float = Field(gt=0)
    center: Tuple[float, float, float]

    @model_validator(mode="after")
    def _check_radii(self) -> "BumpSpec":
        if not self.beta > self.alpha:
            raise ValueError("beta must exceed alpha")
        return self


class RunConfig(BaseModel):
    """Options shared by the command-line commands."""
    command: Optional[str] = None
    algebra: Optional[AlgebraName] = None
    family: Optional[GridFamily] = None
    M: Optional[int] = Field(default=None, ge=1)
    input_path: Optional[str] = None
    output_path: Optional[str] = None
    seed: int = 0
    mc_samples: int = Field(default=1_000_000, ge=1)
    threads: Optional[int] = Field(default=None, ge=1)
    tolerance: float = Field(default=1e-9, gt=0)


class SymmetryReport(BaseModel):
    """Maximum deviations of the shift, point and weight symmetries."""
    algebra: AlgebraName
    family: OrbitFamily
    weight: Tuple[int, int, int]
    trials: int
    seed: int
    shift_deviation: float = 0.0
    point_deviation: float = 0.0
    weight_deviation: float = 0.0
    boundary_deviation: Optional[float] = None
    max_deviation: float = 0.0
    passed: bool = True


class ExperimentReport(BaseModel):
    """Result of one interpolation experiment."""
    algebra: AlgebraName
    family: GridFamily
    M: int
    bump: Dict[str, Any]
    error_l2: float
    error_method: ErrorMethod
    integral_f2: float
    n_points: int
    mc_samples: Optional[int] = None
    seed: int = 0
    runtime_ms: Optional[float] = None


class VerificationResult(BaseModel):
    """Outcome of one verification suite."""
    suite: str
    passed: bool
    max_deviation: float = 0.0
    checks: int = 0
    counterexample: Optional[str] = None
    details: Dict[str, Any] = Field(default_factory=dict)
