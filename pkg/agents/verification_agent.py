"""
Verification Agent - property and fixture suites behind the verify command.

Each suite returns a VerificationResult with the worst deviation seen, the
number of checks made and the first counterexample, if any.
"""

import logging
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np

from data_models import (
    GRID_TO_ORBIT_FAMILY, AlgebraName, GridFamily, IntegrationMethod, OrbitFamily,
    OrbitFunctionSpec, SampledField, SignHomomorphism, TorusPoint, VerificationResult, Weight
)
from lie_library import PRINTED_ERRATA, grid_count, zero_pattern
from agents.lie_core_agent import WEYL_ORDER
from agents.transform_agent import TransformAgent

logger = logging.getLogger(__name__)

LISTED_MODULI = (6, 10, 11)
GRAM_MODULI = (4, 6, 8, 10)
COUNTING_RANGE = range(1, 31)
ORACLE_MAX_M = 8

ROUNDTRIP_TOLERANCE = 1e-9
PARSEVAL_TOLERANCE = 1e-8
GRAM_TOLERANCE = 1e-8
SYMMETRY_TOLERANCE = 1e-10
PRODUCT_TOLERANCE = 1e-9
CONTINUOUS_TOLERANCE = 0.02

SUITE_NAMES = (
    "tables", "counting", "closure", "admissibility", "orbit_stabilizer", "oracle", "gram",
    "roundtrip", "parseval", "explicit", "symmetry", "boundary", "product", "trig", "continuous",
)


class _Tally:
    """Running worst deviation, check count and first counterexample of a suite."""

    def __init__(self, suite: str, tolerance: float = 0.0):
        self.suite = suite
        self.tolerance = tolerance
        self.worst = 0.0
        self.checks = 0
        self.counterexample: Optional[str] = None
        self.details: Dict[str, object] = {}

    def deviation(self, value: float, label: str) -> None:
        self.checks += 1
        value = float(value)
        self.worst = max(self.worst, value)
        if not value <= self.tolerance and self.counterexample is None:
            self.counterexample = f"{label}: deviation {value:.3e} exceeds {self.tolerance:.1e}"

    def expect(self, ok: bool, label: str) -> None:
        self.checks += 1
        if not ok and self.counterexample is None:
            self.counterexample = label

    def result(self) -> VerificationResult:
        passed = self.counterexample is None
        log = logger.info if passed else logger.error
        log("suite %s: %s after %d checks (max deviation %.3e)",
            self.suite, "passed" if passed else "FAILED", self.checks, self.worst)
        return VerificationResult(
            suite=self.suite,
            passed=passed,
            max_deviation=self.worst,
            checks=self.checks,
            counterexample=self.counterexample,
            details=self.details,
        )


class VerificationAgent:
    """Runs fixture, counting, orthogonality and symmetry suites."""

    def __init__(self, transform_agent: Optional[TransformAgent] = None):
        self.name = "VerificationAgent"
        self.transform_agent = transform_agent or TransformAgent()
        self.lie_core = self.transform_agent.lie_core
        self.grid_agent = self.transform_agent.grid_agent
        self.evaluator = self.transform_agent.evaluator
        self.suites: Dict[str, Callable[..., VerificationResult]] = {
            name: getattr(self, f"check_{name}") for name in SUITE_NAMES
        }

    def run(self, suites: Optional[Sequence[str]] = None, max_M: int = 8, seed: int = 0,
            mc_samples: int = 1_000_000,
            integration: Union[IntegrationMethod, str] = IntegrationMethod.QUADRATURE) -> List[VerificationResult]:
        """
        Run the named suites (all by default) in registration order. The
        continuous suite integrates with the given method; Monte Carlo uses
        mc_samples points per integral.
        """
        names = list(self.suites) if not suites else list(suites)
        unknown = [n for n in names if n not in self.suites]
        if unknown:
            raise ValueError(f"unknown suite(s): {', '.join(unknown)}")
        results = []
        for name in names:
            logger.info("Running suite %s", name)
            options = {"max_M": max_M, "seed": seed}
            if name == "continuous":
                options.update(method=IntegrationMethod(integration), n_samples=mc_samples)
            results.append(self.suites[name](**options))
        return results

    # ------------------------------------------------------------------
    # Helpers
    # ------------------------------------------------------------------

    def _cone_weight(self, rng: np.random.Generator, algebra, family: OrbitFamily, high: int = 5) -> Weight:
        """Random weight of the family's cone with coordinates below high."""
        alg = self.lie_core.get_algebra(algebra)
        strict = {
            OrbitFamily.C: (),
            OrbitFamily.S: (1, 2, 3),
            OrbitFamily.SS: alg.short_set,
            OrbitFamily.SL: alg.long_set,
        }[OrbitFamily(family)]
        coords = [int(rng.integers(1 if i in strict else 0, high)) for i in (1, 2, 3)]
        return Weight(coords=tuple(coords))

    def _moduli(self, candidates: Sequence[int], max_M: int) -> List[int]:
        chosen = [M for M in candidates if M <= max_M]
        return chosen or [min(candidates)]

    # ------------------------------------------------------------------
    # Structural fixtures
    # ------------------------------------------------------------------

    def check_tables(self, max_M: int = 8, seed: int = 0, instances: int = 20) -> VerificationResult:
        """Stabilizer orders d, orbit sizes epsilon and h-vee against the tabulated zero patterns."""
        tally = _Tally("tables")
        library = self.lie_core.library
        rng = np.random.default_rng(seed)

        for algebra in AlgebraName:
            for pattern, expected in library.stabilizer_table.items():
                for _ in range(instances):
                    coords = [int(rng.integers(1, 20)) if c == "+" else 0 for c in pattern]
                    found = self.lie_core.stabilizer_order_d(algebra, coords)
                    tally.expect(found == expected, f"d({algebra.value}, {coords}) = {found}, table says {expected}")

        for (algebra, family), table in library.orbit_size_tables.items():
            for M in LISTED_MODULI:
                bary = self.grid_agent.grid_barycentric(algebra, family, M)
                epsilon = self.transform_agent.epsilon_table(algebra, family, M)
                for row, eps in zip(bary, epsilon):
                    expected = table.get(zero_pattern(row))
                    tally.expect(expected == int(eps),
                                 f"epsilon({algebra.value} {family.value} M={M}, u={tuple(row)}) = {eps}, table says {expected}")

        for (algebra, family), table in library.dual_stabilizer_tables.items():
            for M in LISTED_MODULI:
                bary = self.grid_agent.weight_barycentric(algebra, family, M)
                h = self.transform_agent.dual_stabilizer_table(algebra, family, M)
                for row, value in zip(bary, h):
                    expected = table.get(zero_pattern(row))
                    tally.expect(expected == int(value),
                                 f"h({algebra.value} {family.value} M={M}, t={tuple(row)}) = {value}, table says {expected}")
        return tally.result()

    def check_counting(self, max_M: int = 8, seed: int = 0) -> VerificationResult:
        """|F_M| and |Lambda_M| against the closed forms."""
        tally = _Tally("counting")
        for algebra in AlgebraName:
            for family in GridFamily:
                for M in COUNTING_RANGE:
                    expected = grid_count(algebra, family, M)
                    points = self.grid_agent.grid_barycentric(algebra, family, M).shape[0]
                    weights = self.grid_agent.weight_barycentric(algebra, family, M).shape[0]
                    tally.expect(points == expected and weights == expected,
                                 f"{algebra.value} {family.value} M={M}: |F|={points}, |Lambda|={weights}, formula {expected}")
        return tally.result()

    def check_closure(self, max_M: int = 8, seed: int = 0) -> VerificationResult:
        """Group order, closure under products and multiplicativity of the sign homomorphisms."""
        tally = _Tally("closure")
        for algebra in AlgebraName:
            group = self.lie_core.group(algebra)
            tally.expect(len(group.elements) == WEYL_ORDER, f"|W({algebra.value})| = {len(group.elements)}")
            keys = {m.tobytes() for m in group.omega}
            for w1 in group.elements:
                for w2 in group.elements[::7]:
                    product = self.lie_core.multiply(algebra, w1, w2)
                    tally.expect(np.array(product.matrix_omega, dtype=np.int64).tobytes() in keys,
                                 f"{algebra.value}: {w1.word} * {w2.word} left the group")
                    for hom in SignHomomorphism:
                        tally.expect(product.sign(hom) == w1.sign(hom) * w2.sign(hom),
                                     f"{algebra.value}: sign {hom.value} not multiplicative on {w1.word}, {w2.word}")
        return tally.result()

    def check_admissibility(self, max_M: int = 8, seed: int = 0) -> VerificationResult:
        """Exactly four +-1 assignments on the generators respect the Coxeter relations."""
        tally = _Tally("admissibility")
        for algebra in AlgebraName:
            alg = self.lie_core.get_algebra(algebra)
            admissible = [
                values for values in np.ndindex(2, 2, 2)
                if self.lie_core.admissibility_check([1 - 2 * v for v in values], algebra)
            ]
            tally.expect(len(admissible) == 4, f"{algebra.value}: {len(admissible)} admissible assignments")
            for hom in SignHomomorphism:
                values = [
                    -1 if (hom == SignHomomorphism.E
                           or (hom == SignHomomorphism.S and i in alg.short_set)
                           or (hom == SignHomomorphism.L and i in alg.long_set)) else 1
                    for i in (1, 2, 3)
                ]
                tally.expect(self.lie_core.admissibility_check(values, algebra),
                             f"{algebra.value}: homomorphism {hom.value} {values} rejected")
            tally.expect(not self.lie_core.admissibility_check([1, -1, 1], algebra),
                         f"{algebra.value}: (1, -1, 1) accepted")
        return tally.result()

    def check_orbit_stabilizer(self, max_M: int = 8, seed: int = 0) -> VerificationResult:
        """epsilon(x) * |Stab(x)| = 48 with the orbit collected exactly."""
        tally = _Tally("orbit_stabilizer")
        for algebra in AlgebraName:
            for family in GridFamily:
                for M in self._moduli(LISTED_MODULI, max_M):
                    for q in self.grid_agent.grid_numerators(algebra, family, M):
                        point = TorusPoint(coords=tuple(Fraction(int(v), 2 * M) for v in q))
                        eps = self.lie_core.orbit_size_eps(algebra, point)
                        stab = self.lie_core.torus_stabilizer_order(algebra, point)
                        tally.expect(eps * stab == WEYL_ORDER,
                                     f"{algebra.value} {family.value} M={M} x={q}/{2 * M}: {eps} * {stab} != 48")
        return tally.result()

    def check_oracle(self, max_M: int = 8, seed: int = 0, points: int = 5) -> VerificationResult:
        """Grid enumeration against folding every torus point, and float sums against mpmath."""
        tally = _Tally("oracle", tolerance=SYMMETRY_TOLERANCE)
        for algebra in AlgebraName:
            for family in GridFamily:
                for M in range(1, min(max_M, ORACLE_MAX_M) + 1):
                    enumerated = {tuple(int(v) for v in row) for row in self.grid_agent.grid_barycentric(algebra, family, M)}
                    folded = self.grid_agent.brute_force_grid(algebra, family, M)
                    if enumerated != folded:
                        difference = sorted(enumerated.symmetric_difference(folded))[:3]
                        tally.expect(False, f"{algebra.value} {family.value} M={M}: sets differ at {difference}")
                    else:
                        tally.expect(True, "")

        rng = np.random.default_rng(seed)
        M = max(2, min(max_M, ORACLE_MAX_M))
        for algebra in AlgebraName:
            for family in GridFamily:
                orbit_family = GRID_TO_ORBIT_FAMILY[family]
                numerators = self.grid_agent.grid_numerators(algebra, family, M)
                weights = self.grid_agent.weight_coords(algebra, family, M)
                if numerators.shape[0] == 0:
                    continue
                basis = self.evaluator.grid_basis(algebra, orbit_family, weights, numerators, M)
                for _ in range(points):
                    i = int(rng.integers(weights.shape[0]))
                    j = int(rng.integers(numerators.shape[0]))
                    coords = [Fraction(int(v), 2 * M) for v in numerators[j]]
                    exact = complex(self.evaluator.eval_high_precision(algebra, orbit_family, weights[i], coords))
                    tally.deviation(abs(basis[i, j] - exact) / max(abs(exact), 1.0),
                                    f"{algebra.value} {orbit_family.value} lambda={weights[i]} x={numerators[j]}/{2 * M}")
        return tally.result()

    # ------------------------------------------------------------------
    # Transforms
    # ------------------------------------------------------------------

    def check_gram(self, max_M: int = 8, seed: int = 0) -> VerificationResult:
        """Discrete Gram matrices are diagonal with entries k M^3 h-vee."""
        tally = _Tally("gram", tolerance=GRAM_TOLERANCE)
        for algebra in AlgebraName:
            for family in GridFamily:
                for M in self._moduli(GRAM_MODULI, max_M):
                    off_diagonal, diagonal = self.transform_agent.gram_deviation(algebra, family, M)
                    tally.deviation(max(off_diagonal, diagonal), f"Gram {algebra.value} {family.value} M={M}")
        return tally.result()

    def _random_field(self, rng: np.random.Generator, algebra, family, M: int) -> SampledField:
        n = self.grid_agent.grid_barycentric(algebra, family, M).shape[0]
        return SampledField.from_values(algebra, family, M, rng.standard_normal(n) + 1j * rng.standard_normal(n))

    def check_roundtrip(self, max_M: int = 8, seed: int = 0) -> VerificationResult:
        """Forward then inverse transform reproduces random grid data."""
        tally = _Tally("roundtrip", tolerance=ROUNDTRIP_TOLERANCE)
        rng = np.random.default_rng(seed)
        for algebra in AlgebraName:
            for family in GridFamily:
                for M in range(2, max(2, max_M) + 1):
                    field = self._random_field(rng, algebra, family, M)
                    tally.deviation(self.transform_agent.roundtrip_residual(field),
                                    f"round trip {algebra.value} {family.value} M={M}")
        return tally.result()

    def check_parseval(self, max_M: int = 8, seed: int = 0) -> VerificationResult:
        tally = _Tally("parseval", tolerance=PARSEVAL_TOLERANCE)
        rng = np.random.default_rng(seed)
        for algebra in AlgebraName:
            for family in GridFamily:
                for M in range(2, max(2, max_M) + 1):
                    field = self._random_field(rng, algebra, family, M)
                    tally.deviation(self.transform_agent.parseval_deviation(field),
                                    f"Parseval {algebra.value} {family.value} M={M}")
        return tally.result()

    # ------------------------------------------------------------------
    # Orbit functions
    # ------------------------------------------------------------------

    def check_explicit(self, max_M: int = 8, seed: int = 0, trials: int = 500) -> VerificationResult:
        """Generic 48-term sums against the 24-term expansions, purity, and the term audit."""
        tally = _Tally("explicit", tolerance=SYMMETRY_TOLERANCE)
        rng = np.random.default_rng(seed)
        for algebra in AlgebraName:
            for family in (OrbitFamily.SS, OrbitFamily.SL):
                _, _, is_sine = self.lie_core.library.get_expansion(algebra, family)
                for _ in range(trials):
                    spec = OrbitFunctionSpec(algebra=algebra, family=family, weight=self._cone_weight(rng, algebra, family, 8))
                    x = rng.random(3)
                    generic = self.evaluator.eval_generic(spec, x)
                    explicit = self.evaluator.eval_explicit(spec, x)
                    scale = max(abs(generic), 1.0)
                    label = f"{algebra.value} {family.value} lambda={spec.weight.coords} x={x.tolist()}"
                    tally.deviation(abs(generic - explicit) / scale, label)
                    impure = abs(generic.real) if is_sine else abs(generic.imag)
                    tally.deviation(impure / scale, f"purity {label}")

                mismatches = self.evaluator.audit_expansion(algebra, family)
                tally.expect(not mismatches, f"{algebra.value} {family.value}: corrected terms {mismatches} fail the audit")
                terms = list(self.lie_core.library.get_expansion(algebra, family)[0])
                printed = [index for (alg, index) in PRINTED_ERRATA if alg == algebra]
                for index in printed:
                    terms[index - 1] = PRINTED_ERRATA[(algebra, index)]
                flagged = self.evaluator.audit_expansion(algebra, family, terms)
                tally.expect(sorted(flagged) == sorted(printed),
                             f"{algebra.value} {family.value}: printed errata flagged as {flagged}, expected {printed}")
        return tally.result()

    def check_symmetry(self, max_M: int = 8, seed: int = 0, weights_per_family: int = 3,
                       trials: int = 100) -> VerificationResult:
        """Shift invariance and Weyl (anti)invariance in x and lambda."""
        tally = _Tally("symmetry", tolerance=SYMMETRY_TOLERANCE)
        rng = np.random.default_rng(seed)
        for algebra in AlgebraName:
            for family in OrbitFamily:
                for k in range(weights_per_family):
                    spec = OrbitFunctionSpec(algebra=algebra, family=family, weight=self._cone_weight(rng, algebra, family))
                    report = self.evaluator.verify_symmetries(spec, trials=trials, seed=seed + k)
                    tally.deviation(report.max_deviation, f"{algebra.value} {family.value} lambda={spec.weight.coords}")
        return tally.result()

    def check_boundary(self, max_M: int = 8, seed: int = 0, weights_per_family: int = 5,
                       points: int = 50) -> VerificationResult:
        """Ss and Sl functions vanish on H^s and H^l."""
        tally = _Tally("boundary", tolerance=SYMMETRY_TOLERANCE)
        rng = np.random.default_rng(seed)
        for algebra in AlgebraName:
            for family in GridFamily:
                orbit_family = GRID_TO_ORBIT_FAMILY[family]
                for k in range(weights_per_family):
                    weight = self._cone_weight(rng, algebra, orbit_family, 8)
                    values = self.evaluator.boundary_values(algebra, family, weight.coords, points, seed=seed + k)
                    tally.deviation(float(np.max(np.abs(values))),
                                    f"{algebra.value} {orbit_family.value} lambda={weight.coords} on the boundary")
        return tally.result()

    def check_product(self, max_M: int = 8, seed: int = 0, trials: int = 20) -> VerificationResult:
        """phi_lambda phi_mu = sum_w sigma(w) C_{lambda + w mu}."""
        tally = _Tally("product", tolerance=PRODUCT_TOLERANCE)
        rng = np.random.default_rng(seed)
        for algebra in AlgebraName:
            for family in OrbitFamily:
                for _ in range(trials):
                    first = self._cone_weight(rng, algebra, family)
                    second = self._cone_weight(rng, algebra, family)
                    x = rng.random(3)
                    lhs, _, deviation = self.evaluator.product_decomposition_check(
                        algebra, family, first.coords, second.coords, x
                    )
                    tally.deviation(deviation / max(abs(lhs), 1.0),
                                    f"{algebra.value} {family.value} {first.coords} x {second.coords}")
        return tally.result()

    def check_trig(self, max_M: int = 8, seed: int = 0, trials: int = 50) -> VerificationResult:
        """C3 functions against 8 times a permanent or determinant of cos/sin matrices."""
        tally = _Tally("trig", tolerance=SYMMETRY_TOLERANCE)
        rng = np.random.default_rng(seed)
        for family in OrbitFamily:
            for _ in range(trials):
                weight = self._cone_weight(rng, AlgebraName.C3, family)
                x = rng.random(3)
                value, _, deviation = self.evaluator.trig_correspondence_C3(family, weight.coords, x)
                tally.deviation(deviation / max(abs(value), 1.0), f"C3 {family.value} lambda={weight.coords}")
        return tally.result()

    def orthogonality_deviation(self, algebra, first: Weight, second: Weight, integral: complex) -> float:
        """|integral - K d delta| relative to K max(d_lambda, d_mu)."""
        d = max(self.lie_core.stabilizer_order_d(algebra, first), self.lie_core.stabilizer_order_d(algebra, second))
        K_const = self.lie_core.get_algebra(algebra).K_const
        expected = K_const * d if first == second else 0.0
        return abs(integral - expected) / (K_const * d)

    def check_continuous(self, max_M: int = 8, seed: int = 0, pairs: int = 10,
                         method: IntegrationMethod = IntegrationMethod.QUADRATURE,
                         n_samples: int = 1_000_000, order: int = 48) -> VerificationResult:
        """Integrals over F of phi_lambda conj(phi_mu) against K d_lambda delta(lambda, mu)."""
        tally = _Tally("continuous", tolerance=CONTINUOUS_TOLERANCE)
        tally.details["method"] = IntegrationMethod(method).value
        rng = np.random.default_rng(seed)
        for algebra in AlgebraName:
            for family in OrbitFamily:
                for k in range(pairs):
                    first = self._cone_weight(rng, algebra, family, 3)
                    second = first if k % 2 == 0 else self._cone_weight(rng, algebra, family, 3)
                    integral = self.transform_agent.continuous_inner_product(
                        algebra, family, first.coords, second.coords, method=method,
                        n_samples=n_samples, seed=seed + k, order=order,
                    )
                    tally.deviation(self.orthogonality_deviation(algebra, first, second, integral),
                                    f"{algebra.value} {family.value} <{first.coords}, {second.coords}> = {integral:.6g}")
        return tally.result()
