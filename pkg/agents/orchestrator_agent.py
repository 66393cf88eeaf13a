"""
Orchestrator Agent - Coordinates the workflow between agents for each command.
"""

import csv
import json
import logging
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import yaml
from pydantic import ValidationError

from data_models import (
    AlgebraName, BumpSpec, ErrorMethod, ExperimentReport, FieldDataError, GridFamily, IntegrationMethod,
    OrbitError, RunConfig, SampledField, SliceComponent, SpectralField, VerificationResult
)
from agents.grid_agent import GridAgent
from agents.lie_core_agent import LieCoreAgent
from agents.model_agent import PRESETS, REFERENCE_ERRORS, REFERENCE_M_VALUES, ModelAgent
from agents.orbit_evaluation_agent import OrbitEvaluationAgent
from agents.transform_agent import TransformAgent
from agents.verification_agent import ROUNDTRIP_TOLERANCE, VerificationAgent

EXIT_CODES = {
    "verification_failed": 1,
    "usage_error": 2,
    "data_error": 3,
}


class OrchestratorAgent:
    """Coordinates the workflow between all agents."""

    def __init__(self, verbose: bool = False, threads: Optional[int] = None, corrupt_epsilon: bool = False):
        self.name = "OrchestratorAgent"
        self.verbose = verbose
        self.logger = self._setup_logger()

        self.lie_core = LieCoreAgent()
        self.grid_agent = GridAgent(self.lie_core)
        self.evaluator = OrbitEvaluationAgent(self.lie_core, self.grid_agent)
        self.transform_agent = TransformAgent(
            self.lie_core, self.grid_agent, self.evaluator, threads=threads, corrupt_epsilon=corrupt_epsilon
        )
        self.model_agent = ModelAgent(self.transform_agent)
        self.verification_agent = VerificationAgent(self.transform_agent)

        # Workflow state
        self.workflow_state = {
            "current_step": "initialized",
            "messages": [],
            "results": {},
            "errors": [],
            "start_time": None,
            "end_time": None
        }

    def _setup_logger(self) -> logging.Logger:
        """Setup logging for the orchestrator"""
        logger = logging.getLogger("OrbitOrchestrator")
        logger.setLevel(logging.INFO if self.verbose else logging.WARNING)

        if not logger.handlers:
            handler = logging.StreamHandler()
            formatter = logging.Formatter(
                '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
            )
            handler.setFormatter(formatter)
            logger.addHandler(handler)

        # agent modules log under "agents.*"
        logging.getLogger("agents").setLevel(logging.INFO if self.verbose else logging.WARNING)
        return logger

    def _start(self, step: str) -> None:
        self.workflow_state["start_time"] = time.time()
        self.workflow_state["current_step"] = step

    def _finish(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        self.workflow_state["current_step"] = "completed"
        self.workflow_state["end_time"] = time.time()
        self.workflow_state["execution_time_seconds"] = self.workflow_state["end_time"] - self.workflow_state["start_time"]
        payload.update({
            "success": True,
            "execution_time_seconds": self.workflow_state["execution_time_seconds"],
        })
        return payload

    # ------------------------------------------------------------------
    # Configuration
    # ------------------------------------------------------------------

    @staticmethod
    def load_config(path: Union[str, Path]) -> RunConfig:
        """Read a YAML mapping of RunConfig fields."""
        try:
            with open(path, 'r', encoding='utf-8') as f:
                raw = yaml.safe_load(f) or {}
        except (OSError, yaml.YAMLError) as e:
            raise FieldDataError(f"cannot read config {path}: {e}") from e
        if not isinstance(raw, dict):
            raise FieldDataError(f"config {path} must contain a mapping")
        try:
            return RunConfig.model_validate(raw)
        except ValidationError as e:
            raise FieldDataError(f"invalid config {path}: {e}") from e

    # ------------------------------------------------------------------
    # grid / weights
    # ------------------------------------------------------------------

    def run_grid(self, algebra, family, M: int, output_path: Optional[str] = None,
                 fmt: Optional[str] = None, weights: bool = False) -> Dict[str, Any]:
        """Enumerate F_M (or Lambda_M) and optionally export it."""
        kind = "weights" if weights else "grid"
        self._start(kind)
        try:
            algebra, family = AlgebraName(algebra), GridFamily(family)
            self.logger.info("Phase 1: Enumerating %s %s %s M=%d...", kind, algebra.value, family.value, M)
            if weights:
                table = self.grid_agent.weight_table(algebra, family, M)
            else:
                table = self.grid_agent.grid_table(algebra, family, M)
            self.workflow_state["results"][kind] = table

            if output_path:
                self.logger.info("Phase 2: Writing %s", output_path)
                fmt = fmt or self._format_for(output_path)
                if fmt == "json":
                    self.save_json({
                        "algebra": algebra.value,
                        "family": family.value,
                        "M": M,
                        "count": len(table["rows"]),
                        "kind": kind,
                        "columns": table["columns"],
                        "rows": table["rows"],
                    }, output_path)
                else:
                    self.save_csv(table["columns"], table["rows"], output_path)

            return self._finish({"kind": kind, "count": len(table["rows"]), "table": table, "output_path": output_path})
        except ValueError as e:
            return self._create_error_result("usage_error", str(e))
        except OrbitError as e:
            return self._create_error_result("data_error", str(e))

    @staticmethod
    def _format_for(path: Union[str, Path]) -> str:
        return "json" if str(path).lower().endswith(".json") else "csv"

    # ------------------------------------------------------------------
    # transform / interpolate
    # ------------------------------------------------------------------

    def read_field(self, path: Union[str, Path], kind: str = "sampled", algebra=None, family=None,
                   M: Optional[int] = None) -> Union[SampledField, SpectralField]:
        """Load a field from JSON (self-describing) or CSV (re,im rows plus algebra/family/M)."""
        model = SampledField if kind == "sampled" else SpectralField
        path = Path(path)
        try:
            if self._format_for(path) == "json":
                field = model.model_validate_json(path.read_text(encoding='utf-8'))
                if field.kind != kind:
                    raise FieldDataError(f"{path} holds a {field.kind} field, expected {kind}")
                return field
            if algebra is None or family is None or M is None:
                raise FieldDataError("CSV input needs --algebra, --family and --M")
            values = [complex(*row) for row in self._read_numeric_rows(path, (1, 2))]
            return model.from_values(algebra, family, M, values)
        except (OSError, ValueError, TypeError) as e:
            raise FieldDataError(f"malformed {kind} field {path}: {e}") from e

    def _read_numeric_rows(self, path: Path, widths: Sequence[int]) -> List[List[float]]:
        rows = []
        with open(path, 'r', encoding='utf-8', newline='') as f:
            for number, row in enumerate(csv.reader(f), start=1):
                if not row or not "".join(row).strip():
                    continue
                try:
                    values = [float(v) for v in row]
                except ValueError:
                    if number == 1 and not rows:
                        continue  # header
                    raise FieldDataError(f"{path}:{number}: non-numeric row {row}")
                if len(values) not in widths:
                    raise FieldDataError(f"{path}:{number}: expected {' or '.join(map(str, widths))} columns")
                rows.append(values)
        return rows

    def write_field(self, field: Union[SampledField, SpectralField], output_path: Union[str, Path]) -> None:
        if self._format_for(output_path) == "json":
            self.save_json(field.model_dump(mode="json"), output_path)
        else:
            self.save_csv(["re", "im"], [list(pair) for pair in field.data], output_path)

    def run_transform(self, input_path: str, output_path: Optional[str] = None, inverse: bool = False,
                      verify_roundtrip: bool = False, tolerance: float = ROUNDTRIP_TOLERANCE,
                      algebra=None, family=None, M: Optional[int] = None) -> Dict[str, Any]:
        """Forward transform of a sampled field, or the interpolant on the grid with inverse=True."""
        self._start("transform")
        try:
            self.logger.info("Phase 1: Reading %s", input_path)
            field = self.read_field(input_path, "spectral" if inverse else "sampled", algebra, family, M)
            self.workflow_state["results"]["input"] = field

            self.logger.info("Phase 2: %s transform %s %s M=%d...", "Inverse" if inverse else "Forward",
                             field.algebra.value, field.family.value, field.M)
            if inverse:
                values = self.transform_agent.inverse_on_grid(field)
                result = SampledField.from_values(field.algebra, field.family, field.M, values)
            else:
                result = self.transform_agent.forward_transform(field)
            self.workflow_state["results"]["transform"] = result

            residual = None
            if verify_roundtrip and not inverse:
                self.logger.info("Phase 3: Checking round trip")
                residual = self.transform_agent.roundtrip_residual(field)
                self.workflow_state["results"]["roundtrip"] = residual
                if residual > tolerance:
                    self.workflow_state["errors"].append(f"round-trip residual {residual:.3e} exceeds {tolerance:.1e}")

            if output_path:
                self.write_field(result, output_path)

            payload = {"field": result, "count": len(result.data), "roundtrip_residual": residual,
                       "output_path": output_path}
            if residual is not None and residual > tolerance:
                return self._create_error_result(
                    "verification_failed", f"round-trip residual {residual:.3e} exceeds {tolerance:.1e}", **payload
                )
            return self._finish(payload)
        except (OrbitError, ValidationError) as e:
            return self._create_error_result("data_error", str(e))

    def run_interpolate(self, spectral_path: str, points_path: str, output_path: Optional[str] = None,
                        coordinates: str = "orthonormal") -> Dict[str, Any]:
        """Evaluate a stored interpolant at points listed in a CSV file."""
        self._start("interpolate")
        try:
            spectral = self.read_field(spectral_path, "spectral")
            points = np.array(self._read_numeric_rows(Path(points_path), (3,)), dtype=float).reshape(-1, 3)
            self.logger.info("Phase 1: Evaluating interpolant at %d points", points.shape[0])
            alphavee = points if coordinates == "alphavee" else self.lie_core.orthonormal_to_point(spectral.algebra, points)
            values = self.transform_agent.inverse_transform_points(spectral, alphavee)
            rows = [list(map(float, p)) + [float(v.real), float(v.imag)] for p, v in zip(points, values)]
            self.workflow_state["results"]["interpolate"] = values
            if output_path:
                self.save_csv(["x1", "x2", "x3", "re", "im"], rows, output_path)
            return self._finish({"values": values, "rows": rows, "count": len(rows), "output_path": output_path})
        except OSError as e:
            return self._create_error_result("data_error", f"cannot read {points_path}: {e}")
        except (OrbitError, ValidationError) as e:
            return self._create_error_result("data_error", str(e))

    # ------------------------------------------------------------------
    # verify
    # ------------------------------------------------------------------

    def run_verify(self, suites: Optional[Sequence[str]] = None, max_M: int = 8, seed: int = 0,
                   mc_samples: int = 1_000_000,
                   integration: Union[IntegrationMethod, str] = IntegrationMethod.QUADRATURE) -> Dict[str, Any]:
        """Run verification suites; success iff every suite passes."""
        self._start("verify")
        try:
            results: List[VerificationResult] = self.verification_agent.run(suites, max_M, seed, mc_samples, integration)
        except ValueError as e:
            return self._create_error_result("usage_error", str(e))
        for result in results:
            self.workflow_state["results"][result.suite] = result
        failed = [r for r in results if not r.passed]
        if failed:
            for r in failed:
                self.workflow_state["errors"].append(f"{r.suite}: {r.counterexample}")
            return self._create_error_result(
                "verification_failed", f"{failed[0].suite}: {failed[0].counterexample}", suites=results
            )
        return self._finish({"suites": results})

    # ------------------------------------------------------------------
    # experiment / slice
    # ------------------------------------------------------------------

    def run_experiment(self, preset: Optional[str] = None, algebra=None, family=None,
                       bump: Optional[BumpSpec] = None, M_values: Sequence[int] = REFERENCE_M_VALUES,
                       error_method: Union[ErrorMethod, str] = ErrorMethod.SPECTRAL,
                       mc_samples: int = 1_000_000, seed: int = 0, timing: bool = False,
                       output_path: Optional[str] = None, slices_dir: Optional[str] = None,
                       slice_axis: int = 2, slice_value: Optional[float] = None, resolution: int = 128,
                       component: Union[SliceComponent, str] = SliceComponent.REAL) -> Dict[str, Any]:
        """Interpolate a bump on F_M for each M and report the L2 errors."""
        self._start("experiment")
        try:
            if preset:
                algebra, family, bump = PRESETS[preset]
            if algebra is None or family is None or bump is None:
                return self._create_error_result("usage_error", "choose a preset or give algebra, family and bump")
            algebra, family = AlgebraName(algebra), GridFamily(family)
            if slice_value is None:
                slice_value = bump.center[slice_axis]

            reports: List[ExperimentReport] = []
            for M in M_values:
                self.logger.info("Phase %d: Experiment %s %s M=%d...", len(reports) + 1, algebra.value, family.value, M)
                spectral, report = self.model_agent.run_experiment(
                    algebra, family, M, bump, error_method, mc_samples, seed, timing
                )
                reports.append(report)
                if slices_dir:
                    self._write_slices(slices_dir, algebra, bump, spectral, M, slice_axis, slice_value,
                                       resolution, component)
            self.workflow_state["results"]["experiment"] = reports

            reference = REFERENCE_ERRORS.get(preset) if preset else None
            document = {
                "preset": preset,
                "experiments": [r.model_dump(mode="json") for r in reports],
                "reference": {str(M): reference[M] for M in M_values if M in reference} if reference else None,
            }
            if output_path:
                self.save_json(document, output_path)
            return self._finish({"reports": reports, "reference": reference, "document": document,
                                 "output_path": output_path})
        except ValueError as e:
            return self._create_error_result("usage_error", str(e))
        except OrbitError as e:
            return self._create_error_result("data_error", str(e))

    def _write_slices(self, slices_dir: str, algebra, bump: BumpSpec, spectral: SpectralField, M: int,
                      axis: int, value: float, resolution: int, component) -> None:
        directory = Path(slices_dir)
        model, first, second = self.model_agent.slice_export(algebra, bump, axis, value, resolution, component)
        self.save_matrix(model, first, second, directory / f"model_axis{axis}.csv")
        interpolant, first, second = self.model_agent.slice_export(algebra, spectral, axis, value, resolution, component)
        self.save_matrix(interpolant, first, second, directory / f"interpolant_M{M}_axis{axis}.csv")

    def run_slice(self, axis: int, value: float, output_path: str, spectral_path: Optional[str] = None,
                  algebra=None, bump: Optional[BumpSpec] = None, resolution: int = 128,
                  component: Union[SliceComponent, str] = SliceComponent.REAL) -> Dict[str, Any]:
        """Export a plane section of a stored interpolant or of a bump model."""
        self._start("slice")
        try:
            if spectral_path:
                target = self.read_field(spectral_path, "spectral")
                algebra = target.algebra
            elif bump is not None and algebra is not None:
                target = bump
            else:
                return self._create_error_result("usage_error", "give a spectral field or algebra and bump")
            data, first, second = self.model_agent.slice_export(algebra, target, axis, value, resolution, component)
            self.save_matrix(data, first, second, output_path)
            self.workflow_state["results"]["slice"] = data
            return self._finish({"shape": data.shape, "output_path": output_path})
        except ValueError as e:
            return self._create_error_result("usage_error", str(e))
        except OrbitError as e:
            return self._create_error_result("data_error", str(e))

    # ------------------------------------------------------------------
    # Output
    # ------------------------------------------------------------------

    def save_json(self, payload: Dict[str, Any], output_path: Union[str, Path]) -> None:
        """Write sorted-key JSON; identical payloads give identical bytes."""
        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        with open(output_path, 'w', encoding='utf-8') as f:
            f.write(json.dumps(payload, sort_keys=True, indent=2))
            f.write("\n")

    def save_csv(self, header: Sequence[str], rows: Sequence[Sequence[Any]], output_path: Union[str, Path]) -> None:
        """Write rows with floats at 17 significant digits."""
        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        with open(output_path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f, lineterminator="\n")
            if header:
                writer.writerow(header)
            for row in rows:
                writer.writerow([format(v, '.17g') if isinstance(v, float) else v for v in row])

    def save_matrix(self, data: np.ndarray, first: np.ndarray, second: np.ndarray,
                    output_path: Union[str, Path]) -> None:
        """Labelled matrix: first row holds the second axis, first column the first axis."""
        rows = [[float(a)] + [float(v) for v in row] for a, row in zip(first, data)]
        self.save_csv([""] + [format(float(b), '.17g') for b in second], rows, output_path)

    # ------------------------------------------------------------------
    # Status and reports
    # ------------------------------------------------------------------

    def _create_error_result(self, error_type: str, error_message: str, **extra: Any) -> Dict[str, Any]:
        """Create an error result."""
        self.workflow_state["end_time"] = time.time()
        self.workflow_state["current_step"] = "error"
        self.workflow_state["errors"].append(f"{error_type}: {error_message}")
        log = self.logger.warning if error_type == "verification_failed" else self.logger.error
        log("%s: %s", error_type, error_message)

        result = {
            "success": False,
            "error_type": error_type,
            "error_message": error_message,
            "exit_code": EXIT_CODES.get(error_type, 1),
            "workflow_state": self.workflow_state,
            "execution_time_seconds": (time.time() - self.workflow_state["start_time"]) if self.workflow_state["start_time"] else 0
        }
        result.update(extra)
        return result

    def get_workflow_status(self) -> Dict[str, Any]:
        """Get current workflow status."""
        return {
            "current_step": self.workflow_state["current_step"],
            "total_errors": len(self.workflow_state["errors"]),
            "completed_steps": list(self.workflow_state["results"].keys()),
            "execution_time": (time.time() - self.workflow_state["start_time"]) if self.workflow_state["start_time"] else None
        }

    def generate_workflow_report(self) -> str:
        """Generate a text report of the workflow execution."""
        if not self.workflow_state["start_time"]:
            return "No workflow has been executed yet."

        report_lines = [
            "# Orbit Transform Workflow Report",
            "",
            f"**Execution Time:** {self.workflow_state.get('execution_time_seconds', 0):.2f} seconds",
            f"**Current Step:** {self.workflow_state['current_step']}",
            f"**Total Errors:** {len(self.workflow_state['errors'])}",
            "",
            "## Completed Steps:"
        ]

        for step_name, result in self.workflow_state["results"].items():
            report_lines.append(f"- {self._step_mark(result)} {step_name}: {self._get_step_summary(step_name, result)}")

        if self.workflow_state["errors"]:
            report_lines.extend([
                "",
                "## Errors:",
            ])
            for i, error in enumerate(self.workflow_state["errors"], 1):
                report_lines.append(f"{i}. {error}")

        return "\n".join(report_lines)

    @staticmethod
    def _step_mark(result: Any) -> str:
        return "❌" if isinstance(result, VerificationResult) and not result.passed else "✅"

    def _get_step_summary(self, step_name: str, result: Any) -> str:
        """Get a summary of a workflow step result."""
        if isinstance(result, VerificationResult):
            summary = f"{result.checks} checks, max deviation {result.max_deviation:.3e}"
            return summary if result.passed else f"{summary}; {result.counterexample}"
        elif step_name in ("grid", "weights") and isinstance(result, dict):
            return f"{len(result['rows'])} rows"
        elif isinstance(result, (SampledField, SpectralField)):
            return f"{result.kind} field {result.algebra.value} {result.family.value} M={result.M}, {len(result.data)} values"
        elif step_name == "roundtrip":
            return f"max residual {result:.3e}"
        elif step_name == "experiment":
            return ", ".join(f"M={r.M}: {r.error_l2:.4g}" for r in result)
        elif step_name == "slice":
            return f"{result.shape[0]}x{result.shape[1]} samples"
        else:
            return "Completed"
