import json
import logging
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional, Set, Union

import numpy as np
import yaml
from pydantic import ValidationError

from core.exceptions import ExprEvaluationError, ExprSyntaxError, KernelEvaluationError, ProblemValidationError
from modules.resolvents.models import SeparableComponent, SumKernel
from modules.star_core.models import Grid
from modules.star_core.service import StarAlgebra, field_dtype, star_algebra
from modules.validation.service import validation_service

from .models import VARIABLES, BinOp, Call, Expr, Imaginary, Name, Neg, Number, Problem
from .parser import format_expr, parse_expr
from .schemas import ComponentSpec, ProblemSpec

logger = logging.getLogger(__name__)

_FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "sqrt": np.sqrt,
}

Value = Union[float, complex, np.ndarray]


def _all_finite(*values) -> bool:
    return all(np.all(np.isfinite(v)) for v in values)


class Evaluator:
    """Evaluates a tree over scalar or array bindings with numpy semantics"""

    def __init__(self, bindings: Mapping[str, Value], complex_mode: bool = True):
        self.bindings = bindings
        self.complex_mode = complex_mode

    def _promote(self, value: Value) -> Value:
        return np.asarray(value, dtype=np.complex128) if self.complex_mode else value

    def __call__(self, expr: Expr) -> Value:
        if isinstance(expr, Number):
            return expr.value
        if isinstance(expr, Imaginary):
            return 1j
        if isinstance(expr, Name):
            try:
                return self.bindings[expr.name]
            except KeyError:
                raise ExprEvaluationError(f"Unbound name '{expr.name}'", expr.name)
        if isinstance(expr, Neg):
            return -self(expr.operand)
        if isinstance(expr, BinOp):
            return self._binop(expr)
        if isinstance(expr, Call):
            arg = self(expr.arg)
            if expr.func == "sqrt":
                arg = self._promote(arg)
            result = _FUNCTIONS[expr.func](arg)
            if _all_finite(arg) and not _all_finite(result):
                raise ExprEvaluationError("Non-finite result", format_expr(expr))
            return result
        raise TypeError(f"Not an expression node: {expr!r}")

    def _binop(self, expr: BinOp) -> Value:
        left = self(expr.left)
        right = self(expr.right)
        if expr.op == "+":
            return left + right
        if expr.op == "-":
            return left - right
        if expr.op == "*":
            return left * right
        if expr.op == "/":
            if np.any(np.asarray(right) == 0):
                raise ExprEvaluationError("Division by zero", format_expr(expr))
            return left / right
        if expr.op == "^":
            result = np.power(self._promote(left), right)
            if _all_finite(left, right) and not _all_finite(result):
                raise ExprEvaluationError("Non-finite power", format_expr(expr))
            return result
        raise ExprEvaluationError(f"Unknown operator '{expr.op}'", format_expr(expr))


class KernelDslService:
    def __init__(self, algebra: StarAlgebra = star_algebra):
        self.algebra = algebra

    # Expressions

    def parse_expr(self, src: str, complex_mode: bool = True) -> Expr:
        return parse_expr(src, complex_mode)

    def print_expr(self, expr: Expr) -> str:
        return format_expr(expr)

    def eval_expr(self, expr: Expr, bindings: Mapping[str, Value], complex_mode: bool = True) -> Value:
        """Evaluate with numpy semantics; 0-d results come back as Python scalars"""
        with np.errstate(all="ignore"):
            result = Evaluator(bindings, complex_mode)(expr)
        if np.ndim(result) == 0:
            return np.asarray(result).item()
        return result

    def free_names(self, expr: Expr) -> Set[str]:
        """Names other than t and tp"""
        if isinstance(expr, Name):
            return set() if expr.name in VARIABLES else {expr.name}
        if isinstance(expr, Neg):
            return self.free_names(expr.operand)
        if isinstance(expr, BinOp):
            return self.free_names(expr.left) | self.free_names(expr.right)
        if isinstance(expr, Call):
            return self.free_names(expr.arg)
        return set()

    def two_variable(self, expr: Expr, params: Mapping[str, float], complex_mode: bool = True) -> Callable:
        """k(tp, t) with tp the left variable"""
        def k(tp, t):
            return self.eval_expr(expr, {**params, "tp": tp, "t": t}, complex_mode)
        return k

    def one_variable(self, expr: Expr, params: Mapping[str, float], complex_mode: bool = True) -> Callable:
        """m(x) with both t and tp bound to x"""
        def m(x):
            return self.eval_expr(expr, {**params, "tp": x, "t": x}, complex_mode)
        return m

    # Problem files

    def read_problem_data(self, path: Union[str, Path]) -> Dict[str, Any]:
        path = Path(path)
        if not path.exists():
            raise ProblemValidationError(f"Problem file not found: {path}")
        text = path.read_text()
        try:
            if path.suffix.lower() in (".yaml", ".yml"):
                data = yaml.safe_load(text)
            else:
                data = json.loads(text)
        except (json.JSONDecodeError, yaml.YAMLError) as e:
            raise ProblemValidationError(f"Malformed problem file {path}: {e}")
        if not isinstance(data, dict):
            raise ProblemValidationError(f"Problem file {path} must contain an object")
        return data

    def validate_problem(self, data: Dict[str, Any]) -> ProblemSpec:
        """Schema validation, then parse checks and free-name coverage"""
        try:
            spec = ProblemSpec(**data)
        except ValidationError as e:
            error = e.errors()[0]
            path = ".".join(str(part) for part in error["loc"])
            raise ProblemValidationError(error["msg"], path)

        complex_mode = spec.field == "complex"
        known = set(spec.params)
        for path, src in self._expressions(spec):
            try:
                expr = parse_expr(src, complex_mode)
            except ExprSyntaxError as e:
                raise ProblemValidationError(str(e), path) from e
            missing = sorted(self.free_names(expr) - known)
            if missing:
                raise ProblemValidationError(f"Missing parameter(s): {', '.join(missing)}", path)

        for index, component in enumerate(spec.components):
            if component.kind == "builtin":
                self._check_builtin(index, component, spec)
        return spec

    def _expressions(self, spec: ProblemSpec):
        yield "g.smooth", spec.g.smooth
        for index, component in enumerate(spec.components):
            if component.separable is not None:
                yield f"components.{index}.separable.a", component.separable.a
                yield f"components.{index}.separable.b", component.separable.b
            elif component.numeric is not None:
                yield f"components.{index}.numeric.k", component.numeric.k

    def _check_builtin(self, index: int, component: ComponentSpec, spec: ProblemSpec) -> None:
        path = f"components.{index}.builtin"
        entry = self.catalog().get(component.builtin)
        if entry is None:
            raise ProblemValidationError(
                f"Unknown builtin '{component.builtin}', expected one of {sorted(self.catalog())}", path
            )
        args = {**spec.params, **component.args}
        missing = [name for name in entry["required"] if name not in args]
        if missing:
            raise ProblemValidationError(f"Missing parameter(s): {', '.join(missing)}", f"components.{index}.args")
        if entry.get("complex") and spec.field != "complex":
            raise ProblemValidationError(f"Builtin '{component.builtin}' needs the complex field", path)

    def load_problem(self, path: Union[str, Path]) -> ProblemSpec:
        spec = self.validate_problem(self.read_problem_data(path))
        logger.info(f"✅ Loaded problem {path}: {len(spec.components)} component(s) on {spec.grid.to_grid()}")
        return spec

    # Builtins

    def catalog(self) -> Dict[str, Dict[str, Any]]:
        return {
            "constant_ab": {
                "required": ("a", "b"),
                "complex": False,
                "build": validation_service.constant_components,
            },
            "heun_xie_hai": {
                "required": ("f1", "nu", "omega"),
                "complex": True,
                "build": validation_service.heun_components,
            },
        }

    # Building

    def build_problem(self, spec: ProblemSpec, source: Optional[str] = None) -> Problem:
        """Sample every expression on the grid and assemble g and the sum kernel"""
        grid: Grid = spec.grid.to_grid()
        complex_mode = spec.field == "complex"
        dtype = field_dtype(spec.field)
        params = dict(spec.params)

        g_expr = parse_expr(spec.g.smooth, complex_mode)
        g = self._sample_kernel(grid, spec.g.delta, g_expr, params, complex_mode, dtype, "g.smooth")

        components = []
        for index, component in enumerate(spec.components):
            path = f"components.{index}"
            if component.separable is not None:
                a = self._sample_function(grid, parse_expr(component.separable.a, complex_mode), params, complex_mode, dtype, f"{path}.separable.a")
                b = self._sample_function(grid, parse_expr(component.separable.b, complex_mode), params, complex_mode, dtype, f"{path}.separable.b")
                components.append(SeparableComponent(a, b))
            elif component.numeric is not None:
                k_expr = parse_expr(component.numeric.k, complex_mode)
                components.append(self._sample_kernel(grid, 0, k_expr, params, complex_mode, dtype, f"{path}.numeric.k"))
            else:
                entry = self.catalog()[component.builtin]
                args = {**params, **component.args}
                components.extend(entry["build"](grid, args))

        sum_kernel = SumKernel(grid, tuple(components))
        logger.info(f"Built problem: {sum_kernel.d} component(s), field {spec.field}")
        return Problem(
            grid=grid,
            field=spec.field,
            dtype=dtype,
            g=g,
            sum_kernel=sum_kernel,
            method=spec.solver.method,
            n_orders=spec.solver.orders,
            abs_tol=spec.solver.abs_tol,
            rel_tol=spec.solver.rel_tol,
            product_order=spec.solver.order,
            params=params,
            source=source,
        )

    def _sample_kernel(self, grid, c, expr, params, complex_mode, dtype, path):
        try:
            return self.algebra.make_kernel(grid, c, self.two_variable(expr, params, complex_mode), dtype=dtype)
        except (KernelEvaluationError, ExprEvaluationError) as e:
            raise ProblemValidationError(str(e), path) from e

    def _sample_function(self, grid, expr, params, complex_mode, dtype, path):
        try:
            return self.algebra.make_function(grid, self.one_variable(expr, params, complex_mode), dtype=dtype)
        except (KernelEvaluationError, ExprEvaluationError) as e:
            raise ProblemValidationError(str(e), path) from e

    def load_and_build(self, path: Union[str, Path]) -> Problem:
        return self.build_problem(self.load_problem(path), source=str(path))


kernel_dsl_service = KernelDslService()
