#!/usr/bin/env python3
"""
Write the example problem files into problems/
"""
import json
import sys
from pathlib import Path

import yaml

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from modules.kernel_dsl.service import kernel_dsl_service

PROBLEMS = {
    "constant_ab": {
        "grid": {"t_min": 0.0, "t_max": 1.0, "n": 1601},
        "field": "real",
        "g": {"delta": 1.0, "smooth": "0"},
        "components": [{"builtin": "constant_ab"}],
        "solver": {"orders": 40, "method": "resummed"},
        "params": {"a": 1.0, "b": 2.0},
    },
    "speedup": {
        "grid": {"t_min": 0.0, "t_max": 1.0, "n": 401},
        "field": "real",
        "g": {"delta": 1.0, "smooth": "0"},
        "components": [
            {"separable": {"a": "a", "b": "1"}},
            {"separable": {"a": "b", "b": "1"}},
        ],
        "solver": {"orders": 7, "method": "both"},
        "params": {"a": 1.0, "b": 0.05},
    },
    "three_component": {
        "grid": {"t_min": 0.0, "t_max": 1.0, "n": 401},
        "field": "real",
        "g": {"delta": 1.0, "smooth": "0"},
        "components": [
            {"numeric": {"k": "1"}},
            {"separable": {"a": "tp", "b": "1"}},
            {"numeric": {"k": "sin(tp - t)"}},
        ],
        "solver": {"orders": 30, "method": "resummed"},
    },
    "heun": {
        "grid": {"t_min": 0.0, "t_max": 6.283185307179586, "n": 1601},
        "field": "complex",
        "g": {"delta": 1.0, "smooth": "0"},
        "components": [{"builtin": "heun_xie_hai", "args": {"f1": 0.5, "nu": 0.5, "omega": 1.0}}],
        "solver": {"orders": 60, "method": "resummed"},
    },
}


def generate_problems(directory: Path = Path("problems")) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for name, data in PROBLEMS.items():
        kernel_dsl_service.validate_problem(data)
        path = directory / f"{name}.json"
        with open(path, "w") as f:
            json.dump(data, f, indent=2)
            f.write("\n")
        print(f"✅ Wrote {path}")

    path = directory / "speedup.yaml"
    with open(path, "w") as f:
        yaml.safe_dump(PROBLEMS["speedup"], f, sort_keys=False)
    print(f"✅ Wrote {path}")


if __name__ == "__main__":
    generate_problems(Path(sys.argv[1]) if len(sys.argv) > 1 else Path("problems"))
