"""Adapters that hand an exported model to an external MILP engine.

A backend takes a :class:`MilpModel`, serializes it, submits the text to the
engine and returns variable values by name. ``HighsBackend`` uses the
``highspy`` bindings when installed.
"""
from __future__ import annotations

import importlib.util
import os
import tempfile
from dataclasses import dataclass, field
from typing import Protocol

from .export import export_model
from .model import MilpModel

__all__ = ["BackendSolution", "SolverBackend", "HighsBackend", "highs_available"]


@dataclass
class BackendSolution:
    status: str
    objective: float | None
    values: dict = field(default_factory=dict)
    engine: str = ""


class SolverBackend(Protocol):
    name: str

    def solve(self, model: MilpModel, time_limit: float | None = None) -> BackendSolution:
        ...


def highs_available() -> bool:
    return importlib.util.find_spec("highspy") is not None


class HighsBackend:
    """Solve through HiGHS by reading the exported MPS or LP file."""

    name = "highs"

    def __init__(self, fmt: str = "mps", threads: int = 1, mip_rel_gap: float = 0.0):
        if not highs_available():
            raise ImportError("highspy is not installed; pip install highspy")
        self.fmt = fmt
        self.threads = threads
        self.mip_rel_gap = mip_rel_gap

    def solve(self, model: MilpModel, time_limit: float | None = None) -> BackendSolution:
        import highspy

        text = export_model(model, self.fmt)
        fd, path = tempfile.mkstemp(suffix=f".{self.fmt}")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(text)
            h = highspy.Highs()
            h.setOptionValue("output_flag", False)
            h.setOptionValue("threads", self.threads)
            h.setOptionValue("mip_rel_gap", self.mip_rel_gap)
            if time_limit:
                h.setOptionValue("time_limit", float(time_limit))
            h.readModel(path)
            h.run()
        finally:
            os.unlink(path)
        status = h.getModelStatus()
        ms = highspy.HighsModelStatus
        has_sol = h.getInfo().primal_solution_status == 2
        if status == ms.kOptimal:
            label = "Optimal"
        elif status == ms.kInfeasible:
            label = "Infeasible"
        elif status == ms.kTimeLimit:
            label = "TimeLimit"
        else:
            label = "Feasible" if has_sol else str(status)
        values = {}
        objective = None
        if has_sol:
            sol = h.getSolution().col_value
            lp = h.getLp()
            names = list(lp.col_names_)
            values = dict(zip(names, sol))
            objective = h.getInfo().objective_function_value
        return BackendSolution(label, objective, values, engine=f"highs-{highspy.__name__}")
