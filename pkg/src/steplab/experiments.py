"""Named, reproducible experiment runs and their CSV outputs.

Each experiment has a frozen canonical spec (grid size, tolerance, method
constants) so that two runs from equal specs produce byte-identical CSV
files. A manifest.json next to the outputs records the spec and a sha256
checksum per file.
"""

from __future__ import annotations

import hashlib
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List

import numpy as np

from . import descent, filters, midpoint
from .operators import GridSpec, QuadraticObjective, laplacian_2d

EXPERIMENT_NAMES = ("table1", "fig_stepsizes", "fig_lsd_errors", "fig_compare",
                    "fig_filter", "midpoint_search")

COMPARE_METHODS = ("sd", "lsd", "cg", "nes")


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    parameters: dict

    def __post_init__(self):
        if self.name not in EXPERIMENT_NAMES:
            raise ValueError(f"unknown experiment {self.name!r}")

    def to_dict(self) -> dict:
        return {"name": self.name, "parameters": dict(self.parameters)}

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        return cls(name=data["name"], parameters=dict(data["parameters"]))


_DEFAULT_PARAMETERS = {
    "table1": {"m_values": [31, 63, 127, 255], "b": 1.0, "tol": 1e-6,
               "max_iter": 100_000},
    "fig_stepsizes": {"m": 63, "b": 1.0, "tol": 1e-6, "max_iter": 100_000},
    "fig_lsd_errors": {"m": 63, "b": 1.0, "tol": 1e-6, "max_iter": 100_000},
    "fig_compare": {"m": 63, "b": 1.0, "tol": 1e-6, "max_iter": 100_000,
                    "momentum": 0.95},
    "fig_filter": {"t": 1.0, "beta": 0.5, "s_max": 10.0, "points": 1000},
    "midpoint_search": {"gamma": 1.0, "p_values": [0.5, 1.0, 2.0],
                        "c_values": [0.0, 1.5, 3.0, 4.5], "omega_ref": 16.0},
}


def default_spec(name: str, **overrides) -> ExperimentSpec:
    params = dict(_DEFAULT_PARAMETERS[name])
    unknown = set(overrides) - set(params)
    if unknown:
        raise ValueError(f"unknown parameters for {name}: {sorted(unknown)}")
    params.update(overrides)
    return ExperimentSpec(name=name, parameters=params)


def poisson_objective(m: int, b_value: float = 1.0) -> QuadraticObjective:
    grid = GridSpec(m)
    return QuadraticObjective(laplacian_2d(grid), np.full(grid.n, b_value))


def _fmt(value) -> str:
    return f"{value:.17g}"


# -- table 1: maximum LSD step size vs spatial step ---------------------------

def run_table1(spec: ExperimentSpec) -> List[dict]:
    """Largest LSD step size on the Poisson objective for each grid size.

    The recorded ratio h_max / (xi^2/4) shows by how much the chaotic steps
    overshoot the constant-step stability limit.
    """
    p = spec.parameters
    rows = []
    for m in p["m_values"]:
        grid = GridSpec(m)
        obj = poisson_objective(m, p["b"])
        cfg = descent.RunConfig(tol=p["tol"], max_iter=p["max_iter"])
        trace = descent.gradient_descent(obj, descent.LaggedSteepestDescentStep(),
                                         cfg, method="lsd")
        limit = grid.xi ** 2 / 4.0
        h_max = float(trace.alpha.max())
        rows.append({
            "xi": grid.xi,
            "m": m,
            "h_max": h_max,
            "fixed_step_limit": limit,
            "ratio": h_max / limit,
            "iterations": trace.iterations,
            "converged": trace.converged,
        })
    return rows


def render_table1_csv(rows: List[dict]) -> str:
    out = io.StringIO()
    out.write("xi,m,h_max,fixed_step_limit,ratio,iterations\n")
    for r in rows:
        out.write(f"{_fmt(r['xi'])},{r['m']},{_fmt(r['h_max'])},"
                  f"{_fmt(r['fixed_step_limit'])},{_fmt(r['ratio'])},{r['iterations']}\n")
    return out.getvalue()


# -- LSD step sizes and error traces on the figure grid -----------------------

def run_lsd_trace(spec: ExperimentSpec, record_ferr: bool) -> descent.IterationTrace:
    p = spec.parameters
    obj = poisson_objective(p["m"], p["b"])
    cfg = descent.RunConfig(tol=p["tol"], max_iter=p["max_iter"],
                            record_ferr=record_ferr)
    return descent.gradient_descent(obj, descent.LaggedSteepestDescentStep(),
                                    cfg, method="lsd")


def render_stepsizes_csv(trace: descent.IterationTrace, limit: float) -> str:
    out = io.StringIO()
    out.write("k,alpha,limit\n")
    for i, a in enumerate(trace.alpha, start=1):
        out.write(f"{i},{_fmt(a)},{_fmt(limit)}\n")
    return out.getvalue()


# -- four-method comparison ----------------------------------------------------

def run_compare(spec: ExperimentSpec) -> Dict[str, descent.IterationTrace]:
    """SD, LSD, CG and Nesterov on the same Poisson objective, with oracle."""
    p = spec.parameters
    obj = poisson_objective(p["m"], p["b"])

    def cfg():
        return descent.RunConfig(tol=p["tol"], max_iter=p["max_iter"],
                                 record_ferr=True)

    return {
        "sd": descent.gradient_descent(obj, descent.SteepestDescentStep(), cfg(),
                                       method="sd"),
        "lsd": descent.gradient_descent(obj, descent.LaggedSteepestDescentStep(),
                                        cfg(), method="lsd"),
        "cg": descent.conjugate_gradient(obj, cfg()),
        "nes": descent.nesterov(obj, p["momentum"], cfg()),
    }


def render_compare_csv(traces: Dict[str, descent.IterationTrace]) -> str:
    """Er and Ef columns of all methods aligned on the iteration counter."""
    out = io.StringIO()
    header = ["k"]
    for name in COMPARE_METHODS:
        header += [f"Er_{name}", f"Ef_{name}"]
    out.write(",".join(header) + "\n")
    length = max(traces[name].iterations for name in COMPARE_METHODS)
    for i in range(length):
        cells = [str(i + 1)]
        for name in COMPARE_METHODS:
            tr = traces[name]
            if i < tr.iterations:
                cells += [_fmt(tr.er[i]), _fmt(tr.ef[i])]
            else:
                cells += ["", ""]
        out.write(",".join(cells) + "\n")
    return out.getvalue()


# -- filter curves -------------------------------------------------------------

def run_filter_curves(spec: ExperimentSpec) -> str:
    p = spec.parameters
    s_grid = np.linspace(0.0, p["s_max"], p["points"])
    return filters.render_filter_curves_csv(p["t"], p["beta"], s_grid)


# -- midpoint instability search -----------------------------------------------

def run_midpoint_search(spec: ExperimentSpec) -> midpoint.SearchReport:
    p = spec.parameters
    return midpoint.instability_search(gamma=p["gamma"],
                                       p_values=tuple(p["p_values"]),
                                       c_values=tuple(p["c_values"]),
                                       omega_ref=p["omega_ref"])


# -- experiment dispatch and manifest -------------------------------------------

def run_experiment(spec: ExperimentSpec, out_dir) -> dict:
    """Run one named experiment, write its CSV files, return a manifest entry."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files: Dict[str, str] = {}
    if spec.name == "table1":
        files["table1.csv"] = render_table1_csv(run_table1(spec))
    elif spec.name == "fig_stepsizes":
        trace = run_lsd_trace(spec, record_ferr=False)
        limit = GridSpec(spec.parameters["m"]).xi ** 2 / 4.0
        files["stepsizes.csv"] = render_stepsizes_csv(trace, limit)
    elif spec.name == "fig_lsd_errors":
        trace = run_lsd_trace(spec, record_ferr=True)
        files["lsd_trace.csv"] = descent.render_trace_csv(trace)
    elif spec.name == "fig_compare":
        files["compare.csv"] = render_compare_csv(run_compare(spec))
    elif spec.name == "fig_filter":
        files["filter_curves.csv"] = run_filter_curves(spec)
    elif spec.name == "midpoint_search":
        files["midpoint_search.csv"] = midpoint.render_search_csv(run_midpoint_search(spec))
    outputs = []
    for name, text in files.items():
        path = out_dir / name
        path.write_text(text)
        outputs.append({"file": name, "sha256": hashlib.sha256(text.encode()).hexdigest()})
    return {"name": spec.name, "spec": spec.to_dict(), "outputs": outputs}


def write_manifest(out_dir, entries: List[dict]) -> Path:
    path = Path(out_dir) / "manifest.json"
    payload = json.dumps({"experiments": entries}, indent=2, sort_keys=True) + "\n"
    path.write_text(payload)
    return path
