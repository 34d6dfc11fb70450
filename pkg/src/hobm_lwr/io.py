"""CSV writers/readers for simulation series, designs and fitted models.

Floats are written with ``repr`` so identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from hobm_lwr.coupling import CoupledSample
from hobm_lwr.doe import CCDesign, FactorSpec, LimitSurface, QuadraticModel, term_names
from hobm_lwr.errors import ConfigError
from hobm_lwr.oscillation import RingdownSeries

UNITS = {"friction": "Nm", "mass": "kg", "acceleration": "m_s2"}


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    return repr(float(x))


def write_rows(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    Path(path).write_text(buf.getvalue())


def read_rows(path) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise ConfigError(f"{path} is empty")
    return rows[0], rows[1:]


# --- coupled torques --------------------------------------------------------------


def torque_header(dof: int) -> list[str]:
    return (
        ["t_s", "theta_driven_deg"]
        + [f"tau_lm_{i + 1}_Nm" for i in range(dof)]
        + [f"tau_total_{i + 1}_Nm" for i in range(dof)]
        + ["f_hobm_x_N", "f_hobm_y_N", "f_hobm_z_N"]
    )


def write_torques(path, samples: Sequence[CoupledSample], joint: int = 0) -> None:
    dof = samples[0].tau_lm.size if samples else 6
    rows = (
        [s.t, math.degrees(s.theta.q[joint]), *s.tau_lm, *s.tau_total, *s.f_hobm.force]
        for s in samples
    )
    write_rows(path, torque_header(dof), rows)


# --- ringdown ---------------------------------------------------------------------

RINGDOWN_HEADER = [
    "t_s", "phi1_deg", "phi2_deg", "phid1_deg_s", "phid2_deg_s",
    "fx_N", "fy_N", "fz_N", "energy_J",
]


def write_ringdown(path, series: RingdownSeries) -> None:
    phi = np.degrees(series.phi)
    phid = np.degrees(series.phid)
    rows = (
        [series.t[i], *phi[i], *phid[i], *series.force[i], series.energy[i]]
        for i in range(len(series))
    )
    write_rows(path, RINGDOWN_HEADER, rows)


# --- design of experiments ----------------------------------------------------------


def _unit(name: str) -> str:
    return UNITS.get(name, "")


def design_header(names: Sequence[str]) -> list[str]:
    return (
        ["run", "kind"]
        + [f"coded_{n}" for n in names]
        + [f"{n}_{_unit(n)}" if _unit(n) else n for n in names]
        + ["response_N"]
    )


def write_design(path, design: CCDesign, responses=None) -> None:
    phys = design.physical_points
    kinds = design.point_kinds()
    rows = []
    for i, p in enumerate(design.points):
        r = "" if responses is None else responses[i]
        rows.append([str(i), kinds[i], *p, *phys[i], r])
    write_rows(path, design_header(design.names), rows)


def read_design(path) -> tuple[CCDesign, np.ndarray]:
    """Rebuild the design (coding recovered from coded/physical pairs) and responses."""
    header, rows = read_rows(path)
    coded_cols = [i for i, h in enumerate(header) if h.startswith("coded_")]
    names = [header[i][len("coded_"):] for i in coded_cols]
    if len(names) < 2 or "response_N" not in header:
        raise ConfigError(f"{path}: not a design file (need coded_* columns and response_N)")
    phys_cols = []
    for n in names:
        col = f"{n}_{_unit(n)}" if _unit(n) else n
        if col not in header:
            raise ConfigError(f"{path}: missing physical column {col!r}")
        phys_cols.append(header.index(col))
    ri = header.index("response_N")
    try:
        coded = np.array([[float(r[i]) for i in coded_cols] for r in rows])
        phys = np.array([[float(r[i]) for i in phys_cols] for r in rows])
        resp = np.array([float(r[ri]) for r in rows])
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"{path}: non-numeric or missing design value ({exc})") from exc
    factors = []
    for j, n in enumerate(names):
        A = np.column_stack([np.ones(len(coded)), coded[:, j]])
        (center, half), *_ = np.linalg.lstsq(A, phys[:, j], rcond=None)
        if not half > 0:
            raise ConfigError(f"{path}: factor {n!r} has no spread")
        factors.append(FactorSpec(n, center - half, center + half))
    n_center = int(np.sum(np.all(coded == 0.0, axis=1)))
    axial = float(np.max(np.abs(coded)))
    return CCDesign(tuple(factors), axial, max(n_center, 1), coded), resp


MODEL_HEADER = ["kind", "name", "value", "low", "high"]


def write_model(path, model: QuadraticModel) -> None:
    rows = [["factor", f.name, "", f.low, f.high] for f in model.factors]
    rows += [["coefficient", name, c, "", ""] for name, c in model.table()]
    rows += [
        ["stat", "r_squared", model.r_squared, "", ""],
        ["stat", "max_residual", model.max_residual, "", ""],
        ["stat", "coded_limit", model.coded_limit, "", ""],
    ]
    write_rows(path, MODEL_HEADER, rows)


def read_model(path) -> QuadraticModel:
    header, rows = read_rows(path)
    if header != MODEL_HEADER:
        raise ConfigError(f"{path}: not a model file")
    try:
        factors = [FactorSpec(r[1], float(r[3]), float(r[4])) for r in rows if r[0] == "factor"]
        coeff = {r[1]: float(r[2]) for r in rows if r[0] == "coefficient"}
        stats = {r[1]: float(r[2]) for r in rows if r[0] == "stat"}
        names = term_names([f.name for f in factors])
        coefficients = np.array([coeff[n] for n in names])
    except (ValueError, KeyError, IndexError) as exc:
        raise ConfigError(f"{path}: malformed model file ({exc})") from exc
    return QuadraticModel(
        tuple(factors), coefficients,
        stats.get("r_squared", float("nan")),
        stats.get("max_residual", float("nan")),
        stats.get("coded_limit", 1.0),
    )


LIMIT_HEADER = ["friction_Nm", "mass_kg", "accel_limit_m_s2", "status"]


def write_limit(path, surface: LimitSurface) -> None:
    rows = []
    for i, f in enumerate(surface.friction):
        for j, m in enumerate(surface.mass):
            rows.append([f, m, surface.values[i, j], surface.status[i, j]])
    write_rows(path, LIMIT_HEADER, rows)
