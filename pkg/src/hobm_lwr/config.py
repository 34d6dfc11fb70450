"""Project configuration: YAML file -> typed objects in SI units.

Every key is optional; omitted keys take the defaults below. Units are fixed
by key suffix (``_deg``, ``_m``, ``_kg``, ``_s`` ...). Angles are converted to
radians on load.

.. code-block:: yaml

    lwr:
      preset: lwr          # or give `dh` and `links` inline
    hobm:
      preset: hobm
      base_offset_m: [1.27, 0.28, 0.57]
      base_yaw_deg: 0.0
      elbow: 1
    payload_mass_kg: 50.0
    singularity_tolerance: 1.0e-6
    trajectory:
      joint: 1
      theta_initial_deg: -40.0
      theta_final_deg: 40.0
      ramp_time_s: 0.2
      total_time_s: 2.0
      fixed_joints_deg: [-45.0, 90.0, -225.0, 90.0, 0.0]
      dt_s: 0.001
    ringdown:
      cable_length_m: 0.5
      viscous_friction_Nms_rad: 0.0
      coulomb_friction_Nm: 1.0
      deceleration_m_s2: 2.5
      dt_s: 0.001
      duration_s: 10.0
      settling_band_deg: 0.5
    doe:
      axial: rotatable
      n_center: 6
      ringdown_duration_s: 3.0
      factors:                    # span reached by the axial points
        friction: {min: 0.0, max: 5.0}
        mass: {min: 10.0, max: 100.0}
        acceleration: {min: 0.5, max: 5.0}
      friction_grid: {min: 0.0, max: 5.0, n: 11}
      mass_grid: {min: 10.0, max: 100.0, n: 10}
      effort_limit_N: 120.0

Inline chains use ``dh`` rows ``{a_m, d_m, alpha_deg, theta_offset_deg,
joint}`` and ``links`` entries ``{mass_kg, com_m, inertia_kgm2}`` where the
inertia is either three principal moments or a full 3x3 matrix.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from hobm_lwr.coupling import CoupledSystem
from hobm_lwr.doe import FACE_CENTERED, ROTATABLE, CCDesign, FactorSpec, ccd_generate
from hobm_lwr.dynamics import LinkInertia, RobotModel
from hobm_lwr.errors import ConfigError
from hobm_lwr.kinematics import DHRow, JointType, KinematicChain, RigidTransform
from hobm_lwr.oscillation import RingdownScenario
from hobm_lwr.presets import PRESETS
from hobm_lwr.trajectory import TrapezoidalProfile

DEFAULTS = {
    "lwr": {"preset": "lwr"},
    "hobm": {
        "preset": "hobm",
        "base_offset_m": [1.27, 0.28, 0.57],
        "base_yaw_deg": 0.0,
        "elbow": 1,
    },
    "payload_mass_kg": 50.0,
    "singularity_tolerance": 1e-6,
    "trajectory": {
        "joint": 1,
        "theta_initial_deg": -40.0,
        "theta_final_deg": 40.0,
        "ramp_time_s": 0.2,
        "total_time_s": 2.0,
        "fixed_joints_deg": [-45.0, 90.0, -225.0, 90.0, 0.0],
        "dt_s": 0.001,
    },
    "ringdown": {
        "cable_length_m": 0.5,
        "viscous_friction_Nms_rad": 0.0,
        "coulomb_friction_Nm": 1.0,
        "deceleration_m_s2": 2.5,
        "dt_s": 0.001,
        "duration_s": 10.0,
        "settling_band_deg": 0.5,
    },
    "doe": {
        "axial": ROTATABLE,
        "n_center": 6,
        "ringdown_duration_s": 3.0,
        "factors": {
            "friction": {"min": 0.0, "max": 5.0},
            "mass": {"min": 10.0, "max": 100.0},
            "acceleration": {"min": 0.5, "max": 5.0},
        },
        "friction_grid": {"min": 0.0, "max": 5.0, "n": 11},
        "mass_grid": {"min": 10.0, "max": 100.0, "n": 10},
        "effort_limit_N": 120.0,
    },
}

FACTOR_UNITS = {"friction": "Nm", "mass": "kg", "acceleration": "m_s2"}


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        where = f"{path}{key}"
        if key not in base:
            if base and path not in ("lwr.", "hobm.", "doe.factors."):
                raise ConfigError(f"unknown config key {where!r}")
            out[key] = value
        elif isinstance(base[key], dict) and key != "factors":
            if not isinstance(value, dict):
                raise ConfigError(f"config key {where!r} must be a mapping")
            out[key] = _merge(base[key], value, where + ".")
        elif key == "factors":
            if not isinstance(value, dict):
                raise ConfigError("doe.factors must be a mapping")
            out[key] = value
        else:
            out[key] = value
    return out


def _float(section: dict, key: str, where: str, positive=False, nonneg=False) -> float:
    try:
        v = float(section[key])
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"{where}.{key} must be a number") from exc
    if not math.isfinite(v):
        raise ConfigError(f"{where}.{key} must be finite")
    if positive and not v > 0:
        raise ConfigError(f"{where}.{key} must be positive")
    if nonneg and v < 0:
        raise ConfigError(f"{where}.{key} must be non-negative")
    return v


def _vector(value, n: int, where: str) -> np.ndarray:
    try:
        v = np.asarray(value, dtype=float).reshape(-1)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where} must be a list of numbers") from exc
    if v.size != n:
        raise ConfigError(f"{where} must have {n} entries")
    return v


def _inline_model(section: dict, where: str, base_pose: RigidTransform) -> RobotModel:
    try:
        rows = []
        for r in section["dh"]:
            rows.append(DHRow(
                math.radians(float(r.get("theta_offset_deg", 0.0))),
                float(r.get("a_m", 0.0)),
                float(r.get("d_m", 0.0)),
                math.radians(float(r.get("alpha_deg", 0.0))),
                JointType(r.get("joint", "revolute")),
            ))
        links = []
        for l in section["links"]:
            inertia = np.asarray(l.get("inertia_kgm2", [0.0, 0.0, 0.0]), dtype=float)
            if inertia.shape == (3,):
                inertia = np.diag(inertia)
            links.append(LinkInertia(float(l["mass_kg"]), l.get("com_m", [0.0, 0.0, 0.0]), inertia))
        gravity = section.get("gravity_m_s2", [0.0, 0.0, -9.81])
        return RobotModel(KinematicChain(tuple(rows), base_pose), tuple(links), gravity)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid inline model in {where}: {exc}") from exc


def model_from_section(section: dict, where: str, base_pose: RigidTransform | None = None) -> RobotModel:
    base_pose = base_pose or RigidTransform.identity()
    if "dh" in section or "links" in section:
        return _inline_model(section, where, base_pose)
    name = section.get("preset")
    if name not in PRESETS:
        raise ConfigError(f"{where}: unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")
    return PRESETS[name](base_pose)


@dataclass
class ProjectConfig:
    raw: dict

    # --- models ---------------------------------------------------------------

    @property
    def lwr(self) -> RobotModel:
        return model_from_section(self.raw["lwr"], "lwr")

    @property
    def hobm(self) -> RobotModel:
        return model_from_section(self.raw["hobm"], "hobm")

    @property
    def hobm_base(self) -> RigidTransform:
        h = self.raw["hobm"]
        xyz = _vector(h.get("base_offset_m"), 3, "hobm.base_offset_m")
        return RigidTransform.from_translation(xyz, math.radians(_float(h, "base_yaw_deg", "hobm")))

    def system(self) -> CoupledSystem:
        elbow = self.raw["hobm"].get("elbow", 1)
        if elbow not in (1, -1):
            raise ConfigError("hobm.elbow must be 1 or -1")
        tol = _float(self.raw, "singularity_tolerance", "config", positive=True)
        try:
            return CoupledSystem(
                self.lwr,
                self.hobm,
                _float(self.raw, "payload_mass_kg", "config", nonneg=True),
                self.hobm_base,
                tol,
                elbow,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    # --- trajectory -------------------------------------------------------------

    @property
    def joint_index(self) -> int:
        j = self.raw["trajectory"].get("joint", 1)
        if not isinstance(j, int) or not 1 <= j <= self.lwr.dof:
            raise ConfigError(f"trajectory.joint must be an integer in 1..{self.lwr.dof}")
        return j - 1

    def profile(self) -> TrapezoidalProfile:
        t = self.raw["trajectory"]
        try:
            return TrapezoidalProfile.from_degrees(
                _float(t, "theta_initial_deg", "trajectory"),
                _float(t, "theta_final_deg", "trajectory"),
                _float(t, "ramp_time_s", "trajectory", nonneg=True),
                _float(t, "total_time_s", "trajectory", nonneg=True),
            )
        except ValueError as exc:
            raise ConfigError(f"trajectory: {exc}") from exc

    def fixed_joints(self) -> np.ndarray:
        t = self.raw["trajectory"]
        return np.radians(_vector(t.get("fixed_joints_deg"), self.lwr.dof - 1, "trajectory.fixed_joints_deg"))

    @property
    def dt(self) -> float:
        return _float(self.raw["trajectory"], "dt_s", "trajectory", positive=True)

    # --- ringdown ---------------------------------------------------------------

    def ringdown_scenario(self, duration: float | None = None) -> RingdownScenario:
        r = self.raw["ringdown"]
        kwargs = dict(
            cable_length=_float(r, "cable_length_m", "ringdown", positive=True),
            viscous_friction=_float(r, "viscous_friction_Nms_rad", "ringdown", nonneg=True),
            coulomb_friction=_float(r, "coulomb_friction_Nm", "ringdown", nonneg=True),
            deceleration=_float(r, "deceleration_m_s2", "ringdown", nonneg=True),
            dt=_float(r, "dt_s", "ringdown", positive=True),
            duration=_float(r, "duration_s", "ringdown", positive=True) if duration is None else duration,
        )
        try:
            return RingdownScenario.reference(
                self.system(), self.profile(), self.fixed_joints(), self.joint_index, **kwargs
            )
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"ringdown: {exc}") from exc

    @property
    def settling_band(self) -> float:
        return math.radians(_float(self.raw["ringdown"], "settling_band_deg", "ringdown", positive=True))

    # --- doe --------------------------------------------------------------------

    def design(self) -> CCDesign:
        d = self.raw["doe"]
        axial = d.get("axial", ROTATABLE)
        if axial not in (ROTATABLE, FACE_CENTERED):
            raise ConfigError(f"doe.axial must be {ROTATABLE!r} or {FACE_CENTERED!r}")
        n_center = d.get("n_center", 6)
        if not isinstance(n_center, int) or n_center < 1:
            raise ConfigError("doe.n_center must be a positive integer")
        factors_cfg = d.get("factors") or {}
        k = len(factors_cfg)
        if k < 2:
            raise ConfigError("doe.factors needs at least two factors")
        alpha = (2.0**k) ** 0.25 if axial == ROTATABLE else 1.0
        factors = []
        for name, spec in factors_cfg.items():
            lo = _float(spec, "min", f"doe.factors.{name}")
            hi = _float(spec, "max", f"doe.factors.{name}")
            if not lo < hi:
                raise ConfigError(f"doe.factors.{name}: min must be below max")
            factors.append(FactorSpec.spanning(name, lo, hi, alpha))
        return ccd_generate(factors, axial, n_center)

    def grid(self, key: str) -> np.ndarray:
        g = self.raw["doe"].get(key) or {}
        n = g.get("n", 0)
        if not isinstance(n, int) or n < 1:
            raise ConfigError(f"doe.{key}.n must be a positive integer")
        return np.linspace(_float(g, "min", f"doe.{key}"), _float(g, "max", f"doe.{key}"), n)

    @property
    def doe_duration(self) -> float:
        return _float(self.raw["doe"], "ringdown_duration_s", "doe", positive=True)

    @property
    def effort_limit(self) -> float:
        return _float(self.raw["doe"], "effort_limit_N", "doe", positive=True)


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> ProjectConfig:
    data = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            data = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config root must be a mapping")
    merged = _merge(DEFAULTS, data)
    if overrides:
        merged = _merge(merged, overrides)
    return ProjectConfig(merged)
