"""Central-composite designs, quadratic response surfaces and constraint limits."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from hobm_lwr.errors import RankDeficientError

ROTATABLE = "rotatable"
FACE_CENTERED = "face_centered"


@dataclass(frozen=True)
class FactorSpec:
    """A factor coded so that ``low`` maps to -1 and ``high`` to +1."""

    name: str
    low: float
    high: float

    def __post_init__(self):
        if not self.low < self.high:
            raise ValueError(f"factor {self.name!r}: low must be below high")

    @classmethod
    def spanning(cls, name: str, lo: float, hi: float, axial_distance: float) -> "FactorSpec":
        """Factor whose axial points (coded +/- axial_distance) land on ``lo`` and ``hi``."""
        center = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo) / axial_distance
        return cls(name, center - half, center + half)

    @property
    def center(self) -> float:
        return 0.5 * (self.low + self.high)

    @property
    def half_range(self) -> float:
        return 0.5 * (self.high - self.low)

    def encode(self, x):
        return (np.asarray(x, dtype=float) - self.center) / self.half_range

    def decode(self, c):
        return self.center + np.asarray(c, dtype=float) * self.half_range


@dataclass(frozen=True)
class CCDesign:
    factors: tuple[FactorSpec, ...]
    axial_distance: float
    n_center: int
    points: np.ndarray  # (n, k) coded

    @property
    def k(self) -> int:
        return len(self.factors)

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.factors]

    def decode(self, coded) -> np.ndarray:
        coded = np.atleast_2d(coded)
        return np.column_stack([f.decode(coded[:, i]) for i, f in enumerate(self.factors)])

    @property
    def physical_points(self) -> np.ndarray:
        return self.decode(self.points)

    def point_kinds(self) -> list[str]:
        k = self.k
        return ["factorial"] * 2**k + ["axial"] * (2 * k) + ["center"] * self.n_center


def ccd_generate(factors: Sequence[FactorSpec], axial: str = ROTATABLE, n_center: int = 6) -> CCDesign:
    """Factorial corners, then axial points, then centre points."""
    factors = tuple(factors)
    k = len(factors)
    if k < 2:
        raise ValueError("a central-composite design needs at least 2 factors")
    if n_center < 1:
        raise ValueError("n_center must be at least 1")
    if axial == ROTATABLE:
        alpha = (2.0**k) ** 0.25
    elif axial == FACE_CENTERED:
        alpha = 1.0
    else:
        raise ValueError(f"unknown axial variant {axial!r}")
    # first factor varies slowest, standard order reversed for readability
    corners = [list(p) for p in itertools.product((-1.0, 1.0), repeat=k)]
    axials = []
    for i in range(k):
        for s in (-1.0, 1.0):
            p = [0.0] * k
            p[i] = s * alpha
            axials.append(p)
    centers = [[0.0] * k for _ in range(n_center)]
    points = np.array(corners + axials + centers, dtype=float)
    return CCDesign(factors, alpha, n_center, points)


def run_experiments(
    design: CCDesign,
    responder: Callable[[np.ndarray], float],
    max_workers: int | None = None,
) -> np.ndarray:
    """Evaluate ``responder`` on every coded design point, in design order."""

    def one(i):
        try:
            return float(responder(design.points[i].copy()))
        except Exception as exc:
            raise RuntimeError(f"responder failed at design point {i}: {exc}") from exc

    idx = range(len(design.points))
    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers) as pool:
            return np.array(list(pool.map(one, idx)))
    return np.array([one(i) for i in idx])


def quadratic_terms(k: int) -> list[tuple[int, ...]]:
    """Basis exponents: () intercept, (i,) linear, (i, j) interaction, (i, i) square."""
    terms: list[tuple[int, ...]] = [()]
    terms += [(i,) for i in range(k)]
    terms += [(i, j) for i in range(k) for j in range(i + 1, k)]
    terms += [(i, i) for i in range(k)]
    return terms


def basis_matrix(coded: np.ndarray, k: int | None = None) -> np.ndarray:
    coded = np.atleast_2d(np.asarray(coded, dtype=float))
    k = coded.shape[1] if k is None else k
    cols = [np.prod(coded[:, list(t)], axis=1) if t else np.ones(len(coded)) for t in quadratic_terms(k)]
    return np.column_stack(cols)


def term_names(names: Sequence[str]) -> list[str]:
    out = []
    for t in quadratic_terms(len(names)):
        if not t:
            out.append("intercept")
        elif len(t) == 1:
            out.append(names[t[0]])
        elif t[0] == t[1]:
            out.append(f"{names[t[0]]}^2")
        else:
            out.append(f"{names[t[0]]}*{names[t[1]]}")
    return out


class Prediction(NamedTuple):
    value: float
    extrapolated: bool


@dataclass(frozen=True)
class QuadraticModel:
    """Full second-order polynomial over coded factors."""

    factors: tuple[FactorSpec, ...]
    coefficients: np.ndarray
    r_squared: float = float("nan")
    max_residual: float = float("nan")
    coded_limit: float = 1.0  # |coded| beyond this is reported as extrapolation
    terms: tuple = field(init=False)

    def __post_init__(self):
        k = len(self.factors)
        object.__setattr__(self, "coefficients", np.asarray(self.coefficients, dtype=float))
        object.__setattr__(self, "terms", tuple(quadratic_terms(k)))
        if self.coefficients.shape != ((k + 1) * (k + 2) // 2,):
            raise ValueError(f"expected {(k + 1) * (k + 2) // 2} coefficients for {k} factors")

    @property
    def k(self) -> int:
        return len(self.factors)

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.factors]

    @property
    def intercept(self) -> float:
        return float(self.coefficients[0])

    def coefficient(self, *factor_names: str) -> float:
        idx = tuple(sorted(self.names.index(n) for n in factor_names))
        return float(self.coefficients[self.terms.index(idx)])

    def encode(self, physical) -> np.ndarray:
        physical = np.asarray(physical, dtype=float)
        return np.stack([f.encode(physical[..., i]) for i, f in enumerate(self.factors)], axis=-1)

    def evaluate_coded(self, coded) -> np.ndarray:
        return basis_matrix(coded, self.k) @ self.coefficients

    def reordered(self, order: Sequence[int]) -> "QuadraticModel":
        """Same surface with the factors permuted to ``order``."""
        order = list(order)
        factors = tuple(self.factors[i] for i in order)
        new_terms = quadratic_terms(self.k)
        lookup = {t: c for t, c in zip(self.terms, self.coefficients)}
        coeffs = []
        for t in new_terms:
            old = tuple(sorted(order[i] for i in t))
            coeffs.append(lookup[old])
        return QuadraticModel(factors, np.array(coeffs), self.r_squared, self.max_residual, self.coded_limit)

    def table(self) -> list[tuple[str, float]]:
        return list(zip(term_names(self.names), map(float, self.coefficients)))


def fit_quadratic(design: CCDesign, responses, coded_limit: float | None = None) -> QuadraticModel:
    """Least-squares fit of the full quadratic basis to design responses."""
    y = np.asarray(responses, dtype=float)
    X = basis_matrix(design.points, design.k)
    if y.shape != (X.shape[0],):
        raise ValueError(f"{y.size} responses for {X.shape[0]} design points")
    if X.shape[0] < X.shape[1] or np.linalg.matrix_rank(X) < X.shape[1]:
        raise RankDeficientError(
            f"basis matrix has rank {np.linalg.matrix_rank(X)} < {X.shape[1]} coefficients"
        )
    coeffs, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coeffs
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(resid @ resid)
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return QuadraticModel(
        design.factors,
        coeffs,
        r2,
        float(np.max(np.abs(resid))),
        design.axial_distance if coded_limit is None else coded_limit,
    )


def predict(model: QuadraticModel, physical_point) -> Prediction:
    coded = model.encode(physical_point)
    value = float(model.evaluate_coded(coded[None, :])[0])
    return Prediction(value, bool(np.any(np.abs(coded) > model.coded_limit + 1e-12)))


# --- constraint surface -------------------------------------------------------

UNBOUNDED = "unbounded"
INFEASIBLE = "infeasible"
BOUNDED = "bounded"


@dataclass
class LimitSurface:
    friction: np.ndarray
    mass: np.ndarray
    values: np.ndarray  # (n_friction, n_mass) physical acceleration
    status: np.ndarray  # same shape, one of BOUNDED / UNBOUNDED / INFEASIBLE
    effort_limit: float
    accel_range: tuple[float, float]


def _max_admissible(c0: float, c1: float, c2: float, lo: float, hi: float) -> tuple[float, str]:
    """Largest a in [lo, hi] with c0 + c1 a + c2 a^2 <= 0 on all of [lo, a]."""

    def f(a):
        return c0 + c1 * a + c2 * a * a

    scale = max(abs(c0), abs(c1), abs(c2), 1e-300)
    tol = 1e-12 * scale
    if f(lo) > tol:
        return lo, INFEASIBLE
    roots = []
    if abs(c2) > 1e-14 * scale:
        disc = c1 * c1 - 4.0 * c2 * c0
        if disc >= 0:
            sq = math.sqrt(disc)
            # numerically stable pair
            qv = -0.5 * (c1 + math.copysign(sq, c1))
            cand = [qv / c2]
            if qv != 0.0:
                cand.append(c0 / qv)
            roots = sorted(r for r in cand if lo < r < hi)
    elif abs(c1) > 0:
        r = -c0 / c1
        if lo < r < hi:
            roots = [r]
    edges = [lo] + roots + [hi]
    for a, b in zip(edges[:-1], edges[1:]):
        if f(0.5 * (a + b)) > tol:
            return a, BOUNDED
    return hi, UNBOUNDED


def acceleration_limit_surface(
    model: QuadraticModel,
    effort_limit: float,
    friction_grid,
    mass_grid,
    friction_factor: str = "friction",
    mass_factor: str = "mass",
    accel_factor: str = "acceleration",
    coded_range: float | None = None,
) -> LimitSurface:
    """Max admissible acceleration per (friction, mass) cell for an effort limit.

    The search runs over accelerations whose coded value lies within
    ``coded_range`` (default: the model's coded limit). Cells admissible over
    the whole range report the range top; cells violating the limit even at
    the lowest acceleration report ``-inf``.
    """
    names = model.names
    for n in (friction_factor, mass_factor, accel_factor):
        if n not in names:
            raise ValueError(f"factor {n!r} absent from model factors {names}")
    ia, ifr, im = names.index(accel_factor), names.index(friction_factor), names.index(mass_factor)
    if model.k != 3:
        raise ValueError("acceleration limit surface expects exactly three factors")
    span = model.coded_limit if coded_range is None else coded_range
    fa = model.factors[ia]
    friction_grid = np.asarray(friction_grid, dtype=float)
    mass_grid = np.asarray(mass_grid, dtype=float)
    values = np.empty((friction_grid.size, mass_grid.size))
    status = np.empty(values.shape, dtype=object)
    for i, fr in enumerate(friction_grid):
        for j, m in enumerate(mass_grid):
            point = np.zeros(3)
            point[ifr], point[im] = fr, m
            coded = model.encode(point)
            # quadratic in the coded acceleration: sample three values, exact for degree 2
            cvals = []
            for a in (-1.0, 0.0, 1.0):
                c = coded.copy()
                c[ia] = a
                cvals.append(float(model.evaluate_coded(c[None, :])[0]))
            ym, y0, yp = cvals
            c2 = 0.5 * (yp + ym) - y0
            c1 = 0.5 * (yp - ym)
            a_c, st = _max_admissible(y0 - effort_limit, c1, c2, -span, span)
            values[i, j] = float(fa.decode(a_c)) if st != INFEASIBLE else -np.inf
            status[i, j] = st
    return LimitSurface(
        friction_grid, mass_grid, values, status, float(effort_limit),
        (float(fa.decode(-span)), float(fa.decode(span))),
    )


def ringdown_responder(design: CCDesign, scenario, order=("friction", "mass", "acceleration")):
    """Responder decoding a coded point to (Coulomb friction, payload mass, deceleration).

    The response is the peak cable force on the stopped payload.
    """
    idx = [design.names.index(n) for n in order]

    def respond(coded):
        x = design.decode(coded)[0]
        x[np.abs(x) < 1e-12] = 0.0  # axial points decoded onto a zero bound
        return scenario.peak_force(x[idx[0]], x[idx[1]], x[idx[2]])

    return respond
