"""Grid scans over the measurement-basis angles, extremum refinement and the
antisymmetry check."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .cycle import CycleEngine, EngineParams
from .errors import ConfigurationError, InvariantViolation
from .tolerances import DEFAULT_TOLERANCES, Tolerances

TWO_PI = 2.0 * math.pi

ROW_DTYPE = np.dtype([
    ("alpha", float), ("phi", float),
    ("w_ext", float), ("q_m", float), ("q_t", float), ("eta", float), ("ds", float),
    ("xi", float), ("zeta", float), ("delta", float), ("gamma", float),
    ("ok", bool),
])

SLICE_DTYPE = np.dtype([
    ("alpha", float), ("phi", float),
    ("w_ext", float), ("q_m", float), ("eta", float), ("ds", float),
    ("zeta", float), ("delta", float), ("gamma", float),
    ("dp3", float), ("dp4", float),
])


class Objective(enum.Enum):
    MAX_W_EXT = "max_w_ext"
    MAX_ETA = "max_eta"
    MIN_DS = "min_ds"


@dataclass(frozen=True)
class GridSpec:
    """Sweep resolution over alpha in [0, pi] and phi in [0, 2*pi].

    Both grids are endpoint-inclusive so that the map
    (alpha, phi) -> (pi - alpha, phi + pi) sends grid nodes to grid nodes,
    which the symmetry check requires.
    """

    base: EngineParams
    alpha_points: int = 257
    phi_points: int = 257

    def __post_init__(self):
        if self.alpha_points < 3 or self.phi_points < 3:
            raise ConfigurationError("grid needs at least 3 points per axis")

    def alphas(self) -> np.ndarray:
        return np.linspace(0.0, math.pi, self.alpha_points)

    def phis(self) -> np.ndarray:
        return np.linspace(0.0, TWO_PI, self.phi_points)


@dataclass(frozen=True)
class SweepTable:
    grid: GridSpec
    rows: np.ndarray = field(repr=False)  # structured, ROW_DTYPE, row-major
    flagged: int

    def column(self, name: str) -> np.ndarray:
        return self.rows[name]


@dataclass(frozen=True)
class Extremum:
    objective: Objective
    alpha_star: float
    phi_star: float
    value: float
    refinement_rounds: int


def _fill_row(row, alpha: float, phi: float, record, ok: bool) -> None:
    row["alpha"] = alpha
    row["phi"] = phi
    row["w_ext"] = record.w_ext
    row["q_m"] = record.q_m
    row["q_t"] = record.q_t
    row["eta"] = record.eta
    row["ds"] = record.d_s
    row["xi"] = record.probs.xi
    row["zeta"] = record.probs.zeta
    row["delta"] = record.probs.delta
    row["gamma"] = record.probs.gamma
    row["ok"] = ok


def grid_sweep(grid: GridSpec, engine: CycleEngine | None = None) -> SweepTable:
    """Evaluate one cycle per grid node, row-major by (alpha index, phi index).

    Nodes whose cycle invariants fail are kept but flagged; the sweep always
    completes.  Identical specs produce bitwise-identical tables.
    """
    if engine is None:
        engine = CycleEngine(grid.base)
    alphas = grid.alphas()
    phis = grid.phis()
    rows = np.zeros(grid.alpha_points * grid.phi_points, dtype=ROW_DTYPE)
    flagged = 0
    k = 0
    for a in alphas:
        for p in phis:
            record, violations = engine.evaluate_flagged(a, p)
            ok = not violations
            flagged += not ok
            _fill_row(rows[k], a, p, record, ok)
            k += 1
    return SweepTable(grid=grid, rows=rows, flagged=flagged)


def _objective_value(objective: Objective, record) -> float:
    if objective is Objective.MAX_W_EXT:
        return record.w_ext
    if objective is Objective.MAX_ETA:
        return record.eta
    return record.d_s


def _better(objective: Objective, candidate: float, incumbent: float) -> bool:
    if math.isnan(candidate):
        return False
    if objective is Objective.MIN_DS:
        return candidate < incumbent
    return candidate > incumbent


def locate_extrema(
    table: SweepTable,
    objective: Objective,
    engine: CycleEngine | None = None,
    rounds: int = 3,
    local_points: int = 17,
    zoom: float = 10.0,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Extremum:
    """Best grid node, then nested local-grid refinement around the incumbent.

    Each round lays a local_points^2 grid on a window that shrinks by
    ``zoom`` per round; the incumbent is always re-sampled, so the objective
    improves monotonically (asserted within tolerance).
    """
    rows = table.rows
    usable = rows["ok"]
    if objective is Objective.MAX_ETA:
        usable = usable & ~np.isnan(rows["eta"])
        if not usable.any():
            raise ConfigurationError("every row has undefined efficiency")
    col = {Objective.MAX_W_EXT: "w_ext", Objective.MAX_ETA: "eta",
           Objective.MIN_DS: "ds"}[objective]
    values = np.where(usable, rows[col], np.nan)
    idx = int(np.nanargmin(values) if objective is Objective.MIN_DS
              else np.nanargmax(values))
    best_a = float(rows["alpha"][idx])
    best_p = float(rows["phi"][idx])
    best_v = float(rows[col][idx])

    if engine is None:
        engine = CycleEngine(table.grid.base)
    h_a = math.pi / (table.grid.alpha_points - 1)
    h_p = TWO_PI / (table.grid.phi_points - 1)
    for _ in range(rounds):
        prev = best_v
        a_grid = np.linspace(max(0.0, best_a - h_a), min(math.pi, best_a + h_a), local_points)
        p_grid = np.linspace(best_p - h_p, best_p + h_p, local_points)
        for a in a_grid:
            for p in p_grid:
                record, violations = engine.evaluate_flagged(a, p % TWO_PI)
                if violations:
                    continue
                v = _objective_value(objective, record)
                if _better(objective, v, best_v):
                    best_a, best_p, best_v = float(a), float(p % TWO_PI), float(v)
        worse = (best_v < prev - tol.refinement if objective is not Objective.MIN_DS
                 else best_v > prev + tol.refinement)
        if worse:
            raise InvariantViolation(
                "refinement regressed", {"refinement": abs(best_v - prev)}
            )
        h_a /= zoom
        h_p /= zoom
    return Extremum(objective=objective, alpha_star=best_a, phi_star=best_p,
                    value=best_v, refinement_rounds=rounds)


def _partner_indices(grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """Index maps realizing alpha -> pi - alpha and phi -> phi + pi on the grid."""
    alphas = grid.alphas()
    phis = grid.phis()
    a_partner = np.empty(grid.alpha_points, dtype=int)
    for i, a in enumerate(alphas):
        j = int(np.argmin(np.abs(alphas - (math.pi - a))))
        if abs(alphas[j] - (math.pi - a)) > 1e-9:
            raise ConfigurationError("alpha grid not symmetric under alpha -> pi - alpha")
        a_partner[i] = j
    p_partner = np.empty(grid.phi_points, dtype=int)
    for i, p in enumerate(phis):
        target = (p + math.pi) % TWO_PI
        deltas = np.abs(phis - target)
        deltas = np.minimum(deltas, TWO_PI - deltas)
        j = int(np.argmin(deltas))
        if deltas[j] > 1e-9:
            raise ConfigurationError("phi grid not symmetric under phi -> phi + pi")
        p_partner[i] = j
    return a_partner, p_partner


def symmetry_residual(table: SweepTable) -> float:
    """Max paired deviation of w_ext and eta under (alpha, phi) -> (pi-alpha, phi+pi).

    Eta pairs with either side undefined are skipped.  The eta pairs are
    compared in cross-multiplied form |w*q_m' - w'*q_m| (normalized by the
    larger product and the energy scale): a direct eta difference divides by
    the fuel, whose zero curve amplifies roundoff without bound, while the
    cross form carries the identical symmetry content.
    """
    a_partner, p_partner = _partner_indices(table.grid)
    n_p = table.grid.phi_points
    w = table.rows["w_ext"].reshape(table.grid.alpha_points, n_p)
    q_m = table.rows["q_m"].reshape(table.grid.alpha_points, n_p)
    eta = table.rows["eta"].reshape(table.grid.alpha_points, n_p)
    w_m = w[a_partner][:, p_partner]
    q_m_m = q_m[a_partner][:, p_partner]
    eta_m = eta[a_partner][:, p_partner]
    residual = float(np.abs(w - w_m).max())
    both = ~np.isnan(eta) & ~np.isnan(eta_m)
    if both.any():
        hw2 = table.grid.base.hbar_omega ** 2
        scale = np.maximum(hw2, np.maximum(np.abs(w * q_m_m), np.abs(w_m * q_m)))
        cross = np.abs(w * q_m_m - w_m * q_m) / scale
        residual = max(residual, float(cross[both].max()))
    return residual


def slice_profile(
    base: EngineParams,
    fixed: str,
    value: float,
    points: int = 513,
    engine: CycleEngine | None = None,
) -> np.ndarray:
    """Freshly evaluated 1-D profile with one angle pinned.

    ``fixed`` is "alpha" or "phi"; the free angle runs over its full range on
    an endpoint-inclusive grid.
    """
    if fixed not in ("alpha", "phi"):
        raise ConfigurationError("fixed must be 'alpha' or 'phi'")
    if fixed == "alpha" and not (0.0 <= value <= math.pi):
        raise ConfigurationError("fixed alpha outside [0, pi]")
    if fixed == "phi" and not (0.0 <= value <= TWO_PI):
        raise ConfigurationError("fixed phi outside [0, 2*pi]")
    if engine is None:
        engine = CycleEngine(base)
    free = (np.linspace(0.0, TWO_PI, points) if fixed == "alpha"
            else np.linspace(0.0, math.pi, points))
    out = np.zeros(points, dtype=SLICE_DTYPE)
    for k, x in enumerate(free):
        a, p = (value, x) if fixed == "alpha" else (x, value)
        record, _ = engine.evaluate_flagged(a, p)
        row = out[k]
        row["alpha"] = a
        row["phi"] = p
        row["w_ext"] = record.w_ext
        row["q_m"] = record.q_m
        row["eta"] = record.eta
        row["ds"] = record.d_s
        row["zeta"] = record.probs.zeta
        row["delta"] = record.probs.delta
        row["gamma"] = record.probs.gamma
        row["dp3"] = record.dp3
        row["dp4"] = record.dp4
    return out
