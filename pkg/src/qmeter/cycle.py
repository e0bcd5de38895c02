"""The four-stroke cycle and its two energetics paths.

The trace definitions (energies as Tr(rho H) differences along the strokes)
are the ground truth.  The closed-form expressions in terms of transition
probabilities are a derived view; ``crosscheck`` reports the residuals
between the two so every run doubles as a self-test.

Sign bookkeeping: ``w`` is the net work done ON the working substance by the
external agent; the engine delivers ``w_ext = -w``.  The occupation-difference
work formula is implemented as w = +(hbar_omega/2)(dp1 - dp2 + dp3 - dp4),
the sign fixed empirically against the trace path.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvariantViolation, ValidationError
from .measurement import MeasurementBasis, basis_kets, measure
from .propagator import DriveSpec, Segment, time_ordered_propagator
from .qubit_algebra import (
    KET_DOWN,
    KET_PLUS_X,
    KET_MINUS_X,
    KET_UP,
    SIGMA_X,
    SIGMA_Z,
    eigvals_hermitian,
    entropy_from_eigenvalues,
    gibbs_state,
    require_density_matrix,
    require_unitary,
)
from .tolerances import DEFAULT_TOLERANCES, Tolerances


@dataclass(frozen=True)
class EngineParams:
    """Physical and numerical configuration of one cycle evaluation."""

    omega_tau: float
    beta_hbar_omega: float
    alpha: float = 0.0
    phi: float = 0.0
    steps: int = 1024
    hbar_omega: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.omega_tau) and self.omega_tau > 0.0):
            raise ValidationError("omega_tau must be finite and > 0")
        # beta = 0 (infinite temperature) is a legitimate degenerate input
        if not (math.isfinite(self.beta_hbar_omega) and self.beta_hbar_omega >= 0.0):
            raise ValidationError("beta_hbar_omega must be finite and >= 0")
        if not isinstance(self.steps, int) or self.steps < 2:
            raise ValidationError("steps must be an integer >= 2")
        if not (math.isfinite(self.hbar_omega) and self.hbar_omega > 0.0):
            raise ValidationError("hbar_omega must be finite and > 0")


@dataclass(frozen=True)
class TransitionProbs:
    """The four squared overlaps that drive the closed-form energetics."""

    xi: float
    zeta: float
    delta: float
    gamma: float

    def __post_init__(self):
        tol = DEFAULT_TOLERANCES.probability
        for name in ("xi", "zeta", "delta", "gamma"):
            p = getattr(self, name)
            if not (-tol <= p <= 1.0 + tol):
                raise ValidationError(f"{name}={p!r} outside [0, 1]")


@dataclass(frozen=True)
class AnalyticEnergetics:
    w: float
    q_m: float
    q_t: float
    eta: float  # NaN when the fuel denominator vanishes


@dataclass(frozen=True)
class CycleRecord:
    """Everything one cycle evaluation produced, both paths included."""

    params: EngineParams
    rho1: np.ndarray = field(repr=False)
    rho2: np.ndarray = field(repr=False)
    rho3: np.ndarray = field(repr=False)
    rho4: np.ndarray = field(repr=False)
    w1: float
    w2: float
    q_m: float
    q_t: float
    w: float
    eta: float  # NaN when undefined (q_m at or below the fuel threshold)
    s1: float
    s2: float
    s3: float
    s4: float
    d_s: float
    dp1: float
    dp2: float
    dp3: float
    dp4: float
    probs: TransitionProbs
    analytic: AnalyticEnergetics
    residuals: dict[str, float]

    @property
    def w_ext(self) -> float:
        return -self.w

    @property
    def eta_defined(self) -> bool:
        return not math.isnan(self.eta)


@dataclass(frozen=True)
class CrosscheckReport:
    residuals: dict[str, float]
    max_residual: float


@functools.lru_cache(maxsize=32)
def _propagator_pair(omega_tau: float, steps: int) -> tuple[np.ndarray, np.ndarray]:
    u = time_ordered_propagator(DriveSpec(tau=omega_tau, segment=Segment.I), steps).u
    v = time_ordered_propagator(DriveSpec(tau=omega_tau, segment=Segment.II), steps).u
    u.setflags(write=False)
    v.setflags(write=False)
    return u, v


def transition_probabilities(
    u: np.ndarray,
    v: np.ndarray,
    basis: MeasurementBasis,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> TransitionProbs:
    """Squared overlaps (xi, zeta, delta, gamma) for propagators u, v and a basis.

    zeta and xi are transitions out of the ground state of the initial
    Hamiltonian under u; gamma is the transition from chi1 to the excited
    initial eigenstate under v.  delta is the overlap of chi2 with the ground
    eigenstate of the mid-cycle Hamiltonian, taken directly (no propagator):
    only this choice makes the closed-form energetics agree with the trace
    path identically, which the crosscheck enforces at 1e-8.
    """
    u = require_unitary(u, "u", tol.unitary_input)
    v = require_unitary(v, "v", tol.unitary_input)
    u_down = u @ KET_DOWN
    zeta = abs(np.vdot(basis.chi2, u_down)) ** 2
    xi = abs(np.vdot(KET_PLUS_X, u_down)) ** 2
    delta = abs(np.vdot(basis.chi2, KET_MINUS_X)) ** 2
    v_chi1 = v @ basis.chi1
    gamma = abs(np.vdot(KET_UP, v_chi1)) ** 2
    # completeness against the complementary amplitudes
    comp = (
        abs(zeta + abs(np.vdot(basis.chi1, u_down)) ** 2 - 1.0),
        abs(xi + abs(np.vdot(KET_MINUS_X, u_down)) ** 2 - 1.0),
        abs(delta + abs(np.vdot(basis.chi1, KET_MINUS_X)) ** 2 - 1.0),
        abs(gamma + abs(np.vdot(KET_DOWN, v_chi1)) ** 2 - 1.0),
    )
    worst = max(comp)
    if worst > tol.probability:
        raise ValidationError(f"transition probabilities not complete (residual {worst:.3e})")
    return TransitionProbs(xi=float(xi), zeta=float(zeta), delta=float(delta), gamma=float(gamma))


def occupation_deltas(
    probs: TransitionProbs, beta_hbar_omega: float
) -> tuple[float, float, float, float]:
    """Ground-minus-excited occupation differences after each stroke."""
    dp1 = math.tanh(0.5 * beta_hbar_omega)
    dp2 = dp1 * (1.0 - 2.0 * probs.xi)
    dp3 = dp1 * (1.0 - 2.0 * probs.delta) * (1.0 - 2.0 * probs.zeta)
    dp4 = dp1 * (1.0 - 2.0 * probs.gamma) * (1.0 - 2.0 * probs.zeta)
    return dp1, dp2, dp3, dp4


def analytic_energetics(
    probs: TransitionProbs,
    beta_hbar_omega: float,
    hbar_omega: float = 1.0,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> AnalyticEnergetics:
    """Closed-form energetics from the transition probabilities.

    The efficiency is evaluated through both equivalent forms (heat ratio and
    occupation ratio) and their agreement is enforced at ``tol.eta_forms``.
    """
    dp1, dp2, dp3, dp4 = occupation_deltas(probs, beta_hbar_omega)
    half = 0.5 * hbar_omega
    w = half * (dp1 - dp2 + dp3 - dp4)
    q_m = half * (dp2 - dp3)
    one_2z = 1.0 - 2.0 * probs.zeta
    q_t = half * ((1.0 - 2.0 * probs.gamma) * one_2z - 1.0) * dp1
    den_occ = dp2 - dp3
    den_heat = (1.0 - 2.0 * probs.delta) * one_2z - (1.0 - 2.0 * probs.xi)
    eta = float("nan")
    if abs(den_occ) > tol.fuel:
        num_occ = dp1 - dp4
        eta_occ = 1.0 - num_occ / den_occ
        eta = eta_occ
        if abs(den_heat) > tol.fuel:
            eta_heat = 1.0 - ((1.0 - 2.0 * probs.gamma) * one_2z - 1.0) / den_heat
            # one algebraic identity, so any disagreement is roundoff; the
            # noise floor scales with |eta| and with the cancellation in the
            # numerator/denominator subtractions, and the bound must follow
            # it (at well-conditioned nodes this is the plain 1e-12 check)
            kappa = (abs(dp1) + abs(dp4)) / max(abs(num_occ), 1e-300) + (
                abs(dp2) + abs(dp3)) / max(abs(den_occ), 1e-300)
            scale = max(1.0, abs(eta_occ), abs(eta_heat)) * max(1.0, kappa)
            if abs(eta_heat - eta_occ) > tol.eta_forms * scale:
                raise InvariantViolation(
                    "efficiency forms disagree",
                    {"eta_forms": abs(eta_heat - eta_occ) / scale},
                )
    return AnalyticEnergetics(w=w, q_m=q_m, q_t=q_t, eta=eta)


class CycleEngine:
    """Reusable cycle evaluator for fixed (omega_tau, beta, steps).

    The propagators and thermal pieces do not depend on the measurement
    angles, so sweeps build one engine and evaluate many (alpha, phi) nodes.
    ``u_override``/``v_override`` are test hooks replacing the stroke
    propagators with arbitrary unitaries.
    """

    def __init__(
        self,
        params: EngineParams,
        tol: Tolerances = DEFAULT_TOLERANCES,
        u_override: np.ndarray | None = None,
        v_override: np.ndarray | None = None,
    ):
        self.params = params
        self.tol = tol
        hw = params.hbar_omega
        self.h1 = 0.5 * hw * SIGMA_Z
        self.h2 = 0.5 * hw * SIGMA_X
        if u_override is None and v_override is None:
            self.u, self.v = _propagator_pair(params.omega_tau, params.steps)
        else:
            self.u = require_unitary(
                u_override if u_override is not None else
                _propagator_pair(params.omega_tau, params.steps)[0], "u", tol.unitary_input)
            self.v = require_unitary(
                v_override if v_override is not None else
                _propagator_pair(params.omega_tau, params.steps)[1], "v", tol.unitary_input)
        self.rho1 = gibbs_state(self.h1, params.beta_hbar_omega / hw)
        self.rho2 = self.u @ self.rho1 @ self.u.conj().T
        require_density_matrix(self.rho2, "rho2", tol)
        self.s1 = entropy_from_eigenvalues(*eigvals_hermitian(self.rho1), tol)
        self.s2 = entropy_from_eigenvalues(*eigvals_hermitian(self.rho2), tol)
        self.e1 = float(np.trace(self.rho1 @ self.h1).real)
        self.e2 = float(np.trace(self.rho2 @ self.h2).real)

    def evaluate(self, alpha: float, phi: float) -> CycleRecord:
        """Evaluate one node; raises InvariantViolation on any failed invariant."""
        record, violations = self.evaluate_flagged(alpha, phi)
        if violations:
            raise InvariantViolation(
                "cycle invariants violated: " + ", ".join(sorted(violations)), violations
            )
        return record

    def evaluate_flagged(self, alpha: float, phi: float) -> tuple[CycleRecord, dict[str, float]]:
        """Like evaluate, but returns (record, violations) instead of raising.

        Sweeps use this to flag bad nodes and keep going.
        """
        p = self.params
        hw = p.hbar_omega
        basis = basis_kets(alpha, phi, self.tol)
        rho3, _ = measure(self.rho2, basis, self.tol)
        rho4 = self.v @ rho3 @ self.v.conj().T
        require_density_matrix(rho4, "rho4", self.tol)

        e3 = float(np.trace(rho3 @ self.h2).real)
        e4 = float(np.trace(rho4 @ self.h1).real)
        w1 = self.e2 - self.e1
        q_m = e3 - self.e2
        w2 = e4 - e3
        q_t = self.e1 - e4
        w = w1 + w2
        eta = -w / q_m if q_m > self.tol.fuel * hw else float("nan")

        s3 = entropy_from_eigenvalues(*eigvals_hermitian(rho3), self.tol)
        s4 = entropy_from_eigenvalues(*eigvals_hermitian(rho4), self.tol)
        d_s = s3 - self.s2

        probs = transition_probabilities(self.u, self.v, basis, self.tol)
        dp1, dp2, dp3, dp4 = occupation_deltas(probs, p.beta_hbar_omega)
        analytic = analytic_energetics(probs, p.beta_hbar_omega, hw, self.tol)

        eta_res = 0.0
        if not math.isnan(eta) and not math.isnan(analytic.eta):
            # scaled like the forms check: off the engine regime |eta| is
            # unbounded near the fuel threshold, and the subtractions behind
            # numerator and denominator amplify roundoff by their condition
            # number, so the agreement is relative to both
            kappa = (abs(dp1) + abs(dp4)) / max(abs(dp1 - dp4), 1e-300) + (
                abs(dp2) + abs(dp3)) / max(abs(dp2 - dp3), 1e-300)
            scale = max(1.0, abs(eta), abs(analytic.eta)) * max(1.0, kappa)
            eta_res = abs(eta - analytic.eta) / scale
        residuals = {
            "first_law": abs(w1 + w2 + q_m + q_t),
            "w": abs(w - analytic.w),
            "q_m": abs(q_m - analytic.q_m),
            "q_t": abs(q_t - analytic.q_t),
            "eta": eta_res,
            "entropy_12": abs(self.s1 - self.s2),
            "entropy_34": abs(s3 - s4),
            "entropy_thermalization": abs((self.s1 - s4) + d_s),
        }

        violations: dict[str, float] = {}
        if residuals["first_law"] > self.tol.first_law * hw:
            violations["first_law"] = residuals["first_law"]
        if q_t > self.tol.kelvin * hw:
            violations["kelvin"] = q_t
        if d_s < -self.tol.entropy_decrease:
            violations["entropy_decrease"] = -d_s
        if residuals["entropy_12"] > self.tol.entropy_equality:
            violations["entropy_12"] = residuals["entropy_12"]
        if residuals["entropy_34"] > self.tol.entropy_equality:
            violations["entropy_34"] = residuals["entropy_34"]

        record = CycleRecord(
            params=EngineParams(
                omega_tau=p.omega_tau, beta_hbar_omega=p.beta_hbar_omega,
                alpha=alpha, phi=phi, steps=p.steps, hbar_omega=hw,
            ),
            rho1=self.rho1, rho2=self.rho2, rho3=rho3, rho4=rho4,
            w1=w1, w2=w2, q_m=q_m, q_t=q_t, w=w, eta=eta,
            s1=self.s1, s2=self.s2, s3=s3, s4=s4, d_s=d_s,
            dp1=dp1, dp2=dp2, dp3=dp3, dp4=dp4,
            probs=probs, analytic=analytic, residuals=residuals,
        )
        return record, violations


def run_cycle(params: EngineParams, tol: Tolerances = DEFAULT_TOLERANCES) -> CycleRecord:
    """Execute one full cycle at the given parameters.

    Raises InvariantViolation (carrying the residuals) if any cycle invariant
    fails; an undefined efficiency is a flag, not an error.
    """
    return CycleEngine(params, tol).evaluate(params.alpha, params.phi)


def crosscheck(record: CycleRecord) -> CrosscheckReport:
    """Residual report between the trace oracle and the analytic path."""
    keys = ("w", "q_m", "q_t", "eta", "first_law",
            "entropy_12", "entropy_34", "entropy_thermalization")
    residuals = {k: record.residuals[k] for k in keys}
    return CrosscheckReport(residuals=residuals, max_residual=max(residuals.values()))
