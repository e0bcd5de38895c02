"""Invariant suites behind the ``verify`` command.

Each suite draws its own seeded samples, reports the worst residual it saw
and whether that stayed inside tolerance.  The suites are the same physics
checks the test suite runs, packaged for the command line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cycle import CycleEngine, EngineParams
from .measurement import basis_kets, measure
from .propagator import DriveSpec, Segment, convergence_order, time_ordered_propagator
from .qubit_algebra import (
    IDENTITY,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    hermitian_expm,
    hermiticity_residual,
    gibbs_state,
    unitarity_residual,
    von_neumann_entropy,
)
from .sweep import GridSpec, grid_sweep, symmetry_residual
from .tolerances import DEFAULT_TOLERANCES as TOL


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    max_residual: float
    tolerance: float
    detail: str = ""


def _random_hermitian(rng: np.random.Generator) -> np.ndarray:
    a, x, y, z = rng.normal(size=4)
    return a * IDENTITY + x * SIGMA_X + y * SIGMA_Y + z * SIGMA_Z


def _random_state(rng: np.random.Generator) -> np.ndarray:
    rho = gibbs_state(_random_hermitian(rng), rng.uniform(0.0, 3.0))
    u = hermitian_expm(_random_hermitian(rng), rng.uniform(0.0, 3.0))
    return u @ rho @ u.conj().T


def suite_unitarity(rng: np.random.Generator, samples: int = 2000) -> SuiteResult:
    worst = 0.0
    for _ in range(samples):
        u = hermitian_expm(_random_hermitian(rng), rng.uniform(-10.0, 10.0))
        worst = max(worst, unitarity_residual(u))
    for n in (2, 7, 64, 1024, 65536):
        for seg in (Segment.I, Segment.II):
            res = time_ordered_propagator(DriveSpec(tau=0.015193, segment=seg), n)
            worst = max(worst, res.unitarity_residual)
    return SuiteResult("unitarity", worst <= TOL.unitarity, worst, TOL.unitarity)


def suite_propagator_error(omega_tau: float, steps: int) -> SuiteResult:
    # conservative a-priori bound for the midpoint product on this drive
    bound = 10.0 / steps**2
    worst = 0.0
    for seg in (Segment.I, Segment.II):
        spec = DriveSpec(tau=omega_tau, segment=seg)
        ref = time_ordered_propagator(spec, 65536).u
        u = time_ordered_propagator(spec, steps).u
        worst = max(worst, float(np.abs(u - ref).max()))
    return SuiteResult(
        "propagator_error", worst <= bound, worst, bound,
        detail=f"steps={steps} vs reference 65536",
    )


def suite_convergence(omega_tau: float) -> SuiteResult:
    worst = 0.0
    for seg in (Segment.I, Segment.II):
        est = convergence_order(DriveSpec(tau=omega_tau, segment=seg),
                                [8, 16, 32, 64, 128, 256, 512])
        if est.indeterminate:
            return SuiteResult("convergence_order", False, float("nan"), 0.2,
                               detail="order indeterminate (errors at floor)")
        worst = max(worst, abs(est.order - 2.0))
    return SuiteResult("convergence_order", worst <= 0.2, worst, 0.2,
                       detail="|order - 2| on both segments")


def suite_measurement_channel(
    rng: np.random.Generator, samples: int = 400, rehermitize: bool = True
) -> SuiteResult:
    """Idempotence, trace preservation, entropy non-decrease and exact
    Hermiticity of the dephasing output.

    The symmetrized update makes the output Hermitian to the last bit, so
    the Hermiticity check runs at tolerance zero; it is what the
    fault-injection hook (skipping the re-Hermitization) trips.
    """
    worst = 0.0
    exact_asym = 0.0
    for _ in range(samples):
        rho = _random_state(rng)
        basis = basis_kets(rng.uniform(0.0, math.pi), rng.uniform(0.0, 2.0 * math.pi))
        post, probs = measure(rho, basis, rehermitize=rehermitize)
        post2, _ = measure(post, basis, rehermitize=rehermitize)
        worst = max(
            worst,
            float(np.abs(post2 - post).max()),
            abs(probs[0] + probs[1] - 1.0),
            abs((post[0, 0] + post[1, 1]).real - 1.0),
            max(0.0, von_neumann_entropy(rho) - von_neumann_entropy(post)),
        )
        exact_asym = max(exact_asym, hermiticity_residual(post))
    passed = worst <= TOL.kelvin and exact_asym == 0.0
    detail = "symmetrized output must be exactly Hermitian"
    return SuiteResult("measurement_channel", passed, max(worst, exact_asym),
                       TOL.kelvin, detail)


def _sample_params(rng: np.random.Generator) -> tuple[float, float, float, float]:
    return (
        rng.uniform(0.0, math.pi),
        rng.uniform(0.0, 2.0 * math.pi),
        rng.uniform(0.001, 10.0),
        rng.uniform(0.1, 10.0),
    )


def cycle_identity_suites(
    rng: np.random.Generator, samples: int = 2000, steps: int = 256
) -> list[SuiteResult]:
    """First law, Kelvin, entropy equalities, analytic-vs-trace residuals,
    efficiency forms and bounds, and the 1/zeta + 1/gamma inequality, all on
    one shared random parameter sample.

    The identities are exact for any unitary pair, so a moderate step count
    is enough; residuals do not depend on the integration error.
    """
    first_law = kelvin = entropy = analytic = eta_forms = bounds = inequality = 0.0
    for _ in range(samples):
        alpha, phi, omega_tau, beta = _sample_params(rng)
        engine = CycleEngine(EngineParams(
            omega_tau=omega_tau, beta_hbar_omega=beta, steps=steps))
        record, violations = engine.evaluate_flagged(alpha, phi)
        if violations:
            first_law = max(first_law, max(violations.values()))
            continue
        first_law = max(first_law, record.residuals["first_law"])
        kelvin = max(kelvin, record.q_t)
        entropy = max(entropy, record.residuals["entropy_12"],
                      record.residuals["entropy_34"],
                      record.residuals["entropy_thermalization"],
                      max(0.0, -record.d_s))
        analytic = max(analytic, record.residuals["w"],
                       record.residuals["q_m"], record.residuals["q_t"])
        eta_forms = max(eta_forms, record.residuals["eta"])
        if record.q_m > TOL.fuel and record.w < 0.0:
            bounds = max(bounds, -record.eta, record.eta - 1.0)
        pr = record.probs
        if pr.zeta > 1e-6 and pr.gamma > 1e-6:
            inequality = max(inequality, 2.0 - (1.0 / pr.zeta + 1.0 / pr.gamma))
    return [
        SuiteResult("first_law", first_law <= TOL.first_law, first_law, TOL.first_law),
        SuiteResult("kelvin", kelvin <= TOL.kelvin, kelvin, TOL.kelvin),
        SuiteResult("entropy_equalities", entropy <= TOL.entropy_equality,
                    entropy, TOL.entropy_equality),
        SuiteResult("analytic_vs_oracle", analytic <= TOL.analytic, analytic, TOL.analytic),
        SuiteResult("efficiency_forms", eta_forms <= TOL.eta_forms, eta_forms, TOL.eta_forms),
        SuiteResult("efficiency_bounds", bounds <= TOL.probability, bounds, TOL.probability),
        SuiteResult("transition_inequality", inequality <= 1e-9, inequality, 1e-9),
    ]


def suite_symmetry(params: EngineParams, alpha_points: int, phi_points: int) -> SuiteResult:
    grid = GridSpec(base=params, alpha_points=alpha_points, phi_points=phi_points)
    table = grid_sweep(grid)
    residual = symmetry_residual(table)
    return SuiteResult("symmetry", residual <= TOL.symmetry, residual, TOL.symmetry,
                       detail=f"{alpha_points}x{phi_points} grid")


def run_all_suites(
    params: EngineParams,
    seed: int,
    samples: int = 2000,
    grid_points: tuple[int, int] = (129, 129),
    rehermitize: bool = True,
) -> list[SuiteResult]:
    rng = np.random.default_rng(seed)
    results = [
        suite_unitarity(rng, samples=min(samples, 2000)),
        suite_propagator_error(params.omega_tau, params.steps),
        suite_convergence(params.omega_tau),
        suite_measurement_channel(rng, samples=min(samples, 400),
                                  rehermitize=rehermitize),
    ]
    results.extend(cycle_identity_suites(rng, samples=samples))
    results.append(suite_symmetry(params, *grid_points))
    return results
