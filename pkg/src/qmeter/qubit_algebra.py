"""Exact 2x2 complex linear algebra for a single qubit.

Pauli operators, closed-form Hermitian exponentials, Gibbs states,
expectation values and von Neumann entropy.  Everything here works in
internal units: energies in multiples of hbar*omega, times as the
dimensionless phase omega*t, so hbar never appears in the formulas.

All functions are pure; returned arrays are fresh copies.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ValidationError
from .tolerances import DEFAULT_TOLERANCES, Tolerances

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

_PAULI = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}

# computational basis and the x eigenbasis, used throughout the cycle
KET_UP = np.array([1, 0], dtype=complex)
KET_DOWN = np.array([0, 1], dtype=complex)
KET_PLUS_X = np.array([1, 1], dtype=complex) / math.sqrt(2)
KET_MINUS_X = np.array([1, -1], dtype=complex) / math.sqrt(2)


def pauli(axis: str) -> np.ndarray:
    """Return a copy of the Pauli matrix for axis 'x', 'y' or 'z'."""
    try:
        return _PAULI[axis].copy()
    except KeyError:
        raise ValidationError(f"unknown Pauli axis {axis!r}; expected 'x', 'y' or 'z'") from None


def _as_matrix(m: np.ndarray, name: str) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise ValidationError(f"{name} must be a 2x2 matrix, got shape {m.shape}")
    if not (np.all(np.isfinite(m.real)) and np.all(np.isfinite(m.imag))):
        raise ValidationError(f"{name} contains non-finite entries")
    return m


def hermiticity_residual(m: np.ndarray) -> float:
    return float(np.abs(m - m.conj().T).max())


def require_hermitian(m: np.ndarray, name: str = "matrix",
                      tol: float = DEFAULT_TOLERANCES.hermiticity) -> np.ndarray:
    m = _as_matrix(m, name)
    res = hermiticity_residual(m)
    if res > tol:
        raise ValidationError(f"{name} is not Hermitian (residual {res:.3e} > {tol:.1e})")
    return m


def _pauli_decompose(h: np.ndarray) -> tuple[float, float, np.ndarray]:
    """Split Hermitian H = a*I + b*(n.sigma) with b >= 0 and |n| = 1.

    For b = 0 the axis is arbitrary and z is returned.
    """
    a = 0.5 * (h[0, 0] + h[1, 1]).real
    v = np.array([h[0, 1].real, -h[0, 1].imag, 0.5 * (h[0, 0] - h[1, 1]).real])
    b = float(np.linalg.norm(v))
    n = v / b if b > 0.0 else np.array([0.0, 0.0, 1.0])
    return a, b, n


def eigvals_hermitian(h: np.ndarray, name: str = "matrix") -> tuple[float, float]:
    """Closed-form (ascending) eigenvalues of a Hermitian 2x2 matrix."""
    h = require_hermitian(h, name)
    a, b, _ = _pauli_decompose(h)
    return a - b, a + b


def hermitian_expm(h: np.ndarray, t: float) -> np.ndarray:
    """Unitary exp(-i*H*t) for Hermitian H, in closed form.

    H is in energy units of hbar*omega and t is the dimensionless phase, so
    the exponent is dimensionless.
    """
    h = require_hermitian(h, "H")
    if not math.isfinite(t):
        raise ValidationError("t must be finite")
    a, b, n = _pauli_decompose(h)
    phase = math.cos(a * t) - 1j * math.sin(a * t)
    rot = math.cos(b * t) * IDENTITY - 1j * math.sin(b * t) * (
        n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z
    )
    return phase * rot


def unitarity_residual(u: np.ndarray) -> float:
    u = np.asarray(u, dtype=complex)
    return float(np.abs(u.conj().T @ u - IDENTITY).max())


def require_unitary(u: np.ndarray, name: str = "U",
                    tol: float = DEFAULT_TOLERANCES.unitary_input) -> np.ndarray:
    u = _as_matrix(u, name)
    res = unitarity_residual(u)
    if res > tol:
        raise ValidationError(f"{name} is not unitary (residual {res:.3e} > {tol:.1e})")
    return u


def gibbs_state(h: np.ndarray, beta: float) -> np.ndarray:
    """Thermal state exp(-beta*H)/Z for Hermitian H and beta >= 0.

    Uses rho = (I - tanh(beta*b) n.sigma)/2 on the traceless part, which is
    exact and immune to overflow at large beta.
    """
    h = require_hermitian(h, "H")
    if not (math.isfinite(beta) and beta >= 0.0):
        raise ValidationError("beta must be finite and >= 0")
    _, b, n = _pauli_decompose(h)
    t = math.tanh(beta * b)
    rho = 0.5 * (IDENTITY - t * (n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z))
    return rho


def density_matrix_residuals(rho: np.ndarray) -> dict[str, float]:
    """Hermiticity, trace and positivity residuals of a candidate state."""
    rho = _as_matrix(rho, "rho")
    herm = hermiticity_residual(rho)
    tr = float(abs(rho[0, 0] + rho[1, 1] - 1.0))
    sym = 0.5 * (rho + rho.conj().T)
    lo, _ = eigvals_hermitian(sym)
    neg = float(max(0.0, -lo))
    return {"hermiticity": herm, "trace": tr, "negativity": neg}


def require_density_matrix(rho: np.ndarray, name: str = "rho",
                           tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    rho = _as_matrix(rho, name)
    res = density_matrix_residuals(rho)
    if res["hermiticity"] > tol.hermiticity:
        raise ValidationError(f"{name}: Hermiticity residual {res['hermiticity']:.3e}")
    if res["trace"] > tol.trace:
        raise ValidationError(f"{name}: trace deviates from 1 by {res['trace']:.3e}")
    if res["negativity"] > tol.eig_floor:
        raise ValidationError(f"{name}: negative eigenvalue {-res['negativity']:.3e}")
    return rho


def entropy_from_eigenvalues(lo: float, hi: float,
                             tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Shannon entropy (nats) of {lo, hi}; clamps roundoff-negative values.

    Eigenvalues in [-eig_floor, 0] are treated as exact zeros; anything more
    negative is a genuine invariant violation, not roundoff.
    """
    s = 0.0
    for lam in (lo, hi):
        if lam < -tol.eig_floor:
            raise ValidationError(f"eigenvalue {lam:.3e} below clamp window")
        lam = min(max(lam, 0.0), 1.0)
        if lam > 0.0:
            s -= lam * math.log(lam)
    if s < 0.0 or s > math.log(2.0) + tol.eig_floor:
        raise ValidationError(f"entropy {s!r} outside [0, ln 2]")
    return s


def von_neumann_entropy(rho: np.ndarray, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """S(rho) = -sum(lambda ln lambda) in nats, via the closed-form eigenvalues."""
    rho = require_density_matrix(rho, tol=tol)
    lo, hi = eigvals_hermitian(rho)
    return entropy_from_eigenvalues(lo, hi, tol)


def expectation(rho: np.ndarray, a: np.ndarray,
                tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Re Tr(rho A) for Hermitian A; the imaginary leak must stay below tolerance."""
    rho = require_density_matrix(rho, tol=tol)
    a = require_hermitian(a, "A", tol.hermiticity)
    value = np.trace(rho @ a)
    if abs(value.imag) > tol.imag_leak:
        raise ValidationError(f"Tr(rho A) has imaginary part {value.imag:.3e}")
    return float(value.real)
