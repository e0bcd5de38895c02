"""Projective measurement basis on the Bloch sphere and the dephasing channel."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .qubit_algebra import IDENTITY, require_density_matrix
from .tolerances import DEFAULT_TOLERANCES, Tolerances

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class MeasurementBasis:
    """Orthonormal pair of kets at colatitude alpha, longitude phi.

    chi1 = e^{-i phi} sin(alpha/2) |up> - cos(alpha/2) |down>
    chi2 = cos(alpha/2) |up> + e^{i phi} sin(alpha/2) |down>

    The global phases follow these formulas exactly; probabilities are
    phase-free but intermediate overlap checks are not.
    """

    alpha: float
    phi: float
    chi1: np.ndarray = field(repr=False)
    chi2: np.ndarray = field(repr=False)

    def projectors(self) -> tuple[np.ndarray, np.ndarray]:
        return np.outer(self.chi1, self.chi1.conj()), np.outer(self.chi2, self.chi2.conj())


def _reduce_angles(alpha: float, phi: float) -> tuple[float, float]:
    if not (math.isfinite(alpha) and math.isfinite(phi)):
        raise ValidationError("alpha and phi must be finite")
    alpha = alpha % TWO_PI
    phi = phi % TWO_PI
    if alpha > math.pi and not math.isclose(alpha, math.pi, abs_tol=1e-15):
        raise ValidationError(f"alpha reduces to {alpha!r}, outside [0, pi]")
    return min(alpha, math.pi), phi


def basis_kets(alpha: float, phi: float,
               tol: Tolerances = DEFAULT_TOLERANCES) -> MeasurementBasis:
    alpha, phi = _reduce_angles(alpha, phi)
    c = math.cos(alpha / 2.0)
    s = math.sin(alpha / 2.0)
    chi1 = np.array([np.exp(-1j * phi) * s, -c], dtype=complex)
    chi2 = np.array([c, np.exp(1j * phi) * s], dtype=complex)
    overlap = abs(np.vdot(chi1, chi2))
    p1 = np.outer(chi1, chi1.conj())
    p2 = np.outer(chi2, chi2.conj())
    completeness = float(np.abs(p1 + p2 - IDENTITY).max())
    if overlap > tol.basis or completeness > tol.basis:
        raise ValidationError(
            f"basis not orthonormal: overlap {overlap:.3e}, completeness {completeness:.3e}"
        )
    return MeasurementBasis(alpha=alpha, phi=phi, chi1=chi1, chi2=chi2)


def measure(
    rho: np.ndarray,
    basis: MeasurementBasis,
    tol: Tolerances = DEFAULT_TOLERANCES,
    rehermitize: bool = True,
) -> tuple[np.ndarray, tuple[float, float]]:
    """Non-selective projective measurement: rho -> p1*pi1 + p2*pi2 dephasing.

    Returns the post-measurement state and the outcome probabilities.  The
    symmetrized update (M + M^dag)/2 makes the returned state Hermitian to
    the last bit; ``rehermitize=False`` is a fault-injection hook for the
    verification suite and must not be used otherwise.
    """
    rho = require_density_matrix(rho, tol=tol)
    pi1, pi2 = basis.projectors()
    post = pi1 @ rho @ pi1 + pi2 @ rho @ pi2
    if rehermitize:
        post = 0.5 * (post + post.conj().T)
    p1 = float(np.vdot(basis.chi1, rho @ basis.chi1).real)
    p2 = float(np.vdot(basis.chi2, rho @ basis.chi2).real)
    if abs(p1 + p2 - 1.0) > tol.probability:
        raise ValidationError(f"probabilities sum to {p1 + p2!r}")
    leak = abs(np.vdot(basis.chi1, post @ basis.chi2))
    if leak > tol.channel:
        raise ValidationError(f"post state not diagonal in the basis (leak {leak:.3e})")
    return post, (p1, p2)
