"""Closed-form singles/coincidence rate models and SBR curve fitting."""

from dataclasses import dataclass

import numpy as np


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class RateModelParams:
    """Parameters of SBR = 1 / (dt * (a * R + b))."""

    a: float
    b: float
    dt_s: float

    def __post_init__(self):
        if self.a < 0 or self.b < 0 or self.dt_s <= 0:
            raise ModelError("RateModelParams: need a, b >= 0 and dt > 0")


# Fit parameters reported for the two measurement runs, 1.5 ns bins.  Which
# run belongs to which detection wavelength is left open deliberately.
RATE_MODEL_PRESETS = {
    "run_a": RateModelParams(a=6.78, b=1.67e6, dt_s=1.5e-9),
    "run_b": RateModelParams(a=19.1, b=0.0, dt_s=1.5e-9),
}


@dataclass(frozen=True)
class SbrFitResult:
    a: float
    b: float
    covariance: np.ndarray
    b_at_boundary: bool


def singles_rate(pair_rate, eta, q, dark) -> float:
    """Detector singles rate eta*P*(1+q) + W."""
    return float(eta * pair_rate * (1.0 + q) + dark)


def accidental_rate_per_bin(s1, s2, dt_s) -> float:
    """Accidental coincidence rate per histogram bin, S1*S2*dt."""
    return float(s1 * s2 * dt_s)


def true_coincidence_rate(pair_rate, eta1, eta2) -> float:
    """True pair coincidence rate P*eta1*eta2."""
    return float(pair_rate * eta1 * eta2)


def ab_from_physics(q1, q2, eta1, eta2, dark2) -> tuple[float, float]:
    """Rate-model parameters from source physics, herald dark counts neglected."""
    if eta1 <= 0 or eta2 <= 0:
        raise ModelError("ab_from_physics: transmittances must be positive")
    return (1.0 + q2) / eta1, (1.0 + q1) / eta2 * dark2


def sbr_model(r_her, p: RateModelParams) -> float:
    """SBR = 1 / (dt * (a * R_Her + b))."""
    denom = p.dt_s * (p.a * r_her + p.b)
    if denom <= 0:
        raise ModelError("sbr_model: a*R + b must be positive")
    return 1.0 / denom


def g2_from_sbr(sbr) -> float:
    """Heralded g2(0) implied by the SBR: 1 - (SBR/(SBR+1))^2."""
    sbr = float(sbr)
    if sbr < 0:
        raise ModelError("g2_from_sbr: SBR must be nonnegative")
    return 1.0 - (sbr / (sbr + 1.0)) ** 2


def fit_sbr(points, dt_s) -> SbrFitResult:
    """Weighted least squares of SBR data against 1/(dt*(a*R + b)).

    points: sequence of (herald_rate, sbr, sigma) with sigma > 0, or sigma
    omitted/zero for an unweighted fit.  The model is exactly linear in
    (a, b) after inversion: 1/(sbr*dt) = a*R + b.  A negative unconstrained
    b is clamped to zero and flagged.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise ModelError("fit_sbr: need at least 2 points")
    r = pts[:, 0]
    sbr = pts[:, 1]
    if np.any(sbr <= 0):
        raise ModelError("fit_sbr: SBR values must be positive")
    if np.ptp(r) == 0:
        raise ModelError("fit_sbr: all herald rates equal, design is rank deficient")
    y = 1.0 / (sbr * dt_s)
    if pts.shape[1] > 2 and np.all(pts[:, 2] > 0):
        sigma_y = pts[:, 2] / (sbr**2 * dt_s)
        w = 1.0 / sigma_y**2
        absolute = True
    else:
        w = np.ones_like(y)
        absolute = False

    def solve(design):
        gram = design.T @ (design * w[:, None])
        coef = np.linalg.solve(gram, design.T @ (w * y))
        cov = np.linalg.inv(gram)
        if not absolute:
            dof = max(len(y) - design.shape[1], 1)
            resid = y - design @ coef
            cov = cov * float(w @ resid**2) / dof
        return coef, cov

    coef, cov = solve(np.column_stack([r, np.ones_like(r)]))
    a, b = coef
    if b < 0:
        (a,), cov_a = solve(r[:, None])
        cov = np.array([[cov_a[0, 0], 0.0], [0.0, 0.0]])
        return SbrFitResult(float(a), 0.0, cov, True)
    return SbrFitResult(float(a), float(b), cov, False)
