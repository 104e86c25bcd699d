"""Sphere-plane electrostatics: applied bias, patch potentials, calibration.

In the proximity regime d << R the electrostatic force between sphere and
plane is pi eps0 R (V - V_m)^2 / d plus a patch-potential term
pi eps0 R V_rms^2 / d.  A parabolic fit of force against applied bias
therefore hands back the separation (from the curvature), the minimizing
potential (vertex position), and whatever voltage-independent force rides
along (vertex height).  That inversion is the calibration step every
measured force curve passes through before any Casimir analysis.
"""

import csv
import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .constants import VACUUM_PERMITTIVITY
from .errors import CalibrationError, DegenerateFitError, ValidationError

__all__ = [
    "BiasState",
    "PatchRegime",
    "PatchModel",
    "SweepSample",
    "CalibrationResult",
    "bias_force",
    "patch_force",
    "classify_patch_regime",
    "effective_patch_radius",
    "calibrate_from_sweep",
    "load_sweep_csv",
    "save_sweep_csv",
]

SWEEP_CSV_HEADER = ["voltage_v", "force_n", "sigma_n"]


@dataclass(frozen=True)
class BiasState:
    """Applied bias and minimizing potential, both in volts."""

    v: float
    v_m: float

    def __post_init__(self):
        # contact potentials sit at the tens-of-mV scale; a volt-level
        # offset means a wiring problem, not physics
        if abs(self.v_m) > 1.0:
            raise ValidationError(f"|v_m| must be <= 1 V, got {self.v_m}")


class PatchRegime(enum.Enum):
    """Patch correlation length relative to the gap and sqrt(R d)."""

    SUPPRESSED = "suppressed"
    INTERMEDIATE = "intermediate"
    LARGE = "large"


@dataclass(frozen=True)
class PatchModel:
    """Patch-potential amplitude and correlation-length regime."""

    v_rms: float
    lambda_regime: PatchRegime

    def __post_init__(self):
        if self.v_rms < 0.0:
            raise ValidationError(f"v_rms must be >= 0, got {self.v_rms}")


@dataclass(frozen=True)
class SweepSample:
    """One (voltage, force) point of a calibration sweep, SI units."""

    v: float
    f: float
    sigma_f: float

    def __post_init__(self):
        if self.sigma_f <= 0.0:
            raise ValidationError(f"sigma_f must be positive, got {self.sigma_f}")


def effective_patch_radius(R, d):
    """Interaction radius sqrt(R d) of the sphere-plane proximity zone."""
    if R <= 0.0 or d <= 0.0:
        raise ValueError("radius and separation must be positive")
    return math.sqrt(R * d)


def classify_patch_regime(lambda_scale, d, R):
    """Classify a patch correlation length against the gap geometry.

    Lengths below d/5 count as suppressed: their force contribution decays
    like exp(-d/lambda) and is dropped entirely, never modelled.  Lengths
    at or beyond sqrt(R d) average over the whole interaction zone.
    """
    if lambda_scale <= 0.0:
        raise ValueError(f"correlation length must be positive, got {lambda_scale}")
    if lambda_scale < d / 5.0:
        return PatchRegime.SUPPRESSED
    if lambda_scale >= effective_patch_radius(R, d):
        return PatchRegime.LARGE
    return PatchRegime.INTERMEDIATE


def bias_force(d, R, v, v_m):
    """Applied-bias electrostatic force pi eps0 R (v - v_m)^2 / d, in N."""
    if d <= 0.0:
        raise ValueError(f"separation must be positive, got {d}")
    if R <= 0.0:
        raise ValueError(f"radius must be positive, got {R}")
    dv = v - v_m
    return math.pi * VACUUM_PERMITTIVITY * R * dv * dv / d

def patch_force(d, R, v_rms, delta=0.0):
    """Patch-potential force pi eps0 R v_rms^2 / d, in N.

    A nonzero rms separation fluctuation delta rescales the 1/d average by
    1 + (delta/d)^2, the same factor applied to the theory curves.
    """
    if d <= 0.0:
        raise ValueError(f"separation must be positive, got {d}")
    if R <= 0.0:
        raise ValueError(f"radius must be positive, got {R}")
    if v_rms < 0.0:
        raise ValueError(f"v_rms must be >= 0, got {v_rms}")
    if delta < 0.0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    ratio = delta / d
    return math.pi * VACUUM_PERMITTIVITY * R * v_rms * v_rms / d * (1.0 + ratio * ratio)


class CalibrationResult(NamedTuple):
    """Parabola inversion output; covariance is 3x3 over (d, v_m, f_residual)."""

    d: float
    v_m: float
    f_residual: float
    covariance: np.ndarray


def calibrate_from_sweep(samples, R):
    """Invert a force-vs-voltage sweep into (d, V_m, residual force).

    Fits F(V) = c2 V^2 + c1 V + c0 by weighted linear least squares on the
    monomial basis, then maps the coefficients through

        d = pi eps0 R / c2,   V_m = -c1 / (2 c2),   F_res = c0 - c1^2/(4 c2)

    propagating the coefficient covariance through the Jacobian of that map.

    Parameters
    ----------
    samples : sequence of SweepSample
        At least four points; the voltages must bracket the vertex for the
        curvature to be meaningful.
    R : float
        Sphere radius in m.

    Returns
    -------
    CalibrationResult
        (d, v_m, f_residual, covariance), covariance ordered the same way.

    Raises
    ------
    ValidationError
        Fewer than four samples.
    DegenerateFitError
        Voltages do not span a parabola (rank-deficient basis).
    CalibrationError
        Fitted curvature c2 <= 0, i.e. no attractive 1/d signal.
    """
    samples = list(samples)
    if len(samples) < 4:
        raise ValidationError(f"need >= 4 sweep samples, got {len(samples)}")
    if R <= 0.0:
        raise ValueError(f"radius must be positive, got {R}")
    v = np.array([s.v for s in samples], dtype=float)
    f = np.array([s.f for s in samples], dtype=float)
    sigma = np.array([s.sigma_f for s in samples], dtype=float)

    # solve in a voltage-scaled basis so conditioning reflects actual
    # degeneracy, not the mV magnitude of the sweep
    scale = np.max(np.abs(v))
    if scale == 0.0:
        raise DegenerateFitError("all sweep voltages are zero")
    u = v / scale
    design = np.column_stack([np.ones_like(u), u, u * u]) / sigma[:, None]
    rhs = f / sigma
    gram = design.T @ design
    if np.linalg.cond(gram) > 1e10:
        raise DegenerateFitError(
            "sweep voltages do not span a parabola (singular normal equations)"
        )
    coeffs_scaled = np.linalg.solve(gram, design.T @ rhs)
    cov_scaled = np.linalg.inv(gram)

    unscale = np.array([1.0, 1.0 / scale, 1.0 / scale ** 2])
    c0, c1, c2 = coeffs_scaled * unscale
    cov_c = cov_scaled * np.outer(unscale, unscale)

    if c2 <= 0.0:
        raise CalibrationError(
            f"fitted curvature {c2:.3e} N/V^2 is not attractive; "
            "sweep cannot be inverted for a separation"
        )

    pe = math.pi * VACUUM_PERMITTIVITY * R
    d = pe / c2
    v_m = -c1 / (2.0 * c2)
    f_res = c0 - c1 * c1 / (4.0 * c2)

    jac = np.array(
        [
            [0.0, 0.0, -pe / c2 ** 2],
            [0.0, -1.0 / (2.0 * c2), c1 / (2.0 * c2 ** 2)],
            [1.0, -c1 / (2.0 * c2), c1 ** 2 / (4.0 * c2 ** 2)],
        ]
    )
    covariance = jac @ cov_c @ jac.T
    return CalibrationResult(d=d, v_m=v_m, f_residual=f_res, covariance=covariance)


def load_sweep_csv(path):
    """Read sweep samples from a `voltage_v,force_n,sigma_n` CSV file."""
    samples = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SWEEP_CSV_HEADER:
            raise ValidationError(
                f"expected header {','.join(SWEEP_CSV_HEADER)}, got {header}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ValidationError(f"line {lineno}: expected 3 columns, got {len(row)}")
            try:
                v, f, s = (float(cell) for cell in row)
            except ValueError:
                raise ValidationError(f"line {lineno}: non-numeric value in {row}") from None
            if s <= 0.0:
                raise ValidationError(f"line {lineno}: sigma_n must be positive, got {s}")
            samples.append(SweepSample(v=v, f=f, sigma_f=s))
    return samples


def save_sweep_csv(path, samples):
    """Write sweep samples as a `voltage_v,force_n,sigma_n` CSV file."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_CSV_HEADER)
        for s in samples:
            writer.writerow(
                [format(s.v, ".12g"), format(s.f, ".12g"), format(s.sigma_f, ".12g")]
            )
