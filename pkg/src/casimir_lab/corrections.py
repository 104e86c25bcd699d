"""Rms separation-fluctuation corrections to force curves and separations.

A gap that jitters with rms amplitude delta around its mean samples the
curvature of the force law: the time-averaged force picks up F''(d) delta^2/2,
and the 1/d capacitance inversion underlying the electrostatic calibration
returns a separation short by the factor 1 + (delta/d)^2.  Both corrections
are second order in delta/d, so they are only trusted well away from
d ~ delta; inside five fluctuation amplitudes the expansion is refused.
"""

from dataclasses import dataclass

from .errors import RegimeError, ValidationError

__all__ = [
    "FluctuationSpec",
    "fluctuation_corrected_force",
    "corrected_separation",
    "correction_uncertainty",
    "corrected_curve",
]

#: expansion in (delta/d)^2 breaks down once the gap is within a few
#: fluctuation amplitudes of contact
REGIME_FACTOR = 5.0


@dataclass(frozen=True)
class FluctuationSpec:
    """Rms separation fluctuation and its one-sigma uncertainty, in m."""

    delta: float
    delta_sigma: float = 0.0

    def __post_init__(self):
        if self.delta < 0.0:
            raise ValidationError(f"delta must be >= 0, got {self.delta}")
        if self.delta_sigma < 0.0:
            raise ValidationError(f"delta_sigma must be >= 0, got {self.delta_sigma}")


def _check_regime(d, delta):
    if d <= 0.0:
        raise ValueError(f"separation must be positive, got {d}")
    if delta < 0.0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    if delta > 0.0 and d <= REGIME_FACTOR * delta:
        raise RegimeError(
            f"d = {d:.3e} m is within {REGIME_FACTOR:g} fluctuation amplitudes "
            f"(delta = {delta:.3e} m); second-order correction invalid"
        )


def fluctuation_corrected_force(force_curve, d, delta):
    """Time-averaged force F(d) + F''(d) delta^2 / 2, in N.

    The second derivative comes from a five-point central stencil with step
    h = max(1 nm, 1e-3 d), small against every feature of the smooth
    power-law-like curves this is applied to yet large enough to stay clear
    of float cancellation.

    Parameters
    ----------
    force_curve : callable
        Smooth map d (m) -> force (N).
    d : float
        Mean separation in m, must exceed five delta.
    delta : float
        Rms fluctuation amplitude in m.
    """
    _check_regime(d, delta)
    if delta == 0.0:
        return force_curve(d)
    h = max(1e-9, 1e-3 * d)
    f_m2 = force_curve(d - 2.0 * h)
    f_m1 = force_curve(d - h)
    f_0 = force_curve(d)
    f_p1 = force_curve(d + h)
    f_p2 = force_curve(d + 2.0 * h)
    second = (-f_m2 + 16.0 * f_m1 - 30.0 * f_0 + 16.0 * f_p1 - f_p2) / (12.0 * h * h)
    return f_0 + 0.5 * second * delta * delta


def corrected_separation(d_inferred, delta):
    """Mean gap d_inferred (1 + (delta/d_inferred)^2), in m.

    Fluctuations inflate the time average of 1/d, so the capacitive
    inversion underestimates the true mean separation; the quadratic factor
    undoes that bias.
    """
    _check_regime(d_inferred, delta)
    ratio = delta / d_inferred
    return d_inferred * (1.0 + ratio * ratio)


def correction_uncertainty(force_curve, d, fluct):
    """Half-spread of the corrected force over delta +- delta_sigma, in N.

    Evaluates :func:`fluctuation_corrected_force` at the one-sigma edges of
    the fluctuation amplitude; the lower edge is clipped at zero.
    """
    if not isinstance(fluct, FluctuationSpec):
        raise TypeError("fluct must be a FluctuationSpec")
    if fluct.delta_sigma == 0.0:
        _check_regime(d, fluct.delta)
        return 0.0
    hi = fluct.delta + fluct.delta_sigma
    lo = max(fluct.delta - fluct.delta_sigma, 0.0)
    f_hi = fluctuation_corrected_force(force_curve, d, hi)
    f_lo = fluctuation_corrected_force(force_curve, d, lo)
    return abs(f_hi - f_lo) / 2.0


def corrected_curve(force_curve, delta):
    """Wrap a raw theory curve as its fluctuation-corrected counterpart."""
    if delta == 0.0:
        return force_curve
    return lambda d: fluctuation_corrected_force(force_curve, d, delta)
