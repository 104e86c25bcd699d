"""Lifshitz free energy and force for metallic plates and the sphere-plane map.

The finite-temperature free energy per unit area between identical half
spaces across a vacuum gap d is

    F(d, T) = (k_B T / 2 pi) * sum'_{n>=0} int_0^inf k dk
              sum_{p in {TE, TM}} ln(1 - r_p^2 exp(-2 kappa0 d))

with kappa0 = sqrt(k^2 + xi_n^2/c^2), Matsubara frequencies
xi_n = 2 pi n k_B T / hbar, and the prime halving the n = 0 term.  At T = 0
the ladder becomes the integral (hbar / 2 pi) int_0^inf dxi of the same
k-integral, evaluated here on a tensor-product panel grid.

Everything is computed in the dimensionless variable y = 2 kappa0 d, where
each kernel decays like exp(-y); the k-integral for Matsubara index n starts
at y_min = 2 xi_n d / c.

Sign convention: free energy negative, attractive pressures and forces
positive.  That matches how sphere-plane force curves are usually plotted.

The n = 0 term is a model-family dispatch, never a numerical xi -> 0 limit:
a dissipative free-electron metal loses its zero-frequency TE mode entirely,
a dissipationless one keeps it.  The finite-temperature force difference
between those two descriptions is the physics this package exists to model.
"""

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .constants import BOLTZMANN, HBAR, SPEED_OF_LIGHT, ZETA3
from .dielectric import (
    ConstantModel,
    DrudeModel,
    PlasmaModel,
    TabulatedModel,
    eps_imag_axis,
    static_eps,
)
from .errors import PfaValidityWarning
from .quadrature import integrate_decaying, integrate_decaying_2d

__all__ = [
    "Geometry",
    "QuadratureSpec",
    "ReflectionPair",
    "reflection_coeffs",
    "reflection_coeffs_zero_mode",
    "free_energy_per_area",
    "pressure_parallel",
    "force_sphere_plane",
    "force_sphere_plane_T0",
    "force_sphere_plane_grid",
    "asymptote_thermal",
    "sensitivity_band",
    "BandResult",
    "thread_count",
]

#: PFA is the only sphere-plane mapping implemented; past this aspect ratio
#: its error is no longer negligible and callers get warned.
PFA_RATIO_LIMIT = 1e-3

_C = SPEED_OF_LIGHT


@dataclass(frozen=True)
class QuadratureSpec:
    """Numerical accuracy knobs shared by every engine entry point."""

    rel_tol: float = 1e-8
    max_matsubara: int = 100_000
    k_nodes: int = 8

    def __post_init__(self):
        if not 0.0 < self.rel_tol <= 1e-3:
            raise ValueError(f"rel_tol must be in (0, 1e-3], got {self.rel_tol}")
        if self.max_matsubara < 1:
            raise ValueError(f"max_matsubara must be >= 1, got {self.max_matsubara}")
        if self.k_nodes < 2:
            raise ValueError(f"k_nodes must be >= 2, got {self.k_nodes}")


DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class Geometry:
    """Sphere-plane geometry: radius of curvature R and gap d."""

    radius: float      # m
    separation: float  # m

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if self.separation <= 0.0:
            raise ValueError(f"separation must be positive, got {self.separation}")

    @property
    def pfa_ratio(self):
        return self.separation / self.radius

    @property
    def pfa_valid(self):
        return self.pfa_ratio < PFA_RATIO_LIMIT


class ReflectionPair(NamedTuple):
    r_te: float
    r_tm: float


def reflection_coeffs(k, xi, eps):
    """Fresnel reflection coefficients at imaginary frequency.

    Parameters
    ----------
    k : float or array_like
        Transverse wavevector in 1/m, strictly positive.
    xi : float or array_like
        Imaginary angular frequency in rad/s, non-negative.
    eps : float or array_like
        Permittivity eps(i xi) >= 1.

    Returns
    -------
    ReflectionPair
        (r_te, r_tm) with kappa0 = sqrt(k^2 + xi^2/c^2) and
        kappa = sqrt(k^2 + eps xi^2/c^2).  At xi = 0 with finite eps this
        reduces to the static dielectric limit (r_te = 0); metallic
        zero-frequency behavior belongs to
        :func:`reflection_coeffs_zero_mode`.
    """
    k = np.asarray(k, dtype=float)
    if np.any(k <= 0.0):
        raise ValueError("transverse wavevector must be positive")
    xi = np.asarray(xi, dtype=float)
    eps = np.asarray(eps, dtype=float)
    kappa0 = np.sqrt(k * k + (xi / _C) ** 2)
    # kappa^2 = kappa0^2 + (eps - 1) xi^2/c^2 avoids cancellation for eps ~ 1
    kappa = np.sqrt(kappa0 ** 2 + (eps - 1.0) * (xi / _C) ** 2)
    r_te = (kappa0 - kappa) / (kappa0 + kappa)
    r_tm = (eps * kappa0 - kappa) / (eps * kappa0 + kappa)
    return ReflectionPair(r_te, r_tm)


def reflection_coeffs_zero_mode(k, model):
    """Zero-frequency reflection coefficients by model family.

    Dissipative free-electron metals (Drude family) lose the TE zero mode:
    (0, 1).  Dissipationless ones (plasma family) keep a finite TE
    reflection that depends on k through the plasma wavevector omega_p/c.
    Constant and bound-charge models take the static dielectric limit.
    """
    k = np.asarray(k, dtype=float)
    if np.any(k <= 0.0):
        raise ValueError("transverse wavevector must be positive")

    family = _zero_mode_family(model)
    if family[0] == "drude":
        return ReflectionPair(np.zeros_like(k), np.ones_like(k))
    if family[0] == "plasma":
        kp = family[1] / _C
        root = np.sqrt(k * k + kp * kp)
        return ReflectionPair((k - root) / (k + root), np.ones_like(k))
    eps0 = family[1]
    r = (eps0 - 1.0) / (eps0 + 1.0)
    return ReflectionPair(np.zeros_like(k), np.full_like(k, r))


def _zero_mode_family(model):
    """Resolve a model to its zero-frequency family tag."""
    if isinstance(model, DrudeModel):
        return ("drude", None)
    if isinstance(model, PlasmaModel):
        return ("plasma", model.omega_p)
    if isinstance(model, ConstantModel):
        return ("dielectric", model.eps)
    if isinstance(model, TabulatedModel):
        extra = model.extrapolation
        if isinstance(extra, DrudeModel):
            return ("drude", None)
        if isinstance(extra, PlasmaModel):
            return ("plasma", extra.omega_p)
        return ("dielectric", static_eps(model))
    raise TypeError(f"unknown dielectric model {type(model).__name__}")


def _sum_log_terms(r_te, r_tm, expy):
    return np.log1p(-r_te * r_te * expy) + np.log1p(-r_tm * r_tm * expy)


def _sum_pressure_terms(r_te, r_tm, expy):
    s_te = r_te * r_te * expy
    s_tm = r_tm * r_tm * expy
    return s_te / (1.0 - s_te) + s_tm / (1.0 - s_tm)


def _zero_mode_integrand(model, d, y, kind):
    k = y / (2.0 * d)
    r_te, r_tm = reflection_coeffs_zero_mode(k, model)
    expy = np.exp(-y)
    if kind == "energy":
        return y * _sum_log_terms(r_te, r_tm, expy)
    return y * y * _sum_pressure_terms(r_te, r_tm, expy)


def _matsubara_rows_integrand(model, xi, d, t, kind):
    """Kernel rows for xi > 0, one row per Matsubara index, columns = t nodes."""
    y_min = (2.0 * xi * d / _C)[:, None]
    y = y_min + t[None, :]
    kappa0 = y / (2.0 * d)
    eps = np.asarray(eps_imag_axis(model, xi))[:, None]
    xi_c = (xi / _C)[:, None]
    kappa = np.sqrt(kappa0 ** 2 + (eps - 1.0) * xi_c ** 2)
    r_te = (kappa0 - kappa) / (kappa0 + kappa)
    r_tm = (eps * kappa0 - kappa) / (eps * kappa0 + kappa)
    expy = np.exp(-y)
    if kind == "energy":
        return y * _sum_log_terms(r_te, r_tm, expy)
    return y * y * _sum_pressure_terms(r_te, r_tm, expy)


def _matsubara_ladder(d, T, model, spec, kind):
    """Adaptively truncated Matsubara sum of the dimensionless y-integrals.

    Returns sum'_n I_n with I_n = int y^m * kernel dy (m = 1 for energy,
    2 for pressure).  Terms are evaluated in one vectorized pass up to the
    exp(-2 xi_n d / c) decay cap, then summed through the first index whose
    relative contribution drops below rel_tol.
    """
    # Terms decay like exp(-n * 4 pi k_B T d / (hbar c)); at the cap the
    # neglected tail is below exp(-30) of the total.
    decay_cap = math.ceil(15.0 * HBAR * _C / (2.0 * math.pi * BOLTZMANN * T * d)) + 10
    n_cap = min(spec.max_matsubara, decay_cap)

    i_zero = integrate_decaying(
        lambda y: _zero_mode_integrand(model, d, y, kind),
        spec.rel_tol,
        node_start=spec.k_nodes,
    )
    xi = 2.0 * math.pi * BOLTZMANN * T / HBAR * np.arange(1, n_cap + 1)
    rows = integrate_decaying(
        lambda t: _matsubara_rows_integrand(model, xi, d, t, kind),
        spec.rel_tol,
        node_start=spec.k_nodes,
    )

    terms = np.concatenate(([0.5 * i_zero], np.atleast_1d(rows)))
    partial = np.cumsum(terms)
    small = np.abs(terms[1:]) <= spec.rel_tol * np.abs(partial[1:])
    stop = np.nonzero(small)[0]
    if stop.size == 0:
        achieved = abs(terms[-1]) / max(abs(partial[-1]), np.finfo(float).tiny)
        if n_cap == spec.max_matsubara:
            from .errors import ConvergenceError

            raise ConvergenceError(
                f"Matsubara ladder not converged after {n_cap} terms", achieved, spec.rel_tol
            )
        return partial[-1]
    return partial[stop[0] + 1]


def _t0_double_integral(d, model, spec, kind):
    """Zero-temperature tensor-product integral in (x, t) = (2 xi d/c, y - x)."""

    def integrand(x, t):
        xi = x * _C / (2.0 * d)
        y = x + t
        kappa0 = y / (2.0 * d)
        # xi = 0 on a measure-zero edge; nudge to keep eps(i xi) defined
        xi_safe = np.maximum(xi, 1e-30)
        eps = np.asarray(eps_imag_axis(model, xi_safe))
        kappa = np.sqrt(kappa0 ** 2 + (eps - 1.0) * (xi_safe / _C) ** 2)
        r_te = (kappa0 - kappa) / (kappa0 + kappa)
        r_tm = (eps * kappa0 - kappa) / (eps * kappa0 + kappa)
        expy = np.exp(-y)
        if kind == "energy":
            return y * _sum_log_terms(r_te, r_tm, expy)
        return y * y * _sum_pressure_terms(r_te, r_tm, expy)

    return integrate_decaying_2d(integrand, spec.rel_tol, node_start=spec.k_nodes)


def _validate_dT(d, T):
    if d <= 0.0:
        raise ValueError(f"separation must be positive, got {d}")
    if T < 0.0:
        raise ValueError(f"temperature must be non-negative, got {T}")


def free_energy_per_area(d, T, model, spec=DEFAULT_SPEC):
    """Lifshitz free energy per unit plate area, in J/m^2 (negative).

    Parameters
    ----------
    d : float
        Plate separation in m.
    T : float
        Temperature in K.  T = 0 dispatches to the dedicated
        imaginary-frequency integral rather than a small-T ladder.
    model : DielectricModel
        Plate material response.
    spec : QuadratureSpec
        Accuracy parameters.

    Returns
    -------
    float
        F(d, T) <= 0; more negative means stronger attraction.
    """
    _validate_dT(d, T)
    if T == 0.0:
        value = _t0_double_integral(d, model, spec, "energy")
        return HBAR * _C / (32.0 * math.pi ** 2 * d ** 3) * value
    ladder = _matsubara_ladder(d, T, model, spec, "energy")
    return BOLTZMANN * T / (2.0 * math.pi) / (4.0 * d * d) * ladder


def pressure_parallel(d, T, model, spec=DEFAULT_SPEC):
    """Attractive pressure between parallel plates, in N/m^2 (positive).

    Evaluates the differentiated Lifshitz integrand
    (k_B T / pi) sum'_n int k dk kappa0 sum_p s_p/(1 - s_p) with
    s_p = r_p^2 exp(-2 kappa0 d); equal to |dF/dd| of
    :func:`free_energy_per_area`.
    """
    _validate_dT(d, T)
    if T == 0.0:
        value = _t0_double_integral(d, model, spec, "pressure")
        return HBAR * _C / (32.0 * math.pi ** 2 * d ** 4) * value
    ladder = _matsubara_ladder(d, T, model, spec, "pressure")
    return BOLTZMANN * T / math.pi / (8.0 * d ** 3) * ladder


def force_sphere_plane(d, T, R, model, spec=DEFAULT_SPEC):
    """Sphere-plane force via the proximity force approximation, in N.

    F = 2 pi R |free_energy_per_area(d, T)|, positive for attraction.
    Warns, without failing, when d/R exceeds the PFA validity ratio.
    """
    geometry = Geometry(radius=R, separation=d)
    if not geometry.pfa_valid:
        warnings.warn(
            f"d/R = {geometry.pfa_ratio:.2e} exceeds {PFA_RATIO_LIMIT:.0e}; "
            "the proximity force approximation degrades",
            PfaValidityWarning,
            stacklevel=2,
        )
    return 2.0 * math.pi * R * abs(free_energy_per_area(d, T, model, spec))


def force_sphere_plane_T0(d, R, model, spec=DEFAULT_SPEC):
    """Zero-temperature sphere-plane force (PFA), in N."""
    return force_sphere_plane(d, 0.0, R, model, spec)


def asymptote_thermal(d, R, T, which):
    """Closed-form large-separation thermal force, in N.

    zeta(3) R k_B T / (8 d^2) when the TE zero mode is absent ("drude"),
    twice that when it survives ("plasma").
    """
    if d <= 0.0 or R <= 0.0:
        raise ValueError("separation and radius must be positive")
    if T < 0.0:
        raise ValueError(f"temperature must be non-negative, got {T}")
    if which == "drude":
        return ZETA3 * R * BOLTZMANN * T / (8.0 * d * d)
    if which == "plasma":
        return ZETA3 * R * BOLTZMANN * T / (4.0 * d * d)
    raise ValueError(f"model family must be 'drude' or 'plasma', got {which!r}")


def thread_count():
    """Worker count for grid evaluation, from CASIMIR_LAB_THREADS (0 = auto)."""
    raw = os.environ.get("CASIMIR_LAB_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"CASIMIR_LAB_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError(f"CASIMIR_LAB_THREADS must be >= 0, got {n}")
    if n == 0:
        return min(4, os.cpu_count() or 1)
    return n


def _map_ordered(fn, items):
    """Map preserving order; results are identical for any worker count."""
    items = list(items)
    workers = thread_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def force_sphere_plane_grid(separations, T, R, model, spec=DEFAULT_SPEC):
    """Sphere-plane force on a separation grid, evaluated point-independent.

    Grid points are mutually independent, so the result does not depend on
    how the work is scheduled across threads.
    """
    forces = _map_ordered(lambda d: force_sphere_plane(d, T, R, model, spec), separations)
    return np.array(forces)


@dataclass(frozen=True)
class BandResult:
    """Force envelope over a Drude/plasma parameter box."""

    separations: np.ndarray
    f_min: np.ndarray
    f_center: np.ndarray
    f_max: np.ndarray


def sensitivity_band(
    d_grid,
    T,
    omega_p_range,
    gamma_range,
    model_family,
    R,
    spec=DEFAULT_SPEC,
):
    """Force envelope from the metal-parameter uncertainty box.

    Evaluates the force at the four corners of
    (omega_p_range x gamma_range) plus the central parameter set and
    returns the per-separation min/center/max.  The plasma family has no
    dissipation parameter, so the gamma axis collapses there.

    Parameters
    ----------
    d_grid : array_like
        Separations in m, non-empty.
    T : float
        Temperature in K (0 selects the zero-temperature theory).
    omega_p_range, gamma_range : (float, float)
        Plasma frequency and dissipation bounds in rad/s.
    model_family : str
        'drude' or 'plasma'.
    R : float
        Sphere radius of curvature in m.
    """
    d_grid = np.asarray(list(d_grid), dtype=float)
    if d_grid.size == 0:
        raise ValueError("separation grid must be non-empty")
    wp_lo, wp_hi = sorted(float(v) for v in omega_p_range)
    g_lo, g_hi = sorted(float(v) for v in gamma_range)
    if wp_lo <= 0.0 or g_lo <= 0.0:
        raise ValueError("parameter ranges must be positive")

    if model_family == "drude":
        corners = [(wp, g) for wp in (wp_lo, wp_hi) for g in (g_lo, g_hi)]
        center = (0.5 * (wp_lo + wp_hi), 0.5 * (g_lo + g_hi))
        make = lambda wp, g: DrudeModel(omega_p=wp, gamma=g)
    elif model_family == "plasma":
        corners = [(wp, g) for wp in (wp_lo, wp_hi) for g in (g_lo, g_hi)]
        center = (0.5 * (wp_lo + wp_hi), 0.5 * (g_lo + g_hi))
        make = lambda wp, g: PlasmaModel(omega_p=wp)
    else:
        raise ValueError(f"model family must be 'drude' or 'plasma', got {model_family!r}")

    parameter_sets = corners + [center]
    curves = [
        force_sphere_plane_grid(d_grid, T, R, make(wp, g), spec) for wp, g in parameter_sets
    ]
    stacked = np.vstack(curves)
    return BandResult(
        separations=d_grid,
        f_min=stacked.min(axis=0),
        f_center=curves[-1],
        f_max=stacked.max(axis=0),
    )
