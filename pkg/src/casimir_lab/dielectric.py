"""Permittivity along the imaginary frequency axis.

Three model families are supported:

* ``DrudeModel``     eps(i xi) = 1 + omega_p^2 / (xi (xi + gamma))
* ``PlasmaModel``    eps(i xi) = 1 + omega_p^2 / xi^2
* ``TabulatedModel`` Kramers-Kronig transform of measured eps''(omega),
  assembled piecewise: an analytic Drude or plasma continuation below the
  table, the trapezoid rule across it, and a power-law tail above it.

``ConstantModel`` (a fixed permittivity) is kept for ideal-conductor limit
studies; a very large constant reproduces the perfectly reflecting results.

The xi = 0 point is deliberately excluded here: the zero-frequency reflection
coefficients are an analytic-limit decision that belongs to the force engine,
and it is exactly where the Drude and plasma descriptions part ways.
"""

import csv
from dataclasses import dataclass
from typing import Union

import numpy as np

from .constants import ev_to_angular_frequency
from .errors import ValidationError
from .quadrature import gauss_legendre

__all__ = [
    "DrudeModel",
    "PlasmaModel",
    "ConstantModel",
    "TabulatedModel",
    "OpticalTable",
    "DielectricModel",
    "eps_imag_axis",
    "load_optical_table",
    "gold_drude",
    "gold_plasma",
    "GOLD_OMEGA_P_EV",
    "GOLD_GAMMA_EV",
    "GOLD_OMEGA_P_RANGE_EV",
    "GOLD_GAMMA_RANGE_EV",
]

#: Gold Drude parameters (eV) used as defaults throughout.
GOLD_OMEGA_P_EV = 7.54
GOLD_GAMMA_EV = 0.051
#: Spread of values consistent with measured gold optical data (eV).
GOLD_OMEGA_P_RANGE_EV = (6.85, 9.00)
GOLD_GAMMA_RANGE_EV = (0.02, 0.061)


@dataclass(frozen=True)
class DrudeModel:
    """Free-electron metal with dissipation."""

    omega_p: float  # plasma frequency, rad/s
    gamma: float    # dissipation rate, rad/s

    def __post_init__(self):
        if self.omega_p <= 0.0:
            raise ValidationError(f"plasma frequency must be positive, got {self.omega_p}")
        if self.gamma <= 0.0:
            raise ValidationError(f"dissipation rate must be positive, got {self.gamma}")

    @classmethod
    def from_ev(cls, omega_p_ev, gamma_ev):
        return cls(ev_to_angular_frequency(omega_p_ev), ev_to_angular_frequency(gamma_ev))


@dataclass(frozen=True)
class PlasmaModel:
    """Dissipationless free-electron metal."""

    omega_p: float  # plasma frequency, rad/s

    def __post_init__(self):
        if self.omega_p <= 0.0:
            raise ValidationError(f"plasma frequency must be positive, got {self.omega_p}")

    @classmethod
    def from_ev(cls, omega_p_ev):
        return cls(ev_to_angular_frequency(omega_p_ev))


@dataclass(frozen=True)
class ConstantModel:
    """Frequency-independent permittivity (ideal-conductor studies)."""

    eps: float

    def __post_init__(self):
        if self.eps < 1.0:
            raise ValidationError(f"permittivity must be >= 1, got {self.eps}")


@dataclass(frozen=True)
class OpticalTable:
    """Measured imaginary permittivity on a strictly increasing frequency grid."""

    omega: np.ndarray     # rad/s
    eps_imag: np.ndarray  # dimensionless

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=float)
        eps_imag = np.asarray(self.eps_imag, dtype=float)
        if omega.ndim != 1 or eps_imag.ndim != 1 or omega.size != eps_imag.size:
            raise ValidationError("optical table needs matching 1-d frequency and eps'' columns")
        if omega.size < 2:
            raise ValidationError(f"optical table needs at least 2 rows, got {omega.size}")
        if not np.all(np.isfinite(omega)) or not np.all(np.isfinite(eps_imag)):
            raise ValidationError("optical table contains non-finite entries")
        if omega[0] <= 0.0:
            raise ValidationError("optical table frequencies must be positive")
        bad = np.nonzero(np.diff(omega) <= 0.0)[0]
        if bad.size:
            raise ValidationError(
                f"optical table frequencies must be strictly increasing; row {bad[0] + 2} is not"
            )
        neg = np.nonzero(eps_imag < 0.0)[0]
        if neg.size:
            raise ValidationError(f"eps'' must be non-negative; row {neg[0] + 1} is negative")
        omega.setflags(write=False)
        eps_imag.setflags(write=False)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "eps_imag", eps_imag)


@dataclass(frozen=True)
class TabulatedModel:
    """Kramers-Kronig permittivity from tabulated eps''(omega).

    Parameters
    ----------
    table : OpticalTable
        Measured eps'' rows.
    extrapolation : DrudeModel, PlasmaModel or None
        Analytic continuation of eps'' below the table.  The plasma choice
        contributes its zero-width free-carrier resonance, omega_p^2/xi^2,
        in closed form.  None means eps'' = 0 below the table (useful for
        bound-charge-only oracles).
    tail_exponent : float
        eps'' falls off as omega^(-s) above the table, continuous at the
        upper edge.  s = 3 matches the large-frequency behavior of both the
        Drude and Lorentz oscillator forms.
    """

    table: OpticalTable
    extrapolation: Union[DrudeModel, PlasmaModel, None]
    tail_exponent: float = 3.0

    def __post_init__(self):
        if self.tail_exponent < 1.0:
            raise ValidationError(
                f"tail exponent must be >= 1 for an integrable tail, got {self.tail_exponent}"
            )


DielectricModel = Union[DrudeModel, PlasmaModel, ConstantModel, TabulatedModel]


def _drude_band_integral(omega_p, gamma, upper, xi):
    """(2/pi) * int_0^upper omega*eps''_Drude/(omega^2+xi^2) domega, closed form.

    Partial fractions give A(gamma) - A(xi) over (xi^2 - gamma^2) with
    A(z) = arctan(upper/z)/z; the xi -> gamma limit is filled by the
    derivative of A to keep the expression numerically stable there.
    """
    xi = np.asarray(xi, dtype=float)

    def a_of(z):
        return np.arctan(upper / z) / z

    def a_prime(z):
        return -(upper / (z * (z * z + upper * upper)) + np.arctan(upper / z) / (z * z))

    near = np.abs(xi - gamma) <= 1e-6 * gamma
    safe_xi = np.where(near, gamma * 2.0, xi)  # keep the generic branch finite
    generic = (a_of(gamma) - a_of(safe_xi)) / (safe_xi ** 2 - gamma ** 2)
    midpoint = 0.5 * (xi + gamma)
    degenerate = -a_prime(midpoint) / (xi + gamma)
    ratio = np.where(near, degenerate, generic)
    return (2.0 * omega_p ** 2 * gamma / np.pi) * ratio


def _table_band_integral(table, xi):
    """Trapezoid rule for (2/pi) * int omega*eps''/(omega^2+xi^2) over the table."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    integrand = (2.0 / np.pi) * table.omega * table.eps_imag / (
        table.omega ** 2 + xi[:, None] ** 2
    )
    return np.trapezoid(integrand, table.omega, axis=-1)


def _tail_integral(table, s, xi):
    """Power-law tail above the table, eps'' = eps''(W) (W/omega)^s.

    Substituting omega = W/u maps the tail onto u in (0, 1]:
    (2/pi) eps''(W) * int_0^1 W^2 u^(s-1) / (W^2 + xi^2 u^2) du.
    """
    w = table.omega[-1]
    amp = table.eps_imag[-1]
    if amp == 0.0:
        return np.zeros_like(np.atleast_1d(np.asarray(xi, dtype=float)))
    xi = np.atleast_1d(np.asarray(xi, dtype=float))

    # Node doubling on a fixed panel split of (0, 1]; the integrand is smooth
    # but steepens near u ~ W/xi when xi >> W.
    edges = (0.0, 0.125, 0.25, 0.5, 1.0)
    result = np.zeros(xi.shape)
    for a, b in zip(edges[:-1], edges[1:]):
        n = 16
        prev = None
        while True:
            x, wts = gauss_legendre(n)
            u = a + 0.5 * (b - a) * (x + 1.0)
            vals = u ** (s - 1.0) * w * w / (w * w + (xi[:, None] * u) ** 2)
            est = 0.5 * (b - a) * (vals @ wts)
            if prev is not None and np.max(np.abs(est - prev)) <= 1e-12 * max(
                np.max(np.abs(est)), np.finfo(float).tiny
            ):
                break
            if n >= 512:
                break
            prev = est
            n *= 2
        result += est
    return (2.0 / np.pi) * amp * result


def _tabulated_eps_minus_one(model, xi):
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    table = model.table
    low = np.zeros(xi.shape)
    extra = model.extrapolation
    if isinstance(extra, DrudeModel):
        low = _drude_band_integral(extra.omega_p, extra.gamma, table.omega[0], xi)
    elif isinstance(extra, PlasmaModel):
        # Zero-width free-carrier resonance at omega = 0; its transform is exact.
        low = extra.omega_p ** 2 / xi ** 2
    return low + _table_band_integral(table, xi) + _tail_integral(table, model.tail_exponent, xi)


def eps_imag_axis(model, xi):
    """Permittivity eps(i xi) along the imaginary frequency axis.

    Parameters
    ----------
    model : DielectricModel
        Drude, plasma, constant or tabulated description.
    xi : float or array_like
        Imaginary angular frequency in rad/s, strictly positive.

    Returns
    -------
    float or numpy.ndarray
        eps(i xi), real and >= 1, shaped like ``xi``.
    """
    xi_arr = np.asarray(xi, dtype=float)
    if np.any(xi_arr <= 0.0):
        raise ValueError("xi must be positive; the xi = 0 limit is a model-family dispatch")

    if isinstance(model, DrudeModel):
        out = 1.0 + model.omega_p ** 2 / (xi_arr * (xi_arr + model.gamma))
    elif isinstance(model, PlasmaModel):
        out = 1.0 + model.omega_p ** 2 / xi_arr ** 2
    elif isinstance(model, ConstantModel):
        out = np.full(np.shape(xi_arr), model.eps)
    elif isinstance(model, TabulatedModel):
        out = 1.0 + _tabulated_eps_minus_one(model, xi_arr).reshape(np.shape(xi_arr))
    else:
        raise TypeError(f"unknown dielectric model {type(model).__name__}")
    if np.ndim(xi) == 0:
        return float(out)
    return out


def static_eps(model):
    """eps(i xi -> 0) where it is finite (constant and bound-charge models)."""
    if isinstance(model, ConstantModel):
        return model.eps
    if isinstance(model, TabulatedModel) and model.extrapolation is None:
        table = model.table
        core = np.trapezoid((2.0 / np.pi) * table.eps_imag / table.omega, table.omega)
        tail = (2.0 / np.pi) * table.eps_imag[-1] / model.tail_exponent
        return 1.0 + float(core + tail)
    raise ValueError(f"{type(model).__name__} diverges at zero frequency")


def gold_drude():
    """Gold with the default Drude parameters."""
    return DrudeModel.from_ev(GOLD_OMEGA_P_EV, GOLD_GAMMA_EV)


def gold_plasma():
    """Gold with the default plasma-model parameters."""
    return PlasmaModel.from_ev(GOLD_OMEGA_P_EV)


def load_optical_table(path):
    """Read an optical-data CSV with header ``photon_energy_ev,eps_imag``.

    Energies are converted to angular frequencies; rows must arrive in
    strictly increasing energy order.  Any malformed row raises
    :class:`ValidationError` naming the offending line.
    """
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty file") from None
        if [h.strip() for h in header] != ["photon_energy_ev", "eps_imag"]:
            raise ValidationError(
                f"{path}: expected header 'photon_energy_ev,eps_imag', got {','.join(header)!r}"
            )
        energies = []
        eps_vals = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 2:
                raise ValidationError(f"{path}: line {line_no} has {len(row)} columns, expected 2")
            try:
                energy = float(row[0])
                eps = float(row[1])
            except ValueError:
                raise ValidationError(f"{path}: line {line_no} is not numeric: {row!r}") from None
            if energies and energy <= energies[-1]:
                raise ValidationError(
                    f"{path}: line {line_no} is out of order (energies must strictly increase)"
                )
            if eps < 0.0:
                raise ValidationError(f"{path}: line {line_no} has negative eps''")
            energies.append(energy)
            eps_vals.append(eps)
    if len(energies) < 2:
        raise ValidationError(f"{path}: need at least 2 data rows, got {len(energies)}")
    omega = np.array([ev_to_angular_frequency(e) for e in energies])
    return OpticalTable(omega=omega, eps_imag=np.array(eps_vals))
