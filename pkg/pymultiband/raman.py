"""
Inter-channel stimulated Raman scattering in pymultiband.

Per-span power evolution of a WDM comb: adaptive Runge-Kutta solution of the coupled Raman
equations, the closed-form triangular-gain solution used to cross-check it, and the
profile-derived quantities (effective length, net gain) consumed by the noise and nli modules.

Units: km, THz, W. Raman efficiency Cr in 1/(W km).
"""
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp, trapezoid

__all__ = [
    "RamanGainSpec",
    "FiberSpan",
    "PowerProfile",
    "SolverControl",
    "PropagationError",
    "generic_smf",
    "propagate",
    "triangular_profile",
    "effective_length",
    "effective_lengths",
    "net_gain",
    "net_gains",
]

DB_TO_NEPER = np.log(10) / 10


class PropagationError(RuntimeError):
    pass


def _as_table(value):
    """scalar or [(THz, value), ...] -> hashable representation"""
    if np.isscalar(value):
        return float(value)
    table = tuple(sorted((float(f), float(v)) for f, v in value))
    if not table:
        raise ValueError("empty frequency table")
    return table


def _interp_table(table, f):
    if isinstance(table, float):
        return np.full(np.shape(f), table) if np.ndim(f) else table
    freqs, values = zip(*table)
    return np.interp(f, freqs, values)


@dataclass(frozen=True)
class RamanGainSpec:
    """
    Raman efficiency Cr(df), defined for the lower-frequency channel of a pair

    Use the constructors :meth:`triangular`, :meth:`tabulated` and :meth:`off`.

    Parameters
    ----------
    kind : str
        'triangular' or 'tabulated'
    slope : float
        Triangular slope, 1/(W km THz)
    cutoff : float
        Triangular cutoff, THz
    points : tuple
        Tabulated ((df THz, Cr 1/(W km)), ...), linearly interpolated, zero beyond the table
    photon_flux_correction : bool
        Scale the depletion of higher-frequency channels by f_i / f_j
    """

    kind: str = "triangular"
    slope: float = 0.028
    cutoff: float = 25.0
    points: tuple = ()
    photon_flux_correction: bool = True

    def __post_init__(self):
        if self.kind not in ("triangular", "tabulated"):
            raise ValueError(f"unknown Raman gain kind {self.kind}")
        if self.kind == "triangular" and (self.slope < 0 or self.cutoff <= 0):
            raise ValueError("triangular Raman gain needs slope >= 0 and cutoff > 0")
        if self.kind == "tabulated":
            points = tuple(sorted((float(df), float(cr)) for df, cr in self.points))
            if len(points) < 2:
                raise ValueError("tabulated Raman gain needs at least two points")
            if points[0][0] != 0 or points[0][1] != 0:
                raise ValueError("tabulated Raman gain must start at (0, 0)")
            if any(df < 0 or cr < 0 for df, cr in points):
                raise ValueError("tabulated Raman gain must be non-negative")
            object.__setattr__(self, "points", points)

    @classmethod
    def triangular(cls, slope=0.028, cutoff=25.0, photon_flux_correction=True):
        return cls("triangular", slope=slope, cutoff=cutoff, photon_flux_correction=photon_flux_correction)

    @classmethod
    def tabulated(cls, points, photon_flux_correction=True):
        return cls("tabulated", points=tuple(points), photon_flux_correction=photon_flux_correction)

    @classmethod
    def off(cls):
        return cls("triangular", slope=0.0, cutoff=1.0, photon_flux_correction=False)

    @property
    def is_off(self):
        return self.kind == "triangular" and self.slope == 0

    def cr(self, df):
        """Raman efficiency at frequency offset(s) `df` (THz), 1/(W km)"""
        df = np.asarray(df, dtype=float)
        if self.kind == "triangular":
            return np.where((df >= 0) & (df <= self.cutoff), self.slope * df, 0.0)
        offsets, values = zip(*self.points)
        return np.where(df >= 0, np.interp(df, offsets, values, left=0.0, right=0.0), 0.0)


@dataclass(frozen=True)
class FiberSpan:
    """
    One fiber span

    Parameters
    ----------
    length : float
        Span length (km)
    alpha : float or sequence of (THz, dB/km)
        Attenuation, scalar or piecewise-linear table
    D_ref : float
        Dispersion at `lambda_ref`, ps/(nm km)
    S_ref : float
        Dispersion slope, ps/(nm^2 km)
    lambda_ref : float
        Reference wavelength (nm)
    gamma : float or sequence of (THz, 1/(W km))
        Nonlinearity coefficient, scalar or table
    raman : RamanGainSpec
        Raman efficiency
    """

    length: float
    alpha: object = 0.2
    D_ref: float = 16.7
    S_ref: float = 0.067
    lambda_ref: float = 1550.0
    gamma: object = 1.3
    raman: RamanGainSpec = field(default_factory=RamanGainSpec.triangular)

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError(f"span length must be positive, got {self.length}")
        alpha, gamma = _as_table(self.alpha), _as_table(self.gamma)
        for name, table in (("alpha", alpha), ("gamma", gamma)):
            values = [table] if isinstance(table, float) else [v for _, v in table]
            if name == "alpha" and min(values) < 0:
                raise ValueError("attenuation must be non-negative")
            if name == "gamma" and min(values) < 0:
                raise ValueError("nonlinearity coefficient must be non-negative")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "gamma", gamma)

    def alpha_db_at(self, f):
        """Attenuation at `f` (THz), dB/km"""
        return _interp_table(self.alpha, f)

    def alpha_at(self, f):
        """Power attenuation at `f` (THz), 1/km"""
        return DB_TO_NEPER * self.alpha_db_at(f)

    def gamma_at(self, f):
        """Nonlinearity coefficient at `f` (THz), 1/(W km)"""
        return _interp_table(self.gamma, f)

    def without_raman(self):
        return replace(self, raman=RamanGainSpec.off())


def generic_smf(length=100.0, raman=None):
    """Generic SMF span used when no fiber characterisation is available"""
    return FiberSpan(
        length=length,
        alpha=((184.0, 0.232), (190.0, 0.222), (193.5, 0.220), (198.0, 0.224), (203.0, 0.232), (209.5, 0.248)),
        D_ref=16.7,
        S_ref=0.067,
        lambda_ref=1550.0,
        gamma=((184.0, 1.21), (193.5, 1.30), (209.5, 1.45)),
        raman=raman if raman is not None else RamanGainSpec.triangular(),
    )


@dataclass(frozen=True)
class SolverControl:
    rel_tol: float = 1e-8
    max_step_km: float = 1.0

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.max_step_km > 0):
            raise ValueError("solver tolerances must be positive")


@dataclass(frozen=True, eq=False)
class PowerProfile:
    """
    Channel powers along one span

    Attributes
    ----------
    z_grid : numpy.ndarray
        Positions (km), ascending from 0 to the span length
    powers : numpy.ndarray
        Powers (W), shape (len(z_grid), n_channels); powers[0] are the span input powers
    """

    z_grid: np.ndarray
    powers: np.ndarray

    def __post_init__(self):
        z_grid = np.array(self.z_grid, dtype=float)
        powers = np.array(self.powers, dtype=float)
        if powers.ndim != 2 or powers.shape[0] != z_grid.size:
            raise ValueError("profile powers must have one row per z position")
        if not np.all(np.isfinite(powers)) or np.any(powers <= 0):
            raise ValueError("profile powers must be finite and strictly positive")
        z_grid.flags.writeable = False
        powers.flags.writeable = False
        object.__setattr__(self, "z_grid", z_grid)
        object.__setattr__(self, "powers", powers)

    @property
    def length(self):
        return self.z_grid[-1]

    @property
    def rho(self):
        """Powers normalised to the span input"""
        return self.powers / self.powers[0]


def _coupling_matrix(raman, freqs):
    """M[i, j] such that dP_i/dz = -alpha_i P_i + P_i (M @ P)_i"""
    df = freqs[None, :] - freqs[:, None]  # f_j - f_i
    gain = raman.cr(np.abs(df))
    if raman.photon_flux_correction:
        depletion = (freqs[:, None] / freqs[None, :]) * gain
    else:
        depletion = gain
    return np.where(df > 0, gain, np.where(df < 0, -depletion, 0.0))


def propagate(span, input_powers, grid, ctrl=None):
    """
    Solve the coupled Raman equations along one span

    Parameters
    ----------
    span : FiberSpan
        Fiber span
    input_powers : array_like
        Span input power per channel (W)
    grid : ChannelGrid
        Channel grid (frequencies)
    ctrl : SolverControl, optional
        Relative tolerance and maximum step (km)

    Returns
    -------
    PowerProfile
        Powers on the accepted Runge-Kutta steps, both endpoints included
    """
    ctrl = ctrl or SolverControl()
    p0 = np.asarray(input_powers, dtype=float)
    freqs = grid.frequencies
    if p0.shape != freqs.shape:
        raise ValueError(f"{p0.size} input powers for {freqs.size} channels")
    if np.any(p0 <= 0):
        raise ValueError("input powers must be strictly positive")

    alpha = span.alpha_at(freqs) * np.ones_like(freqs)
    coupling = _coupling_matrix(span.raman, freqs)

    def rhs(z, p):
        return p * (coupling @ p - alpha)

    def vanishing(z, p):
        return np.min(p)

    vanishing.terminal = True
    vanishing.direction = -1

    sol = solve_ivp(
        rhs,
        (0.0, span.length),
        p0,
        method="RK45",
        rtol=ctrl.rel_tol,
        atol=ctrl.rel_tol * 1e-3 * p0.min(),
        max_step=ctrl.max_step_km,
        events=vanishing,
    )
    if sol.status == 1:
        z = sol.t_events[0][0]
        channel = int(np.argmin(sol.y_events[0][0]))
        raise PropagationError(f"non-positive power on channel {channel} at z = {z:.6g} km")
    if sol.status != 0:
        raise PropagationError(f"Raman integration failed at z = {sol.t[-1]:.6g} km: {sol.message}")
    return PowerProfile(sol.t, sol.y.T)


def triangular_profile(span, input_powers, z, grid):
    """
    Closed-form power-conserving solution for a triangular Raman gain

    Assumes frequency-flat attenuation (taken at the comb centre) and no cutoff within the comb.

    Parameters
    ----------
    span : FiberSpan
        Span whose `raman` is triangular
    input_powers : array_like
        Input power per channel (W)
    z : float
        Position (km), 0 <= z <= span.length
    grid : ChannelGrid
        Channel grid (frequencies)

    Returns
    -------
    numpy.ndarray
        Power per channel at `z` (W)
    """
    if span.raman.kind != "triangular":
        raise ValueError("triangular_profile requires a triangular Raman gain")
    if not 0 <= z <= span.length:
        raise ValueError(f"z = {z} km outside the span [0, {span.length}]")
    p0 = np.asarray(input_powers, dtype=float)
    freqs = grid.frequencies
    alpha = float(span.alpha_at((freqs.min() + freqs.max()) / 2))
    l_eff = z if alpha == 0 else -np.expm1(-alpha * z) / alpha
    p_tot = p0.sum()

    # offsets from the mean frequency keep the exponentials bounded; the ratio is unchanged
    exponent = -p_tot * span.raman.slope * l_eff * (freqs - freqs.mean())
    weights = np.exp(exponent - exponent.max())
    return p0 * np.exp(-alpha * z) * p_tot * weights / np.sum(p0 * weights)


def effective_lengths(profile):
    """Effective length of every channel (km)"""
    return trapezoid(profile.rho, profile.z_grid, axis=0)


def effective_length(profile, channel):
    """
    Effective length of one channel, trapezoidal integral of P_i(z) / P_i(0) (km)
    """
    return float(effective_lengths(profile)[channel])


def net_gains(profile):
    return profile.powers[-1] / profile.powers[0]


def net_gain(profile, channel):
    """P_i(L) / P_i(0)"""
    return float(net_gains(profile)[channel])
