"""
Numerical GN integration in pymultiband

Brute-force reference for the closed-form coefficients of the nli module, restricted to a few
channels. Each channel is a flat-top PSD of width equal to its symbol rate; the NLI of the
channel under test is integrated over the same width.
"""
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from .nli import beta2_at

__all__ = ["OracleResult", "gn_integral", "MAX_ORACLE_CHANNELS"]

MAX_ORACLE_CHANNELS = 5


@dataclass(frozen=True)
class OracleResult:
    """
    Attributes
    ----------
    power : float
        NLI power of the channel (W), computed with `points_per_axis`
    converged : bool
        Relative change against half the points is below 1%
    relative_change : float
        |P(n) - P(n/2)| / P(n)
    points_per_axis : int
        Points per frequency axis used for `power`
    """

    power: float
    converged: bool
    relative_change: float
    points_per_axis: int


class _LinkKernel:
    """
    |LK(phi)|^2 of every channel triplet, tabulated on a logarithmic phi grid

    The amplitude sqrt(rho_a rho_b rho_c / rho_cut) is log-linear between profile nodes and the
    z-integral is exact on each segment.
    """

    def __init__(self, profile, cut, phi_max, n_phi):
        self.z = profile.z_grid * 1e3  # m
        self.log_rho = np.log(profile.rho)
        self.cut = cut
        phi_min = 1e-3 / self.z[-1]
        self.phi = np.concatenate(([0.0], np.geomspace(phi_min, max(phi_max, 10 * phi_min), n_phi)))
        self._primitives = {}

    def _primitive(self, triplet):
        if triplet not in self._primitives:
            a, b, c = triplet
            log_amp = 0.5 * (
                self.log_rho[:, a] + self.log_rho[:, b] + self.log_rho[:, c] - self.log_rho[:, self.cut]
            )
            dz = np.diff(self.z)
            slope = np.diff(log_amp) / dz
            w = slope[None, :] + 1j * self.phi[:, None]
            x = w * dz[None, :]
            small = np.abs(x) < 1e-8
            w_safe = np.where(small, 1.0, w)
            segment = np.where(small, dz[None, :] * (1 + x / 2), np.expm1(x) / w_safe)
            kernel = np.sum(np.exp(log_amp[:-1] + 1j * self.phi[:, None] * self.z[:-1]) * segment, axis=1)
            self._primitives[triplet] = cumulative_trapezoid(np.abs(kernel) ** 2, self.phi, initial=0)
        return self._primitives[triplet]

    def kernel_at_zero(self, triplet):
        table = self._primitive(triplet)
        return (table[1] - table[0]) / (self.phi[1] - self.phi[0])

    def inner(self, triplet, k, u, v_lo, v_hi):
        """Integral over v in [v_lo, v_hi] of |LK(k u v)|^2, vectorised over u"""
        table = self._primitive(triplet)

        def primitive(phi):
            return np.sign(phi) * np.interp(np.abs(phi), self.phi, table)

        width = np.maximum(v_hi - v_lo, 0.0)
        ku = k * u
        safe = np.where(ku == 0, 1.0, ku)
        value = np.where(
            ku == 0,
            self.kernel_at_zero(triplet) * width,
            (primitive(ku * v_hi) - primitive(ku * v_lo)) / safe,
        )
        return np.where(width > 0, value, 0.0)


def _offset_axis(lo, hi, n):
    """Uniform grid on [lo, hi], refined geometrically around 0 when 0 lies inside"""
    axis = [np.linspace(lo, hi, n)]
    if lo < 0 < hi:
        extent = max(-lo, hi)
        clustered = np.geomspace(extent * 1e-6, extent, n)
        axis += [clustered, -clustered, [0.0]]
    axis = np.concatenate(axis)
    return np.unique(axis[(axis >= lo) & (axis <= hi)])


def _gn_quadrature(span, profile, grid, launch, cut, n):
    freqs = grid.frequencies * 1e12
    bandwidth = grid.symbol_rates * 1e9
    psd = np.asarray(launch, dtype=float) / bandwidth
    lo_edges, hi_edges = freqs - bandwidth / 2, freqs + bandwidth / 2
    n_ch = freqs.size

    mid = (grid.frequencies[:, None] + grid.frequencies[None, :]) / 2
    k = 4 * np.pi ** 2 * np.abs(beta2_at(span, mid)) * 1e-27
    gamma2 = (span.gamma_at(mid) * 1e-3) ** 2
    extent = hi_edges.max() - lo_edges.min()
    kernel = _LinkKernel(profile, cut, k.max() * extent ** 2, 8 * n)

    f_axis = np.linspace(lo_edges[cut], hi_edges[cut], n // 4 + 1)
    density = np.zeros(f_axis.size)
    for i_f, f in enumerate(f_axis):
        for a in range(n_ch):
            u = _offset_axis(lo_edges[a] - f, hi_edges[a] - f, n)
            integrand = np.zeros(u.size)
            for b in range(n_ch):
                for c in range(n_ch):
                    v_lo = np.maximum(lo_edges[b] - f, lo_edges[c] - f - u)
                    v_hi = np.minimum(hi_edges[b] - f, hi_edges[c] - f - u)
                    if np.all(v_hi <= v_lo):
                        continue
                    weight = gamma2[a, b] * psd[a] * psd[b] * psd[c]
                    integrand += weight * kernel.inner((a, b, c), k[a, b], u, v_lo, v_hi)
            density[i_f] += trapezoid(integrand, u)
    return 16 / 27 * trapezoid(density, f_axis)


def gn_integral(span, profile, grid, launch, channel, points_per_axis=128, verbose=False):
    """
    NLI power of one channel from the numerically integrated GN model

    The quadrature is run with `points_per_axis // 2` and `points_per_axis` points per axis; the
    result is flagged as not converged when they differ by more than 1%.

    Parameters
    ----------
    span : FiberSpan
        Span (dispersion and nonlinearity)
    profile : PowerProfile
        Power evolution of the comb along the span
    grid : ChannelGrid
        Channel grid, at most 5 channels
    launch : array_like
        Span input power per channel (W)
    channel : int
        Position of the channel under test in the grid
    points_per_axis : int
        Points per frequency-offset axis
    verbose : bool
        Print both quadrature levels

    Returns
    -------
    OracleResult
    """
    if len(grid) > MAX_ORACLE_CHANNELS:
        raise ValueError(f"the numerical GN integral is limited to {MAX_ORACLE_CHANNELS} channels, got {len(grid)}")
    if not 0 <= channel < len(grid):
        raise ValueError(f"channel {channel} not in a {len(grid)}-channel grid")
    if points_per_axis < 8:
        raise ValueError("points_per_axis must be at least 8")

    coarse = _gn_quadrature(span, profile, grid, launch, channel, points_per_axis // 2)
    fine = _gn_quadrature(span, profile, grid, launch, channel, points_per_axis)
    change = abs(fine - coarse) / fine if fine > 0 else 0.0
    if verbose:
        print(f"channel {channel}: {points_per_axis // 2} points -> {coarse:.6e} W, "
              f"{points_per_axis} points -> {fine:.6e} W ({100 * change:.3f}% change)")
    return OracleResult(float(fine), change <= 0.01, float(change), points_per_axis)
