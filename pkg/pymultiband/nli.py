"""
Closed-form nonlinear interference in pymultiband

GN-model SPM and XPM coefficients computed span by span from the ISRS-dependent effective
lengths of each channel, so that eta follows the launch power whenever Raman is on.
"""
from dataclasses import dataclass

import numpy as np

from .raman import effective_lengths

__all__ = ["NliCoefficients", "beta2_at", "compute_eta", "nli_power"]

C_NM_PS = 299792.458  # speed of light, nm/ps (nm THz)


@dataclass(frozen=True, eq=False)
class NliCoefficients:
    """
    NLI coefficients of one span

    Attributes
    ----------
    eta_spm : numpy.ndarray
        (N,) coefficient of P_i^3, 1/W^2
    eta_xpm : numpy.ndarray
        (N, N) coefficient of P_i P_j^2, 1/W^2, zero diagonal
    """

    eta_spm: np.ndarray
    eta_xpm: np.ndarray

    def __post_init__(self):
        for name in ("eta_spm", "eta_xpm"):
            value = np.asarray(getattr(self, name), dtype=float)
            if not np.all(np.isfinite(value)) or np.any(value < 0):
                raise ValueError(f"{name} must be finite and non-negative")
            value.flags.writeable = False
            object.__setattr__(self, name, value)

    def power(self, powers):
        """Span NLI power for span input `powers` (W)"""
        powers = np.asarray(powers, dtype=float)
        return self.eta_spm * powers ** 3 + powers * (self.eta_xpm @ powers ** 2)


def beta2_at(span, f):
    """
    Group-velocity dispersion of a span

    Parameters
    ----------
    span : FiberSpan
        Span holding D_ref, S_ref and lambda_ref
    f : float or array_like
        Frequency (THz)

    Returns
    -------
    float or numpy.ndarray
        beta2 (ps^2/km)

    Examples
    --------
    D = 17 ps/(nm km) at 1550 nm gives about -21.7 ps^2/km.
    """
    wavelength = C_NM_PS / np.asarray(f, dtype=float)
    dispersion = span.D_ref + span.S_ref * (wavelength - span.lambda_ref)
    return -dispersion * wavelength ** 2 / (2 * np.pi * C_NM_PS)


def _span_eta(span, profile, grid, ispan):
    freqs = grid.frequencies
    bandwidth = grid.symbol_rates * 1e9  # Hz
    l_eff = effective_lengths(profile) * 1e3  # m
    alpha = span.alpha_at(freqs) * np.ones_like(freqs)
    if np.any(alpha <= 0):
        channel = int(np.argmin(alpha))
        raise ValueError(f"span {ispan}, channel {channel}: the closed form needs a positive attenuation")
    l_asym = 1e3 / alpha  # m

    beta2 = np.abs(beta2_at(span, freqs)) * 1e-27  # s^2/m
    gamma = span.gamma_at(freqs) * 1e-3  # 1/(W m)
    if np.any(beta2 == 0):
        channel = int(np.argmin(beta2))
        raise ValueError(
            f"span {ispan}, channel {channel}: zero dispersion at {freqs[channel]} THz, "
            "the closed form needs a non-zero local dispersion"
        )

    spm_arg = 4 / np.e ** 2 * np.pi ** 2 / 2 * beta2 * l_asym * bandwidth ** 2
    eta_spm = (
        8 / 27 * gamma ** 2 * l_eff ** 2 / (np.pi * beta2 * l_asym * bandwidth ** 2) * np.arcsinh(spm_arg)
    )

    mid = (freqs[:, None] + freqs[None, :]) / 2
    beta2_ij = np.abs(beta2_at(span, mid)) * 1e-27
    gamma_ij = span.gamma_at(mid) * 1e-3
    delta = np.abs(freqs[:, None] - freqs[None, :]) * 1e12
    half_bw = bandwidth[None, :] / 2
    off_diagonal = ~np.eye(freqs.size, dtype=bool)

    overlapping = off_diagonal & (delta <= half_bw)
    if np.any(overlapping):
        i, j = np.argwhere(overlapping)[0]
        raise ValueError(f"span {ispan}: channels {i} and {j} overlap ({delta[i, j] / 1e9:.3f} GHz apart)")
    if np.any(beta2_ij[off_diagonal] == 0):
        i, j = np.argwhere(off_diagonal & (beta2_ij == 0))[0]
        raise ValueError(
            f"span {ispan}, channels {i}/{j}: zero dispersion at {mid[i, j]} THz, "
            "the closed form needs a non-zero local dispersion"
        )

    with np.errstate(divide="ignore", invalid="ignore"):
        log_term = np.log((delta + half_bw) / (delta - half_bw))
        eta_xpm = (
            16 / 27 * gamma_ij ** 2 * l_eff[None, :] ** 2
            / (2 * np.pi * beta2_ij * l_asym[None, :] * bandwidth[None, :] ** 2)
            * log_term
        )
    eta_xpm = np.where(off_diagonal, eta_xpm, 0.0)
    return NliCoefficients(eta_spm, eta_xpm)


def compute_eta(link, profiles, grid=None):
    """
    Per-span SPM and XPM coefficients

    Spans sharing the same fiber and the same solved profile are computed once.

    Parameters
    ----------
    link : LinkSpec
        Link
    profiles : list of PowerProfile
        One profile per span
    grid : ChannelGrid, optional
        Defaults to the link grid

    Returns
    -------
    list of NliCoefficients
    """
    grid = grid or link.grid
    if len(profiles) != len(link.spans):
        raise ValueError(f"{len(profiles)} profiles for {len(link.spans)} spans")
    done = {}
    etas = []
    for ispan, (span, profile) in enumerate(zip(link.spans, profiles)):
        key = (span, id(profile))
        if key not in done:
            done[key] = _span_eta(span, profile, grid, ispan)
        etas.append(done[key])
    return etas


def nli_power(link, launch, etas, span_inputs=None):
    """
    NLI power per channel, referred to the launch

    Spans add incoherently.

    Parameters
    ----------
    link : LinkSpec
        Link
    launch : array_like
        Launch power per channel (W)
    etas : list of NliCoefficients
        One per span
    span_inputs : list of array_like, optional
        Span input powers; every span launches `launch` when omitted (re-equalising amplifiers)

    Returns
    -------
    numpy.ndarray
        P_NLI per channel (W)
    """
    launch = np.asarray(launch, dtype=float)
    if span_inputs is None:
        span_inputs = [launch] * len(etas)
    p_nli = np.zeros_like(launch)
    for eta, inputs in zip(etas, span_inputs):
        inputs = np.asarray(inputs, dtype=float)
        p_nli += eta.power(inputs) * launch / inputs
    return p_nli
