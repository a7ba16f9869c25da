"""
GSNR, OSNR and throughput in pymultiband
"""
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .spectrum import dbm_to_w, w_to_dbm

__all__ = [
    "ChannelReport",
    "ThroughputCurve",
    "to_db",
    "from_db",
    "to_dbm",
    "from_dbm",
    "gsnr",
    "osnr",
    "gsnr_nli",
    "throughput",
    "total_throughput",
    "gap_3db",
    "transponder_curve",
    "channel_reports",
    "reports_frame",
    "band_summary",
]

GAP_3DB = 10 * np.log10(2)


def to_db(x):
    return 10 * np.log10(x)


def from_db(x):
    return 10 ** (np.asarray(x, dtype=float) / 10)


to_dbm = w_to_dbm
from_dbm = dbm_to_w


@dataclass(frozen=True)
class ChannelReport:
    """
    Quality of transmission of one channel

    Powers in W, ratios linear, throughput in Gb/s. The ratios are recomputable from the
    stored powers: gsnr = p_launch / (p_ase + p_nli), osnr = p_launch / p_ase and
    gsnr_nli = p_launch / p_nli.
    """

    index: int
    f_center: float
    band: str
    p_launch: float
    p_ase: float
    p_nli: float
    osnr: float
    gsnr_nli: float
    gsnr: float
    throughput: float

    @property
    def gap_3db(self):
        return gap_3db(self)


@dataclass(frozen=True)
class ThroughputCurve:
    """
    Per-channel throughput as a function of GSNR

    Parameters
    ----------
    kind : str
        'shannon' (dual-polarisation Shannon limit) or 'table'
    points : tuple
        ((gsnr_dB, Gb/s), ...) strictly increasing in both coordinates, for 'table'
    """

    kind: str = "shannon"
    points: tuple = ()

    def __post_init__(self):
        if self.kind not in ("shannon", "table"):
            raise ValueError(f"unknown throughput curve {self.kind}")
        if self.kind == "table":
            points = tuple((float(g), float(t)) for g, t in self.points)
            if len(points) < 2:
                raise ValueError("a throughput table needs at least two points")
            gsnr_db, rates = np.array(points).T
            if np.any(np.diff(gsnr_db) <= 0) or np.any(np.diff(rates) <= 0):
                raise ValueError("throughput table must be strictly increasing in GSNR and throughput")
            object.__setattr__(self, "points", points)

    @classmethod
    def shannon(cls):
        return cls("shannon")

    @classmethod
    def table(cls, points):
        return cls("table", tuple(points))


def transponder_curve(gap_db=1.5, ceiling=1400.0, symbol_rate=100.0):
    """
    Default transponder table

    Shannon throughput with an implementation gap of `gap_db`, sampled every 1 dB of GSNR from
    0 dB up to the first point reaching `ceiling` (Gb/s), which is capped.
    """
    points = []
    for gsnr_db in range(0, 100):
        rate = 2 * symbol_rate * np.log2(1 + 10 ** ((gsnr_db - gap_db) / 10))
        points.append((float(gsnr_db), float(min(rate, ceiling))))
        if rate >= ceiling:
            break
    return ThroughputCurve.table(points)


def gsnr(p_launch, p_ase, p_nli):
    """
    P_ch / (P_ASE + P_NLI), linear

    Examples
    --------
    >>> round(float(gsnr(1e-3, 1e-5, 5e-6)), 2)
    66.67
    """
    noise = np.asarray(p_ase, dtype=float) + np.asarray(p_nli, dtype=float)
    if np.any(noise <= 0):
        raise ValueError("GSNR needs p_ase + p_nli > 0")
    return np.asarray(p_launch, dtype=float) / noise


def osnr(p_launch, p_ase):
    """In-band OSNR over the noise bandwidth, linear"""
    with np.errstate(divide="ignore"):
        return np.asarray(p_launch, dtype=float) / np.asarray(p_ase, dtype=float)


def gsnr_nli(p_launch, p_nli):
    """P_ch / P_NLI, linear (inf without NLI)"""
    with np.errstate(divide="ignore"):
        return np.asarray(p_launch, dtype=float) / np.asarray(p_nli, dtype=float)


def throughput(gsnr_lin, symbol_rate, curve):
    """
    Per-channel throughput

    Parameters
    ----------
    gsnr_lin : float or array_like
        GSNR, linear
    symbol_rate : float or array_like
        Symbol rate (GBaud)
    curve : ThroughputCurve
        Shannon limit or transponder table

    Returns
    -------
    float or numpy.ndarray
        Throughput (Gb/s)
    """
    gsnr_lin = np.asarray(gsnr_lin, dtype=float)
    if curve.kind == "shannon":
        return 2 * np.asarray(symbol_rate, dtype=float) * np.log2(1 + gsnr_lin)
    gsnr_db, rates = np.array(curve.points).T
    with np.errstate(divide="ignore"):
        return np.interp(to_db(gsnr_lin), gsnr_db, rates)


def total_throughput(reports):
    """Sum of the per-channel throughputs, Tb/s"""
    return float(sum(ireport.throughput for ireport in reports) / 1e3)


def gap_3db(report):
    """10 log10(GSNR_NLI / OSNR) in dB, 3.01 dB when the 3-dB rule holds"""
    with np.errstate(divide="ignore"):
        return float(10 * np.log10(report.gsnr_nli / report.osnr))


def channel_reports(grid, launch, p_ase, p_nli, curve):
    """
    Build one ChannelReport per channel

    Parameters
    ----------
    grid : ChannelGrid
        Channel grid
    launch, p_ase, p_nli : array_like
        Launch, ASE and NLI power per channel (W)
    curve : ThroughputCurve
        GSNR to throughput mapping

    Returns
    -------
    list of ChannelReport
    """
    launch = np.asarray(launch, dtype=float)
    gsnr_lin = gsnr(launch, p_ase, p_nli)
    rates = throughput(gsnr_lin, grid.symbol_rates, curve)
    osnr_lin, gsnr_nli_lin = osnr(launch, p_ase), gsnr_nli(launch, p_nli)
    return [
        ChannelReport(
            index=ich.index,
            f_center=ich.f_center,
            band=ich.band,
            p_launch=float(launch[i]),
            p_ase=float(p_ase[i]),
            p_nli=float(p_nli[i]),
            osnr=float(osnr_lin[i]),
            gsnr_nli=float(gsnr_nli_lin[i]),
            gsnr=float(gsnr_lin[i]),
            throughput=float(rates[i]),
        )
        for i, ich in enumerate(grid.channels)
    ]


def reports_frame(reports):
    """
    Channel reports as a DataFrame, powers in dBm and ratios in dB

    Returns
    -------
    pandas.DataFrame
        index, f_THz, band, p_launch_dBm, p_ase_dBm, p_nli_dBm, osnr_dB, gsnr_nli_dB, gsnr_dB,
        gap_3db_dB, throughput_Gbps
    """
    with np.errstate(divide="ignore"):
        return pd.DataFrame(
            {
                "index": [r.index for r in reports],
                "f_THz": [r.f_center for r in reports],
                "band": [r.band for r in reports],
                "p_launch_dBm": to_dbm(np.array([r.p_launch for r in reports], dtype=float)),
                "p_ase_dBm": to_dbm(np.array([r.p_ase for r in reports], dtype=float)),
                "p_nli_dBm": to_dbm(np.array([r.p_nli for r in reports], dtype=float)),
                "osnr_dB": to_db(np.array([r.osnr for r in reports], dtype=float)),
                "gsnr_nli_dB": to_db(np.array([r.gsnr_nli for r in reports], dtype=float)),
                "gsnr_dB": to_db(np.array([r.gsnr for r in reports], dtype=float)),
                "gap_3db_dB": [r.gap_3db for r in reports],
                "throughput_Gbps": [r.throughput for r in reports],
            }
        )


def band_summary(reports):
    """
    Per-band statistics

    Returns
    -------
    pandas.DataFrame
        One row per band (in frequency order): channels, mean gap to the 3-dB rule, GSNR
        min / max / peak-to-peak (dB), launch power min / max (dBm) and throughput (Tb/s)
    """
    frame = reports_frame(reports)
    grouped = frame.groupby("band", sort=False)
    summary = pd.DataFrame(
        {
            "channels": grouped.size(),
            "gap_3db_mean_dB": grouped["gap_3db_dB"].mean(),
            "gsnr_min_dB": grouped["gsnr_dB"].min(),
            "gsnr_max_dB": grouped["gsnr_dB"].max(),
            "p_launch_min_dBm": grouped["p_launch_dBm"].min(),
            "p_launch_max_dBm": grouped["p_launch_dBm"].max(),
            "throughput_Tbps": grouped["throughput_Gbps"].sum() / 1e3,
        }
    )
    summary["gsnr_p2p_dB"] = summary["gsnr_max_dB"] - summary["gsnr_min_dB"]
    return summary
