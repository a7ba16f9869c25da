"""
Output files in pymultiband
"""
import json
import math
from pathlib import Path

import numpy as np
import pandas as pd

from .metrics import band_summary, reports_frame, total_throughput
from .spectrum import Explicit, PerBandCubic, w_to_dbm

__all__ = [
    "CSV_HEADER",
    "PLOT_COLUMNS",
    "prepare_output",
    "summarize",
    "write_channel_csv",
    "write_summary_json",
    "write_plot_data",
    "write_sweep_csv",
    "plot_report",
]

CSV_HEADER = "# pymultiband channel report v1"
PLOT_COLUMNS = ["f_THz", "p_launch_dBm", "osnr_dB", "gsnr_nli_dB", "gsnr_dB"]
FLOAT_FORMAT = "%.6f"


def _check_parent(filename):
    filename = Path(filename)
    # Make sure the directory exists, otherwise create it
    if not filename.parent.is_dir():
        filename.parent.mkdir(parents=True)
    return filename


def prepare_output(out_dir, verbose=False):
    """
    Create the output directory

    Parameters
    ----------
    out_dir : str, Path
        Output directory, created with its parents when missing

    Returns
    -------
    Path
    """
    out_dir = Path(out_dir)
    if not out_dir.is_dir():
        out_dir.mkdir(parents=True)
        if verbose:
            print(f"{out_dir} created")
    return out_dir


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    return value


def _spectrum_summary(spectrum):
    if isinstance(spectrum, PerBandCubic):
        return {
            "kind": "cubic",
            "coefficients_dBm": {name: list(coefs) for name, coefs in spectrum.coefficients.items()},
            "bounds_dBm": None if spectrum.bounds_dbm is None else list(spectrum.bounds_dbm),
        }
    if isinstance(spectrum, Explicit):
        return {"kind": "explicit", "powers_dBm": w_to_dbm(np.array(spectrum.powers))}
    raise TypeError(f"unknown launch spectrum {type(spectrum).__name__}")


def summarize(reports, mode, config=None, result=None):
    """
    Summary of a run

    Parameters
    ----------
    reports : list of ChannelReport
        Per-channel reports
    mode : str
        CLI mode
    config : dict, optional
        Resolved configuration, echoed as is
    result : OptimizationResult, optional
        Adds the retained launch spectrum, its total throughput and the convergence information

    Returns
    -------
    dict
    """
    frame = reports_frame(reports)
    bands = band_summary(reports)
    summary = {
        "mode": mode,
        "channels": len(reports),
        "total_Tbps": total_throughput(reports),
        "gsnr_min_dB": frame["gsnr_dB"].min(),
        "gsnr_max_dB": frame["gsnr_dB"].max(),
        "gsnr_p2p_dB": frame["gsnr_dB"].max() - frame["gsnr_dB"].min(),
        "gap_3db_mean_dB": frame["gap_3db_dB"].mean(),
        "bands": {
            name: {column: row[column] for column in bands.columns} for name, row in bands.iterrows()
        },
    }
    if result is not None:
        summary["convergence"] = {
            "converged": result.converged,
            "iterations": result.iterations,
            "evaluations": result.evaluations,
            "restarts_used": result.restarts_used,
            "residual_dB": result.residual_db,
            "history_Tbps": list(result.history),
        }
        summary["best_total_Tbps"] = result.best_total
        if result.best_spectrum is not None:
            summary["launch_spectrum"] = _spectrum_summary(result.best_spectrum)
    if config is not None:
        summary["config"] = config
    return _jsonable(summary)


def write_channel_csv(reports, filename):
    """
    Per-channel report, one row per channel after a versioned header comment

    Parameters
    ----------
    reports : list of ChannelReport
        Per-channel reports
    filename : str, Path
        CSV file to write
    """
    filename = _check_parent(filename)
    with open(filename, "w", newline="", encoding="utf-8") as file:
        file.write(CSV_HEADER + "\n")
        reports_frame(reports).to_csv(file, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return filename


def write_summary_json(summary, filename):
    filename = _check_parent(filename)
    with open(filename, "w", encoding="utf-8") as file:
        file.write(json.dumps(_jsonable(summary), sort_keys=True, indent=2) + "\n")
    return filename


def write_plot_data(reports, filename):
    """Frequency against launch power, OSNR, GSNR_NLI and GSNR, tab separated"""
    filename = _check_parent(filename)
    reports_frame(reports)[PLOT_COLUMNS].to_csv(
        filename, sep="\t", index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
    )
    return filename


def write_sweep_csv(points, filename):
    """
    Flat-power sweep, one row per launch power

    Parameters
    ----------
    points : list of SweepPoint
        Sweep results
    filename : str, Path
        CSV file to write
    """
    filename = _check_parent(filename)
    rows = []
    for ipoint in points:
        frame = reports_frame(ipoint.reports)
        rows.append(
            {
                "p_launch_dBm": ipoint.p_dbm,
                "total_Tbps": ipoint.total,
                "gsnr_min_dB": frame["gsnr_dB"].min(),
                "gsnr_max_dB": frame["gsnr_dB"].max(),
                "gap_3db_mean_dB": frame["gap_3db_dB"].mean(),
            }
        )
    pd.DataFrame(rows).to_csv(filename, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return filename


def plot_report(reports, filename, title=None):
    """
    Launch power (top) and OSNR / GSNR_NLI / GSNR (bottom) against frequency, saved as PNG
    """
    from matplotlib.figure import Figure

    frame = reports_frame(reports)
    fig = Figure(figsize=(8, 6))
    ax_power, ax_snr = fig.subplots(2, 1, sharex=True)
    ax_power.plot(frame["f_THz"], frame["p_launch_dBm"], ".", color="k")
    ax_power.set_ylabel("launch power (dBm)")
    for column, label in (("osnr_dB", "OSNR"), ("gsnr_nli_dB", "GSNR$_{NLI}$"), ("gsnr_dB", "GSNR")):
        ax_snr.plot(frame["f_THz"], frame[column], ".", label=label)
    ax_snr.set_xlabel("frequency (THz)")
    ax_snr.set_ylabel("dB")
    ax_snr.legend()
    if title:
        ax_power.set_title(title)
    fig.tight_layout()
    filename = _check_parent(filename)
    fig.savefig(filename, dpi=120)
    return filename
