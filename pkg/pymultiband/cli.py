"""
Scenario runner of pymultiband

    pymultiband --mode optimize --config clst_1000km --set isrs=off --out-dir results
"""
import argparse
import logging
import sys

import numpy as np

from .conf import Conf, ConfigError
from .nli import compute_eta
from .noise import link_profiles
from .optimizer import enforce_3db, evaluate, optimize_throughput, sweep_flat_power
from .oracle import gn_integral
from .raman import PropagationError
from .report import (
    plot_report,
    prepare_output,
    summarize,
    write_channel_csv,
    write_plot_data,
    write_summary_json,
    write_sweep_csv,
)
from .spectrum import eval_launch

__all__ = ["main", "run", "MODES", "EXIT_OK", "EXIT_RUNTIME", "EXIT_CONFIG", "EXIT_ENFORCE", "EXIT_BUDGET"]

logger = logging.getLogger(__name__)

MODES = ("simulate", "optimize", "enforce3db", "sweep")
HIDDEN_MODES = ("oracle",)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2
EXIT_ENFORCE = 3
EXIT_BUDGET = 4


def _write_reports(reports, out_dir, stem, summary, plot_data, plot):
    written = [
        write_channel_csv(reports, out_dir / f"{stem}_channels.csv"),
        write_summary_json(summary, out_dir / f"{stem}_summary.json"),
    ]
    if plot_data:
        written.append(write_plot_data(reports, out_dir / f"{stem}_plot.tsv"))
    if plot:
        written.append(plot_report(reports, out_dir / f"{stem}.png", title=stem))
    for ifile in written:
        logger.info(f"written {ifile}")


def _run_oracle(conf, link, launch, ctrl, verbose):
    options = conf.get_conf_field("oracle")
    ispan = int(options["span"])
    states = link_profiles(link, launch, ctrl)
    state = states[ispan]
    eta = compute_eta(link, [istate.profile for istate in states])[ispan]
    closed_form = eta.power(state.inputs)
    for channel in range(len(link.grid)):
        result = gn_integral(
            state.span, state.profile, link.grid, state.inputs, channel, int(options["points_per_axis"]), verbose
        )
        ratio_db = 10 * np.log10(closed_form[channel] / result.power) if result.power > 0 else float("nan")
        print(
            f"channel {channel}: closed form {closed_form[channel]:.6e} W, numerical {result.power:.6e} W "
            f"({ratio_db:+.3f} dB, converged={result.converged})"
        )
    return EXIT_OK


def run(config_path, mode, overrides=(), out_dir="results", seed=None, plot=None, verbose=False):
    """
    Run one scenario

    Parameters
    ----------
    config_path : str, Path
        YAML scenario or bundled scenario name
    mode : str
        'simulate', 'optimize', 'enforce3db' or 'sweep'
    overrides : sequence of str
        ``key.path=value`` overrides
    out_dir : str, Path
        Output directory
    seed : int, optional
        Overrides the scenario seed
    plot : bool, optional
        Overrides output.plot
    verbose : bool
        Progress lines from the solvers

    Returns
    -------
    int
        Exit code
    """
    if mode not in MODES + HIDDEN_MODES:
        logger.error(f"unknown mode {mode}, choose from {MODES}")
        return EXIT_CONFIG
    overrides = list(overrides)
    if seed is not None:
        overrides.append(f"seed={seed}")
    if plot is not None:
        overrides.append(f"output.plot={str(bool(plot)).lower()}")

    try:
        conf = Conf(config_path, overrides)
        link = conf.get_link()
        curve = conf.get_curve()
        ctrl = conf.get_solver_control()
        launch = conf.get_launch()
        output = conf.get_conf_field("output")
        opt_options, enforce_options = conf.get_optimizer_options(), conf.get_enforce_options()
        powers = conf.get_sweep_powers()
        launch_powers = eval_launch(launch, link.grid)
    except (ConfigError, ValueError, KeyError, TypeError) as err:
        logger.error(f"configuration error: {err}")
        return EXIT_CONFIG
    logger.info(
        f"scenario {conf.conf_path}: {len(link.grid)} channels, {len(link.spans)} spans, "
        f"ISRS {'on' if link.isrs_enabled else 'off'}"
    )

    out_dir = prepare_output(out_dir)
    stem = f"{output['prefix']}{mode}"
    code = EXIT_OK
    logger.info(f"{mode} started")
    try:
        if mode == "oracle":
            return _run_oracle(conf, link, launch_powers, ctrl, verbose)

        if mode == "simulate":
            reports, _ = evaluate(link, launch, curve, ctrl)
            summary = summarize(reports, mode, conf.resolved)
        elif mode == "optimize":
            result = optimize_throughput(link, curve, opt_options, ctrl, verbose)
            reports = result.reports
            summary = summarize(reports, mode, conf.resolved, result)
            if not result.converged:
                logger.warning(f"optimizer stopped after {result.evaluations} evaluations without converging")
                code = EXIT_BUDGET
        elif mode == "enforce3db":
            result = enforce_3db(link, curve, enforce_options, ctrl, verbose=verbose)
            reports = result.reports
            summary = summarize(reports, mode, conf.resolved, result)
            if not result.converged:
                logger.warning(f"3-dB rule not met after {result.iterations} sweeps, residual {result.residual_db:.4f} dB")
                code = EXIT_ENFORCE
        else:
            points = sweep_flat_power(link, curve, powers, ctrl, verbose)
            best = max(points, key=lambda ipoint: ipoint.total)
            reports = best.reports
            summary = summarize(reports, mode, conf.resolved)
            summary["sweep"] = [{"p_launch_dBm": ipoint.p_dbm, "total_Tbps": ipoint.total} for ipoint in points]
            summary["best_p_launch_dBm"] = best.p_dbm
            logger.info(f"written {write_sweep_csv(points, out_dir / f'{stem}.csv')}")
    except (PropagationError, ValueError, FloatingPointError) as err:
        logger.error(f"{mode} failed: {err}")
        return EXIT_RUNTIME

    _write_reports(reports, out_dir, stem, summary, output["plot_data"], output["plot"])
    logger.info(f"{mode} finished: total {summary['total_Tbps']:.3f} Tb/s, GSNR {summary['gsnr_min_dB']:.2f} "
                f"to {summary['gsnr_max_dB']:.2f} dB")
    return code


def get_parser():
    parser = argparse.ArgumentParser(
        prog="pymultiband",
        description="Multiband launch-power simulation and optimisation under ISRS",
    )
    parser.add_argument(
        "--mode", choices=MODES + HIDDEN_MODES, default="simulate", metavar="{" + ",".join(MODES) + "}",
        help="what to run (default: simulate)",
    )
    parser.add_argument("--config", required=True, help="YAML scenario file or bundled scenario name")
    parser.add_argument("--out-dir", default="results", help="output directory (default: results)")
    parser.add_argument(
        "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
        help="override a configuration field, e.g. --set isrs=off (repeatable)",
    )
    parser.add_argument("--seed", type=int, help="seed of the optimizer restarts")
    parser.add_argument("--plot", action="store_true", default=None, help="also write a PNG plot")
    parser.add_argument("--verbose", action="store_true", help="print solver progress")
    parser.add_argument("--quiet", action="store_true", help="only log warnings and errors")
    return parser


def main(argv=None):
    args = get_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    return run(args.config, args.mode, args.overrides, args.out_dir, args.seed, args.plot, args.verbose)


if __name__ == "__main__":
    sys.exit(main())
