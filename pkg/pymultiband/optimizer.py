"""
Launch-power optimisation in pymultiband

Throughput-maximising search over per-band cubic launch spectra, the analytic optimum of a
single channel, enforcement of the 3-dB rule and flat-power sweeps.
"""
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from .metrics import GAP_3DB, ThroughputCurve, channel_reports, total_throughput
from .nli import compute_eta, nli_power
from .noise import ase_accumulate, link_profiles
from .spectrum import Explicit, PerBandCubic, dbm_to_w, eval_launch, w_to_dbm

__all__ = [
    "EVALS_PER_DIM",
    "OptimizerOptions",
    "EnforceOptions",
    "OptimizationResult",
    "LinkAssessment",
    "SweepPoint",
    "ThroughputSearch",
    "analytic_opt_power",
    "assess",
    "evaluate",
    "reference_power_dbm",
    "rule_residual",
    "optimize_throughput",
    "enforce_3db",
    "sweep_flat_power",
]


EVALS_PER_DIM = 300


@dataclass(frozen=True)
class OptimizerOptions:
    """
    Parameters
    ----------
    restarts : int
        Nelder-Mead runs; the first starts from the flat analytic optimum
    max_evals : int or None
        Objective evaluations, split evenly over the restarts; None gives every restart
        EVALS_PER_DIM evaluations per cubic coefficient
    x_tol_dB : float
        Simplex size tolerance on every coefficient (dB)
    f_tol_relative : float
        Tolerance on the objective, relative to the starting throughput
    seed : int
        Seed of the restart offsets
    bounds_dbm : tuple
        Clamp applied to the evaluated per-channel powers
    multi : bool
        Run the restarts in a multiprocessing pool
    """

    restarts: int = 4
    max_evals: int = None
    x_tol_dB: float = 0.01
    f_tol_relative: float = 1e-6
    seed: int = 0
    bounds_dbm: tuple = (-15.0, 15.0)
    multi: bool = False

    def __post_init__(self):
        if self.restarts < 1 or (self.max_evals is not None and self.max_evals < self.restarts):
            raise ValueError("need restarts >= 1 and max_evals >= restarts")
        if not (self.x_tol_dB > 0 and self.f_tol_relative > 0):
            raise ValueError("optimizer tolerances must be positive")
        object.__setattr__(self, "bounds_dbm", tuple(float(b) for b in self.bounds_dbm))


@dataclass(frozen=True)
class EnforceOptions:
    """
    Parameters
    ----------
    tol_dB : float
        Largest accepted |gap_3db - 3.01| over all channels (dB)
    max_iters : int
        Gauss-Seidel sweeps
    damping : float
        Fraction of the dB step towards the cube-root target applied per sweep, in (0, 1]
    bounds_dbm : tuple
        Clamp applied to the per-channel powers
    """

    tol_dB: float = 0.05
    max_iters: int = 200
    damping: float = 0.5
    bounds_dbm: tuple = (-15.0, 15.0)

    def __post_init__(self):
        if not self.tol_dB > 0 or self.max_iters < 0:
            raise ValueError("need tol_dB > 0 and max_iters >= 0")
        if not 0 < self.damping <= 1:
            raise ValueError(f"damping must lie in (0, 1], got {self.damping}")
        object.__setattr__(self, "bounds_dbm", tuple(float(b) for b in self.bounds_dbm))


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    """
    Outcome of a launch-power search

    Attributes
    ----------
    best_spectrum : PerBandCubic or Explicit
        Retained launch spectrum
    best_total : float
        Total throughput of `best_spectrum` (Tb/s)
    reports : list of ChannelReport
        Per-channel reports of `best_spectrum`
    iterations : int
        Nelder-Mead iterations (all restarts) or Gauss-Seidel sweeps
    converged : bool
        Stopping rule met
    restarts_used : int
        Nelder-Mead restarts run
    evaluations : int
        Full link evaluations, including the starting-point and final assessments
    residual_db : float
        max |gap_3db - 3.01| dB over the channels of `reports`
    history : tuple
        Best total (Tb/s) of every restart
    mode : str
        'optimize' or 'enforce3db'
    """

    best_spectrum: object
    best_total: float
    reports: list
    iterations: int
    converged: bool
    restarts_used: int
    evaluations: int = 0
    residual_db: float = float("nan")
    history: tuple = field(default_factory=tuple)
    mode: str = ""


@dataclass(frozen=True, eq=False)
class LinkAssessment:
    launch: np.ndarray
    states: list
    p_ase: np.ndarray
    etas: list
    p_nli: np.ndarray
    reports: list
    total: float


@dataclass(frozen=True, eq=False)
class SweepPoint:
    p_dbm: float
    total: float
    reports: list


def analytic_opt_power(eta, p_ase):
    """
    Optimum launch power of a channel with constant NLI efficiency

    Parameters
    ----------
    eta : float
        NLI coefficient, P_NLI = eta P^3 (1/W^2)
    p_ase : float
        ASE power (W)

    Returns
    -------
    float
        cube root of p_ase / (2 eta), where P_NLI = P_ASE / 2 (W)

    Examples
    --------
    >>> round(analytic_opt_power(0.5e6, 1e-6) * 1e3, 6)
    0.1
    """
    if not (eta > 0 and p_ase > 0):
        raise ValueError(f"analytic optimum needs eta > 0 and p_ase > 0, got {eta} and {p_ase}")
    return float(np.cbrt(p_ase / (2 * eta)))


def assess(link, launch, curve=None, ctrl=None):
    """
    Full link evaluation of a per-channel launch (W)

    Returns
    -------
    LinkAssessment
        Span solutions, ASE, NLI coefficients, NLI, channel reports and total throughput
    """
    curve = curve or ThroughputCurve.shannon()
    launch = np.asarray(launch, dtype=float)
    states = link_profiles(link, launch, ctrl)
    p_ase = ase_accumulate(link, launch, states=states)
    etas = compute_eta(link, [istate.profile for istate in states])
    p_nli = nli_power(link, launch, etas, span_inputs=[istate.inputs for istate in states])
    reports = channel_reports(link.grid, launch, p_ase, p_nli, curve)
    return LinkAssessment(launch, states, p_ase, etas, p_nli, reports, total_throughput(reports))


def evaluate(link, spec, curve=None, ctrl=None):
    """
    Evaluate a launch spectrum on a link

    Parameters
    ----------
    link : LinkSpec
        Link
    spec : PerBandCubic or Explicit
        Launch spectrum
    curve : ThroughputCurve, optional
        Defaults to the Shannon limit
    ctrl : SolverControl, optional
        Raman solver control

    Returns
    -------
    tuple
        (list of ChannelReport, total throughput in Tb/s)
    """
    assessment = assess(link, eval_launch(spec, link.grid), curve, ctrl)
    return assessment.reports, assessment.total


def rule_residual(reports):
    """max |gap_3db - 10 log10(2)| over the channels (dB)"""
    gaps = np.array([ireport.gap_3db for ireport in reports])
    if not np.all(np.isfinite(gaps)):
        return float("inf")
    return float(np.max(np.abs(gaps - GAP_3DB)))


def reference_power_dbm(link, ctrl=None):
    """
    Flat launch power (dBm) at the ISRS-off analytic optimum of the centre channel

    eta of the centre channel is measured at a flat 0 dBm launch. Links without NLI fall back
    to 0 dBm.
    """
    launch = np.full(len(link.grid), 1e-3)
    assessment = assess(link.without_isrs(), launch, ctrl=ctrl)
    centre = len(link.grid) // 2
    eta = assessment.p_nli[centre] / launch[centre] ** 3
    if not eta > 0:
        return 0.0
    return float(w_to_dbm(analytic_opt_power(eta, assessment.p_ase[centre])))


def _restart_offsets(n_bands, restarts, seed):
    """Sobol points, rotated by a seeded shift, scaled to +-3 dB on c0 and +-2 dB on c1..c3"""
    dims = 4 * n_bands
    sobol = qmc.Sobol(dims, scramble=False)
    base = sobol.random_base2(int(np.ceil(np.log2(restarts))))[:restarts]
    shift = np.random.default_rng(seed).random(dims)
    rotated = (base + shift) % 1.0
    scale = np.tile([3.0, 2.0, 2.0, 2.0], n_bands)
    offsets = (2 * rotated - 1) * scale
    offsets[0] = 0.0
    return offsets


class ThroughputSearch:
    """
    Nelder-Mead search of the per-band cubic maximising the total throughput

    Parameters
    ----------
    link : LinkSpec
        Link
    curve : ThroughputCurve
        GSNR to throughput mapping
    opts : OptimizerOptions
        Restarts, budget and tolerances
    ctrl : SolverControl, optional
        Raman solver control
    verbose : bool
        Print one line per restart
    """

    def __init__(self, link, curve, opts, ctrl=None, verbose=False):
        self.link = link
        self.curve = curve
        self.opts = opts
        self.ctrl = ctrl
        self.verbose = verbose
        self.band_names = [name for name in link.plan.names if name in set(link.grid.bands)]

        start = reference_power_dbm(link, ctrl)
        self.x0 = PerBandCubic({name: (start, 0, 0, 0) for name in self.band_names}).to_vector(self.band_names)
        self.reference = self.total(self.x0)
        if not self.reference > 0:
            raise ValueError("the starting launch spectrum carries no throughput")
        if opts.max_evals is None:
            self.budget = EVALS_PER_DIM * self.x0.size
        else:
            self.budget = opts.max_evals // opts.restarts
        self.starts = self.x0 + _restart_offsets(len(self.band_names), opts.restarts, opts.seed)

    def spectrum(self, x):
        return PerBandCubic.from_vector(x, self.band_names, self.opts.bounds_dbm)

    def total(self, x):
        launch = eval_launch(self.spectrum(x), self.link.grid)
        return assess(self.link, launch, self.curve, self.ctrl).total

    def objective(self, x):
        return -self.total(x) / self.reference

    def run_restart(self, x_start):
        simplex = x_start + np.vstack([np.zeros(x_start.size), np.eye(x_start.size)])
        res = minimize(
            self.objective,
            x_start,
            method="Nelder-Mead",
            options={
                "maxfev": self.budget,
                "xatol": self.opts.x_tol_dB,
                "fatol": self.opts.f_tol_relative,
                "initial_simplex": simplex,
                "adaptive": True,
            },
        )
        if self.verbose:
            print(f"\trestart: {-res.fun * self.reference:.3f} Tb/s after {res.nfev} evaluations ({res.message})")
        return res

    def main_loop(self):
        if self.opts.multi:
            from multiprocessing import Pool

            with Pool(os.cpu_count()) as pool:
                results = pool.map(self.run_restart, list(self.starts))
        else:
            results = [self.run_restart(istart) for istart in self.starts]

        best = min(range(len(results)), key=lambda i: results[i].fun)
        spectrum = self.spectrum(results[best].x)
        assessment = assess(self.link, eval_launch(spectrum, self.link.grid), self.curve, self.ctrl)
        return OptimizationResult(
            best_spectrum=spectrum,
            best_total=assessment.total,
            reports=assessment.reports,
            iterations=int(sum(res.nit for res in results)),
            converged=bool(results[best].success),
            restarts_used=len(results),
            evaluations=int(sum(res.nfev for res in results)) + 3,
            residual_db=rule_residual(assessment.reports),
            history=tuple(float(-res.fun * self.reference) for res in results),
            mode="optimize",
        )


def optimize_throughput(link, curve=None, opts=None, ctrl=None, verbose=False):
    """
    Maximise the total throughput over per-band cubic launch spectra

    Parameters
    ----------
    link : LinkSpec
        Link
    curve : ThroughputCurve, optional
        Defaults to the Shannon limit
    opts : OptimizerOptions, optional
        Restarts, evaluation budget, tolerances and seed
    ctrl : SolverControl, optional
        Raman solver control
    verbose : bool
        Print one line per restart

    Returns
    -------
    OptimizationResult
        Best spectrum over all restarts; converged is False when the budget ran out first
    """
    search = ThroughputSearch(link, curve or ThroughputCurve.shannon(), opts or OptimizerOptions(), ctrl, verbose)
    if verbose:
        print(f"start: flat {search.x0[0]:.2f} dBm, {search.reference:.3f} Tb/s")
    return search.main_loop()


def _gauss_seidel_sweep(p_dbm, assessment, opts):
    """One sweep in frequency order, eta and ASE frozen at `assessment`"""
    p_dbm = p_dbm.copy()
    powers = dbm_to_w(p_dbm)
    ratios = [assessment.launch / istate.inputs for istate in assessment.states]
    low, high = opts.bounds_dbm
    for i in range(p_dbm.size):
        p_nli = 0.0
        for eta, ratio in zip(assessment.etas, ratios):
            inputs = powers / ratio
            p_nli += ratio[i] * (eta.eta_spm[i] * inputs[i] ** 3 + inputs[i] * (eta.eta_xpm[i] @ inputs ** 2))
        if p_nli > 0:
            target = w_to_dbm(analytic_opt_power(p_nli / powers[i] ** 3, assessment.p_ase[i]))
        else:
            target = high
        p_dbm[i] = np.clip(p_dbm[i] + opts.damping * (target - p_dbm[i]), low, high)
        powers[i] = dbm_to_w(p_dbm[i])
    return p_dbm


def enforce_3db(link, curve=None, opts=None, ctrl=None, start=None, verbose=False):
    """
    Per-channel launch powers satisfying P_NLI = P_ASE / 2

    Fixed point P_i <- (P_ASE,i / (2 eta_eff,i))^(1/3) with eta_eff,i = P_NLI,i / P_i^3, iterated
    by damped Gauss-Seidel sweeps in dB; profiles, ASE and eta are refreshed before every sweep.

    Parameters
    ----------
    link : LinkSpec
        Link
    curve : ThroughputCurve, optional
        Used for the reports, defaults to the Shannon limit
    opts : EnforceOptions, optional
        Tolerance, iteration limit, damping and bounds
    ctrl : SolverControl, optional
        Raman solver control
    start : PerBandCubic or Explicit, optional
        Starting spectrum, defaults to the flat ISRS-off analytic optimum of the centre channel
    verbose : bool
        Print one line per sweep

    Returns
    -------
    OptimizationResult
        Explicit spectrum; converged is False when max_iters sweeps were not enough
    """
    opts = opts or EnforceOptions()
    curve = curve or ThroughputCurve.shannon()
    evaluations = 0
    if start is None:
        p_dbm = np.full(len(link.grid), reference_power_dbm(link, ctrl))
        evaluations += 1
    else:
        p_dbm = w_to_dbm(eval_launch(start, link.grid))
    p_dbm = np.clip(p_dbm, *opts.bounds_dbm)

    iterations = 0
    while True:
        assessment = assess(link, dbm_to_w(p_dbm), curve, ctrl)
        residual = rule_residual(assessment.reports)
        if verbose:
            print(f"\tsweep {iterations}: residual {residual:.4f} dB, {assessment.total:.3f} Tb/s")
        if residual <= opts.tol_dB or iterations >= opts.max_iters:
            break
        p_dbm = _gauss_seidel_sweep(p_dbm, assessment, opts)
        iterations += 1

    return OptimizationResult(
        best_spectrum=Explicit(assessment.launch),
        best_total=assessment.total,
        reports=assessment.reports,
        iterations=iterations,
        converged=residual <= opts.tol_dB,
        restarts_used=0,
        evaluations=evaluations + iterations + 1,
        residual_db=residual,
        mode="enforce3db",
    )


def sweep_flat_power(link, curve, powers_dbm, ctrl=None, verbose=False):
    """
    Total throughput of flat launch spectra

    Parameters
    ----------
    link : LinkSpec
        Link
    curve : ThroughputCurve or None
        None for the Shannon limit
    powers_dbm : sequence of float
        Flat per-channel powers to evaluate (dBm)
    ctrl : SolverControl, optional
        Raman solver control
    verbose : bool
        Print one line per power

    Returns
    -------
    list of SweepPoint
    """
    points = []
    for p_dbm in powers_dbm:
        assessment = assess(link, np.full(len(link.grid), dbm_to_w(p_dbm)), curve, ctrl)
        if verbose:
            print(f"\t{p_dbm:+.2f} dBm: {assessment.total:.3f} Tb/s")
        points.append(SweepPoint(float(p_dbm), assessment.total, assessment.reports))
    return points
