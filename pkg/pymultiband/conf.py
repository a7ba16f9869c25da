"""
Configuration class in pymultiband
"""
import copy
from collections.abc import Mapping
from pathlib import Path

import numpy as np
import pandas as pd
import yaml

from .metrics import ThroughputCurve, transponder_curve
from .noise import AmplifierSpec, LinkSpec
from .optimizer import EnforceOptions, OptimizerOptions
from .raman import FiberSpan, RamanGainSpec, SolverControl, generic_smf
from .spectrum import BandPlan, Explicit, PerBandCubic, build_grid, dbm_to_w, default_plan, flat

__all__ = ["Conf", "ConfigError", "DEFAULTS", "SCENARIO_DIR", "bundled_scenarios", "dict_merge"]

SCENARIO_DIR = Path(__file__).parent / "scenarios"

_GENERIC = generic_smf()

FIBER_DEFAULTS = {
    "alpha_db_km": [list(point) for point in _GENERIC.alpha],
    "D_ref": _GENERIC.D_ref,
    "S_ref": _GENERIC.S_ref,
    "lambda_ref": _GENERIC.lambda_ref,
    "gamma_per_w_km": [list(point) for point in _GENERIC.gamma],
    "raman": {
        "kind": "triangular",
        "slope": 0.028,
        "cutoff": 25.0,
        "points": None,
        "photon_flux_correction": True,
    },
}

SPAN_KEYS = {"fiber", "length_km", "count"}

DEFAULTS = {
    "bands": "CLS",
    "grid": {"spacing_ghz": 118.75, "symbol_rate_gbaud": 100.0, "roll_off": 0.1},
    "fibers": {},
    "link": {
        "spans": [{"fiber": "generic_smf", "length_km": 100.0, "count": 1}],
        "noise_bandwidth_ghz": None,
    },
    "amplifiers": {"policy": "reequalize", "nf_db": {"L": 6.0, "C": 5.0, "S": 6.0, "E": 6.0}},
    "launch": {
        "kind": "flat",
        "power_dbm": 0.0,
        "coefficients": {},
        "powers_dbm": [],
        "bounds_dbm": None,
    },
    "throughput": {"curve": "shannon", "points": []},
    "solver": {"rel_tol": 1e-8, "max_step_km": 1.0},
    "optimizer": {
        "restarts": 4,
        "max_evals": None,
        "x_tol_db": 0.01,
        "f_tol_relative": 1e-6,
        "bounds_dbm": [-15.0, 15.0],
        "multi": False,
    },
    "enforce": {"tol_db": 0.05, "max_iters": 200, "damping": 0.5},
    "sweep": {"start_dbm": -6.0, "stop_dbm": 9.0, "step_db": 1.0},
    "oracle": {"points_per_axis": 128, "span": 0},
    "output": {"plot": False, "plot_data": True, "prefix": ""},
    "isrs": True,
    "seed": 0,
}

# leaves whose content is free-form (user-chosen keys)
FREE_FORM = {("fibers",), ("amplifiers", "nf_db"), ("launch", "coefficients")}


class ConfigError(ValueError):
    pass


def dict_merge(dct, merge_dct):
    """
    Overlay a scenario section on the defaults, in place

    Nested sections are merged key by key; lists, scalars and sections that are empty in `dct`
    are replaced by a copy of the scenario value.

    Parameters
    ----------
    dct : dict
        Defaults, updated in place
    merge_dct : dict
        Scenario values
    """
    for k, v in merge_dct.items():
        if k in dct and isinstance(dct[k], dict) and isinstance(v, Mapping) and dct[k]:
            dict_merge(dct[k], v)
        else:
            dct[k] = copy.deepcopy(v)
    return dct


def bundled_scenarios():
    """Names of the scenarios shipped with pymultiband"""
    return sorted(ifile.stem for ifile in SCENARIO_DIR.glob("*.yml"))


def _unknown_keys(d, reference, prefix=()):
    unknown = []
    for k, v in d.items():
        path = prefix + (k,)
        if k not in reference:
            unknown.append(".".join(map(str, path)))
        elif path not in FREE_FORM and isinstance(reference[k], dict) and reference[k] and isinstance(v, Mapping):
            unknown += _unknown_keys(v, reference[k], path)
    return unknown


class Conf:
    """
    Scenario configuration

    Loads a YAML scenario (file path or bundled scenario name), merges it over `DEFAULTS`,
    applies ``key.path=value`` overrides and builds the simulation objects.

    Parameters
    ----------
    scenario : str, Path
        Path to a YAML file or name of a bundled scenario
    overrides : list of str, optional
        ``key.path=value`` overrides, values parsed as YAML scalars
    verbose : bool
        Print loading steps

    Examples
    --------
    >>> conf = Conf('clst_1000km', overrides=['isrs=off'])
    >>> link = conf.get_link()
    >>> len(link.spans)
    10
    """

    def __init__(self, scenario, overrides=None, verbose=False):
        self.conf_path = self.find_scenario(scenario)
        self.base_dir = self.conf_path.parent
        data = self.get_conf_file(self.conf_path)
        if verbose:
            print(f"Configuration file loaded: {self.conf_path}")

        self.conf = dict_merge(copy.deepcopy(DEFAULTS), data)
        for ioverride in overrides or []:
            self.set_conf_field(*self.parse_override(ioverride))
        self.check_conf()

    @classmethod
    def find_scenario(cls, scenario):
        path = Path(scenario)
        if path.is_file():
            return path
        bundled = SCENARIO_DIR / f"{scenario}.yml"
        if bundled.is_file():
            return bundled
        raise ConfigError(f"{scenario} does not exist (bundled scenarios: {bundled_scenarios()})")

    @classmethod
    def get_conf_file(cls, filename):
        """
        Read a YAML scenario file

        Parameters
        ----------
        filename : str, Path
            Path to the YAML file

        Returns
        -------
        dict
        """
        try:
            with open(filename) as file:
                data = yaml.safe_load(file)
        except (OSError, yaml.YAMLError) as err:
            raise ConfigError(f"cannot read {filename}: {err}") from err
        if data is None:
            return {}
        if not isinstance(data, dict):
            raise ConfigError(f"{filename} must hold a mapping at top level")
        return data

    @staticmethod
    def parse_override(text):
        """'optimizer.restarts=2' -> (['optimizer', 'restarts'], 2)"""
        if "=" not in text:
            raise ConfigError(f"override '{text}' is not of the form key.path=value")
        key, value = text.split("=", 1)
        keys = [k for k in key.strip().split(".") if k]
        if not keys:
            raise ConfigError(f"override '{text}' has an empty key")
        try:
            return keys, yaml.safe_load(value)
        except yaml.YAMLError as err:
            raise ConfigError(f"override '{text}': {err}") from err

    def set_conf_field(self, keys, value):
        d = self.conf
        for k in keys[:-1]:
            if not isinstance(d.get(k), dict):
                d[k] = {}
            d = d[k]
        d[keys[-1]] = value

    def get_conf_field(self, field):
        """
        Get a specific configuration field

        Parameters
        ----------
        field : str, list
            Dotted path or list of keys

        Returns
        -------
        object
        """
        keys = field.split(".") if isinstance(field, str) else field

        def get_from_dict(d, keys):
            for k in keys:
                d = d[k]
            return d

        try:
            return get_from_dict(self.conf, keys)
        except (KeyError, TypeError):
            raise ConfigError(f"{'.'.join(map(str, keys))} is not a configuration field")

    @property
    def resolved(self):
        """Fully resolved configuration (defaults, file and overrides)"""
        return copy.deepcopy(self.conf)

    def check_conf(self):
        """Reject unknown keys, listing all of them"""
        unknown = _unknown_keys(self.conf, DEFAULTS)
        fibers = self.conf["fibers"]
        if not isinstance(fibers, Mapping):
            raise ConfigError("fibers must be a mapping of fiber name -> parameters")
        for name, fiber in fibers.items():
            if not isinstance(fiber, Mapping):
                raise ConfigError(f"fibers.{name} must be a mapping")
            unknown += _unknown_keys(fiber, FIBER_DEFAULTS, ("fibers", name))
        spans = self.conf["link"]["spans"]
        if not isinstance(spans, list) or not spans:
            raise ConfigError("link.spans must be a non-empty list")
        for ispan, span in enumerate(spans):
            if not isinstance(span, Mapping):
                raise ConfigError(f"link.spans.{ispan} must be a mapping")
            unknown += [f"link.spans.{ispan}.{k}" for k in span if k not in SPAN_KEYS]
        if unknown:
            raise ConfigError(f"unknown configuration key(s): {', '.join(sorted(unknown))}")
        if not isinstance(self.conf["isrs"], bool):
            raise ConfigError(f"isrs must be a boolean, got {self.conf['isrs']!r}")

    def _table(self, value, name):
        """scalar, [[THz, value], ...] or {file: csv}"""
        if isinstance(value, Mapping):
            if set(value) != {"file"}:
                raise ConfigError(f"{name}: a table reference holds only 'file'")
            path = Path(value["file"])
            path = path if path.is_absolute() else self.base_dir / path
            try:
                frame = pd.read_csv(path, comment="#")
            except (OSError, pd.errors.ParserError) as err:
                raise ConfigError(f"{name}: cannot read {path}: {err}") from err
            return [tuple(row) for row in frame.iloc[:, :2].to_numpy(dtype=float)]
        if np.isscalar(value):
            return float(value)
        return [tuple(float(x) for x in point) for point in value]

    def get_plan(self):
        bands = self.conf["bands"]
        if isinstance(bands, str):
            return default_plan(bands)
        return BandPlan.from_list(bands)

    def get_grid(self):
        grid = self.conf["grid"]
        return build_grid(self.get_plan(), grid["spacing_ghz"], grid["symbol_rate_gbaud"], grid["roll_off"])

    def get_raman(self, raman, name):
        raman = dict_merge(copy.deepcopy(FIBER_DEFAULTS["raman"]), raman or {})
        if raman["kind"] == "tabulated":
            return RamanGainSpec.tabulated(self._table(raman["points"], f"{name}.points"), raman["photon_flux_correction"])
        return RamanGainSpec.triangular(raman["slope"], raman["cutoff"], raman["photon_flux_correction"])

    def get_fiber(self, name, length):
        """FiberSpan of `length` km made of fiber `name` (generic_smf when not defined)"""
        fibers = self.conf["fibers"]
        if name not in fibers:
            if name == "generic_smf":
                return generic_smf(length)
            raise ConfigError(f"fiber {name} not defined in fibers ({sorted(fibers)})")
        fiber = dict_merge(copy.deepcopy(FIBER_DEFAULTS), fibers[name])
        return FiberSpan(
            length=float(length),
            alpha=self._table(fiber["alpha_db_km"], f"fibers.{name}.alpha_db_km"),
            D_ref=float(fiber["D_ref"]),
            S_ref=float(fiber["S_ref"]),
            lambda_ref=float(fiber["lambda_ref"]),
            gamma=self._table(fiber["gamma_per_w_km"], f"fibers.{name}.gamma_per_w_km"),
            raman=self.get_raman(fiber["raman"], f"fibers.{name}.raman"),
        )

    def get_link(self):
        plan, grid = self.get_plan(), self.get_grid()
        spans = []
        for item in self.conf["link"]["spans"]:
            if "fiber" not in item or "length_km" not in item:
                raise ConfigError("every entry of link.spans needs 'fiber' and 'length_km'")
            spans += [self.get_fiber(item["fiber"], item["length_km"])] * int(item.get("count", 1))
        amplifiers = self.conf["amplifiers"]
        amp = AmplifierSpec(amplifiers["nf_db"], amplifiers["policy"])
        noise_bandwidth = self.conf["link"]["noise_bandwidth_ghz"] or grid.channels[0].symbol_rate
        return LinkSpec(plan, grid, spans, [amp] * len(spans), self.conf["isrs"], float(noise_bandwidth))

    def get_launch(self):
        launch = self.conf["launch"]
        bounds = tuple(launch["bounds_dbm"]) if launch["bounds_dbm"] else None
        if launch["kind"] == "flat":
            return flat(self.get_plan(), float(launch["power_dbm"]), bounds)
        if launch["kind"] == "cubic":
            return PerBandCubic(launch["coefficients"], bounds)
        if launch["kind"] == "explicit":
            return Explicit(dbm_to_w(launch["powers_dbm"]))
        raise ConfigError(f"launch.kind must be flat, cubic or explicit, got {launch['kind']}")

    def get_curve(self):
        throughput = self.conf["throughput"]
        if throughput["curve"] == "shannon":
            return ThroughputCurve.shannon()
        if throughput["curve"] == "transponder":
            return transponder_curve()
        if throughput["curve"] == "table":
            return ThroughputCurve.table(throughput["points"])
        raise ConfigError(f"throughput.curve must be shannon, transponder or table, got {throughput['curve']}")

    def get_solver_control(self):
        solver = self.conf["solver"]
        return SolverControl(float(solver["rel_tol"]), float(solver["max_step_km"]))

    def get_optimizer_options(self):
        opt = self.conf["optimizer"]
        return OptimizerOptions(
            restarts=int(opt["restarts"]),
            max_evals=None if opt["max_evals"] is None else int(opt["max_evals"]),
            x_tol_dB=float(opt["x_tol_db"]),
            f_tol_relative=float(opt["f_tol_relative"]),
            seed=int(self.conf["seed"]),
            bounds_dbm=tuple(opt["bounds_dbm"]),
            multi=bool(opt["multi"]),
        )

    def get_enforce_options(self):
        enforce = self.conf["enforce"]
        return EnforceOptions(
            tol_dB=float(enforce["tol_db"]),
            max_iters=int(enforce["max_iters"]),
            damping=float(enforce["damping"]),
            bounds_dbm=tuple(self.conf["optimizer"]["bounds_dbm"]),
        )

    def get_sweep_powers(self):
        sweep = self.conf["sweep"]
        if not sweep["step_db"] > 0:
            raise ConfigError("sweep.step_db must be positive")
        powers = np.arange(sweep["start_dbm"], sweep["stop_dbm"] + sweep["step_db"] / 2, sweep["step_db"])
        return [round(float(p), 6) for p in powers]
