"""
Band plans, channel grids and launch spectra in pymultiband
"""
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Band",
    "BandPlan",
    "Channel",
    "ChannelGrid",
    "PerBandCubic",
    "Explicit",
    "build_grid",
    "eval_launch",
    "default_plan",
    "flat",
    "dbm_to_w",
    "w_to_dbm",
]


def dbm_to_w(dbm):
    """dBm -> W (works on scalars and arrays)"""
    return 10 ** ((np.asarray(dbm, dtype=float) - 30) / 10)


def w_to_dbm(w):
    """W -> dBm (works on scalars and arrays)"""
    return 10 * np.log10(np.asarray(w, dtype=float)) + 30


@dataclass(frozen=True)
class Band:
    name: str
    f_min: float  # THz
    f_max: float  # THz

    def __post_init__(self):
        if not self.f_max > self.f_min:
            raise ValueError(f"band {self.name}: f_max ({self.f_max}) must exceed f_min ({self.f_min})")

    @property
    def width(self):
        return self.f_max - self.f_min

    @property
    def center(self):
        return (self.f_min + self.f_max) / 2


@dataclass(frozen=True)
class BandPlan:
    """
    Ordered, non-overlapping frequency bands

    Parameters
    ----------
    bands : tuple of Band
        Bands sorted by ascending frequency
    """

    bands: tuple

    def __post_init__(self):
        object.__setattr__(self, "bands", tuple(self.bands))
        if not self.bands:
            raise ValueError("a band plan needs at least one band")
        names = [iband.name for iband in self.bands]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicated band names in {names}")
        for lower, upper in zip(self.bands[:-1], self.bands[1:]):
            if not upper.f_min >= lower.f_max:
                raise ValueError(
                    f"bands {lower.name} and {upper.name} are not sorted or overlap "
                    f"({lower.f_min}-{lower.f_max} vs {upper.f_min}-{upper.f_max} THz)"
                )

    @property
    def names(self):
        return [iband.name for iband in self.bands]

    def __getitem__(self, name):
        for iband in self.bands:
            if iband.name == name:
                return iband
        raise KeyError(f"band {name} not in plan {self.names}")

    @classmethod
    def from_list(cls, bands):
        """Build a plan from ``[{'name': 'L', 'f_min': 184.5, 'f_max': 190.35}, ...]``"""
        return cls(tuple(Band(b["name"], float(b["f_min"]), float(b["f_max"])) for b in bands))


_PLANS = {
    "CLS": (("L", 184.50, 190.35), ("C", 190.75, 196.60), ("S", 197.00, 202.85)),
    # E-band lower edge keeps the 400 GHz inter-band gap; only the upper edge is known
    "CLSE": (
        ("L", 184.50, 190.35),
        ("C", 190.75, 196.60),
        ("S", 197.00, 202.85),
        ("E", 203.25, 209.07),
    ),
}


def default_plan(name="CLS"):
    """
    Bundled band plans

    Parameters
    ----------
    name : str
        'CLS' (L+C+S, 1000 km scenario) or 'CLSE' (adds the E-band segment, 300 km scenario)

    Returns
    -------
    BandPlan
    """
    try:
        bands = _PLANS[name.upper()]
    except KeyError:
        raise ValueError(f"unknown band plan {name}, choose from {sorted(_PLANS)}")
    return BandPlan(tuple(Band(*iband) for iband in bands))


@dataclass(frozen=True)
class Channel:
    index: int
    f_center: float  # THz
    symbol_rate: float  # GBaud
    roll_off: float
    band: str

    @property
    def occupied_bandwidth(self):
        """Occupied bandwidth in GHz"""
        return self.symbol_rate * (1 + self.roll_off)


@dataclass(frozen=True)
class ChannelGrid:
    """
    WDM comb

    Channels are sorted by ascending centre frequency, every centre lies strictly inside its
    band and the occupied bandwidths of neighbouring channels do not overlap.
    """

    channels: tuple
    plan: BandPlan = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        freqs = [ich.f_center for ich in self.channels]
        if any(upper <= lower for lower, upper in zip(freqs[:-1], freqs[1:])):
            raise ValueError("channels must be sorted by strictly ascending centre frequency")
        for left, right in zip(self.channels[:-1], self.channels[1:]):
            half_widths = (left.occupied_bandwidth + right.occupied_bandwidth) / 2 / 1e3
            # centres are rounded to 1 kHz
            if right.f_center - left.f_center < half_widths - 2e-9:
                raise ValueError(f"channels {left.index} and {right.index} overlap")
        for ich in self.channels:
            if not 0 <= ich.roll_off <= 1:
                raise ValueError(f"channel {ich.index}: roll-off {ich.roll_off} outside [0, 1]")
            if self.plan is not None:
                band = self.plan[ich.band]
                if not band.f_min < ich.f_center < band.f_max:
                    raise ValueError(f"channel {ich.index} centre {ich.f_center} THz outside band {band.name}")

    def __len__(self):
        return len(self.channels)

    @property
    def frequencies(self):
        """Centre frequencies, THz"""
        return np.array([ich.f_center for ich in self.channels])

    @property
    def symbol_rates(self):
        """Symbol rates, GBaud"""
        return np.array([ich.symbol_rate for ich in self.channels])

    @property
    def bands(self):
        return [ich.band for ich in self.channels]

    def band_indices(self, name):
        """Positions (not channel indices) of the channels belonging to `name`"""
        return np.array([i for i, ich in enumerate(self.channels) if ich.band == name], dtype=int)

    def normalized_position(self):
        """
        Position x in [0, 1] of every channel inside its band

        0 at the lowest and 1 at the highest channel of the band. A band holding a single
        channel gives x = 0.
        """
        x = np.zeros(len(self.channels))
        freqs = self.frequencies
        for name in dict.fromkeys(self.bands):
            idx = self.band_indices(name)
            lowest, highest = freqs[idx].min(), freqs[idx].max()
            if highest > lowest:
                x[idx] = (freqs[idx] - lowest) / (highest - lowest)
        return x


GRID_RTOL = 1e-9


def build_grid(plan, spacing, symbol_rate, roll_off):
    """
    Place a uniform channel grid in every band of a plan

    Parameters
    ----------
    plan : BandPlan
        Band plan
    spacing : float
        Channel spacing (GHz)
    symbol_rate : float
        Symbol rate (GBaud)
    roll_off : float
        Raised-cosine roll-off

    Returns
    -------
    ChannelGrid
        In each band, the largest n with (n - 1) * spacing < band width, centred in the band

    Examples
    --------
    >>> grid = build_grid(default_plan('CLS'), spacing=118.75, symbol_rate=100, roll_off=0.1)
    >>> len(grid)
    150
    """
    occupied = symbol_rate * (1 + roll_off)
    # a spacing equal to the occupied bandwidth is valid whatever the rounding
    if spacing < occupied * (1 - GRID_RTOL):
        raise ValueError(f"spacing {spacing} GHz is narrower than the occupied bandwidth {occupied} GHz")
    spacing_thz = spacing / 1e3

    channels = []
    for iband in plan.bands:
        if iband.width < occupied / 1e3 * (1 - GRID_RTOL):
            raise ValueError(f"band {iband.name} ({iband.width:.4f} THz) is narrower than one channel")
        n = max(1, math.ceil(iband.width / spacing_thz - GRID_RTOL))
        first = iband.center - (n - 1) * spacing_thz / 2
        for k in range(n):
            channels.append(
                Channel(
                    index=len(channels),
                    f_center=round(first + k * spacing_thz, 9),
                    symbol_rate=symbol_rate,
                    roll_off=roll_off,
                    band=iband.name,
                )
            )
    return ChannelGrid(tuple(channels), plan=plan)


@dataclass(frozen=True)
class PerBandCubic:
    """
    Cubic launch-power polynomial (dBm) in normalised frequency, one per band

    Parameters
    ----------
    coefficients : dict
        band name -> (c0, c1, c2, c3)
    bounds_dbm : tuple, optional
        (low, high) clamp applied to the evaluated dBm values
    """

    coefficients: dict
    bounds_dbm: tuple = None

    def __post_init__(self):
        coefficients = {}
        for name, coefs in dict(self.coefficients).items():
            coefs = tuple(float(c) for c in coefs)
            if len(coefs) != 4:
                raise ValueError(f"band {name}: a cubic needs 4 coefficients, got {len(coefs)}")
            if not all(math.isfinite(c) for c in coefs):
                raise ValueError(f"band {name}: non-finite coefficient in {coefs}")
            coefficients[name] = coefs
        object.__setattr__(self, "coefficients", coefficients)

    def to_vector(self, band_names):
        """Flatten to (c0, c1, c2, c3) per band, in `band_names` order"""
        return np.concatenate([self.coefficients[name] for name in band_names])

    @classmethod
    def from_vector(cls, vector, band_names, bounds_dbm=None):
        vector = np.asarray(vector, dtype=float)
        if vector.size != 4 * len(band_names):
            raise ValueError(f"expected {4 * len(band_names)} coefficients, got {vector.size}")
        return cls({name: tuple(vector[4 * i:4 * i + 4]) for i, name in enumerate(band_names)}, bounds_dbm)


@dataclass(frozen=True)
class Explicit:
    """Per-channel launch powers (W)"""

    powers: tuple

    def __post_init__(self):
        powers = tuple(float(p) for p in np.ravel(self.powers))
        if not all(p > 0 and math.isfinite(p) for p in powers):
            raise ValueError("explicit launch powers must be finite and strictly positive")
        object.__setattr__(self, "powers", powers)


def flat(plan, dbm, bounds_dbm=None):
    """Flat spectrum at `dbm` in every band of `plan`"""
    return PerBandCubic({name: (dbm, 0.0, 0.0, 0.0) for name in plan.names}, bounds_dbm)


def eval_launch(spec, grid):
    """
    Evaluate a launch spectrum on a channel grid

    Parameters
    ----------
    spec : PerBandCubic or Explicit
        Launch spectrum
    grid : ChannelGrid
        Channel grid

    Returns
    -------
    numpy.ndarray
        Per-channel launch power (W)
    """
    if isinstance(spec, Explicit):
        if len(spec.powers) != len(grid):
            raise ValueError(f"explicit spectrum has {len(spec.powers)} powers for {len(grid)} channels")
        return np.array(spec.powers)

    missing = sorted(set(grid.bands) - set(spec.coefficients))
    if missing:
        raise ValueError(f"no launch coefficients for band(s) {missing}")
    x = grid.normalized_position()
    coefs = np.array([spec.coefficients[name] for name in grid.bands])
    dbm = coefs[:, 0] + coefs[:, 1] * x + coefs[:, 2] * x ** 2 + coefs[:, 3] * x ** 3
    if spec.bounds_dbm is not None:
        dbm = np.clip(dbm, *spec.bounds_dbm)
    return dbm_to_w(dbm)
