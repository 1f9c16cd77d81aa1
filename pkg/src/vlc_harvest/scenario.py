"""Configuration types and the key/value scenario file format.

Every physical constant of the default hybrid link lives in exactly one
field of :class:`SystemParams` or :class:`Geometry`. Other modules read the
constants from these objects and never hard-code them.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np


class ScenarioError(ValueError):
    """Raised when a scenario document cannot be parsed."""


class ValidationError(ScenarioError):
    """Raised when a configuration violates an invariant.

    The message names the violated invariant, e.g. ``"i_min < i_max violated"``.
    """


def _require(condition: bool, invariant: str) -> None:
    if not condition:
        raise ValidationError(f"{invariant} violated")


@dataclass(frozen=True)
class SystemParams:
    """Physical constants of the LED, photodiode, RF front end and link.

    Attributes
    ----------
    i_min, i_max : float
        Linear operating range of the LED drive current (A).
    p_led : float
        LED current-to-optical-power factor (W/A).
    eta : float
        Photodiode responsivity (A/W).
    v_t : float
        Thermal voltage (V).
    i_dark : float
        Dark saturation current of the photodiode (A).
    q_e : float
        Electron charge (C).
    i_ambient : float
        Photocurrent induced by ambient light (A).
    b_vlc, b_rf : float
        Optical and RF bandwidths (Hz).
    p0_dbm_per_hz : float
        Thermal noise density (dBm/Hz).
    nf_db : float
        Receiver noise figure (dB).
    r_th : float
        Minimum RF rate (bit/s).
    t_tot : float
        Block duration (s).
    f_c : float
        RF carrier frequency (Hz).
    beta_pl : float
        Path-loss exponent.
    d_ref : float
        Path-loss reference distance (m).
    """

    i_min: float = 0.1
    i_max: float = 1.0
    p_led: float = 1.5
    eta: float = 0.4
    v_t: float = 0.025
    i_dark: float = 1e-10
    q_e: float = 1.6e-19
    i_ambient: float = 5840e-6
    b_vlc: float = 1e7
    b_rf: float = 1e7
    p0_dbm_per_hz: float = -174.0
    nf_db: float = 9.0
    r_th: float = 1e6
    t_tot: float = 1.0
    f_c: float = 2.4e9
    beta_pl: float = 1.8
    d_ref: float = 1.0

    def __post_init__(self):
        _require(0 < self.i_min, "0 < i_min")
        _require(self.i_min < self.i_max, "i_min < i_max")
        for name in ("p_led", "eta", "v_t", "i_dark", "q_e", "b_vlc", "b_rf",
                     "f_c", "d_ref", "beta_pl"):
            _require(getattr(self, name) > 0, f"{name} > 0")
        _require(self.i_ambient >= 0, "i_ambient >= 0")
        _require(self.r_th >= 0, "r_th >= 0")
        _require(self.t_tot > 0, "t_tot > 0")
        if not 1.6 <= self.beta_pl <= 1.8:
            warnings.warn(
                f"beta_pl = {self.beta_pl} lies outside the usual indoor range [1.6, 1.8]",
                stacklevel=3,
            )


@dataclass(frozen=True)
class Geometry:
    """Placement of access point, relay and user plus optical front-end data.

    Angles are in radians. ``relay_dist`` and ``user_dist`` are optional
    ``(min, max)`` ranges used by distribution-averaged experiments.
    """

    h_delta: float = 2.0
    d_r: float = 0.0
    d_u: float = 4.0
    theta_hpbw: float = math.pi / 3
    phi_fov: float = math.pi / 3
    a_pd: float = 1e-4
    relay_dist: tuple[float, float] | None = (0.0, 2.0)
    user_dist: tuple[float, float] | None = (4.0, 8.0)

    def __post_init__(self):
        _require(self.h_delta > 0, "h_delta > 0")
        _require(self.d_r >= 0, "d_r >= 0")
        _require(self.d_u > 0, "d_u > 0")
        _require(0 < self.theta_hpbw < math.pi / 2, "0 < theta_hpbw < pi/2")
        _require(0 < self.phi_fov <= math.pi / 2, "0 < phi_fov <= pi/2")
        _require(self.a_pd > 0, "a_pd > 0")
        for name in ("relay_dist", "user_dist"):
            rng = getattr(self, name)
            if rng is not None:
                _require(len(rng) == 2, f"{name} has two entries")
                _require(rng[0] <= rng[1], f"{name} min <= max")


@dataclass(frozen=True)
class OrientationModel:
    """Uniform receiver tilt ``theta ~ U[theta1, theta2]`` (radians).

    ``c_theta`` is computed on construction so that the density of the
    squared tilt cosine integrates to one.
    """

    theta1: float = 0.0
    theta2: float = math.radians(10.0)
    c_theta: float = field(default=float("nan"), compare=False)

    def __post_init__(self):
        _require(0 <= self.theta1 < self.theta2 <= math.pi / 2,
                 "0 <= theta1 < theta2 <= pi/2")
        from .vlc_channel import normalization_constant

        object.__setattr__(self, "c_theta", normalization_constant(self))

    @property
    def spread(self) -> float:
        return self.theta2 - self.theta1


class CaseId(str, enum.Enum):
    """The four resource-allocation policies."""

    JO_withE2 = "JO_withE2"
    JO_noE2 = "JO_noE2"
    FTA_withE2 = "FTA_withE2"
    FTA_noE2 = "FTA_noE2"


@dataclass(frozen=True)
class PolicyCase:
    """Allocation policy: joint or fixed-time, with or without carryover energy."""

    case_id: CaseId = CaseId.JO_withE2
    fixed_t_vlc: float = 0.5

    def __post_init__(self):
        try:
            object.__setattr__(self, "case_id", CaseId(self.case_id))
        except ValueError:
            raise ValidationError(
                f"case_id in {[c.value for c in CaseId]} violated") from None
        _require(0 < self.fixed_t_vlc < 1, "0 < fixed_t_vlc < 1")

    @property
    def joint(self) -> bool:
        return self.case_id in (CaseId.JO_withE2, CaseId.JO_noE2)

    @property
    def carryover(self) -> bool:
        return self.case_id in (CaseId.JO_withE2, CaseId.FTA_withE2)


ALL_CASES = tuple(PolicyCase(c) for c in CaseId)

SWEEPABLE = ("d_u", "d_r", "f_c", "theta2", "phi_fov")


@dataclass(frozen=True)
class SweepSpec:
    """Which variable an experiment sweeps and the numerical knobs it uses."""

    swept_variable: str = "d_u"
    values: tuple[float, ...] = (4.0, 5.0, 6.0, 7.0, 8.0)
    seed: int = 0
    mc_samples: int = 1_000_000
    grid_step_ib: float = 5e-3
    grid_step_t: float = 5e-3
    orientation_mode: str = "fixed"

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        _require(self.swept_variable in SWEEPABLE,
                 f"swept_variable in {SWEEPABLE}")
        _require(len(self.values) > 0, "values nonempty")
        diffs = np.diff(self.values)
        _require(bool(np.all(diffs > 0) or np.all(diffs < 0)),
                 "values strictly monotone")
        _require(self.grid_step_ib > 0, "grid_step_ib > 0")
        _require(self.grid_step_t > 0, "grid_step_t > 0")
        _require(self.mc_samples > 0, "mc_samples > 0")
        _require(self.orientation_mode in ("fixed", "random"),
                 "orientation_mode in ('fixed', 'random')")


@dataclass(frozen=True)
class Scenario:
    """A fully resolved configuration."""

    params: SystemParams = field(default_factory=SystemParams)
    geom: Geometry = field(default_factory=Geometry)
    orientation: OrientationModel = field(default_factory=OrientationModel)
    policy: PolicyCase = field(default_factory=PolicyCase)
    sweep: SweepSpec = field(default_factory=SweepSpec)

    def __post_init__(self):
        if self.sweep.orientation_mode == "random":
            _require(self.orientation.theta2 <= self.geom.phi_fov,
                     "theta2 <= phi_fov")

    def astuple(self):
        return (self.params, self.geom, self.orientation, self.policy, self.sweep)


# --------------------------------------------------------------------------
# File format

_SECTIONS = {
    "params": SystemParams,
    "geom": Geometry,
    "orientation": OrientationModel,
    "policy": PolicyCase,
    "sweep": SweepSpec,
}
_ANGLE_KEYS = {"theta_hpbw", "phi_fov", "theta1", "theta2"}
_INT_KEYS = {"seed", "mc_samples"}
_STR_KEYS = {"case_id", "swept_variable", "orientation_mode"}
_PAIR_KEYS = {"relay_dist", "user_dist"}
_LIST_KEYS = {"values"}


def _key_table() -> dict[str, str]:
    table = {}
    for section, cls in _SECTIONS.items():
        for f in fields(cls):
            if f.name == "c_theta":
                continue
            table[f.name] = section
    return table


_KEYS = _key_table()


def _parse_float(text: str, key: str, lineno: int) -> float:
    text = text.strip()
    scale = 1.0
    if key in _ANGLE_KEYS and text.lower().endswith("deg"):
        text = text[:-3].strip()
        scale = math.pi / 180.0
    try:
        return float(text) * scale
    except ValueError:
        raise ScenarioError(f"line {lineno}: cannot parse {key!r} value {text!r}") from None


def _parse_value(key: str, text: str, lineno: int):
    if key in _STR_KEYS:
        return text.strip()
    if key in _INT_KEYS:
        try:
            return int(text.strip())
        except ValueError:
            raise ScenarioError(
                f"line {lineno}: {key!r} expects an integer, got {text.strip()!r}") from None
    if key in _PAIR_KEYS:
        if text.strip().lower() == "none":
            return None
        parts = [p for p in text.split(",")]
        if len(parts) != 2:
            raise ScenarioError(f"line {lineno}: {key!r} expects 'min, max'")
        return tuple(_parse_float(p, key, lineno) for p in parts)
    if key in _LIST_KEYS:
        parts = [p for p in text.split(",") if p.strip()]
        # a "values" list inherits the angle suffix rule when sweeping an angle
        return tuple(_parse_float(p, "theta2" if p.strip().lower().endswith("deg") else key,
                                  lineno) for p in parts)
    return _parse_float(text, key, lineno)


def parse_scenario(text: str) -> Scenario:
    """Parse scenario text into a validated :class:`Scenario`.

    Raises
    ------
    ScenarioError
        With the offending line number on malformed lines or unknown keys.
    ValidationError
        Naming the violated invariant.
    """
    per_section: dict[str, dict] = {s: {} for s in _SECTIONS}
    seen: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ScenarioError(f"line {lineno}: unknown key {key!r}")
        if key in seen:
            raise ScenarioError(f"line {lineno}: duplicate key {key!r} (first on line {seen[key]})")
        seen[key] = lineno
        per_section[_KEYS[key]][key] = _parse_value(key, value, lineno)
    built = {s: cls(**per_section[s]) for s, cls in _SECTIONS.items()}
    return Scenario(**built)


def load_scenario(path) -> tuple[SystemParams, Geometry, OrientationModel, PolicyCase, SweepSpec]:
    """Read and validate a scenario file.

    Omitted keys take the default link constants. An empty file yields the
    reference configuration with the relay under the access point and the
    user 4 m away at 2.4 GHz.
    """
    text = Path(path).read_text(encoding="utf-8")
    return parse_scenario(text).astuple()


def _format_value(value) -> str:
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, str):
        return value
    if value is None:
        return "none"
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    if isinstance(value, bool):
        raise TypeError("boolean fields are not part of the format")
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def dump_scenario(scenario: Scenario) -> str:
    """Serialize every field; reloading the text gives an equal scenario."""
    lines = []
    for section, obj in zip(_SECTIONS, scenario.astuple()):
        lines.append(f"# {section}")
        for f in fields(obj):
            if f.name == "c_theta":
                continue
            lines.append(f"{f.name} = {_format_value(getattr(obj, f.name))}")
    return "\n".join(lines) + "\n"


def save_scenario(scenario: Scenario, path) -> None:
    Path(path).write_text(dump_scenario(scenario), encoding="utf-8", newline="\n")


def with_overrides(scenario: Scenario, **overrides) -> Scenario:
    """Return a copy with named fields replaced, routed to their owning section."""
    parts = dict(zip(_SECTIONS, scenario.astuple()))
    grouped: dict[str, dict] = {}
    for key, value in overrides.items():
        if key not in _KEYS:
            raise ScenarioError(f"unknown key {key!r}")
        grouped.setdefault(_KEYS[key], {})[key] = value
    for section, changes in grouped.items():
        parts[section] = replace(parts[section], **changes)
    return Scenario(**parts)


# --------------------------------------------------------------------------
# Derived scalar constants


def lambertian_order(theta_hpbw: float) -> float:
    """Radiation-pattern exponent of an LED with half-power beamwidth ``theta_hpbw``.

    Parameters
    ----------
    theta_hpbw : float
        Half-power semi-angle in radians, inside (0, pi/2).

    Returns
    -------
    float
        ``-1 / log2(cos(theta_hpbw))``.
    """
    c = math.cos(theta_hpbw)
    if not (0 < theta_hpbw < math.pi / 2) or c <= 0:
        raise ValueError(f"half-power beamwidth must lie in (0, pi/2), got {theta_hpbw}")
    return -1.0 / math.log2(c)


def rf_noise_power(params: SystemParams) -> float:
    """Thermal noise power of the RF receiver in watts.

    This is the only place where the dB quantities are converted to linear scale.
    """
    n0_dbm = params.p0_dbm_per_hz + 10.0 * math.log10(params.b_rf) + params.nf_db
    return 10.0 ** ((n0_dbm - 30.0) / 10.0)


def shot_noise_power(params: SystemParams) -> float:
    """Shot-noise variance at the photodiode (A^2)."""
    return params.q_e * params.i_ambient * params.b_vlc
