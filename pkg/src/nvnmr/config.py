"""Human-unit run configuration.

Config files are nested YAML. Every dimensioned quantity is a string with an
explicit unit ("10 mT", "5 nm", "425.77 kHz"); bare numbers are accepted only
for dimensionless fields. Internally everything is SI with angular
frequencies. The resolved form uses base units (T, s, m, rad/s, rad) with
repr-exact numbers, so a config that round-trips through a JSON sidecar
parses back to an identical RunConfig.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from decimal import Decimal

import yaml

from .hamiltonian import FRAMES, NV_COUPLINGS, HamiltonianModel
from .dynamics import SEQUENCE_KINDS, PulseSequence
from .quantum import EvolutionOptions
from .spectroscopy import DEFAULT_GRID_POINTS, DEFAULT_HALF_SPAN
from .system import PhysicalConstants, SpinSite, SystemSpec, builtin_molecule, nv_site, validate

MOLECULE_KINDS = ("aldehyde", "methyl", "hydroxymethyl")

# power-of-ten units carry a decimal exponent so "3 nm" parses to the same
# double as the literal 3e-9; irrational factors (2 pi, pi/180) multiply
_UNITS = {
    "field": {"T": 0, "mT": -3, "uT": -6, "µT": -6, "nT": -9},
    "time": {"s": 0, "ms": -3, "us": -6, "µs": -6, "ns": -9},
    "length": {"m": 0, "mm": -3, "um": -6, "µm": -6, "nm": -9, "angstrom": -10},
    "frequency": {
        "rad/s": 1.0,
        "Hz": 2.0 * math.pi,
        "kHz": 2.0 * math.pi * 1e3,
        "MHz": 2.0 * math.pi * 1e6,
    },
    "angle": {"rad": 1.0, "deg": math.pi / 180.0},
}
_BASE_UNIT = {"field": "T", "time": "s", "length": "m", "frequency": "rad/s", "angle": "rad"}

_QUANTITY_RE = re.compile(r"^\s*(\S+)\s+(.+?)\s*$")


class ConfigError(ValueError):
    """Raised for parse, unit, unknown-key, and validation failures."""


def _fail(where: str, message: str):
    raise ConfigError(f"{where}: {message}")


def _mapping(raw, where: str) -> dict:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        _fail(where, f"expected a mapping, got {type(raw).__name__}")
    return raw


def _check_keys(mapping: dict, allowed, where: str):
    for key in mapping:
        if key not in allowed:
            _fail(where, f"unknown key {key!r} (allowed: {', '.join(sorted(allowed))})")


def _quantity(raw, kind: str, where: str) -> float:
    table = _UNITS[kind]
    if not isinstance(raw, str):
        example = f"'10 {_BASE_UNIT[kind]}'"
        _fail(where, f"dimensioned value must be a string with units, e.g. {example}; got {raw!r}")
    match = _QUANTITY_RE.match(raw)
    if match is None:
        _fail(where, f"cannot parse quantity {raw!r}; expected '<number> <unit>'")
    number, unit = match.groups()
    if unit not in table:
        _fail(where, f"unknown {kind} unit {unit!r} (allowed: {', '.join(table)})")
    factor = table[unit]
    try:
        if isinstance(factor, int):
            return float(Decimal(number).scaleb(factor))
        return float(number) * factor
    except (ValueError, ArithmeticError):
        _fail(where, f"bad numeric value {number!r}")


def _number(raw, where: str) -> float:
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        _fail(where, f"expected a plain number, got {raw!r}")
    return float(raw)


def _integer(raw, where: str, minimum: int = 1) -> int:
    if isinstance(raw, bool) or not isinstance(raw, int):
        _fail(where, f"expected an integer, got {raw!r}")
    if raw < minimum:
        _fail(where, f"must be >= {minimum}, got {raw}")
    return raw


def _boolean(raw, where: str) -> bool:
    if not isinstance(raw, bool):
        _fail(where, f"expected true/false, got {raw!r}")
    return raw


def _choice(raw, where: str, options) -> str:
    if raw not in options:
        _fail(where, f"expected one of {', '.join(options)}; got {raw!r}")
    return raw


def _si(value: float, kind: str) -> str:
    return f"{value!r} {_BASE_UNIT[kind]}"


@dataclass(frozen=True, eq=True)
class RunConfig:
    """Fully resolved run parameters (SI, angular frequencies).

    ``drive_b_nmr`` None means the matched-drive policy; ``drive_omega`` None
    means the reference Larmor frequency. ``resolved`` is the canonical
    base-unit mapping used for hashing and sidecar round-trips.
    """

    spec: SystemSpec
    model: HamiltonianModel
    sequence: PulseSequence
    drive_b_nmr: float | None
    drive_omega: float | None
    drive_phase: float
    spectrum_points: int
    spectrum_half_span: float
    peak_min_height: float
    evolution: EvolutionOptions
    detect_b_span: tuple[float, float]
    detect_b_points: int
    detect_t_factors: tuple[float, float]
    detect_t_points: int
    scan_distances: tuple[float, ...]
    scan_t2_values: tuple[float, ...]
    resolved: dict


def _parse_system(raw, constants: PhysicalConstants):
    block = _mapping(raw, "system")
    _check_keys(block, {"b0", "collection", "nv"}, "system")
    b0 = _quantity(block.get("b0", "10 mT"), "field", "system.b0")
    collection = _number(block.get("collection", 0.05), "system.collection")
    nv_block = _mapping(block.get("nv"), "system.nv")
    _check_keys(nv_block, {"t1", "t2"}, "system.nv")
    t1 = _quantity(nv_block.get("t1", "5 ms"), "time", "system.nv.t1")
    t2 = _quantity(nv_block.get("t2", "1 ms"), "time", "system.nv.t2")
    try:
        nv = nv_site(t1=t1, t2=t2, constants=constants)
    except ValueError as err:
        raise ConfigError(f"system.nv.t2: {err}") from err
    return b0, collection, nv


def _parse_molecule(raw, constants: PhysicalConstants):
    block = _mapping(raw, "molecule")
    _check_keys(block, {"kind", "standoff", "azimuth", "t1", "t2"}, "molecule")
    kind = _choice(block.get("kind", "aldehyde"), "molecule.kind", MOLECULE_KINDS)
    standoff = _quantity(block.get("standoff", "5 nm"), "length", "molecule.standoff")
    azimuth = _quantity(block.get("azimuth", "0 rad"), "angle", "molecule.azimuth")
    t1 = _quantity(block.get("t1", "10 ms"), "time", "molecule.t1")
    t2 = _quantity(block.get("t2", "1 ms"), "time", "molecule.t2")
    try:
        return builtin_molecule(kind, standoff, azimuth=azimuth, t1=t1, t2=t2, constants=constants)
    except ValueError as err:
        raise ConfigError(f"molecule: {err}") from err


def _parse_site(raw, index: int, constants: PhysicalConstants) -> SpinSite:
    where = f"nuclei[{index}]"
    block = _mapping(raw, where)
    _check_keys(block, {"label", "gamma", "position", "t1", "t2", "active"}, where)
    label = block.get("label", f"site{index}")
    if not isinstance(label, str) or not label:
        _fail(f"{where}.label", f"expected a nonempty string, got {label!r}")
    gamma_raw = block.get("gamma", "proton")
    if gamma_raw == "proton":
        gamma = constants.gamma_proton
    else:
        # exception to the unit-string rule: gamma is rad/s/T by definition
        gamma = _number(gamma_raw, f"{where}.gamma")
    pos_raw = block.get("position")
    if not isinstance(pos_raw, (list, tuple)) or len(pos_raw) != 3:
        _fail(f"{where}.position", f"expected a list of three lengths, got {pos_raw!r}")
    position = tuple(
        _quantity(c, "length", f"{where}.position[{i}]") for i, c in enumerate(pos_raw)
    )
    t1 = _quantity(block.get("t1", "10 ms"), "time", f"{where}.t1")
    t2 = _quantity(block.get("t2", "1 ms"), "time", f"{where}.t2")
    active = _boolean(block.get("active", True), f"{where}.active")
    try:
        return SpinSite(label, gamma, position, t1=t1, t2=t2, active=active)
    except ValueError as err:
        raise ConfigError(f"{where}: {err}") from err


def _parse_model(raw) -> HamiltonianModel:
    block = _mapping(raw, "model")
    _check_keys(block, {"frame", "nv_coupling", "nuclear_dipolar"}, "model")
    return HamiltonianModel(
        frame=_choice(block.get("frame", "rotating_secular"), "model.frame", FRAMES),
        nv_coupling=_choice(
            block.get("nv_coupling", "zz_only"), "model.nv_coupling", NV_COUPLINGS
        ),
        include_nuclear_dipolar=_boolean(
            block.get("nuclear_dipolar", True), "model.nuclear_dipolar"
        ),
    )


def _parse_sequence(raw) -> PulseSequence:
    block = _mapping(raw, "sequence")
    _check_keys(block, {"kind", "t_p", "n"}, "sequence")
    kind = _choice(block.get("kind", "echo"), "sequence.kind", SEQUENCE_KINDS)
    t_p = _quantity(block.get("t_p", "1 ms"), "time", "sequence.t_p")
    n = _integer(block.get("n", 1), "sequence.n")
    try:
        return PulseSequence(kind, t_p, n)
    except ValueError as err:
        raise ConfigError(f"sequence: {err}") from err


def _parse_drive(raw):
    block = _mapping(raw, "drive")
    _check_keys(block, {"b_nmr", "frequency", "phase"}, "drive")
    b_raw = block.get("b_nmr", "matched")
    b_nmr = None if b_raw == "matched" else _quantity(b_raw, "field", "drive.b_nmr")
    f_raw = block.get("frequency", "auto")
    omega = None if f_raw == "auto" else _quantity(f_raw, "frequency", "drive.frequency")
    phase = _quantity(block.get("phase", "0 rad"), "angle", "drive.phase")
    return b_nmr, omega, phase


def _parse_evolution(raw) -> EvolutionOptions:
    block = _mapping(raw, "evolution")
    _check_keys(block, {"backend", "tolerance", "max_step"}, "evolution")
    backend = _choice(
        block.get("backend", "exact_piecewise"), "evolution.backend",
        ("exact_piecewise", "stepped"),
    )
    tolerance = _number(block.get("tolerance", 1e-6), "evolution.tolerance")
    step_raw = block.get("max_step")
    max_step = None if step_raw is None else _quantity(step_raw, "time", "evolution.max_step")
    try:
        return EvolutionOptions(backend=backend, max_step=max_step, tolerance=tolerance)
    except ValueError as err:
        raise ConfigError(f"evolution: {err}") from err


def parse_config(raw, source: str = "<config>") -> RunConfig:
    """Parse an already-loaded mapping; see load_config for files."""
    top = _mapping(raw, source)
    _check_keys(
        top,
        {"system", "molecule", "nuclei", "model", "sequence", "drive",
         "spectrum", "peaks", "evolution", "detect", "scan"},
        source,
    )
    constants = PhysicalConstants()
    b0, collection, nv = _parse_system(top.get("system"), constants)

    if "molecule" in top and "nuclei" in top:
        _fail(source, "give either 'molecule' or 'nuclei', not both")
    if "nuclei" in top:
        raw_sites = top["nuclei"]
        if not isinstance(raw_sites, list) or not raw_sites:
            _fail("nuclei", "expected a nonempty list of sites")
        nuclei = tuple(_parse_site(s, i, constants) for i, s in enumerate(raw_sites))
    else:
        nuclei = _parse_molecule(top.get("molecule"), constants)

    spec = SystemSpec(b0=b0, nv=nv, nuclei=nuclei, constants=constants, collection_c=collection)
    problems = validate(spec)
    if problems:
        raise ConfigError("; ".join(f"{v.field}: {v.message}" for v in problems))

    model = _parse_model(top.get("model"))
    sequence = _parse_sequence(top.get("sequence"))
    drive_b_nmr, drive_omega, drive_phase = _parse_drive(top.get("drive"))

    spectrum_block = _mapping(top.get("spectrum"), "spectrum")
    _check_keys(spectrum_block, {"points", "half_span"}, "spectrum")
    spectrum_points = _integer(spectrum_block.get("points", DEFAULT_GRID_POINTS), "spectrum.points", 2)
    half_span = _quantity(
        spectrum_block.get("half_span", f"{DEFAULT_HALF_SPAN!r} rad/s"),
        "frequency", "spectrum.half_span",
    )
    if half_span <= 0:
        _fail("spectrum.half_span", "must be positive")

    peaks_block = _mapping(top.get("peaks"), "peaks")
    _check_keys(peaks_block, {"min_height"}, "peaks")
    min_height = _number(peaks_block.get("min_height", 0.01), "peaks.min_height")
    if min_height <= 0:
        _fail("peaks.min_height", "must be positive")

    evolution = _parse_evolution(top.get("evolution"))

    detect_block = _mapping(top.get("detect"), "detect")
    _check_keys(
        detect_block,
        {"b_min", "b_max", "b_points", "t_min_factor", "t_max_factor", "t_points"},
        "detect",
    )
    b_min = _quantity(detect_block.get("b_min", "1 uT"), "field", "detect.b_min")
    b_max = _quantity(detect_block.get("b_max", "1 mT"), "field", "detect.b_max")
    if not (0 < b_min < b_max):
        _fail("detect.b_min", "need 0 < b_min < b_max")
    b_points = _integer(detect_block.get("b_points", 13), "detect.b_points", 2)
    t_lo = _number(detect_block.get("t_min_factor", 0.05), "detect.t_min_factor")
    t_hi = _number(detect_block.get("t_max_factor", 3.0), "detect.t_max_factor")
    if not (0 < t_lo < t_hi):
        _fail("detect.t_min_factor", "need 0 < t_min_factor < t_max_factor")
    t_points = _integer(detect_block.get("t_points", 24), "detect.t_points", 2)

    scan_block = _mapping(top.get("scan"), "scan")
    _check_keys(scan_block, {"distances", "t2_values"}, "scan")
    distances_raw = scan_block.get("distances", ["3 nm", "4 nm", "5 nm", "6 nm"])
    if not isinstance(distances_raw, list) or not distances_raw:
        _fail("scan.distances", "expected a nonempty list of lengths")
    distances = tuple(
        _quantity(d, "length", f"scan.distances[{i}]") for i, d in enumerate(distances_raw)
    )
    t2_raw = scan_block.get("t2_values", ["0.25 ms", "0.5 ms", "1 ms"])
    if not isinstance(t2_raw, list) or not t2_raw:
        _fail("scan.t2_values", "expected a nonempty list of times")
    t2_values = tuple(
        _quantity(t, "time", f"scan.t2_values[{i}]") for i, t in enumerate(t2_raw)
    )

    resolved = {
        "system": {
            "b0": _si(b0, "field"),
            "collection": collection,
            "nv": {"t1": _si(nv.t1, "time"), "t2": _si(nv.t2, "time")},
        },
        "nuclei": [
            {
                "label": s.label,
                "gamma": s.gamma,
                "position": [_si(c, "length") for c in s.position],
                "t1": _si(s.t1, "time"),
                "t2": _si(s.t2, "time"),
                "active": s.active,
            }
            for s in nuclei
        ],
        "model": {
            "frame": model.frame,
            "nv_coupling": model.nv_coupling,
            "nuclear_dipolar": model.include_nuclear_dipolar,
        },
        "sequence": {"kind": sequence.kind, "t_p": _si(sequence.t_p, "time"), "n": sequence.n},
        "drive": {
            "b_nmr": "matched" if drive_b_nmr is None else _si(drive_b_nmr, "field"),
            "frequency": "auto" if drive_omega is None else _si(drive_omega, "frequency"),
            "phase": _si(drive_phase, "angle"),
        },
        "spectrum": {"points": spectrum_points, "half_span": _si(half_span, "frequency")},
        "peaks": {"min_height": min_height},
        "evolution": {
            "backend": evolution.backend,
            "tolerance": evolution.tolerance,
            "max_step": None if evolution.max_step is None else _si(evolution.max_step, "time"),
        },
        "detect": {
            "b_min": _si(b_min, "field"),
            "b_max": _si(b_max, "field"),
            "b_points": b_points,
            "t_min_factor": t_lo,
            "t_max_factor": t_hi,
            "t_points": t_points,
        },
        "scan": {
            "distances": [_si(d, "length") for d in distances],
            "t2_values": [_si(t, "time") for t in t2_values],
        },
    }

    return RunConfig(
        spec=spec,
        model=model,
        sequence=sequence,
        drive_b_nmr=drive_b_nmr,
        drive_omega=drive_omega,
        drive_phase=drive_phase,
        spectrum_points=spectrum_points,
        spectrum_half_span=half_span,
        peak_min_height=min_height,
        evolution=evolution,
        detect_b_span=(b_min, b_max),
        detect_b_points=b_points,
        detect_t_factors=(t_lo, t_hi),
        detect_t_points=t_points,
        scan_distances=distances,
        scan_t2_values=t2_values,
        resolved=resolved,
    )


def load_raw(path):
    """Read a YAML file to a raw mapping; parse errors carry line/column."""
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as err:
        mark = getattr(err, "problem_mark", None)
        at = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"{path}: YAML parse error{at}: {err}") from err


def load_config(path) -> RunConfig:
    """Load and resolve a YAML config file; empty file means all defaults."""
    return parse_config(load_raw(path), source=str(path))


def apply_overrides(raw, overrides, source: str = "<override>") -> dict:
    """Apply KEY=VALUE pairs (dotted keys, YAML values) onto a raw mapping."""
    result = dict(_mapping(raw, source))
    for item in overrides:
        if "=" not in item:
            _fail(source, f"override {item!r} is not KEY=VALUE")
        key, _, value_text = item.partition("=")
        key = key.strip()
        if not key:
            _fail(source, f"override {item!r} has an empty key")
        try:
            value = yaml.safe_load(value_text)
        except yaml.YAMLError as err:
            raise ConfigError(f"{source}: bad override value {value_text!r}: {err}") from err
        parts = key.split(".")
        node = result
        for part in parts[:-1]:
            child = node.get(part)
            if child is None:
                child = {}
                node[part] = child
            elif not isinstance(child, dict):
                _fail(source, f"override {key!r} descends into non-mapping {part!r}")
            else:
                child = dict(child)
                node[part] = child
            node = child
        node[parts[-1]] = value
    return result
