"""Scenario file parsing and experiment plans.

Scenario files are flat, line-oriented key=value text. Blank lines and `#`
comments are ignored; `[section]` headers are allowed purely to group keys
visually and carry no meaning. Keys live in a single flat namespace, may
appear once each, and unknown keys are rejected with their line number.

Example::

    [system]
    particles=675
    box=10 10 10
    periodic=false
    container=direct_sum
    temperature=1.1
    seed=42

    [integration]
    dt=0.001
    iterations=24000
    step_size_factor=1
    equilibration=2000

    [force_field]
    epsilon=1.0
    sigma=1.0
    nu=0.1
    cutoff=2.5

    [sweep]
    nu_sweep=0.05,0.1,0.9
    step_size_factors=1,2,3,4,6,12

    [sampling]
    sample_every=1
    rdf_bins=200
    rdf_sample_every=100
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from respamd.model import ForceField, SamplingConfig, ScenarioConfig, ValidationError


@dataclass
class ExperimentPlan:
    """A base configuration plus optional nu and step-size-factor sweep axes."""

    config: ScenarioConfig
    nu_values: Optional[list] = None
    step_size_factors: Optional[list] = None
    source: Optional[str] = None

    def __post_init__(self):
        if self.nu_values is not None:
            if not self.nu_values:
                raise ValidationError("nu_sweep must not be empty when present")
            for nu in self.nu_values:
                if nu < 0 or not np.isfinite(nu):
                    raise ValidationError(f"swept nu must be finite and >= 0, got {nu}")
        if self.step_size_factors is not None:
            if not self.step_size_factors:
                raise ValidationError("step_size_factors must not be empty when present")
            for s in self.step_size_factors:
                if s < 1:
                    raise ValidationError(f"step-size factors must be >= 1, got {s}")
                if self.config.iterations % s != 0:
                    raise ValidationError(
                        f"iterations ({self.config.iterations}) must be divisible by "
                        f"every swept step-size factor (violated by {s})"
                    )

    def grid(self) -> list:
        """The (nu, step_size_factor) grid points, base values when no sweep."""
        nus = self.nu_values if self.nu_values is not None else [self.config.force_field.nu]
        factors = (
            self.step_size_factors
            if self.step_size_factors is not None
            else [self.config.step_size_factor]
        )
        return [(nu, s) for nu in nus for s in factors]


def _parse_bool(text):
    if text in ("true", "1", "yes"):
        return True
    if text in ("false", "0", "no"):
        return False
    raise ValueError(f"expected true/false, got {text!r}")


def _parse_box(text):
    parts = text.split()
    if len(parts) != 3:
        raise ValueError(f"box needs 3 space-separated edge lengths, got {text!r}")
    return [float(p) for p in parts]


def _parse_int_list(text):
    return [int(p) for p in text.split(",") if p.strip() != ""]


def _parse_float_list(text):
    return [float(p) for p in text.split(",") if p.strip() != ""]


_KEY_PARSERS = {
    "particles": int,
    "box": _parse_box,
    "dt": float,
    "iterations": int,
    "step_size_factor": int,
    "epsilon": float,
    "sigma": float,
    "nu": float,
    "cutoff": float,
    "container": str,
    "periodic": _parse_bool,
    "temperature": float,
    "equilibration": int,
    "seed": int,
    "sample_every": int,
    "rdf_bins": int,
    "rdf_sample_every": int,
    "step_size_factors": _parse_int_list,
    "nu_sweep": _parse_float_list,
}

_REQUIRED_KEYS = ("particles", "box", "dt", "iterations")

_SECTION_RE = re.compile(r"^\[[A-Za-z0-9_ -]+\]$")


class ScenarioParseError(ValidationError):
    """A scenario file could not be parsed; carries file and line context."""

    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


def parse_scenario(path) -> ExperimentPlan:
    """Parse and validate a scenario file into an experiment plan."""
    path = Path(path)
    values = {}
    lines = path.read_text().splitlines()
    for line_no, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if _SECTION_RE.match(line):
            continue
        if "=" not in line:
            raise ScenarioParseError(path, line_no, f"expected key=value, got {raw.strip()!r}")
        key, _, text = line.partition("=")
        key = key.strip()
        text = text.strip()
        if key not in _KEY_PARSERS:
            raise ScenarioParseError(path, line_no, f"unknown key {key!r}")
        if key in values:
            raise ScenarioParseError(path, line_no, f"duplicate key {key!r}")
        try:
            values[key] = (_KEY_PARSERS[key](text), line_no)
        except ValueError as exc:
            raise ScenarioParseError(path, line_no, f"invalid value for {key!r}: {exc}") from exc
    for key in _REQUIRED_KEYS:
        if key not in values:
            raise ScenarioParseError(path, len(lines), f"missing required key {key!r}")

    def get(key, default=None):
        return values[key][0] if key in values else default

    try:
        force_field = ForceField(
            epsilon=get("epsilon", 1.0),
            sigma=get("sigma", 1.0),
            nu=get("nu", 0.0),
            cutoff=get("cutoff", 2.5),
        )
        sampling = SamplingConfig(
            sample_every=get("sample_every", 1),
            rdf_sample_every=get("rdf_sample_every", 100),
            rdf_bins=get("rdf_bins", 200),
        )
        config = ScenarioConfig(
            particle_count=get("particles"),
            box=get("box"),
            dt=get("dt"),
            iterations=get("iterations"),
            step_size_factor=get("step_size_factor", 1),
            force_field=force_field,
            temperature=get("temperature", 0.0),
            equilibration_steps=get("equilibration", 0),
            seed=get("seed", 0),
            container=get("container", "direct_sum"),
            periodic=get("periodic", False),
            sampling=sampling,
        )
        return ExperimentPlan(
            config=config,
            nu_values=get("nu_sweep"),
            step_size_factors=get("step_size_factors"),
            source=str(path),
        )
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc
