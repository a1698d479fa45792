"""Run configuration: typed blocks, text-file loading, flag overrides.

A run is described by four blocks (family, pipeline, render, output)
with documented defaults.  Config files are TOML; a manifest JSON
emitted by an earlier run is also accepted, so runs can be reproduced
from their own manifests.  Unknown keys are rejected with the line
and column of the offending key.  Command-line flags override config
file values; the config file overrides the built-in defaults.
"""

from __future__ import annotations

import hashlib
import json
import re
from typing import Literal, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .errors import ConfigError


def parse_complex(text: str) -> complex:
    """Parse a complex literal accepting both i and j notation."""
    s = str(text).strip().replace(" ", "").replace("i", "j").replace("J", "j")
    if not s:
        raise ConfigError("empty complex literal")
    if s in ("j", "+j"):
        s = "1j"
    elif s == "-j":
        s = "-1j"
    else:
        # bare trailing j after a sign or operator, e.g. 1+j
        s = re.sub(r"(?<=[-+])j", "1j", s)
    try:
        return complex(s)
    except ValueError as exc:
        raise ConfigError(f"invalid complex literal {text!r}") from exc


def format_complex(z: complex) -> str:
    if z.imag == 0:
        return f"{z.real:g}"
    if z.real == 0:
        return f"{z.imag:g}i"
    return f"{z.real:g}{z.imag:+g}i"


class FamilyBlock(BaseModel):
    """Which meromorphic family to run and its parameters.

    lam applies to tan and exp_elliptic; m to tan; d to exp_elliptic;
    omega1/omega2 and poly to the lattice families.  Complex values
    are strings in i notation ("1", "i", "0.5+0.5i").
    """

    model_config = ConfigDict(extra="forbid")

    variant: Literal["tan", "weierstrass", "elliptic_poly", "exp_elliptic"] = "tan"
    lam: str = "1"
    m: int = Field(default=1, ge=1)
    d: int = Field(default=1, ge=1)
    omega1: str = "1"
    omega2: str = "i"
    poly: list[str] = Field(default_factory=lambda: ["0", "0", "1"])


class PipelineBlock(BaseModel):
    """Numerical pipeline knobs.

    radius is the preimage search radius (omit for the per-family,
    per-command default).  outer_radius overrides the derived escape
    radius R.  The regression window bounds the counting-function
    radii used for the growth order; omit for family defaults.
    """

    model_config = ConfigDict(extra="forbid")

    radius: Optional[float] = Field(default=None, gt=0)
    max_branches: int = Field(default=400, ge=1)
    distortion: Literal["off", "koebe"] = "koebe"
    outer_radius: Optional[float] = Field(default=None, gt=0)
    regression_rmin: Optional[float] = Field(default=None, gt=0)
    regression_rmax: Optional[float] = Field(default=None, gt=0)
    regression_samples: Optional[int] = Field(default=None, ge=5)
    threads: int = Field(default=1, ge=1)
    seed: int = 42


class RenderBlock(BaseModel):
    """Optional escape-render frame; omit the block to skip rendering."""

    model_config = ConfigDict(extra="forbid")

    center: str = "0"
    width: float = Field(default=4.0, gt=0)
    pixels_x: int = Field(default=512, ge=16)
    pixels_y: int = Field(default=512, ge=16)
    max_iter: int = Field(default=64, ge=0)
    escape_radius: float = Field(default=1e6, gt=0)
    pole_capture_radius: float = Field(default=1e-6, gt=0)


class OutputBlock(BaseModel):
    """Where artifacts go and which formats are emitted."""

    model_config = ConfigDict(extra="forbid")

    directory: str = "out"
    formats: list[Literal["csv", "json", "p6", "p4"]] = Field(
        default_factory=lambda: ["csv", "json"]
    )


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    family: Optional[FamilyBlock] = None
    pipeline: PipelineBlock = Field(default_factory=PipelineBlock)
    render: Optional[RenderBlock] = None
    output: OutputBlock = Field(default_factory=OutputBlock)


class ConfigParseError(ConfigError):
    """Config file rejected; carries line/column diagnostics when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None and "line" not in message:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


def _locate_key(text: str, key: str) -> tuple[int | None, int | None]:
    """Best-effort line/column of a key name in the raw config text."""
    pattern = re.compile(rf"^\s*{re.escape(key)}\s*=", re.MULTILINE)
    match = pattern.search(text)
    if match is None:
        pattern = re.compile(re.escape(key))
        match = pattern.search(text)
        if match is None:
            return None, None
    line = text.count("\n", 0, match.start()) + 1
    column = match.start() - (text.rfind("\n", 0, match.start()) + 1) + 1
    return line, column


def _validate(data: dict, raw_text: str) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        path = ".".join(str(p) for p in first["loc"])
        key = str(first["loc"][-1]) if first["loc"] else ""
        line, column = _locate_key(raw_text, key)
        raise ConfigParseError(f"config field {path}: {first['msg']}", line, column) from exc


def load_config(path: str) -> RunConfig:
    """Load a RunConfig from a TOML file or an emitted manifest JSON."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from exc
    text = raw.decode("utf-8", errors="replace")
    if path.endswith(".json"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigParseError(exc.msg, exc.lineno, exc.colno) from exc
        if "resolved_config" in data:
            data = data["resolved_config"]
    else:
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            line, column = None, None
            match = re.search(r"line (\d+), column (\d+)", str(exc))
            if match:
                line, column = int(match.group(1)), int(match.group(2))
            raise ConfigParseError(str(exc), line, column) from exc
    return _validate(data, text)


def merge_flags(base: RunConfig, **flags) -> RunConfig:
    """Apply non-None flag values on top of a config (flags win).

    Recognized keys: family, lam, m, d, omega1, omega2, poly (family
    block; setting any creates the block), radius, max_branches,
    distortion, threads, seed (pipeline block), out, formats (output
    block), render (bool: attach a default render block).
    """
    data = base.model_dump()
    fam_keys = {"family": "variant", "lam": "lam", "m": "m", "d": "d",
                "omega1": "omega1", "omega2": "omega2", "poly": "poly"}
    pipe_keys = {"radius", "max_branches", "distortion", "threads", "seed",
                 "outer_radius", "regression_rmin", "regression_rmax",
                 "regression_samples"}
    out_keys = {"out": "directory", "formats": "formats"}
    for key, value in flags.items():
        if value is None:
            continue
        if key in fam_keys:
            if data["family"] is None:
                data["family"] = FamilyBlock().model_dump()
            data["family"][fam_keys[key]] = value
        elif key in pipe_keys:
            data["pipeline"][key] = value
        elif key in out_keys:
            data["output"][out_keys[key]] = value
        elif key == "render":
            if value and data["render"] is None:
                data["render"] = RenderBlock().model_dump()
        elif key.startswith("render_"):
            if data["render"] is None:
                data["render"] = RenderBlock().model_dump()
            data["render"][key.removeprefix("render_")] = value
        else:
            raise ConfigError(f"unknown flag {key!r}")
    return _validate(data, "")


def config_hash(config: RunConfig) -> str:
    """Stable hash of the semantic configuration.

    The output block (directory, formats) does not affect computed
    values and is excluded, so re-running an emitted manifest into a
    different directory reproduces the same hash.
    """
    data = config.model_dump()
    data.pop("output", None)
    payload = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()
