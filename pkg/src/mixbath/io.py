"""Config files, CSV output and run manifests."""

from __future__ import annotations

import json
import platform
import re
from dataclasses import dataclass, field
from importlib import resources
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .scenario import Scenario, build_scenario

_SECTION = re.compile(r"^\[\s*(system|bath\.(\d+))\s*\]$")
_SYSTEM_KEYS = ("statistics", "omega_mode", "frequency", "n0")
_BATH_KEYS = ("statistics", "alpha", "gamma", "temperature")


def tool_version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "0+unknown"


def _value(text: str):
    try:
        return float(text)
    except ValueError:
        return text


def parse_config_text(text: str) -> Scenario:
    """Parse the line-oriented ``[system]`` / ``[bath.N]`` format."""
    sections: dict[str, dict] = {}
    order: list[str] = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        col = raw.index(line[0]) + 1
        if line.startswith("["):
            m = _SECTION.match(line)
            if not m:
                raise ConfigError(f"unknown section {line}", line=lineno, column=col)
            current = "system" if m.group(1) == "system" else f"bath.{int(m.group(2))}"
            if current in sections:
                raise ConfigError("duplicate section", line=lineno, column=col, section=current)
            sections[current] = {}
            order.append(current)
            continue
        if current is None:
            raise ConfigError("key outside of any section", line=lineno, column=col)
        key, eq, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not eq or not key or not val:
            raise ConfigError("expected 'key = value'", line=lineno, column=col, section=current)
        allowed = _SYSTEM_KEYS if current == "system" else _BATH_KEYS
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r}", line=lineno, column=col, section=current)
        if key in sections[current]:
            raise ConfigError(f"duplicate key {key!r}", line=lineno, column=col, section=current)
        sections[current][key] = _value(val)

    if "system" not in sections:
        raise ConfigError("missing [system] section")
    bath_names = sorted((s for s in order if s != "system"), key=lambda s: int(s.split(".")[1]))
    expected = [f"bath.{i}" for i in range(1, len(bath_names) + 1)]
    if bath_names != expected:
        raise ConfigError(f"bath sections must be numbered 1..{len(bath_names)} without gaps")
    raw_cfg = {"system": sections["system"], "baths": [sections[b] for b in bath_names]}
    return build_scenario(raw_cfg)


def parse_config(path) -> Scenario:
    """Read a config file; bare names fall back to the bundled configs."""
    p = Path(path)
    if not p.exists():
        bundled = resources.files("mixbath") / "configs" / p.name
        if p.parent == Path(".") and bundled.is_file():
            return parse_config_text(bundled.read_text())
        raise ConfigError(f"config file not found: {path}")
    return parse_config_text(p.read_text())


def bundled_configs() -> list[str]:
    root = resources.files("mixbath") / "configs"
    return sorted(f.name for f in root.iterdir() if f.name.endswith(".cfg"))


def format_config(scenario: Scenario, mode: str | None = None) -> str:
    cfg = scenario.to_config(mode)
    lines = ["[system]"]
    lines += [f"{k} = {_fmt(v)}" for k, v in cfg["system"].items()]
    for i, b in enumerate(cfg["baths"], start=1):
        lines += ["", f"[bath.{i}]"] + [f"{k} = {_fmt(v)}" for k, v in b.items()]
    return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def fmt17(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(path, header: list[str], columns: list, manifest_path) -> Path:
    """Comma-separated table at 17 significant digits with a manifest pointer line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = [np.asarray(c) for c in columns]
    rows = len(cols[0]) if cols else 0
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# manifest: {manifest_path}\n")
        fh.write(",".join(header) + "\n")
        for r in range(rows):
            fh.write(",".join(_cell(c[r]) for c in cols) + "\n")
    return path


def _cell(v) -> str:
    if isinstance(v, (str, np.str_)):
        return str(v)
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    return fmt17(v)


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Header and numeric body of a CSV written by :func:`write_csv`."""
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if not ln.startswith("#")]
    header = lines[0].split(",")
    body = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    return header, body.reshape(len(lines) - 1, len(header))


@dataclass
class RunManifest:
    command: str
    argv: list
    scenario: dict | None = None
    derived: dict | None = None
    grid: dict | None = None
    quadrature: dict | None = None
    outputs: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    results: dict = field(default_factory=dict)
    version: str = field(default_factory=tool_version)

    def set_scenario(self, scenario: Scenario, roots=None) -> None:
        self.scenario = scenario.to_config("bare")
        self.derived = {"omega": scenario.omega, "Omega": scenario.Omega, "p": scenario.p,
                        "g0": scenario.g0, "hash": scenario.digest}
        if roots is not None:
            self.derived["roots"] = [[float(s.real), float(s.imag)] for s in roots.roots]

    def as_dict(self) -> dict:
        return {
            "version": self.version,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "command": self.command,
            "argv": list(self.argv),
            "scenario": self.scenario,
            "derived": self.derived,
            "grid": self.grid,
            "quadrature": self.quadrature,
            "outputs": self.outputs,
            "timings": self.timings,
            "warnings": self.warnings,
            "results": self.results,
        }

    def write(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.as_dict(), indent=2, default=_json_default) + "\n")
        return path


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return str(obj)
