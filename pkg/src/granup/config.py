"""INI run configuration: material constants, step controls and load program.

Example::

    [material]
    n = 6

    [controls]
    max_iter = 50

    [path.1]
    control = stress strain strain
    target = -120 0 0
    increments = 200

Missing material keys take the alumina defaults. ``[path.N]`` sections run
in increasing N. An optional ``[sweep]`` repeats the program for several
values of one material constant::

    [sweep]
    parameter = n
    values = 1 6 60 600
    on_failure = continue
"""
import configparser
import math
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from granup.errors import ConfigError
from granup.integrator import STRAIN, STRESS, LoadProgram, LoadStep, StepControls
from granup.params import FIELD_NAMES, MaterialParams

_PATH_RE = re.compile(r"^path\.(\d+)$")
_CONTROL_KEYS = {"tol_F", "tol_F_rel", "max_iter", "max_substeps"}
_STEP_KEYS = {"control", "target", "increments"}
_SWEEP_KEYS = {"parameter", "values", "on_failure"}


@dataclass(frozen=True)
class Sweep:
    parameter: str
    values: tuple
    on_failure: str = "stop"


@dataclass(frozen=True)
class Config:
    material: MaterialParams
    controls: StepControls
    program: LoadProgram
    sweep: Sweep | None = None
    source: str = ""

    def materials(self):
        """(label value, params) for each run; a single run when not sweeping."""
        if self.sweep is None:
            return [(None, self.material)]
        return [(v, self.material.replace(**{self.sweep.parameter: v})) for v in self.sweep.values]


def _float(section, key, text):
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: '{text}' is not a number") from None
    if not math.isfinite(v):
        raise ConfigError(f"[{section}] {key} must be finite")
    return v


def _int(section, key, text):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: '{text}' is not an integer") from None


def _reject_unknown(section, keys, allowed):
    extra = sorted(set(keys) - set(allowed))
    if extra:
        raise ConfigError(f"[{section}] unknown key(s): {', '.join(extra)}")


def _material(cp):
    if not cp.has_section("material"):
        return MaterialParams()
    sec = cp["material"]
    _reject_unknown("material", sec.keys(), FIELD_NAMES)
    return MaterialParams(**{k: _float("material", k, v) for k, v in sec.items()})


def _controls(cp):
    if not cp.has_section("controls"):
        return StepControls()
    sec = cp["controls"]
    _reject_unknown("controls", sec.keys(), _CONTROL_KEYS)
    kw = {}
    for k, v in sec.items():
        if k == "tol_F":
            kw[k] = None if v.strip().lower() == "auto" else _float("controls", k, v)
        elif k == "tol_F_rel":
            kw[k] = _float("controls", k, v)
        else:
            kw[k] = _int("controls", k, v)
    try:
        return StepControls(**kw)
    except ValueError as exc:
        raise ConfigError(f"[controls] {exc}") from None


def _step(name, sec):
    _reject_unknown(name, sec.keys(), _STEP_KEYS)
    missing = _STEP_KEYS - set(sec.keys()) - {"increments"}
    if missing:
        raise ConfigError(f"[{name}] missing key(s): {', '.join(sorted(missing))}")
    kinds = tuple(sec["control"].split())
    targets = tuple(_float(name, "target", t) for t in sec["target"].split())
    increments = _int(name, "increments", sec.get("increments", "1"))
    for k in kinds:
        if k not in (STRAIN, STRESS):
            raise ConfigError(f"[{name}] control must list 'strain' or 'stress' per axis, got '{k}'")
    try:
        return LoadStep(kinds, targets, increments)
    except ValueError as exc:
        raise ConfigError(f"[{name}] {exc}") from None


def _program(cp):
    numbered = []
    for name in cp.sections():
        m = _PATH_RE.match(name)
        if m:
            numbered.append((int(m.group(1)), name))
    return LoadProgram(tuple(_step(name, cp[name]) for _, name in sorted(numbered)))


def _sweep(cp):
    if not cp.has_section("sweep"):
        return None
    sec = cp["sweep"]
    _reject_unknown("sweep", sec.keys(), _SWEEP_KEYS)
    param = sec.get("parameter", "").strip()
    if param not in FIELD_NAMES:
        raise ConfigError(f"[sweep] parameter '{param}' is not a material constant")
    values = tuple(_float("sweep", "values", v) for v in sec.get("values", "").split())
    if not values:
        raise ConfigError("[sweep] values must not be empty")
    on_failure = sec.get("on_failure", "stop").strip()
    if on_failure not in ("stop", "continue"):
        raise ConfigError("[sweep] on_failure must be 'stop' or 'continue'")
    return Sweep(param, values, on_failure)


def parse_config(text, source="<string>"):
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # M and m are different constants
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    known = {"material", "controls", "sweep"}
    for name in cp.sections():
        if name not in known and not _PATH_RE.match(name):
            raise ConfigError(f"{source}: unknown section [{name}]")
    cfg = Config(_material(cp), _controls(cp), _program(cp), _sweep(cp), source)
    if cfg.sweep is not None:
        cfg.materials()  # validates every member
    return cfg


def bundled_names():
    return sorted(p.name[:-4] for p in resources.files("granup.configs").iterdir() if p.name.endswith(".ini"))


def load_config(name_or_path):
    """Read a config file, or a bundled config by name (``tablet_120MPa``)."""
    path = Path(name_or_path)
    if path.is_file():
        return parse_config(path.read_text(), str(path))
    stem = path.name[:-4] if path.name.endswith(".ini") else path.name
    res = resources.files("granup.configs") / f"{stem}.ini"
    if str(path) == path.name and res.is_file():
        return parse_config(res.read_text(), f"{stem}.ini")
    raise ConfigError(f"no config file or bundled config named '{name_or_path}'")
