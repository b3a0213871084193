"""Experiment configuration files (JSON).

A config names its ``kind`` and may override any documented default in the
blocks that kind uses. Unknown blocks or keys are rejected; every resolved
value is echoed back by ``ExperimentConfig.resolved()``.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from .circuit import CircuitConfig
from .dynamics import CouplingSchedule, OscPairState, Orientation, VdpParams
from .memristor import MemristorDevice
from .analysis import FREQ_TOL, PHASE_TOL, TRANSIENT_FRACTION

SCHEMA_VERSION = 1
KINDS = ("model-sim", "circuit-sim", "detuning-sweep", "iv-sweep")


class ConfigError(ValueError):
    pass


def _defaults(cls, skip=()) -> dict:
    inst = cls()
    out = {}
    for f in dataclasses.fields(cls):
        if f.name in skip:
            continue
        value = getattr(inst, f.name)
        if isinstance(value, Orientation):
            value = value.value
        out[f.name] = value
    return out


BLOCK_DEFAULTS = {
    "model": lambda: _defaults(VdpParams),
    # t_s = null resolves to mid-run
    "coupling": lambda: {**_defaults(CouplingSchedule), "t_s": None},
    "run": lambda: {"t_end": 6000.0, "dt": 1e-3, "record_stride": 10,
                    "init": {k: v for k, v in _defaults(OscPairState).items() if k != "t"}},
    "circuit": lambda: _defaults(CircuitConfig),
    "circuit_run": lambda: {"t_end": 0.1, "dt": 0.5e-6, "record_stride": 1},
    "device": lambda: _defaults(MemristorDevice, skip=("state", "r_lrs", "dwell_accum")),
    "analysis": lambda: {"threshold": None, "refractory": None, "transient": TRANSIENT_FRACTION,
                         "freq_tol": FREQ_TOL, "phase_tol": PHASE_TOL},
    "sweep": lambda: {"mode": "model", "start": None, "stop": None, "points": 41,
                      "values": None, "couplings": None, "f_range_hz": [310.0, 640.0],
                      "f1_hz": None, "t_end": None, "dt": None, "record_stride": None,
                      "workers": 1},
    "iv": lambda: {"v_max": 1.0, "v_min": -1.0, "step": 0.01, "dt": 1e-3, "positive_only": False},
    "output": lambda: {"dir": None, "prefix": ""},
}

KIND_BLOCKS = {
    "model-sim": ("model", "coupling", "run", "analysis", "output"),
    "circuit-sim": ("circuit", "device", "circuit_run", "analysis", "output"),
    "detuning-sweep": ("sweep", "model", "circuit", "analysis", "output"),
    "iv-sweep": ("device", "iv", "output"),
}

_NULLABLE = {("coupling", "t_s"), ("analysis", "threshold"), ("analysis", "refractory"),
             ("sweep", "start"), ("sweep", "stop"), ("sweep", "values"), ("sweep", "couplings"),
             ("sweep", "f1_hz"), ("sweep", "t_end"), ("sweep", "dt"),
             ("sweep", "record_stride"), ("output", "dir")}


@dataclass
class ExperimentConfig:
    kind: str
    blocks: dict
    schema_version: int = SCHEMA_VERSION
    source: str | None = None

    def resolved(self) -> dict:
        """Normalized, fully resolved form (all defaults filled in)."""
        return {"schema_version": self.schema_version, "kind": self.kind,
                **json.loads(json.dumps(self.blocks, default=_jsonable))}

    def vdp_params(self) -> VdpParams:
        return VdpParams(**self.blocks["model"])

    def schedule(self) -> CouplingSchedule:
        block = dict(self.blocks["coupling"])
        return CouplingSchedule(**block)

    def init_state(self) -> OscPairState:
        return OscPairState(t=0.0, **self.blocks["run"]["init"])

    def circuit_config(self) -> CircuitConfig:
        return CircuitConfig(**self.blocks["circuit"])

    def device(self) -> MemristorDevice:
        return MemristorDevice(**self.blocks["device"])


def _jsonable(value):
    if isinstance(value, Orientation):
        return value.value
    raise TypeError(f"not serializable: {value!r}")


def _check_type(path: str, default, value):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected a boolean, got {value!r}")
    elif isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
    elif isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        return float(value)
    elif isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string, got {value!r}")
    return value


def _merge(path: str, defaults: dict, given: dict, nullable=frozenset()) -> dict:
    if not isinstance(given, dict):
        raise ConfigError(f"{path}: expected an object, got {type(given).__name__}")
    unknown = sorted(set(given) - set(defaults))
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {', '.join(repr(k) for k in unknown)}")
    out = dict(defaults)
    for key, value in given.items():
        default = defaults[key]
        sub = f"{path}.{key}"
        if isinstance(default, dict):
            out[key] = _merge(sub, default, value)
        elif value is None:
            if key not in nullable:
                raise ConfigError(f"{sub}: may not be null")
            out[key] = None
        elif default is None:
            out[key] = value
        else:
            out[key] = _check_type(sub, default, value)
    return out


def _validate(cfg: ExperimentConfig):
    b = cfg.blocks
    checks = []
    if "model" in b:
        checks.append(("model", lambda: VdpParams(**b["model"])))
    if "coupling" in b:
        run = b["run"]
        if b["coupling"]["t_s"] is None:
            b["coupling"]["t_s"] = 0.5 * run["t_end"]
        checks.append(("coupling", lambda: CouplingSchedule(**b["coupling"])))
        for key in ("t_end", "dt"):
            if not run[key] > 0:
                raise ConfigError(f"run.{key}: must be > 0, got {run[key]!r}")
        if run["record_stride"] < 1:
            raise ConfigError("run.record_stride: must be >= 1")
    if "circuit" in b:
        checks.append(("circuit", lambda: CircuitConfig(**b["circuit"])))
    if "device" in b:
        checks.append(("device", lambda: MemristorDevice(**b["device"])))
    if "circuit_run" in b:
        for key in ("t_end", "dt"):
            if not b["circuit_run"][key] > 0:
                raise ConfigError(f"circuit_run.{key}: must be > 0")
    if "sweep" in b:
        sw = b["sweep"]
        if sw["mode"] not in ("model", "circuit"):
            raise ConfigError(f"sweep.mode: must be 'model' or 'circuit', got {sw['mode']!r}")
        if sw["points"] < 2:
            raise ConfigError("sweep.points: must be >= 2")
        if sw["couplings"] is not None and not sw["couplings"]:
            raise ConfigError("sweep.couplings: must not be empty")
    for block, build in checks:
        try:
            build()
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{block}: {exc}") from exc


def parse_config(data: dict, source: str | None = None) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object")
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version: unsupported {version!r} (this tool reads {SCHEMA_VERSION})")
    kind = data.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"kind: must be one of {', '.join(KINDS)}, got {kind!r}")
    allowed = KIND_BLOCKS[kind]
    extra = sorted(set(data) - {"schema_version", "kind", *allowed})
    if extra:
        raise ConfigError(f"unknown key(s) for kind {kind!r}: {', '.join(repr(k) for k in extra)}")
    blocks = {}
    for name in allowed:
        nullable = {k for (blk, k) in _NULLABLE if blk == name}
        blocks[name] = _merge(name, BLOCK_DEFAULTS[name](), data.get(name, {}), nullable)
    cfg = ExperimentConfig(kind, blocks, version, source)
    _validate(cfg)
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        return parse_config(data, str(path))
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

