"""Model and scenario file handling.

Both file kinds are TOML (SI units only: m, kg, N, rad; any key suffixed
``_deg``/``_degrees`` is rejected at parse time). The exact grammar is
documented in the repository README; ``format_version`` must be 1.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .chain import ChainModel, build_chain
from .errors import ConfigError, ParseError
from .pcc import ArcParams
from .screws import Pose, quaternion_to_rotation
from .solvers import SolverParams

FORMAT_VERSION = 1

_MODEL_GEOMETRY_KEYS = {
    "segments", "beads_per_segment", "bead_height", "bead_width",
    "bead_mass", "first_joint_axis", "inertia_diag",
}
_MODEL_STIFFNESS_KEYS = {"joint", "per_joint", "damping"}
_TENDON_KEYS = {"id", "segment", "offset", "extensibility", "rest_length"}
_SCENARIO_KEYS = {
    "format_version", "mode", "tensions", "lengths", "arcs",
    "external_wrench", "solver", "reference",
}
_SOLVER_KEYS = {
    "alpha", "tol_torque", "tol_length", "max_iters", "kernel_c",
    "pinv_rcond", "exact_tendon_jacobian", "paper_kernel_jacobian",
}


@dataclass(frozen=True)
class TendonRow:
    id: int
    segment: int
    offset: np.ndarray
    extensibility: float = 0.0
    rest_length: Optional[float] = None


@dataclass(frozen=True)
class ModelConfig:
    """Validated model description, all defaults resolved."""

    n_segments: int
    beads_per_segment: int
    bead_height: float
    bead_width: float
    bead_mass: float
    first_axis: str
    gravity: np.ndarray
    stiffness: object  # float (uniform) or per-joint array
    damping: object = 0.0
    inertia_diag: Optional[np.ndarray] = None
    tendons: tuple[TendonRow, ...] = field(default_factory=tuple)

    def stiffness_per_joint(self, n: int) -> np.ndarray:
        return self._spread("stiffness", self.stiffness, n)

    def damping_per_joint(self, n: int) -> np.ndarray:
        return self._spread("stiffness.damping", self.damping, n)

    @staticmethod
    def _spread(name: str, value, n: int) -> np.ndarray:
        arr = np.asarray(value, dtype=float).reshape(-1)
        if arr.size == 1:
            return np.full(n, float(arr[0]))
        if arr.size != n:
            raise ConfigError(name, f"needs 1 or {n} entries, got {arr.size}")
        return arr


def _reject_degree_keys(obj, path: str = "") -> None:
    if isinstance(obj, dict):
        for key, value in obj.items():
            where = f"{path}.{key}" if path else key
            if key.endswith("_deg") or key.endswith("_degrees"):
                raise ConfigError(where, "degrees are not accepted; use radians (SI units only)")
            _reject_degree_keys(value, where)
    elif isinstance(obj, list):
        for k, value in enumerate(obj):
            _reject_degree_keys(value, f"{path}[{k}]")


def _require(table: dict, key: str, path: str):
    if key not in table:
        raise ConfigError(f"{path}.{key}", "required field is missing")
    return table[key]


def _check_unknown(table: dict, allowed: set, path: str) -> None:
    for key in table:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}", "unknown field")


def _positive(value, path: str) -> float:
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ConfigError(path, f"expected a number, got {value!r}") from None
    if not out > 0.0 or not math.isfinite(out):
        raise ConfigError(path, f"must be a positive finite number, got {out}")
    return out


def _load_toml(path) -> dict:
    raw = Path(path).read_bytes()
    try:
        data = tomllib.loads(raw.decode("utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    _reject_degree_keys(data)
    return data


def _check_format_version(data: dict, path: str) -> None:
    version = _require(data, "format_version", path)
    if version != FORMAT_VERSION:
        raise ConfigError(f"{path}.format_version",
                          f"unsupported version {version!r}, expected {FORMAT_VERSION}")


def model_config_from_dict(data: dict) -> ModelConfig:
    _check_format_version(data, "model")
    _check_unknown(data, {"format_version", "geometry", "stiffness", "gravity", "tendons"},
                   "model")
    geometry = _require(data, "geometry", "model")
    _check_unknown(geometry, _MODEL_GEOMETRY_KEYS, "geometry")
    stiffness_tbl = _require(data, "stiffness", "model")
    _check_unknown(stiffness_tbl, _MODEL_STIFFNESS_KEYS, "stiffness")
    gravity_tbl = _require(data, "gravity", "model")
    _check_unknown(gravity_tbl, {"vector"}, "gravity")

    n_segments = int(_require(geometry, "segments", "geometry"))
    beads_per_segment = int(_require(geometry, "beads_per_segment", "geometry"))
    if n_segments < 1 or beads_per_segment < 1:
        raise ConfigError("geometry", "segments and beads_per_segment must be >= 1")

    inertia_diag = None
    if "inertia_diag" in geometry:
        inertia_diag = np.asarray(geometry["inertia_diag"], dtype=float)
        if inertia_diag.shape != (3,):
            raise ConfigError("geometry.inertia_diag", "needs exactly 3 entries")
        if np.any(inertia_diag <= 0.0):
            raise ConfigError("geometry.inertia_diag", "entries must be positive")

    if "joint" in stiffness_tbl and "per_joint" in stiffness_tbl:
        raise ConfigError("stiffness", "give either 'joint' or 'per_joint', not both")
    if "per_joint" in stiffness_tbl:
        stiffness = np.asarray(stiffness_tbl["per_joint"], dtype=float)
        if np.any(stiffness < 0.0):
            raise ConfigError("stiffness.per_joint", "entries must be >= 0")
    elif "joint" in stiffness_tbl:
        stiffness = float(stiffness_tbl["joint"])
        if stiffness < 0.0:
            raise ConfigError("stiffness.joint", "must be >= 0")
    else:
        raise ConfigError("stiffness.joint", "required field is missing")

    gravity = np.asarray(_require(gravity_tbl, "vector", "gravity"), dtype=float)
    if gravity.shape != (3,):
        raise ConfigError("gravity.vector", "needs exactly 3 entries")

    rows = []
    seen_ids = set()
    for k, row in enumerate(data.get("tendons", [])):
        where = f"tendons[{k}]"
        _check_unknown(row, _TENDON_KEYS, where)
        tid = int(_require(row, "id", where))
        if tid in seen_ids:
            raise ConfigError(f"{where}.id", f"duplicate tendon id {tid}")
        seen_ids.add(tid)
        segment = int(_require(row, "segment", where))
        if not 1 <= segment <= n_segments:
            raise ConfigError(f"{where}.segment", f"must be in 1..{n_segments}, got {segment}")
        offset = np.asarray(_require(row, "offset", where), dtype=float)
        if offset.shape != (3,):
            raise ConfigError(f"{where}.offset", "needs exactly 3 entries")
        ext = float(row.get("extensibility", 0.0))
        if ext < 0.0:
            raise ConfigError(f"{where}.extensibility", "must be >= 0")
        rest = row.get("rest_length")
        if rest is not None:
            rest = _positive(rest, f"{where}.rest_length")
        rows.append(TendonRow(id=tid, segment=segment, offset=offset,
                              extensibility=ext, rest_length=rest))

    return ModelConfig(
        n_segments=n_segments,
        beads_per_segment=beads_per_segment,
        bead_height=_positive(_require(geometry, "bead_height", "geometry"), "geometry.bead_height"),
        bead_width=_positive(_require(geometry, "bead_width", "geometry"), "geometry.bead_width"),
        bead_mass=_positive(_require(geometry, "bead_mass", "geometry"), "geometry.bead_mass"),
        first_axis=str(geometry.get("first_joint_axis", "x")),
        gravity=gravity,
        stiffness=stiffness,
        damping=float(stiffness_tbl.get("damping", 0.0)),
        inertia_diag=inertia_diag,
        tendons=tuple(rows),
    )


def load_model_config(path) -> ModelConfig:
    return model_config_from_dict(_load_toml(path))


def load_model(path) -> ChainModel:
    """Parse, validate and realize a model file."""
    return build_chain(load_model_config(path))


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, str):
        return f'"{value}"'
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in np.asarray(value).tolist()) + "]"
    raise TypeError(f"cannot format {value!r}")


def dump_model_config(config: ModelConfig) -> str:
    """Normalized TOML dump; re-parsing it reproduces the config exactly."""
    lines = [f"format_version = {FORMAT_VERSION}", "", "[geometry]"]
    lines.append(f"segments = {config.n_segments}")
    lines.append(f"beads_per_segment = {config.beads_per_segment}")
    lines.append(f"bead_height = {_fmt(config.bead_height)}")
    lines.append(f"bead_width = {_fmt(config.bead_width)}")
    lines.append(f"bead_mass = {_fmt(config.bead_mass)}")
    lines.append(f"first_joint_axis = {_fmt(config.first_axis)}")
    if config.inertia_diag is not None:
        lines.append(f"inertia_diag = {_fmt(config.inertia_diag)}")
    lines += ["", "[stiffness]"]
    stiffness = np.asarray(config.stiffness, dtype=float).reshape(-1)
    if stiffness.size == 1:
        lines.append(f"joint = {_fmt(float(stiffness[0]))}")
    else:
        lines.append(f"per_joint = {_fmt(stiffness)}")
    lines.append(f"damping = {_fmt(float(np.asarray(config.damping).reshape(-1)[0]))}")
    lines += ["", "[gravity]", f"vector = {_fmt(config.gravity)}"]
    for row in config.tendons:
        lines += ["", "[[tendons]]"]
        lines.append(f"id = {row.id}")
        lines.append(f"segment = {row.segment}")
        lines.append(f"offset = {_fmt(row.offset)}")
        lines.append(f"extensibility = {_fmt(row.extensibility)}")
        if row.rest_length is not None:
            lines.append(f"rest_length = {_fmt(row.rest_length)}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Scenario:
    """One solver run: mode, its input vector, and solver settings."""

    mode: str  # "fst" | "fsl" | "pcc"
    tensions: Optional[np.ndarray] = None
    lengths: Optional[np.ndarray] = None
    arcs: Optional[tuple[ArcParams, ...]] = None
    external_wrench: Optional[np.ndarray] = None
    params: SolverParams = field(default_factory=SolverParams)
    reference: Optional[Pose] = None


def scenario_from_dict(data: dict, model: ChainModel) -> Scenario:
    _check_format_version(data, "scenario")
    _check_unknown(data, _SCENARIO_KEYS, "scenario")
    mode = _require(data, "mode", "scenario")
    if mode not in ("fst", "fsl", "pcc"):
        raise ConfigError("scenario.mode", f"must be fst, fsl or pcc, got {mode!r}")

    solver_tbl = data.get("solver", {})
    _check_unknown(solver_tbl, _SOLVER_KEYS, "solver")
    try:
        params = SolverParams(**solver_tbl)
    except (TypeError, ValueError) as exc:
        raise ConfigError("solver", str(exc)) from exc

    tensions = lengths = arcs = None
    if mode == "fst":
        tensions = np.asarray(_require(data, "tensions", "scenario"), dtype=float)
        if tensions.shape != (model.n_tendons,):
            raise ConfigError("scenario.tensions",
                              f"needs {model.n_tendons} entries, got {tensions.size}")
        if np.any(tensions < 0.0):
            raise ConfigError("scenario.tensions", "entries must be >= 0 (cables pull only)")
    elif mode == "fsl":
        lengths = np.asarray(_require(data, "lengths", "scenario"), dtype=float)
        if lengths.shape != (model.n_tendons,):
            raise ConfigError("scenario.lengths",
                              f"needs {model.n_tendons} entries, got {lengths.size}")
        if np.any(lengths <= 0.0):
            raise ConfigError("scenario.lengths", "entries must be positive")
    else:
        arc_rows = _require(data, "arcs", "scenario")
        if len(arc_rows) != model.n_segments:
            raise ConfigError("scenario.arcs",
                              f"needs {model.n_segments} rows, got {len(arc_rows)}")
        built = []
        for k, row in enumerate(arc_rows):
            _check_unknown(row, {"curvature", "plane_angle", "arc_length"}, f"arcs[{k}]")
            try:
                built.append(ArcParams(
                    curvature=float(_require(row, "curvature", f"arcs[{k}]")),
                    plane_angle=float(row.get("plane_angle", 0.0)),
                    arc_length=float(_require(row, "arc_length", f"arcs[{k}]")),
                ))
            except ValueError as exc:
                raise ConfigError(f"arcs[{k}]", str(exc)) from exc
        arcs = tuple(built)

    wrench = None
    if "external_wrench" in data:
        wrench = np.asarray(data["external_wrench"], dtype=float)
        if wrench.shape != (6,):
            raise ConfigError("scenario.external_wrench", "needs exactly 6 entries")

    reference = None
    if "reference" in data:
        ref = data["reference"]
        _check_unknown(ref, {"position", "quaternion"}, "reference")
        position = np.asarray(_require(ref, "position", "reference"), dtype=float)
        quaternion = np.asarray(_require(ref, "quaternion", "reference"), dtype=float)
        if position.shape != (3,):
            raise ConfigError("reference.position", "needs exactly 3 entries")
        try:
            rotation = quaternion_to_rotation(quaternion)
        except ValueError as exc:
            raise ConfigError("reference.quaternion", str(exc)) from exc
        reference = Pose(rotation, position)

    return Scenario(mode=mode, tensions=tensions, lengths=lengths, arcs=arcs,
                    external_wrench=wrench, params=params, reference=reference)


def load_scenario(path, model: ChainModel) -> Scenario:
    return scenario_from_dict(_load_toml(path), model)


def two_segment_platform_path() -> Path:
    """Location of the bundled two-segment platform model file."""
    return Path(__file__).parent / "models" / "two_segment_platform.toml"


def two_segment_platform(stiffness: Optional[float] = None,
                   extensibility: Optional[float] = None,
                   gravity=None,
                   stiffness_per_joint=None) -> ChainModel:
    """Bundled 2x16-bead platform, optionally overriding the placeholder
    stiffness, the tendon extensibility, or the gravity vector."""
    config = load_model_config(two_segment_platform_path())
    changes = {}
    if stiffness is not None:
        changes["stiffness"] = float(stiffness)
    if stiffness_per_joint is not None:
        changes["stiffness"] = np.asarray(stiffness_per_joint, dtype=float)
    if gravity is not None:
        changes["gravity"] = np.asarray(gravity, dtype=float)
    if extensibility is not None:
        changes["tendons"] = tuple(
            TendonRow(id=t.id, segment=t.segment, offset=t.offset,
                      extensibility=float(extensibility), rest_length=t.rest_length)
            for t in config.tendons
        )
    if changes:
        from dataclasses import replace
        config = replace(config, **changes)
    return build_chain(config)
