import copy
import json
import logging
import math
import os
from dataclasses import dataclass, field, fields
from typing import Any

from .calibration import MarginPolicy
from .config import Config
from .errors import ConfigError
from .geometry import NodeRole, NodeSpec
from .jammer import JammerKind, JammerSpec
from .link import LinkParams


@dataclass(frozen=True)
class SimSettings:
    duration: float
    epoch_length: float = Config.DEFAULT_EPOCH_LENGTH
    attempts_per_epoch: int = Config.DEFAULT_ATTEMPTS_PER_EPOCH
    n_min: int = Config.DEFAULT_N_MIN

    @property
    def n_epochs(self) -> int:
        # tolerate durations that are an exact multiple up to rounding
        return math.floor(self.duration / self.epoch_length + 1e-9)


@dataclass(frozen=True)
class SweepSpec:
    d_min: float = Config.DEFAULT_SWEEP_D_MIN
    d_max: float | None = None
    step: float = Config.DEFAULT_SWEEP_STEP
    n_packets: int = Config.DEFAULT_SWEEP_PACKETS


@dataclass(frozen=True)
class DetectorSettings:
    curve_path: str | None = None
    sweep: SweepSpec | None = field(default_factory=SweepSpec)
    z: float = Config.DEFAULT_Z
    n_runtime: int | None = None
    d_max: float | None = None
    d_source: str = "ranging"

    def margin(self, attempts_per_epoch: int) -> MarginPolicy:
        return MarginPolicy(self.z, self.n_runtime or attempts_per_epoch)


@dataclass(frozen=True)
class ScenarioConfig:
    nodes: tuple[NodeSpec, ...]
    links: tuple[tuple[str, str], ...]
    jammers: tuple[JammerSpec, ...]
    link_params: LinkParams
    sim: SimSettings
    detector: DetectorSettings
    seed: int | None = None

    def node(self, node_id: str) -> NodeSpec:
        for node in self.nodes:
            if node.id == node_id:
                return node
        raise KeyError(node_id)

    @property
    def d_max(self) -> float:
        return self.detector.d_max or self.link_params.d_max


class _Collector:
    def __init__(self) -> None:
        self.errors: list[str] = []

    def add(self, path: str, message: str) -> None:
        self.errors.append(f"{path}: {message}")

    def number(
        self,
        raw: dict[str, Any],
        key: str,
        path: str,
        default: float | None = None,
        *,
        positive: bool = False,
        non_negative: bool = False,
        integer: bool = False,
    ) -> Any:
        value = raw.get(key, default)
        where = f"{path}.{key}" if path else key
        if value is None:
            if default is None and key not in raw:
                self.add(where, "missing required key")
            return default
        if isinstance(value, bool) or not isinstance(value, int | float):
            self.add(where, f"expected a number, got {value!r}")
            return default
        if integer and not float(value).is_integer():
            self.add(where, f"expected an integer, got {value!r}")
            return default
        if not math.isfinite(value):
            self.add(where, "must be finite")
            return default
        if positive and value <= 0:
            self.add(where, f"must be > 0, got {value!r}")
            return default
        if non_negative and value < 0:
            self.add(where, f"must be >= 0, got {value!r}")
            return default
        return int(value) if integer else float(value)


def _position(raw: Any) -> tuple[float, float, float] | None:
    if (
        isinstance(raw, list)
        and len(raw) == 3
        and all(isinstance(c, int | float) and not isinstance(c, bool) for c in raw)
    ):
        return (float(raw[0]), float(raw[1]), float(raw[2]))
    return None


def _parse_node(raw: Any, path: str, t_end: float, col: _Collector) -> NodeSpec | None:
    if not isinstance(raw, dict):
        col.add(path, "expected an object")
        return None
    node_id = raw.get("id")
    if not isinstance(node_id, str) or not node_id:
        col.add(f"{path}.id", "missing required key")
        return None
    try:
        role = NodeRole(raw.get("role", NodeRole.RANGING.value))
    except ValueError:
        col.add(f"{path}.role", f"unknown role {raw.get('role')!r}")
        return None

    if "position" in raw:
        pos = _position(raw["position"])
        if pos is None:
            col.add(f"{path}.position", "expected [x, y, z]")
            return None
        return NodeSpec.stationary(node_id, pos, t_end, role)

    waypoints_raw = raw.get("waypoints")
    if not isinstance(waypoints_raw, list) or not waypoints_raw:
        col.add(f"{path}.waypoints", "missing required key (or give 'position')")
        return None
    waypoints = []
    for i, wp in enumerate(waypoints_raw):
        pos = _position(wp[1]) if isinstance(wp, list) and len(wp) == 2 else None
        if pos is None or isinstance(wp[0], bool) or not isinstance(wp[0], int | float):
            col.add(f"{path}.waypoints[{i}]", "expected [t, [x, y, z]]")
            return None
        waypoints.append((float(wp[0]), pos))
    try:
        node = NodeSpec(node_id, tuple(waypoints), role)
    except ConfigError as err:
        for msg in err.errors:
            col.add(f"{path}.waypoints", msg)
        return None
    if node.t_first > 0 or node.t_last < t_end:
        col.add(
            f"{path}.waypoints",
            f"must cover the simulated span [0, {t_end}], got [{node.t_first}, {node.t_last}]",
        )
        return None
    return node


def _parse_link_params(raw: Any, col: _Collector) -> LinkParams:
    if raw is None:
        return LinkParams()
    if not isinstance(raw, dict):
        col.add("link_params", "expected an object")
        return LinkParams()
    known = {f.name: f for f in fields(LinkParams)}
    values: dict[str, Any] = {}
    for key in raw:
        if key not in known:
            col.add(f"link_params.{key}", "unknown key")
            continue
        integer = key in ("shr_bits", "payload_bits")
        value = col.number(raw, key, "link_params", integer=integer)
        if value is not None:
            values[key] = value
    try:
        return LinkParams(**values)
    except ConfigError as err:
        col.errors.extend(err.errors)
        return LinkParams()


def _parse_jammer(
    raw: Any, path: str, nodes: dict[str, NodeSpec], col: _Collector
) -> JammerSpec | None:
    if not isinstance(raw, dict):
        col.add(path, "expected an object")
        return None
    try:
        kind = JammerKind(raw.get("kind"))
    except ValueError:
        kinds = "/".join(k.value for k in JammerKind)
        col.add(f"{path}.kind", f"expected one of {kinds}, got {raw.get('kind')!r}")
        return None
    node_id = raw.get("node")
    if node_id not in nodes:
        col.add(f"{path}.node", f"unknown node id {node_id!r}")
        return None
    if nodes[node_id].role is not NodeRole.JAMMER_HOST:
        col.add(f"{path}.node", f"node {node_id!r} is not a jammer-host")
        return None

    known = {f.name for f in fields(JammerSpec)} - {"kind", "node", "active_window"}
    values: dict[str, Any] = {}
    for key in raw:
        if key in ("kind", "node", "active_window"):
            continue
        if key not in known:
            col.add(f"{path}.{key}", "unknown key")
            continue
        value = col.number(raw, key, path)
        if value is not None:
            values[key] = value

    window = raw.get("active_window")
    if window is not None:
        ok = (
            isinstance(window, list)
            and len(window) == 2
            and isinstance(window[0], int | float)
            and (window[1] is None or isinstance(window[1], int | float))
        )
        if not ok:
            col.add(f"{path}.active_window", "expected [t_on, t_off or null]")
            return None
        values["active_window"] = (
            float(window[0]),
            math.inf if window[1] is None else float(window[1]),
        )

    try:
        return JammerSpec(kind=kind, node=nodes[node_id], **values)
    except ConfigError as err:
        for msg in err.errors:
            col.add(path, msg)
        return None


def _parse_detector(raw: Any, base_dir: str, col: _Collector) -> DetectorSettings:
    if raw is None:
        return DetectorSettings()
    if not isinstance(raw, dict):
        col.add("detector", "expected an object")
        return DetectorSettings()

    curve_path = raw.get("curve")
    sweep: SweepSpec | None = None
    if curve_path is not None:
        if not isinstance(curve_path, str):
            col.add("detector.curve", "expected a path")
            curve_path = None
        else:
            curve_path = os.path.normpath(os.path.join(base_dir, curve_path))
            if "sweep" in raw:
                col.add("detector", "give either 'curve' or 'sweep', not both")
    else:
        sweep_raw = raw.get("sweep", {})
        if not isinstance(sweep_raw, dict):
            col.add("detector.sweep", "expected an object")
        else:
            sweep = SweepSpec(
                d_min=col.number(
                    sweep_raw, "d_min", "detector.sweep", Config.DEFAULT_SWEEP_D_MIN,
                    non_negative=True,
                ),
                d_max=col.number(sweep_raw, "d_max", "detector.sweep", None, positive=True)
                if "d_max" in sweep_raw
                else None,
                step=col.number(
                    sweep_raw, "step", "detector.sweep", Config.DEFAULT_SWEEP_STEP, positive=True
                ),
                n_packets=col.number(
                    sweep_raw, "n_packets", "detector.sweep", Config.DEFAULT_SWEEP_PACKETS,
                    positive=True, integer=True,
                ),
            )

    d_source = raw.get("d_source", "ranging")
    if d_source not in Config.DISTANCE_SOURCES:
        col.add("detector.d_source", f"expected one of {Config.DISTANCE_SOURCES}, got {d_source!r}")
        d_source = "ranging"

    return DetectorSettings(
        curve_path=curve_path,
        sweep=sweep,
        z=col.number(raw, "z", "detector", Config.DEFAULT_Z, non_negative=True),
        n_runtime=col.number(raw, "n_runtime", "detector", None, positive=True, integer=True)
        if "n_runtime" in raw
        else None,
        d_max=col.number(raw, "d_max", "detector", None, positive=True)
        if "d_max" in raw
        else None,
        d_source=d_source,
    )


def parse_scenario(raw: Any, base_dir: str = ".") -> ScenarioConfig:
    col = _Collector()
    if not isinstance(raw, dict):
        raise ConfigError("scenario: expected a JSON object at top level")

    sim_raw = raw.get("sim")
    if not isinstance(sim_raw, dict):
        col.add("sim", "missing required key")
        sim_raw = {}
    duration = col.number(sim_raw, "duration", "sim", positive=True)
    epoch_length = col.number(
        sim_raw, "epoch_length", "sim", Config.DEFAULT_EPOCH_LENGTH, positive=True
    )
    attempts = col.number(
        sim_raw, "attempts_per_epoch", "sim", Config.DEFAULT_ATTEMPTS_PER_EPOCH,
        positive=True, integer=True,
    )
    n_min = col.number(sim_raw, "n_min", "sim", Config.DEFAULT_N_MIN, positive=True, integer=True)
    if duration is not None and epoch_length is not None and duration < epoch_length:
        col.add("sim.duration", f"must cover at least one epoch ({epoch_length} s)")
    t_end = duration if duration is not None else 1.0

    nodes: dict[str, NodeSpec] = {}
    nodes_raw = raw.get("nodes")
    if not isinstance(nodes_raw, list) or not nodes_raw:
        col.add("nodes", "missing required key")
        nodes_raw = []
    for i, node_raw in enumerate(nodes_raw):
        node = _parse_node(node_raw, f"nodes[{i}]", t_end, col)
        if node is None:
            continue
        if node.id in nodes:
            col.add(f"nodes[{i}].id", f"duplicate node id {node.id!r}")
            continue
        nodes[node.id] = node

    links: list[tuple[str, str]] = []
    links_raw = raw.get("links")
    if not isinstance(links_raw, list) or not links_raw:
        col.add("links", "missing required key")
        links_raw = []
    for i, link_raw in enumerate(links_raw):
        if not (isinstance(link_raw, list) and len(link_raw) == 2):
            col.add(f"links[{i}]", "expected [tx_id, rx_id]")
            continue
        tx, rx = link_raw
        missing = [n for n in (tx, rx) if n not in nodes]
        if missing:
            col.add(f"links[{i}]", f"unknown node id {missing[0]!r}")
            continue
        if tx == rx:
            col.add(f"links[{i}]", "a link needs two distinct nodes")
            continue
        if any(nodes[n].role is not NodeRole.RANGING for n in (tx, rx)):
            col.add(f"links[{i}]", "link endpoints must be ranging nodes")
            continue
        links.append((str(tx), str(rx)))

    jammers = []
    jammers_raw = raw.get("jammers", [])
    if not isinstance(jammers_raw, list):
        col.add("jammers", "expected a list")
        jammers_raw = []
    for i, jammer_raw in enumerate(jammers_raw):
        jammer = _parse_jammer(jammer_raw, f"jammers[{i}]", nodes, col)
        if jammer is not None:
            jammers.append(jammer)

    link_params = _parse_link_params(raw.get("link_params"), col)
    detector = _parse_detector(raw.get("detector"), base_dir, col)

    seed = raw.get("seed")
    if seed is not None and (
        isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64
    ):
        col.add("seed", f"expected an unsigned 64-bit integer, got {seed!r}")
        seed = None

    if col.errors:
        raise ConfigError(col.errors)

    return ScenarioConfig(
        nodes=tuple(nodes.values()),
        links=tuple(links),
        jammers=tuple(jammers),
        link_params=link_params,
        sim=SimSettings(duration, epoch_length, attempts, n_min),
        detector=detector,
        seed=seed,
    )


def read_scenario_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError as err:
        raise ConfigError(f"config: file does not exist: {path}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"config: invalid JSON in {path}: {err}") from err


def load_scenario(path: str) -> ScenarioConfig:
    config = parse_scenario(read_scenario_json(path), os.path.dirname(os.path.abspath(path)))
    logging.info(
        "Loaded scenario %s: %d nodes, %d links, %d jammers, %d epochs",
        path,
        len(config.nodes),
        len(config.links),
        len(config.jammers),
        config.sim.n_epochs,
    )
    return config


def apply_override(raw: dict[str, Any], dotted: str, value: Any) -> dict[str, Any]:
    """Return a copy of a raw scenario with one dotted path (e.g. jammers.0.j50) replaced."""
    updated = copy.deepcopy(raw)
    keys = dotted.split(".")
    target: Any = updated
    for key in keys[:-1]:
        target = target[int(key)] if isinstance(target, list) else target.setdefault(key, {})
    last = keys[-1]
    if isinstance(target, list):
        target[int(last)] = value
    else:
        target[last] = value
    return updated
