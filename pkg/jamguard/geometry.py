import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np
import numpy.typing as npt

from .errors import ConfigError, OutOfRangeError

Position = tuple[float, float, float]
Waypoint = tuple[float, Position]


class NodeRole(Enum):
    RANGING = "ranging-node"
    JAMMER_HOST = "jammer-host"


@dataclass(frozen=True)
class NodeSpec:
    id: str
    waypoints: tuple[Waypoint, ...]
    role: NodeRole = NodeRole.RANGING

    def __post_init__(self) -> None:
        if not self.waypoints:
            raise ConfigError(f"node '{self.id}' needs at least one waypoint")
        times = [t for t, _ in self.waypoints]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigError(f"node '{self.id}' waypoint times must be strictly increasing")
        for t, pos in self.waypoints:
            if len(pos) != 3 or not all(math.isfinite(c) for c in (t, *pos)):
                raise ConfigError(f"node '{self.id}' has a non-finite waypoint at t={t}")

    @classmethod
    def stationary(
        cls,
        node_id: str,
        position: Position,
        t_end: float,
        role: NodeRole = NodeRole.RANGING,
    ) -> "NodeSpec":
        return cls(node_id, ((0.0, position), (t_end, position)), role)

    @cached_property
    def times(self) -> npt.NDArray[np.float64]:
        return np.array([t for t, _ in self.waypoints], dtype=float)

    @cached_property
    def coords(self) -> npt.NDArray[np.float64]:
        return np.array([pos for _, pos in self.waypoints], dtype=float)

    @property
    def t_first(self) -> float:
        return self.waypoints[0][0]

    @property
    def t_last(self) -> float:
        return self.waypoints[-1][0]


def position_at(node: NodeSpec, t: float) -> Position:
    if not node.t_first <= t <= node.t_last:
        raise OutOfRangeError(
            f"t={t} outside waypoint span [{node.t_first}, {node.t_last}] of node '{node.id}'"
        )
    x, y, z = (float(np.interp(t, node.times, node.coords[:, axis])) for axis in range(3))
    return (x, y, z)


def distance(a: Position, b: Position) -> float:
    return math.dist(a, b)


def positions_at(node: NodeSpec, times: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    if times.size and (times.min() < node.t_first or times.max() > node.t_last):
        raise OutOfRangeError(
            f"times [{times.min()}, {times.max()}] outside waypoint span "
            f"[{node.t_first}, {node.t_last}] of node '{node.id}'"
        )
    return np.column_stack(
        [np.interp(times, node.times, node.coords[:, axis]) for axis in range(3)]
    )
