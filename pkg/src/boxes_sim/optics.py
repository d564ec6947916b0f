"""Source / beam splitter / two-box path network.

Packets travel along straight legs at the group velocity. Crossing a node
turns the wavevector to the next leg's direction instantaneously; for an
isotropic packet this is a rigid rotation about its center, so free
evolution and turning commute.
"""
from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass, field

from .core import GaussianPacket, PhysicalParams
from .errors import InvalidGeometry, PathMismatch
from .propagators import Direction, propagate_packet_analytic

SOURCE = "S"
SPLITTER = "BS"

_UNITARITY_TOL = 1e-12
_LENGTH_TOL = 1e-9


class Box(enum.Enum):
    B1 = "B1"
    B2 = "B2"

    @classmethod
    def parse(cls, text) -> Box:
        if isinstance(text, cls):
            return text
        try:
            return cls(str(text).upper())
        except ValueError:
            raise ValueError(f"unknown box {text!r}; expected b1 or b2") from None

    @property
    def other(self) -> Box:
        return Box.B2 if self is Box.B1 else Box.B1


@dataclass(frozen=True)
class SplitterSpec:
    t_amp: complex = 1 / math.sqrt(2)
    r_amp: complex = 1j / math.sqrt(2)

    def __post_init__(self):
        object.__setattr__(self, "t_amp", complex(self.t_amp))
        object.__setattr__(self, "r_amp", complex(self.r_amp))
        total = abs(self.t_amp) ** 2 + abs(self.r_amp) ** 2
        if abs(total - 1.0) > _UNITARITY_TOL:
            raise ValueError(f"|t|^2 + |r|^2 must equal 1, got {total!r}")

    def amplitude_to(self, box: Box) -> complex:
        return self.t_amp if box is Box.B1 else self.r_amp

    def weight_to(self, box: Box) -> float:
        return abs(self.amplitude_to(box)) ** 2


@dataclass(frozen=True)
class PathNetwork:
    """Node positions plus a common travel speed.

    B1 must lie straight ahead of the source-to-splitter leg (transmission
    keeps the wavevector) and both boxes must be the same path length from
    the source.
    """

    nodes: dict = field(default_factory=dict)
    speed: float = 0.4

    def __post_init__(self):
        missing = {SOURCE, SPLITTER, "B1", "B2"} - set(self.nodes)
        if missing:
            raise InvalidGeometry(f"missing nodes: {sorted(missing)}")
        nodes = {k: (float(v[0]), float(v[1])) for k, v in self.nodes.items()}
        object.__setattr__(self, "nodes", nodes)
        if not self.speed > 0:
            raise InvalidGeometry(f"speed must be positive, got {self.speed}")
        for a, b in self.edges:
            if self.length(a, b) <= 0:
                raise InvalidGeometry(f"edge {a}->{b} has zero length")
        l1 = self.path_length((SOURCE, SPLITTER, "B1"))
        l2 = self.path_length((SOURCE, SPLITTER, "B2"))
        if abs(l1 - l2) > _LENGTH_TOL * max(l1, l2):
            raise InvalidGeometry(
                f"unequal path lengths S->BS->B1 = {l1:.9g}, S->BS->B2 = {l2:.9g}; "
                "both boxes must be reached at the same time"
            )
        u_in = self.direction(SOURCE, SPLITTER)
        u_t = self.direction(SPLITTER, "B1")
        if abs(u_in[0] * u_t[1] - u_in[1] * u_t[0]) > 1e-12 or u_in[0] * u_t[0] + u_in[1] * u_t[1] < 0:
            raise InvalidGeometry("B1 must lie straight ahead of the S->BS leg")

    @property
    def edges(self) -> tuple[tuple[str, str], ...]:
        return ((SOURCE, SPLITTER), (SPLITTER, "B1"), (SPLITTER, "B2"))

    def length(self, a: str, b: str) -> float:
        (xa, ya), (xb, yb) = self.nodes[a], self.nodes[b]
        return math.hypot(xb - xa, yb - ya)

    def direction(self, a: str, b: str) -> tuple[float, float]:
        (xa, ya), (xb, yb) = self.nodes[a], self.nodes[b]
        n = math.hypot(xb - xa, yb - ya)
        return ((xb - xa) / n, (yb - ya) / n)

    def path_length(self, path) -> float:
        return sum(self.length(a, b) for a, b in zip(path, path[1:]))

    def node_times(self, path) -> list[float]:
        times = [0.0]
        for a, b in zip(path, path[1:]):
            times.append(times[-1] + self.length(a, b) / self.speed)
        return times

    @property
    def splitter_time(self) -> float:
        return self.length(SOURCE, SPLITTER) / self.speed

    @property
    def arrival_time(self) -> float:
        return self.path_length((SOURCE, SPLITTER, "B1")) / self.speed

    def route(self, box: Box) -> tuple[str, str, str]:
        return (SOURCE, SPLITTER, box.value)

    def bounding_box(self):
        xs = [p[0] for p in self.nodes.values()]
        ys = [p[1] for p in self.nodes.values()]
        return (min(xs), min(ys)), (max(xs), max(ys))


@dataclass(frozen=True)
class Branch:
    path: tuple
    amplitude: complex
    packet: GaussianPacket

    def __post_init__(self):
        object.__setattr__(self, "path", tuple(self.path))
        if not self.path or self.path[0] != SOURCE:
            raise PathMismatch(f"branch path must start at {SOURCE}, got {self.path}")
        if abs(self.amplitude) > 1.0 + 1e-12:
            raise ValueError(f"branch amplitude magnitude exceeds 1: {self.amplitude}")

    @property
    def weight(self) -> float:
        return abs(self.amplitude) ** 2


def default_geometry(params: PhysicalParams) -> PathNetwork:
    return PathNetwork(
        nodes={SOURCE: (0.0, 0.0), SPLITTER: (800.0, 0.0), "B1": (1600.0, 0.0), "B2": (800.0, 800.0)},
        speed=params.speed,
    )


def source_packet(network: PathNetwork, params: PhysicalParams) -> GaussianPacket:
    return GaussianPacket.from_params(
        params, center=network.nodes[SOURCE], direction=network.direction(SOURCE, SPLITTER)
    )


def detector_packet(network: PathNetwork, params: PhysicalParams, box: Box, template=None) -> GaussianPacket:
    """Detector eigenstate at ``box``, momentum-matched to the incoming leg."""
    template = template or GaussianPacket.from_params(params)
    p = GaussianPacket(
        center=network.nodes[box.value],
        sigma=template.sigma,
        wavevector=template.wavevector,
        chirp=template.chirp,
        global_phase=template.global_phase,
        t_ref=network.arrival_time,
    )
    return p.with_direction(network.direction(SPLITTER, box.value))


def packet_on_path(network: PathNetwork, path, packet: GaussianPacket, t: float, params: PhysicalParams):
    """Carry ``packet`` along ``path`` from its own time to ``t``.

    At a node instant the packet already points along the outgoing leg.
    Works in both time directions, so it also carries advanced final
    conditions back toward the source.
    """
    path = tuple(path)
    times = network.node_times(path)
    turns = times[1:-1]
    cur, cur_t = packet, packet.t_ref
    if t >= cur_t:
        for i, b in enumerate(turns, start=1):
            if cur_t < b <= t:
                cur = propagate_packet_analytic(cur, b - cur_t, params, Direction.RETARDED)
                cur = cur.with_direction(network.direction(path[i], path[i + 1]))
                cur_t = b
        return propagate_packet_analytic(cur, t - cur_t, params, Direction.RETARDED)
    for i in range(len(turns), 0, -1):
        b = turns[i - 1]
        if t < b <= cur_t:
            cur = propagate_packet_analytic(cur, cur_t - b, params, Direction.ADVANCED)
            cur = cur.with_direction(network.direction(path[i - 1], path[i]))
            cur_t = b
    return propagate_packet_analytic(cur, cur_t - t, params, Direction.ADVANCED)


def leg_at(network: PathNetwork, path, t: float) -> tuple[str, str]:
    path = tuple(path)
    turns = network.node_times(path)[1:-1]
    i = bisect.bisect_right(turns, t)
    return (path[i], path[i + 1])


def split_cf(branch: Branch, spec: SplitterSpec, network: PathNetwork | None = None):
    """Split a branch sitting at the splitter into (transmitted, reflected).

    Without a network the reflected wavevector is the incoming one turned by
    +90 degrees.
    """
    if branch.path[-1] != SPLITTER:
        raise PathMismatch(f"branch must end at {SPLITTER} to split, got path {branch.path}")
    p = branch.packet
    if network is None:
        kx, ky = p.wavevector
        reflected_dir = (-ky, kx)
    else:
        reflected_dir = network.direction(SPLITTER, "B2")
    transmitted = Branch(branch.path + ("B1",), branch.amplitude * spec.t_amp, p)
    reflected = Branch(branch.path + ("B2",), branch.amplitude * spec.r_amp, p.with_direction(reflected_dir))
    return transmitted, reflected


def route_tsf(network: PathNetwork, final_box, params: PhysicalParams | None = None) -> Branch:
    """The single realized path for a given final condition, unit amplitude.

    Without ``params`` the packet uses hbar = m = 1 and |k| = network speed.
    """
    box = Box.parse(final_box)
    params = params or PhysicalParams(kx=network.speed)
    return Branch(network.route(box), 1.0 + 0j, source_packet(network, params))


def cf_branches(network: PathNetwork, spec: SplitterSpec, params: PhysicalParams) -> tuple[Branch, Branch]:
    """Both CF branches, packets still referenced to emission at t=0."""
    src = Branch((SOURCE, SPLITTER), 1.0 + 0j, source_packet(network, params))
    t_b, r_b = split_cf(src, spec, network)
    # Store the packet at emission; packet_on_path applies the turn at BS.
    return Branch(t_b.path, t_b.amplitude, src.packet), Branch(r_b.path, r_b.amplitude, src.packet)
