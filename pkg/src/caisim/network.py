"""Terrestrial/aerial/satellite network model.

Nodes carry compute capacity, memory, an energy price and a mobility model.
A snapshot at time t freezes node positions, derives the line-of-sight link
set from geometry plus per-domain-pair rules, and precomputes all-pairs
shortest-path latencies. Geometry is a spherical Earth with circular orbits;
positions are Earth-centred Cartesian meters in an Earth-fixed frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .graph import DOMAINS, Violation

R_EARTH = 6_371_000.0            # m
MU_EARTH = 3.986004418e14        # m^3/s^2
C_LIGHT = 299_792_458.0          # m/s

DOMAIN_BIT = {"terrestrial": 1, "aerial": 2, "satellite": 4}

# Slack for the Earth-blocking test so nodes sitting exactly on the sphere
# (ground stations at altitude 0) do not occlude themselves.
_LOS_EPS = 1e-6

Vec3 = tuple[float, float, float]


@dataclass(frozen=True)
class Static:
    """Fixed geodetic position: latitude/longitude degrees, altitude meters."""

    lat: float
    lon: float
    alt: float = 0.0

    def __post_init__(self):
        if self.alt < 0:
            raise ValueError("altitude must be >= 0")


@dataclass(frozen=True)
class CircularOrbit:
    """Circular orbit of given altitude (m), inclination and phase (degrees at t=0)."""

    altitude: float
    inclination: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        if self.altitude <= 0:
            raise ValueError("orbit altitude must be > 0")

    @property
    def period(self) -> float:
        a = R_EARTH + self.altitude
        return 2.0 * math.pi * math.sqrt(a**3 / MU_EARTH)


@dataclass(frozen=True)
class WaypointLoop:
    """Cyclic patrol through geodetic waypoints at constant speed (m/s)."""

    waypoints: tuple[tuple[float, float, float], ...]
    speed: float

    def __post_init__(self):
        object.__setattr__(self, "waypoints", tuple(tuple(w) for w in self.waypoints))
        if not self.waypoints:
            raise ValueError("waypoint list must be non-empty")
        if self.speed <= 0:
            raise ValueError("speed must be > 0")
        for w in self.waypoints:
            if w[2] < 0:
                raise ValueError("waypoint altitude must be >= 0")


MobilityModel = Static | CircularOrbit | WaypointLoop


@dataclass(frozen=True)
class NodeSpec:
    """A compute element somewhere in the continuum.

    ``compute_capacity`` is giga-op/s, ``memory_capacity`` MB and
    ``energy_cost`` joules per giga-op. The domain must be consistent with
    the mobility model: satellites orbit, nothing else does.
    """

    id: str
    domain: str
    compute_capacity: float
    memory_capacity: float = math.inf
    energy_cost: float = 0.0
    mobility: MobilityModel = Static(0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise ValueError(f"node {self.id}: unknown domain {self.domain}")
        if self.compute_capacity <= 0:
            raise ValueError(f"node {self.id}: compute_capacity must be > 0")
        if self.memory_capacity < 0:
            raise ValueError(f"node {self.id}: memory_capacity must be >= 0")
        if self.energy_cost < 0:
            raise ValueError(f"node {self.id}: energy_cost must be >= 0")
        orbiting = isinstance(self.mobility, CircularOrbit)
        if orbiting != (self.domain == "satellite"):
            raise ValueError(
                f"node {self.id}: domain {self.domain} inconsistent with "
                f"mobility {type(self.mobility).__name__}"
            )


@dataclass(frozen=True)
class LinkRule:
    """Connectivity parameters for an unordered domain pair."""

    domain_a: str
    domain_b: str
    bandwidth: float                 # bits/s
    max_range: float | None = None   # meters; None = line of sight only
    per_hop_overhead: float = 0.0    # seconds

    def __post_init__(self):
        for d in (self.domain_a, self.domain_b):
            if d not in DOMAINS:
                raise ValueError(f"link rule: unknown domain {d}")
        if self.bandwidth <= 0:
            raise ValueError("link rule: bandwidth must be > 0")
        if self.max_range is not None and self.max_range <= 0:
            raise ValueError("link rule: max_range must be > 0")
        if self.per_hop_overhead < 0:
            raise ValueError("link rule: per_hop_overhead must be >= 0")


class LinkRuleSet:
    """Lookup of LinkRule by unordered domain pair; pairs without a rule never link."""

    def __init__(self, rules: list[LinkRule] | tuple[LinkRule, ...] = ()):
        self._rules: dict[tuple[str, str], LinkRule] = {}
        for r in rules:
            key = tuple(sorted((r.domain_a, r.domain_b)))
            if key in self._rules:
                raise ValueError(f"duplicate link rule for domains {key}")
            self._rules[key] = r

    def get(self, domain_a: str, domain_b: str) -> LinkRule | None:
        return self._rules.get(tuple(sorted((domain_a, domain_b))))

    def rules(self) -> list[LinkRule]:
        return [self._rules[k] for k in sorted(self._rules)]


def geodetic_to_ecef(lat: float, lon: float, alt: float) -> Vec3:
    """Spherical-Earth geodetic degrees/meters to Earth-centred Cartesian meters."""
    r = R_EARTH + alt
    la = math.radians(lat)
    lo = math.radians(lon)
    return (r * math.cos(la) * math.cos(lo), r * math.cos(la) * math.sin(lo), r * math.sin(la))


def position_at(node: NodeSpec, t: float) -> Vec3:
    """Node position at time t seconds (t >= 0)."""
    return _position(node.mobility, t)


def _position(mob: MobilityModel, t: float) -> Vec3:
    if isinstance(mob, Static):
        return geodetic_to_ecef(mob.lat, mob.lon, mob.alt)
    if isinstance(mob, CircularOrbit):
        a = R_EARTH + mob.altitude
        omega = math.sqrt(MU_EARTH / a**3)
        theta = math.radians(mob.phase) + omega * t
        inc = math.radians(mob.inclination)
        return (
            a * math.cos(theta),
            a * math.sin(theta) * math.cos(inc),
            a * math.sin(theta) * math.sin(inc),
        )
    points = [geodetic_to_ecef(*w) for w in mob.waypoints]
    if len(points) == 1:
        return points[0]
    legs = []
    total = 0.0
    for i, p in enumerate(points):
        q = points[(i + 1) % len(points)]
        d = _dist(p, q)
        legs.append((p, q, d))
        total += d
    if total == 0.0:
        return points[0]
    travelled = math.fmod(mob.speed * t, total)
    for p, q, d in legs:
        if travelled <= d:
            if d == 0.0:
                return p
            f = travelled / d
            return (p[0] + f * (q[0] - p[0]), p[1] + f * (q[1] - p[1]), p[2] + f * (q[2] - p[2]))
        travelled -= d
    return points[0]


def _dist(a: Vec3, b: Vec3) -> float:
    return math.sqrt((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2 + (a[2] - b[2]) ** 2)


def _segment_clears_earth(a: Vec3, b: Vec3) -> bool:
    """True if the straight segment a-b does not cut into the Earth sphere."""
    dx, dy, dz = b[0] - a[0], b[1] - a[1], b[2] - a[2]
    dd = dx * dx + dy * dy + dz * dz
    if dd == 0.0:
        closest = a
    else:
        s = -(a[0] * dx + a[1] * dy + a[2] * dz) / dd
        s = 0.0 if s < 0.0 else (1.0 if s > 1.0 else s)
        closest = (a[0] + s * dx, a[1] + s * dy, a[2] + s * dz)
    return math.sqrt(closest[0] ** 2 + closest[1] ** 2 + closest[2] ** 2) >= R_EARTH - _LOS_EPS


def visible(a: NodeSpec, b: NodeSpec, t: float, rules: LinkRuleSet | None = None) -> bool:
    """Line-of-sight test, plus the domain-pair range limit when one is ruled."""
    pa = position_at(a, t)
    pb = position_at(b, t)
    if not _segment_clears_earth(pa, pb):
        return False
    if rules is not None:
        rule = rules.get(a.domain, b.domain)
        if rule is not None and rule.max_range is not None:
            return _dist(pa, pb) <= rule.max_range
    return True


@dataclass(frozen=True)
class Link:
    a: str
    b: str
    propagation_latency: float
    bandwidth: float
    per_hop_overhead: float


@dataclass
class TopologySnapshot:
    """Frozen view of the network at one instant.

    ``links`` holds one entry per unordered visible pair that has a link
    rule; pairwise latency between any two nodes decomposes into a fixed
    term (propagation plus per-hop overhead along the shortest path) and a
    per-byte term (sum of 8/bandwidth over the path's links), so the path
    choice is payload-independent.
    """

    time: float
    node_ids: tuple[str, ...]
    positions: dict[str, Vec3]
    links: tuple[Link, ...]
    _index: dict[str, int] = field(repr=False, default_factory=dict)
    _base: list[list[float]] = field(repr=False, default_factory=list)
    _perbyte: list[list[float]] = field(repr=False, default_factory=list)
    _next: list[list[int]] = field(repr=False, default_factory=list)
    _transit: list[list[int]] = field(repr=False, default_factory=list)
    _domains: dict[str, str] = field(repr=False, default_factory=dict)

    def link_between(self, a: str, b: str) -> Link | None:
        key = tuple(sorted((a, b)))
        for link in self.links:
            if (link.a, link.b) == key:
                return link
        return None

    def link_pairs(self) -> frozenset[tuple[str, str]]:
        return frozenset((l.a, l.b) for l in self.links)

    def base_latency(self, a: str, b: str) -> float:
        return self._base[self._index[a]][self._index[b]]

    def bytes_coeff(self, a: str, b: str) -> float:
        """Seconds added per payload byte along the canonical path a→b."""
        return self._perbyte[self._index[a]][self._index[b]]

    def pairwise_latency(self, a: str, b: str, payload_bytes: float = 0.0) -> float:
        """Shortest-path latency a→b for the given payload; inf if unreachable."""
        i, j = self._index[a], self._index[b]
        base = self._base[i][j]
        if base == math.inf:
            return math.inf
        return base + payload_bytes * self._perbyte[i][j]

    def path(self, a: str, b: str) -> list[str] | None:
        """Canonical shortest path as node ids, or None if unreachable."""
        i, j = self._index[a], self._index[b]
        if i == j:
            return [a]
        if self._next[i][j] < 0:
            return None
        out = [i]
        while i != j:
            i = self._next[i][j]
            out.append(i)
        return [self.node_ids[k] for k in out]

    def path_links(self, a: str, b: str) -> list[tuple[str, str]] | None:
        nodes = self.path(a, b)
        if nodes is None:
            return None
        return [tuple(sorted((u, v))) for u, v in zip(nodes, nodes[1:])]

    def transit_mask(self, a: str, b: str) -> int:
        """Bitmask of the domains of intermediate nodes on the canonical path a→b."""
        return self._transit[self._index[a]][self._index[b]]

    def transit_domains(self, a: str, b: str) -> set[str]:
        mask = self.transit_mask(a, b)
        return {d for d, bit in DOMAIN_BIT.items() if mask & bit}


def link_latency(a: str, b: str, snap: TopologySnapshot, payload_bytes: float = 0.0) -> float:
    """Latency of the direct link a-b: distance/c + bytes*8/bandwidth + overhead."""
    link = snap.link_between(a, b)
    if link is None:
        raise ValueError(f"nodes {a} and {b} are not adjacent at t={snap.time}")
    return link.propagation_latency + payload_bytes * 8.0 / link.bandwidth + link.per_hop_overhead


def snapshot(nodes: list[NodeSpec] | tuple[NodeSpec, ...], rules: LinkRuleSet, t: float) -> TopologySnapshot:
    """Freeze positions, links and all-pairs shortest-path latencies at time t."""
    ids = [n.id for n in nodes]
    if len(set(ids)) != len(ids):
        raise ValueError("node ids must be unique")
    order = sorted(nodes, key=lambda n: n.id)
    node_ids = tuple(n.id for n in order)
    positions = {n.id: position_at(n, t) for n in order}
    n = len(order)
    index = {nid: i for i, nid in enumerate(node_ids)}

    links: list[Link] = []
    inf = math.inf
    base = [[inf] * n for _ in range(n)]
    perbyte = [[0.0] * n for _ in range(n)]
    nxt = [[-1] * n for _ in range(n)]
    for i in range(n):
        base[i][i] = 0.0
        nxt[i][i] = i
    for i in range(n):
        for j in range(i + 1, n):
            na, nb = order[i], order[j]
            rule = rules.get(na.domain, nb.domain)
            if rule is None or not visible(na, nb, t, rules):
                continue
            dist = _dist(positions[na.id], positions[nb.id])
            prop = dist / C_LIGHT
            links.append(Link(na.id, nb.id, prop, rule.bandwidth, rule.per_hop_overhead))
            cost = prop + rule.per_hop_overhead
            base[i][j] = base[j][i] = cost
            perbyte[i][j] = perbyte[j][i] = 8.0 / rule.bandwidth
            nxt[i][j] = j
            nxt[j][i] = i

    for k in range(n):
        bk = base[k]
        for i in range(n):
            ik = base[i][k]
            if ik == inf:
                continue
            bi = base[i]
            for j in range(n):
                alt = ik + bk[j]
                if alt < bi[j]:
                    bi[j] = alt
                    perbyte[i][j] = perbyte[i][k] + perbyte[k][j]
                    nxt[i][j] = nxt[i][k]

    transit = [[0] * n for _ in range(n)]
    bits = [DOMAIN_BIT[nd.domain] for nd in order]
    for i in range(n):
        for j in range(n):
            if i == j or nxt[i][j] < 0:
                continue
            mask = 0
            k = i
            while k != j:
                k = nxt[k][j]
                if k != j:
                    mask |= bits[k]
            transit[i][j] = mask

    return TopologySnapshot(
        time=t,
        node_ids=node_ids,
        positions=positions,
        links=tuple(links),
        _index=index,
        _base=base,
        _perbyte=perbyte,
        _next=nxt,
        _transit=transit,
        _domains={nd.id: nd.domain for nd in order},
    )


def next_topology_change(
    nodes: list[NodeSpec] | tuple[NodeSpec, ...],
    rules: LinkRuleSet,
    t: float,
    horizon: float,
    step: float,
) -> float | None:
    """Earliest sampled time in (t, horizon] whose link set differs from time t.

    The scan is discrete at resolution ``step``; None when the topology is
    stable over the whole window.
    """
    if step <= 0:
        raise ValueError("step must be > 0")
    if horizon <= t:
        raise ValueError("horizon must be > t")
    baseline = _visible_pairs(nodes, rules, t)
    k = 1
    while True:
        tk = t + k * step
        if tk > horizon + 1e-12:
            return None
        if _visible_pairs(nodes, rules, min(tk, horizon)) != baseline:
            return min(tk, horizon)
        if tk >= horizon:
            return None
        k += 1


def _visible_pairs(nodes, rules: LinkRuleSet, t: float) -> frozenset[tuple[str, str]]:
    order = sorted(nodes, key=lambda n: n.id)
    pairs = set()
    for i, a in enumerate(order):
        for b in order[i + 1 :]:
            if rules.get(a.domain, b.domain) is not None and visible(a, b, t, rules):
                pairs.add((a.id, b.id))
    return frozenset(pairs)


def validate_network(nodes: list[NodeSpec] | tuple[NodeSpec, ...]) -> list[Violation]:
    """Network-level checks that are data errors rather than construction errors."""
    out: list[Violation] = []
    seen: set[str] = set()
    for nd in nodes:
        if nd.id in seen:
            out.append(Violation("DUP_NODE", f"duplicate node id {nd.id}"))
        seen.add(nd.id)
    return out
