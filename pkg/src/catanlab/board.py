"""Hex board topology, seeded map generation and road-graph utilities.

Hexes use axial ``(q, r)`` coordinates.  A node (intersection) is identified
by the sorted triple of the three hexes that meet there, including off-map
hexes; node ids are the positions of those triples in sorted order, so they
are stable for a given template.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from functools import lru_cache
from typing import Iterable, Mapping

Hex = tuple[int, int]
Edge = tuple[int, int]

AXIAL_DIRECTIONS: tuple[Hex, ...] = ((1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1))


class Resource(IntEnum):
    WOOD = 0
    BRICK = 1
    SHEEP = 2
    WHEAT = 3
    ORE = 4
    DESERT = 5


RESOURCES: tuple[Resource, ...] = (
    Resource.WOOD,
    Resource.BRICK,
    Resource.SHEEP,
    Resource.WHEAT,
    Resource.ORE,
)


class MapTemplate(str, Enum):
    FULL = "FULL"
    MINI = "MINI"


class PortKind(str, Enum):
    GENERIC = "3:1"
    WOOD = "WOOD"
    BRICK = "BRICK"
    SHEEP = "SHEEP"
    WHEAT = "WHEAT"
    ORE = "ORE"

    @property
    def resource(self) -> Resource | None:
        if self is PortKind.GENERIC:
            return None
        return Resource[self.name]


class BoardError(ValueError):
    """Raised for queries about nodes or edges that are not on the board."""


@dataclass(frozen=True)
class TileSpec:
    resource: Resource
    token: int | None = None

    def __post_init__(self):
        if (self.resource is Resource.DESERT) != (self.token is None):
            raise ValueError("token is absent iff the tile is a desert")
        if self.token is not None and (self.token < 2 or self.token > 12 or self.token == 7):
            raise ValueError(f"invalid number token {self.token}")


def token_probability(token: int | None) -> float:
    """Probability that two dice sum to ``token``."""
    if token is None:
        return 0.0
    return (6 - abs(7 - token)) / 36


def _hex_add(a: Hex, b: Hex) -> Hex:
    return (a[0] + b[0], a[1] + b[1])


def _hex_center(h: Hex) -> tuple[float, float]:
    q, r = h
    return (math.sqrt(3) * (q + r / 2), 1.5 * r)


class Topology:
    """Node/edge graph of a map template (no resources, no tokens)."""

    def __init__(self, template: MapTemplate):
        radius = 2 if template is MapTemplate.FULL else 1
        self.template = template
        self.hexes: tuple[Hex, ...] = tuple(
            sorted(
                (q, r)
                for q in range(-radius, radius + 1)
                for r in range(-radius, radius + 1)
                if abs(q + r) <= radius
            )
        )
        on_board = set(self.hexes)

        corners: dict[Hex, list[tuple[Hex, Hex, Hex]]] = {}
        triples = set()
        for h in self.hexes:
            ring = []
            for i in range(6):
                a = _hex_add(h, AXIAL_DIRECTIONS[i])
                b = _hex_add(h, AXIAL_DIRECTIONS[(i + 1) % 6])
                triple = tuple(sorted((h, a, b)))
                ring.append(triple)
                triples.add(triple)
            corners[h] = ring

        self.node_triples: tuple[tuple[Hex, Hex, Hex], ...] = tuple(sorted(triples))
        node_id = {t: i for i, t in enumerate(self.node_triples)}
        self.nodes: tuple[int, ...] = tuple(range(len(self.node_triples)))

        edge_set = set()
        self.hex_nodes: dict[Hex, tuple[int, ...]] = {}
        for h in self.hexes:
            ring = [node_id[t] for t in corners[h]]
            self.hex_nodes[h] = tuple(ring)
            for i in range(6):
                a, b = ring[i], ring[(i + 1) % 6]
                edge_set.add((min(a, b), max(a, b)))
        self.edges: tuple[Edge, ...] = tuple(sorted(edge_set))
        self.edge_index: dict[Edge, int] = {e: i for i, e in enumerate(self.edges)}

        neighbors: list[list[int]] = [[] for _ in self.nodes]
        node_edges: list[list[int]] = [[] for _ in self.nodes]
        for i, (a, b) in enumerate(self.edges):
            neighbors[a].append(b)
            neighbors[b].append(a)
            node_edges[a].append(i)
            node_edges[b].append(i)
        self.node_neighbors = tuple(tuple(sorted(n)) for n in neighbors)
        self.node_edges = tuple(tuple(sorted(e)) for e in node_edges)
        self.node_hexes: tuple[tuple[Hex, ...], ...] = tuple(
            tuple(sorted(h for h in t if h in on_board)) for t in self.node_triples
        )

        # Coastal edges sorted by angle around the map centre, for port placement.
        def position(n: int) -> tuple[float, float]:
            pts = [_hex_center(h) for h in self.node_triples[n]]
            return (sum(p[0] for p in pts) / 3, sum(p[1] for p in pts) / 3)

        coastal = []
        for e in self.edges:
            shared = set(self.node_triples[e[0]]) & set(self.node_triples[e[1]])
            if sum(h in on_board for h in shared) == 1:
                (ax, ay), (bx, by) = position(e[0]), position(e[1])
                angle = math.atan2((ay + by) / 2, (ax + bx) / 2)
                coastal.append((round(angle, 9), e))
        self.coastal_edges: tuple[Edge, ...] = tuple(e for _, e in sorted(coastal))


@lru_cache(maxsize=None)
def topology(template: MapTemplate) -> Topology:
    return Topology(MapTemplate(template))


@dataclass(frozen=True)
class Board:
    template: MapTemplate
    tiles: Mapping[Hex, TileSpec]
    ports: Mapping[int, PortKind]
    robber_tile: Hex
    seed: int = 0
    topo: Topology = field(repr=False, compare=False, default=None)

    @property
    def nodes(self) -> tuple[int, ...]:
        return self.topo.nodes

    @property
    def edges(self) -> tuple[Edge, ...]:
        return self.topo.edges

    def __hash__(self):
        return hash((self.template, self.seed, self.robber_tile))

    def to_dict(self) -> dict:
        return {
            "template": self.template.value,
            "seed": self.seed,
            "tiles": {
                f"{q},{r}": {
                    "resource": spec.resource.name,
                    "token": spec.token,
                }
                for (q, r), spec in self.tiles.items()
            },
            "nodes": list(self.topo.nodes),
            "edges": [list(e) for e in self.topo.edges],
            "ports": {str(n): kind.value for n, kind in self.ports.items()},
            "robber": list(self.robber_tile),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# Coastal edge positions (out of 30 around the full map) that carry a port.
_FULL_PORT_SLOTS = (0, 3, 7, 10, 13, 17, 20, 23, 27)
_FULL_RESOURCES = (
    [Resource.WOOD] * 4
    + [Resource.SHEEP] * 4
    + [Resource.WHEAT] * 4
    + [Resource.BRICK] * 3
    + [Resource.ORE] * 3
    + [Resource.DESERT]
)
_FULL_TOKENS = [2, 3, 3, 4, 4, 5, 5, 6, 6, 8, 8, 9, 9, 10, 10, 11, 11, 12]
_FULL_PORTS = [PortKind.GENERIC] * 4 + [
    PortKind.WOOD,
    PortKind.BRICK,
    PortKind.SHEEP,
    PortKind.WHEAT,
    PortKind.ORE,
]
_MINI_RING = [
    Resource.WOOD,
    Resource.WOOD,
    Resource.BRICK,
    Resource.SHEEP,
    Resource.WHEAT,
    Resource.ORE,
]
_MINI_TOKENS = [3, 4, 5, 6, 8, 9]


def generate_board(template: MapTemplate, seed: int) -> Board:
    """Build a board whose layout is a pure function of ``(template, seed)``."""
    template = MapTemplate(template)
    topo = topology(template)
    rng = random.Random(seed)
    tiles: dict[Hex, TileSpec] = {}
    ports: dict[int, PortKind] = {}

    if template is MapTemplate.FULL:
        resources = list(_FULL_RESOURCES)
        tokens = list(_FULL_TOKENS)
        rng.shuffle(resources)
        rng.shuffle(tokens)
        token_iter = iter(tokens)
        for h, res in zip(topo.hexes, resources):
            tiles[h] = TileSpec(res, None if res is Resource.DESERT else next(token_iter))
        kinds = list(_FULL_PORTS)
        rng.shuffle(kinds)
        for slot, kind in zip(_FULL_PORT_SLOTS, kinds):
            a, b = topo.coastal_edges[slot]
            ports[a] = kind
            ports[b] = kind
    else:
        ring = list(_MINI_RING)
        tokens = list(_MINI_TOKENS)
        rng.shuffle(ring)
        rng.shuffle(tokens)
        ring_hexes = [h for h in topo.hexes if h != (0, 0)]
        tiles[(0, 0)] = TileSpec(Resource.DESERT)
        for h, res, tok in zip(ring_hexes, ring, tokens):
            tiles[h] = TileSpec(res, tok)

    tiles = dict(sorted(tiles.items()))
    desert = next(h for h, t in tiles.items() if t.resource is Resource.DESERT)
    return Board(
        template=template,
        tiles=tiles,
        ports=dict(sorted(ports.items())),
        robber_tile=desert,
        seed=seed,
        topo=topo,
    )


def node_tiles(board: Board, node: int) -> list[tuple[Hex, TileSpec]]:
    if not isinstance(node, int) or node < 0 or node >= len(board.topo.nodes):
        raise BoardError(f"unknown node {node!r}")
    return [(h, board.tiles[h]) for h in board.topo.node_hexes[node]]


def longest_trail(edge_subset: Iterable[Edge], blocked_nodes: Iterable[int] = ()) -> int:
    """Edge count of the longest trail in ``edge_subset``.

    A trail may revisit nodes but never reuses an edge.  It may end at a
    blocked node but cannot continue through one.
    """
    edges = list({(min(a, b), max(a, b)) for a, b in edge_subset})
    if not edges:
        return 0
    blocked = set(blocked_nodes)
    adjacency: dict[int, list[tuple[int, int]]] = {}
    for i, (a, b) in enumerate(edges):
        adjacency.setdefault(a, []).append((b, 1 << i))
        adjacency.setdefault(b, []).append((a, 1 << i))

    best = 0

    def walk(node: int, used: int, length: int) -> None:
        nonlocal best
        if length > best:
            best = length
        for nxt, bit in adjacency[node]:
            if used & bit:
                continue
            if nxt in blocked:
                if length + 1 > best:
                    best = length + 1
                continue
            walk(nxt, used | bit, length + 1)

    for start in adjacency:
        walk(start, 0, 0)
        if best == len(edges):
            break
    return best
