"""
Path calculus over a finite point set: relation graph, orbits, irreducible and closed paths
"""
import logging
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
from networkx.utils import UnionFind

from . import config
from .exceptions import EnumerationGuardError, InvalidPathError
from .geometry import Number, PointSet

logger = logging.getLogger(__name__)

# BFS state: (point index, kind value of the step that reached it; 0 at the source)
_State = Tuple[int, int]


class StepKind(Enum):
    """Kind of a path step: PERP_TO_A1 joins points with equal a^1-projection"""

    PERP_TO_A1 = 1
    PERP_TO_A2 = 2

    @property
    def direction_index(self) -> int:
        return self.value

    def other(self) -> "StepKind":
        return StepKind.PERP_TO_A2 if self is StepKind.PERP_TO_A1 else StepKind.PERP_TO_A1

    def __str__(self) -> str:
        return "PerpToA1" if self is StepKind.PERP_TO_A1 else "PerpToA2"


@dataclass(frozen=True)
class Path:
    """Ordered point indices with one strictly alternating StepKind per consecutive pair"""

    point_indices: Tuple[int, ...]
    steps: Tuple[StepKind, ...]

    def __post_init__(self):
        object.__setattr__(self, "point_indices", tuple(int(i) for i in self.point_indices))
        object.__setattr__(self, "steps", tuple(self.steps))
        if not self.point_indices:
            raise InvalidPathError("A path has at least one point")
        if len(self.steps) != len(self.point_indices) - 1:
            raise InvalidPathError(
                f"{len(self.point_indices)} points need {len(self.point_indices) - 1} steps, got {len(self.steps)}"
            )
        for pos, (a, b) in enumerate(zip(self.steps, self.steps[1:])):
            if a is b:
                raise InvalidPathError(f"Steps {pos} and {pos + 1} are both {a}", position=pos + 1)
        for pos, (p, q) in enumerate(zip(self.point_indices, self.point_indices[1:])):
            if p == q:
                raise InvalidPathError(f"Consecutive points {pos} and {pos + 1} coincide", position=pos)

    def __len__(self) -> int:
        return len(self.point_indices)

    def reversed(self) -> "Path":
        return Path(self.point_indices[::-1], self.steps[::-1])


@dataclass(frozen=True)
class OrbitPartition:
    """Classes of points joined by some path"""

    classes: Tuple[Tuple[int, ...], ...]
    representative: Tuple[int, ...]
    class_of: Tuple[int, ...]

    def __len__(self) -> int:
        return len(self.classes)

    def orbit_of(self, point_index: int) -> Tuple[int, ...]:
        return self.classes[self.class_of[point_index]]

    def sizes(self) -> List[int]:
        return [len(c) for c in self.classes]


@dataclass(frozen=True)
class ClosedPathCertificate:
    """
    A closed path with its alternating sum functional

    Skeletons produced by enumerate_closed_paths leave the two values unset.
    """

    path: Path
    alternating_sum: Optional[Number] = None
    functional_value: Optional[Number] = None

    def __post_init__(self):
        if len(self.path) % 2:
            raise InvalidPathError(f"Closed paths have an even number of points, got {len(self.path)}")


def _allowed_kinds(ps: PointSet, p: int, q: int) -> List[StepKind]:
    if p == q:
        return []
    parts = ps.partitions
    return [kind for kind in StepKind if parts[kind.value - 1].class_of[p] == parts[kind.value - 1].class_of[q]]


def validate_path(ps: PointSet, seq: Sequence[int]) -> Path:
    """
    Check that a point sequence is a path and infer its step kinds

    The first step may be of either kind (PerpToA1 is preferred when both
    work); every later kind is forced by alternation.

    Raises:
        InvalidPathError: index out of range, a pair equal under neither
            projection, or no alternating kind assignment exists
    """
    idx = [int(i) for i in seq]
    if not idx:
        raise InvalidPathError("Empty sequence")
    for pos, i in enumerate(idx):
        if not 0 <= i < ps.n_points:
            raise InvalidPathError(f"Index {i} out of range for {ps.n_points} points", position=pos)
    if len(idx) == 1:
        return Path(tuple(idx), ())

    allowed = []
    for pos, (p, q) in enumerate(zip(idx, idx[1:])):
        kinds = _allowed_kinds(ps, p, q)
        if not kinds:
            raise InvalidPathError(
                f"Points {p} and {q} share neither projection (step {pos})", position=pos
            )
        allowed.append(kinds)

    furthest = 0
    for first in (StepKind.PERP_TO_A1, StepKind.PERP_TO_A2):
        kinds = [first if pos % 2 == 0 else first.other() for pos in range(len(allowed))]
        bad = next((pos for pos, k in enumerate(kinds) if k not in allowed[pos]), None)
        if bad is None:
            return Path(tuple(idx), tuple(kinds))
        furthest = max(furthest, bad)
    raise InvalidPathError(f"Steps cannot alternate (fails at step {furthest})", position=furthest)


def is_closed_path(ps: PointSet, path: Path) -> bool:
    """True iff the path has an even number of points and stays a path when its first point is appended"""
    if len(path) % 2:
        return False
    try:
        validate_path(ps, list(path.point_indices) + [path.point_indices[0]])
    except InvalidPathError:
        return False
    return True


def relation_graph(ps: PointSet) -> nx.MultiGraph:
    """
    Undirected multigraph on point indices

    An edge keyed by StepKind joins two distinct points in the same fiber of
    that kind's direction.
    """
    graph = nx.MultiGraph()
    graph.add_nodes_from(range(ps.n_points))
    for kind in StepKind:
        for members in ps.partition(kind.value).classes:
            for pos, u in enumerate(members):
                for v in members[pos + 1:]:
                    graph.add_edge(u, v, key=kind, kind=kind)
    logger.debug(f"Relation graph: {graph.number_of_nodes()} nodes, {graph.number_of_edges()} edges")
    return graph


def orbits(ps: PointSet) -> OrbitPartition:
    """
    Connected components of the relation graph, merged fiber by fiber

    Classes are ascending index tuples ordered by their smallest point.
    """
    uf = UnionFind(range(ps.n_points))
    for partition in ps.partitions:
        for members in partition.classes:
            uf.union(*members)
    groups = sorted((sorted(group) for group in uf.to_sets()), key=lambda g: g[0])
    class_of = [0] * ps.n_points
    for k, group in enumerate(groups):
        for i in group:
            class_of[i] = k
    return OrbitPartition(
        classes=tuple(tuple(g) for g in groups),
        representative=tuple(g[0] for g in groups),
        class_of=tuple(class_of),
    )


def _alternating_bfs(
    ps: PointSet, source: int, target: Optional[int] = None
) -> Tuple[Dict[int, _State], Dict[_State, Optional[_State]], Dict[_State, int]]:
    """
    Breadth-first search over (point, kind of last step) states

    A fiber expanded once never yields shorter states later, so each
    (kind, fiber) pair is expanded at most once.
    """
    parts = ps.partitions
    start: _State = (source, 0)
    parent: Dict[_State, Optional[_State]] = {start: None}
    depth: Dict[_State, int] = {start: 1}
    first_arrival: Dict[int, _State] = {source: start}
    expanded = set()
    queue = deque([start])
    while queue:
        state = queue.popleft()
        p, last = state
        candidates = []
        for kind in (1, 2):
            if kind == last:
                continue
            cls = parts[kind - 1].class_of[p]
            if (kind, cls) in expanded:
                continue
            expanded.add((kind, cls))
            candidates.extend((w, kind) for w in parts[kind - 1].classes[cls] if w != p)
        candidates.sort()
        for nxt in candidates:
            if nxt in parent:
                continue
            parent[nxt] = state
            depth[nxt] = depth[state] + 1
            if nxt[0] not in first_arrival:
                first_arrival[nxt[0]] = nxt
                if nxt[0] == target:
                    return first_arrival, parent, depth
            queue.append(nxt)
    return first_arrival, parent, depth


def alternating_distances(ps: PointSet, source: int) -> List[Optional[int]]:
    """Point count of a shortest alternating path from source to every point (None if unreachable)"""
    first_arrival, _, depth = _alternating_bfs(ps, source)
    return [depth[first_arrival[i]] if i in first_arrival else None for i in range(ps.n_points)]


def shortest_alternating_path(ps: PointSet, u: int, v: int) -> Optional[Path]:
    """
    Minimum point-count path from u to v, or None if v is not in the orbit of u

    Ties are broken by ascending point index in queue order. The result is
    irreducible by construction.
    """
    for i in (u, v):
        if not 0 <= i < ps.n_points:
            raise IndexError(f"Point index {i} out of range for {ps.n_points} points")
    if u == v:
        return Path((u,), ())
    first_arrival, parent, _ = _alternating_bfs(ps, u, target=v)
    if v not in first_arrival:
        return None
    points, kinds = [], []
    state = first_arrival[v]
    while state is not None:
        points.append(state[0])
        if state[1]:
            kinds.append(StepKind(state[1]))
        state = parent[state]
    return Path(tuple(reversed(points)), tuple(reversed(kinds)))


def irreducible_bound(ps: PointSet, max_workers: Optional[int] = None) -> int:
    """
    Longest irreducible path length n0 of the finite set

    Maximum over ordered pairs in one orbit of the shortest alternating path
    length; 1 when the set has no edges. Sources are swept in parallel.
    """
    ps.partitions  # populate the cache before worker threads read it

    def farthest(source: int) -> int:
        return max(d for d in alternating_distances(ps, source) if d is not None)

    workers = max_workers or config.THREADS
    if workers > 1 and ps.n_points > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            bound = max(pool.map(farthest, range(ps.n_points)))
    else:
        bound = max(farthest(s) for s in range(ps.n_points))
    logger.debug(f"Irreducible bound over {ps.n_points} points: {bound}")
    return bound


def enumerate_closed_paths(
    ps: PointSet,
    max_points: int = config.CLOSED_PATH_LENGTH_LIMIT,
    force: bool = False,
    point_limit: Optional[int] = None,
) -> List[ClosedPathCertificate]:
    """
    All closed paths with at most max_points points, up to rotation and reversal

    Each closed path is reported once, starting at its smallest point index
    and oriented so that the second point is smaller than the last. Two-point
    closed paths (distinct points sharing both projections) are included.

    Args:
        ps: Point set
        max_points: Even cap on the number of points, at least 4
        force: Skip the size guard
        point_limit: Guard on the number of points (default: configured limit)

    Raises:
        EnumerationGuardError: instance too large for exhaustive enumeration
    """
    if max_points < 4 or max_points % 2:
        raise ValueError(f"max_points must be even and at least 4, got {max_points}")
    limit = config.CLOSED_PATH_POINT_LIMIT if point_limit is None else point_limit
    if not force and (ps.n_points > limit or max_points > config.CLOSED_PATH_LENGTH_LIMIT):
        raise EnumerationGuardError(
            f"Exhaustive closed-path enumeration is limited to {limit} points and "
            f"{config.CLOSED_PATH_LENGTH_LIMIT} path points (got {ps.n_points} points, "
            f"max_points={max_points}); pass force=True to override"
        )

    parts = ps.partitions
    found: Dict[Tuple[int, ...], ClosedPathCertificate] = {}

    def extend(start: int, path: List[int], kinds: List[int], on_path: set):
        p = path[-1]
        last = kinds[-1] if kinds else 0
        m = len(path)
        if m % 2 == 0:
            close = 3 - last
            key = tuple(path)
            if (
                parts[close - 1].class_of[p] == parts[close - 1].class_of[start]
                and (m == 2 or path[1] < path[-1])
                and key not in found
            ):
                found[key] = ClosedPathCertificate(Path(key, tuple(StepKind(k) for k in kinds)))
        if m == max_points:
            return
        for kind in (1, 2):
            if kind == last:
                continue
            for w in parts[kind - 1].members_of(p):
                if w <= start or w in on_path:
                    continue
                path.append(w)
                kinds.append(kind)
                on_path.add(w)
                extend(start, path, kinds, on_path)
                on_path.discard(w)
                kinds.pop()
                path.pop()

    for start in range(ps.n_points):
        extend(start, [start], [], {start})

    result = [found[k] for k in sorted(found, key=lambda t: (len(t), t))]
    logger.debug(f"Enumerated {len(result)} closed paths with at most {max_points} points")
    return result
