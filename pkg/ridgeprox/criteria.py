"""
Proximinality criteria evaluated on finite point sets

Everything here is sampled evidence about the continuum statements: the
checks are exact for the finite set they are given and say nothing about
points that were not sampled.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from . import config
from .approx import ScalarField, VariationReport, variation_inequality_report
from .exceptions import DimensionMismatchError, InvalidDirectionError
from .geometry import Direction, Number, PointSet, complete_basis, directions_independent, ridge_coordinates
from .paths import irreducible_bound, orbits

logger = logging.getLogger(__name__)

SAMPLED_EVIDENCE = "sampled evidence"


class PathBoundCheck(NamedTuple):
    bound: int
    passes: bool
    threshold: int


@dataclass(frozen=True)
class CrossSectionWitness:
    """A fiber of one direction meeting every fiber of the other direction"""

    direction_index: int
    level: Number
    section: Tuple[int, ...]
    covered: bool


@dataclass(frozen=True)
class Delta0Attempt:
    delta0: float
    passed: bool
    witness: Optional[int]
    failures: Tuple[int, ...]


@dataclass(frozen=True)
class ProbeOutcome:
    """Result of one (x^0, delta) probe of the basis-completion system"""

    probe: int
    x0: Tuple[Number, ...]
    delta: float
    delta0_found: Optional[float]
    sigma_witness: Optional[int]
    failures: Tuple[int, ...]
    attempts: Tuple[Delta0Attempt, ...]

    @property
    def passed(self) -> bool:
        return self.delta0_found is not None


@dataclass(frozen=True)
class Theorem21Report:
    passes: bool
    per_probe: Tuple[ProbeOutcome, ...]
    basis: Tuple[Direction, ...]
    deltas: Tuple[float, ...]
    label: str = SAMPLED_EVIDENCE

    def failing_probes(self) -> List[ProbeOutcome]:
        return [p for p in self.per_probe if not p.passed]


@dataclass(frozen=True)
class NecessaryConditionProbe:
    """Variation reports for a family of fields constant on a^1-fibers"""

    max_ratio: Number
    reports: Tuple[VariationReport, ...]

    def violated_for_threshold(self, c: Number) -> bool:
        return any(r.ratio > c for r in self.reports)


@dataclass(frozen=True)
class ConjectureEvidence:
    """Bounded-irreducible-paths evidence for one finite sample"""

    bound: int
    orbit_count: int
    cross_section_1: Optional[CrossSectionWitness]
    cross_section_2: Optional[CrossSectionWitness]
    passes: Optional[bool] = None
    threshold: Optional[int] = None
    label: str = SAMPLED_EVIDENCE


def check_uniform_path_bound(ps: PointSet, threshold: int, max_workers: Optional[int] = None) -> PathBoundCheck:
    """Longest irreducible path length against a threshold"""
    bound = irreducible_bound(ps, max_workers=max_workers)
    passes = bound <= threshold
    logger.info(f"Uniform path bound: {bound} (threshold {threshold}) -> {'pass' if passes else 'fail'}")
    return PathBoundCheck(bound=bound, passes=passes, threshold=threshold)


def find_cross_section(ps: PointSet, direction_index: int) -> Optional[CrossSectionWitness]:
    """
    First fiber level of direction `direction_index` whose points meet every
    fiber of the other direction

    Levels are scanned in ascending projection value.
    """
    own = ps.partition(direction_index)
    other = ps.partition(3 - direction_index)
    needed = len(other)
    for k, members in enumerate(own.classes):
        met = {other.class_of[i] for i in members}
        if len(met) == needed:
            logger.debug(f"Cross section for direction {direction_index} at level {own.class_value[k]}")
            return CrossSectionWitness(
                direction_index=direction_index,
                level=own.class_value[k],
                section=members,
                covered=True,
            )
    return None


def _validate_basis(ps: PointSet, basis: Sequence[Union[Direction, Sequence]]) -> List[Direction]:
    basis = [Direction.of(b, ps.exact) for b in basis]
    if len(basis) != ps.dim:
        raise DimensionMismatchError(f"Basis has {len(basis)} vectors for dimension {ps.dim}")
    for i, b in enumerate(basis):
        if len(b) != ps.dim:
            raise DimensionMismatchError(f"Basis vector {i} has {len(b)} coordinates, points have {ps.dim}")
    if not directions_independent(basis[0], basis[1], ps.exact):
        raise InvalidDirectionError("First two basis vectors are dependent")
    m = np.array([np.asarray(b.coords, dtype=float) for b in basis])
    m = m / np.linalg.norm(m, axis=1, keepdims=True)
    if abs(float(np.linalg.det(m))) <= config.DET_TOL:
        raise InvalidDirectionError("Basis vectors do not span the space")
    return basis


class _SystemChecker:
    """Coverage test for one sampled point set, shared by all probes"""

    def __init__(self, ps: PointSet, basis: List[Direction]):
        self.ps = ps
        self.tol = ps.tol
        coords = ridge_coordinates(ps, basis)
        self.a2 = coords[:, 1]
        self.completion = coords[:, 2:]
        self.p1, self.p2 = ps.partitions

    def sigma(self, probe: int, delta0: float) -> np.ndarray:
        """Indices x with |a^2·x - a^2·x^0| <= delta0"""
        gap = np.abs(self.a2 - self.a2[probe])
        if self.ps.exact:
            return np.nonzero(gap <= delta0)[0]
        slack = self.tol.abs_tol + self.tol.rel_tol * np.maximum(np.abs(self.a2), abs(self.a2[probe]))
        return np.nonzero(gap <= delta0 + slack)[0]

    def failures(self, sigma: np.ndarray, fiber: Sequence[int], delta: float) -> List[int]:
        """Points of sigma with no partner in the fiber sharing a^1 within completion distance delta"""
        in_sigma = set(sigma.tolist())
        partners = [i for i in fiber if i in in_sigma]
        by_class: Dict[int, List[int]] = {}
        for j in partners:
            by_class.setdefault(self.p1.class_of[j], []).append(j)

        failed = []
        groups: Dict[int, List[int]] = {}
        for x in sigma.tolist():
            groups.setdefault(self.p1.class_of[x], []).append(x)
        for cls, xs in groups.items():
            cand = by_class.get(cls)
            if not cand:
                failed.extend(xs)
                continue
            dist = np.abs(self.completion[xs][:, None, :] - self.completion[cand][None, :, :]).sum(axis=2)
            best = dist.min(axis=1)
            slack = 0.0 if self.ps.exact else self.tol.abs_tol + self.tol.rel_tol * delta
            ok = best < delta - slack
            failed.extend(x for x, good in zip(xs, ok.tolist()) if not good)
        return sorted(failed)

    def attempt(self, probe: int, delta: float, delta0: float) -> Tuple[bool, Optional[List[int]], List[int]]:
        """
        Try every a^2-fiber inside sigma as the witness fiber, the probe's own first

        Returns:
            (passed, witness fiber members, failures for the probe's own fiber)
        """
        sigma = self.sigma(probe, delta0)
        own = self.p2.class_of[probe]
        classes = sorted({self.p2.class_of[i] for i in sigma.tolist()}, key=lambda c: (c != own, c))
        own_failures: List[int] = []
        for cls in classes:
            fiber = self.p2.classes[cls]
            failed = self.failures(sigma, fiber, delta)
            if cls == own:
                own_failures = failed
            if not failed:
                return True, list(fiber), own_failures
        return False, None, own_failures


def check_theorem_2_1(
    ps: PointSet,
    basis: Optional[Sequence[Union[Direction, Sequence]]] = None,
    deltas: Sequence[float] = config.DEFAULT_DELTAS,
    shrink: float = config.DELTA0_SHRINK,
    max_steps: int = config.DELTA0_MAX_STEPS,
    probes: Optional[Sequence[int]] = None,
    max_workers: Optional[int] = None,
) -> Theorem21Report:
    """
    Sampled check of the basis-completion system

    For each probe x^0 and delta, tries delta0 = delta * shrink**j for
    j = 0..max_steps. A delta0 is accepted when some x^sigma in
    sigma = {x : |a^2·x - a^2·x^0| <= delta0} gives every x in sigma a partner
    x' in sigma with a^2·x' = a^2·x^sigma, a^1·x' = a^1·x and
    sum_{i>=3} |a^i·x' - a^i·x| < delta.

    Args:
        ps: Sampled point set
        basis: a^1, a^2 and the completion vectors (default: complete_basis)
        deltas: Positive delta values to probe
        shrink: delta0 shrink factor in (0, 1)
        max_steps: Number of shrink steps after delta0 = delta
        probes: Point indices to probe (default: all)
        max_workers: Thread count for independent probe groups

    Returns:
        Theorem21Report labelled as sampled evidence
    """
    basis = _validate_basis(ps, complete_basis(ps) if basis is None else basis)
    deltas = tuple(float(d) for d in deltas)
    if any(d <= 0 for d in deltas):
        raise ValueError(f"Deltas must be positive, got {deltas}")
    if not 0 < shrink < 1:
        raise ValueError(f"Shrink factor must lie in (0, 1), got {shrink}")
    probe_list = list(range(ps.n_points)) if probes is None else [int(p) for p in probes]
    for p in probe_list:
        if not 0 <= p < ps.n_points:
            raise IndexError(f"Probe index {p} out of range for {ps.n_points} points")

    checker = _SystemChecker(ps, basis)
    # Points in one a^2-fiber see the same sigma, so each (fiber, delta) pair is solved once
    jobs = sorted({(ps.partition(2).class_of[p], delta) for p in probe_list for delta in deltas})

    def solve(job):
        cls, delta = job
        rep = ps.partition(2).classes[cls][0]
        attempts = []
        for j in range(max_steps + 1):
            delta0 = delta * shrink ** j
            passed, fiber, failures = checker.attempt(rep, delta, delta0)
            attempts.append((delta0, passed, fiber, failures))
            if passed:
                break
        return job, attempts

    workers = max_workers or config.THREADS
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            solved = dict(pool.map(solve, jobs))
    else:
        solved = dict(solve(job) for job in jobs)

    outcomes = []
    for p in probe_list:
        cls = ps.partition(2).class_of[p]
        for delta in deltas:
            attempts = []
            for delta0, passed, fiber, failures in solved[(cls, delta)]:
                witness = None
                if fiber is not None:
                    witness = p if p in fiber else min(fiber)
                attempts.append(Delta0Attempt(delta0=delta0, passed=passed, witness=witness, failures=tuple(failures)))
            last = attempts[-1]
            outcomes.append(
                ProbeOutcome(
                    probe=p,
                    x0=ps.point(p),
                    delta=delta,
                    delta0_found=last.delta0 if last.passed else None,
                    sigma_witness=last.witness,
                    failures=() if last.passed else last.failures,
                    attempts=tuple(attempts),
                )
            )

    passes = all(o.passed for o in outcomes)
    logger.info(
        f"Basis-completion check ({SAMPLED_EVIDENCE}): {sum(o.passed for o in outcomes)}/{len(outcomes)} "
        f"probes resolved -> {'pass' if passes else 'fail'}"
    )
    return Theorem21Report(passes=passes, per_probe=tuple(outcomes), basis=tuple(basis), deltas=deltas)


def necessary_condition_probe(ps: PointSet, fields: Sequence[Union[ScalarField, Sequence]]) -> NecessaryConditionProbe:
    """
    Variation ratios for every field of a family

    A ratio growing without bound across a parametrized family shows that
    no single constant c satisfies the orbit-versus-fiber inequality.
    """
    reports = tuple(variation_inequality_report(ps, f) for f in fields)
    max_ratio = max((r.ratio for r in reports), default=0)
    return NecessaryConditionProbe(max_ratio=max_ratio, reports=reports)


def conjecture_evidence(ps: PointSet, threshold: Optional[int] = None) -> ConjectureEvidence:
    """Path bound, orbit count and cross sections in both directions for one sample"""
    bound = irreducible_bound(ps)
    evidence = ConjectureEvidence(
        bound=bound,
        orbit_count=len(orbits(ps)),
        cross_section_1=find_cross_section(ps, 1),
        cross_section_2=find_cross_section(ps, 2),
        passes=None if threshold is None else bound <= threshold,
        threshold=threshold,
    )
    logger.info(f"Bounded-path evidence: bound {bound}, {evidence.orbit_count} orbits ({SAMPLED_EVIDENCE})")
    return evidence
