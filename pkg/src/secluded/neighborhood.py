"""Which partition members does an l-infinity ball meet, and how many at worst.

A half-open cube ``[a, a+s)`` meets the closed ball of radius ``eps`` around
``p`` exactly when ``p`` lies in the box ``[a - eps, a + s + eps)`` (for the
open ball the box is open).  So the neighborhood count, as a function of
``p``, is a sum of box indicators.  For closed balls such a sum attains its
maximum at a point whose coordinates are all left endpoints; for open balls
it attains it on an open cell of the endpoint arrangement.  Combined with
lattice periodicity (a member cube is a fundamental domain) this gives a
finite, provably sufficient candidate set, searched by branch and bound.
"""

from __future__ import annotations

import logging
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .bounds import lower_bound_k_measure
from .geometry import AxisBox, DimensionError, Point, ball, box_intersects_ball, make_point, parse_scalar
from .partitions import MemberId, PartitionSpec

log = logging.getLogger(__name__)

EXACT_DIM_LIMIT = 4


class TheoremViolation(AssertionError):
    """A search failed to find what a proven theorem guarantees exists."""


class BudgetExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class NeighborhoodReport:
    point: Point
    radius: Fraction
    ball_kind: str
    members: tuple[MemberId, ...]

    @property
    def count(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class AuditResult:
    max_count: int
    witness: Point
    strategy: str
    candidates_examined: int
    epsilon: Fraction
    ball_kind: str
    exhaustive: bool
    members: tuple[MemberId, ...] = field(default=())


def _query_box(p: Point, eps: Fraction, closed: bool) -> AxisBox:
    d = len(p)
    return AxisBox(
        tuple(c - eps for c in p),
        tuple(c + eps for c in p),
        (closed,) * d,
        (closed,) * d,
    )


def enumerate_neighborhood(
    spec: PartitionSpec, p: Sequence, eps: Fraction | str | int, kind: str = "closed"
) -> NeighborhoodReport:
    """All members whose cube meets the l-infinity ball of radius ``eps`` at ``p``."""
    p = make_point(p)
    eps = parse_scalar(eps)
    if eps < 0:
        raise ValueError("radius must be nonnegative")
    if len(p) != spec.dim:
        raise DimensionError(f"point has dimension {len(p)}, partition has {spec.dim}")
    if kind not in ("closed", "open"):
        raise ValueError(f"unknown ball kind {kind!r}")
    members = tuple(sorted(set(spec.members_meeting(_query_box(p, eps, kind == "closed")))))
    return NeighborhoodReport(p, eps, kind, members)


def brute_force_neighborhood(
    spec: PartitionSpec, p: Sequence, eps: Fraction, kind: str = "closed", reach: int | None = None
) -> tuple[MemberId, ...]:
    """Scan every member id in a box of indices and test the ball predicate directly.

    Slow; meant as an independent cross-check of :func:`enumerate_neighborhood`.
    """
    p = make_point(p)
    b = ball(p, eps, kind)
    if reach is None:
        scale = min(spec.sides())
        reach = math.ceil((max(abs(c) for c in p) + eps) / scale) + spec.dim + 2
    found = []
    for idx in _index_box(spec.dim, reach):
        if box_intersects_ball(spec.cube_of(idx), b):
            found.append(idx)
    return tuple(sorted(found))


def _index_box(d: int, reach: int):
    import itertools

    return itertools.product(range(-reach, reach + 1), repeat=d)


def _closed_candidates(residues, side, eps, lo, hi):
    """Left endpoints ``a - eps`` of the count boxes lying in ``[lo, hi)``."""
    out = set()
    m_lo = math.floor((lo + eps) / side) - 2
    m_hi = math.ceil((hi + eps) / side) + 2
    for m in range(m_lo, m_hi + 1):
        for r in residues:
            v = r + m * side - eps
            if lo <= v < hi:
                out.add(v)
    return out


def _endpoints(residues, side, eps, lo, hi):
    out = set()
    m_lo = math.floor((lo - side - eps) / side) - 2
    m_hi = math.ceil((hi + eps) / side) + 2
    for m in range(m_lo, m_hi + 1):
        for r in residues:
            a = r + m * side
            out.add(a - eps)
            out.add(a + side + eps)
    return sorted(out)


def candidate_values(
    spec: PartitionSpec,
    axis: int,
    eps: Fraction,
    closed: bool,
    region: tuple[Fraction, Fraction] | None = None,
) -> list[Fraction]:
    """Critical coordinate values that must contain a maximizer's coordinate.

    Without ``region`` the maximizer is taken inside the fundamental cube
    ``[0, side)`` on this axis (valid by lattice periodicity).
    """
    side = spec.sides()[axis]
    residues = spec.residues(axis)
    if region is None:
        if closed:
            # a maximizer p in [0, side) can be pushed down to a left endpoint in (-side - 2eps, side)
            vals = _closed_candidates(residues, side, eps, -side - 2 * eps, side)
            return sorted(v for v in vals if v > -side - 2 * eps)
        ends = _endpoints(residues, side, eps, Fraction(0), side)
        return sorted({(a + b) / 2 for a, b in zip(ends, ends[1:]) if b >= 0 and a < side})
    lo, hi = region
    if closed:
        vals = _closed_candidates(residues, side, eps, lo, hi)
        vals = {v for v in vals if lo <= v <= hi} | {lo}
        return sorted(vals)
    ends = [e for e in _endpoints(residues, side, eps, lo, hi) if lo < e < hi]
    ends = [lo] + ends + [hi]
    return sorted({(a + b) / 2 for a, b in zip(ends, ends[1:]) if a < b} | set(ends[1:-1]))


def _pbox(corner, sides, eps):
    return [(a - eps, a + s + eps) for a, s in zip(corner, sides)]


def _in(iv, v, closed):
    lo, hi = iv
    return (lo <= v < hi) if closed else (lo < v < hi)


def _dfs(entries, cands, closed, axis, prefix, best, counter):
    """Return (count, point) of the lexicographically least strict improvement over ``best``."""
    winner = None
    for v in cands[axis]:
        alive = [e for e in entries if _in(e[1][axis], v, closed)]
        if len(alive) <= best:
            continue
        if axis == len(cands) - 1:
            counter[0] += 1
            best = len(alive)
            winner = (best, prefix + (v,))
            continue
        found = _dfs(alive, cands, closed, axis + 1, prefix + (v,), best, counter)
        if found is not None:
            best = found[0]
            winner = found
    return winner


def _search_chunk(args):
    entries, cands, closed = args
    counter = [0]
    found = _dfs(entries, cands, closed, 0, (), 0, counter)
    return found, counter[0]


def _exact_max(spec, eps, closed, region=None, workers=1):
    d = spec.dim
    regions = region or [None] * d
    cands = [candidate_values(spec, i, eps, closed, regions[i]) for i in range(d)]
    query = AxisBox(
        tuple(c[0] - eps for c in cands),
        tuple(c[-1] + eps for c in cands),
        (closed,) * d,
        (closed,) * d,
    )
    sides = spec.sides()
    entries = [(m, _pbox(spec.corner_of(m), sides, eps)) for m in spec.members_meeting(query)]
    if workers <= 1 or len(cands[0]) < 2:
        counter = [0]
        found = _dfs(entries, cands, closed, 0, (), 0, counter)
        examined = counter[0]
    else:
        jobs = [(entries, [[v]] + cands[1:], closed) for v in cands[0]]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_search_chunk, jobs))
        examined = sum(n for _, n in results)
        found = None
        for res, _ in results:  # ordered by first coordinate, so ties keep the lex-least
            if res is not None and (found is None or res[0] > found[0]):
                found = res
    if found is None:
        return 0, tuple(c[0] for c in cands), examined
    return found[0], found[1], examined


def _random_point(spec, rng):
    return tuple(Fraction(rng.randrange(1 << 20), 1 << 20) * s for s in spec.sides())


def _hill_climb(spec, eps, kind, seed, budget):
    rng = random.Random(seed)
    closed = kind == "closed"
    cands = [candidate_values(spec, i, eps, closed) for i in range(spec.dim)]
    evals = 0
    best_count, best_point = -1, None
    while evals < budget:
        p = list(_random_point(spec, rng))
        cur = enumerate_neighborhood(spec, p, eps, kind).count
        evals += 1
        improved = True
        while improved and evals < budget:
            improved = False
            for i in range(spec.dim):
                for v in cands[i]:
                    if evals >= budget:
                        break
                    q = p[:i] + [v] + p[i + 1:]
                    c = enumerate_neighborhood(spec, q, eps, kind).count
                    evals += 1
                    if c > cur:
                        cur, p, improved = c, q, True
        if cur > best_count or (cur == best_count and tuple(p) < best_point):
            best_count, best_point = cur, tuple(p)
    return best_count, best_point, evals


def audit_seclusion(
    spec: PartitionSpec,
    eps: Fraction | str | int,
    strategy: str = "exact",
    budget: int | None = None,
    kind: str = "closed",
    seed: int = 0,
    region: Sequence[tuple[Fraction, Fraction]] | None = None,
    workers: int = 1,
    max_exact_dim: int | None = EXACT_DIM_LIMIT,
) -> AuditResult:
    """Largest number of members one ball of radius ``eps`` can meet.

    ``exact`` is a complete search over critical points; ``randomized`` is a
    seeded hill climb whose answer is only a lower bound on the true maximum.
    """
    eps = parse_scalar(eps)
    if eps <= 0:
        raise ValueError("audit radius must be positive")
    if strategy == "exact":
        if max_exact_dim is not None and spec.dim > max_exact_dim:
            raise ValueError(
                f"exact audit limited to d <= {max_exact_dim}; pass max_exact_dim=None to force it"
            )
        count, witness, examined = _exact_max(spec, eps, kind == "closed", region, workers)
        exhaustive = True
    elif strategy == "randomized":
        count, witness, examined = _hill_climb(spec, eps, kind, seed, budget or 2000)
        exhaustive = False
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    report = enumerate_neighborhood(spec, witness, eps, kind)
    if report.count != count:
        raise AssertionError(f"witness recount {report.count} differs from search count {count}")
    log.debug("audit %s eps=%s: max %d at %s", strategy, eps, count, witness)
    return AuditResult(count, witness, strategy, examined, eps, kind, exhaustive, report.members)


def lower_bound_witness(spec: PartitionSpec, eps: Fraction | str | int, kind: str = "open") -> tuple[Point, int]:
    """A point whose ``eps``-ball meets at least the guaranteed number of members.

    The guarantee is the measure form of the lower bound with ``M`` the volume
    of one member.  Not finding such a point means the search is wrong.
    """
    eps = parse_scalar(eps)
    result = audit_seclusion(spec, eps, "exact", kind=kind, max_exact_dim=None)
    volume = math.prod(spec.sides())
    bound = lower_bound_k_measure(spec.dim, eps, volume, "linf")
    if result.max_count < bound:
        raise TheoremViolation(
            f"best {kind} ball meets {result.max_count} members, guarantee is {bound}"
        )
    return result.witness, result.max_count
