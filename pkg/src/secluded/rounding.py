"""Deterministic rounding from partitions, and the harnesses that stress it.

A rounding scheme sends ``x`` to the representative (corner or center) of
the scaled member containing it.  With a (d+1, 1/(2d))-secluded layered
partition scaled by ``2 d eps0`` this is a universal rounding function: any
closed ``eps0`` ball of inputs produces at most ``d + 1`` outputs.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .geometry import DimensionError, Point, make_point, parse_scalar, sup_distance
from .neighborhood import enumerate_neighborhood, lower_bound_witness
from .partitions import MemberId, PartitionSpec, layered

Oracle = Callable[[random.Random], Sequence]

REPRESENTATIVES = ("center", "corner")


@dataclass(frozen=True)
class RoundingScheme:
    spec: PartitionSpec
    scale: Fraction
    representative: str = "center"

    def __post_init__(self) -> None:
        object.__setattr__(self, "scale", parse_scalar(self.scale))
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.representative not in REPRESENTATIVES:
            raise ValueError(f"representative must be one of {REPRESENTATIVES}")

    @property
    def dim(self) -> int:
        return self.spec.dim

    def member(self, x: Sequence) -> MemberId:
        x = make_point(x)
        if len(x) != self.dim:
            raise DimensionError(f"point has dimension {len(x)}, scheme has {self.dim}")
        return self.spec.member_of(tuple(c / self.scale for c in x))

    def output_of(self, member: MemberId) -> Point:
        rep = self.spec.center_of(member) if self.representative == "center" else self.spec.corner_of(member)
        return tuple(self.scale * c for c in rep)

    def __call__(self, x: Sequence) -> Point:
        return self.output_of(self.member(x))

    def to_json(self) -> dict:
        s = self.scale
        return {"spec": self.spec.to_json(), "scale": f"{s.numerator}/{s.denominator}", "representative": self.representative}


@dataclass(frozen=True)
class OutputSetReport:
    anchor: Point
    epsilon0: Fraction
    outputs: tuple[Point, ...]

    @property
    def k_observed(self) -> int:
        return len(self.outputs)


@dataclass(frozen=True)
class TransversalReport:
    center: Point
    radius: Fraction
    points: tuple[Point, ...]
    members: tuple[MemberId, ...]
    bound: int


@dataclass(frozen=True)
class CollapseStats:
    trials: int
    seed: int
    histogram: dict[Point, int]

    @property
    def distinct(self) -> int:
        return len(self.histogram)


def _eps0(eps0) -> Fraction:
    eps0 = parse_scalar(eps0)
    if eps0 <= 0:
        raise ValueError("eps0 must be positive")
    return eps0


def universal_scheme(d: int, eps0) -> RoundingScheme:
    """Default layered partition scaled by ``2 d eps0``, rounding to member centers."""
    eps0 = _eps0(eps0)
    return RoundingScheme(layered(d), 2 * d * eps0, "center")


def universal_round(d: int, eps0, x_hat: Sequence) -> Point:
    x_hat = make_point(x_hat)
    if len(x_hat) != d:
        raise DimensionError(f"point has dimension {len(x_hat)}, expected {d}")
    return universal_scheme(d, eps0)(x_hat)


def scheme_output_set(scheme: RoundingScheme, x: Sequence, eps0) -> OutputSetReport:
    """Every value the scheme takes on the closed ``eps0`` ball around ``x``."""
    x, eps0 = make_point(x), _eps0(eps0)
    if len(x) != scheme.dim:
        raise DimensionError(f"point has dimension {len(x)}, scheme has {scheme.dim}")
    unscaled = tuple(c / scheme.scale for c in x)
    report = enumerate_neighborhood(scheme.spec, unscaled, eps0 / scheme.scale, "closed")
    outputs = tuple(sorted(scheme.output_of(m) for m in report.members))
    return OutputSetReport(x, eps0, outputs)


def output_set(d: int, eps0, x: Sequence) -> OutputSetReport:
    """Exact output set of the universal rounding function; at most ``d + 1`` points."""
    report = scheme_output_set(universal_scheme(d, eps0), x, eps0)
    if report.k_observed > d + 1:
        raise AssertionError(f"{report.k_observed} outputs exceed d+1={d + 1}")
    return report


def replicate_collapse(scheme: RoundingScheme, oracle: Oracle, trials: int, seed: int = 0) -> CollapseStats:
    """Round ``trials`` independent oracle answers and tally the distinct outputs.

    Trial ``i`` draws from its own generator seeded by ``(seed, i)``, so the
    histogram does not depend on evaluation order.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    hist: Counter = Counter()
    for i in range(trials):
        answer = make_point(oracle(random.Random(f"{seed}:{i}")))
        if len(answer) != scheme.dim:
            raise DimensionError(f"oracle returned dimension {len(answer)}, scheme has {scheme.dim}")
        hist[scheme(answer)] += 1
    return CollapseStats(trials, seed, dict(sorted(hist.items())))


def min_cover_size(histogram: dict, delta) -> int:
    """Fewest outputs whose combined frequency reaches a ``1 - delta`` share of all trials."""
    delta = parse_scalar(delta)
    total = sum(histogram.values())
    need = (1 - delta) * total
    covered, k = 0, 0
    for count in sorted(histogram.values(), reverse=True):
        if covered >= need:
            break
        covered += count
        k += 1
    return k


def constant_oracle(target: Sequence) -> Oracle:
    target = make_point(target)
    return lambda rng: target


def uniform_noise_oracle(target: Sequence, eps0, grain: int = 1 << 16) -> Oracle:
    """Uniform rational point of the closed ``eps0`` ball around ``target`` on a fine grid."""
    target, eps0 = make_point(target), _eps0(eps0)

    def draw(rng: random.Random) -> Point:
        return tuple(c + eps0 * Fraction(rng.randint(-grain, grain), grain) for c in target)

    return draw


def transversal_oracle(points: Sequence[Sequence]) -> Oracle:
    pts = [make_point(p) for p in points]
    if not pts:
        raise ValueError("transversal is empty")
    return lambda rng: pts[rng.randrange(len(pts))]


def _cube_ball_midpoint(cube, center: Point, radius: Fraction) -> Point:
    return tuple(
        (max(lo, c - radius) + min(hi, c + radius)) / 2 for lo, hi, c in zip(cube.low, cube.high, center)
    )


def adversarial_transversal(scheme: RoundingScheme, eps0) -> TransversalReport:
    """A ball of radius ``eps0/2`` meeting many scaled members, with one point in each.

    The members have sup-diameter ``2 eps = scale``; the ball meets at least
    ``ceil((1 + eps0 / (2 eps))^d)`` of them.
    """
    eps0 = _eps0(eps0)
    s = scheme.scale
    radius = eps0 / s / 2
    witness, _ = lower_bound_witness(scheme.spec, radius, kind="open")
    report = enumerate_neighborhood(scheme.spec, witness, radius, "open")
    points = []
    for m in report.members:
        q = _cube_ball_midpoint(scheme.spec.cube_of(m), witness, radius)
        points.append(tuple(s * c for c in q))
    center = tuple(s * c for c in witness)
    bound = math.ceil((1 + eps0 / s) ** scheme.dim)
    out = TransversalReport(center, eps0 / 2, tuple(points), report.members, bound)
    for m, q in zip(out.members, out.points):
        assert scheme.member(q) == m and sup_distance(q, center) <= eps0 / 2
    return out


def nfl_demo(d: int, eps0, delta, trials: int, seed: int = 0, scheme: RoundingScheme | None = None) -> dict:
    """Feed a uniform-over-transversal oracle through a scheme and measure how far outputs spread."""
    from .bounds import nfl_lower

    eps0, delta = _eps0(eps0), parse_scalar(delta)
    if not 0 <= delta < 1:
        raise ValueError("delta must lie in [0, 1)")
    scheme = scheme or universal_scheme(d, eps0)
    t = adversarial_transversal(scheme, eps0)
    stats = replicate_collapse(scheme, transversal_oracle(t.points), trials, seed)
    size = len(t.points)
    p = 1 / size
    sigma = math.sqrt(trials * p * (1 - p))
    k_obs = min_cover_size(stats.histogram, delta)
    k_floor = float((1 - delta) * trials) / (trials * p + 3 * sigma)
    return {
        "d": d,
        "eps0": eps0,
        "delta": delta,
        "scale": scheme.scale,
        "seed": seed,
        "trials": trials,
        "transversal_size": size,
        "k_lower_bound": t.bound,
        "observed_distinct": stats.distinct,
        "observed_collapse": k_obs,
        "required_k": float(1 - delta) * size,
        "required_k_3sigma": k_floor,
        "nfl_accuracy_floor": nfl_lower(eps0, d, max(k_obs, 1)),
        "center": t.center,
        "transversal": list(t.points),
    }
