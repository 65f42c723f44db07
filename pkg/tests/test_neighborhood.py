from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from secluded.bounds import trivial_k
from secluded.geometry import DimensionError
from secluded.neighborhood import (
    audit_seclusion,
    brute_force_neighborhood,
    enumerate_neighborhood,
    lower_bound_witness,
)
from secluded.partitions import build_profile, grid, layered, product, scale

coord = st.fractions(min_value=-3, max_value=3, max_denominator=12)
radius = st.fractions(min_value=0, max_value=F(3, 2), max_denominator=12)

SPECS = [
    grid(1),
    grid(2),
    layered(2, ["1/2"]),
    layered(3),
    layered(3, "uniform"),
    product([layered(2), grid(1)]),
    scale(layered(2), "3/2"),
]


def corners(spec, members):
    return sorted(spec.corner_of(m) for m in members)


def test_grid_examples():
    rep = enumerate_neighborhood(grid(1), ["1/2"], "1/2")
    assert corners(grid(1), rep.members) == [(0,), (1,)] and rep.count == 2
    rep = enumerate_neighborhood(grid(2), [0, 0], "1/2")
    assert corners(grid(2), rep.members) == sorted(itertools.product([-1, 0], repeat=2))


def test_layered_example():
    spec = layered(2, ["1/2"])
    rep = enumerate_neighborhood(spec, ["1/4", 1], "1/4")
    assert corners(spec, rep.members) == sorted([(0, 0), (F(-1, 2), 1), (F(1, 2), 1)])


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        enumerate_neighborhood(grid(2), [0], 1)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: f"{type(s).__name__}{s.dim}")
@settings(max_examples=40, deadline=None)
@given(data=st.data(), eps=radius, closed=st.booleans())
def test_matches_brute_force(spec, data, eps, closed):
    p = data.draw(st.lists(coord, min_size=spec.dim, max_size=spec.dim))
    kind = "closed" if closed else "open"
    assert enumerate_neighborhood(spec, p, eps, kind).members == brute_force_neighborhood(spec, p, eps, kind)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: f"{type(s).__name__}{s.dim}")
@settings(max_examples=30, deadline=None)
@given(data=st.data(), a=radius, b=radius)
def test_monotone_in_radius(spec, data, a, b):
    p = data.draw(st.lists(coord, min_size=spec.dim, max_size=spec.dim))
    lo, hi = sorted([a, b])
    small = set(enumerate_neighborhood(spec, p, lo).members)
    assert small <= set(enumerate_neighborhood(spec, p, hi).members)


@settings(max_examples=40, deadline=None)
@given(st.lists(coord, min_size=3, max_size=3), radius)
def test_product_law(p, eps):
    a, b = layered(2), grid(1)
    prod = product([a, b])
    left = enumerate_neighborhood(a, p[:2], eps).members
    right = enumerate_neighborhood(b, p[2:], eps).members
    expected = sorted(x + y for x, y in itertools.product(left, right))
    assert list(enumerate_neighborhood(prod, p, eps).members) == expected


def test_product_of_unit_grids_at_origin():
    for n in range(1, 5):
        spec = product([grid(1)] * n)
        assert enumerate_neighborhood(spec, [0] * n, "1/2").count == 2**n


@pytest.mark.parametrize(
    "spec, eps, expected",
    [(grid(2), "3/10", 4), (layered(2, ["1/2"]), "1/4", 3), (grid(3), "1/2", 8)],
)
def test_audit_examples(spec, eps, expected):
    res = audit_seclusion(spec, eps)
    assert res.max_count == expected and res.exhaustive
    assert enumerate_neighborhood(spec, res.witness, eps).count == expected


def test_audit_witness_is_lexicographically_least():
    from secluded.neighborhood import candidate_values

    spec, eps = grid(2), F(3, 10)
    res = audit_seclusion(spec, eps)
    assert enumerate_neighborhood(spec, [F(-3, 10)] * 2, eps).count == res.max_count
    cands = [candidate_values(spec, i, eps, True) for i in range(2)]
    best = [p for p in itertools.product(*cands) if enumerate_neighborhood(spec, p, eps).count == res.max_count]
    assert res.witness == min(best)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_uniform_schedule_fails_above_two(d):
    res = audit_seclusion(layered(d, "uniform"), F(1, 2 * d))
    if d <= 2:
        assert res.max_count == d + 1
    else:
        assert res.max_count == 5


@pytest.mark.parametrize("spec", [grid(1), grid(2), layered(2), layered(2, ["1/3"])], ids=str)
@pytest.mark.parametrize("eps", ["1/8", "1/3", "1/2", "3/4"])
@pytest.mark.parametrize("kind", ["closed", "open"])
def test_fundamental_domain_matches_wide_region(spec, eps, kind):
    eps = F(eps)
    d = spec.dim
    narrow = audit_seclusion(spec, eps, kind=kind)
    wide = audit_seclusion(spec, eps, kind=kind, region=[(F(-d - 1), F(d + 1))] * d)
    assert narrow.max_count == wide.max_count


@pytest.mark.parametrize("spec", [grid(2), layered(2), layered(3), product([layered(2), grid(1)])], ids=str)
def test_audit_sandwich(spec):
    """Exact max lies between the lower-bound guarantee and the trivial upper bound."""
    d = spec.dim
    prev = 0
    for eps in [F(1, 8), F(1, 4), F(3, 8), F(1, 2)]:
        m = audit_seclusion(spec, eps).max_count
        assert math.ceil((1 + 2 * eps) ** d) <= m <= trivial_k(d, eps)
        assert m >= prev
        prev = m


def test_parallel_matches_serial():
    spec = layered(3)
    a = audit_seclusion(spec, "1/6")
    b = audit_seclusion(spec, "1/6", workers=3)
    assert (a.max_count, a.witness) == (b.max_count, b.witness)


def test_randomized_is_lower_bound():
    spec = layered(3)
    exact = audit_seclusion(spec, "1/4")
    rnd = audit_seclusion(spec, "1/4", strategy="randomized", budget=400, seed=3)
    assert not rnd.exhaustive and rnd.max_count <= exact.max_count
    assert rnd == audit_seclusion(spec, "1/4", strategy="randomized", budget=400, seed=3)


def test_audit_guards():
    with pytest.raises(ValueError):
        audit_seclusion(grid(1), 0)
    with pytest.raises(ValueError):
        audit_seclusion(grid(5), "1/2")
    with pytest.raises(ValueError):
        audit_seclusion(grid(1), "1/2", strategy="psychic")


def test_witness_examples():
    assert lower_bound_witness(grid(1), "1/2")[1] >= 2
    p, n = lower_bound_witness(layered(2, ["1/2"]), "1/4")
    assert n >= 3 and enumerate_neighborhood(layered(2, ["1/2"]), p, "1/4", "open").count == n
    spec, _ = build_profile(lambda d: 2, 4)
    assert lower_bound_witness(spec, "1/4")[1] >= 6


def test_witness_on_scaled_spec():
    spec = scale(layered(2), "1/2")
    p, n = lower_bound_witness(spec, "1/4")
    assert n >= math.ceil((1 + F(1, 2) * 2) ** 2)


def test_random_scan_counts_within_trivial_bound():
    rng = random.Random(5)
    spec = layered(3)
    for _ in range(50):
        p = [F(rng.randint(-40, 40), 13) for _ in range(3)]
        eps = F(rng.randint(1, 12), 12)
        assert enumerate_neighborhood(spec, p, eps).count <= trivial_k(3, eps)
