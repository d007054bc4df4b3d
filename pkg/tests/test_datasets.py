from collections import Counter

import pytest

from d3forge.bias import check_conformance, default_registry
from d3forge.datasets import AnswerBalancer, build_named_set, build_named_set_with_scenes, scene_pool
from d3forge.errors import InsufficientSourceError, UsageError
from d3forge.seeds import SeedPath

REGISTRY = default_registry()


@pytest.fixture(scope="module")
def two_hop_a():
    return build_named_set_with_scenes("2Hop-A", 1500, SeedPath(21))


def test_two_hop_a_conforms(two_hop_a):
    scenes, records = two_hop_a
    assert len(records) == 1500
    assert all(check_conformance(r, REGISTRY["2Hop-A"]) == [] for r in records)
    assert {s.condition for s in scenes} == {"A"}
    assert len({r.id for r in records}) == 1500


def test_answers_are_balanced(two_hop_a):
    _, records = two_hop_a
    exist = [r.answer for r in records if r.family == "Exist"]
    assert 0.40 <= sum(exist) / len(exist) <= 0.60
    counts = Counter(r.answer for r in records if r.family == "Count")
    assert max(counts.values()) / sum(counts.values()) <= 0.50
    families = Counter(r.family for r in records)
    assert families["Count"] > 600 and families["Exist"] > 600


def test_test_full_covers_every_attribute_and_family():
    _, records = build_named_set_with_scenes("0Hop-TestFull", 600, SeedPath(22))
    cells = {(r.family, a) for r in records for a in r.signature.attrs}
    assert cells == {(f, a) for f in ("Count", "Exist") for a in ("Color", "Material", "Shape", "Size")}
    assert all(r.scene_id.startswith("B") for r in records)


def test_three_hop_a_relations():
    _, records = build_named_set_with_scenes("3Hop-A", 300, SeedPath(23))
    for r in records:
        assert len(r.signature.rels) == 3
        allowed = {"Count": {"left", "front"}, "Exist": {"right", "behind"}}[r.family]
        assert set(r.signature.rels) <= allowed


def test_every_named_set_builds_conformant_records():
    for name, spec in REGISTRY.items():
        _, records = build_named_set_with_scenes(name, 120, SeedPath(24))
        assert len(records) == 120
        assert all(check_conformance(r, spec) == [] for r in records), name
        assert {r.family for r in records} == set(spec.families), name


def test_determinism():
    a = build_named_set_with_scenes("1Hop-A", 200, SeedPath(25))
    b = build_named_set_with_scenes("1Hop-A", 200, SeedPath(25))
    assert a == b
    c = build_named_set_with_scenes("1Hop-A", 200, SeedPath(26))
    assert a[1] != c[1]


def test_scene_pool_is_shared_by_requirements():
    assert scene_pool(REGISTRY["2Hop-A"], SeedPath(1), 5) == scene_pool(REGISTRY["1Hop-Full"], SeedPath(1), 5)


def test_errors():
    with pytest.raises(UsageError):
        build_named_set("Nope", [], 1, SeedPath(0))
    b_scenes = scene_pool(REGISTRY["2Hop-OOD"], SeedPath(0), 3)
    with pytest.raises(InsufficientSourceError):
        build_named_set("2Hop-A", b_scenes, 5, SeedPath(0))


def test_balancer_rules():
    bal = AnswerBalancer(warmup=2)
    for answer in (True, True, True):
        bal.add("Exist", answer)
    assert bal.target("Exist", None) is False
    assert not bal.accept("Exist", True) and bal.accept("Exist", False)
    for _ in range(3):
        bal.add("Count", 0)
    assert not bal.accept("Count", 0) and bal.accept("Count", 1)
    assert bal.accept("EqualColor", True)
