import random
from itertools import combinations_with_replacement, permutations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from d3forge.bias import two_hop_a_signatures
from d3forge.errors import DimensionError, MalformedProgramError, SchemaError
from d3forge.executor import execute
from d3forge.oracle import outcome
from d3forge.program import (
    CompositionSignature,
    Program,
    ProgramNode,
    SignatureUniverse,
    canonicalize,
    chain_program,
    compare_program,
    edit_distance,
    enumerate_ood_signatures,
    enumerate_universe,
    hop_count,
    random_program,
    signature_of,
    validate_program,
)
from d3forge.scene import SceneConfig, sample_scenes
from d3forge.seeds import SeedPath

ATTRS = ("Color", "Material", "Shape", "Size")
RELS = ("behind", "front", "left", "right")
COUNT_A = CompositionSignature("Count", ("Color", "Size"), ("front", "left"))
EXIST_A = CompositionSignature("Exist", ("Material", "Shape"), ("behind", "right"))

# brute force over every slot alignment; frozen below after an independent run
FROZEN_OOD = [
    (("Color", "Material"), ("behind", "front")),
    (("Color", "Material"), ("behind", "left")),
    (("Color", "Material"), ("front", "right")),
    (("Color", "Material"), ("left", "right")),
    (("Color", "Shape"), ("behind", "front")),
    (("Color", "Shape"), ("behind", "left")),
    (("Color", "Shape"), ("front", "right")),
    (("Color", "Shape"), ("left", "right")),
    (("Color", "Size"), ("behind", "right")),
    (("Material", "Shape"), ("front", "left")),
    (("Material", "Size"), ("behind", "front")),
    (("Material", "Size"), ("behind", "left")),
    (("Material", "Size"), ("front", "right")),
    (("Material", "Size"), ("left", "right")),
    (("Shape", "Size"), ("behind", "front")),
    (("Shape", "Size"), ("behind", "left")),
    (("Shape", "Size"), ("front", "right")),
    (("Shape", "Size"), ("left", "right")),
]


def brute_distance(a, b):
    """Minimal substitutions over every alignment of slots within each kind."""
    def kind(x, y):
        return min(sum(p != q for p, q in zip(x, perm)) for perm in permutations(y))
    return kind(a.attrs, b.attrs) + kind(a.rels, b.rels)


def signatures(n_attrs=2, n_rels=2):
    return st.builds(
        lambda a, r: CompositionSignature(None, a, r),
        st.lists(st.sampled_from(ATTRS), min_size=n_attrs, max_size=n_attrs).map(tuple),
        st.lists(st.sampled_from(RELS), min_size=n_rels, max_size=n_rels).map(tuple),
    )


def test_json_round_trip_and_encoding():
    p = chain_program([[("color", "red")]], [], "count")
    assert p.to_json() == [{"op": "scene"}, {"op": "filter_color", "arg": "red", "in": [0]}, {"op": "count", "in": [1]}]
    assert Program.from_json(p.to_json()) == p


@pytest.mark.parametrize("bad", [
    [{"op": "scene"}, {"op": "teleport", "in": [0]}],
    [{"op": "scene"}, {"op": "count", "in": [0], "extra": 1}],
    [{"op": "scene"}, {"op": "filter_color", "arg": "pink", "in": [0]}, {"op": "count", "in": [1]}],
    [{"op": "scene"}, {"op": "unique", "in": [0]}],
    [{"op": "scene"}, {"op": "count", "in": [0, 0]}],
    "not a list",
])
def test_schema_errors(bad):
    with pytest.raises(SchemaError):
        Program.from_json(bad)


def test_malformed_structures():
    shared = Program((ProgramNode("scene"), ProgramNode("count", None, (0,)), ProgramNode("exist", None, (0,))))
    with pytest.raises(MalformedProgramError):
        validate_program(shared)
    wrong_kind = Program((ProgramNode("scene"), ProgramNode("relate", "left", (0,)), ProgramNode("count", None, (1,))))
    with pytest.raises(MalformedProgramError):
        validate_program(wrong_kind)
    forward = Program((ProgramNode("count", None, (1,)), ProgramNode("scene")))
    with pytest.raises(MalformedProgramError):
        validate_program(forward)
    with pytest.raises(MalformedProgramError):
        validate_program(Program(()))


def test_hop_count_examples():
    assert hop_count(chain_program([[("material", "metal")]], [], "exist")) == 0
    two = chain_program([[("color", "red"), ("size", "large")], [("size", "small")], [("color", "blue")]],
                        ["left", "front"], "count")
    assert hop_count(two) == 2
    three = chain_program([[], [("shape", "cube")], [("shape", "sphere")], [("color", "red")]],
                          ["left", "left", "front"], "count")
    assert hop_count(three) == 3


def test_signature_examples():
    p = chain_program([[("size", "large"), ("color", "red")]], [], "count")
    assert signature_of(p) == CompositionSignature("Count", ("Color", "Size"), ())
    q = chain_program([[("material", "metal")], [("shape", "cube")], [("shape", "sphere")]],
                      ["right", "behind"], "exist")
    assert signature_of(q) == CompositionSignature("Exist", ("Material", "Shape", "Shape"), ("behind", "right"))
    c = compare_program([("material", "rubber")], [("material", "metal")], "size")
    assert signature_of(c) == CompositionSignature("EqualSize", ("Material", "Material"), ())
    assert signature_of(c).to_json() == {"family": "EqualSize", "attrs": ["Material", "Material"], "rels": []}


def test_edit_distance_examples():
    named = CompositionSignature(None, ("Material", "Shape"), ("left", "front"))
    assert edit_distance(named, EXIST_A) == 2
    assert edit_distance(named, COUNT_A) == 2
    assert edit_distance(COUNT_A, COUNT_A) == 0
    assert edit_distance(COUNT_A, EXIST_A) == 4
    with pytest.raises(DimensionError):
        edit_distance(COUNT_A, CompositionSignature(None, ("Color",), ("left", "left")))


@given(signatures(), signatures(), signatures())
def test_edit_distance_is_a_metric(a, b, c):
    assert edit_distance(a, b) == brute_distance(a, b)
    assert (edit_distance(a, b) == 0) == (a == b)
    assert edit_distance(a, b) == edit_distance(b, a)
    assert edit_distance(a, c) <= edit_distance(a, b) + edit_distance(b, c)


@given(signatures(3, 3), signatures(3, 3))
def test_edit_distance_matches_brute_force_three_slots(a, b):
    assert edit_distance(a, b) == brute_distance(a, b)


def test_universe_size():
    universe = enumerate_universe(SignatureUniverse(ATTRS, RELS, 2, 2))
    assert len(universe) == 100 == len(list(combinations_with_replacement(ATTRS, 2))) ** 2
    assert len(set(universe)) == 100


def test_ood_enumeration_frozen():
    u = SignatureUniverse(ATTRS, RELS, 2, 2)
    got = enumerate_ood_signatures(two_hop_a_signatures(), 2, u)
    assert [s.combination for s in got] == FROZEN_OOD
    brute = [s for s in enumerate_universe(u) if all(brute_distance(s, t) == 2 for t in two_hop_a_signatures())]
    assert got == brute
    assert (("Material", "Shape"), ("front", "left")) in [s.combination for s in got]
    assert enumerate_ood_signatures(list(reversed(two_hop_a_signatures())), 2, u) == got


def test_ood_distance_zero_and_mismatch():
    u = SignatureUniverse(ATTRS, RELS, 2, 2)
    assert enumerate_ood_signatures([COUNT_A], 0, u) == [COUNT_A.with_family(None)]
    with pytest.raises(DimensionError):
        enumerate_ood_signatures([CompositionSignature("Count", ("Color",), ())], 1, u)
    assert enumerate_ood_signatures([COUNT_A], 9, u) == []


def test_canonicalize_examples():
    p = chain_program([[("color", "red"), ("size", "large")]], [], "count")
    c = canonicalize(p)
    assert [n.op for n in c.nodes[1:3]] == ["filter_size", "filter_color"]
    assert canonicalize(c) == c
    assert c.nodes[1].inputs == (0,) and c.nodes[2].inputs == (1,)


def _random_programs(n, seed):
    rng = random.Random(seed)
    return [random_program(rng, rng.randint(0, 3), max_filters=3) for _ in range(n)]


@settings(max_examples=200)
@given(st.integers(0, 10**6))
def test_canonicalize_properties(seed):
    rng = random.Random(seed)
    p = random_program(rng, rng.randint(0, 3), max_filters=4)
    c = canonicalize(p)
    validate_program(c)
    assert canonicalize(c) == c
    assert signature_of(c) == signature_of(p)
    assert hop_count(c) == hop_count(p)


def test_canonicalize_preserves_execution():
    scenes = sample_scenes(SceneConfig(3, 10), SeedPath(8), 100)
    rng = random.Random(5)
    for i in range(1000):
        s = scenes[i % 100]
        p = random_program(rng, i % 4, scene=s, max_filters=3)
        assert outcome(execute, p, s) == outcome(execute, canonicalize(p), s)


def test_random_programs_are_valid():
    for p in _random_programs(300, 1):
        validate_program(p)
