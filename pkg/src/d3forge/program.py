"""Functional programs, composition signatures and their edit distance."""

from collections import Counter
from dataclasses import dataclass
from itertools import combinations_with_replacement

from .errors import DimensionError, MalformedProgramError, SchemaError
from .vocab import (
    ATTR_TYPES,
    ATTRIBUTE_VALUES,
    CANONICAL_ATTR_ORDER,
    EQUAL_OPS,
    FAMILIES,
    FIELD_TO_TYPE,
    FILTER_OPS,
    OPS,
    QUERY_OPS,
    RELATIONS,
    ROOT_OP_TO_FAMILY,
)

SET_OPS = frozenset({"scene", "relate"} | set(FILTER_OPS))


@dataclass(frozen=True)
class ProgramNode:
    op: str
    arg: str = None
    inputs: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))

    def to_json(self):
        out = {"op": self.op}
        if self.arg is not None:
            out["arg"] = self.arg
        if self.inputs:
            out["in"] = list(self.inputs)
        return out

    @classmethod
    def from_json(cls, data):
        if not isinstance(data, dict) or set(data) - {"op", "arg", "in"} or "op" not in data:
            raise SchemaError(f"bad program node {data!r}")
        if data["op"] not in OPS:
            raise SchemaError(f"unknown op token {data['op']!r}")
        inputs = data.get("in", [])
        if not isinstance(inputs, list) or not all(isinstance(i, int) for i in inputs):
            raise SchemaError(f"bad input list {inputs!r}")
        return cls(data["op"], data.get("arg"), tuple(inputs))


@dataclass(frozen=True)
class Program:
    """Topologically ordered node list; the last node is the root."""

    nodes: tuple

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))

    @property
    def root(self):
        return len(self.nodes) - 1

    def __len__(self):
        return len(self.nodes)

    def to_json(self):
        return [n.to_json() for n in self.nodes]

    @classmethod
    def from_json(cls, data):
        if not isinstance(data, list):
            raise SchemaError("program must be a list of nodes")
        program = cls(tuple(ProgramNode.from_json(d) for d in data))
        try:
            validate_program(program)
        except MalformedProgramError as exc:
            raise SchemaError(str(exc)) from exc
        return program


def _output_kind(op):
    if op in SET_OPS:
        return "set"
    if op == "unique":
        return "object"
    if op in QUERY_OPS:
        return "value"
    return "answer"


def validate_program(p):
    """Raise MalformedProgramError unless ``p`` is a well-formed tree program."""
    if not p.nodes:
        raise MalformedProgramError("empty program")
    consumers = Counter()
    for k, node in enumerate(p.nodes):
        op = node.op
        if op not in OPS:
            raise MalformedProgramError(f"node {k}: unknown op {op!r}")
        if op in FILTER_OPS:
            if node.arg not in ATTRIBUTE_VALUES[FILTER_OPS[op]]:
                raise MalformedProgramError(f"node {k}: {op} needs an attribute value, got {node.arg!r}")
        elif op == "relate":
            if node.arg not in RELATIONS:
                raise MalformedProgramError(f"node {k}: relate needs a relation, got {node.arg!r}")
        elif node.arg is not None:
            raise MalformedProgramError(f"node {k}: {op} takes no argument")
        arity = 0 if op == "scene" else 2 if op in EQUAL_OPS else 1
        if len(node.inputs) != arity:
            raise MalformedProgramError(f"node {k}: {op} expects {arity} inputs")
        for i in node.inputs:
            if not 0 <= i < k:
                raise MalformedProgramError(f"node {k}: input {i} is not an earlier node")
            consumers[i] += 1
        kinds = [_output_kind(p.nodes[i].op) for i in node.inputs]
        if op in FILTER_OPS or op in ("unique", "count", "exist"):
            expected = ["set"]
        elif op == "relate" or op in QUERY_OPS:
            expected = ["object"]
        elif op in EQUAL_OPS:
            field = EQUAL_OPS[op]
            if any(p.nodes[i].op != f"query_{field}" for i in node.inputs):
                raise MalformedProgramError(f"node {k}: {op} must compare two query_{field} nodes")
            expected = ["value", "value"]
        else:
            expected = []
        if kinds != expected:
            raise MalformedProgramError(f"node {k}: {op} got inputs of kind {kinds}, expected {expected}")
    if p.nodes[-1].op not in ROOT_OP_TO_FAMILY:
        raise MalformedProgramError(f"root op {p.nodes[-1].op!r} is not a question family")
    for k in range(len(p.nodes) - 1):
        if consumers[k] != 1:
            raise MalformedProgramError(f"node {k} is consumed {consumers[k]} times; programs are trees")
    return p


def hop_count(p):
    return sum(1 for n in p.nodes if n.op == "relate")


@dataclass(frozen=True, order=True)
class CompositionSignature:
    """Family plus attribute-type and relation multisets (stored sorted).

    ``family`` may be None for family-agnostic combinations, as produced by
    :func:`enumerate_universe`.
    """

    family: str
    attrs: tuple
    rels: tuple

    def __post_init__(self):
        if self.family is not None and self.family not in FAMILIES:
            raise SchemaError(f"unknown family {self.family!r}")
        if any(a not in ATTR_TYPES for a in self.attrs):
            raise SchemaError(f"unknown attribute type in {self.attrs!r}")
        if any(r not in RELATIONS for r in self.rels):
            raise SchemaError(f"unknown relation in {self.rels!r}")
        object.__setattr__(self, "attrs", tuple(sorted(self.attrs)))
        object.__setattr__(self, "rels", tuple(sorted(self.rels)))

    @property
    def combination(self):
        return (self.attrs, self.rels)

    def with_family(self, family):
        return CompositionSignature(family, self.attrs, self.rels)

    def to_json(self):
        return {"family": self.family, "attrs": list(self.attrs), "rels": list(self.rels)}

    @classmethod
    def from_json(cls, data):
        if not isinstance(data, dict) or set(data) != {"family", "attrs", "rels"}:
            raise SchemaError(f"bad signature {data!r}")
        return cls(data["family"], tuple(data["attrs"]), tuple(data["rels"]))

    def __str__(self):
        return f"{self.family}({','.join(self.attrs)};{','.join(self.rels)})"


def signature_of(p):
    family = ROOT_OP_TO_FAMILY[p.nodes[-1].op]
    attrs = tuple(FIELD_TO_TYPE[FILTER_OPS[n.op]] for n in p.nodes if n.op in FILTER_OPS)
    rels = tuple(n.arg for n in p.nodes if n.op == "relate")
    return CompositionSignature(family, attrs, rels)


def _multiset_distance(a, b):
    return len(a) - sum((Counter(a) & Counter(b)).values())


def edit_distance(a, b):
    """Single-slot substitutions turning ``a`` into ``b``; attributes and relations
    are matched only within their own kind and the family is ignored."""
    if len(a.attrs) != len(b.attrs) or len(a.rels) != len(b.rels):
        raise DimensionError(
            f"slot counts differ: {len(a.attrs)}/{len(a.rels)} vs {len(b.attrs)}/{len(b.rels)}"
        )
    return _multiset_distance(a.attrs, b.attrs) + _multiset_distance(a.rels, b.rels)


@dataclass(frozen=True)
class SignatureUniverse:
    attr_pool: tuple = tuple(ATTR_TYPES)
    rel_pool: tuple = RELATIONS
    attr_slots: int = 2
    rel_slots: int = 2

    def __post_init__(self):
        if self.attr_slots < 0 or self.rel_slots < 0:
            raise ValueError("slot counts must be nonnegative")


def enumerate_universe(u):
    """All family-agnostic signatures with the universe's slot counts, sorted."""
    attr_sets = list(combinations_with_replacement(sorted(set(u.attr_pool)), u.attr_slots))
    rel_sets = list(combinations_with_replacement(sorted(set(u.rel_pool)), u.rel_slots))
    return [CompositionSignature(None, a, r) for a in attr_sets for r in rel_sets]


def enumerate_ood_signatures(train_sigs, d, u):
    """Universe members at edit distance exactly ``d`` from every training signature."""
    train = list(train_sigs)
    for t in train:
        if len(t.attrs) != u.attr_slots or len(t.rels) != u.rel_slots:
            raise DimensionError(f"training signature {t} does not match the universe slot counts")
    return [s for s in enumerate_universe(u) if all(edit_distance(s, t) == d for t in train)]


def _canonical_key(node):
    attr_type = FIELD_TO_TYPE[FILTER_OPS[node.op]]
    return (CANONICAL_ATTR_ORDER.index(attr_type), node.arg)


def canonicalize(p):
    """Sort every run of chained filter nodes into Size, Color, Material, Shape order."""
    nodes = list(p.nodes)
    k = 0
    while k < len(nodes):
        if nodes[k].op not in FILTER_OPS:
            k += 1
            continue
        end = k + 1
        while end < len(nodes) and nodes[end].op in FILTER_OPS and nodes[end].inputs == (end - 1,):
            end += 1
        run = sorted(nodes[k:end], key=_canonical_key)
        for offset, node in enumerate(run):
            nodes[k + offset] = ProgramNode(node.op, node.arg, nodes[k + offset].inputs)
        k = end
    return Program(tuple(nodes))


class ChainBuilder:
    """Appends nodes to a growing program, tracking the current head."""

    def __init__(self):
        self.nodes = []

    def add(self, op, arg=None, inputs=None):
        if inputs is None:
            inputs = () if op == "scene" else (len(self.nodes) - 1,)
        self.nodes.append(ProgramNode(op, arg, tuple(inputs)))
        return len(self.nodes) - 1

    def filters(self, pairs):
        for field, value in pairs:
            self.add(f"filter_{field}", value)

    def build(self):
        return Program(tuple(self.nodes))


def chain_program(groups, relations, root_op):
    """Build ``root(filters(g0) . relate(r1) . unique . filters(g1) ...)``.

    ``groups[0]`` is the subject of the question, ``groups[k]`` the referent
    reached through ``relations[k-1]``; each group is a sequence of
    ``(field, value)`` pairs.
    """
    if len(groups) != len(relations) + 1:
        raise ValueError("need exactly one more object group than relations")
    b = ChainBuilder()
    b.add("scene")
    for k in range(len(groups) - 1, 0, -1):
        b.filters(groups[k])
        b.add("unique")
        b.add("relate", relations[k - 1])
    b.filters(groups[0])
    b.add(root_op)
    return b.build()


def compare_program(left, right, field):
    """``equal_<field>(query(unique(filters(left))), query(unique(filters(right))))``."""
    b = ChainBuilder()
    heads = []
    for group in (left, right):
        b.add("scene")
        b.filters(group)
        b.add("unique")
        heads.append(b.add(f"query_{field}"))
    b.add(f"equal_{field}", inputs=heads)
    return b.build()


def random_program(rng, hop, family=None, scene=None, max_filters=2):
    """A random well-formed program, for tests and differential checks.

    When ``scene`` is given, filter values are copied from its objects so
    that ``unique`` steps resolve more often than with uniform values.
    """
    if family is None:
        family = rng.choice(FAMILIES if hop == 0 else ("Count", "Exist"))

    def value_for(field):
        if scene is not None and scene.objects and rng.random() < 0.75:
            return getattr(rng.choice(scene.objects), field)
        return rng.choice(ATTRIBUTE_VALUES[field])

    def group(min_filters=0):
        fields = rng.sample(list(ATTRIBUTE_VALUES), rng.randint(min_filters, max_filters))
        return [(f, value_for(f)) for f in fields]

    if family in ("Count", "Exist"):
        groups = [group()] + [group(1) for _ in range(hop)]
        relations = [rng.choice(RELATIONS) for _ in range(hop)]
        return chain_program(groups, relations, "count" if family == "Count" else "exist")
    field = ATTR_TYPES[family[len("Equal"):]]
    return compare_program(group(1), group(1), field)
