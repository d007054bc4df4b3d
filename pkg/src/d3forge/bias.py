"""Bias specifications, the named-set registry and conformance checks."""

import json
from dataclasses import dataclass
from importlib import resources

from .errors import ConfigError
from .program import CompositionSignature, SignatureUniverse, enumerate_ood_signatures
from .vocab import ATTR_TYPES, EQUAL_FAMILIES, FAMILIES, RELATIONS

ALL_ATTRS = ("Color", "Material", "Shape", "Size")


@dataclass(frozen=True)
class FamilyRule:
    """What one question family may contain inside a biased set.

    ``combos``, when given, is a list of ``(attr_types, relations)``
    compositions; a question matches a combo when the *set* of its
    attribute types and the *set* of its relations equal the combo's.
    Pools are then the union of the combos.
    """

    attr_pool: tuple = ALL_ATTRS
    rel_pool: tuple = ()
    attrs_per_question: tuple = (1, 1)
    hops: tuple = (0,)
    comparison_filter_attr: str = None
    combos: tuple = None
    max_attrs_per_object: int = 2

    def __post_init__(self):
        if self.combos is not None:
            combos = tuple((tuple(sorted(a)), tuple(sorted(r))) for a, r in self.combos)
            object.__setattr__(self, "combos", combos)
            object.__setattr__(self, "attr_pool", tuple(sorted({t for a, _ in combos for t in a})))
            object.__setattr__(self, "rel_pool", tuple(sorted({t for _, r in combos for t in r})))
        object.__setattr__(self, "attr_pool", tuple(sorted(self.attr_pool)))
        object.__setattr__(self, "rel_pool", tuple(sorted(self.rel_pool)))
        object.__setattr__(self, "attrs_per_question", tuple(self.attrs_per_question))
        object.__setattr__(self, "hops", tuple(sorted(self.hops)))

    def validate(self, family):
        lo, hi = self.attrs_per_question
        if not self.attr_pool or not self.hops or lo < 0 or lo > hi:
            raise ConfigError(f"{family}: empty pools or bad attribute range")
        if any(a not in ATTR_TYPES for a in self.attr_pool) or any(r not in RELATIONS for r in self.rel_pool):
            raise ConfigError(f"{family}: unknown attribute type or relation")
        if any(h > 0 for h in self.hops) and not self.rel_pool:
            raise ConfigError(f"{family}: hops > 0 need a nonempty relation pool")
        if family in EQUAL_FAMILIES:
            if self.comparison_filter_attr not in self.attr_pool or self.hops != (0,):
                raise ConfigError(f"{family}: comparison families need a filter attribute and hop 0")
        elif self.comparison_filter_attr is not None:
            raise ConfigError(f"{family}: comparison_filter_attr only applies to Equal* families")

    def to_json(self):
        out = {
            "attr_pool": list(self.attr_pool),
            "rel_pool": list(self.rel_pool),
            "attrs_per_question": list(self.attrs_per_question),
            "hops": list(self.hops),
            "max_attrs_per_object": self.max_attrs_per_object,
        }
        if self.comparison_filter_attr is not None:
            out["comparison_filter_attr"] = self.comparison_filter_attr
        if self.combos is not None:
            out["combos"] = [{"attrs": list(a), "rels": list(r)} for a, r in self.combos]
        return out

    @classmethod
    def from_json(cls, data):
        known = {"attr_pool", "rel_pool", "attrs_per_question", "hops", "comparison_filter_attr",
                 "combos", "max_attrs_per_object"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown family rule keys {sorted(unknown)}")
        kwargs = dict(data)
        if "combos" in kwargs:
            kwargs["combos"] = tuple((tuple(c["attrs"]), tuple(c["rels"])) for c in kwargs["combos"])
        for key in ("attr_pool", "rel_pool", "attrs_per_question", "hops"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)


@dataclass(frozen=True)
class BiasSpec:
    name: str
    families: dict
    condition: str = "A"
    objects: tuple = (3, 10)

    def __post_init__(self):
        if not self.families:
            raise ConfigError(f"{self.name}: no family is allowed")
        for family, rule in self.families.items():
            if family not in FAMILIES:
                raise ConfigError(f"{self.name}: unknown family {family!r}")
            rule.validate(family)
        if self.condition not in ("A", "B"):
            raise ConfigError(f"{self.name}: condition must be A or B")
        object.__setattr__(self, "objects", tuple(self.objects))

    def allows(self, family):
        return family in self.families

    def to_json(self):
        return {
            "name": self.name,
            "condition": self.condition,
            "objects": list(self.objects),
            "families": {f: r.to_json() for f, r in self.families.items()},
        }

    @classmethod
    def from_json(cls, data):
        unknown = set(data) - {"name", "condition", "objects", "families"}
        if unknown:
            raise ConfigError(f"unknown bias spec keys {sorted(unknown)}")
        families = {}
        for family, rule in data["families"].items():
            if isinstance(rule, dict) and rule.get("allowed", True) is False:
                continue
            rule = {k: v for k, v in rule.items() if k != "allowed"}
            families[family] = FamilyRule.from_json(rule)
        return cls(data["name"], families, data.get("condition", "A"), tuple(data.get("objects", (3, 10))))


def check_conformance(q, b):
    """Violations of bias spec ``b`` by record ``q``; an empty list means conformant."""
    sig = q.signature
    rule = b.families.get(sig.family)
    if rule is None:
        return [f"family {sig.family} is not allowed in {b.name}"]
    out = []
    for a in sorted(set(sig.attrs) - set(rule.attr_pool)):
        out.append(f"attribute {a} not in {sig.family} pool {list(rule.attr_pool)}")
    for r in sorted(set(sig.rels) - set(rule.rel_pool)):
        out.append(f"relation {r} not in {sig.family} pool {list(rule.rel_pool)}")
    lo, hi = rule.attrs_per_question
    if not lo <= len(sig.attrs) <= hi:
        out.append(f"{len(sig.attrs)} attributes outside [{lo}, {hi}]")
    hop = len(sig.rels)
    if hop not in rule.hops or q.hop != hop:
        out.append(f"hop {q.hop} not in {list(rule.hops)}")
    if rule.comparison_filter_attr is not None and set(sig.attrs) != {rule.comparison_filter_attr}:
        out.append(f"comparison filters {list(sig.attrs)} are not all {rule.comparison_filter_attr}")
    if rule.combos is not None:
        key = (tuple(sorted(set(sig.attrs))), tuple(sorted(set(sig.rels))))
        if not any(key == (tuple(sorted(set(a))), tuple(sorted(set(r)))) for a, r in rule.combos):
            out.append(f"composition {list(key[0])}/{list(key[1])} is not an allowed combination")
    return out


def conforms(q, b):
    return not check_conformance(q, b)


def load_comparison_pairings(path=None):
    """``{"train": {family: attr}, "test": {family: attr}}`` from JSON."""
    if path is None:
        text = resources.files("d3forge").joinpath("data/comparison_pairings.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    data = json.loads(text)
    if set(data) != {"train", "test"}:
        raise ConfigError("comparison pairings need exactly 'train' and 'test'")
    for split in data.values():
        for family, attr in split.items():
            if family not in EQUAL_FAMILIES or attr not in ATTR_TYPES:
                raise ConfigError(f"bad comparison pairing {family} -> {attr}")
            if attr == EQUAL_FAMILIES[family]:
                raise ConfigError(f"{family} cannot filter on the attribute it compares")
    return data


TWO_HOP_A = {
    "Count": (("Color", "Size"), ("front", "left")),
    "Exist": (("Material", "Shape"), ("behind", "right")),
}


def two_hop_a_signatures():
    """The two training compositions of 2Hop-A as slot-complete signatures."""
    return [CompositionSignature(f, a, r) for f, (a, r) in TWO_HOP_A.items()]


def default_ood_combos():
    universe = SignatureUniverse(ALL_ATTRS, RELATIONS, 2, 2)
    return [s.combination for s in enumerate_ood_signatures(two_hop_a_signatures(), 2, universe)]


def _both(rule):
    return {"Count": rule, "Exist": rule}


def default_registry(pairings=None, ood_combos=None):
    pairings = pairings or load_comparison_pairings()
    ood = tuple(ood_combos) if ood_combos is not None else tuple(default_ood_combos())
    swap_b = {"Count": TWO_HOP_A["Exist"], "Exist": TWO_HOP_A["Count"]}

    def compare(split):
        return {
            family: FamilyRule(attr_pool=(attr,), attrs_per_question=(2, 2), comparison_filter_attr=attr,
                               max_attrs_per_object=1)
            for family, attr in pairings[split].items()
        }

    def one_hop(table):
        return {
            f: FamilyRule(attr_pool=a, rel_pool=r, attrs_per_question=(1, 2), hops=(1,), max_attrs_per_object=1)
            for f, (a, r) in table.items()
        }

    def combo_sets(table, hop, attrs):
        return {f: FamilyRule(combos=(combo,), attrs_per_question=attrs, hops=(hop,)) for f, combo in table.items()}

    specs = [
        BiasSpec("TwoAttr-Train", {
            "Count": FamilyRule(attr_pool=("Color", "Size"), attrs_per_question=(2, 2)),
            "Exist": FamilyRule(attr_pool=("Color", "Shape"), attrs_per_question=(2, 2)),
        }, "A", (3, 5)),
        BiasSpec("TwoAttr-Test", {
            "Count": FamilyRule(attr_pool=("Color", "Shape"), attrs_per_question=(2, 2)),
            "Exist": FamilyRule(attr_pool=("Color", "Size"), attrs_per_question=(2, 2)),
        }, "A", (3, 5)),
        BiasSpec("Compare-Train", compare("train"), "A", (2, 5)),
        BiasSpec("Compare-Test", compare("test"), "A", (2, 5)),
        BiasSpec("D3-0Hop-Simple", _both(FamilyRule(attr_pool=("Color", "Shape", "Size"))), "A", (3, 5)),
        BiasSpec("0Hop-A", {
            "Count": FamilyRule(attr_pool=("Color", "Size")),
            "Exist": FamilyRule(attr_pool=("Material", "Shape")),
        }, "A", (3, 10)),
        BiasSpec("0Hop-TestFull", _both(FamilyRule()), "B", (3, 10)),
        BiasSpec("1Hop-Full", _both(FamilyRule(rel_pool=RELATIONS, attrs_per_question=(1, 2), hops=(1,),
                                               max_attrs_per_object=1)), "A", (3, 10)),
        BiasSpec("1Hop-A", one_hop(TWO_HOP_A), "A", (3, 10)),
        BiasSpec("1Hop-B", one_hop(swap_b), "A", (3, 10)),
        BiasSpec("2Hop-A", combo_sets(TWO_HOP_A, 2, (2, 2)), "A", (3, 10)),
        BiasSpec("2Hop-OOD", _both(FamilyRule(combos=ood, attrs_per_question=(2, 2), hops=(2,))), "B", (3, 10)),
        BiasSpec("3Hop-A", combo_sets(TWO_HOP_A, 3, (2, 3)), "B", (3, 10)),
        BiasSpec("3Hop-OOD", _both(FamilyRule(combos=ood, attrs_per_question=(2, 3), hops=(3,))), "B", (3, 10)),
        BiasSpec("3Hop-Full", _both(FamilyRule(rel_pool=RELATIONS, attrs_per_question=(2, 4), hops=(3,))),
                 "A", (3, 10)),
    ]
    return {s.name: s for s in specs}


REGISTRY_NAMES = tuple(default_registry())


def override_registry(registry, overrides):
    """Replace registry entries with bias specs given as JSON objects."""
    out = dict(registry)
    for name, data in overrides.items():
        data = {"name": name, **data}
        out[name] = BiasSpec.from_json(data)
    return out
