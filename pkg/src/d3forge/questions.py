"""Question records and template instantiation under a bias spec."""

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, combinations_with_replacement, permutations, product

from .bias import check_conformance
from .errors import ConfigError, SchemaError, UnsatisfiableError
from .executor import trace
from .grammar import DEFAULT_SYNONYM_TABLE, Structure, Template, render_text
from .program import Program, CompositionSignature, hop_count, signature_of
from .seeds import as_rng
from .vocab import (
    ANSWER_VOCAB,
    ATTR_TYPES,
    ATTRIBUTE_VALUES,
    EQUAL_FAMILIES,
    FILTER_OPS,
    answer_from_str,
    answer_to_str,
)

FEASIBLE_LIMIT = 256
RECORD_KEYS = ("id", "scene_id", "text", "program", "answer", "family", "hop", "signature", "source_set")


@dataclass(frozen=True)
class QuestionRecord:
    id: str
    scene_id: str
    text: str
    program: Program
    answer: object
    signature: CompositionSignature
    hop: int
    source_set: str

    @property
    def family(self):
        return self.signature.family

    def with_source(self, source_set):
        return QuestionRecord(self.id, self.scene_id, self.text, self.program, self.answer,
                              self.signature, self.hop, source_set)

    def to_json(self):
        return {
            "id": self.id,
            "scene_id": self.scene_id,
            "text": self.text,
            "program": self.program.to_json(),
            "answer": answer_to_str(self.answer),
            "family": self.family,
            "hop": self.hop,
            "signature": self.signature.to_json(),
            "source_set": self.source_set,
        }

    @classmethod
    def from_json(cls, data):
        if not isinstance(data, dict) or set(data) != set(RECORD_KEYS):
            keys = sorted(data) if isinstance(data, dict) else type(data).__name__
            raise SchemaError(f"record keys {keys} do not match {list(RECORD_KEYS)}")
        if data["answer"] not in ANSWER_VOCAB:
            raise SchemaError(f"answer {data['answer']!r} outside the closed vocabulary")
        program = Program.from_json(data["program"])
        signature = CompositionSignature.from_json(data["signature"])
        if signature != signature_of(program) or data["family"] != signature.family:
            raise SchemaError(f"record {data['id']}: signature does not match its program")
        if data["hop"] != hop_count(program):
            raise SchemaError(f"record {data['id']}: hop does not match its program")
        for key in ("id", "scene_id", "text", "source_set"):
            if not isinstance(data[key], str):
                raise SchemaError(f"record field {key} must be a string")
        return cls(data["id"], data["scene_id"], data["text"], program, answer_from_str(data["answer"]),
                   signature, data["hop"], data["source_set"])


def templates_for(spec):
    """Every template admitted by ``spec``, in a fixed order."""
    out = []
    for family, rule in spec.families.items():
        if family in EQUAL_FAMILIES:
            out.append(Template(family, 0, (1, 1)))
            continue
        lo, hi = rule.attrs_per_question
        per_object = min(rule.max_attrs_per_object, len(rule.attr_pool))
        for hop in rule.hops:
            for slots in product(range(per_object + 1), repeat=hop + 1):
                total = sum(slots)
                if not lo <= total <= hi or total == 0:
                    continue
                # the innermost referent has only the whole scene to be unique in
                if hop > 0 and slots[-1] == 0:
                    continue
                if rule.combos is not None and not any(
                    len(set(a)) <= total and len(set(r)) <= hop for a, r in rule.combos
                ):
                    continue
                out.append(Template(family, hop, slots))
    return out


def _assignments(slots, types):
    """Distinct ways to split the attribute-type multiset ``types`` over groups."""
    out = set()
    for perm in set(permutations(types)):
        groups, k = [], 0
        for n in slots:
            group = perm[k:k + n]
            if len(set(group)) != n:
                break
            groups.append(tuple(sorted(group)))
            k += n
        else:
            out.add(tuple(groups))
    return sorted(out)


def _covering(pool, size):
    """Multisets of ``size`` drawn from ``pool`` that use every member of it."""
    return [c for c in combinations_with_replacement(sorted(pool), size) if set(c) == set(pool)]


@lru_cache(maxsize=None)
def compositions(t, rule):
    """All (attribute fields per group, relations) a template admits under a rule.

    Returned as a list of alternatives, one per combo when the rule uses
    combos, so that sampling is uniform over combos first.
    """
    slots = t.attr_slots_per_object
    if t.family in EQUAL_FAMILIES:
        field = ATTR_TYPES[rule.comparison_filter_attr]
        return [([((field,), (field,))], [()])]
    total = sum(slots)
    if rule.combos is not None:
        out = []
        for attrs, rels in rule.combos:
            groups = [g for ms in _covering(set(attrs), total) for g in _assignments(slots, ms)]
            relations = sorted({p for ms in _covering(set(rels), t.hop) for p in permutations(ms)})
            if groups and relations:
                out.append((_as_fields(groups), relations))
        return out
    per_group = [list(combinations(rule.attr_pool, n)) for n in slots]
    groups = _as_fields(list(product(*per_group)))
    return [(groups, list(product(rule.rel_pool, repeat=t.hop)))] if groups else []


def _as_fields(groups):
    return [tuple(tuple(ATTR_TYPES[a] for a in g) for g in assignment) for assignment in groups]


def _candidates(m, cur, fields):
    """Objects in ``cur`` that ``fields`` (with that object's values) single out irredundantly."""
    key = (cur, fields)
    hit = m.cache.get(key)
    if hit is not None:
        return hit
    out = []
    rest = cur
    while rest:
        low = rest & -rest
        o = low.bit_length() - 1
        rest ^= low
        pairs = tuple((f, m.values[f][o]) for f in fields)
        if _filtered(m, cur, pairs) == low and _irredundant(m, cur, pairs, low):
            out.append((o, pairs))
    m.cache[key] = out
    return out


def _referent_paths(m, fields, relations):
    """Every way to resolve the referent groups, innermost first.

    Yields ``(groups, subject_set)`` with ``groups[k]`` bound for k >= 1.
    """
    key = ("paths", fields, relations)
    paths = m.cache.get(key)
    if paths is not None:
        return paths
    paths = []
    h = len(relations)

    def walk(k, cur, acc):
        if k == 0:
            paths.append((acc[::-1], cur))
            return
        for o, pairs in _candidates(m, cur, fields[k]):
            acc.append(pairs)
            walk(k - 1, m.rel[relations[k - 1]][o], acc)
            acc.pop()

    walk(h, m.all, [])
    m.cache[key] = paths
    return paths


def _pick(rng, seq):
    # same draw for every run with the same stream, cheaper than rng.choice
    return seq[int(rng.random() * len(seq))]


def _filtered(m, mask, pairs):
    for f, v in pairs:
        mask &= m.attr[f][v]
    return mask


def _irredundant(m, mask, pairs, result):
    for j in range(len(pairs)):
        if _filtered(m, mask, pairs[:j] + pairs[j + 1:]) == result:
            return False
    return True


def _head_options(m, cur, fields):
    """Every irredundant value assignment for the subject group, with its result set."""
    key = ("head", cur, fields)
    hit = m.cache.get(key)
    if hit is not None:
        return hit
    out = []
    for values in product(*(ATTRIBUTE_VALUES[f] for f in fields)):
        pairs = tuple(zip(fields, values))
        result = _filtered(m, cur, pairs)
        if _irredundant(m, cur, pairs, result):
            out.append((pairs, result))
    m.cache[key] = out
    return out


def _subject_options(m, cur, head, target):
    """Subject bindings over ``cur`` meeting ``target``, and those among them that match something."""
    key = ("subject", cur, head, target)
    hit = m.cache.get(key)
    if hit is not None:
        return hit
    options = _head_options(m, cur, head)
    if target is not None:
        options = [o for o in options if bool(o[1]) == target]
    out = (options, [o for o in options if o[1]])
    m.cache[key] = out
    return out


def _bind_chain(fields, relations, m, rng, target, family, path_tries=4):
    paths = _referent_paths(m, fields, relations)
    if not paths:
        return None
    for _ in range(path_tries if len(paths) > 1 else 1):
        referents, cur = _pick(rng, paths)
        options, hits = _subject_options(m, cur, fields[0], target)
        if not options:
            continue
        if target is None and hits and rng.random() < (0.7 if family == "Count" else 0.5):
            options = hits
        return [_pick(rng, options)[0], *referents]
    return None


def _has_path(m, fields, relations):
    """Whether some binding resolves every referent; stops at the first one."""

    def walk(k, cur):
        if k == 0:
            return True
        return any(walk(k - 1, m.rel[relations[k - 1]][o]) for o, _ in _candidates(m, cur, fields[k]))

    return walk(len(relations), m.all)


def _resolvable(m, fields, relations, target):
    if relations:
        return _has_path(m, fields, relations)
    return bool(_subject_options(m, m.all, fields[0], target)[0])


def _bind_compare(fields, m, rng):
    first = _candidates(m, m.all, fields[0])
    if not first:
        return None
    o1, pairs1 = _pick(rng, first)
    second = [c for c in _candidates(m, m.all, fields[1]) if c[0] != o1]
    if not second:
        return None
    return [tuple(pairs1), tuple(_pick(rng, second)[1])]


def _feasible_in(alternative, t, m, target):
    groups, relations = alternative
    if t.family in EQUAL_FAMILIES:
        out = []
        for fields in groups:
            first = _candidates(m, m.all, fields[0])
            second = _candidates(m, m.all, fields[1])
            if any(a[0] != b[0] for a in first for b in second):
                out.append((fields, ()))
        return out
    return [(f, r) for f in groups for r in relations if _resolvable(m, f, r, target)]


def _feasible(t, alternatives, m, target, limit=FEASIBLE_LIMIT):
    """Compositions of ``t`` whose referents all resolve on the scene.

    Returns None when there are too many compositions to enumerate or more
    than one alternative; the caller then samples compositions and
    rejects. Picking uniformly from this list matches that rejection loop.
    """
    key = ("feasible", t, id(alternatives), target)
    hit = m.cache.get(key, m)
    if hit is not m:
        return hit
    total = sum(len(g) * len(r) for g, r in alternatives)
    if total > limit or len(alternatives) > 1:
        out = None
    else:
        out = _feasible_in(alternatives[0], t, m, target)
    m.cache[key] = out
    return out


def degeneracy_violations(program, scene, values=None):
    """Redundant filters and ambiguous referents in ``program`` over ``scene``.

    A filter is redundant when dropping it leaves the object set at the end
    of its chain segment unchanged.
    """
    if values is None:
        values = trace(program, scene)
    nodes = program.nodes
    objs = scene.objects
    out = []
    for k, node in enumerate(nodes):
        if node.op == "unique" and len(values[node.inputs[0]]) != 1:
            out.append(f"node {k}: unique over {len(values[node.inputs[0]])} objects")
    k = 0
    while k < len(nodes):
        if nodes[k].op not in FILTER_OPS:
            k += 1
            continue
        end = k
        while end + 1 < len(nodes) and nodes[end + 1].op in FILTER_OPS and nodes[end + 1].inputs == (end,):
            end += 1
        source = values[nodes[k].inputs[0]]
        run = [(FILTER_OPS[n.op], n.arg) for n in nodes[k:end + 1]]
        for j in range(len(run)):
            rest = run[:j] + run[j + 1:]
            kept = frozenset(i for i in source if all(getattr(objs[i], f) == v for f, v in rest))
            if kept == values[end]:
                out.append(f"node {k + j}: filter {run[j][0]}={run[j][1]} is redundant")
        k = end + 1
    return out


def instantiate(t, s, b, seed, record_id="q", target=None, syn=DEFAULT_SYNONYM_TABLE, max_tries=40):
    """Bind template ``t`` to scene ``s`` under bias spec ``b``.

    ``target`` optionally requests a boolean answer. Raises
    UnsatisfiableError when no conformant, non-degenerate binding is found
    within ``max_tries``; the caller should move on to another scene.
    """
    rule = b.families.get(t.family)
    if rule is None:
        raise ConfigError(f"{t.family} is not allowed in {b.name}")
    alternatives = compositions(t, rule)
    if not alternatives:
        raise UnsatisfiableError(f"template {t} admits no composition under {b.name}")
    rng = as_rng(seed)
    m = s.masks
    feasible = _feasible(t, alternatives, m, target)
    if feasible is not None and not feasible:
        raise UnsatisfiableError(f"template {t} has no resolvable composition on scene {s.id}")
    for _ in range(max_tries):
        if feasible is not None:
            fields, relations = _pick(rng, feasible)
        else:
            group_options, relation_options = _pick(rng, alternatives)
            fields = _pick(rng, group_options)
            relations = _pick(rng, relation_options)
        if t.family in EQUAL_FAMILIES:
            groups = _bind_compare(fields, m, rng)
        else:
            groups = _bind_chain(fields, relations, m, rng, target, t.family)
        if groups is None:
            continue
        program = Structure(t.family, tuple(groups), tuple(relations)).to_program()
        values = trace(program, s, m.relations)
        answer = values[-1]
        if target is not None and answer != target:
            continue
        if degeneracy_violations(program, s, values):
            continue
        signature = signature_of(program)
        record = QuestionRecord(
            id=record_id,
            scene_id=s.id,
            text=render_text(program, t, syn, rng),
            program=program,
            answer=answer,
            signature=signature,
            hop=len(relations),
            source_set=b.name,
        )
        if check_conformance(record, b):
            continue
        return record
    raise UnsatisfiableError(f"no valid binding of {t} on scene {s.id} after {max_tries} tries")
