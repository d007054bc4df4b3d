"""Reference semantics written as set comprehensions over raw objects.

Deliberately shares no evaluation code with :mod:`d3forge.executor`:
relations are recomputed from coordinates and each node is evaluated by
recursion from the root. Used only to cross-check the interpreter.
"""

from .errors import AmbiguityError, MalformedProgramError
from .executor import execute
from .program import random_program
from .scene import SceneConfig, sample_scene
from .seeds import as_seed

_RELATION_TESTS = {
    "left": lambda o, ref: o.x < ref.x,
    "right": lambda o, ref: o.x > ref.x,
    "front": lambda o, ref: o.y < ref.y,
    "behind": lambda o, ref: o.y > ref.y,
}


def oracle_eval(nodes, objects, k):
    """Value of node ``k``: ('set', frozenset) | ('obj', i) | ('val', field, v) | ('ans', a)."""
    node = nodes[k]
    op = node.op
    n = len(objects)
    ins = [oracle_eval(nodes, objects, i) for i in node.inputs]

    def need(tag, value):
        if value[0] != tag:
            raise MalformedProgramError(f"node {k} ({op}) expected {tag}, got {value[0]}")
        return value

    if op == "scene":
        return ("set", frozenset(range(n)))
    if op.startswith("filter_"):
        field = op[len("filter_"):]
        members = need("set", ins[0])[1]
        return ("set", frozenset(i for i in range(n) if i in members and getattr(objects[i], field) == node.arg))
    if op == "unique":
        members = need("set", ins[0])[1]
        if len(members) != 1:
            raise AmbiguityError(f"node {k}: {len(members)} candidates for unique")
        (only,) = members
        return ("obj", only)
    if op == "relate":
        ref = objects[need("obj", ins[0])[1]]
        test = _RELATION_TESTS[node.arg]
        return ("set", frozenset(i for i in range(n) if objects[i] is not ref and test(objects[i], ref)))
    if op == "count":
        return ("ans", len(need("set", ins[0])[1]))
    if op == "exist":
        return ("ans", len(need("set", ins[0])[1]) > 0)
    if op.startswith("query_"):
        field = op[len("query_"):]
        return ("val", field, getattr(objects[need("obj", ins[0])[1]], field))
    if op.startswith("equal_"):
        field = op[len("equal_"):]
        a, b = need("val", ins[0]), need("val", ins[1])
        if a[1] != field or b[1] != field:
            raise MalformedProgramError(f"node {k}: comparing {a[1]} with {b[1]} under {op}")
        return ("ans", a[2] == b[2])
    raise MalformedProgramError(f"unknown op {op!r}")


def oracle_execute(p, s):
    if not p.nodes:
        raise MalformedProgramError("empty program")
    result = oracle_eval(p.nodes, s.objects, len(p.nodes) - 1)
    if result[0] != "ans":
        raise MalformedProgramError("program root does not produce an answer")
    return result[1]


def outcome(run, p, s):
    """``("ok", answer)`` or ``("error", class name)`` for one execution."""
    try:
        return ("ok", run(p, s))
    except (AmbiguityError, MalformedProgramError) as exc:
        return ("error", type(exc).__name__)


def differential_run(n_scenes, seed, hops=(0, 1, 2, 3), draws=8):
    """Run the interpreter and the oracle on random scenes and programs.

    Scenes have 3 to 10 objects and alternate between both conditions. For
    each scene and hop count, programs are drawn until one resolves under
    the oracle (at most ``draws``); every drawn program is compared, so
    ambiguous programs are checked too. Returns ``(pairs, resolved,
    mismatches)`` where ``mismatches`` lists ``(scene, program, got,
    expected)``.
    """
    seed = as_seed(seed)
    configs = [SceneConfig(3, 10, condition=c) for c in ("A", "B")]
    pairs = resolved = 0
    mismatches = []
    for i in range(n_scenes):
        scene = sample_scene(configs[i % 2], seed.child("scene", i), f"oracle-{i:06d}")
        rng = seed.child("programs", i).rng()
        for hop in hops:
            for _ in range(draws):
                p = random_program(rng, hop, scene=scene)
                got, expected = outcome(execute, p, scene), outcome(oracle_execute, p, scene)
                pairs += 1
                if got != expected:
                    mismatches.append((scene, p, got, expected))
                if expected[0] == "ok":
                    resolved += 1
                    break
    return pairs, resolved, mismatches
