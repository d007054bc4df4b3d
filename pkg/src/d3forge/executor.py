"""Primary interpreter for programs over scenes."""

from dataclasses import dataclass

from .errors import AmbiguityError, MalformedProgramError
from .scene import derive_relations
from .vocab import EQUAL_OPS, FILTER_OPS, MAX_ANSWER, QUERY_OPS


@dataclass(frozen=True)
class ObjectRef:
    index: int


@dataclass(frozen=True)
class AttrValue:
    field: str
    value: str


def _expect(value, kind, k, op):
    if not isinstance(value, kind):
        raise MalformedProgramError(f"node {k} ({op}) got {type(value).__name__}, expected {kind.__name__}")
    return value


def trace(p, s, relations=None):
    """Evaluate every node in order and return the list of node values."""
    objs = s.objects
    rel = relations if relations is not None else derive_relations(s)
    values = []
    for k, node in enumerate(p.nodes):
        op = node.op
        args = [values[i] for i in node.inputs]
        if op == "scene":
            out = frozenset(range(len(objs)))
        elif op in FILTER_OPS:
            field = FILTER_OPS[op]
            src = _expect(args[0], frozenset, k, op)
            out = frozenset(i for i in src if getattr(objs[i], field) == node.arg)
        elif op == "unique":
            src = _expect(args[0], frozenset, k, op)
            if len(src) != 1:
                raise AmbiguityError(f"node {k}: unique over {len(src)} objects")
            out = ObjectRef(next(iter(src)))
        elif op == "relate":
            ref = _expect(args[0], ObjectRef, k, op)
            out = frozenset(rel[node.arg][ref.index])
        elif op == "count":
            out = len(_expect(args[0], frozenset, k, op))
            if out > MAX_ANSWER:
                raise MalformedProgramError(f"count {out} exceeds the answer range")
        elif op == "exist":
            out = bool(_expect(args[0], frozenset, k, op))
        elif op in QUERY_OPS:
            ref = _expect(args[0], ObjectRef, k, op)
            field = QUERY_OPS[op]
            out = AttrValue(field, getattr(objs[ref.index], field))
        elif op in EQUAL_OPS:
            a = _expect(args[0], AttrValue, k, op)
            b = _expect(args[1], AttrValue, k, op)
            if a.field != EQUAL_OPS[op] or b.field != EQUAL_OPS[op]:
                raise MalformedProgramError(f"node {k}: {op} compares {a.field} with {b.field}")
            out = a.value == b.value
        else:
            raise MalformedProgramError(f"node {k}: unknown op {op!r}")
        values.append(out)
    return values


def execute(p, s):
    if not p.nodes:
        raise MalformedProgramError("empty program")
    answer = trace(p, s)[-1]
    if not isinstance(answer, (bool, int)):
        raise MalformedProgramError(f"program root yields {type(answer).__name__}, not an answer")
    return answer
