"""Small builders shared by the test modules."""

from d3forge.program import chain_program, compare_program, signature_of, hop_count
from d3forge.questions import QuestionRecord
from d3forge.scene import ObjectSpec, Scene


def obj(color="gray", size="small", shape="sphere", material="rubber", x=0.0, y=0.0):
    return ObjectSpec(color, size, shape, material, x, y)


def scene(*objects, condition="A", scene_id="t"):
    return Scene(scene_id, condition, tuple(objects))


def record(program, answer, rid="q", source_set="test", text="?", scene_id="t"):
    return QuestionRecord(rid, scene_id, text, program, answer, signature_of(program), hop_count(program), source_set)


def count_program(*pairs):
    return chain_program([list(pairs)], [], "count")


def exist_program(*pairs):
    return chain_program([list(pairs)], [], "exist")


def many_records(n, prefix="r", source_set="test", program=None):
    program = program or count_program(("color", "red"))
    sig, hop = signature_of(program), hop_count(program)
    return [QuestionRecord(f"{prefix}{i:06d}", "t", "?", program, 0, sig, hop, source_set) for i in range(n)]


__all__ = ["obj", "scene", "record", "count_program", "exist_program", "many_records", "compare_program"]
