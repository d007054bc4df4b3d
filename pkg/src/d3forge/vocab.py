"""Attribute, relation and question-family vocabularies.

Values follow the CLEVR convention. Everything else in the package reads
them from here, so alternates only need to be changed in one place.
"""

from .errors import VocabularyError

ATTRIBUTE_VALUES = {
    "color": ("gray", "red", "blue", "green", "brown", "purple", "cyan", "yellow"),
    "size": ("small", "large"),
    "shape": ("cube", "sphere", "cylinder"),
    "material": ("rubber", "metal"),
}

# Attribute types as they appear in signatures and bias specs, mapped to
# the object field they read.
ATTR_TYPES = {"Color": "color", "Size": "size", "Shape": "shape", "Material": "material"}
FIELD_TO_TYPE = {field: t for t, field in ATTR_TYPES.items()}

# Canonical filter order inside one chain segment (adjective order in text).
CANONICAL_ATTR_ORDER = ("Size", "Color", "Material", "Shape")

RELATIONS = ("left", "right", "front", "behind")
INVERSE_RELATION = {"left": "right", "right": "left", "front": "behind", "behind": "front"}

FAMILIES = ("Count", "Exist", "EqualColor", "EqualSize", "EqualShape", "EqualMaterial")
EQUAL_FAMILIES = {
    "EqualColor": "Color",
    "EqualSize": "Size",
    "EqualShape": "Shape",
    "EqualMaterial": "Material",
}
BOOLEAN_FAMILIES = frozenset(f for f in FAMILIES if f != "Count")

ROOT_OP_TO_FAMILY = {
    "count": "Count",
    "exist": "Exist",
    "equal_color": "EqualColor",
    "equal_size": "EqualSize",
    "equal_shape": "EqualShape",
    "equal_material": "EqualMaterial",
}
FAMILY_TO_ROOT_OP = {f: op for op, f in ROOT_OP_TO_FAMILY.items()}

FILTER_OPS = {f"filter_{field}": field for field in ATTRIBUTE_VALUES}
QUERY_OPS = {f"query_{field}": field for field in ATTRIBUTE_VALUES}
EQUAL_OPS = {f"equal_{field}": field for field in ATTRIBUTE_VALUES}

OPS = frozenset(
    {"scene", "unique", "relate", "count", "exist"} | set(FILTER_OPS) | set(QUERY_OPS) | set(EQUAL_OPS)
)

MAX_ANSWER = 10
ANSWER_VOCAB = tuple(str(i) for i in range(MAX_ANSWER + 1)) + ("yes", "no")


def answer_to_str(answer):
    if isinstance(answer, bool):
        return "yes" if answer else "no"
    return str(answer)


def answer_from_str(text):
    if text == "yes":
        return True
    if text == "no":
        return False
    if text in ANSWER_VOCAB:
        return int(text)
    raise VocabularyError(f"answer {text!r} is outside the closed vocabulary")
