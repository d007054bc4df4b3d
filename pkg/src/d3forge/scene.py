"""Symbolic scenes: attributed objects on a ground plane.

Relations are axis-aligned comparisons of ground-plane coordinates. ``x``
grows to the right and ``y`` grows away from the camera, so object ``i``
is left of ``j`` when ``x_i < x_j`` and in front of ``j`` when
``y_i < y_j``.
"""

from dataclasses import dataclass, field
from functools import cached_property

from .errors import AmbiguityError, CapacityError, ConfigError, SchemaError
from .seeds import as_seed
from .vocab import ATTRIBUTE_VALUES, RELATIONS

COLORS = ATTRIBUTE_VALUES["color"]
SHAPES = ATTRIBUTE_VALUES["shape"]

# CoGenT-style shape/color pairings. Spheres are unrestricted in both.
CONDITION_PAIRINGS = {
    "A": {
        "cube": ("gray", "blue", "brown", "yellow"),
        "cylinder": ("red", "green", "purple", "cyan"),
        "sphere": COLORS,
    },
    "B": {
        "cube": ("red", "green", "purple", "cyan"),
        "cylinder": ("gray", "blue", "brown", "yellow"),
        "sphere": COLORS,
    },
}

DEFAULT_MARGIN = 0.25
DEFAULT_HALF_WIDTH = 3.0
MAX_ATTEMPTS = 10_000
COORD_DIGITS = 4


@dataclass(frozen=True)
class ObjectSpec:
    color: str
    size: str
    shape: str
    material: str
    x: float
    y: float

    def __post_init__(self):
        for name, values in ATTRIBUTE_VALUES.items():
            if getattr(self, name) not in values:
                raise SchemaError(f"{name} {getattr(self, name)!r} not in {values}")


@dataclass(frozen=True)
class Scene:
    id: str
    condition: str
    objects: tuple

    def __post_init__(self):
        if self.condition not in CONDITION_PAIRINGS:
            raise SchemaError(f"unknown scene condition {self.condition!r}")
        object.__setattr__(self, "objects", tuple(self.objects))

    def __len__(self):
        return len(self.objects)

    @cached_property
    def masks(self):
        """Bitmask view of the scene used by the question generator."""
        return SceneMasks.build(self)


@dataclass(frozen=True)
class SceneConfig:
    min_objects: int = 3
    max_objects: int = 5
    margin: float = DEFAULT_MARGIN
    arena_half_width: float = DEFAULT_HALF_WIDTH
    condition: str = "A"
    pairing_table: dict = None
    max_attempts: int = MAX_ATTEMPTS

    def __post_init__(self):
        if self.min_objects < 1 or self.min_objects > self.max_objects:
            raise ConfigError(f"object range [{self.min_objects}, {self.max_objects}] is invalid")
        if self.margin <= 0 or self.arena_half_width <= 0:
            raise ConfigError("margin and arena_half_width must be positive")
        if self.condition not in CONDITION_PAIRINGS:
            raise ConfigError(f"unknown condition {self.condition!r}")
        table = self.pairing_table or CONDITION_PAIRINGS[self.condition]
        for shape in SHAPES:
            colors = table.get(shape)
            if not colors or any(c not in COLORS for c in colors):
                raise ConfigError(f"pairing table for {shape!r} is missing or has unknown colors")
        object.__setattr__(self, "pairing_table", {s: tuple(table[s]) for s in SHAPES})


@dataclass
class RelationMap:
    """``left[j]`` holds the indices of objects left of object ``j``; same for the rest."""

    left: dict = field(default_factory=dict)
    right: dict = field(default_factory=dict)
    front: dict = field(default_factory=dict)
    behind: dict = field(default_factory=dict)

    def __getitem__(self, relation):
        if relation not in RELATIONS:
            raise KeyError(relation)
        return getattr(self, relation)


def _round(value):
    return round(value, COORD_DIGITS) + 0.0


def _separated(x, y, placed, margin):
    # 1e-9 absorbs float noise from rounding to 4 decimals
    for px, py in placed:
        if abs(x - px) < margin - 1e-9 or abs(y - py) < margin - 1e-9:
            return False
    return True


def sample_scene(config, seed, scene_id="scene"):
    rng = as_seed(seed).rng()
    n = rng.randint(config.min_objects, config.max_objects)
    hw = config.arena_half_width
    placed = []
    attempts = 0
    while len(placed) < n:
        attempts += 1
        if attempts > config.max_attempts:
            raise CapacityError(
                f"could not place {n} objects with margin {config.margin} "
                f"in arena half-width {hw} within {config.max_attempts} attempts"
            )
        x = _round(rng.uniform(-hw, hw))
        y = _round(rng.uniform(-hw, hw))
        if _separated(x, y, placed, config.margin):
            placed.append((x, y))
    objects = []
    for x, y in placed:
        shape = rng.choice(SHAPES)
        objects.append(
            ObjectSpec(
                color=rng.choice(config.pairing_table[shape]),
                size=rng.choice(ATTRIBUTE_VALUES["size"]),
                shape=shape,
                material=rng.choice(ATTRIBUTE_VALUES["material"]),
                x=x,
                y=y,
            )
        )
    return Scene(scene_id, config.condition, tuple(objects))


def sample_scenes(config, seed, n, prefix="s"):
    seed = as_seed(seed)
    width = max(6, len(str(n - 1)))
    return [
        sample_scene(config, seed.child("scene", i), scene_id=f"{prefix}{i:0{width}d}")
        for i in range(n)
    ]


def check_pairing(scene, pairing_table=None):
    """Return the indices of objects that break the condition's shape/color pairing."""
    table = pairing_table or CONDITION_PAIRINGS[scene.condition]
    return [i for i, o in enumerate(scene.objects) if o.color not in table[o.shape]]


def derive_relations(scene, margin=0.0):
    objs = scene.objects
    rel = RelationMap()
    for r in RELATIONS:
        for j in range(len(objs)):
            rel[r][j] = set()
    for i, a in enumerate(objs):
        for j, b in enumerate(objs):
            if i == j:
                continue
            dx, dy = abs(a.x - b.x), abs(a.y - b.y)
            if dx == 0 or dy == 0 or dx < margin - 1e-9 or dy < margin - 1e-9:
                raise AmbiguityError(f"objects {i} and {j} are closer than margin {margin} on an axis")
            if a.x < b.x:
                rel.left[j].add(i)
            else:
                rel.right[j].add(i)
            if a.y < b.y:
                rel.front[j].add(i)
            else:
                rel.behind[j].add(i)
    for r in RELATIONS:
        setattr(rel, r, {j: frozenset(members) for j, members in rel[r].items()})
    return rel


class SceneMasks:
    """Attribute and relation sets of one scene encoded as integer bitmasks."""

    __slots__ = ("n", "all", "attr", "rel", "values", "relations", "cache")

    @classmethod
    def build(cls, scene):
        self = cls()
        self.cache = {}
        self.n = len(scene.objects)
        self.all = (1 << self.n) - 1
        self.values = {f: tuple(getattr(o, f) for o in scene.objects) for f in ATTRIBUTE_VALUES}
        self.attr = {f: {v: 0 for v in vals} for f, vals in ATTRIBUTE_VALUES.items()}
        for i, o in enumerate(scene.objects):
            for f in ATTRIBUTE_VALUES:
                self.attr[f][getattr(o, f)] |= 1 << i
        relations = self.relations = derive_relations(scene)
        self.rel = {
            r: tuple(sum(1 << i for i in relations[r][j]) for j in range(self.n)) for r in RELATIONS
        }
        return self
