"""Building the named biased, D3 and test sets."""

from collections import Counter, defaultdict

from .bias import default_registry
from .errors import InsufficientSourceError, UsageError, UnsatisfiableError
from .grammar import DEFAULT_SYNONYM_TABLE
from .questions import instantiate, templates_for
from .scene import SceneConfig, sample_scenes
from .seeds import as_seed

DEFAULT_BAND = (0.40, 0.60)
DEFAULT_COUNT_MAX_SHARE = 0.50
QUESTIONS_PER_SCENE = 10
MIN_POOL = 100


def scene_pool(spec, seed, n, **config):
    """Scenes for ``spec``'s condition and object range.

    The stream depends only on (condition, object range), so every named
    set with the same scene requirements draws from one shared pool.
    """
    lo, hi = spec.objects
    cfg = SceneConfig(min_objects=lo, max_objects=hi, condition=spec.condition, **config)
    label = f"scenes-{spec.condition}-{lo}-{hi}"
    return sample_scenes(cfg, as_seed(seed).child(label), n, prefix=f"{spec.condition}{lo}-{hi}-")


def default_pool_size(budget):
    return max(MIN_POOL, -(-budget // QUESTIONS_PER_SCENE))


class AnswerBalancer:
    """Keeps each family's label distribution inside a band.

    Families in ``boolean`` aim for a yes-rate inside ``band``. A Count
    answer is rejected when it would push its value past
    ``count_max_share`` while that value already leads all others. Other
    families are not balanced. Neither rule
    applies before ``warmup`` records of the family exist.
    """

    def __init__(self, band=DEFAULT_BAND, count_max_share=DEFAULT_COUNT_MAX_SHARE, warmup=20,
                 boolean=("Exist",)):
        self.boolean = frozenset(boolean)
        self.band = band
        self.count_max_share = count_max_share
        self.warmup = warmup
        self.counts = defaultdict(Counter)

    def target(self, family, rng):
        """A forced answer when the family's yes-rate is about to leave the band."""
        if family not in self.boolean:
            return None
        c = self.counts[family]
        n = c[True] + c[False]
        if n < self.warmup:
            return None
        lo, hi = self.band
        if (c[True] + 1) / (n + 1) > hi:
            return False
        if c[True] / (n + 1) < lo:
            return True
        return None

    def accept(self, family, answer):
        c = self.counts[family]
        n = sum(c.values())
        if n < self.warmup:
            return True
        if family in self.boolean:
            lo, hi = self.band
            rate = (c[True] + (answer is True)) / (n + 1)
            current = c[True] / n
            # inside the band, or at least moving towards it
            return lo <= rate <= hi or (current < lo and answer is True) or (current > hi and answer is False)
        if family == "Count":
            # a value tied with the leader may always be added; otherwise
            # two reachable values alone would block each other at 50%
            leader = max((k for v, k in c.items() if v != answer), default=0)
            return (c[answer] + 1) / (n + 1) <= self.count_max_share or c[answer] <= leader
        return True

    def add(self, family, answer):
        self.counts[family][answer] += 1


def build_named_set(name, scenes, budget, seed, registry=None, syn=DEFAULT_SYNONYM_TABLE,
                    band=DEFAULT_BAND, count_max_share=DEFAULT_COUNT_MAX_SHARE, max_draws=2000):
    """Generate ``budget`` conformant records for registry entry ``name``.

    Only scenes whose condition matches the entry's are used. Each record
    has its own seed stream, so a record depends on the seed, its index and
    the balancing state built by the records before it.
    """
    registry = registry or default_registry()
    if name not in registry:
        raise UsageError(f"unknown set {name!r}; known: {', '.join(registry)}")
    spec = registry[name]
    pool = [s for s in scenes if s.condition == spec.condition]
    if not pool:
        raise InsufficientSourceError(f"{name} needs condition-{spec.condition} scenes; none were given")
    templates = defaultdict(list)
    for t in templates_for(spec):
        templates[t.family].append(t)
    families = sorted(templates)
    seed = as_seed(seed)
    balancer = AnswerBalancer(band, count_max_share)
    width = max(6, len(str(budget - 1)))
    records = []
    for i in range(budget):
        rng = seed.child("record", i).rng()
        family = families[rng.randrange(len(families))]
        for draw in range(max_draws):
            t = rng.choice(templates[family])
            scene = pool[rng.randrange(len(pool))]
            try:
                rec = instantiate(t, scene, spec, rng, f"{name}-{i:0{width}d}",
                                  target=balancer.target(family, rng), syn=syn)
            except UnsatisfiableError:
                continue
            if balancer.accept(family, rec.answer):
                break
        else:
            raise InsufficientSourceError(f"{name}: record {i} not found after {max_draws} scene draws")
        balancer.add(family, rec.answer)
        records.append(rec)
    return records


def build_named_set_with_scenes(name, budget, seed, registry=None, n_scenes=None, scene_config=None,
                                **kwargs):
    """Sample the scene pool for ``name`` and build the set; returns (scenes, records).

    ``scene_config`` holds extra SceneConfig fields such as ``margin``.
    """
    registry = registry or default_registry()
    if name not in registry:
        raise UsageError(f"unknown set {name!r}; known: {', '.join(registry)}")
    seed = as_seed(seed)
    scenes = scene_pool(registry[name], seed, n_scenes or default_pool_size(budget), **(scene_config or {}))
    return scenes, build_named_set(name, scenes, budget, seed.child("set-" + name), registry, **kwargs)
