"""D3 replacement, complexity mixtures, fraction grids and length splits.

All fractions are :class:`fractions.Fraction`; counts come from
largest-remainder apportionment so they always sum to the requested total.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .errors import ConfigError, DataError, InsufficientSourceError
from .seeds import as_seed


def parse_fraction(value):
    """Exact rational from a Fraction, int, or string such as ``"3/10"``.

    Floats are rejected because their binary expansion is not the number
    the user wrote.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool) or isinstance(value, float):
        raise ConfigError(f"fraction {value!r} must be given as an exact 'p/q' string or integer")
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ConfigError(f"cannot parse fraction {value!r}") from exc


def apportion(fractions, total):
    """Integer counts summing to ``total`` by the largest-remainder rule.

    Each share gets ``floor(f * total)``; leftover units go to the largest
    remainders, ties broken towards the earlier index.
    """
    fractions = [parse_fraction(f) for f in fractions]
    if total < 0:
        raise ConfigError("total must be nonnegative")
    if any(f < 0 for f in fractions) or sum(fractions) != 1:
        raise ConfigError(f"fractions {[str(f) for f in fractions]} must be nonnegative and sum to 1")
    quotas = [f * total for f in fractions]
    counts = [q.numerator // q.denominator for q in quotas]
    left = total - sum(counts)
    order = sorted(range(len(quotas)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[:left]:
        counts[i] += 1
    return counts


def _sample_indices(rng, n, k, what):
    if k > n:
        raise InsufficientSourceError(f"{what}: need {k} records, only {n} available")
    return sorted(rng.sample(range(n), k))


def _check_unique_ids(records):
    seen = set()
    for r in records:
        if r.id in seen:
            raise DataError(f"duplicate record id {r.id!r} in mixed dataset")
        seen.add(r.id)


def apply_d3(base, d3src, proportion, seed):
    """Replace ``proportion`` of ``base`` with records drawn from ``d3src``.

    The D3 count is ``proportion * len(base)`` rounded by :func:`apportion`,
    so an exact half goes to the base side. Both the kept base records and
    the D3 records are drawn uniformly without replacement; the result lists
    kept base records in base order followed by D3 records in source order.
    """
    p = parse_fraction(proportion)
    if not 0 <= p <= 1:
        raise ConfigError(f"proportion {p} is outside [0, 1]")
    base, d3src = list(base), list(d3src)
    n_base, n_d3 = apportion([1 - p, p], len(base))
    seed = as_seed(seed)
    keep = _sample_indices(seed.child("d3-base").rng(), len(base), n_base, "base set")
    draw = _sample_indices(seed.child("d3-draw").rng(), len(d3src), n_d3, "D3 source")
    out = [base[i] for i in keep] + [d3src[i] for i in draw]
    _check_unique_ids(out)
    return out


@dataclass(frozen=True)
class MixturePlan:
    """Sources as ``(name, fraction)`` pairs; fractions sum to exactly 1."""

    sources: tuple
    total: int
    seed: int = 0

    def __post_init__(self):
        sources = tuple((str(name), parse_fraction(f)) for name, f in self.sources)
        object.__setattr__(self, "sources", sources)
        if not sources:
            raise ConfigError("a mixture plan needs at least one source")
        if len({name for name, _ in sources}) != len(sources):
            raise ConfigError("mixture sources must have distinct names")
        if any(f < 0 for _, f in sources) or sum(f for _, f in sources) != 1:
            raise ConfigError("mixture fractions must be nonnegative and sum to exactly 1")
        if not isinstance(self.total, int) or self.total <= 0:
            raise ConfigError("mixture total must be a positive integer")

    @property
    def counts(self):
        return apportion([f for _, f in self.sources], self.total)

    def to_json(self):
        return {
            "total": self.total,
            "seed": self.seed,
            "sources": [{"name": n, "fraction": str(f)} for n, f in self.sources],
        }

    @classmethod
    def from_json(cls, data):
        unknown = set(data) - {"total", "seed", "sources"}
        if unknown:
            raise ConfigError(f"unknown mixture plan keys {sorted(unknown)}")
        sources = []
        for src in data.get("sources", []):
            if set(src) != {"name", "fraction"}:
                raise ConfigError(f"mixture source needs exactly 'name' and 'fraction': {src!r}")
            sources.append((src["name"], parse_fraction(src["fraction"])))
        return cls(tuple(sources), data.get("total"), data.get("seed", 0))


def build_mixture(plan, pools, seed=None):
    """Draw each source's apportioned count uniformly without replacement.

    Records are emitted source by source in plan order, each block in pool
    order. ``seed`` overrides the plan's own seed.
    """
    seed = as_seed(plan.seed if seed is None else seed)
    out = []
    for (name, _), k in zip(plan.sources, plan.counts):
        if k == 0:
            continue
        if name not in pools:
            raise InsufficientSourceError(f"no pool named {name!r}")
        pool = list(pools[name])
        picked = _sample_indices(seed.child("mix-" + name).rng(), len(pool), k, name)
        out.extend(pool[i] for i in picked)
    _check_unique_ids(out)
    return out


def fraction_grid(k, step):
    """All length-``k`` vectors of multiples of ``step`` summing to 1, ascending."""
    step = parse_fraction(step)
    if k < 1:
        raise ConfigError("k must be positive")
    if step <= 0 or (1 / step).denominator != 1:
        raise ConfigError(f"1/step must be a positive integer, got step {step}")
    m = int(1 / step)
    out = []
    # stars and bars: k - 1 bar positions among m + k - 1 slots
    for bars in combinations(range(m + k - 1), k - 1):
        edges = (-1,) + bars + (m + k - 1,)
        out.append(tuple(step * (edges[i + 1] - edges[i] - 1) for i in range(k)))
    return sorted(out)


def program_length(record):
    """Operations in the record's program, not counting ``scene`` nodes."""
    return sum(1 for n in record.program.nodes if n.op != "scene")


@dataclass
class LengthSplit:
    short: list
    base: list
    long: list
    out_of_band: list

    def sizes(self):
        return {k: len(getattr(self, k)) for k in ("short", "base", "long", "out_of_band")}


def length_split(ds, short_max=2, base_exact=3, long_min=4, long_max=9):
    """Partition records into short (1..short_max), base and long bands.

    Records longer than ``long_max`` or with no operations at all land in
    ``out_of_band``.
    """
    if not short_max < base_exact < long_min <= long_max:
        raise ConfigError("length bands must satisfy short_max < base_exact < long_min <= long_max")
    split = LengthSplit([], [], [], [])
    for r in ds:
        n = program_length(r)
        if 1 <= n <= short_max:
            split.short.append(r)
        elif n == base_exact:
            split.base.append(r)
        elif long_min <= n <= long_max:
            split.long.append(r)
        else:
            split.out_of_band.append(r)
    return split
