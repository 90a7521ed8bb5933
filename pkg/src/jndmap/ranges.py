"""Sub-quality range decomposition of the VMAF axis and pair assignment.

A decomposition splits (lo, 100] into contiguous half-open intervals
``(lo, hi]``.  Three strategies are provided:

* ``balanced`` -- boundaries at empirical quantiles so each range holds the
  same number of stimuli (+/- 1).  Ties go to the lower range.  The lowest
  bound sits an epsilon below the smallest VMAF so that stimulus is covered
  despite the exclusive lower edge; the top bound is forced to 100.
* ``fixed_width`` -- equal-width bins over (0, 100].
* ``explicit`` -- caller-supplied boundaries, kept verbatim.

A pair belongs to every range containing either of its endpoints, so a pair
spanning a boundary is counted in both ranges (and the total pair multiplicity
lies between n_pairs and 2*n_pairs).
"""

from __future__ import annotations

import json
import logging
import math
import warnings
from bisect import bisect_left
from dataclasses import dataclass, replace
from pathlib import Path

from .corpus import Corpus
from .significance import RatedPair

log = logging.getLogger(__name__)

#: Margin below the smallest VMAF used for the lowest balanced bound.
LOW_EDGE_EPSILON = 1e-9

STRATEGIES = ("balanced", "fixed_width", "explicit")


def _fmt_bound(value: float, digits: int = 6) -> str:
    text = f"{value:.{digits}g}"
    return text


@dataclass(frozen=True)
class SubQualityRange:
    lo: float  # exclusive
    hi: float  # inclusive
    range_id: str
    pair_refs: tuple[str, ...] = ()

    def contains(self, vmaf: float) -> bool:
        return self.lo < vmaf <= self.hi


@dataclass(frozen=True)
class Decomposition:
    strategy: str
    ranges: tuple[SubQualityRange, ...]

    def __post_init__(self) -> None:
        for prev, nxt in zip(self.ranges, self.ranges[1:]):
            if prev.hi != nxt.lo:
                raise ValueError(
                    f"ranges not contiguous: {prev.range_id} then {nxt.range_id}"
                )
    @property
    def bounds(self) -> list[float]:
        return [self.ranges[0].lo] + [r.hi for r in self.ranges]

    @property
    def coverage(self) -> tuple[float, float]:
        return self.ranges[0].lo, self.ranges[-1].hi

    def range_ids(self) -> list[str]:
        return [r.range_id for r in self.ranges]

    def find_range(self, vmaf: float) -> SubQualityRange:
        """The unique range containing ``vmaf``; KeyError outside coverage."""
        lo, hi = self.coverage
        if not lo < vmaf <= hi:
            raise KeyError(f"vmaf {vmaf} outside coverage ({lo}, {hi}]")
        idx = bisect_left([r.hi for r in self.ranges], vmaf)
        return self.ranges[idx]

    def by_id(self, range_id: str) -> SubQualityRange:
        for r in self.ranges:
            if r.range_id == range_id:
                return r
        raise KeyError(f"unknown range {range_id!r}")

    def pairs_in_range(self, range_id: str, pairs: list[RatedPair]) -> list[RatedPair]:
        refs = set(self.by_id(range_id).pair_refs)
        return [p for p in pairs if p.pair_id in refs]


def _build(strategy: str, bounds: list[float]) -> Decomposition:
    ids = [f"({_fmt_bound(lo)},{_fmt_bound(hi)}]" for lo, hi in zip(bounds, bounds[1:])]
    digits = 6
    while len(set(ids)) != len(ids) and digits < 17:
        digits += 2
        ids = [
            f"({_fmt_bound(lo, digits)},{_fmt_bound(hi, digits)}]"
            for lo, hi in zip(bounds, bounds[1:])
        ]
    ranges = tuple(
        SubQualityRange(lo=lo, hi=hi, range_id=rid)
        for lo, hi, rid in zip(bounds, bounds[1:], ids)
    )
    return Decomposition(strategy=strategy, ranges=ranges)


def decompose_balanced(corpus: Corpus, k: int, balance: str = "stimuli") -> Decomposition:
    """Split the VMAF axis into ``k`` ranges with near-equal stimulus counts.

    ``balance="pairs"`` weights each stimulus by the number of within-content
    pairs it participates in, approximately equalizing pair membership
    instead.
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if balance not in ("stimuli", "pairs"):
        raise ValueError(f"balance must be 'stimuli' or 'pairs', got {balance!r}")
    stimuli = sorted(corpus.stimuli, key=lambda s: s.vmaf)
    if not stimuli:
        raise ValueError("corpus has no stimuli")
    values = [s.vmaf for s in stimuli]
    if len(set(values)) < k:
        raise ValueError(
            f"need at least {k} distinct VMAF values, got {len(set(values))}"
        )
    if balance == "stimuli":
        weights = [1.0] * len(values)
    else:
        counts = {c: len([s for s in stimuli if s.content_id == c]) for c in corpus.contents()}
        weights = [float(counts[s.content_id] - 1) for s in stimuli]

    total = sum(weights)
    cuts = []
    acc = 0.0
    target_idx = 1
    for value, weight in zip(values, weights):
        acc += weight
        # A boundary lands on the last value at or past each weight quantile.
        while target_idx < k and acc >= target_idx * total / k - 1e-12:
            cuts.append(value)
            target_idx += 1
    inner = cuts[: k - 1]
    bounds = [values[0] - LOW_EDGE_EPSILON] + inner + [100.0]
    for lo, hi in zip(bounds, bounds[1:]):
        if not lo < hi:
            raise ValueError(
                f"tied VMAF values prevent {k} non-empty balanced ranges "
                f"(boundary collision at {lo})"
            )
        if not any(lo < v <= hi for v in values):
            raise ValueError(
                f"tied VMAF values leave balanced range ({lo},{hi}] without stimuli"
            )
    return _build("balanced", bounds)


def decompose_fixed(width: float, corpus: Corpus | None = None) -> Decomposition:
    """Equal-width ranges covering (0, 100]; the top range is clipped at 100."""
    if not width > 0:
        raise ValueError(f"width must be positive, got {width}")
    n = math.ceil(100.0 / width)
    bounds = [min(i * width, 100.0) for i in range(n)] + [100.0]
    decomp = _build("fixed_width", bounds)
    if corpus is not None:
        empty = [
            r.range_id
            for r in decomp.ranges
            if not any(r.contains(s.vmaf) for s in corpus.stimuli)
        ]
        if empty:
            warnings.warn(
                f"{len(empty)} fixed-width range(s) hold no stimuli: {', '.join(empty)}",
                stacklevel=2,
            )
    return decomp


def decompose_explicit(bounds: list[float]) -> Decomposition:
    """Ranges from caller-supplied boundaries, e.g. [30, 79, 86, 90, 95, 100]."""
    if len(bounds) < 2:
        raise ValueError("need at least two boundaries")
    if any(not b2 > b1 for b1, b2 in zip(bounds, bounds[1:])):
        raise ValueError(f"bounds must be strictly increasing, got {bounds}")
    return _build("explicit", [float(b) for b in bounds])


def assign_pairs(
    pairs: list[RatedPair], decomp: Decomposition, corpus: Corpus
) -> Decomposition:
    """Attach pair ids to every range containing either pair endpoint.

    Idempotent and independent of the order of ``pairs``; re-assignment
    replaces any previous refs.
    """
    refs: dict[str, set[str]] = {r.range_id: set() for r in decomp.ranges}
    for pair in pairs:
        for recipe in (pair.recipe_x, pair.recipe_y):
            vmaf = corpus.stimulus(pair.content_id, recipe).vmaf
            try:
                target = decomp.find_range(vmaf)
            except KeyError:
                raise ValueError(
                    f"stimulus {pair.content_id}/{recipe} (vmaf {vmaf}) lies outside "
                    f"the decomposition coverage {decomp.coverage}"
                ) from None
            refs[target.range_id].add(pair.pair_id)
    new_ranges = tuple(
        replace(r, pair_refs=tuple(sorted(refs[r.range_id]))) for r in decomp.ranges
    )
    assigned = sum(len(r.pair_refs) for r in new_ranges)
    log.info(
        "assigned %d pairs with total multiplicity %d across %d ranges",
        len(pairs),
        assigned,
        len(new_ranges),
    )
    return Decomposition(strategy=decomp.strategy, ranges=new_ranges)


# -- serialization ----------------------------------------------------------


def decomposition_to_json_dict(decomp: Decomposition) -> dict:
    return {
        "strategy": decomp.strategy,
        "bounds": decomp.bounds,
        "assignments": {r.range_id: list(r.pair_refs) for r in decomp.ranges},
    }


def decomposition_from_json_dict(data: dict) -> Decomposition:
    decomp = _build(data["strategy"], [float(b) for b in data["bounds"]])
    assignments = data.get("assignments", {})
    ranges = []
    for r in decomp.ranges:
        refs = assignments.get(r.range_id, [])
        ranges.append(replace(r, pair_refs=tuple(refs)))
    return Decomposition(strategy=decomp.strategy, ranges=tuple(ranges))


def write_ranges_json(decomp: Decomposition, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(decomposition_to_json_dict(decomp), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def read_ranges_json(path: str | Path) -> Decomposition:
    return decomposition_from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))
