"""Observer screening for DCR panels (ITU-R BT.500 annex-style outlier test).

For every rated stimulus the panel mean, standard deviation, and kurtosis
coefficient are computed; scores falling outside mean +/- 2*sigma (for
roughly normal score distributions, 2 <= beta2 <= 4) or mean +/- sqrt(20)*sigma
(otherwise) are tallied per observer as P (above) / Q (below).  An observer is
rejected when they deviate often, (P+Q)/N > 0.05, *and* in both directions,
|P-Q|/(P+Q) < 0.3 -- i.e. erratic rather than consistently biased.

Kurtosis uses the population estimator beta2 = m4 / m2**2; the deviation
bounds use the sample (N-1) standard deviation.  A zero-variance stimulus
collapses both bounds onto the mean, so any deviating score counts.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Corpus

log = logging.getLogger(__name__)

#: Methods accepted by :func:`screen`.  Only BT.500 is implemented; the other
#: two are recognized no-ops kept so configs can name them explicitly.
METHODS = ("bt500", "vqeg_hdtv_annex_i", "bt1788", "none")

REJECT_FREQUENCY = 0.05  # minimum fraction of deviating judgements
REJECT_BALANCE = 0.3  # |P-Q|/(P+Q) must be below this (deviations both ways)


@dataclass(frozen=True)
class ObserverStats:
    p_count: int
    q_count: int
    ratio1: float  # (P+Q) / judgements
    ratio2: float  # |P-Q| / (P+Q), 0.0 when P+Q == 0


@dataclass(frozen=True)
class ScreeningReport:
    method: str
    removed_observers: frozenset[str]
    per_observer_stats: dict[str, ObserverStats]

    def to_json_dict(self) -> dict:
        return {
            "method": self.method,
            "removed": sorted(self.removed_observers),
            "stats": {
                obs: {
                    "p_count": st.p_count,
                    "q_count": st.q_count,
                    "ratio1": st.ratio1,
                    "ratio2": st.ratio2,
                }
                for obs, st in sorted(self.per_observer_stats.items())
            },
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ScreeningReport":
        stats = {
            obs: ObserverStats(
                p_count=int(st["p_count"]),
                q_count=int(st["q_count"]),
                ratio1=float(st["ratio1"]),
                ratio2=float(st["ratio2"]),
            )
            for obs, st in data.get("stats", {}).items()
        }
        return cls(
            method=data.get("method", "bt500"),
            removed_observers=frozenset(data.get("removed", [])),
            per_observer_stats=stats,
        )


def screen(corpus: Corpus, method: str = "bt500") -> ScreeningReport:
    """Dispatch on ``method``; unimplemented methods return an empty report."""
    if method not in METHODS:
        raise ValueError(f"unknown screening method {method!r}; expected one of {METHODS}")
    if method == "bt500":
        return screen_bt500(corpus)
    if method != "none":
        log.warning("screening method %r is a recognized no-op; nobody removed", method)
    stats = {obs: ObserverStats(0, 0, 0.0, 0.0) for obs in corpus.observers()}
    return ScreeningReport(method=method, removed_observers=frozenset(), per_observer_stats=stats)


def screen_bt500(corpus: Corpus) -> ScreeningReport:
    """Apply the BT.500-style outlier test over every rated stimulus."""
    p_counts: dict[str, int] = {obs: 0 for obs in corpus.observers()}
    q_counts: dict[str, int] = {obs: 0 for obs in corpus.observers()}
    judgements: dict[str, int] = {obs: 0 for obs in corpus.observers()}

    for content_id, recipe_id in corpus.rated_keys():
        group = corpus.ratings_for(content_id, recipe_id)
        if len(group) < 2:
            raise ValueError(
                f"stimulus {content_id}/{recipe_id} has {len(group)} rating(s); "
                "screening needs at least 2 per rated stimulus"
            )
        scores = np.array([r.score for r in group], dtype=float)
        mean = float(scores.mean())
        centered = scores - mean
        m2 = float(np.mean(centered**2))
        if m2 == 0.0:
            upper = lower = mean
        else:
            m4 = float(np.mean(centered**4))
            beta2 = m4 / m2**2
            sigma = float(scores.std(ddof=1))
            width = 2.0 * sigma if 2.0 <= beta2 <= 4.0 else math.sqrt(20.0) * sigma
            upper = mean + width
            lower = mean - width
        for rating in group:
            judgements[rating.observer_id] += 1
            if rating.score > upper:
                p_counts[rating.observer_id] += 1
            elif rating.score < lower:
                q_counts[rating.observer_id] += 1

    removed = set()
    stats = {}
    for obs in sorted(judgements):
        p, q, n = p_counts[obs], q_counts[obs], judgements[obs]
        ratio1 = (p + q) / n if n else 0.0
        ratio2 = abs(p - q) / (p + q) if (p + q) else 0.0
        stats[obs] = ObserverStats(p, q, ratio1, ratio2)
        if ratio1 > REJECT_FREQUENCY and ratio2 < REJECT_BALANCE:
            removed.add(obs)
    if removed:
        log.info("screening removed %d observer(s): %s", len(removed), sorted(removed))
    return ScreeningReport(
        method="bt500", removed_observers=frozenset(removed), per_observer_stats=stats
    )


def apply_screening(corpus: Corpus, report: ScreeningReport) -> Corpus:
    """Return a corpus with all ratings from removed observers dropped.

    Stimuli and truth rows are untouched; removing every observer simply
    leaves an unrated corpus.
    """
    if not report.removed_observers:
        return corpus
    kept = tuple(r for r in corpus.ratings if r.observer_id not in report.removed_observers)
    return Corpus(stimuli=corpus.stimuli, ratings=kept, truths=corpus.truths)


def write_report(report: ScreeningReport, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def read_report(path: str | Path) -> ScreeningReport:
    return ScreeningReport.from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))
