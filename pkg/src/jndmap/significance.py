"""Pair formation and two-sample significance labelling of DCR rating vectors.

Every unordered pair of rated renditions of a content is tested for a mean
opinion difference.  The default test is Welch's unequal-variance t-test with
the two-sided p-value computed through the regularized incomplete beta
function, p = I_x(df/2, 1/2) with x = df / (df + t**2).  Pooled-variance
("student") and paired variants are available behind the same interface.

The degenerate case where *both* vectors have zero variance falls outside the
t formulas and is resolved by definition: p = 1 for equal means, p = 0
otherwise.
"""

from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import special

from . import tableio
from .corpus import Corpus, ratings_vector
from .errors import CorpusError

log = logging.getLogger(__name__)

PAIR_COLUMNS = ["content_id", "recipe_x", "recipe_y", "delta_obj", "p_value", "sig"]

TESTS = ("welch", "student", "paired")


@dataclass(frozen=True)
class TestResult:
    t: float
    df: float
    p: float
    sig: int


@dataclass(frozen=True)
class RatedPair:
    content_id: str
    recipe_x: str
    recipe_y: str
    delta_obj: float
    p_value: float
    sig: int

    @property
    def pair_id(self) -> str:
        return f"{self.content_id}:{self.recipe_x}:{self.recipe_y}"


def _two_sided_p(t: float, df: float) -> float:
    # Student-t survival mass in both tails via the regularized incomplete
    # beta function (continued-fraction evaluation, accurate to ~1e-14).
    if t == 0.0:
        return 1.0
    x = df / (df + t * t)
    return float(special.betainc(0.5 * df, 0.5, x))


def welch_t_test(a: list[int] | list[float], b: list[int] | list[float], alpha: float = 0.05) -> TestResult:
    """Welch's unequal-variance two-sample t-test, two-sided."""
    _check_inputs(a, b, alpha)
    xa = np.asarray(a, dtype=float)
    xb = np.asarray(b, dtype=float)
    na, nb = len(xa), len(xb)
    va = float(xa.var(ddof=1))
    vb = float(xb.var(ddof=1))
    diff = float(xa.mean() - xb.mean())
    if va == 0.0 and vb == 0.0:
        return _degenerate(diff, na, nb, alpha)
    sa, sb = va / na, vb / nb
    t = diff / math.sqrt(sa + sb)
    df = (sa + sb) ** 2 / (sa**2 / (na - 1) + sb**2 / (nb - 1))
    p = _two_sided_p(t, df)
    return TestResult(t=t, df=df, p=p, sig=int(p < alpha))


def student_t_test(a, b, alpha: float = 0.05) -> TestResult:
    """Classic pooled-variance two-sample t-test, two-sided."""
    _check_inputs(a, b, alpha)
    xa = np.asarray(a, dtype=float)
    xb = np.asarray(b, dtype=float)
    na, nb = len(xa), len(xb)
    va = float(xa.var(ddof=1))
    vb = float(xb.var(ddof=1))
    diff = float(xa.mean() - xb.mean())
    if va == 0.0 and vb == 0.0:
        return _degenerate(diff, na, nb, alpha)
    df = float(na + nb - 2)
    pooled = ((na - 1) * va + (nb - 1) * vb) / df
    t = diff / math.sqrt(pooled * (1.0 / na + 1.0 / nb))
    p = _two_sided_p(t, df)
    return TestResult(t=t, df=df, p=p, sig=int(p < alpha))


def paired_t_test(a, b, alpha: float = 0.05) -> TestResult:
    """Paired-difference t-test; vectors must be index-aligned per observer."""
    _check_inputs(a, b, alpha)
    if len(a) != len(b):
        raise ValueError(f"paired test needs equal-length vectors, got {len(a)} and {len(b)}")
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    n = len(d)
    vd = float(d.var(ddof=1))
    mean = float(d.mean())
    if vd == 0.0:
        return _degenerate(mean, n, n, alpha)
    t = mean / math.sqrt(vd / n)
    df = float(n - 1)
    p = _two_sided_p(t, df)
    return TestResult(t=t, df=df, p=p, sig=int(p < alpha))


def _degenerate(diff: float, na: int, nb: int, alpha: float) -> TestResult:
    df = float(na + nb - 2)
    if diff == 0.0:
        return TestResult(t=0.0, df=df, p=1.0, sig=0)
    return TestResult(t=math.copysign(math.inf, diff), df=df, p=0.0, sig=1)


def _check_inputs(a, b, alpha: float) -> None:
    if len(a) < 2 or len(b) < 2:
        raise ValueError(f"need >= 2 observations per side, got {len(a)} and {len(b)}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")


_TEST_FN = {"welch": welch_t_test, "student": student_t_test, "paired": paired_t_test}


def form_pairs(corpus: Corpus, content_id: str) -> list[tuple[str, str]]:
    """All unordered recipe pairs of a content's *rated* stimuli.

    Recipes are ordered lexicographically within each pair and across the
    list, so the output is a pure function of the corpus.
    """
    if content_id not in corpus.contents():
        raise KeyError(f"unknown content {content_id!r}")
    rated = sorted(r for c, r in corpus.rated_keys() if c == content_id)
    if len(rated) < 2:
        raise ValueError(
            f"content {content_id!r} has {len(rated)} rated stimulus(es); need >= 2 to pair"
        )
    return list(itertools.combinations(rated, 2))


def classify_pairs(
    corpus: Corpus, alpha: float = 0.05, test: str = "welch", jobs: int = 1
) -> list[RatedPair]:
    """Label every within-content pair with |dVMAF|, p-value, and sig bit."""
    if test not in TESTS:
        raise ValueError(f"unknown test {test!r}; expected one of {TESTS}")
    contents = [c for c in corpus.contents() if _has_pairable_ratings(corpus, c)]
    if not contents:
        raise ValueError("no content has two or more rated stimuli")

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            chunks = pool.map(
                lambda c: _classify_content(corpus, c, alpha, test), contents
            )
            pairs = [p for chunk in chunks for p in chunk]
    else:
        pairs = [
            p for c in contents for p in _classify_content(corpus, c, alpha, test)
        ]
    pairs.sort(key=lambda p: (p.content_id, p.recipe_x, p.recipe_y))
    n_sig = sum(p.sig for p in pairs)
    log.info("classified %d pairs (%d significant) at alpha=%g", len(pairs), n_sig, alpha)
    return pairs


def _has_pairable_ratings(corpus: Corpus, content_id: str) -> bool:
    return sum(1 for c, _ in corpus.rated_keys() if c == content_id) >= 2


def _classify_content(
    corpus: Corpus, content_id: str, alpha: float, test: str
) -> list[RatedPair]:
    out = []
    run_test = _TEST_FN[test]
    for rx, ry in form_pairs(corpus, content_id):
        try:
            if test == "paired":
                _require_same_observers(corpus, content_id, rx, ry)
            result = run_test(
                ratings_vector(corpus, content_id, rx),
                ratings_vector(corpus, content_id, ry),
                alpha,
            )
        except ValueError as exc:
            raise ValueError(f"pair {content_id}:{rx}:{ry}: {exc}") from exc
        delta = abs(
            corpus.stimulus(content_id, rx).vmaf - corpus.stimulus(content_id, ry).vmaf
        )
        out.append(
            RatedPair(
                content_id=content_id,
                recipe_x=rx,
                recipe_y=ry,
                delta_obj=delta,
                p_value=result.p,
                sig=result.sig,
            )
        )
    return out


def _require_same_observers(corpus: Corpus, content_id: str, rx: str, ry: str) -> None:
    ox = [r.observer_id for r in corpus.ratings_for(content_id, rx)]
    oy = [r.observer_id for r in corpus.ratings_for(content_id, ry)]
    if ox != oy:
        raise ValueError("paired test needs identical observer panels on both stimuli")


# -- serialization ----------------------------------------------------------


def pairs_csv_text(pairs: list[RatedPair]) -> str:
    rows = [
        (p.content_id, p.recipe_x, p.recipe_y, p.delta_obj, p.p_value, p.sig)
        for p in pairs
    ]
    return tableio.rows_to_csv_text(PAIR_COLUMNS, rows)


def write_pairs_csv(pairs: list[RatedPair], path: str | Path) -> None:
    tableio.write_csv_text(path, pairs_csv_text(pairs))


def read_pairs_csv(path: str | Path) -> list[RatedPair]:
    name = Path(path).name
    pairs = []
    for lineno, row in tableio.read_rows(path, PAIR_COLUMNS):
        sig = tableio.parse_int(row, "sig", path=name, line=lineno)
        if sig not in (0, 1):
            raise CorpusError(f"sig must be 0 or 1, got {sig}", path=name, line=lineno, column="sig")
        delta = tableio.parse_float(row, "delta_obj", path=name, line=lineno)
        if delta < 0:
            raise CorpusError(
                f"delta_obj must be >= 0, got {delta}", path=name, line=lineno, column="delta_obj"
            )
        pairs.append(
            RatedPair(
                content_id=row["content_id"],
                recipe_x=row["recipe_x"],
                recipe_y=row["recipe_y"],
                delta_obj=delta,
                p_value=tableio.parse_float(row, "p_value", path=name, line=lineno),
                sig=sig,
            )
        )
    return pairs
