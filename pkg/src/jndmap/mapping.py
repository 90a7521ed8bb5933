"""Co-distributions of significant/similar pairs and mapping-function fits.

For one sub-quality range, pairs assigned to it are histogrammed over shared
|dVMAF| bins twice: ``f_dif`` counts significantly different pairs, ``f_sim``
the rest.  The per-bin probability of a perceived difference is then

    p_sd = f_dif / (f_dif + f_sim)

and the (bin center, p_sd) points -- weighted by bin support -- are fitted by
one of four monotone curve families:

* ``logistic5``  p = b1*(0.5 - 1/(1+exp(b2*(d-b3)))) + b4*d + b5
* ``cubic4``     p = b1 + b2*d + b3*d**2 + b4*d**3
* ``logistic2``  p = 1/(1+exp(-b1*(d-b2)))
* ``glm``        p = 1/(1+exp(-(b0+b1*d)))   (binomial logit, IRLS)

Evaluated values are clamped to [0, 1].  Fits are accepted only if the curve
is non-decreasing on a 1000-point grid over its domain; least-squares
families that fail get refitted with a hinge penalty on the negative slope
(weight 1e3, doubled per retry, three retries) before being marked invalid.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import least_squares

from . import tableio
from .corpus import Corpus
from .errors import CorpusError, FitError
from .ranges import Decomposition, SubQualityRange
from .significance import RatedPair

log = logging.getLogger(__name__)

FAMILIES = ("logistic5", "cubic4", "logistic2", "glm")
N_PARAMS = {"logistic5": 5, "cubic4": 4, "logistic2": 2, "glm": 2}

#: Human-facing labels used in report tables.
FAMILY_LABELS = {
    "logistic5": "5-para",
    "cubic4": "4-para",
    "logistic2": "2-para",
    "glm": "GLM",
}

MONOTONE_GRID_POINTS = 1000
MONOTONE_SLACK = 1e-9
HINGE_WEIGHT = 1e3
HINGE_RETRIES = 3
IRLS_MAX_ITER = 100
IRLS_SLOPE_CAP = 50.0
CODIST_COLUMNS = ["range_id", "bin_lo", "bin_hi", "f_dif", "f_sim", "p_sd"]
CURVE_COLUMNS = ["range_id", "family", "delta_obj", "p_sd"]
CURVE_SAMPLES = 200


@dataclass(frozen=True)
class CoDistribution:
    range_id: str
    bin_edges: tuple[float, ...]
    f_dif: tuple[int, ...]
    f_sim: tuple[int, ...]

    @property
    def n_bins(self) -> int:
        return len(self.f_dif)


@dataclass(frozen=True)
class PsdPoint:
    delta_obj: float
    p_sd: float
    support: int


@dataclass(frozen=True)
class FitReport:
    residual_norm: float
    monotone: bool
    iterations: int
    flags: tuple[str, ...] = ()
    extras: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class MappingFunction:
    family: str
    params: tuple[float, ...]
    domain: tuple[float, float]
    fit_report: FitReport


# -- curve families ----------------------------------------------------------


def _sigmoid(z: np.ndarray | float) -> np.ndarray | float:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500.0, 500.0)))


def _eval_raw(family: str, params: np.ndarray, x: np.ndarray) -> np.ndarray:
    if family == "logistic5":
        b1, b2, b3, b4, b5 = params
        s = _sigmoid(-b2 * (x - b3))  # equals 1/(1+exp(b2*(x-b3)))
        return b1 * (0.5 - s) + b4 * x + b5
    if family == "cubic4":
        b1, b2, b3, b4 = params
        return b1 + b2 * x + b3 * x**2 + b4 * x**3
    if family == "logistic2":
        b1, b2 = params
        return _sigmoid(b1 * (x - b2))
    if family == "glm":
        b0, b1 = params
        return _sigmoid(b0 + b1 * x)
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")


def _eval_slope(family: str, params: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Analytic d p / d delta, used by the hinge penalty."""
    if family == "logistic5":
        b1, b2, b3, b4, _ = params
        s = _sigmoid(-b2 * (x - b3))
        return b1 * b2 * s * (1.0 - s) + b4
    if family == "cubic4":
        _, b2, b3, b4 = params
        return b2 + 2.0 * b3 * x + 3.0 * b4 * x**2
    if family == "logistic2":
        b1, b2 = params
        s = _sigmoid(b1 * (x - b2))
        return b1 * s * (1.0 - s)
    if family == "glm":
        b0, b1 = params
        s = _sigmoid(b0 + b1 * x)
        return b1 * s * (1.0 - s)
    raise ValueError(f"unknown family {family!r}")


def _jacobian(family: str, params: np.ndarray, x: np.ndarray) -> np.ndarray:
    if family == "logistic5":
        b1, b2, b3, _, _ = params
        s = _sigmoid(-b2 * (x - b3))
        ss = s * (1.0 - s)
        return np.column_stack(
            [0.5 - s, b1 * ss * (x - b3), -b1 * b2 * ss, x, np.ones_like(x)]
        )
    if family == "cubic4":
        return np.column_stack([np.ones_like(x), x, x**2, x**3])
    if family == "logistic2":
        b1, b2 = params
        s = _sigmoid(b1 * (x - b2))
        ss = s * (1.0 - s)
        return np.column_stack([ss * (x - b2), -b1 * ss])
    if family == "glm":
        b0, b1 = params
        s = _sigmoid(b0 + b1 * x)
        ss = s * (1.0 - s)
        return np.column_stack([ss, ss * x])
    raise ValueError(f"unknown family {family!r}")


def evaluate_mf(mf: MappingFunction, delta_obj: float) -> float:
    """Evaluate the fitted curve at ``delta_obj``, clamped to domain and [0, 1]."""
    lo, hi = mf.domain
    d = min(max(delta_obj, lo), hi)
    raw = _eval_raw(mf.family, np.asarray(mf.params), np.asarray([d], dtype=float))
    return float(np.clip(raw, 0.0, 1.0)[0])


def _grid_values(mf_family: str, params: np.ndarray, domain: tuple[float, float]) -> np.ndarray:
    grid = np.linspace(domain[0], domain[1], MONOTONE_GRID_POINTS)
    return np.clip(_eval_raw(mf_family, params, grid), 0.0, 1.0)


def is_monotone(family: str, params: np.ndarray, domain: tuple[float, float]) -> bool:
    values = _grid_values(family, params, domain)
    return bool(np.all(np.diff(values) >= -MONOTONE_SLACK))


# -- co-distribution ---------------------------------------------------------


def build_codistribution(
    srange: SubQualityRange, pairs: list[RatedPair], bin_width: float = 2.0
) -> CoDistribution:
    """Histogram the range's pairs over shared |dVMAF| bins, split by sig bit.

    ``pairs`` may be the full pair list; only those referenced by the range
    are counted.  Bins run from 0 to the smallest multiple of ``bin_width``
    covering ceil(max |dVMAF|); each pair lands in exactly one bin.
    """
    if not bin_width > 0:
        raise ValueError(f"bin_width must be positive, got {bin_width}")
    refs = set(srange.pair_refs)
    if not refs:
        raise ValueError(f"range {srange.range_id} has no assigned pairs")
    assigned = [p for p in pairs if p.pair_id in refs]
    if len(assigned) != len(refs):
        missing = refs - {p.pair_id for p in assigned}
        raise ValueError(
            f"range {srange.range_id} references {len(missing)} pair(s) not in the "
            f"given list, e.g. {sorted(missing)[:3]}"
        )
    deltas = np.array([p.delta_obj for p in assigned], dtype=float)
    top = math.ceil(float(deltas.max()))
    n_bins = max(1, math.ceil(top / bin_width)) if top > 0 else 1
    edges = np.arange(n_bins + 1, dtype=float) * bin_width
    sig = np.array([p.sig for p in assigned], dtype=bool)
    f_dif, _ = np.histogram(deltas[sig], bins=edges)
    f_sim, _ = np.histogram(deltas[~sig], bins=edges)
    return CoDistribution(
        range_id=srange.range_id,
        bin_edges=tuple(float(e) for e in edges),
        f_dif=tuple(int(c) for c in f_dif),
        f_sim=tuple(int(c) for c in f_sim),
    )


def psd_points(cd: CoDistribution) -> list[PsdPoint]:
    """One (bin center, f_dif/(f_dif+f_sim), support) point per non-empty bin."""
    points = []
    for i in range(cd.n_bins):
        support = cd.f_dif[i] + cd.f_sim[i]
        if support == 0:
            continue
        center = 0.5 * (cd.bin_edges[i] + cd.bin_edges[i + 1])
        points.append(PsdPoint(delta_obj=center, p_sd=cd.f_dif[i] / support, support=support))
    return points


# -- least-squares fitting ---------------------------------------------------


def _initial_guesses(family: str, x: np.ndarray, y: np.ndarray) -> list[np.ndarray]:
    """Eight deterministic, data-driven starting points."""
    span = float(x.max() - x.min()) or 1.0
    ymin, ymax = float(y.min()), float(y.max())
    yrange = max(ymax - ymin, 0.05)
    # first crossing of the mid level approximates the transition center
    mid_level = 0.5 * (ymin + ymax)
    above = np.nonzero(y >= mid_level)[0]
    x_mid = float(x[above[0]]) if len(above) else float(np.median(x))
    s0 = 4.0 * yrange / span
    slopes = [0.25 * s0, s0, 4.0 * s0, 16.0 * s0]
    centers = [x_mid, float(np.median(x))]
    if family == "logistic2":
        return [np.array([s, c]) for s in slopes for c in centers]
    if family == "glm":
        return [np.array([-s * c, s]) for s in slopes for c in centers]
    if family == "logistic5":
        guesses = []
        for s in slopes[:2]:
            for c in centers:
                guesses.append(np.array([yrange, s, c, 0.0, mid_level]))
                guesses.append(np.array([1.0, s, c, 0.001, ymin]))
        return guesses
    if family == "cubic4":
        # Weighted polynomial solve is closed-form; perturb it a little so the
        # multi-start contract stays uniform.
        base = np.polyfit(x, y, 3)[::-1]
        guesses = [base]
        for scale in (0.5, 0.9, 1.1, 2.0):
            guesses.append(base * scale)
        guesses.append(np.array([mid_level, s0 / 4.0, 0.0, 0.0]))
        guesses.append(np.array([ymin, 0.01, 0.0, 0.0]))
        guesses.append(np.zeros(4))
        return guesses
    raise ValueError(f"unknown family {family!r}")


def _weighted_lsq(
    family: str,
    x: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    hinge: float,
    domain: tuple[float, float],
    starts: list[np.ndarray],
) -> tuple[np.ndarray, float, int]:
    """Damped least squares over the given starts; lowest-cost start wins.

    ``hinge > 0`` appends sqrt(hinge) * max(0, -slope) residuals on a coarse
    domain grid, steering the optimizer toward non-decreasing curves.
    """
    sw = np.sqrt(w)
    grid = np.linspace(domain[0], domain[1], 256)

    def residuals(params: np.ndarray) -> np.ndarray:
        res = sw * (_eval_raw(family, params, x) - y)
        if hinge > 0:
            neg = np.maximum(0.0, -_eval_slope(family, params, grid))
            res = np.concatenate([res, math.sqrt(hinge) * neg])
        return res

    jac = "2-point"
    if hinge == 0:

        def jac(params: np.ndarray) -> np.ndarray:  # type: ignore[misc]
            return sw[:, None] * _jacobian(family, params, x)

    best: tuple[float, int, np.ndarray, int] | None = None
    for idx, start in enumerate(starts):
        try:
            sol = least_squares(
                residuals,
                start,
                jac=jac,
                method="lm" if hinge == 0 and len(x) >= len(start) else "trf",
                xtol=1e-15,
                ftol=1e-15,
                gtol=1e-15,
                max_nfev=4000,
            )
        except Exception:  # singular start etc. -- skip, others may work
            continue
        cost = float(sol.cost)
        # strict tie-break on the start index keeps the result deterministic
        if best is None or cost < best[0] - 1e-15:
            best = (cost, idx, sol.x, int(sol.nfev))
    if best is None:
        raise FitError(f"{family}: no least-squares start converged")
    cost, _, params, nfev = best
    return params, math.sqrt(2.0 * cost), nfev


def fit_mapping(
    points: list[PsdPoint],
    family: str,
    pairs_for_glm: list[RatedPair] | None = None,
    domain: tuple[float, float] | None = None,
) -> MappingFunction:
    """Fit one curve family to p_sd points (support-weighted).

    For the ``glm`` family, raw per-pair (|dVMAF|, sig) observations are used
    as Bernoulli data when ``pairs_for_glm`` is given; otherwise the points
    act as grouped binomial observations with their support as trials.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
    if family != "glm" and len(points) < max(4, N_PARAMS[family]):
        raise FitError(
            f"{family}: need >= {max(4, N_PARAMS[family])} points, got {len(points)}"
        )
    if family == "glm" and len(points) < 2:
        raise FitError(f"glm: need >= 2 points, got {len(points)}")
    x = np.array([p.delta_obj for p in points], dtype=float)
    y = np.array([p.p_sd for p in points], dtype=float)
    w = np.array([p.support for p in points], dtype=float)
    if domain is None:
        domain = (0.0, float(x.max()))
    if not domain[0] < domain[1]:
        raise ValueError(f"empty domain {domain}")

    if family == "glm":
        mf = _fit_glm(x, y, w, pairs_for_glm, domain)
    else:
        mf = _fit_pointwise(family, x, y, w, domain)
    log.debug(
        "fit %s on %d points: residual=%.4g monotone=%s",
        family,
        len(points),
        mf.fit_report.residual_norm,
        mf.fit_report.monotone,
    )
    return mf


def _rms_misfit(family: str, params: np.ndarray, x, y, w) -> float:
    return float(
        np.sqrt(np.sum(w * (_eval_raw(family, params, x) - y) ** 2) / np.sum(w))
    )


def _fit_pointwise(
    family: str, x: np.ndarray, y: np.ndarray, w: np.ndarray, domain: tuple[float, float]
) -> MappingFunction:
    starts = _initial_guesses(family, x, y)
    params, _, nfev = _weighted_lsq(family, x, y, w, 0.0, domain, starts)
    iterations = nfev
    flags: list[str] = []
    monotone = is_monotone(family, params, domain)
    free_rms = _rms_misfit(family, params, x, y, w)
    hinge = HINGE_WEIGHT
    for _ in range(HINGE_RETRIES):
        if monotone:
            break
        retry_starts = [params] + starts
        candidate, _, nfev = _weighted_lsq(family, x, y, w, hinge, domain, retry_starts)
        iterations += nfev
        hinge *= 2.0
        if not is_monotone(family, candidate, domain):
            params = candidate
            continue
        # The penalty may "rescue" hopeless data (e.g. a decreasing trend) by
        # flattening the curve entirely; accept only if the data misfit stays
        # in the same regime as the unconstrained fit.
        if _rms_misfit(family, candidate, x, y, w) <= max(2.0 * free_rms, 0.05):
            params = candidate
            monotone = True
            flags.append("hinge_penalty")
            break
    # report the data misfit only, independent of any penalty terms
    residual = float(np.sqrt(np.sum(w * (_eval_raw(family, params, x) - y) ** 2)))
    report = FitReport(
        residual_norm=residual,
        monotone=monotone,
        iterations=iterations,
        flags=tuple(flags),
    )
    return MappingFunction(
        family=family,
        params=tuple(float(p) for p in params),
        domain=domain,
        fit_report=report,
    )


# -- GLM / IRLS ---------------------------------------------------------------


def _fit_glm(
    x_points: np.ndarray,
    y_points: np.ndarray,
    w_points: np.ndarray,
    pairs: list[RatedPair] | None,
    domain: tuple[float, float],
) -> MappingFunction:
    if pairs is not None:
        if len(pairs) < 2:
            raise FitError(f"glm: need >= 2 pair observations, got {len(pairs)}")
        x = np.array([p.delta_obj for p in pairs], dtype=float)
        y = np.array([float(p.sig) for p in pairs], dtype=float)
        trials = np.ones_like(x)
    else:
        x, y, trials = x_points, y_points, w_points

    flags: list[str] = []
    if np.all(y == 0.0) or np.all(y == 1.0):
        # Degenerate all-similar / all-different data: no finite MLE exists,
        # so pin a flat curve at the observed rate and let prediction flag
        # the clamped inversion.  (Constant rates strictly inside (0, 1) are
        # fine -- IRLS converges to slope 0 at the logit of the rate.)
        b0 = IRLS_SLOPE_CAP if y[0] == 1.0 else -IRLS_SLOPE_CAP
        params = np.array([b0, 0.0])
        flags.append("constant_labels")
        iterations = 0
    else:
        params, iterations, separated = _irls(x, y, trials)
        if separated:
            flags.append("separation")

    deviance, grad_norm = _glm_deviance(params, x, y, trials)
    monotone = params[1] >= -MONOTONE_SLACK and is_monotone("glm", params, domain)
    residual = float(
        np.sqrt(np.sum(w_points * (_eval_raw("glm", params, x_points) - y_points) ** 2))
    )
    report = FitReport(
        residual_norm=residual,
        monotone=monotone,
        iterations=iterations,
        flags=tuple(flags),
        extras={"deviance": deviance, "deviance_grad_norm": grad_norm},
    )
    return MappingFunction(
        family="glm",
        params=(float(params[0]), float(params[1])),
        domain=domain,
        fit_report=report,
    )


def _irls(x: np.ndarray, y: np.ndarray, trials: np.ndarray) -> tuple[np.ndarray, int, bool]:
    """Iteratively reweighted least squares for the binomial logit model.

    ``y`` holds observed proportions, ``trials`` the binomial weights.
    Diverging slope (|b1| past the cap) is diagnosed as separation: the slope
    is pinned at the cap and the intercept re-solved conditionally.
    """
    X = np.column_stack([np.ones_like(x), x])
    beta = np.zeros(2)
    for iteration in range(1, IRLS_MAX_ITER + 1):
        eta = X @ beta
        mu = np.clip(_sigmoid(eta), 1e-12, 1.0 - 1e-12)
        weight = trials * mu * (1.0 - mu)
        z = eta + (y - mu) / (mu * (1.0 - mu))
        xtw = X.T * weight
        try:
            beta_new = np.linalg.solve(xtw @ X, xtw @ z)
        except np.linalg.LinAlgError:
            beta_new = np.linalg.lstsq(xtw @ X, xtw @ z, rcond=None)[0]
        if abs(beta_new[1]) > IRLS_SLOPE_CAP:
            slope = math.copysign(IRLS_SLOPE_CAP, beta_new[1])
            intercept = _solve_intercept(x, y, trials, slope)
            return np.array([intercept, slope]), iteration, True
        step = float(np.max(np.abs(beta_new - beta)))
        beta = beta_new
        _, grad_norm = _glm_deviance(beta, x, y, trials)
        if grad_norm < 1e-10 or step < 1e-13:
            return beta, iteration, False
    raise FitError(
        "glm: IRLS did not converge within "
        f"{IRLS_MAX_ITER} iterations (possible quasi-separation; final b1="
        f"{beta[1]:.3g})"
    )


def _solve_intercept(x: np.ndarray, y: np.ndarray, trials: np.ndarray, slope: float) -> float:
    """1-d solve for the intercept with the slope held fixed.

    The score is strictly decreasing in the intercept, so the root is unique;
    bisection on an expanding bracket is used because plain Newton shoots off
    along the saturated tails (the Hessian is ~0 there after clipping).
    """

    def score(b0: float) -> float:
        mu = np.clip(_sigmoid(b0 + slope * x), 1e-12, 1.0 - 1e-12)
        return float(np.sum(trials * (y - mu)))

    center = -slope * float(np.mean(x))
    width = 1.0
    lo = hi = center
    for _ in range(200):
        lo = center - width
        if score(lo) > 0.0:
            break
        width *= 2.0
    else:
        return lo
    width = 1.0
    for _ in range(200):
        hi = center + width
        if score(hi) < 0.0:
            break
        width *= 2.0
    else:
        return hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if score(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * max(1.0, abs(mid)):
            break
    return 0.5 * (lo + hi)


def _glm_deviance(
    beta: np.ndarray, x: np.ndarray, y: np.ndarray, trials: np.ndarray
) -> tuple[float, float]:
    """Binomial deviance and the norm of its gradient in beta."""
    X = np.column_stack([np.ones_like(x), x])
    mu = np.clip(_sigmoid(X @ beta), 1e-12, 1.0 - 1e-12)
    yc = np.clip(y, 1e-12, 1.0 - 1e-12)
    dev_terms = y * np.log(yc / mu) + (1.0 - y) * np.log((1.0 - yc) / (1.0 - mu))
    deviance = float(2.0 * np.sum(trials * dev_terms))
    grad = -2.0 * (X.T @ (trials * (y - mu)))
    return deviance, float(np.linalg.norm(grad))


# -- whole-decomposition driver ----------------------------------------------


def fit_all(
    decomp: Decomposition,
    pairs: list[RatedPair],
    families: tuple[str, ...] = FAMILIES,
    bin_width: float = 2.0,
    glm_mode: str = "pairwise",
    jobs: int = 1,
) -> tuple[dict[str, CoDistribution], dict[str, dict[str, MappingFunction]]]:
    """Build co-distributions and fit every requested family per range."""
    if glm_mode not in ("pairwise", "points"):
        raise ValueError(f"glm_mode must be 'pairwise' or 'points', got {glm_mode!r}")
    for family in families:
        if family not in FAMILIES:
            raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")

    codists: dict[str, CoDistribution] = {}
    tasks = []
    for srange in decomp.ranges:
        if not srange.pair_refs:
            log.warning("range %s has no pairs; skipped", srange.range_id)
            continue
        cd = build_codistribution(srange, pairs, bin_width)
        codists[srange.range_id] = cd
        points = psd_points(cd)
        in_range = decomp.pairs_in_range(srange.range_id, pairs)
        glm_pairs = in_range if glm_mode == "pairwise" else None
        for family in families:
            tasks.append((srange.range_id, family, points, glm_pairs))

    def run(task):
        range_id, family, points, glm_pairs = task
        try:
            mf = fit_mapping(
                points, family, pairs_for_glm=glm_pairs if family == "glm" else None
            )
        except FitError as exc:
            log.warning("fit failed for %s/%s: %s", range_id, family, exc)
            return None
        return range_id, family, mf

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = [r for r in pool.map(run, tasks) if r is not None]
    else:
        results = [r for t in tasks if (r := run(t)) is not None]

    models: dict[str, dict[str, MappingFunction]] = {}
    for range_id, family, mf in sorted(results, key=lambda r: (r[0], r[1])):
        models.setdefault(range_id, {})[family] = mf
    return codists, models


# -- serialization ----------------------------------------------------------


def codist_csv_text(codists: dict[str, CoDistribution]) -> str:
    rows = []
    for range_id in sorted(codists):
        cd = codists[range_id]
        for i in range(cd.n_bins):
            support = cd.f_dif[i] + cd.f_sim[i]
            p_sd = cd.f_dif[i] / support if support else ""
            rows.append(
                (range_id, cd.bin_edges[i], cd.bin_edges[i + 1], cd.f_dif[i], cd.f_sim[i], p_sd)
            )
    return tableio.rows_to_csv_text(CODIST_COLUMNS, rows)


def write_codist_csv(codists: dict[str, CoDistribution], path: str | Path) -> None:
    tableio.write_csv_text(path, codist_csv_text(codists))


def models_to_json_dict(models: dict[str, dict[str, MappingFunction]]) -> dict:
    out: dict = {}
    for range_id in sorted(models):
        out[range_id] = {}
        for family in sorted(models[range_id]):
            mf = models[range_id][family]
            report = {
                "residual_norm": mf.fit_report.residual_norm,
                "monotone": mf.fit_report.monotone,
                "iterations": mf.fit_report.iterations,
            }
            if mf.fit_report.flags:
                report["flags"] = list(mf.fit_report.flags)
            if mf.fit_report.extras:
                report["extras"] = dict(sorted(mf.fit_report.extras.items()))
            out[range_id][family] = {
                "params": list(mf.params),
                "domain": list(mf.domain),
                "fit_report": report,
            }
    return out


def models_from_json_dict(data: dict) -> dict[str, dict[str, MappingFunction]]:
    models: dict[str, dict[str, MappingFunction]] = {}
    for range_id, families in data.items():
        for family, entry in families.items():
            report = entry["fit_report"]
            mf = MappingFunction(
                family=family,
                params=tuple(float(p) for p in entry["params"]),
                domain=(float(entry["domain"][0]), float(entry["domain"][1])),
                fit_report=FitReport(
                    residual_norm=float(report["residual_norm"]),
                    monotone=bool(report["monotone"]),
                    iterations=int(report["iterations"]),
                    flags=tuple(report.get("flags", [])),
                    extras={k: float(v) for k, v in report.get("extras", {}).items()},
                ),
            )
            models.setdefault(range_id, {})[family] = mf
    return models


def write_mf_params_json(models: dict[str, dict[str, MappingFunction]], path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(models_to_json_dict(models), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def read_mf_params_json(path: str | Path) -> dict[str, dict[str, MappingFunction]]:
    return models_from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def curve_samples_csv_text(models: dict[str, dict[str, MappingFunction]]) -> str:
    rows = []
    for range_id in sorted(models):
        for family in sorted(models[range_id]):
            mf = models[range_id][family]
            for d in np.linspace(mf.domain[0], mf.domain[1], CURVE_SAMPLES):
                rows.append((range_id, family, float(d), evaluate_mf(mf, float(d))))
    return tableio.rows_to_csv_text(CURVE_COLUMNS, rows)


def write_curve_samples_csv(
    models: dict[str, dict[str, MappingFunction]], path: str | Path
) -> None:
    tableio.write_csv_text(path, curve_samples_csv_text(models))


def read_curve_samples_csv(path: str | Path) -> dict[tuple[str, str], list[tuple[float, float]]]:
    name = Path(path).name
    curves: dict[tuple[str, str], list[tuple[float, float]]] = {}
    for lineno, row in tableio.read_rows(path, CURVE_COLUMNS):
        key = (row["range_id"], row["family"])
        curves.setdefault(key, []).append(
            (
                tableio.parse_float(row, "delta_obj", path=name, line=lineno),
                tableio.parse_float(row, "p_sd", path=name, line=lineno),
            )
        )
    return curves


def read_codist_csv(path: str | Path) -> dict[str, CoDistribution]:
    """Rebuild co-distributions from codist.csv (used by the SVG renderer)."""
    name = Path(path).name
    grouped: dict[str, list[tuple[float, float, int, int]]] = {}
    for lineno, row in tableio.read_rows(path, CODIST_COLUMNS):
        grouped.setdefault(row["range_id"], []).append(
            (
                tableio.parse_float(row, "bin_lo", path=name, line=lineno),
                tableio.parse_float(row, "bin_hi", path=name, line=lineno),
                tableio.parse_int(row, "f_dif", path=name, line=lineno),
                tableio.parse_int(row, "f_sim", path=name, line=lineno),
            )
        )
    out = {}
    for range_id, bins in grouped.items():
        bins.sort()
        edges = [b[0] for b in bins] + [bins[-1][1]]
        if any(not math.isclose(a[1], b[0]) for a, b in zip(bins, bins[1:])):
            raise CorpusError(f"non-contiguous bins for range {range_id}", path=name)
        out[range_id] = CoDistribution(
            range_id=range_id,
            bin_edges=tuple(edges),
            f_dif=tuple(b[2] for b in bins),
            f_sim=tuple(b[3] for b in bins),
        )
    return out
