"""Shared fixtures: tiny hand-built corpora and one full simulated pipeline."""

from __future__ import annotations

import math
import shutil
import sys

import pytest

from jndmap.corpus import Corpus, DcrRating, Recipe, Stimulus
from jndmap.mapping import FitReport, MappingFunction
from jndmap.ranges import decompose_explicit
from jndmap.simulate import SimSpec, simulate_corpus

# Closed-form inversion constant: sigmoid(0.5 * (d - 6)) reaches 0.75 here.
DSTAR = 6.0 + 2.0 * math.log(3.0)

LADDER_VMAFS = (95.0, 90.0, 85.0, 82.0, 78.0, 70.0)


def make_stimuli(content_id: str, vmafs, prefix: str = "r") -> tuple[Stimulus, ...]:
    return tuple(
        Stimulus(content_id, Recipe(f"{prefix}{i}", "1080p", i + 1), float(v))
        for i, v in enumerate(vmafs)
    )


@pytest.fixture
def ladder_stimuli() -> tuple[Stimulus, ...]:
    """Six renditions of one content at 95/90/85/82/78/70 VMAF (r0..r5)."""
    return make_stimuli("c1", LADDER_VMAFS)


@pytest.fixture
def exact_model() -> MappingFunction:
    """A logistic curve with known parameters, so inversions have closed forms."""
    return MappingFunction(
        family="logistic2",
        params=(0.5, 6.0),
        domain=(0.0, 20.0),
        fit_report=FitReport(residual_norm=0.0, monotone=True, iterations=0),
    )


@pytest.fixture
def single_range_models(exact_model):
    """One all-covering range plus the exact model keyed under it."""
    decomp = decompose_explicit([0.0, 100.0])
    rid = decomp.range_ids()[0]
    return decomp, {rid: {"logistic2": exact_model}}


def build_inverted_observer_corpus() -> Corpus:
    """24 observers x 12 stimuli; observer "bad" answers the scale upside down.

    Six stimuli have unanimous consensus 5, six have consensus 1; "bad" scores
    6 - consensus everywhere, so their deviations split evenly between the two
    tails (erratic, not biased).
    """
    stimuli = []
    ratings = []
    observers = [f"o{j:02d}" for j in range(1, 24)] + ["bad"]
    for i in range(12):
        rid = f"r{i + 1:02d}"
        consensus = 5 if i < 6 else 1
        stimuli.append(Stimulus("c1", Recipe(rid, "1080p", i + 1), 95.0 - 2.0 * i))
        for obs in observers:
            score = (6 - consensus) if obs == "bad" else consensus
            ratings.append(DcrRating("c1", rid, obs, score))
    return Corpus(tuple(stimuli), tuple(ratings), ())


@pytest.fixture
def inverted_observer_corpus() -> Corpus:
    return build_inverted_observer_corpus()


SMALL_SPEC = SimSpec(
    n_contents=3,
    ladder=(
        ("r1", 92.0),
        ("r2", 88.0),
        ("r3", 84.0),
        ("r4", 80.0),
        ("r5", 76.0),
        ("r6", 72.0),
    ),
    observer_count=8,
    seed=7,
)


@pytest.fixture
def small_spec() -> SimSpec:
    return SMALL_SPEC


@pytest.fixture(scope="session")
def default_sim():
    """One default-settings simulation shared by the slower statistics tests."""
    return simulate_corpus(SimSpec())


def cli_command() -> list[str]:
    """Argv prefix for invoking the installed CLI in a subprocess."""
    exe = shutil.which("jndmap")
    if exe:
        return [exe]
    return [sys.executable, "-m", "jndmap.cli"]
