"""Corpus construction, validation, and CSV round-trips."""

from __future__ import annotations

import pytest

from jndmap.corpus import (
    Corpus,
    DcrRating,
    JndTruth,
    Recipe,
    Stimulus,
    load_corpus,
    ratings_csv_text,
    ratings_vector,
    save_corpus,
    truth_csv_text,
    vmaf_csv_text,
)
from jndmap.errors import CorpusError

from conftest import make_stimuli


def _corpus_with_ratings() -> Corpus:
    stimuli = make_stimuli("c1", (90.0, 80.0)) + make_stimuli("c2", (85.0, 75.0))
    ratings = tuple(
        DcrRating(s.content_id, s.recipe_id, obs, score)
        for s in stimuli
        for obs, score in (("oA", 5), ("oB", 4), ("oC", 3))
    )
    truths = (JndTruth("c1", "r0", "dec", "r1", 1),)
    return Corpus(stimuli, ratings, truths)


def test_lookups():
    corpus = _corpus_with_ratings()
    assert corpus.contents() == ["c1", "c2"]
    assert corpus.stimulus("c1", "r0").vmaf == 90.0
    assert corpus.has_stimulus("c2", "r1")
    assert not corpus.has_stimulus("c2", "r9")
    assert [s.recipe_id for s in corpus.stimuli_for_content("c1")] == ["r0", "r1"]
    assert corpus.observers() == ["oA", "oB", "oC"]
    assert ("c1", "r0") in corpus.rated_keys()
    assert len(corpus.ratings_for("c1", "r0")) == 3


def test_ratings_vector_sorted_by_observer():
    stimuli = make_stimuli("c1", (90.0,))
    ratings = (
        DcrRating("c1", "r0", "zz", 2),
        DcrRating("c1", "r0", "aa", 5),
        DcrRating("c1", "r0", "mm", 3),
    )
    corpus = Corpus(stimuli, ratings, ())
    assert ratings_vector(corpus, "c1", "r0") == [5, 3, 2]


def test_duplicate_stimulus_rejected():
    stim = make_stimuli("c1", (90.0,))
    with pytest.raises(CorpusError, match="duplicate"):
        Corpus(stim + stim, (), ())


def test_duplicate_rating_rejected():
    stimuli = make_stimuli("c1", (90.0,))
    dup = DcrRating("c1", "r0", "oA", 4)
    with pytest.raises(CorpusError, match="duplicate"):
        Corpus(stimuli, (dup, dup), ())


def test_dangling_rating_rejected():
    stimuli = make_stimuli("c1", (90.0,))
    with pytest.raises(CorpusError):
        Corpus(stimuli, (DcrRating("c1", "r9", "oA", 4),), ())


def test_truth_direction_consistency():
    # r0 has the higher VMAF, so a "dec" truth must point at a lower rendition.
    stimuli = make_stimuli("c1", (90.0, 80.0))
    Corpus(stimuli, (), (JndTruth("c1", "r0", "dec", "r1", 1),))
    Corpus(stimuli, (), (JndTruth("c1", "r1", "inc", "r0", 1),))
    with pytest.raises(CorpusError):
        Corpus(stimuli, (), (JndTruth("c1", "r1", "dec", "r0", 1),))
    with pytest.raises(CorpusError):
        Corpus(stimuli, (), (JndTruth("c1", "r0", "inc", "r1", 1),))


def test_truth_validation():
    stimuli = make_stimuli("c1", (90.0, 80.0))
    with pytest.raises(CorpusError):
        Corpus(stimuli, (), (JndTruth("c1", "r0", "down", "r1", 1),))
    with pytest.raises(CorpusError):
        Corpus(stimuli, (), (JndTruth("c1", "r0", "dec", "r1", 0),))
    with pytest.raises(CorpusError):
        Corpus(stimuli, (), (JndTruth("c1", "r0", "dec", "r9", 1),))


def test_csv_round_trip(tmp_path):
    corpus = _corpus_with_ratings()
    paths = save_corpus(corpus, tmp_path)
    loaded = load_corpus(paths["vmaf_scores"], paths["dcr_ratings"], paths["jnd_truth"])
    assert loaded.stimuli == corpus.stimuli
    assert loaded.ratings == corpus.ratings
    assert loaded.truths == corpus.truths


def test_ratings_table_optional(tmp_path):
    corpus = Corpus(make_stimuli("c1", (90.0, 80.0)), (), ())
    (tmp_path / "vmaf.csv").write_text(vmaf_csv_text(corpus))
    loaded = load_corpus(tmp_path / "vmaf.csv", None)
    assert loaded.ratings == ()
    assert len(loaded.stimuli) == 2


def test_load_rejects_out_of_scale_score(tmp_path):
    corpus = _corpus_with_ratings()
    paths = save_corpus(corpus, tmp_path)
    text = ratings_csv_text(corpus).replace("oA,5", "oA,6", 1)
    paths["dcr_ratings"].write_text(text)
    with pytest.raises(CorpusError, match="line"):
        load_corpus(paths["vmaf_scores"], paths["dcr_ratings"])


def test_load_rejects_out_of_range_vmaf(tmp_path):
    (tmp_path / "vmaf.csv").write_text(
        "content_id,recipe_id,resolution,level,vmaf\nc1,r0,1080p,1,100.5\n"
    )
    with pytest.raises(CorpusError, match="vmaf"):
        load_corpus(tmp_path / "vmaf.csv", None)


def test_load_rejects_wrong_header(tmp_path):
    (tmp_path / "vmaf.csv").write_text("content,recipe,res,lvl,score\n")
    with pytest.raises(CorpusError, match="header"):
        load_corpus(tmp_path / "vmaf.csv", None)


def test_load_reports_line_of_bad_cell(tmp_path):
    (tmp_path / "vmaf.csv").write_text(
        "content_id,recipe_id,resolution,level,vmaf\n"
        "c1,r0,1080p,1,90.0\n"
        "c1,r1,1080p,2,not-a-number\n"
    )
    with pytest.raises(CorpusError) as err:
        load_corpus(tmp_path / "vmaf.csv", None)
    assert "line 3" in str(err.value)


def test_blank_lines_tolerated(tmp_path):
    (tmp_path / "vmaf.csv").write_text(
        "content_id,recipe_id,resolution,level,vmaf\n\nc1,r0,1080p,1,90.0\n\n"
    )
    loaded = load_corpus(tmp_path / "vmaf.csv", None)
    assert len(loaded.stimuli) == 1


def test_truth_csv_includes_order():
    corpus = _corpus_with_ratings()
    assert truth_csv_text(corpus).splitlines()[1] == "c1,r0,dec,r1,1"
