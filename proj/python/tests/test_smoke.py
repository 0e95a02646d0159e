import json
import math
import os
from pathlib import Path

import pytest

import convtopic

DATA = Path(os.environ.get("CONVTOPIC_DATA_DIR", Path(__file__).resolve().parents[2] / "data"))


def test_tokenize():
    assert convtopic.tokenize("I think the New York Yankees are great.") == [
        "i", "think", "the", "new", "york", "yankees", "are", "great"]
    assert convtopic.tokenize("") == []


def test_metrics():
    assert convtopic.pearson([1, 2, 3], [1, 2, 4]) == pytest.approx(9 / math.sqrt(84), abs=1e-12)
    a = [0] * 50 + [1] * 50
    b = [0] * 45 + [1] * 5 + [0] * 15 + [1] * 35
    assert convtopic.cohens_kappa(a, b) == pytest.approx(0.6, abs=1e-12)
    with pytest.raises(ValueError):
        convtopic.pearson([1, 1, 1], [1, 2, 3])


def test_topical_depth_of_annotated_example():
    record = (DATA / "annotated_example.jsonl").read_text().strip()
    depth = convtopic.topical_depth(record)
    assert depth["total"] == 1
    assert depth["sub_conversations"] == [("Fashion", 1, 1)]


def test_synthesize_is_deterministic():
    a = convtopic.synthesize(seed=3, conversations=5)
    assert a == convtopic.synthesize(seed=3, conversations=5)
    assert len(a.strip().splitlines()) == 5


def test_train_save_load_predict(tmp_path):
    corpus = tmp_path / "c.jsonl"
    corpus.write_text(convtopic.synthesize(seed=2, conversations=60, turns=4, topics=4))
    model = convtopic.train(str(corpus), model="adan", context="avg", acts="predicted",
                            embed_dim=8, hidden=8, epochs=3, seed=1)
    assert model.config["family"] == "adan"
    assert 1 <= model.history["selected_epoch"] <= 3
    report = model.evaluate(str(corpus), split="test")
    assert 0.0 <= report["accuracy"] <= 1.0 and report["n"] > 0

    path = tmp_path / "m.bin"
    model.save(str(path))
    assert (tmp_path / "m.bin.act").exists()
    again = convtopic.Model.load(str(path))
    assert again.evaluate(str(corpus), split="test") == report

    record = corpus.read_text().splitlines()[0]
    rows = again.predict(record, j=1)
    assert len(rows) == 8
    first = rows[0]
    assert first["speaker"] == "user" and len(first["keywords"]) == 1
    assert sum(first["probs"]) == pytest.approx(1.0)
    assert "act" in first


def test_errors():
    with pytest.raises(ValueError):
        convtopic.train("/nonexistent.jsonl")
    with pytest.raises(ValueError):
        convtopic.Model.load("/nonexistent.bin")
    with pytest.raises(ValueError):
        convtopic.topical_depth(json.dumps({"id": "x", "turns": [{"user": {"text": "a", "topic": "Cooking"}}]}))
