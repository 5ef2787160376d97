import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

import protoflow

DATA = Path(os.environ.get("PROTOFLOW_DATA_DIR", Path(__file__).resolve().parents[2] / "data"))


@pytest.fixture(scope="module")
def pipeline():
    return protoflow.Pipeline(str(DATA / "knowledge.jsonl"), str(DATA / "icons.jsonl"), seed=0, image_size=128)


@pytest.fixture(scope="module")
def sample():
    return json.loads((DATA / "samples" / "input_00.json").read_text())


def test_generate_is_deterministic(pipeline, sample):
    a = pipeline.generate(sample)
    b = pipeline.generate(sample)
    assert a == b
    assert a["svg"].startswith("<svg")
    trace = a["trace"]
    assert len(trace["cache"]) == len(sample["layout"]["components"]) + 1
    assert a["export"]["version"] == "protoflow.project/1"
    assert protoflow.import_project(a["export"]) == a["export"]


def test_regenerate_component_touches_one_result(pipeline, sample):
    first = pipeline.generate(sample)
    index = next(i for i, c in enumerate(sample["layout"]["components"]) if c["type"] == "Text")
    edited = pipeline.regenerate_component(first["trace"], sample, index, hint="Hello there")
    before, after = first["trace"]["results"], edited["trace"]["results"]
    changed = [i for i in range(len(before)) if before[i] != after[i]]
    assert changed == [index]


def test_regenerate_all_uses_edited_theme(pipeline, sample):
    first = pipeline.generate(sample)
    theme = dict(first["trace"]["theme"]["description"])
    theme["theme_color"] = "#102030"
    out = pipeline.regenerate_all(first["trace"], sample, theme)
    assert 'fill="#102030"' in out["svg"]


def test_metrics():
    mean, cov = protoflow.fit_gaussian(np.array([[0.0, 0.0], [2.0, 0.0]]))
    assert np.allclose(mean, [1.0, 0.0])
    assert np.allclose(cov, [[2.0, 0.0], [0.0, 0.0]])
    x = np.random.default_rng(0).normal(size=(50, 4))
    assert protoflow.fid(x, x) <= 1e-8
    assert protoflow.gd(np.array([[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]])) == pytest.approx(4.0)
    assert protoflow.cosine_similarity([1, 2, 3], [4, 5, 6]) == pytest.approx(32 / math.sqrt(14 * 77))
    assert len(protoflow.mock_embed("hello")) == 64


def test_images():
    half = np.zeros((16, 16, 3), dtype=np.uint8)
    half[:, 8:] = 255
    assert protoflow.perceptual_hash(half) == 0x0F0F0F0F0F0F0F0F
    region = np.full((10, 10, 3), [255, 0, 0], dtype=np.uint8)
    region[:3] = [0, 0, 255]
    assert protoflow.dominant_color(region) == "#ff0000"
    svg = '<svg viewBox="0 0 10 10"><rect x="0" y="0" width="10" height="10" fill="#00ff00"/></svg>'
    raster = protoflow.rasterize_svg(svg, 8, 8)
    assert raster.shape == (8, 8, 3)
    assert (raster[0, 0] == [0, 255, 0]).all()


def test_data_loading():
    assert len(protoflow.load_icon_base(str(DATA / "icons.jsonl"))) == 936
    records = protoflow.load_knowledge_base(str(DATA / "knowledge.jsonl"))
    assert len(records) == 3738
    text = protoflow.knowledge_record_to_text(records[0])
    assert text.endswith("canvas: 360x640")
    assert "Slider" in protoflow.component_types()


def test_errors(pipeline, sample):
    bad = json.loads(json.dumps(sample))
    bad["layout"]["components"][0]["bbox"][2] = 0
    with pytest.raises(protoflow.ValidationError):
        pipeline.generate(bad)
    with pytest.raises(ValueError):
        protoflow.Pipeline(str(DATA / "knowledge.jsonl"), str(DATA / "icons.jsonl"), flags=["no_such_flag"])
    with pytest.raises(protoflow.NotFoundError):
        protoflow.load_knowledge_base(str(DATA / "missing.jsonl"))
