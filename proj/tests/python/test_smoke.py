"""Smoke tests for the Python bindings on a tiny synthetic movie."""

import json
import math

import numpy as np
import pytest
from PIL import Image

import adgen

DIM = 512


def unit(v):
    return v / np.linalg.norm(v)


@pytest.fixture()
def movie(tmp_path):
    rng = np.random.default_rng(3)
    cast = [("c0", "Amy Dunne"), ("c1", "Nick Dunne")]
    centers = [unit(rng.normal(size=DIM)) for _ in cast]
    (tmp_path / "cast.json").write_text(
        json.dumps([{"cast_id": c, "actor_name": "", "character_name": n} for c, n in cast])
    )
    with open(tmp_path / "gallery.jsonl", "w") as f:
        for (cid, _), c in zip(cast, centers):
            emb = unit(c + 0.4 * unit(rng.normal(size=DIM)))
            f.write(json.dumps({"cast_id": cid, "kind": "original", "embedding": emb.tolist()}) + "\n")

    clips, dets, gt = [], [], []
    for k in range(2):
        clip_id = f"clip{k}"
        start = 5.0 + 10.0 * k
        clips.append({"clip_id": clip_id, "start_s": start, "end_s": start + 3.0, "fps": 10.0})
        frame_dir = tmp_path / "frames" / clip_id
        frame_dir.mkdir(parents=True)
        for f in range(20):
            img = np.full((90, 120, 3), 40 if f < 10 else 200, dtype=np.uint8)
            x = 10 + 2 * f
            img[20:60, x:x + 25] = 120
            Image.fromarray(img).save(frame_dir / f"{f:03d}.png")
            emb = unit(centers[k] + 0.3 * unit(rng.normal(size=DIM)))
            dets.append({"clip_id": clip_id, "frame_idx": f, "person_box": [x, 20, x + 25, 60],
                         "confidence": 0.9, "face_box": [x + 5, 22, x + 20, 35],
                         "face_embedding": emb.tolist()})
        gt.append({"clip_id": clip_id, "start_s": start + 0.5, "end_s": start + 2.0,
                   "text": f"{cast[k][1].split()[0]} walks past the window."})

    def jsonl(name, rows):
        (tmp_path / name).write_text("".join(json.dumps(r) + "\n" for r in rows))

    jsonl("clips.jsonl", clips)
    jsonl("detections.jsonl", dets)
    jsonl("gt.jsonl", gt)
    (tmp_path / "subs.srt").write_text(
        "1\n00:00:01,000 --> 00:00:02,000\nWhere were you?\n\n"
        "2\n00:00:12,000 --> 00:00:13,000\nOut.\n"
    )
    (tmp_path / "run.toml").write_text(
        "[paths]\nframes_root = frames\nclips = clips.jsonl\ndetections = detections.jsonl\n"
        "gallery = gallery.jsonl\ncast = cast.json\nsubtitles = subs.srt\nground_truth = gt.jsonl\n"
        "output_dir = out\n\n[movie]\ntitle = \"Gone Girl\"\n\n[tracker]\nmin_len = 3\n\n"
        "[backend]\nkind = mock\nretry_base_ms = 0\n"
    )
    return tmp_path


def test_generate_identify_and_eval(movie):
    config = adgen.load_config(movie / "run.toml", {"prompt.length_policy": "fixed:8"})
    result = adgen.generate(config)
    assert result["done"] == 2 and result["failed"] == 0
    assert [len(o["text"].split()) for o in result["outputs"]] == [8, 8]
    lines = (movie / "out" / "ad_outputs.jsonl").read_text().splitlines()
    assert len(lines) == 2

    assert adgen.identify(config) == {"clip0": {"c0"}, "clip1": {"c1"}}

    report = adgen.evaluate(config, movie / "out" / "ad_outputs.jsonl")
    assert report["num_clips"] == 2
    assert 0.0 <= report["rouge_l"] <= 1.0
    assert 0.0 <= report["char_recall"] <= 1.0

    assert adgen.annotate_dump(config, movie / "dump") == 20


def test_config_errors(movie):
    with pytest.raises(adgen.ConfigError):
        adgen.load_config(movie / "run.toml", {"faceid.nope": "1"})
    config = adgen.load_config(movie / "run.toml")
    config.set("prompt.num_frames", "11")
    with pytest.raises(adgen.ConfigError):
        adgen.generate(config)


def test_metrics_and_helpers():
    assert adgen.tokenize("Amy's dog") == ["amy", "s", "dog"]
    assert adgen.rouge_l("the cat sat", ["the cat sat"]) == 1.0
    scores = adgen.cider_d(["a b", "c d"], [["a b"], ["c d"]])
    assert scores == pytest.approx([5.0, 5.0])
    assert adgen.iou([0, 0, 10, 10], [5, 0, 15, 10]) == pytest.approx(1 / 3)
    assert adgen.sample_frames(80) == [0, 8, 17, 26, 35, 43, 52, 61, 70, 79]
    frames = [np.zeros((8, 8, 3), np.uint8)] * 20 + [np.full((8, 8, 3), 255, np.uint8)] * 20
    assert adgen.detect_shots(frames) == [(0, 20), (20, 40)]
    assert not math.isnan(adgen.cider_d(["x"], [["y"]])[0])
