from __future__ import annotations

import base64
import sys

import numpy as np
import pytest

from helpers import random_blob_mask, two_region_sample
from scribblekit.masks import mask_from_png_bytes, mask_png_bytes, resize_mask
from scribblekit.rng import rng_for
from scribblekit.segmenters import (
    CropWindow,
    EmptySegmenter,
    GeodesicSegmenter,
    HttpSegmenter,
    OracleSegmenter,
    SegmentationRequest,
    SubprocessSegmenter,
    oracle_predict,
    segmenter_from_spec,
)
from scribblekit.strokes import ScribbleMaps


def make_request(image=None, positive=None, negative=None, previous=None, shape=(16, 16), crop=None):
    maps = ScribbleMaps(
        positive if positive is not None else np.zeros(shape, bool),
        negative if negative is not None else np.zeros(shape, bool),
    )
    prev = previous if previous is not None else np.zeros(shape, bool)
    return SegmentationRequest(image=image, scribbles=maps, previous_mask=prev, crop=crop)


def stroke_row(shape, row, c0, c1):
    m = np.zeros(shape, bool)
    m[row, c0:c1] = True
    return m


class TestSegmentationRequest:
    def test_shape_property(self):
        req = make_request(shape=(10, 12))
        assert req.shape == (10, 12)

    def test_mask_dimension_mismatch(self):
        with pytest.raises(ValueError):
            SegmentationRequest(
                image=None,
                scribbles=ScribbleMaps.empty((8, 8)),
                previous_mask=np.zeros((9, 8), bool),
            )

    def test_image_dimension_mismatch(self):
        with pytest.raises(ValueError):
            make_request(image=np.zeros((4, 4, 3), np.uint8), shape=(8, 8))

    def test_crop_window_shape(self):
        w = CropWindow(2, 3, 10, 9)
        assert w.shape == (8, 6)


class TestOracleSegmenter:
    def test_returns_ground_truth(self):
        gt = random_blob_mask((20, 20), rng_for(110))
        seg = OracleSegmenter(gt)
        out = seg.predict(make_request(shape=(20, 20)))
        assert np.array_equal(out, gt)

    def test_ignores_scribbles_and_previous(self):
        gt = random_blob_mask((20, 20), rng_for(111))
        seg = OracleSegmenter(gt)
        req = make_request(
            positive=stroke_row((20, 20), 3, 2, 9),
            previous=random_blob_mask((20, 20), rng_for(112)),
            shape=(20, 20),
        )
        assert np.array_equal(seg.predict(req), gt)

    def test_crop_aware_prediction(self):
        gt = random_blob_mask((32, 32), rng_for(113))
        seg = OracleSegmenter(gt)
        window = CropWindow(4, 6, 20, 26)
        req = make_request(shape=(24, 24), crop=window)
        want = resize_mask(gt[4:20, 6:26], (24, 24))
        assert np.array_equal(seg.predict(req), want)

    def test_noise_is_deterministic_per_request(self):
        gt = random_blob_mask((24, 24), rng_for(114))
        seg = OracleSegmenter(gt, noise_level=0.5, seed=7)
        req = make_request(positive=stroke_row((24, 24), 5, 3, 11), shape=(24, 24))
        a, b = seg.predict(req), seg.predict(req)
        assert np.array_equal(a, b)

    def test_noise_varies_with_request_contents(self):
        gt = np.zeros((24, 24), bool)
        gt[6:18, 6:18] = True
        seg = OracleSegmenter(gt, noise_level=0.8, seed=3)
        outs = [
            seg.predict(make_request(positive=stroke_row((24, 24), r, 2, 12), shape=(24, 24)))
            for r in range(6)
        ]
        assert any(not np.array_equal(o, gt) for o in outs)

    def test_noise_level_validation(self):
        with pytest.raises(ValueError):
            OracleSegmenter(np.zeros((4, 4), bool), noise_level=1.5)

    def test_function_wrapper(self):
        gt = random_blob_mask((12, 12), rng_for(115))
        out = oracle_predict(make_request(shape=(12, 12)), gt)
        assert np.array_equal(out, gt)


def test_empty_segmenter():
    out = EmptySegmenter().predict(make_request(shape=(9, 7)))
    assert out.shape == (9, 7) and not out.any()


class TestGeodesicSegmenter:
    def test_requires_image(self):
        seg = GeodesicSegmenter()
        with pytest.raises(ValueError):
            seg.predict(make_request(positive=stroke_row((8, 8), 4, 1, 6), shape=(8, 8)))

    def test_no_scribbles_returns_previous(self):
        rng = rng_for(116)
        image, _ = two_region_sample(rng, size=24)
        prev = random_blob_mask((24, 24), rng)
        out = GeodesicSegmenter().predict(make_request(image=image, previous=prev, shape=(24, 24)))
        assert np.array_equal(out, prev)

    def test_two_region_exact_recovery(self):
        rng = rng_for(117)
        for _ in range(5):
            image, gt = two_region_sample(rng, size=32)
            rows = np.argwhere(gt)
            mid_r = int(np.median(rows[:, 0]))
            cols = np.flatnonzero(gt[mid_r])
            positive = np.zeros_like(gt)
            positive[mid_r, cols[len(cols) // 4] : cols[3 * len(cols) // 4] + 1] = True
            negative = np.zeros_like(gt)
            negative[0, :] = True
            out = GeodesicSegmenter().predict(
                make_request(image=image, positive=positive, negative=negative, shape=(32, 32))
            )
            assert np.array_equal(out, gt)

    def test_scribbles_are_authoritative(self):
        rng = rng_for(118)
        image, gt = two_region_sample(rng, size=24)
        positive = np.zeros_like(gt)
        positive[0, 0:5] = True  # deliberately in the background
        negative = np.zeros_like(gt)
        negative[12, 12] = gt[12, 12]
        out = GeodesicSegmenter().predict(
            make_request(image=image, positive=positive, negative=negative, shape=(24, 24))
        )
        assert out[0, 0:5].all()
        if negative.any():
            assert not out[negative].any()

    def test_uniform_image_center_dot(self):
        image = np.full((21, 21, 3), 128, np.uint8)
        positive = np.zeros((21, 21), bool)
        positive[10, 10] = True
        out = GeodesicSegmenter().predict(
            make_request(image=image, positive=positive, shape=(21, 21))
        )
        assert out[10, 10]
        assert not out[0, 0] and not out[0, 20] and not out[20, 0] and not out[20, 20]
        assert 0 < out.sum() < 21 * 21

    def test_previous_mask_acts_as_positive_seed(self):
        image = np.full((24, 24, 3), 90, np.uint8)
        prev = np.zeros((24, 24), bool)
        prev[8:16, 8:16] = True
        negative = np.zeros((24, 24), bool)
        negative[1, 1:4] = True
        out = GeodesicSegmenter().predict(
            make_request(image=image, negative=negative, previous=prev, shape=(24, 24))
        )
        assert (out & prev).sum() == prev.sum()
        assert not out[negative].any()

    def test_no_seeds_at_all_gives_empty(self):
        image = np.full((12, 12, 3), 40, np.uint8)
        negative = np.zeros((12, 12), bool)
        negative[5, 5] = True
        out = GeodesicSegmenter().predict(
            make_request(image=image, negative=negative, shape=(12, 12))
        )
        assert not out.any()

    def test_deterministic(self):
        rng = rng_for(119)
        image, gt = two_region_sample(rng, size=24)
        positive = np.zeros_like(gt)
        positive[12, 10:14] = True
        req = make_request(image=image, positive=positive, shape=(24, 24))
        seg = GeodesicSegmenter()
        assert np.array_equal(seg.predict(req), seg.predict(req))


class TestHttpSegmenter:
    def test_round_trip_with_stubbed_transport(self, monkeypatch):
        import requests

        want = random_blob_mask((14, 14), rng_for(120))
        seen = {}

        class FakeResponse:
            def raise_for_status(self):
                pass

            def json(self):
                return {"mask": base64.b64encode(mask_png_bytes(want)).decode("ascii")}

        def fake_post(url, json=None, timeout=None):
            seen["url"] = url
            seen["json"] = json
            seen["timeout"] = timeout
            return FakeResponse()

        monkeypatch.setattr(requests, "post", fake_post)
        seg = HttpSegmenter("http://segmenter.test/predict", timeout=9.0)
        image = np.zeros((14, 14, 3), np.uint8)
        positive = stroke_row((14, 14), 4, 2, 9)
        out = seg.predict(make_request(image=image, positive=positive, shape=(14, 14)))

        assert np.array_equal(out, want)
        assert seen["url"] == "http://segmenter.test/predict"
        assert seen["timeout"] == 9.0
        payload = seen["json"]
        assert set(payload) == {"image", "positive", "negative", "previous"}
        sent = mask_from_png_bytes(base64.b64decode(payload["positive"]))
        assert np.array_equal(sent, positive)

    def test_shape_mismatch_rejected(self, monkeypatch):
        import requests

        class FakeResponse:
            def raise_for_status(self):
                pass

            def json(self):
                return {
                    "mask": base64.b64encode(
                        mask_png_bytes(np.zeros((5, 5), bool))
                    ).decode("ascii")
                }

        monkeypatch.setattr(requests, "post", lambda *a, **k: FakeResponse())
        seg = HttpSegmenter("http://segmenter.test/predict")
        with pytest.raises(ValueError):
            seg.predict(make_request(shape=(8, 8)))


ECHO_SEGMENTER = """
import json, sys
from scribblekit.masks import load_mask, save_mask

descriptor = json.loads(open(sys.stdin.readline().strip()).read())
mask = load_mask(descriptor["positive"]) | load_mask(descriptor["previous"])
out = descriptor["positive"].replace("positive.png", "out.png")
save_mask(mask, out)
print(out)
"""


class TestSubprocessSegmenter:
    def test_round_trip(self, tmp_path):
        script = tmp_path / "echo_segmenter.py"
        script.write_text(ECHO_SEGMENTER)
        seg = SubprocessSegmenter(f"{sys.executable} {script}")
        positive = stroke_row((10, 10), 2, 1, 8)
        prev = np.zeros((10, 10), bool)
        prev[7, 7] = True
        out = seg.predict(make_request(positive=positive, previous=prev, shape=(10, 10)))
        assert np.array_equal(out, positive | prev)

    def test_failure_surfaces_stderr(self, tmp_path):
        script = tmp_path / "broken.py"
        script.write_text("import sys; sys.stderr.write('boom'); sys.exit(3)\n")
        seg = SubprocessSegmenter(f"{sys.executable} {script}")
        with pytest.raises(RuntimeError, match="boom"):
            seg.predict(make_request(shape=(6, 6)))

    def test_silent_child_rejected(self, tmp_path):
        script = tmp_path / "silent.py"
        script.write_text("pass\n")
        seg = SubprocessSegmenter(f"{sys.executable} {script}")
        with pytest.raises(RuntimeError):
            seg.predict(make_request(shape=(6, 6)))

    def test_empty_command_rejected(self):
        with pytest.raises(ValueError):
            SubprocessSegmenter("")


class TestSegmenterFromSpec:
    def test_named_segmenters(self):
        gt = np.zeros((4, 4), bool)
        gt[1, 1] = True
        assert isinstance(segmenter_from_spec("oracle", gt=gt), OracleSegmenter)
        assert isinstance(segmenter_from_spec("empty"), EmptySegmenter)
        assert isinstance(segmenter_from_spec("geodesic"), GeodesicSegmenter)

    def test_oracle_requires_gt(self):
        with pytest.raises(ValueError):
            segmenter_from_spec("oracle")

    def test_adapters(self):
        http = segmenter_from_spec("http://host/predict")
        assert isinstance(http, HttpSegmenter) and http.url == "http://host/predict"
        sub = segmenter_from_spec("subprocess:python3 seg.py --fast")
        assert isinstance(sub, SubprocessSegmenter)
        assert sub.argv == ["python3", "seg.py", "--fast"]

    def test_unknown_name_rejected(self):
        with pytest.raises(ValueError):
            segmenter_from_spec("banana")
