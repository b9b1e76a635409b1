"""
Tests for the HTTP service
"""

import pytest
from fastapi.testclient import TestClient

from adenet.service import create_app
from adenet.signalio import load_wav, read_manifest


@pytest.fixture
def client(tiny_checkpoint, corpus_root):
    return TestClient(create_app(tiny_checkpoint, corpus_root, "test"))


@pytest.fixture
def first_clip(corpus_root):
    return read_manifest(corpus_root, "test").records[0]


@pytest.mark.integration
class TestService:
    def test_health(self, client):
        response = client.get("/health")
        assert response.status_code == 200
        body = response.json()
        assert body["status"] == "healthy"
        assert body["variant"] == "adenet"
        assert body["clips"] == 4

    def test_detect(self, client, first_clip):
        response = client.post("/api/v1/detect", json={"clip_id": first_clip.clip_id})
        assert response.status_code == 200
        body = response.json()
        assert len(body["scores"]) == round(first_clip.duration_s * 25)
        assert [s["frame"] for s in body["scores"]] == list(range(len(body["scores"])))
        assert 0 <= body["speaking_frames"] <= len(body["scores"])

    def test_detect_unknown_clip(self, client):
        response = client.post("/api/v1/detect", json={"clip_id": "missing-00000"})
        assert response.status_code == 404
        assert "missing-00000" in response.json()["detail"]

    def test_detect_validates_request(self, client):
        assert client.post("/api/v1/detect", json={"clip_id": ""}).status_code == 422

    def test_enhance(self, client, first_clip, tmp_path):
        out = tmp_path / "enhanced.wav"
        response = client.post("/api/v1/enhance", json={"clip_id": first_clip.clip_id, "out_path": str(out)})
        assert response.status_code == 200
        body = response.json()
        assert body["num_samples"] == len(load_wav(out))
        assert body["duration_s"] == pytest.approx(body["num_samples"] / 16000)

    def test_enhance_needs_enhancement_branch(self, aclnet_checkpoint, corpus_root, first_clip, tmp_path):
        client = TestClient(create_app(aclnet_checkpoint, corpus_root, "test"))
        response = client.post(
            "/api/v1/enhance", json={"clip_id": first_clip.clip_id, "out_path": str(tmp_path / "x.wav")}
        )
        assert response.status_code == 400
        assert response.json()["error"] == "ConfigError"
