"""Wire-level protocol tests against a live service instance."""

import requests


def test_handshake_golden(stub_service):
    payload = requests.get(f"{stub_service}/v1/handshake", timeout=5).json()
    assert payload == {
        "name": "stub",
        "version": "1",
        "max_concurrency": 8,
        "supports_inline_label_probs": True,
    }


def test_generate_schema(stub_service):
    response = requests.post(
        f"{stub_service}/v1/generate",
        json={
            "document": "doc",
            "summary_prefix": "",
            "target_label": "Issue",
            "params": {"num_candidates": 2},
        },
        timeout=5,
    )
    assert response.status_code == 200
    candidates = response.json()["candidates"]
    assert len(candidates) == 2
    for candidate in candidates:
        assert set(candidate) == {"text", "log_likelihood", "label_probs"}


def test_generate_defaults_apply(stub_service):
    response = requests.post(
        f"{stub_service}/v1/generate", json={"document": "doc"}, timeout=5
    )
    assert response.status_code == 200
    assert len(response.json()["candidates"]) == 4


def test_classify_label_order_golden(stub_service, banks_path):
    import json

    banks = json.loads(banks_path.read_text())
    sentences = [banks[label][0] for label in ("Issue", "Conclusion", "Reason", "Non_IRC")]
    response = requests.post(
        f"{stub_service}/v1/classify", json={"sentences": sentences}, timeout=5
    )
    probs = response.json()["probs"]
    # one sentence per label, in canonical order: the argmax walks the diagonal
    for position, vec in enumerate(probs):
        assert vec.index(max(vec)) == position


def test_malformed_body_is_400(stub_service):
    response = requests.post(
        f"{stub_service}/v1/generate", json={"summary_prefix": 3}, timeout=5
    )
    assert response.status_code == 400
    assert "error" in response.json()


def test_unknown_label_is_400(stub_service):
    response = requests.post(
        f"{stub_service}/v1/generate",
        json={"document": "doc", "target_label": "bogus"},
        timeout=5,
    )
    assert response.status_code == 400


def test_503_while_backend_loads():
    from service_harness import RunningService

    class StillLoading:
        name = "slow"
        version = "1"
        max_concurrency = 1
        supports_inline_label_probs = False

        def ready(self):
            return False

    with RunningService(StillLoading()) as url:
        response = requests.post(f"{url}/v1/generate", json={"document": "doc"}, timeout=5)
        assert response.status_code == 503
        assert "error" in response.json()
        # the handshake itself stays available during loading
        assert requests.get(f"{url}/v1/handshake", timeout=5).status_code == 200
