import pytest
from fastapi.testclient import TestClient

from outfitcomplete.apriori import build_lexicon, mine_frequent
from outfitcomplete.decoding import complete_itemset
from outfitcomplete.annotator import annotate
from outfitcomplete.service import ServiceState, build_app


@pytest.fixture(scope="module")
def loaded_state(overfit_params, taxonomy):
    state = ServiceState()
    state.params = overfit_params
    state.taxonomy = taxonomy
    txns = [{"jeans", "top"}, {"jeans", "top"}, {"jeans", "top"},
            {"jeans", "bag"}, {"jeans", "bag"}]
    state.lexicon = build_lexicon(mine_frequent(txns, 2))
    return state


@pytest.fixture(scope="module")
def client(loaded_state):
    return TestClient(build_app(preloaded=loaded_state))


@pytest.fixture()
def bare_client():
    return TestClient(build_app(preloaded=ServiceState()))


def test_health_always_up(bare_client):
    resp = bare_client.get("/health")
    assert resp.status_code == 200
    assert resp.json()["status"] == "ok"


def test_taxonomy_503_before_load(bare_client):
    assert bare_client.get("/taxonomy").status_code == 503
    assert bare_client.post("/complete",
                            json={"items": ["red dress"]}).status_code == 503


def test_taxonomy_terms_after_load(client, taxonomy):
    resp = client.get("/taxonomy")
    assert resp.status_code == 200
    body = resp.json()
    assert set(body) == {"apparel", "colors", "patterns", "synonyms"}
    assert set(body["apparel"]) == taxonomy.apparel_terms


def test_complete_contract(client):
    resp = client.post("/complete", json={"items": ["blue jeans"], "k": 4})
    assert resp.status_code == 200
    body = resp.json()
    cands = body["candidates"]
    assert 1 <= len(cands) <= 4
    scores = [c["score"] for c in cands]
    assert scores == sorted(scores, reverse=True)
    assert abs(sum(scores) - 1.0) < 1e-6
    for c in cands:
        assert c["item"]
        if not c["raw"]:
            assert c["apparel"]
        if c["attention"] is not None:
            assert abs(sum(c["attention"]) - 1.0) < 1e-6


def test_complete_matches_library_call(client, loaded_state):
    resp = client.post("/complete", json={"items": ["blue jeans"], "k": 3})
    items = annotate("blue jeans", loaded_state.taxonomy)
    direct = complete_itemset(items, loaded_state.params,
                              loaded_state.taxonomy, k=3)
    got = [(c["item"], pytest.approx(c["score"], abs=1e-9))
           for c in resp.json()["candidates"]]
    want = [(c.item.render() if c.item else " ".join(c.tokens), c.score)
            for c in direct]
    assert [g[0] for g in got] == [w[0] for w in want]
    for (_, gs), (_, ws) in zip(got, want):
        assert gs == ws


def test_complete_empty_items_rejected(client):
    assert client.post("/complete", json={"items": []}).status_code == 422
    assert client.post("/complete", json={}).status_code == 422


def test_complete_no_recognized_terms_422(client):
    resp = client.post("/complete", json={"items": ["lorem ipsum"]})
    assert resp.status_code == 422


def test_complete_unknown_words_warn(client):
    # taxonomy term absent from the tiny training vocabulary
    resp = client.post("/complete", json={"items": ["blue jeans", "kimono"]})
    assert resp.status_code == 200
    assert any("unknown" in w for w in resp.json()["warnings"])


def test_complete_k_bounds(client):
    assert client.post("/complete",
                       json={"items": ["blue jeans"], "k": 0}).status_code == 422
    assert client.post("/complete",
                       json={"items": ["blue jeans"], "k": 21}).status_code == 422


def test_apriori_method(client):
    resp = client.post("/complete",
                       json={"items": ["jeans"], "method": "apriori", "k": 5})
    assert resp.status_code == 200
    cands = resp.json()["candidates"]
    assert [c["item"] for c in cands] == ["top", "bag"]
    assert all(c["attention"] is None for c in cands)


def test_apriori_without_lexicon_409(overfit_params, taxonomy):
    state = ServiceState()
    state.params = overfit_params
    state.taxonomy = taxonomy
    c = TestClient(build_app(preloaded=state))
    resp = c.post("/complete", json={"items": ["jeans"], "method": "apriori"})
    assert resp.status_code == 409


def test_build_app_from_checkpoint_files(tmp_path, overfit_params):
    from outfitcomplete.model import save_checkpoint
    path = tmp_path / "model.ckpt"
    save_checkpoint(overfit_params, path)
    c = TestClient(build_app(model_path=str(path)))
    assert c.get("/taxonomy").status_code == 200
    assert c.post("/complete",
                  json={"items": ["blue jeans"]}).status_code == 200
