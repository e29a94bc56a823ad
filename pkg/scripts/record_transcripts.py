"""Record golden service transcripts for the UI contract tests.

Spins the session service in-process on a small synthetic survey and writes
every request/response pair to frontend/test/fixtures/. Re-run after any
service payload change:

    python3 scripts/record_transcripts.py
"""

import json
import tempfile
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient

from adaptivevaa import synthetic
from adaptivevaa.dataset import binarize, load_survey_dir
from adaptivevaa.latent import IdealFitConfig, fit_ideal, save_model
from adaptivevaa.service import ServiceConfig, create_app

FIXTURES = Path(__file__).resolve().parent.parent / "frontend" / "test" / "fixtures"


class Recorder:
    def __init__(self, client: TestClient):
        self.client = client
        self.exchanges = []

    def request(self, method: str, path: str, body=None):
        response = self.client.request(method, path, json=body)
        self.exchanges.append({
            "request": {"method": method, "path": path,
                        **({"body": body} if body is not None else {})},
            "response": {"status": response.status_code, "body": response.json()},
        })
        return response


def build_client(root: Path) -> TestClient:
    data_dir = root / "data"
    synthetic.write_survey_dir(data_dir, n_train=80, n_test=10, n_questions=10,
                               seed=3, rapid_size=4)
    survey = load_survey_dir(data_dir)
    fit = fit_ideal(binarize(survey.train), IdealFitConfig(seed=3))
    model_path = root / "model.json"
    save_model(fit.model, model_path)
    config = ServiceConfig(data_dir=data_dir, model_path=model_path, m=5,
                           grid_resolution=21, session_db=root / "sessions.sqlite")
    return TestClient(create_app(config))


def record_full_session(client, selector: str, answers) -> dict:
    rec = Recorder(client)
    response = rec.request("POST", "/api/sessions", {"selector": selector})
    payload = response.json()
    for value in answers:
        if payload["done"]:
            break
        question_id = payload["question"]["id"]
        payload = rec.request(
            "POST", f"/api/sessions/{payload['session_id']}/answers",
            {"question_id": question_id, "answer": value}).json()
    return {"meta": {"selector": selector, "m": 5}, "exchanges": rec.exchanges}


def record_conflict(client) -> dict:
    rec = Recorder(client)
    payload = rec.request("POST", "/api/sessions",
                          {"selector": "default_order"}).json()
    sid = payload["session_id"]
    qid = payload["question"]["id"]
    # another tab answers the same question out-of-band (not recorded) ...
    client.post(f"/api/sessions/{sid}/answers",
                json={"question_id": qid, "answer": 1})
    # ... so this tab's stale submission gets a 409 and must resync
    rec.request("POST", f"/api/sessions/{sid}/answers",
                {"question_id": qid, "answer": 0})
    rec.request("GET", f"/api/sessions/{sid}")
    return {"meta": {"selector": "default_order", "m": 5}, "exchanges": rec.exchanges}


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        client = build_client(Path(tmp))
        rng = np.random.default_rng(17)
        transcripts = {
            "full_posterior_rmse": record_full_session(
                client, "posterior_rmse", [int(rng.integers(2)) for _ in range(10)]),
            "skips_fixed_gini": record_full_session(
                client, "fixed_gini",
                [1, "skip", 0, "skip", 1, 1, 0, "skip", 1, 0]),
            "complete_default_order": record_full_session(
                client, "default_order", [int(rng.integers(2)) for _ in range(10)]),
            "conflict_resync": record_conflict(client),
        }
    for name, doc in transcripts.items():
        path = FIXTURES / f"{name}.json"
        path.write_text(json.dumps(doc, indent=1))
        print(f"wrote {path} ({len(doc['exchanges'])} exchanges)")


if __name__ == "__main__":
    main()
