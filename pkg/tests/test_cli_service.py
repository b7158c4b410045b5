import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from slateaudit.audit import audit_oracle
from slateaudit.cli import main as cli_main
from slateaudit.embedding import ProviderError
from slateaudit.model import slate_from_ids
from slateaudit.pipeline import build_state, run_audit, run_pipeline
from slateaudit.sessionio import dumps_canonical
from slateaudit.service import create_app

DATA = Path(__file__).resolve().parents[1] / "data"
A1R = DATA / "sessions" / "a1r_like.json"
CF24 = DATA / "sessions" / "cf24_like.json"
DEMO = DATA / "sessions" / "demo_small.json"


@pytest.fixture(scope="module")
def a1r_state():
    return build_state(A1R)


@pytest.fixture(scope="module")
def a1r_client(a1r_state):
    return TestClient(create_app(a1r_state))


class TestCli:
    def test_audit_report_recomputable_by_oracle(self, tmp_path, a1r_state):
        out = tmp_path / "report.json"
        code = cli_main(
            ["--session", str(A1R), "--mode", "audit", "--out", str(out)]
        )
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["mode"] == "audit"
        for expansion in doc["expansions"]:
            ids = [m["question_id"] for m in expansion["slate"]["members"]]
            slate = slate_from_ids(a1r_state.matrix, ids)
            oracle = audit_oracle(a1r_state.matrix, slate, a1r_state.session.k)
            assert expansion["result"]["jr_value"] == oracle.jr_value

    def test_explicit_slate_audit(self, tmp_path):
        out = tmp_path / "r.json"
        code = cli_main(
            [
                "--session", str(DEMO), "--mode", "audit",
                "--slate", "q001,q005,q008", "--out", str(out),
            ]
        )
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["slate"]["provenance"] == "custom"
        assert [m["question_id"] for m in doc["slate"]["members"]] == [
            "q001", "q005", "q008",
        ]

    def test_random_mode_deterministic(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for out in (a, b):
            assert cli_main(
                ["--session", str(DEMO), "--mode", "random", "--seed", "9",
                 "--out", str(out)]
            ) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_optimize_mode_with_heatmap(self, tmp_path):
        out = tmp_path / "opt.json"
        heat = tmp_path / "heat.json"
        code = cli_main(
            ["--session", str(DEMO), "--mode", "optimize", "--solver", "builtin",
             "--grid", "exact", "--out", str(out), "--heatmap", str(heat)]
        )
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["ip"]["optimal"] is True
        assert doc["result"]["jr_value"] <= 1.0
        hm = json.loads(heat.read_text())
        assert len(hm["cells"]) == 3 and len(hm["cells"][0]) == 12

    def test_lp_export_mode(self, tmp_path):
        out = tmp_path / "model.lp"
        code = cli_main(
            ["--session", str(DEMO), "--mode", "optimize", "--solver", "export",
             "--out", str(out)]
        )
        assert code == 0
        assert out.read_text().startswith("Minimize")

    def test_generate_mode_mock(self, tmp_path):
        out = tmp_path / "gen.json"
        transcript = tmp_path / "t.jsonl"
        code = cli_main(
            ["--session", str(DEMO), "--mode", "generate", "--samples", "5",
             "--seed", "3", "--out", str(out), "--transcript", str(transcript)]
        )
        assert code == 0
        doc = json.loads(out.read_text())
        assert len(doc["samples"]) + len(doc["failures"]) == 5
        assert doc["best"]["result"]["jr_value"] == min(
            s["jr_value"] for s in doc["samples"]
        )
        assert len(transcript.read_text().splitlines()) >= 5

    def test_eval_embeddings_derived_auc(self, tmp_path, capsys):
        out = tmp_path / "auc.json"
        code = cli_main(
            ["--session", str(DEMO), "--mode", "eval-embeddings",
             "--embedding-model", "hash", "--pairs", str(DATA / "pairs_auc075.tsv"),
             "--out", str(out)]
        )
        assert code == 0
        assert json.loads(out.read_text())["auc"] == 0.75

    def test_compare_mode_structure(self, tmp_path):
        out = tmp_path / "cmp.json"
        code = cli_main(
            ["--session", str(DEMO), "--mode", "compare", "--samples", "6",
             "--random-seeds", "10", "--solver", "builtin", "--grid", "exact",
             "--out", str(out)]
        )
        assert code == 0
        methods = json.loads(out.read_text())["methods"]
        assert {"human", "random", "ip", "llm", "llm_best"} <= set(methods)
        assert methods["llm_best"]["jr_value"] <= methods["llm"]["mean_jr_value"]
        assert methods["ip"]["jr_value"] <= 1.0

    def test_generate_with_custom_prompt_file(self, tmp_path):
        prompt = tmp_path / "prompt.txt"
        prompt.write_text(
            "Questions:\n{questions}\nGenerate {k} summary questions, one per line."
        )
        out = tmp_path / "gen.json"
        code = cli_main(
            ["--session", str(DEMO), "--mode", "generate", "--samples", "2",
             "--prompt-file", str(prompt), "--out", str(out)]
        )
        assert code == 0
        assert len(json.loads(out.read_text())["samples"]) == 2

    def test_bundled_prompt_file_is_the_default_template(self):
        from slateaudit.generate import DEFAULT_PROMPT_TEMPLATE

        bundled = (DATA / "prompts" / "slate_prompt.txt").read_text(encoding="utf-8")
        assert bundled == DEFAULT_PROMPT_TEMPLATE

    def test_invalid_session_path(self):
        assert cli_main(["--session", "/nonexistent.json", "--mode", "audit"]) == 2

    def test_k_override(self, tmp_path):
        out = tmp_path / "r.json"
        code = cli_main(
            ["--session", str(DEMO), "--mode", "random", "--k", "5",
             "--out", str(out)]
        )
        assert code == 0
        assert len(json.loads(out.read_text())["slate"]["members"]) == 5


class TestService:
    def test_get_session(self, a1r_client):
        resp = a1r_client.get("/session")
        assert resp.status_code == 200
        doc = resp.json()
        assert doc["k"] == 8 and len(doc["questions"]) == 57

    def test_audit_bytes_match_cli(self, tmp_path, a1r_client):
        out = tmp_path / "cli.json"
        assert cli_main(["--session", str(A1R), "--mode", "audit", "--out", str(out)]) == 0
        resp = a1r_client.post("/audit", json={})
        assert resp.status_code == 200
        assert resp.content == out.read_bytes()
        assert "X-Elapsed-Seconds" in resp.headers

    def test_audit_explicit_slate_single_code_path(self, a1r_state, a1r_client):
        ids = list(a1r_state.session.question_ids[:8])
        resp = a1r_client.post("/audit", json={"slate": ids})
        assert resp.status_code == 200
        assert resp.content == dumps_canonical(run_audit(a1r_state, slate_ids=ids))

    def test_heatmap_cell_count(self, a1r_state, a1r_client):
        ids = ",".join(a1r_state.session.question_ids[:8])
        resp = a1r_client.get("/heatmap", params={"slate": ids})
        assert resp.status_code == 200
        doc = resp.json()
        cells = doc["cells"]
        assert len(cells) == 8 and len(cells[0]) == 57
        assert sum(len(r) for r in cells) == 456
        # cells equal the matrix entries used by the audit
        col = a1r_state.matrix.column(a1r_state.session.question_ids[0])
        assert cells[0] == [float(x) for x in col]

    def test_optimize_then_audit_property(self, a1r_state, a1r_client):
        opt = a1r_client.post("/optimize", json={"solver": "scipy"}).json()
        ids = [m["question_id"] for m in opt["slate"]["members"]]
        audit_doc = a1r_client.post("/audit", json={"slate": ids}).json()
        best = audit_doc["result"]["jr_value"]
        assert best == opt["result"]["jr_value"]
        for seed in range(5):
            rnd = a1r_client.post("/random", json={"seed": seed}).json()
            assert best <= rnd["result"]["jr_value"]

    def test_generate_endpoint(self, a1r_client):
        resp = a1r_client.post("/generate", json={"samples": 3, "seed": 1})
        assert resp.status_code == 200
        doc = resp.json()
        assert doc["mode"] == "generate"
        assert len(doc["samples"]) == 3

    def test_export_endpoint(self, a1r_client):
        doc = a1r_client.get("/export").json()
        assert doc["schema"] == "slateaudit/export-v1"
        assert len(doc["utility_matrix"]["values"]) == 57
        assert doc["embedding_model"] == "planted-a1r"

    def test_unknown_slate_id_is_400(self, a1r_client):
        resp = a1r_client.post("/audit", json={"slate": ["nope"]})
        assert resp.status_code == 400
        assert "nope" in resp.json()["error"]

    def test_malformed_body_is_422_with_field(self, a1r_client):
        resp = a1r_client.post("/generate", json={"samples": "many"})
        assert resp.status_code == 422
        assert any("samples" in str(item.get("loc")) for item in resp.json()["detail"])

    def test_wrong_slate_size_is_400(self, a1r_client):
        resp = a1r_client.post("/audit", json={"slate": []})
        assert resp.status_code == 400

    def test_provider_outage_is_503_with_retry_after(self, a1r_state):
        class DownProvider:
            model_id = "down"

            def embed_batch(self, texts):
                raise ProviderError("backend unreachable")

        state = a1r_state.__class__(
            session=a1r_state.session,
            embeddings=a1r_state.embeddings,
            matrix=a1r_state.matrix,
            provider=DownProvider(),
            cache=None,
            embeddings_ref=a1r_state.embeddings_ref,
            session_path=a1r_state.session_path,
        )
        client = TestClient(create_app(state))

        class FreshClient:
            def complete(self, prompt, temperature):
                return "\n".join(f"brand new question {i}?" for i in range(8))

        import slateaudit.pipeline as pipeline

        original = pipeline.make_llm_client
        pipeline.make_llm_client = lambda spec, seed=0: FreshClient()
        try:
            resp = client.post("/generate", json={"samples": 1})
        finally:
            pipeline.make_llm_client = original
        assert resp.status_code == 503
        assert resp.headers.get("Retry-After") == "30"


class TestRunPipeline:
    def test_unknown_mode(self, a1r_state):
        with pytest.raises(ValueError, match="unknown mode"):
            run_pipeline(a1r_state, "transcend", {})

    def test_cf24_human_satisfies_jr(self):
        state = build_state(CF24)
        doc = run_audit(state)
        assert doc["result"]["jr_value"] == 80 / 164
        assert doc["result"]["satisfies_jr"] is True
