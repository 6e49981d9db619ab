import pytest
from fastapi.testclient import TestClient

from matchkit import parse, serialize, validate
from matchkit.service import create_app


@pytest.fixture()
def client():
    return TestClient(create_app())


@pytest.fixture()
def doc_id(client, bwv858_text):
    response = client.post("/v1/docs", content=bwv858_text.encode())
    assert response.status_code == 201
    return response.json()["id"]


def get_file(client, doc_id) -> str:
    response = client.get(f"/v1/docs/{doc_id}/file")
    assert response.status_code == 200
    return response.text


class TestCreate:
    def test_excerpt_reports_repairs(self, client, bwv858_text):
        response = client.post("/v1/docs", content=bwv858_text.encode())
        assert response.status_code == 201
        body = response.json()
        assert body["version"] == 1
        assert len(body["diagnostics"]) >= 4
        assert all(d["severity"] == "warning" for d in body["diagnostics"])

    def test_empty_body_rejected(self, client):
        assert client.post("/v1/docs", content=b"").status_code == 422

    def test_garbage_only_rejected(self, client):
        assert client.post("/v1/docs", content=b"   \n  \n").status_code == 422

    def test_canonical_has_no_diagnostics(self, client, bwv858_canonical):
        response = client.post("/v1/docs", content=bwv858_canonical.encode())
        assert response.status_code == 201
        assert response.json()["diagnostics"] == []

    def test_oversize_body(self, bwv858_text):
        small = TestClient(create_app(max_body_bytes=64))
        assert small.post("/v1/docs", content=bwv858_text.encode()).status_code == 413


class TestViews:
    def test_alignment_counts(self, client, doc_id):
        body = client.get(f"/v1/docs/{doc_id}/alignment").json()
        assert len(body["matches"]) == 9
        assert body["insertions"] == [7, 8, 9, 10]
        assert body["deletions"] == ["n9"]
        assert body["version"] == 1
        assert len(body["perf_notes"]) == 13
        assert len(body["score_notes"]) == 10
        note0 = next(n for n in body["perf_notes"] if n["id"] == 0)
        assert note0["onset_seconds"] == pytest.approx(1.15)

    def test_unknown_id_is_404(self, client):
        assert client.get("/v1/docs/feedface/alignment").status_code == 404

    def test_timemap(self, client, doc_id):
        body = client.get(f"/v1/docs/{doc_id}/timemap").json()
        assert body["ticks_per_quarter"] == 480
        assert [a["tick"] for a in body["anchors"]] == [1620, 2704, 3716, 4752]
        assert body["anchors"][0]["seconds"] == pytest.approx(1620 / 960)

    def test_file_round_trips_through_the_wire(self, client, doc_id):
        text = get_file(client, doc_id)
        reparsed, diags = parse(text)
        assert not [d for d in diags if d.severity == "error"]
        assert serialize(reparsed) == text

    def test_meta(self, client, doc_id):
        body = client.get(f"/v1/docs/{doc_id}").json()
        assert body == {"id": doc_id, "version": 1, "dirty": False, "line_count": 28}


def edit(client, doc_id, ops, base_version):
    return client.post(
        f"/v1/docs/{doc_id}/edits", json={"base_version": base_version, "ops": ops}
    )


class TestEdits:
    def test_link_insertion_to_deletion(self, client, doc_id):
        before = get_file(client, doc_id)
        response = edit(client, doc_id, [{"kind": "set_match", "perf_id": 7, "anchor": "n9"}], 1)
        assert response.status_code == 200
        assert response.json()["version"] == 2

        body = client.get(f"/v1/docs/{doc_id}/alignment").json()
        assert len(body["matches"]) == 10
        assert body["insertions"] == [8, 9, 10]
        assert body["deletions"] == []

        after = get_file(client, doc_id)
        removed = set(before.splitlines()) - set(after.splitlines())
        added = set(after.splitlines()) - set(before.splitlines())
        assert removed == {
            "insertion-note(7,75,3972,4084,58,0,0).",
            "snote(n9,[C,#],5,1:4,7/32,1/32,3.875,4.0,[])-deletion.",
        }
        assert added == {
            "snote(n9,[C,#],5,1:4,7/32,1/32,3.875,4.0,[])-note(7,75,3972,4084,58,0,0)."
        }
        # the merged line sits where the insertion line was
        assert after.splitlines().index(next(iter(added))) == before.splitlines().index(
            "insertion-note(7,75,3972,4084,58,0,0)."
        )

    def test_linking_matched_anchor_is_rejected_atomically(self, client, doc_id):
        before = get_file(client, doc_id)
        response = edit(client, doc_id, [{"kind": "set_match", "perf_id": 7, "anchor": "n0"}], 1)
        assert response.status_code == 422
        assert response.json()["detail"]["code"] == "anchor-already-matched"
        assert get_file(client, doc_id) == before
        assert client.get(f"/v1/docs/{doc_id}").json()["version"] == 1

    def test_batch_is_atomic(self, client, doc_id):
        before = get_file(client, doc_id)
        ops = [
            {"kind": "set_match", "perf_id": 7, "anchor": "n9"},
            {"kind": "set_match", "perf_id": 8, "anchor": "n0"},  # fails
        ]
        response = edit(client, doc_id, ops, 1)
        assert response.status_code == 422
        assert get_file(client, doc_id) == before

    def test_stale_version_conflicts(self, client, doc_id):
        assert edit(client, doc_id, [{"kind": "set_insertion", "perf_id": 0}], 1).status_code == 200
        response = edit(client, doc_id, [{"kind": "set_insertion", "perf_id": 1}], 1)
        assert response.status_code == 409

    def test_unlink_splits_into_deletion_and_insertion(self, client, doc_id):
        response = edit(client, doc_id, [{"kind": "set_insertion", "perf_id": 0}], 1)
        assert response.status_code == 200
        body = client.get(f"/v1/docs/{doc_id}/alignment").json()
        assert len(body["matches"]) == 8
        assert 0 in body["insertions"]
        assert "n0" in body["deletions"]

    def test_set_deletion_of_matched_anchor(self, client, doc_id):
        response = edit(client, doc_id, [{"kind": "set_deletion", "anchor": "n1"}], 1)
        assert response.status_code == 200
        body = client.get(f"/v1/docs/{doc_id}/alignment").json()
        assert "n1" in body["deletions"] and 1 in body["insertions"]

    def test_clear_aliases_unlink(self, client, doc_id):
        assert edit(client, doc_id, [{"kind": "clear", "perf_id": 0}], 1).status_code == 200
        body = client.get(f"/v1/docs/{doc_id}/alignment").json()
        assert 0 in body["insertions"]

    def test_relink_displaces_old_anchor(self, client, doc_id):
        # note 0 is matched to n0; moving it onto the deleted n9 must turn
        # n0 into a deletion while counts stay balanced
        response = edit(client, doc_id, [{"kind": "set_match", "perf_id": 0, "anchor": "n9"}], 1)
        assert response.status_code == 200
        body = client.get(f"/v1/docs/{doc_id}/alignment").json()
        assert {"perf_id": 0, "anchor": "n9"} in body["matches"]
        assert len(body["matches"]) == 9
        assert body["deletions"] == ["n0"]
        assert body["insertions"] == [7, 8, 9, 10]

    def test_two_step_swap(self, client, doc_id):
        ops = [
            {"kind": "set_insertion", "perf_id": 0},
            {"kind": "set_match", "perf_id": 7, "anchor": "n0"},
        ]
        assert edit(client, doc_id, ops, 1).status_code == 200
        body = client.get(f"/v1/docs/{doc_id}/alignment").json()
        assert {"perf_id": 7, "anchor": "n0"} in body["matches"]
        assert 0 in body["insertions"] and 7 not in body["insertions"]

    def test_unknown_entities(self, client, doc_id):
        assert edit(client, doc_id, [{"kind": "set_match", "perf_id": 999, "anchor": "n9"}], 1).status_code == 422
        assert edit(client, doc_id, [{"kind": "set_match", "perf_id": 7, "anchor": "zz"}], 1).status_code == 422

    def test_every_accepted_edit_keeps_the_file_valid(self, client, doc_id):
        version = 1
        for ops in (
            [{"kind": "set_match", "perf_id": 7, "anchor": "n9"}],
            [{"kind": "set_insertion", "perf_id": 0}],
            [{"kind": "set_match", "perf_id": 9, "anchor": "n0"}],
        ):
            response = edit(client, doc_id, ops, version)
            assert response.status_code == 200
            version = response.json()["version"]
            doc, diags = parse(get_file(client, doc_id))
            assert not [d for d in diags if d.severity == "error"]
            assert not [d for d in validate(doc) if d.severity == "error"]


class TestUndo:
    def test_undo_restores_bytes(self, client, doc_id):
        before = get_file(client, doc_id)
        assert edit(client, doc_id, [{"kind": "set_match", "perf_id": 7, "anchor": "n9"}], 1).status_code == 200
        response = client.post(f"/v1/docs/{doc_id}/undo")
        assert response.status_code == 200
        assert response.json()["version"] == 3
        assert get_file(client, doc_id) == before

    def test_nothing_to_undo(self, client, doc_id):
        assert client.post(f"/v1/docs/{doc_id}/undo").status_code == 409


class TestFmtEndpoint:
    def test_sorts_canonically_and_is_idempotent(self, client, doc_id):
        first = client.post(f"/v1/docs/{doc_id}/fmt")
        assert first.status_code == 200
        once = get_file(client, doc_id)
        client.post(f"/v1/docs/{doc_id}/fmt")
        assert get_file(client, doc_id) == once
        # canonical order: all info lines lead, sustains close the file
        lines = once.splitlines()
        assert all(l.startswith("info(") for l in lines[:5])
        assert lines[-2].startswith("sustain(") and lines[-1].startswith("sustain(")

    def test_fmt_is_undoable(self, client, doc_id):
        before = get_file(client, doc_id)
        client.post(f"/v1/docs/{doc_id}/fmt")
        client.post(f"/v1/docs/{doc_id}/undo")
        assert get_file(client, doc_id) == before


class TestPersistence:
    def test_sessions_survive_restart(self, tmp_path, bwv858_text):
        state = tmp_path / "state"
        first = TestClient(create_app(state_dir=str(state)))
        doc_id = first.post("/v1/docs", content=bwv858_text.encode()).json()["id"]
        assert edit(first, doc_id, [{"kind": "set_match", "perf_id": 7, "anchor": "n9"}], 1).status_code == 200
        file_before = get_file(first, doc_id)

        second = TestClient(create_app(state_dir=str(state)))
        assert get_file(second, doc_id) == file_before
        assert second.get(f"/v1/docs/{doc_id}").json()["version"] == 2
