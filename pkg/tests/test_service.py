import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from cfadapt.adapt import AdaptConfig, run_dfa
from cfadapt.counterfactual import SearchConfig
from cfadapt.harness import eval_scenes_for, gen_shift_task, gen_train_task
from cfadapt.oracle import UserModel
from cfadapt.policy import TrainConfig, architecture_for, init, train_bc
from cfadapt.service import API_VERSION, create_app


@pytest.fixture(scope="module")
def client():
    with TestClient(create_app()) as c:
        yield c


def _create(client, **kw):
    body = dict(domain="nav2d", shift_type="ConceptTI", seed=0, eval_count=4)
    body.update(kw)
    r = client.post("/sessions", json=body)
    assert r.status_code == 200, r.text
    return r.json()


def _action_list(actions):
    out = []
    for a in actions:
        out.append(int(a) if np.isscalar(a) and not hasattr(a, "__len__") else [float(v) for v in a])
    return out


def _demo_actions(domain="nav2d", shift="ConceptTI", seed=0):
    task = gen_shift_task(gen_train_task(domain, 0), shift, seed)
    user = UserModel(task.reward, task.shifted, seed=[seed, 0])
    return task, _action_list(user.provide_demo(task.test_scene).actions)


def _poll_eval(client, sid, timeout=60.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        r = client.get(f"/sessions/{sid}/eval")
        if r.status_code != 202:
            return r
        assert r.json()["code"] == "pending"
        assert "retry-after" in {k.lower() for k in r.headers}
        time.sleep(0.05)
    raise TimeoutError("finetune job did not finish")


def test_create_session_payload(client):
    view = _create(client)
    assert view["version"] == API_VERSION
    assert view["phase"] == "awaiting_verdict"
    assert view["horizon"] == 20
    roll = view["rollout"]
    assert len(roll["frames"]) == 20 and len(roll["actions"]) == 20
    assert roll["frames"][0]["encoding"] == "png"
    r = client.get(f"/sessions/{view['id']}")
    assert r.status_code == 200 and r.json()["id"] == view["id"]


def test_unknown_session_404(client):
    r = client.get("/sessions/nope")
    assert r.status_code == 404
    body = r.json()
    assert set(body) == {"code", "message", "allowed"}
    assert body["code"] == "not_found"


def test_validation_errors(client):
    r = client.post("/sessions", json={"domain": "mars", "shift_type": "ConceptTI", "seed": 0})
    assert r.status_code == 422 and r.json()["code"] == "unknown_domain"
    r = client.post("/sessions", json={"domain": "nav2d", "shift_type": "Weird", "seed": 0})
    assert r.status_code == 422 and r.json()["code"] == "unknown_shift"


def test_phase_violation_409(client):
    view = _create(client, seed=1)
    sid = view["id"]
    r = client.post(f"/sessions/{sid}/feedback", json={"valid": True, "relevance": "TI"})
    assert r.status_code == 409
    assert r.json()["code"] == "phase_violation"
    assert r.json()["allowed"] == ["awaiting_feedback"]


def test_success_verdict_closes(client):
    view = _create(client, shift_type="Other", seed=2)
    sid = view["id"]
    r = client.post(f"/sessions/{sid}/verdict", json={"success": True})
    assert r.status_code == 200
    assert r.json()["phase"] == "evaluated" and r.json()["status"] == "success"


def test_demo_length_and_content_validation(client):
    view = _create(client, seed=3)
    sid = view["id"]
    client.post(f"/sessions/{sid}/verdict", json={"success": False})
    r = client.post(f"/sessions/{sid}/demo", json={"actions": [[0.0, 0.0]] * 3})
    assert r.status_code == 422 and r.json()["code"] == "bad_demo_length"
    r = client.post(f"/sessions/{sid}/demo", json={"actions": [["x", "y"]] * 20})
    assert r.status_code == 422 and r.json()["code"] == "bad_demo_actions"


def test_demo_success_check_and_override(client):
    view = _create(client, seed=4)
    sid = view["id"]
    client.post(f"/sessions/{sid}/verdict", json={"success": False})
    lazy = [[0.0, 0.0]] * 20  # stands still, fails the reward
    r = client.post(f"/sessions/{sid}/demo", json={"actions": lazy})
    assert r.status_code == 409 and r.json()["code"] == "demo_failed_success_check"
    r = client.post(f"/sessions/{sid}/demo", json={"actions": lazy, "override": True})
    assert r.status_code == 200


def test_full_loop_and_counterfactual(client):
    task, actions = _demo_actions(seed=0)
    view = _create(client, seed=0, finetune_epochs=600)
    sid = view["id"]
    client.post(f"/sessions/{sid}/verdict", json={"success": False})
    r = client.post(f"/sessions/{sid}/demo", json={"actions": actions})
    assert r.status_code == 200
    body = r.json()
    assert body["phase"] == "awaiting_feedback"
    cf = body["counterfactual"]
    assert cf["status"] == "found" and cf["edit_count"] == 1
    assert "edit_description" in body
    # cached counterfactual payload matches
    r = client.get(f"/sessions/{sid}/counterfactual")
    assert r.status_code == 200 and r.json()["counterfactual"] == cf

    r = client.post(f"/sessions/{sid}/feedback", json={"valid": True, "relevance": "TI"})
    assert r.status_code == 200
    assert r.json()["job"]["demos"] == 5  # demo + 4 color variants

    r = _poll_eval(client, sid)
    assert r.status_code == 200
    body = r.json()
    assert body["finetune"]["demos"] == 5
    assert body["eval"]["mean"] >= 0.8
    if body["phase"] == "awaiting_verdict":
        r2 = client.post(f"/sessions/{sid}/verdict", json={"success": True})
        assert r2.json()["status"] == "success"


def test_bad_relevance_rejected(client):
    task, actions = _demo_actions(seed=5)
    view = _create(client, seed=5)
    sid = view["id"]
    client.post(f"/sessions/{sid}/verdict", json={"success": False})
    client.post(f"/sessions/{sid}/demo", json={"actions": actions})
    r = client.post(f"/sessions/{sid}/feedback", json={"valid": True, "relevance": "XX"})
    assert r.status_code == 422 and r.json()["code"] == "bad_relevance"


def test_eval_without_job_409(client):
    view = _create(client, seed=6)
    r = client.get(f"/sessions/{view['id']}/eval")
    assert r.status_code == 409 and r.json()["code"] == "no_job"


def test_websocket_stream_step_and_commit(client):
    view = _create(client, domain="doorkey", seed=0)
    sid = view["id"]
    with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
        ws.send_json({"type": "reset"})
        msg = ws.receive_json()
        assert msg["type"] == "state" and msg["t"] == 0
        ws.send_json({"type": "step", "action": 3})
        msg = ws.receive_json()
        assert msg["type"] == "state" and msg["t"] == 1
        ws.send_json({"type": "step", "action": "junk"})
        assert ws.receive_json()["code"] == "bad_action"
        ws.send_json({"type": "commit"})
        msg = ws.receive_json()
        assert msg["type"] == "actions"
        assert len(msg["actions"]) == 35 and msg["padding"] == 34
        from cfadapt.experts import PAD_ACTION

        assert msg["actions"][-1] == PAD_ACTION
        ws.send_json({"type": "bogus"})
        err = ws.receive_json()
        assert err["code"] == "bad_message" and err["allowed"] == ["reset", "step", "commit"]


def test_websocket_unknown_session(client):
    with client.websocket_connect("/sessions/missing/stream") as ws:
        assert ws.receive_json()["code"] == "not_found"


def test_parity_with_headless_session(client):
    # Drive the service with a scripted client making exactly the simulated
    # user's choices; the resulting session log must match the headless run.
    domain, shift, seed = "nav2d", "ConceptTI", 7
    task = gen_shift_task(gen_train_task(domain, 0), shift, seed)
    user_http = UserModel(task.reward, task.shifted, seed=[seed, 1])
    user_local = UserModel(task.reward, task.shifted, seed=[seed, 1])

    view = _create(client, shift_type=shift, seed=seed, finetune_epochs=600)
    sid = view["id"]
    for _ in range(3):
        r = client.get(f"/sessions/{sid}")
        if r.json()["phase"] != "awaiting_verdict":
            break
        # scripted client: judge the served rollout, then demo + feedback
        client.post(f"/sessions/{sid}/verdict", json={"success": False})
        demo = user_http.provide_demo(task.test_scene)
        body = client.post(
            f"/sessions/{sid}/demo", json={"actions": _action_list(demo.actions)}
        ).json()
        if body["phase"] == "awaiting_feedback":
            from cfadapt.concept import ConceptEdit

            edit = ConceptEdit.from_json(body["counterfactual"]["edit"])
            traj = None  # verification only needs the edit and cf success
            valid = user_http.verify_counterfactual(
                edit, _replay_cf(task, body)
            )
            relevance = user_http.label_relevance(edit)
            client.post(
                f"/sessions/{sid}/feedback",
                json={"valid": bool(valid), "relevance": relevance},
            )
        eval_body = _poll_eval(client, sid).json()
        if eval_body["status"] != "running":
            break
        client.post(f"/sessions/{sid}/verdict", json={"success": eval_body["eval"]["mean"] == 1.0})
        break  # one adaptation round is enough for parity

    http_log = client.get(f"/sessions/{sid}").json()["log"]

    params = init(architecture_for(domain), 0)
    params, _ = train_bc(params, gen_train_task(domain, 0).demos, TrainConfig(epochs=300, seed=0))
    cfg = AdaptConfig(
        search=SearchConfig(),
        train=TrainConfig(epochs=600, seed=0, finetune=True),
        max_rounds=3,
    )
    _, local_log = run_dfa(
        params, task.test_scene, user_local, cfg, eval_scenes=eval_scenes_for(task, 4)
    )

    h0, l0 = http_log["rounds"][0], local_log["rounds"][0]
    assert h0["rollout_digest"] == l0["rollout_digest"]
    assert h0["demo_digest"] == l0["demo_digest"]
    assert h0["counterfactual"] == l0["counterfactual"]
    assert h0["feedback"] == l0["feedback"]
    assert h0["finetune"] == l0["finetune"]
    assert h0["eval"] == l0["eval"]


def _replay_cf(task, body):
    from cfadapt import envs
    from cfadapt.concept import ConceptEdit, realize_edit

    edit = ConceptEdit.from_json(body["counterfactual"]["edit"])
    scene = realize_edit(edit, task.test_scene)
    actions = body["counterfactual_trajectory"]["actions"]
    parsed = [np.asarray(a) if isinstance(a, list) else int(a) for a in actions]
    return envs.replay(scene, parsed, provenance="counterfactual")


def test_concurrent_sessions_are_isolated(client):
    a = _create(client, seed=8)
    b = _create(client, seed=9)
    client.post(f"/sessions/{a['id']}/verdict", json={"success": False})
    ra = client.get(f"/sessions/{a['id']}").json()
    rb = client.get(f"/sessions/{b['id']}").json()
    assert ra["phase"] == "awaiting_demo"
    assert rb["phase"] == "awaiting_verdict"
