"""Event-stream endpoint against a real server: replay, live delivery, frames."""

from __future__ import annotations

import json
import socket
import threading
import time

import httpx
import pytest
import uvicorn

from knowcap.api import create_app
from knowcap.fixtures import seed_fixture
from knowcap.service import KnowledgeService


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


@pytest.fixture
def live_server():
    service = KnowledgeService()
    summary = seed_fixture(service, "neco")
    port = free_port()
    server = uvicorn.Server(uvicorn.Config(
        create_app(service), host="127.0.0.1", port=port, log_level="error"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 10
    while not server.started:
        if time.monotonic() > deadline:
            raise RuntimeError("server did not start")
        time.sleep(0.02)
    yield f"http://127.0.0.1:{port}", summary, service
    server.should_exit = True
    thread.join(timeout=5)
    service.close()


def test_stream_replays_then_delivers_live(live_server):
    base, summary, _ = live_server
    token = summary["actors"]["watcher"]["token"]
    dp_id = summary["dp_id"]
    headers = {"Authorization": f"Bearer {token}"}

    with httpx.Client(base_url=base, headers=headers, timeout=10) as client:
        persisted = client.get(f"/api/workspaces/{dp_id}/events?after=0").json()["events"]
        assert persisted

        received = []
        done = threading.Event()

        def consume():
            with httpx.stream("GET", f"{base}/api/stream/{dp_id}?after=0&token={token}",
                              timeout=10) as response:
                assert response.headers["content-type"].startswith("text/event-stream")
                for line in response.iter_lines():
                    if line.startswith("data:"):
                        received.append(json.loads(line.split(":", 1)[1]))
                    if len(received) == len(persisted) + 1:
                        done.set()
                        return

        consumer = threading.Thread(target=consume, daemon=True)
        consumer.start()
        time.sleep(0.3)  # let the replay finish and the tap attach
        client.post(f"/api/workspaces/{dp_id}/signal", json={"payload": "live-one"})
        assert done.wait(timeout=8), "live event never arrived"

    ids = [record["event_id"] for record in received]
    assert ids == list(range(1, len(persisted) + 2)), "stream must be gapless and ordered"
    assert received[-1]["payload"] == "live-one"
    # frames carry the same self-describing record shape as the log
    assert all(record["rec"] == "awareness" and "seq" in record and "wall" in record
               for record in received)


def test_stream_rejects_bad_token(live_server):
    base, summary, _ = live_server
    response = httpx.get(f"{base}/api/stream/{summary['dp_id']}?after=0&token=bogus", timeout=5)
    assert response.status_code == 401
