"""Local chat-completion server that replays recorded fixtures.

A fixture is a JSON file ``{"responses": [...]}``. Each response entry may
hold ``content`` (returned as the first choice's message), ``status`` (HTTP
code, default 200), ``raw`` (literal body, bypassing the JSON envelope) and
``delay`` (seconds to sleep before answering). Entries are served in order;
the last one repeats once the list is exhausted.
"""
from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path


def load_fixture(path) -> list[dict]:
    data = json.loads(Path(path).read_text())
    responses = data["responses"] if isinstance(data, dict) else data
    if not responses:
        raise ValueError(f"fixture {path} has no responses")
    return list(responses)


class MockLlmServer:
    def __init__(self, responses: list[dict], host: str = "127.0.0.1", port: int = 0):
        self.responses = list(responses)
        self.requests: list[dict] = []
        self._lock = threading.Lock()
        server = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):  # noqa: N802
                length = int(self.headers.get("Content-Length", 0))
                raw = self.rfile.read(length)
                try:
                    body = json.loads(raw)
                except ValueError:
                    body = {"_raw": raw.decode(errors="replace")}
                resp = server._next(body)
                if resp.get("delay"):
                    time.sleep(float(resp["delay"]))
                status = int(resp.get("status", 200))
                if "raw" in resp:
                    payload = str(resp["raw"]).encode()
                else:
                    payload = json.dumps({"choices": [{"index": 0, "message": {
                        "role": "assistant", "content": resp.get("content", "")}}]}).encode()
                try:
                    self.send_response(status)
                    self.send_header("Content-Type", "application/json")
                    self.send_header("Content-Length", str(len(payload)))
                    self.end_headers()
                    self.wfile.write(payload)
                except (BrokenPipeError, ConnectionResetError):
                    pass

            def log_message(self, *args):
                pass

        self._httpd = ThreadingHTTPServer((host, port), Handler)
        self._httpd.daemon_threads = True
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)

    @classmethod
    def from_fixture(cls, path) -> "MockLlmServer":
        return cls(load_fixture(path))

    def _next(self, body: dict) -> dict:
        with self._lock:
            i = len(self.requests)
            self.requests.append(body)
        return self.responses[min(i, len(self.responses) - 1)]

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}/v1/chat/completions"

    @property
    def request_count(self) -> int:
        with self._lock:
            return len(self.requests)

    def start(self) -> "MockLlmServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()
