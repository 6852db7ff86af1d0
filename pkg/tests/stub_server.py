"""Minimal in-process HTTP server speaking the provider wire protocol.

Responses come from per-path lookup tables keyed by canonical request JSON,
so tests stay byte-deterministic.  Malformed bodies get 422, unknown
requests 404.  The server tracks its maximum observed request concurrency,
which lets tests verify client-side in-flight caps.
"""

from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from lexsimp.providers import canonical_json

_REQUIRED_FIELDS = {
    "/analyze": {"tokens": list},
    "/mlm_topk": {"original": list, "masked": list, "k": int},
    "/embed": {"tokens": list},
    "/generate": {"text": str},
}


class StubProtocolServer:
    def __init__(self, tables=None, capabilities=("morphology", "mlm", "encoder"),
                 delay: float = 0.0):
        self.tables = {path: {canonical_json(req): resp for req, resp in entries}
                       for path, entries in (tables or {}).items()}
        self.capabilities = list(capabilities)
        self.delay = delay
        self.max_concurrency = 0
        self._active = 0
        self._lock = threading.Lock()
        self._server: ThreadingHTTPServer | None = None
        self._thread: threading.Thread | None = None

    def start(self) -> str:
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def _send(self, status: int, body: dict):
                payload = json.dumps(body, ensure_ascii=False).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

            def do_GET(self):
                if self.path == "/health":
                    self._send(200, {"capabilities": stub.capabilities})
                else:
                    self._send(404, {"error": "unknown path"})

            def do_POST(self):
                with stub._lock:
                    stub._active += 1
                    stub.max_concurrency = max(stub.max_concurrency, stub._active)
                try:
                    if stub.delay:
                        time.sleep(stub.delay)
                    length = int(self.headers.get("Content-Length", "0"))
                    raw = self.rfile.read(length)
                    try:
                        payload = json.loads(raw)
                    except json.JSONDecodeError:
                        self._send(422, {"error": "body is not JSON"})
                        return
                    schema = _REQUIRED_FIELDS.get(self.path)
                    if schema is None:
                        self._send(404, {"error": "unknown path"})
                        return
                    if not isinstance(payload, dict) or any(
                            name not in payload or not isinstance(payload[name], kind)
                            for name, kind in schema.items()):
                        self._send(422, {"error": "missing or mistyped fields"})
                        return
                    response = stub.tables.get(self.path, {}).get(canonical_json(payload))
                    if response is None:
                        self._send(404, {"error": "no stub entry"})
                        return
                    self._send(200, response)
                finally:
                    with stub._lock:
                        stub._active -= 1

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        host, port = self._server.server_address
        return f"http://{host}:{port}"

    def stop(self) -> None:
        if self._server is not None:
            self._server.shutdown()
            self._server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def __enter__(self) -> str:
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()
