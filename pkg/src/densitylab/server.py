"""Minimal HTTP transport for the newline protocol plus static UI hosting.

Endpoints:
    POST /api/sessions                one new_session protocol line -> response line
    POST /api/sessions/<id>/commands  one protocol line -> one response line
    GET  /api/sessions/<id>/state     full scene snapshot for refresh-and-replay
    GET  /api/sessions/<id>/log       session log in the telemetry file format
    GET  /<path>                      static files from the frontend directory

The engine stays the single authority; this file only moves lines around.
"""

from __future__ import annotations

import json
import mimetypes
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .engine import GameEngine
from .protocol import ProtocolSession


class SessionStore:
    def __init__(self, engine: GameEngine):
        self.engine = engine
        self._sessions: dict[str, ProtocolSession] = {}
        self._lock = threading.Lock()

    def create(self, line: str) -> tuple[str | None, str]:
        proto = ProtocolSession(self.engine)
        response = proto.handle_line(line)
        parsed = json.loads(response)
        if not parsed.get("ok"):
            return None, response
        session_id = parsed["session_id"]
        with self._lock:
            self._sessions[session_id] = proto
        return session_id, response

    def get(self, session_id: str) -> ProtocolSession | None:
        with self._lock:
            return self._sessions.get(session_id)


def make_handler(store: SessionStore, frontend_dir: Path | None):
    class Handler(BaseHTTPRequestHandler):
        def log_message(self, *args) -> None:  # keep test output quiet
            pass

        def _send(self, status: int, body: bytes, content_type: str) -> None:
            self.send_response(status)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _send_json_line(self, line: str, status: int = 200) -> None:
            self._send(status, (line + "\n").encode("utf-8"), "application/json")

        def _read_body(self) -> str:
            length = int(self.headers.get("Content-Length", "0"))
            return self.rfile.read(length).decode("utf-8")

        def do_POST(self) -> None:
            parts = [p for p in self.path.split("/") if p]
            if parts == ["api", "sessions"]:
                _, response = store.create(self._read_body().strip())
                self._send_json_line(response)
                return
            if len(parts) == 4 and parts[:2] == ["api", "sessions"] and parts[3] == "commands":
                proto = store.get(parts[2])
                if proto is None:
                    self._send_json_line(json.dumps({"ok": False, "error": "unknown session"}), 404)
                    return
                self._send_json_line(proto.handle_line(self._read_body().strip()))
                return
            self._send(404, b"not found", "text/plain")

        def do_GET(self) -> None:
            parts = [p for p in self.path.split("?")[0].split("/") if p]
            if len(parts) == 4 and parts[:2] == ["api", "sessions"]:
                proto = store.get(parts[2])
                if proto is None:
                    self._send(404, b"unknown session", "text/plain")
                    return
                if parts[3] == "state":
                    body = json.dumps(proto.state_view()).encode("utf-8")
                    self._send(200, body, "application/json")
                    return
                if parts[3] == "log":
                    lines = "".join(line + "\n" for line in proto.session.log.to_lines())
                    self._send(200, lines.encode("utf-8"), "text/plain; charset=utf-8")
                    return
            self._serve_static(parts)

        def _serve_static(self, parts: list[str]) -> None:
            if frontend_dir is None:
                self._send(404, b"no frontend directory configured", "text/plain")
                return
            relative = "/".join(parts) if parts else "index.html"
            target = (frontend_dir / relative).resolve()
            if not str(target).startswith(str(frontend_dir.resolve())) or not target.is_file():
                self._send(404, b"not found", "text/plain")
                return
            content_type = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
            self._send(200, target.read_bytes(), content_type)

    return Handler


def create_server(
    host: str = "127.0.0.1",
    port: int = 8000,
    engine: GameEngine | None = None,
    frontend_dir: str | Path | None = None,
) -> ThreadingHTTPServer:
    store = SessionStore(engine if engine is not None else GameEngine())
    directory = Path(frontend_dir) if frontend_dir else None
    return ThreadingHTTPServer((host, port), make_handler(store, directory))


def serve(host: str = "127.0.0.1", port: int = 8000, frontend_dir: str | Path | None = None) -> None:
    server = create_server(host=host, port=port, frontend_dir=frontend_dir)
    print(f"densitylab serving on http://{host}:{port}/ (Ctrl-C to stop)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
