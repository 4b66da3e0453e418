"""HTTP front end for the annotation store.

JSON endpoints under /api plus static serving of the web client. All
mutations funnel through the store's internal lock, so concurrent
submissions from multiple annotators serialize cleanly.
"""

from __future__ import annotations

import json
import os
import posixpath
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlsplit

from .annotation import AnnotationStore, make_record
from .errors import (
    BadVerdictError,
    DuplicateSubmissionError,
    NoOverlapError,
    UnknownAnnotatorError,
    UnknownTaskError,
)

DEFAULT_PORT = 8471
PORT_ENV = "VFORGE_PORT"

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json; charset=utf-8",
    ".json": "application/json; charset=utf-8",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}

_FALLBACK_PAGE = b"""<!doctype html>
<meta charset="utf-8">
<title>Annotation service</title>
<h1>Annotation service</h1>
<p>No web client bundle is installed. The JSON API is available under
<code>/api</code>: <code>/api/tasks/next?annotator=ID</code>,
<code>/api/labels</code> (POST), <code>/api/agreement</code>,
<code>/api/export?kind=veracity</code>, <code>/api/stats</code>.</p>
"""


def default_port() -> int:
    raw = os.environ.get(PORT_ENV)
    if raw is None:
        return DEFAULT_PORT
    try:
        return int(raw)
    except ValueError:
        raise BadVerdictError(f"{PORT_ENV} must be an integer, got {raw!r}") from None


class AnnotationServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, store: AnnotationStore, static_dir: str | None = None):
        super().__init__(address, _Handler)
        self.store = store
        self.static_dir = static_dir


class _Handler(BaseHTTPRequestHandler):
    server: AnnotationServer

    def log_message(self, fmt, *args):
        pass

    # --- plumbing ---------------------------------------------------------

    def _send_json(self, obj, status: int = 200) -> None:
        body = json.dumps(obj, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_error_json(self, status: int, code: str, detail: str) -> None:
        self._send_json({"error": code, "detail": detail}, status=status)

    def _read_json_body(self):
        length = int(self.headers.get("Content-Length", "0") or "0")
        raw = self.rfile.read(length) if length else b""
        try:
            obj = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            return None
        return obj if isinstance(obj, dict) else None

    # --- routes -----------------------------------------------------------

    def do_GET(self):
        url = urlsplit(self.path)
        if url.path == "/api/tasks/next":
            self._get_next_task(parse_qs(url.query))
        elif url.path == "/api/agreement":
            self._get_agreement()
        elif url.path == "/api/export":
            self._get_export(parse_qs(url.query))
        elif url.path == "/api/stats":
            self._send_json(self.server.store.stats())
        elif url.path.startswith("/api/"):
            self._send_error_json(404, "not_found", f"no such endpoint: {url.path}")
        else:
            self._serve_static(url.path)

    def do_POST(self):
        url = urlsplit(self.path)
        if url.path != "/api/labels":
            self._send_error_json(404, "not_found", f"no such endpoint: {url.path}")
            return
        body = self._read_json_body()
        if body is None:
            self._send_error_json(400, "bad_request", "body must be a JSON object")
            return
        missing = [k for k in ("task_id", "annotator_id", "verdict") if not isinstance(body.get(k), str)]
        if missing:
            self._send_error_json(400, "bad_request", f"missing fields: {', '.join(missing)}")
            return
        record = make_record(body["task_id"], body["annotator_id"], body["verdict"])
        try:
            self.server.store.submit(record)
        except UnknownTaskError as exc:
            self._send_error_json(404, "unknown_task", str(exc))
        except BadVerdictError as exc:
            self._send_error_json(400, "bad_verdict", str(exc))
        except UnknownAnnotatorError as exc:
            self._send_error_json(400, "unknown_annotator", str(exc))
        except DuplicateSubmissionError as exc:
            self._send_error_json(409, "duplicate_submission", str(exc))
        else:
            self._send_json({"status": "accepted"})

    def _get_next_task(self, query) -> None:
        annotator = (query.get("annotator") or [""])[0]
        try:
            task = self.server.store.next_task(annotator)
        except UnknownAnnotatorError as exc:
            self._send_error_json(400, "unknown_annotator", str(exc))
            return
        self._send_json({"task": task.to_json_obj() if task else None})

    def _get_agreement(self) -> None:
        try:
            report = self.server.store.agreement()
        except NoOverlapError:
            self._send_json({"kappa": None, "n": 0, "table": None})
            return
        self._send_json({"kappa": report.kappa, "n": report.n, "table": report.table})

    def _get_export(self, query) -> None:
        kind = (query.get("kind") or [""])[0]
        if not kind:
            self._send_error_json(400, "bad_request", "kind query parameter is required")
            return
        try:
            result = self.server.store.export(kind)
        except BadVerdictError as exc:
            self._send_error_json(400, "bad_request", str(exc))
            return
        self._send_json(
            {
                "examples": [ex.to_json_obj() for ex in result.examples],
                "conflicts": list(result.conflicts),
                "nonsense_rate": result.nonsense_rate,
            }
        )

    # --- static files -----------------------------------------------------

    def _serve_static(self, path: str) -> None:
        if path == "/":
            path = "/index.html"
        static_dir = self.server.static_dir
        if static_dir is None:
            if path == "/index.html":
                self._send_bytes(_FALLBACK_PAGE, "text/html; charset=utf-8")
            else:
                self._send_error_json(404, "not_found", "no static bundle installed")
            return
        # posixpath.normpath plus the prefix check keeps requests inside the
        # bundle directory.
        clean = posixpath.normpath(path.lstrip("/"))
        if clean.startswith("..") or os.path.isabs(clean):
            self._send_error_json(404, "not_found", "bad path")
            return
        full = os.path.join(static_dir, clean)
        if not os.path.isfile(full):
            self._send_error_json(404, "not_found", f"no such file: {path}")
            return
        ext = os.path.splitext(full)[1].lower()
        ctype = _CONTENT_TYPES.get(ext, "application/octet-stream")
        with open(full, "rb") as fh:
            self._send_bytes(fh.read(), ctype)

    def _send_bytes(self, body: bytes, ctype: str) -> None:
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


def build_server(
    store: AnnotationStore, port: int, host: str = "127.0.0.1", static_dir: str | None = None
) -> AnnotationServer:
    return AnnotationServer((host, port), store, static_dir=static_dir)


def serve_forever(server: AnnotationServer) -> None:
    try:
        server.serve_forever(poll_interval=0.1)
    finally:
        server.server_close()
        server.store.close()
