"""Minimal HTTP inference service (stdlib only).

``POST /classify`` takes a multipart form with an ``image`` part and an
optional ``mask`` part. ``GET /healthz`` reports the loaded model hash. The
model is loaded once and never mutated, so requests share it freely.
"""

from __future__ import annotations

import email.parser
import email.policy
import json
import logging
import uuid
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from ..errors import SegmentationError
from .config import PipelineConfig
from .persist import SavedModel
from .run import check_compatible, classify_bytes

log = logging.getLogger(__name__)

MAX_BODY = 64 * 1024 * 1024


class BadRequest(Exception):
    pass


def parse_multipart(content_type: str, body: bytes) -> dict[str, bytes]:
    """Return ``{field name: payload bytes}`` for a multipart/form-data body."""
    if not content_type or not content_type.lower().startswith("multipart/form-data"):
        raise BadRequest("expected multipart/form-data")
    head = f"Content-Type: {content_type}\r\nMIME-Version: 1.0\r\n\r\n".encode()
    msg = email.parser.BytesParser(policy=email.policy.HTTP).parsebytes(head + body)
    if not msg.is_multipart():
        raise BadRequest("malformed multipart body")
    parts = {}
    for part in msg.iter_parts():
        name = part.get_param("name", header="content-disposition")
        if not name:
            continue
        parts[name] = part.get_payload(decode=True) or b""
    return parts


def _handler(saved: SavedModel, config: PipelineConfig):
    class Handler(BaseHTTPRequestHandler):
        server_version = "lungtex"
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):
            log.info("%s %s", self.address_string(), fmt % args)

        def _send(self, code: int, doc: dict) -> None:
            body = (json.dumps(doc, sort_keys=True) + "\n").encode()
            self.send_response(code)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self):
            if self.path == "/healthz":
                self._send(200, {"status": "ok", "model_hash": saved.model_hash})
            else:
                self._send(404, {"error": "not found"})

        def do_POST(self):
            if self.path != "/classify":
                self._send(404, {"error": "not found"})
                return
            try:
                length = int(self.headers.get("Content-Length", ""))
                if not 0 < length <= MAX_BODY:
                    raise BadRequest("missing or oversized body")
                body = self.rfile.read(length)
                parts = parse_multipart(self.headers.get("Content-Type", ""), body)
                if not parts.get("image"):
                    raise BadRequest("multipart field 'image' is required")
                result = classify_bytes(parts["image"], parts.get("mask") or None, saved, config)
            except (BadRequest, ValueError) as exc:
                if isinstance(exc, SegmentationError):
                    self._send(422, {"error": str(exc)})
                else:
                    self._send(400, {"error": str(exc)})
            except Exception:  # noqa: BLE001
                ref = uuid.uuid4().hex[:12]
                log.exception("classify failed, error id %s", ref)
                self._send(500, {"error": "internal error", "id": ref})
            else:
                self._send(200, result)

    return Handler


def make_server(saved: SavedModel, config: PipelineConfig, host: str = "127.0.0.1",
                port: int = 8080) -> ThreadingHTTPServer:
    """Build (not start) the server; ``port=0`` picks a free port."""
    check_compatible(saved, config)
    server = ThreadingHTTPServer((host, port), _handler(saved, config))
    server.daemon_threads = True
    return server
