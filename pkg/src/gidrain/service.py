"""Minimal HTTP ingestion/query service in front of a Store.

Routes (JSON in, JSON out):
    GET  /api/v1/sites                         -> list of site ids
    POST /api/v1/sites/{id}/readings           -> 202 {"accepted": N}
    GET  /api/v1/sites/{id}/readings?start&end -> array of readings

Errors are 400/404 with an {"error": "..."} body.  A ThreadingHTTPServer
serves requests; the store serializes writes per site internally.
"""

from __future__ import annotations

import json
import re
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlsplit

from .errors import BadRequest, GidrainError, InvalidRange, NotFound
from .series import format_timestamp, parse_timestamp
from .store import Reading, ReadingBatch, Store

_READINGS_RE = re.compile(r"^/api/v1/sites/([^/]+)/readings$")


def _reading_to_json(r: Reading) -> dict:
    out = {"ts": format_timestamp(r.ts), "depth_m": r.depth_m}
    if r.battery_v is not None:
        out["battery_v"] = r.battery_v
    if r.flags is not None:
        out["flags"] = r.flags
    return out


def _reading_from_json(obj) -> Reading:
    if not isinstance(obj, dict) or "ts" not in obj or "depth_m" not in obj:
        raise BadRequest(f"reading must carry 'ts' and 'depth_m': {obj!r}")
    try:
        ts = parse_timestamp(str(obj["ts"]))
    except ValueError as exc:
        raise BadRequest(str(exc)) from exc
    try:
        depth = float(obj["depth_m"])
    except (TypeError, ValueError) as exc:
        raise BadRequest(f"depth_m not numeric: {obj['depth_m']!r}") from exc
    battery = obj.get("battery_v")
    return Reading(ts, depth, None if battery is None else float(battery), obj.get("flags"))


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    @property
    def store(self) -> Store:
        return self.server.store  # type: ignore[attr-defined]

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send(self, code: int, payload) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _error(self, code: int, message: str) -> None:
        self._send(code, {"error": message})

    def do_GET(self):
        url = urlsplit(self.path)
        if url.path == "/api/v1/sites":
            self._send(200, self.store.site_ids())
            return
        m = _READINGS_RE.match(url.path)
        if not m:
            self._error(404, f"no such route: {url.path}")
            return
        site_id = m.group(1)
        query = parse_qs(url.query)
        try:
            start = parse_timestamp(query["start"][0]) if "start" in query else None
            end = parse_timestamp(query["end"][0]) if "end" in query else None
        except ValueError as exc:
            self._error(400, str(exc))
            return
        try:
            readings = self.store.query_readings(site_id, start, end)
        except NotFound as exc:
            self._error(404, str(exc))
            return
        except InvalidRange as exc:
            self._error(400, str(exc))
            return
        self._send(200, [_reading_to_json(r) for r in readings])

    def do_POST(self):
        url = urlsplit(self.path)
        m = _READINGS_RE.match(url.path)
        if not m:
            self._error(404, f"no such route: {url.path}")
            return
        site_id = m.group(1)
        try:
            length = int(self.headers.get("Content-Length", "0"))
            payload = json.loads(self.rfile.read(length).decode("utf-8"))
            if not isinstance(payload, dict) or not isinstance(payload.get("readings"), list):
                raise BadRequest('body must be {"readings": [...]}')
            batch = ReadingBatch(site_id, [_reading_from_json(o) for o in payload["readings"]])
            accepted = self.store.ingest_batch(batch)
        except json.JSONDecodeError as exc:
            self._error(400, f"invalid JSON: {exc}")
            return
        except BadRequest as exc:
            self._error(400, str(exc))
            return
        except NotFound as exc:
            self._error(404, str(exc))
            return
        except GidrainError as exc:
            self._error(400, str(exc))
            return
        self._send(202, {"accepted": accepted})


def make_server(store: Store, host: str = "127.0.0.1", port: int = 8765) -> ThreadingHTTPServer:
    """Build (but do not start) the ingestion server; port 0 picks a free port."""
    server = ThreadingHTTPServer((host, port), _Handler)
    server.store = store  # type: ignore[attr-defined]
    return server


def serve(store: Store, host: str = "127.0.0.1", port: int = 8765) -> None:
    """Run the ingestion service until interrupted."""
    server = make_server(store, host, port)
    addr = server.server_address
    print(f"gidrain service listening on http://{addr[0]}:{addr[1]}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
