"""Run the ingestion service in-process and talk to it over HTTP.

Hourly six-reading batches are POSTed (one of them twice, one out of order);
queries come back sorted and deduplicated, exactly as stored.
"""

import json
import tempfile
import threading
import urllib.request

from gidrain import SiteRecord, Store
from gidrain.service import make_server

store = Store(tempfile.mkdtemp(prefix="gidrain_demo_"))
store.register_site(SiteRecord(site_id="S1", surface_area=120.0, drainage_area=600.0))

server = make_server(store, port=0)
threading.Thread(target=server.serve_forever, daemon=True).start()
base = f"http://127.0.0.1:{server.server_address[1]}"
print(f"service at {base}")


def post(payload):
    req = urllib.request.Request(
        f"{base}/api/v1/sites/S1/readings",
        data=json.dumps(payload).encode(),
        method="POST",
        headers={"Content-Type": "application/json"},
    )
    with urllib.request.urlopen(req) as resp:
        return resp.status, json.loads(resp.read().decode())


def batch(hour, depth0):
    return {
        "readings": [
            {"ts": f"2021-06-25T{hour:02d}:{10 * k:02d}:00Z", "depth_m": round(depth0 - 0.01 * k, 3)}
            for k in range(6)
        ]
    }


late = batch(14, 0.42)
print("POST hour-15 batch first (out of order):", post(batch(15, 0.36)))
print("POST hour-14 batch late:               ", post(late))
print("POST hour-14 batch again (duplicate):  ", post(late))

with urllib.request.urlopen(f"{base}/api/v1/sites/S1/readings") as resp:
    rows = json.loads(resp.read().decode())
print(f"\nquery returns {len(rows)} readings, sorted and deduplicated:")
for r in rows[:4]:
    print(" ", r)
print("  ...")

with urllib.request.urlopen(f"{base}/api/v1/sites") as resp:
    print("registered sites:", json.loads(resp.read().decode()))

server.shutdown()
server.server_close()
