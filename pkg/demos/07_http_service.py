"""
The annotation service over HTTP
================================

Three endpoints: POST /annotate, GET /concepts/{cui} and
GET /semantic-network. This spawns the real server on a free port, walks
the endpoints with plain urllib and shuts it down.

Equivalent from a shell:

    termlink build-kb sample --out /tmp/sample_kb.json.gz
    termlink serve --kb /tmp/sample_kb.json.gz --port 8000
"""
import json
import socket
import subprocess
import sys
import time
import urllib.request

from termlink.kb import build_from_release, sample_release_dir, save_kb

snapshot = "/tmp/sample_kb.json.gz"
save_kb(build_from_release(sample_release_dir()), snapshot)

with socket.socket() as s:
    s.bind(("127.0.0.1", 0))
    port = s.getsockname()[1]

server = subprocess.Popen(
    [sys.executable, "-m", "termlink.cli", "serve", "--kb", snapshot, "--port", str(port)],
    stdout=subprocess.DEVNULL,
    stderr=subprocess.DEVNULL,
)
base = f"http://127.0.0.1:{port}"


def get(path):
    return json.load(urllib.request.urlopen(base + path))


def post(path, payload):
    req = urllib.request.Request(
        base + path,
        data=json.dumps(payload).encode(),
        headers={"content-type": "application/json"},
    )
    return json.load(urllib.request.urlopen(req))


try:
    for _ in range(50):
        try:
            get("/semantic-network")
            break
        except OSError:
            time.sleep(0.2)

    doc = post("/annotate", {"text": "El paciente presenta tos y disnea."})
    print("annotations:")
    for a in doc["annotations"]:
        covered = " / ".join(doc["text"][s:e] for s, e in a["ranges"])
        print(f"  [{covered}] {a['cui']} {a['preferred_name']!r} types={a['tuis']}")

    card = get("/concepts/C0004034")
    print(f"\nconcept card {card['cui']} ({card['preferred_name']}):")
    print("  terms by source:", {k: len(v) for k, v in card["terms_by_source"].items()})
    print("  hypernyms:", [h["name"] for h in card["hypernyms"]])
    print("  hyponyms:", [h["name"] for h in card["hyponyms"]])

    tree = get("/semantic-network")
    print(f"\nsemantic network: {len(tree)} roots:", [n["name"] for n in tree])
finally:
    server.terminate()
    server.wait()
