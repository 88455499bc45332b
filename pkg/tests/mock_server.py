"""A tiny OpenAI-style server on a background thread, for provider and CLI tests."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from acr.providers import stub_embed


def default_chat(messages: list[dict]) -> str:
    """Answer the pipeline prompts well enough for a run to complete."""
    prompt = messages[-1]["content"]
    if prompt.startswith("You rewrite"):
        query = prompt.rsplit("Query:", 1)[1].strip()
        return f"REWRITTEN: {query}\nCONCEPTS:\n{query}"
    if prompt.startswith("Review the proposed answer"):
        return "VERDICT: ACCEPT\nCRITIQUE: none"
    if prompt.startswith("Keep only"):
        return prompt.split("Passage:\n", 1)[1]
    return "ANSWER: option 1\nEXPLANATION: The evidence points to the first option.\nCONFIDENCE: 0.9"


class MockProvider:
    def __init__(self, chat=default_chat, dim: int = 16):
        self.chat = chat
        self.dim = dim
        self.requests: list[tuple[str, dict, dict]] = []
        self.status = 200
        owner = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def do_POST(self):
                body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
                owner.requests.append((self.path, body, dict(self.headers)))
                if owner.status != 200:
                    self._send(owner.status, {"error": "forced failure"})
                elif self.path.endswith("/chat/completions"):
                    text = owner.chat(body["messages"])
                    self._send(200, {"choices": [{"index": 0, "message": {"role": "assistant", "content": text}}]})
                elif self.path.endswith("/embeddings"):
                    data = [
                        {"index": i, "embedding": (stub_embed(t, owner.dim) * 3.0).tolist()}
                        for i, t in enumerate(body["input"])
                    ]
                    # reversed on purpose: clients must reorder by index
                    self._send(200, {"data": data[::-1]})
                else:
                    self._send(404, {"error": "no route"})

            def _send(self, status, payload):
                raw = json.dumps(payload).encode()
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(raw)))
                self.end_headers()
                self.wfile.write(raw)

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)

    @property
    def base_url(self) -> str:
        host, port = self.server.server_address[:2]
        return f"http://{host}:{port}/v1"

    def __enter__(self) -> "MockProvider":
        self.thread.start()
        return self

    def __exit__(self, *exc) -> None:
        self.server.shutdown()
        self.server.server_close()
