"""Shared fixtures: a scriptable chat-completions stub endpoint."""

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest


def chat_reply(text, finish_reason="stop", prompt_tokens=10, completion_tokens=20):
    return {
        "choices": [{"message": {"content": text}, "finish_reason": finish_reason}],
        "usage": {"prompt_tokens": prompt_tokens, "completion_tokens": completion_tokens},
    }


class StubEndpoint:
    """In-process chat endpoint whose behavior is a test-supplied function
    request_body -> (status, payload). Tracks concurrency telemetry."""

    def __init__(self):
        self.responder = lambda body: (200, chat_reply("Solution: []"))
        self.lock = threading.Lock()
        self.request_count = 0
        self.in_flight = 0
        self.max_in_flight = 0
        self.hold_s = 0.0
        state = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(length) or b"{}")
                with state.lock:
                    state.request_count += 1
                    state.in_flight += 1
                    state.max_in_flight = max(state.max_in_flight, state.in_flight)
                try:
                    if state.hold_s:
                        time.sleep(state.hold_s)
                    status, payload = state.responder(body)
                finally:
                    with state.lock:
                        state.in_flight -= 1
                data = json.dumps(payload).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, *args):
                pass

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)
        self.thread.start()
        self.url = f"http://127.0.0.1:{self.server.server_address[1]}/v1/chat/completions"

    def close(self):
        self.server.shutdown()
        self.server.server_close()


@pytest.fixture
def stub_endpoint():
    endpoint = StubEndpoint()
    yield endpoint
    endpoint.close()
