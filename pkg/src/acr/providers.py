"""Chat and embedding providers: an HTTP client for chat-completions style servers and deterministic stubs."""

from __future__ import annotations

import logging
import re
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Mapping, Protocol, Sequence, Union

import httpx
import numpy as np

from .lexical import tokenize

logger = logging.getLogger(__name__)

FNV_OFFSET = 14695981039346656037
FNV_PRIME = 1099511628211
_MASK64 = (1 << 64) - 1

BACKOFF_BASE = 0.5
BACKOFF_FACTOR = 2.0


class ProviderError(RuntimeError):
    """A provider call failed (transport, HTTP status, or malformed payload)."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


@dataclass(frozen=True)
class ProviderConfig:
    base_url: str
    api_key: str = ""
    model_name: str = ""
    timeout: float = 60.0
    max_retries: int = 2

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str


@dataclass
class ChatRequest:
    """A chat call. ``tag`` names the pipeline step; ``meta`` carries structured
    inputs that stubs read instead of parsing the prompt. Neither goes on the wire."""

    messages: list[ChatMessage]
    temperature: float = 0.0
    tag: str = ""
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.messages:
            raise ValueError("chat request needs at least one message")


@dataclass
class ChatResponse:
    text: str
    fields: dict[str, str] = field(default_factory=dict)


class ChatProvider(Protocol):
    def complete(self, req: ChatRequest) -> ChatResponse: ...


class Embedder(Protocol):
    provider_id: str
    dim: int | None

    def embed(self, texts: Sequence[str]) -> np.ndarray: ...


def l2_normalize(vec: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        return np.zeros_like(vec, dtype=np.float64)
    return np.asarray(vec, dtype=np.float64) / norm


# HTTP


def _post_json(cfg: ProviderConfig, endpoint: str, body: dict, sleep: Callable[[float], None]) -> Any:
    url = cfg.base_url.rstrip("/") + endpoint
    headers = {"Content-Type": "application/json"}
    if cfg.api_key:
        headers["Authorization"] = f"Bearer {cfg.api_key}"
    last_exc: Exception | None = None
    for attempt in range(cfg.max_retries + 1):
        if attempt:
            sleep(BACKOFF_BASE * BACKOFF_FACTOR ** (attempt - 1))
        try:
            resp = httpx.post(url, json=body, headers=headers, timeout=cfg.timeout)
        except httpx.TransportError as exc:
            logger.warning("POST %s failed (attempt %d/%d): %s", url, attempt + 1, cfg.max_retries + 1, exc)
            last_exc = exc
            continue
        if not 200 <= resp.status_code < 300:
            raise ProviderError(f"HTTP {resp.status_code} from {url}: {resp.text[:200]}", status=resp.status_code)
        try:
            return resp.json()
        except ValueError:
            raise ProviderError(f"non-JSON response from {url}: {resp.text[:200]}") from None
    raise ProviderError(f"transport failure after {cfg.max_retries + 1} attempts: {last_exc}")


def chat_complete(cfg: ProviderConfig, req: ChatRequest, sleep: Callable[[float], None] = time.sleep) -> ChatResponse:
    body = {
        "model": cfg.model_name,
        "messages": [{"role": m.role, "content": m.content} for m in req.messages],
        "temperature": req.temperature,
    }
    payload = _post_json(cfg, "/chat/completions", body, sleep)
    try:
        text = payload["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError):
        raise ProviderError("response lacks choices[0].message.content") from None
    if not text:
        raise ProviderError("empty completion")
    return ChatResponse(text=text)


def embed_texts(cfg: ProviderConfig, texts: Sequence[str], sleep: Callable[[float], None] = time.sleep) -> np.ndarray:
    """Embed ``texts`` remotely; rows come back L2-normalized, in input order."""
    if not texts:
        raise ValueError("embed_texts needs at least one text")
    payload = _post_json(cfg, "/embeddings", {"model": cfg.model_name, "input": list(texts)}, sleep)
    try:
        data = payload["data"]
        if all("index" in d for d in data):
            data = sorted(data, key=lambda d: d["index"])
        vectors = [d["embedding"] for d in data]
    except (KeyError, TypeError):
        raise ProviderError("response lacks data[i].embedding") from None
    if len(vectors) != len(texts):
        raise ProviderError(f"expected {len(texts)} embeddings, got {len(vectors)}")
    dims = {len(v) for v in vectors}
    if len(dims) != 1:
        raise ProviderError(f"dimension mismatch within batch: {sorted(dims)}")
    return np.vstack([l2_normalize(np.asarray(v, dtype=np.float64)) for v in vectors])


class HttpChat:
    def __init__(self, cfg: ProviderConfig):
        self.cfg = cfg

    def complete(self, req: ChatRequest) -> ChatResponse:
        return chat_complete(self.cfg, req)


class HttpEmbedder:
    def __init__(self, cfg: ProviderConfig, dim: int | None = None):
        self.cfg = cfg
        self.dim = dim
        self.provider_id = f"http:{cfg.model_name}"

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        out = embed_texts(self.cfg, texts)
        if self.dim is None:
            self.dim = out.shape[1]
        elif out.shape[1] != self.dim:
            raise ProviderError(f"embedding dim changed from {self.dim} to {out.shape[1]}")
        return out


# Stubs


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h = ((h ^ b) * FNV_PRIME) & _MASK64
    return h


@lru_cache(maxsize=1 << 16)
def _token_slot(token: str, dim: int) -> tuple[int, float]:
    raw = token.encode("utf-8")
    index = fnv1a64(raw) % dim
    sign = 1.0 if fnv1a64(raw + b"\xff") % 2 == 0 else -1.0
    return index, sign


def stub_embed(text: str, dim: int = 64) -> np.ndarray:
    """Signed hashed bag-of-words embedding, L2-normalized; zeros when ``text`` has no tokens."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    slots = [_token_slot(tok, dim) for tok in tokenize(text)]
    if not slots:
        return np.zeros(dim, dtype=np.float64)
    index, sign = zip(*slots)
    # per-slot sums of +-1 are small integers, so the result is exact
    return l2_normalize(np.bincount(index, weights=sign, minlength=dim))


class StubEmbedder:
    def __init__(self, dim: int = 64):
        self.dim = dim
        self.provider_id = f"stub-{dim}"

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        if not len(texts):
            return np.zeros((0, self.dim))
        return np.vstack([stub_embed(t, self.dim) for t in texts])


def label_key(label: str) -> tuple:
    """Sort key ordering "option 2" before "option 10"."""
    return tuple(int(p) if p.isdigit() else p for p in re.split(r"(\d+)", label))


def stub_decide(question: str, options: Mapping[str, str], evidence: str) -> tuple[str, str, float]:
    """Pick the option sharing the most distinct tokens with ``evidence``.

    ``question`` is accepted for signature parity with real deciders and ignored.
    """
    if not options:
        raise ValueError("stub_decide needs at least one option")
    ev = set(tokenize(evidence))
    best_label = None
    best: list[str] = []
    best_n = -1
    best_size = 1
    for label in sorted(options, key=label_key):
        toks = list(dict.fromkeys(tokenize(options[label])))
        shared = [t for t in toks if t in ev]
        if len(shared) > best_n:
            best_label, best, best_n, best_size = label, shared, len(shared), max(1, len(toks))
    confidence = best_n / best_size
    if best:
        explanation = f"The evidence mentions {', '.join(best)}, which supports {best_label}."
    else:
        explanation = f"No option terms appear in the evidence; defaulting to {best_label}."
    return best_label, explanation, confidence


Handler = Union[str, Sequence[str], Callable[[ChatRequest], str]]


class StubChat:
    """Chat provider answering from scripted handlers keyed by request tag.

    A handler is a fixed string, a list of strings replayed in order (the last
    one repeats), or a callable taking the request. Tag ``"*"`` is the fallback.
    """

    def __init__(self, handlers: Mapping[str, Handler] | None = None):
        self.handlers = dict(handlers or {})
        self._cursor: dict[str, int] = {}
        self.calls: list[ChatRequest] = []

    def complete(self, req: ChatRequest) -> ChatResponse:
        self.calls.append(req)
        key = req.tag if req.tag in self.handlers else "*"
        if key not in self.handlers:
            raise ProviderError(f"stub has no handler for tag {req.tag!r}")
        handler = self.handlers[key]
        if callable(handler):
            text = handler(req)
        elif isinstance(handler, str):
            text = handler
        else:
            i = self._cursor.get(key, 0)
            text = handler[min(i, len(handler) - 1)]
            self._cursor[key] = i + 1
        return ChatResponse(text=text)
