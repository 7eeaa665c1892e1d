"""Fetchers the crawl stages call to retrieve page bodies.

A fetcher is anything with ``fetch(url) -> FetchResult``. The mock
fetcher serves a fixed corpus from memory and is what tests and offline
runs use; the HTTP fetcher does real network requests with a minimal
robots.txt check. Fetch failures are values, not exceptions: a bad url
must never take down the stage that asked for it.
"""

from __future__ import annotations

import json
import time
import urllib.request
import urllib.robotparser
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol
from urllib.parse import quote, unquote, urlsplit

STATUS_SUCCESS = "success"
STATUS_FETCH_ERROR = "fetch_error"


@dataclass(frozen=True)
class FetchResult:
    """Outcome of one fetch. The body is non-empty exactly on success."""

    url: str
    status: str
    body: bytes = b""
    reason: str = ""
    fetched_at: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status == STATUS_SUCCESS

    @classmethod
    def success(cls, url: str, body: bytes) -> "FetchResult":
        if not body:
            # An empty body carries nothing to store or parse, so it is
            # reported as a failure rather than a hollow success.
            return cls.failure(url, "empty body")
        return cls(url=url, status=STATUS_SUCCESS, body=body, fetched_at=time.time())

    @classmethod
    def failure(cls, url: str, reason: str) -> "FetchResult":
        return cls(
            url=url, status=STATUS_FETCH_ERROR, reason=reason, fetched_at=time.time()
        )


class Fetcher(Protocol):
    def fetch(self, url: str) -> FetchResult: ...


class MockFetcher:
    """Serves a fixed url -> body corpus from memory.

    The same url always yields the same body, which keeps whole crawl
    runs reproducible. Every fetch call is appended to ``request_log``
    as ``(url, monotonic_time)`` so tests can check pacing.
    """

    def __init__(self, corpus: dict[str, bytes]):
        self.corpus = dict(corpus)
        self.request_log: list[tuple[str, float]] = []

    def fetch(self, url: str) -> FetchResult:
        self.request_log.append((url, time.monotonic()))
        body = self.corpus.get(url)
        if body is None:
            return FetchResult.failure(url, "not in corpus")
        return FetchResult.success(url, body)

    @classmethod
    def from_dir(cls, directory) -> "MockFetcher":
        """Load a corpus directory of files named quote(url, safe='')."""
        corpus = {}
        for path in Path(directory).iterdir():
            if path.is_file():
                corpus[unquote(path.name)] = path.read_bytes()
        return cls(corpus)

    @classmethod
    def from_manifest(cls, manifest_path) -> "MockFetcher":
        """Load a corpus from a json manifest mapping url -> relative body file."""
        manifest_path = Path(manifest_path)
        mapping = json.loads(manifest_path.read_text(encoding="utf-8"))
        corpus = {
            url: (manifest_path.parent / rel).read_bytes()
            for url, rel in mapping.items()
        }
        return cls(corpus)

    @classmethod
    def from_path(cls, path) -> "MockFetcher":
        path = Path(path)
        if path.is_dir():
            return cls.from_dir(path)
        return cls.from_manifest(path)

    @staticmethod
    def corpus_filename(url: str) -> str:
        """File name a corpus directory uses for a url."""
        return quote(url, safe="")


class HttpFetcher:
    """Real network fetcher with per-host robots.txt Disallow checks.

    Any transport problem, timeout, refused connection, HTTP error
    status, becomes a fetch_error result for that url alone.
    """

    user_agent = "crawlrank/0.1"

    def __init__(self, timeout: float = 10.0, obey_robots: bool = True):
        if timeout <= 0:
            raise ValueError("timeout must be positive")
        self.timeout = timeout
        self.obey_robots = obey_robots
        self._robots: dict[str, urllib.robotparser.RobotFileParser | None] = {}

    def fetch(self, url: str) -> FetchResult:
        try:
            if self.obey_robots and not self._allowed(url):
                return FetchResult.failure(url, "disallowed by robots.txt")
            request = urllib.request.Request(url, headers={"User-Agent": self.user_agent})
            with urllib.request.urlopen(request, timeout=self.timeout) as response:
                body = response.read()
            return FetchResult.success(url, body)
        except Exception as exc:  # noqa: BLE001 - any transport failure is a per-url result
            return FetchResult.failure(url, f"{type(exc).__name__}: {exc}")

    def _allowed(self, url: str) -> bool:
        parts = urlsplit(url)
        origin = f"{parts.scheme}://{parts.netloc}"
        parser = self._robots.get(origin, _MISSING_ROBOTS)
        if parser is _MISSING_ROBOTS:
            parser = urllib.robotparser.RobotFileParser(f"{origin}/robots.txt")
            try:
                parser.read()
            except Exception:  # noqa: BLE001 - unreadable robots means no policy
                parser = None
            self._robots[origin] = parser
        if parser is None:
            return True
        return parser.can_fetch(self.user_agent, url)


_MISSING_ROBOTS = object()
