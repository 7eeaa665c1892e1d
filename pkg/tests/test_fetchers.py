import json

import pytest

from crawlrank import FetchResult, HttpFetcher, MockFetcher


def test_fetch_result_body_nonempty_iff_success():
    ok = FetchResult.success("http://a.test/", b"body")
    assert ok.ok and ok.status == "success" and ok.body == b"body" and ok.reason == ""
    assert ok.fetched_at > 0

    empty = FetchResult.success("http://a.test/", b"")
    assert not empty.ok
    assert empty.reason == "empty body"

    failed = FetchResult.failure("http://a.test/", "nope")
    assert not failed.ok and failed.status == "fetch_error" and failed.body == b""


def test_mock_fetcher_serves_and_logs():
    fetcher = MockFetcher({"http://a.test/": b"hello"})
    assert fetcher.fetch("http://a.test/").body == b"hello"
    assert not fetcher.fetch("http://b.test/").ok
    assert [url for url, _t in fetcher.request_log] == ["http://a.test/", "http://b.test/"]


def test_mock_fetcher_is_stable_across_calls():
    fetcher = MockFetcher({"http://a.test/": b"same"})
    assert fetcher.fetch("http://a.test/").body == fetcher.fetch("http://a.test/").body


def test_mock_fetcher_from_dir(tmp_path, write_corpus):
    corpus = {"http://a.test/x?q=1": b"one", "http://b.test/": b"two"}
    directory = write_corpus(corpus)
    fetcher = MockFetcher.from_path(directory)
    assert fetcher.corpus == corpus


def test_mock_fetcher_from_manifest(tmp_path):
    (tmp_path / "page1.html").write_bytes(b"<p>1</p>")
    (tmp_path / "page2.html").write_bytes(b"<p>2</p>")
    manifest = tmp_path / "corpus.json"
    manifest.write_text(
        json.dumps({"http://a.test/1": "page1.html", "http://a.test/2": "page2.html"})
    )
    fetcher = MockFetcher.from_path(manifest)
    assert fetcher.fetch("http://a.test/1").body == b"<p>1</p>"
    assert fetcher.fetch("http://a.test/2").body == b"<p>2</p>"


def test_http_fetcher_validation_and_offline_failure():
    with pytest.raises(ValueError):
        HttpFetcher(timeout=0)
    fetcher = HttpFetcher(timeout=0.2, obey_robots=False)
    # unresolvable host: must come back as a result, not an exception
    result = fetcher.fetch("http://no-such-host.invalid/")
    assert not result.ok
    assert result.reason
