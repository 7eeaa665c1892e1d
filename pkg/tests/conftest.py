import pytest

from crawlrank import MockFetcher


@pytest.fixture
def write_corpus(tmp_path):
    """Factory writing a url -> body corpus as a mock fetcher directory."""

    def _write(corpus: dict, name: str = "corpus"):
        directory = tmp_path / name
        directory.mkdir(exist_ok=True)
        for url, body in corpus.items():
            (directory / MockFetcher.corpus_filename(url)).write_bytes(body)
        return directory

    return _write
