import pytest

from bowtie_cap.parallel import pmap, thread_count


def test_default_threads(monkeypatch):
    monkeypatch.delenv("BOWTIE_CAP_THREADS", raising=False)
    assert thread_count() == 1


@pytest.mark.parametrize("value", ["0", "-2", "many"])
def test_invalid_threads(monkeypatch, value):
    monkeypatch.setenv("BOWTIE_CAP_THREADS", value)
    with pytest.raises(ValueError):
        thread_count()


def test_pmap_keeps_order(monkeypatch):
    monkeypatch.setenv("BOWTIE_CAP_THREADS", "4")
    assert pmap(lambda x: x * x, range(50)) == [x * x for x in range(50)]
