"""Thread-cap environment variable and ordered parallel mapping."""

import os

import pytest

from parity_meter import ConfigError
from parity_meter.parallel import ENV_VAR, ordered_map, thread_cap


def test_default_is_single_thread(monkeypatch):
    monkeypatch.delenv(ENV_VAR, raising=False)
    assert thread_cap() >= 1


def test_explicit_cap(monkeypatch):
    monkeypatch.setenv(ENV_VAR, "3")
    assert thread_cap() == 3


def test_zero_means_auto(monkeypatch):
    monkeypatch.setenv(ENV_VAR, "0")
    assert thread_cap() == (os.cpu_count() or 1)


def test_invalid_cap_rejected(monkeypatch):
    monkeypatch.setenv(ENV_VAR, "banana")
    with pytest.raises(ConfigError):
        thread_cap()
    monkeypatch.setenv(ENV_VAR, "-2")
    with pytest.raises(ConfigError):
        thread_cap()


def test_ordered_map_preserves_order(monkeypatch):
    monkeypatch.setenv(ENV_VAR, "4")
    items = list(range(50))
    assert ordered_map(lambda v: v * v, items) == [v * v for v in items]


def test_ordered_map_single_thread(monkeypatch):
    monkeypatch.setenv(ENV_VAR, "1")
    assert ordered_map(str, [3, 1, 2]) == ["3", "1", "2"]
