import os

from config import DATA_DIR, PROJECT_ROOT, REPORTS_DIR, THREADS_ENV_VAR, TRACES_DIR, thread_cap


def test_output_directories_live_under_data():
    assert os.path.dirname(TRACES_DIR) == DATA_DIR
    assert os.path.dirname(REPORTS_DIR) == DATA_DIR
    assert os.path.dirname(DATA_DIR) == PROJECT_ROOT


def test_thread_cap_defaults_to_one(monkeypatch):
    monkeypatch.delenv(THREADS_ENV_VAR, raising=False)
    assert thread_cap() == 1


def test_thread_cap_reads_environment(monkeypatch):
    monkeypatch.setenv(THREADS_ENV_VAR, '4')
    assert thread_cap() == 4


def test_thread_cap_ignores_invalid_values(monkeypatch):
    for raw in ('zero', '0', '-2', ' '):
        monkeypatch.setenv(THREADS_ENV_VAR, raw)
        assert thread_cap() == 1
