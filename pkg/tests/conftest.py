import numpy as np
import pytest

from dsst import _backend
from dsst.signal import Signal, make_simulated_signal

FS = 1024.0
N = 8192
SIGMA = 0.03


def naive_dft(x, sign=-1):
    """O(n^2) DFT written out from the definition."""
    x = np.asarray(x, dtype=complex)
    n = x.size
    k = np.arange(n)
    return np.exp(sign * 2j * np.pi * np.outer(k, k) / n) @ x


def tone(freq, fs=FS, n=N, phase=0.0, amp=1.0):
    t = np.arange(n) / fs
    return Signal(amp * np.cos(2 * np.pi * freq * t + phase), fs)


@pytest.fixture(scope="session")
def bench_signal():
    return make_simulated_signal(FS, 8.0)


@pytest.fixture(params=sorted(_backend.BACKENDS))
def backend(request, monkeypatch):
    """Run the test once per available kernel backend."""
    monkeypatch.setattr(_backend, "kernels", _backend.get(request.param))
    return request.param


# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
