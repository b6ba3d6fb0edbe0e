"""Shared synthetic-audio fixtures and the acceptance summary printer."""

import numpy as np
import pytest

from mixweave.audio import SAMPLE_RATE, AudioBuffer


def sine(freq_hz: float, duration_s: float, amplitude: float = 1.0,
         rate: int = SAMPLE_RATE) -> AudioBuffer:
    t = np.arange(int(round(duration_s * rate))) / rate
    return AudioBuffer(amplitude * np.sin(2 * np.pi * freq_hz * t), rate)


def click_track(bpm: float, duration_s: float = 10.0, first_s: float | None = None,
                amplitude: float = 1.0) -> tuple[AudioBuffer, np.ndarray]:
    """Impulse clicks every beat; defaults to first click at one period so
    the ideal grid is {k * period, k >= 0}."""
    period = 60.0 / bpm
    n = int(round(duration_s * SAMPLE_RATE))
    x = np.zeros(n)
    t = period if first_s is None else first_s
    clicks = []
    while t < duration_s - 1e-9:
        x[int(round(t * SAMPLE_RATE))] = amplitude
        clicks.append(t)
        t += period
    return AudioBuffer(x, SAMPLE_RATE), np.array(clicks)


def textured_track(duration_s: float = 30.0, bpm: float | None = None,
                   seed: int = 0) -> AudioBuffer:
    """Rhythmic base with evolving timbre: 0.5 s tone segments of random
    frequency plus a click layer, so both beat tracking and similarity
    search have something to bite on."""
    r = np.random.default_rng(seed)
    bpm = bpm if bpm is not None else float(r.uniform(90, 150))
    n = int(round(duration_s * SAMPLE_RATE))
    x = np.zeros(n)
    seg = SAMPLE_RATE // 2
    for s0 in range(0, n, seg):
        f = r.uniform(150, 900)
        tt = np.arange(min(seg, n - s0)) / SAMPLE_RATE
        x[s0:s0 + len(tt)] += 0.3 * np.sin(2 * np.pi * f * tt)
        x[s0:s0 + len(tt)] += 0.02 * r.standard_normal(len(tt))
    period = 60.0 / bpm
    t = period
    while t < duration_s:
        s = int(round(t * SAMPLE_RATE))
        burst = np.arange(min(80, n - s)) / SAMPLE_RATE
        x[s:s + len(burst)] += 0.5 * np.sin(2 * np.pi * 3000 * burst)
        t += period
    return AudioBuffer(np.clip(x, -0.95, 0.95), SAMPLE_RATE)


@pytest.fixture
def base_track() -> AudioBuffer:
    return textured_track(seed=11)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" in nodeid and getattr(report, "when", "call") == "call":
                name = nodeid.split("::")[-1]
                lines.append((name, "PASS" if outcome == "passed" else "FAIL"))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, status in sorted(lines):
            terminalreporter.write_line(f"{status}  {name}")
