"""Shared helpers for the test suite."""

import io

import numpy as np
import pytest

from jerkmeter import LumaFrame, VideoHeader, VideoSequence, write_y4m

# Acceptance tests register one line per criterion; printing happens in the
# terminal-summary hook because pytest's fd-level capture would otherwise
# swallow mid-test output.
_criterion_lines = []


def record_criterion(line: str) -> None:
    _criterion_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if _criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in _criterion_lines:
            terminalreporter.line(line)


def frame(samples) -> LumaFrame:
    arr = np.asarray(samples, dtype=np.uint8)
    return LumaFrame(width=arr.shape[1], height=arr.shape[0], samples=arr)


def random_frames(rng: np.random.Generator, count: int, width: int, height: int):
    return [
        frame(rng.integers(0, 256, size=(height, width), dtype=np.uint8))
        for _ in range(count)
    ]


def y4m_bytes(seq: VideoSequence) -> bytes:
    sink = io.BytesIO()
    write_y4m(seq, sink)
    return sink.getvalue()


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)


def make_sequence(rng: np.random.Generator, count: int = 8, width: int = 8,
                  height: int = 6) -> VideoSequence:
    header = VideoHeader(width=width, height=height, fps_num=30, fps_den=1)
    return VideoSequence.from_luma(header, random_frames(rng, count, width, height))
