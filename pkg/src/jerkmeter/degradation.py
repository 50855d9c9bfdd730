"""Freeze-artifact injection and synthetic test content.

Two artifact kinds are produced. A "loss" freeze overwrites a span of
frames with the last good frame; when playback resumes the content has
moved on, so the first post-freeze transition spikes. A "delay" freeze
pauses playback by inserting duplicates and drops the same number of
frames from the tail, so playback resumes with the very next frame and
the post-freeze transition looks like ordinary motion.

Both return the exact ground-truth timeline, which is what the detection
and feature acceptance suites score against.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import PlanError
from .freeze_detection import MIN_EVENT_FRAMES, FreezeEvent, FreezeTimeline
from .video_io import ChromaFormat, LumaFrame, VideoHeader, VideoSequence


class FreezeKind(enum.Enum):
    LOSS = "loss"
    DELAY = "delay"


@dataclass
class FreezePlan:
    kind: FreezeKind
    # (start_frame, duration) pairs in source-frame indexing.
    events: list[tuple[int, int]]
    truth_path: str | None = None

    def validate(self, frame_count: int) -> None:
        prev_end = 0
        for start, duration in self.events:
            if duration < MIN_EVENT_FRAMES:
                raise PlanError(f"event at {start} shorter than {MIN_EVENT_FRAMES} frames")
            if start < 1:
                raise PlanError("events must start at frame 1 or later")
            if start <= prev_end:
                raise PlanError("events must be sorted with at least one clean frame between")
            if self.kind is FreezeKind.LOSS and start + duration > frame_count:
                raise PlanError(f"event at {start} runs past frame {frame_count - 1}")
            prev_end = start + duration
        if self.kind is FreezeKind.DELAY:
            inserted = sum(d for _, d in self.events)
            if inserted > frame_count - 1:
                raise PlanError("inserted duplicates exceed the sequence length")
            shift = 0
            for start, duration in self.events:
                if start + shift + duration > frame_count:
                    raise PlanError(
                        f"event at {start} would be cut off by end truncation"
                    )
                shift += duration


def inject_loss_freeze(seq: VideoSequence, plan: FreezePlan
                       ) -> tuple[VideoSequence, FreezeTimeline]:
    """Replace each planned span with its preceding frame (length unchanged)."""
    if plan.kind is not FreezeKind.LOSS:
        raise PlanError(f"plan kind is {plan.kind.value}, expected loss")
    plan.validate(seq.frame_count)
    frames = list(seq.frames)
    chroma = list(seq.chroma)
    for start, duration in plan.events:
        for i in range(start, start + duration):
            frames[i] = frames[start - 1]
            chroma[i] = chroma[start - 1]
    truth = FreezeTimeline(
        events=[FreezeEvent(s, d) for s, d in plan.events],
        frame_count=seq.frame_count,
        fps=seq.header.fps,
    )
    return VideoSequence(seq.header, frames, chroma), truth


def inject_delay_freeze(seq: VideoSequence, plan: FreezePlan
                        ) -> tuple[VideoSequence, FreezeTimeline]:
    """Insert duplicates at each planned point and truncate the tail.

    Content resumes with the next original frame, so the ground-truth
    start of each later event shifts by the duplicates inserted before it.
    """
    if plan.kind is not FreezeKind.DELAY:
        raise PlanError(f"plan kind is {plan.kind.value}, expected delay")
    plan.validate(seq.frame_count)
    frames: list[LumaFrame] = []
    chroma: list[bytes] = []
    truth_events: list[FreezeEvent] = []
    consumed = 0
    shift = 0
    for start, duration in plan.events:
        frames.extend(seq.frames[consumed:start])
        chroma.extend(seq.chroma[consumed:start])
        frames.extend([seq.frames[start - 1]] * duration)
        chroma.extend([seq.chroma[start - 1]] * duration)
        truth_events.append(FreezeEvent(start + shift, duration))
        consumed = start
        shift += duration
    frames.extend(seq.frames[consumed:])
    chroma.extend(seq.chroma[consumed:])
    frames = frames[: seq.frame_count]
    chroma = chroma[: seq.frame_count]
    truth = FreezeTimeline(events=truth_events, frame_count=seq.frame_count,
                           fps=seq.header.fps)
    return VideoSequence(seq.header, frames, chroma), truth


def inject(seq: VideoSequence, plan: FreezePlan) -> tuple[VideoSequence, FreezeTimeline]:
    if plan.kind is FreezeKind.LOSS:
        return inject_loss_freeze(seq, plan)
    return inject_delay_freeze(seq, plan)


def gradient_video(frame_count: int, width: int = 64, height: int = 64,
                   fps: tuple[int, int] = (25, 1), noise: float = 0.0,
                   seed: int = 0, velocity: int = 1) -> VideoSequence:
    """Horizontally translating luma ramp, the stock synthetic source.

    The ramp wraps with period `width`, so every transition moves the same
    amount: uniform motion with a flat frame-difference profile. `noise`
    is the per-frame density of pixels perturbed by +/-1 (luma is 8-bit,
    so sub-unit additive noise would vanish in rounding).
    """
    if frame_count < 1 or width < 2 or height < 1:
        raise ValueError("need at least 1 frame of at least 2x1 pixels")
    header = VideoHeader(width=width, height=height, fps_num=fps[0], fps_den=fps[1],
                         chroma=ChromaFormat.C420)
    rng = np.random.default_rng(seed)
    x = np.arange(width, dtype=np.int64)
    frames = []
    for t in range(frame_count):
        ramp = ((x + t * velocity) % width) * 255 // (width - 1)
        plane = np.tile(ramp.astype(np.uint8), (height, 1))
        if noise > 0.0:
            plane = _flip_pixels(plane, noise, rng)
        frames.append(LumaFrame(width=width, height=height, samples=plane))
    return VideoSequence.from_luma(header, frames)


def _flip_pixels(plane: np.ndarray, density: float, rng: np.random.Generator) -> np.ndarray:
    """Perturb a fraction `density` of pixels by +/-1, saturating at 0/255."""
    wide = plane.astype(np.int16)
    mask = rng.random(plane.shape) < density
    signs = rng.integers(0, 2, size=plane.shape) * 2 - 1
    wide[mask] += signs[mask]
    return np.clip(wide, 0, 255).astype(np.uint8)


def add_capture_noise(seq: VideoSequence, density: float, seed: int = 0) -> VideoSequence:
    """Sparse +/-1 pixel perturbations on every frame, luma only.

    Models a display-capture path: duplicated frames stop being bit
    identical, which is exactly what the non-zero detection threshold is
    for. Applied after injection; noise added before injection would be
    copied verbatim into the duplicates and change nothing.
    """
    if density <= 0.0:
        return seq
    rng = np.random.default_rng(seed)
    frames = [
        LumaFrame(f.width, f.height, _flip_pixels(f.samples, density, rng))
        for f in seq.frames
    ]
    return VideoSequence(seq.header, frames, list(seq.chroma))
