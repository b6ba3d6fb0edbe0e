import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixweave.audio import SAMPLE_RATE, AudioBuffer
from mixweave.errors import LengthMismatch, NoCandidate, TooShort
from mixweave.features import MfccMatrix, analyze_rhythm, mfcc
from mixweave.placement import (
    candidate_starts,
    clip_signature,
    cosine_similarity,
    find_placement,
    window_frame_range,
)

from conftest import textured_track


def brute_force_best(base_mfcc, beats, clip_mfcc, clip_dur, base_dur,
                     hint=None, occupied=()):
    """Independent exhaustive scan over every candidate, earliest tie-break."""
    target = clip_mfcc.frames[:, 1:].mean(axis=0)
    best = None
    for start, _ in candidate_starts(beats, base_dur):
        if start >= base_dur:
            continue
        end = start + clip_dur
        w_end = min(end, base_dur)
        if hint is not None and not (hint[0] <= start and end <= hint[1]):
            continue
        bad = False
        for lo, hi in occupied:
            if min(w_end, hi) - max(start, lo) >= 0.5 * clip_dur:
                bad = True
        if bad:
            continue
        f0, f1 = window_frame_range(start, w_end, base_mfcc.n_frames)
        if f1 <= f0:
            continue
        sig = base_mfcc.frames[f0:f1, 1:].mean(axis=0)
        na, nb = np.linalg.norm(sig), np.linalg.norm(target)
        score = 0.0 if na < 1e-12 or nb < 1e-12 else float(
            np.clip(np.dot(sig, target) / (na * nb), -1.0, 1.0))
        if best is None or score > best[0]:
            best = (score, start)
    return best


class TestClipSignature:
    def test_single_frame(self):
        m = MfccMatrix(frames=np.arange(13.0)[None, :])
        assert np.array_equal(clip_signature(m), np.arange(1.0, 13.0))

    def test_symmetric_frames_cancel(self):
        row = np.arange(13.0)
        m = MfccMatrix(frames=np.stack([row, -row]))
        sig = clip_signature(m)
        assert np.allclose(sig, 0.0)

    def test_looped_clip_matches_single_period(self):
        block = np.sin(2 * np.pi * np.arange(512) / 64)
        short = AudioBuffer(np.tile(block, 8), SAMPLE_RATE)
        long = AudioBuffer(np.tile(block, 40), SAMPLE_RATE)
        assert np.allclose(clip_signature(mfcc(short)), clip_signature(mfcc(long)), atol=1e-5)

    def test_empty(self):
        with pytest.raises(TooShort):
            clip_signature(MfccMatrix(frames=np.zeros((0, 13))))

    def test_noise_vs_sine_regression(self):
        # frozen once from this exact construction; timbres must not read alike
        rng = np.random.default_rng(2024)
        t = np.arange(2 * SAMPLE_RATE) / SAMPLE_RATE
        noise = AudioBuffer(np.clip(rng.standard_normal(len(t)) * 0.3, -1, 1), SAMPLE_RATE)
        tone = AudioBuffer(0.5 * np.sin(2 * np.pi * 200 * t), SAMPLE_RATE)
        sim = cosine_similarity(clip_signature(mfcc(noise)), clip_signature(mfcc(tone)))
        assert sim < 0.9
        assert sim == pytest.approx(-0.29355077, abs=1e-6)


class TestCosine:
    def test_identical(self):
        v = np.arange(1.0, 13.0)
        assert cosine_similarity(v, v) == 1.0

    def test_orthogonal(self):
        a = np.zeros(12); a[0] = 1.0
        b = np.zeros(12); b[1] = 1.0
        assert cosine_similarity(a, b) == 0.0

    def test_antiparallel(self):
        v = np.arange(1.0, 13.0)
        assert cosine_similarity(v, -v) == -1.0

    def test_degenerate_zero_norm(self):
        assert cosine_similarity(np.zeros(12), np.ones(12)) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            cosine_similarity(np.ones(3), np.ones(4))

    @given(st.integers(2, 16), st.integers(0, 10_000),
           st.floats(min_value=1e-3, max_value=10.0))
    @settings(max_examples=100, deadline=None)
    def test_bounds_and_gain_invariance(self, dim, seed, k):
        rng = np.random.default_rng(seed)
        a, b = rng.standard_normal(dim), rng.standard_normal(dim)
        s = cosine_similarity(a, b)
        assert -1.0 <= s <= 1.0
        assert abs(cosine_similarity(k * a, b) - s) < 1e-9
        assert abs(cosine_similarity(a, k * b) - s) < 1e-9


@pytest.fixture(scope="module")
def base():
    buf = textured_track(seed=21)
    return buf, mfcc(buf), analyze_rhythm(buf)


class TestFindPlacement:
    def test_self_match_hits_origin_beat(self, base):
        buf, base_mfcc, grid = base
        bt = float(grid.beat_times_s[12])
        s0 = int(round(bt * SAMPLE_RATE))
        clip = AudioBuffer(buf.samples[s0:s0 + 2 * SAMPLE_RATE].copy(), SAMPLE_RATE)
        plan = find_placement(base_mfcc, grid, mfcc(clip), clip.duration_s, buf.duration_s)
        assert plan.start_s == bt
        assert plan.score >= 0.999
        assert plan.snapped_beat_index == 12

    def test_matches_brute_force_exactly(self, base):
        buf, base_mfcc, grid = base
        rng = np.random.default_rng(4)
        clip = AudioBuffer(rng.uniform(-0.5, 0.5, 3 * SAMPLE_RATE), SAMPLE_RATE)
        clip_mfcc = mfcc(clip)
        plan = find_placement(base_mfcc, grid, clip_mfcc, 3.0, buf.duration_s)
        score, start = brute_force_best(base_mfcc, grid, clip_mfcc, 3.0, buf.duration_s)
        assert plan.start_s == start
        assert plan.score == pytest.approx(score, abs=1e-12)

    def test_hint_is_hard_constraint(self, base):
        buf, base_mfcc, grid = base
        rng = np.random.default_rng(5)
        clip_mfcc = mfcc(AudioBuffer(rng.uniform(-0.5, 0.5, 2 * SAMPLE_RATE), SAMPLE_RATE))
        plan = find_placement(base_mfcc, grid, clip_mfcc, 2.0, buf.duration_s,
                              hint=(10.0, 15.0))
        assert 10.0 <= plan.start_s and plan.end_s <= 15.0
        assert plan.hint_window == (10.0, 15.0)

    def test_hint_narrower_than_clip_rejected(self, base):
        buf, base_mfcc, grid = base
        clip_mfcc = mfcc(AudioBuffer(np.zeros(2 * SAMPLE_RATE) + 0.1, SAMPLE_RATE))
        with pytest.raises(ValueError):
            find_placement(base_mfcc, grid, clip_mfcc, 2.0, buf.duration_s, hint=(10.0, 11.0))

    def test_occupancy_limits_overlap(self, base):
        buf, base_mfcc, grid = base
        bt = float(grid.beat_times_s[12])
        s0 = int(round(bt * SAMPLE_RATE))
        clip = AudioBuffer(buf.samples[s0:s0 + 2 * SAMPLE_RATE].copy(), SAMPLE_RATE)
        clip_mfcc = mfcc(clip)
        first = find_placement(base_mfcc, grid, clip_mfcc, 2.0, buf.duration_s)
        second = find_placement(base_mfcc, grid, clip_mfcc, 2.0, buf.duration_s,
                                occupied=[(first.start_s, first.end_s)])
        overlap = min(first.end_s, second.end_s) - max(first.start_s, second.start_s)
        assert overlap < 0.5 * 2.0

    def test_no_candidate(self, base):
        buf, base_mfcc, grid = base
        clip_mfcc = mfcc(AudioBuffer(np.full(2 * SAMPLE_RATE, 0.1), SAMPLE_RATE))
        # hint keeps windows full-length, occupancy then rejects every one
        occupied = [(0.0, buf.duration_s)]
        with pytest.raises(NoCandidate) as exc_info:
            find_placement(base_mfcc, grid, clip_mfcc, 2.0, buf.duration_s,
                           hint=(10.0, 14.0), occupied=occupied)
        assert exc_info.value.hint_window == (10.0, 14.0)

    def test_fallback_grid_when_low_confidence(self):
        silence = AudioBuffer(np.zeros(20 * SAMPLE_RATE), SAMPLE_RATE)
        grid = analyze_rhythm(silence)
        assert grid.low_confidence
        starts = [s for s, bi in candidate_starts(grid, 20.0)]
        assert starts[:4] == [0.0, 0.25, 0.5, 0.75]
        assert all(bi is None for _, bi in candidate_starts(grid, 20.0))

    def test_placement_invariant_to_clip_gain(self, base):
        buf, base_mfcc, grid = base
        rng = np.random.default_rng(8)
        t = np.arange(3 * SAMPLE_RATE) / SAMPLE_RATE
        x = 0.3 * np.sin(2 * np.pi * 500 * t) + 0.05 * rng.standard_normal(len(t))
        loud = find_placement(base_mfcc, grid, mfcc(AudioBuffer(x, SAMPLE_RATE)),
                              3.0, buf.duration_s)
        quiet = find_placement(base_mfcc, grid, mfcc(AudioBuffer(0.25 * x, SAMPLE_RATE)),
                               3.0, buf.duration_s)
        assert loud.start_s == quiet.start_s

    @pytest.mark.parametrize("seed", range(5))
    def test_plan_invariants_random(self, base, seed):
        buf, base_mfcc, grid = base
        rng = np.random.default_rng(seed)
        dur = float(rng.uniform(1.0, 4.0))
        clip = AudioBuffer(rng.uniform(-0.5, 0.5, int(dur * SAMPLE_RATE)), SAMPLE_RATE)
        hint = None
        if rng.random() < 0.5:
            lo = float(rng.uniform(0, buf.duration_s - dur - 2))
            hint = (lo, lo + dur + 2.0)
        try:
            plan = find_placement(base_mfcc, grid, mfcc(clip), clip.duration_s,
                                  buf.duration_s, hint=hint)
        except NoCandidate:
            return
        assert 0.0 <= plan.start_s < plan.end_s <= buf.duration_s
        assert -1.0 <= plan.score <= 1.0
        if not plan.truncated:
            assert plan.end_s - plan.start_s == pytest.approx(clip.duration_s)
        if hint:
            assert hint[0] <= plan.start_s <= hint[1]
