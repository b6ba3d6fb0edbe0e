"""mixweave: place sonified text/image/audio inputs into a base track by
timbral similarity and visualize the result as a stacked streamgraph."""

from .audio import SAMPLE_RATE, AudioBuffer, decode_wav, encode_wav, resample, rms, to_canonical
from .features import (
    BeatGrid,
    MfccMatrix,
    PitchEstimate,
    TempoEstimate,
    analyze_rhythm,
    estimate_pitch,
    estimate_tempo,
    mel_filterbank,
    mfcc,
    onset_envelope,
    stft_power,
    track_beats,
)
from .mixer import MixEntry, MixManifest, auto_gain, render_mix, update_entry
from .placement import PlacementPlan, clip_signature, cosine_similarity, find_placement
from .project import Project, ProjectStore
from .sonify import (
    COLOR_LEXICON,
    Backends,
    InputElement,
    StubCaptioner,
    StubGenerator,
    caption_image,
    dominant_color,
    extract_colors,
    process_element,
    sonify,
)
from .viz import StreamLayer, VizModel, build_viz, export_svg, playhead_state

__version__ = "0.1.0"
