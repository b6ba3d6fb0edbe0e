"""Exception types shared across the engine."""


class MixweaveError(Exception):
    """Base class for every error the engine raises deliberately."""


class MalformedWav(MixweaveError):
    """WAV byte stream is structurally broken (bad header, truncated data)."""


class UnsupportedEncoding(MixweaveError):
    """WAV is valid RIFF but uses an encoding the engine does not read."""


class EmptyInterval(MixweaveError):
    """A time interval rounds to fewer than one sample."""


class TooShort(MixweaveError):
    """Signal shorter than the minimum an analysis operation needs."""


class LengthMismatch(MixweaveError):
    """Two feature vectors of different lengths were compared."""


class NoCandidate(MixweaveError):
    """Hint/occupancy filters left no insertion candidate."""

    def __init__(self, message: str, hint_window=None):
        super().__init__(message)
        self.hint_window = hint_window


class BadImage(MixweaveError):
    """Payload does not decode as a PNG or JPEG image."""


class BackendUnavailable(MixweaveError):
    """Remote generator/captioner unreachable after retries."""


class BadGeneratedAudio(MixweaveError):
    """Generator backend returned audio that fails the wire contract."""


class InvalidManifest(MixweaveError):
    """Mix manifest references unknown elements or out-of-range placements."""


class UnknownProject(MixweaveError):
    """No project stored under the given id."""


class UnknownElement(MixweaveError):
    """No element with the given id in the project."""


class InvalidPlacement(MixweaveError):
    """Requested placement edit would leave the clip outside the base track."""


class DurationOutOfRange(MixweaveError):
    """Base track duration outside the accepted 5 s - 10 min range."""


class EmptyModel(MixweaveError):
    """Visualization model has no bins to draw."""


class OutOfRange(MixweaveError):
    """Playhead time outside [0, duration]."""
