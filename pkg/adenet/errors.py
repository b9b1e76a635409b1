"""
Error hierarchy - ADENet
Every failure the library raises derives from AdenetError
"""


class AdenetError(Exception):
    """Base class for all ADENet errors"""


class ConfigError(AdenetError, ValueError):
    """Invalid or inconsistent configuration"""


class WavFormatError(AdenetError, ValueError):
    """Malformed RIFF/WAVE file"""


class UnsupportedAudioError(AdenetError, ValueError):
    """Readable audio file with a codec other than 16-bit PCM"""


class DegenerateInputError(AdenetError, ValueError):
    """Zero-power or all-zero signal where energy is required"""


class ClipSpecError(AdenetError, ValueError):
    """Invalid synthetic clip parameters"""


class CorpusIOError(AdenetError, OSError):
    """Corpus directory cannot be written or a referenced file is missing"""


class SequenceLengthError(AdenetError, ValueError):
    """Sequence too short or empty for the requested operation"""


class AlignmentError(AdenetError, ValueError):
    """Audio and visual streams cannot be brought to the fixed rate ratio"""


class ShapeError(AdenetError, ValueError):
    """Tensor shape does not match the module contract"""


class UndefinedMetricError(AdenetError, ValueError):
    """Metric undefined for the given labels (e.g. a single class)"""


class TrainingDivergedError(AdenetError, RuntimeError):
    """Non-finite loss during training"""


class UnknownAxisError(AdenetError, ValueError):
    """Ablation axis not in the switchboard"""


class UnknownPlotKindError(AdenetError, ValueError):
    """Plot kind not supported"""


class MaskInvariantError(AdenetError, RuntimeError):
    """Enhancement mask left the non-negative range"""


class UnknownClipError(AdenetError, LookupError):
    """Clip id not present in the requested split"""
