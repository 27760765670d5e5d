"""aurora: articulatory inversion from vowel formants.

Trains a statistical tongue-shape model from a landmark corpus, inverts
(F1, F2) pairs to smooth 100-point tongue contours, precompiles a lookup
table for realtime use, tracks formants with LPC, and streams visual
biofeedback frames over a websocket.
"""
from .corpus import Corpus, SynthSpec, TokenRecord, load_corpus, synth_corpus
from .errors import AuroraError
from .formants import AnalysisConfig, FormantFrame, track
from .inversion import TongueContour, invert
from .lut import LookupTable, compile_lut, load_lut, query_lut, save_lut
from .regress import ModelBundle, load_bundle, save_bundle, train_model

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig",
    "AuroraError",
    "Corpus",
    "FormantFrame",
    "LookupTable",
    "ModelBundle",
    "SynthSpec",
    "TokenRecord",
    "TongueContour",
    "__version__",
    "compile_lut",
    "invert",
    "load_bundle",
    "load_corpus",
    "load_lut",
    "query_lut",
    "save_bundle",
    "save_lut",
    "synth_corpus",
    "track",
    "train_model",
]
