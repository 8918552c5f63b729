"""Double media-based modulation (DMBM) link-level simulation toolkit."""

from .benchmarks import BenchmarkConfig, encode_bench, ml_detect_bench
from .constellation import Constellation, build_qam, demap, map_bits, optimum_angle, rotate
from .core import (Codeword, DetectionResult, ModulationConfig, encode, enumerate_codewords,
                   ml_detect, split_bits)
from .errors import ConfigurationError, ResourceCapError

__version__ = "0.1.0"

__all__ = [
    "BenchmarkConfig", "Codeword", "ConfigurationError", "Constellation", "DetectionResult",
    "ModulationConfig", "ResourceCapError", "build_qam", "demap", "encode", "encode_bench",
    "enumerate_codewords", "map_bits", "ml_detect", "ml_detect_bench", "optimum_angle",
    "rotate", "split_bits",
]
