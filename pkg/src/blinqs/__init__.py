"""BlinQS: a blind-transcodable scalable wavelet image codec.

Encode an image once into a single embedded stream; later transcode it to
any target bit rate using nothing but the per-block string lengths recorded
in the header.  A conventional rate-distortion-optimised truncation path
(PCRD) is included as a baseline.
"""

from .container import StreamContainer, StreamHeader, parse, parse_header, serialize
from .errors import BlinqsError, DegenerateStreamError, FormatError, InvariantError
from .metrics import psnr, ssim
from .pipeline import (
    RateReport,
    compare,
    decode_pipeline,
    encode_image,
    encode_pipeline,
    pcrd_truncate,
    rd_curve,
    reports_to_csv,
)
from .quantizer import DeltaSchedule, compute_delta_schedule, dequantize, quantize
from .raster import read_image, write_image
from .spiht import BACKEND as SPIHT_BACKEND
from .spiht import CodedBlock, decode_block, encode_block
from .transcoder import ContributionProfile, transcode
from .wavelet import SubbandPyramid, forward_dwt, inverse_dwt

__version__ = "0.1.0"

__all__ = [
    "BlinqsError",
    "FormatError",
    "DegenerateStreamError",
    "InvariantError",
    "SubbandPyramid",
    "forward_dwt",
    "inverse_dwt",
    "DeltaSchedule",
    "compute_delta_schedule",
    "quantize",
    "dequantize",
    "CodedBlock",
    "encode_block",
    "decode_block",
    "SPIHT_BACKEND",
    "StreamHeader",
    "StreamContainer",
    "serialize",
    "parse",
    "parse_header",
    "ContributionProfile",
    "transcode",
    "encode_pipeline",
    "encode_image",
    "decode_pipeline",
    "pcrd_truncate",
    "rd_curve",
    "compare",
    "RateReport",
    "reports_to_csv",
    "psnr",
    "ssim",
    "read_image",
    "write_image",
    "__version__",
]
