"""texnoise: noise sensitivity of local texture descriptors.

LBP/LDP feature extraction over grayscale images, a seeded Gaussian noise
ladder, four self-contained classifiers, and a benchmark harness that sweeps
the descriptor/classifier/noise matrix and renders report tables.
"""

from ._backend import BACKEND as KERNEL_BACKEND
from .imaging import (
    GrayImage,
    ImageFormatError,
    NoiseSpec,
    add_gaussian_noise,
    decode_image,
    load_image,
    load_pgm,
    load_png,
    noise_field,
    resize_bilinear,
    save_pgm,
)
from .descriptors import (
    KIRSCH_MASKS,
    DescriptorConfig,
    FeatureVector,
    LbpParams,
    LdpParams,
    extract_histogram,
    kirsch_responses,
    lbp_code,
    lbp_histogram,
    ldp_code,
    ldp_histogram,
    sample_circular,
)

__version__ = "0.1.0"
