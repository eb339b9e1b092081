"""Privacy-preserving face-template toolkit.

Pipeline: raster image -> 8x8 block DCT -> cross-component frequency
fusion -> sorted hybrid frequency-color tensor (with optional DP noise);
embeddings produced downstream are protected with identity-specific
polynomials, enrolled in a gallery, and matched either locally or through
a two-party secret-shared cosine-distance protocol.
"""

from .bdct import DcPlanes, DctTensor, Layout, channel_energy, forward_bdct, inverse_bdct, split_dc
from .colordesc import DlbpStack, LbpCodeImage, decode_dlbp, derive_channels, lbp_codes, lbp_rgb
from .fusion import (
    FusionScheme,
    HybridTensor,
    NoiseKind,
    NoiseSpec,
    SortPermutation,
    apply_dp_noise,
    frequency_fuse,
    hybrid_fuse,
    sort_by_energy,
    sort_dlbp_by_dc_similarity,
)
from .gallery import GalleryRecord, GalleryStore, QueryResult, query_1n, retrieval_rate
from .pipeline import PipelineConfig, make_hybrid, privacy_report, run_transform
from .polyprotect import ProtectParams, ProtectedEmbedding, gen_params, output_len, protect
from .privmetrics import MetricReport, psnr, ssim
from .tensorio import (
    ColorSpace,
    RasterImage,
    Tensor3,
    load_image,
    read_tensor,
    rgb_to_ycbcr,
    upsample_bilinear,
    write_tensor,
)

__version__ = "0.1.0"
