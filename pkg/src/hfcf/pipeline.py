"""End-to-end orchestration from an RGB face image to a hybrid tensor.

Stage order: load, upsample (default 8x), YCbCr, block DCT, DC split,
cross-component fusion, energy sort; in parallel the color descriptor is
computed on the original-resolution image, sorted against the luma DC
plane, and fused per the configured scheme; optional noise comes last.
The plane-count ledger along the way is 3 -> 192 -> 189 -> 63 -> 63/66/126.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bdct, colordesc, fusion, privmetrics, tensorio
from .errors import DimError
from .fusion import FusionScheme, HybridTensor, NoiseSpec, SortPermutation
from .polyprotect import DEFAULT_C_RANGE, DEFAULT_E_RANGE, DEFAULT_M, DEFAULT_OVERLAP


@dataclass(frozen=True)
class PipelineConfig:
    scheme: FusionScheme = FusionScheme.CONCAT_DLBP
    noise: NoiseSpec = field(default_factory=NoiseSpec.none)
    upsample_factor: int = 8
    alpha: float = 1.0  # additive DLBP weight
    m: int = DEFAULT_M
    overlap: int = DEFAULT_OVERLAP
    e_range: tuple[int, int] = DEFAULT_E_RANGE
    c_range: tuple[int, int] = DEFAULT_C_RANGE
    endpoint: str | None = None  # host:port for secure distance sessions
    seed: int = 0


@dataclass(frozen=True)
class TransformStages:
    """Intermediate products of one pipeline run (for tests, sidecars, reports)."""

    image: tensorio.RasterImage
    dct_full: bdct.DctTensor
    dc: bdct.DcPlanes
    dct_ac: bdct.DctTensor
    fused: bdct.DctTensor
    freq_sorted: bdct.DctTensor
    freq_perm: SortPermutation
    dlbp_sorted: colordesc.DlbpStack | None
    dlbp_perm: SortPermutation | None
    lbp_codes: list[colordesc.LbpCodeImage] | None
    hybrid: HybridTensor
    noisy: HybridTensor


def _load(img_or_path) -> tensorio.RasterImage:
    if isinstance(img_or_path, tensorio.RasterImage):
        return img_or_path
    return tensorio.load_image(img_or_path)


def run_transform(img_or_path, config: PipelineConfig) -> TransformStages:
    """Run every stage and keep the intermediates."""
    img = _load(img_or_path)
    up = tensorio.upsample_bilinear(img, config.upsample_factor)
    ycc = tensorio.rgb_to_ycbcr(up)
    full = bdct.forward_bdct(ycc)
    dc, ac = bdct.split_dc(full)
    fused = fusion.frequency_fuse(ac)
    freq_sorted, freq_perm = fusion.sort_by_energy(fused)

    dlbp_sorted = dlbp_perm = lbp = None
    if config.scheme in (
        FusionScheme.ADD_DLBP,
        FusionScheme.MULT_DLBP,
        FusionScheme.CONCAT_DLBP,
    ):
        stack = colordesc.dlbp_from_image(img)
        if (stack.tensor.height, stack.tensor.width) != (
            freq_sorted.height,
            freq_sorted.width,
        ):
            raise DimError(
                "descriptor geometry matches DCT planes only for upsample factor 8"
            )
        dlbp_sorted, dlbp_perm = fusion.sort_dlbp_by_dc_similarity(stack, dc.y)
        descriptor = dlbp_sorted
    elif config.scheme == FusionScheme.CONCAT_LBP:
        lbp = colordesc.lbp_rgb(img)
        descriptor = lbp
    else:
        descriptor = None

    hybrid = fusion.hybrid_fuse(freq_sorted, descriptor, config.scheme, config.alpha)
    noisy = fusion.apply_dp_noise(hybrid, config.noise)
    return TransformStages(
        image=img,
        dct_full=full,
        dc=dc,
        dct_ac=ac,
        fused=fused,
        freq_sorted=freq_sorted,
        freq_perm=freq_perm,
        dlbp_sorted=dlbp_sorted,
        dlbp_perm=dlbp_perm,
        lbp_codes=lbp,
        hybrid=hybrid,
        noisy=noisy,
    )


def make_hybrid(img_or_path, config: PipelineConfig) -> HybridTensor:
    """Image to (optionally noised) hybrid frequency-color tensor."""
    return run_transform(img_or_path, config).noisy


def run_batch(
    manifest_path,
    config: PipelineConfig,
    suffix: str = ".hft",
    workers: int = 4,
) -> list[str]:
    """Transform every image listed in a manifest (one path per line).

    Each output tensor is written alongside its image with the suffix
    appended; images are independent, so they are processed in parallel.
    Returns the output paths in manifest order.
    """
    with open(manifest_path, "r", encoding="utf-8") as fh:
        paths = [line.strip() for line in fh if line.strip()]

    def one(path: str) -> str:
        out = path + suffix
        tensorio.write_tensor(make_hybrid(path, config).tensor, out)
        return out

    if workers <= 1 or len(paths) <= 1:
        return [one(p) for p in paths]
    with ThreadPoolExecutor(max_workers=min(workers, len(paths))) as pool:
        return list(pool.map(one, paths))


def privacy_report(
    img_or_path, config: PipelineConfig | None = None, include_control: bool = False
) -> list[privmetrics.MetricReport]:
    """PSNR/SSIM of representative domain planes against the original luma.

    Compares the first three energy-sorted fused-DCT planes, the first
    three similarity-sorted DLBP planes, and the three RGB LBP code images.
    DCT and DLBP planes are min-max normalized to image range first; LBP
    codes already live in [0, 255].
    """
    config = config or PipelineConfig()
    stages = run_transform(
        img_or_path,
        PipelineConfig(
            scheme=FusionScheme.CONCAT_DLBP,
            noise=NoiseSpec.none(),
            upsample_factor=config.upsample_factor,
        ),
    )
    ref = tensorio.luma(stages.image)
    reports = []
    for i in range(3):
        plane = privmetrics.minmax_normalize(stages.freq_sorted.plane(i))
        reports.append(privmetrics.compare(ref, plane, "luma", f"dct:{i}"))
    for i in range(3):
        plane = privmetrics.minmax_normalize(stages.dlbp_sorted.plane(i))
        reports.append(privmetrics.compare(ref, plane, "luma", f"dlbp:{i}"))
    for code_img in colordesc.lbp_rgb(stages.image):
        plane = code_img.codes.astype(np.float64)
        reports.append(
            privmetrics.compare(ref, plane, "luma", f"lbp:{code_img.source_channel}")
        )
    if include_control:
        reports.append(privmetrics.compare(ref, ref, "luma", "luma"))
    return reports
