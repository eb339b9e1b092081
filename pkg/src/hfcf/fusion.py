"""Cross-component frequency fusion, sorting, hybrid fusion, and DP noise.

The AC coefficient planes of the three color components are collapsed to
one plane per frequency by keeping, per pixel, the coefficient of maximal
absolute value with its sign (ties go Y, then Cb, then Cr). Fused planes
are sorted by energy; decoded-LBP planes are sorted by Euclidean distance
to the luma DC plane. The sorted stacks combine by addition,
multiplication, or concatenation, and the result can be perturbed with
seeded Laplace or Gaussian noise.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .bdct import DctTensor, Layout, PlaneTag, channel_energy
from .colordesc import DlbpStack, LbpCodeImage
from .errors import DimError, LayoutError, ParamError, SchemeError
from .tensorio import Tensor3

AC_PER_COMPONENT = 63


class FusionScheme(str, enum.Enum):
    FREQ_ONLY = "freq"  # 63 fused frequency planes, no color descriptor
    ADD_DLBP = "add"  # 63 planes: freq + alpha * dlbp
    MULT_DLBP = "mult"  # 63 planes: freq * (1 + dlbp / 255)
    CONCAT_DLBP = "concat-dlbp"  # 126 planes: freq ++ dlbp
    CONCAT_LBP = "concat-lbp"  # 66 planes: freq ++ R/G/B LBP codes


SCHEME_DEPTH = {
    FusionScheme.FREQ_ONLY: 63,
    FusionScheme.ADD_DLBP: 63,
    FusionScheme.MULT_DLBP: 63,
    FusionScheme.CONCAT_DLBP: 126,
    FusionScheme.CONCAT_LBP: 66,
}


class NoiseKind(str, enum.Enum):
    LAPLACE = "laplace"
    GAUSSIAN = "gauss"
    NONE = "none"


@dataclass(frozen=True)
class NoiseSpec:
    """Pixel-wise noise configuration; deterministic under a fixed seed."""

    mechanism: NoiseKind = NoiseKind.NONE
    epsilon: float | None = None
    sigma: float | None = None
    sensitivity: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.mechanism == NoiseKind.LAPLACE:
            if self.epsilon is None or self.epsilon <= 0:
                raise ParamError("Laplace mechanism requires epsilon > 0")
            if self.sensitivity <= 0:
                raise ParamError("Laplace mechanism requires sensitivity > 0")
        elif self.mechanism == NoiseKind.GAUSSIAN:
            if self.sigma is None or self.sigma <= 0:
                raise ParamError("Gaussian mechanism requires sigma > 0")

    @classmethod
    def none(cls) -> "NoiseSpec":
        return cls(NoiseKind.NONE)

    @classmethod
    def laplace(cls, epsilon: float, sensitivity: float = 1.0, seed: int = 0) -> "NoiseSpec":
        return cls(NoiseKind.LAPLACE, epsilon=epsilon, sensitivity=sensitivity, seed=seed)

    @classmethod
    def gaussian(cls, sigma: float, seed: int = 0) -> "NoiseSpec":
        return cls(NoiseKind.GAUSSIAN, sigma=sigma, seed=seed)


@dataclass(frozen=True)
class SortPermutation:
    """Plane ordering applied by a sort: output[k] = input[ordering[k]]."""

    ordering: tuple[int, ...]
    key_values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "ordering", tuple(int(i) for i in self.ordering))
        object.__setattr__(self, "key_values", tuple(float(v) for v in self.key_values))
        if sorted(self.ordering) != list(range(len(self.ordering))):
            raise ParamError("ordering must be a permutation of 0..K-1")


@dataclass(frozen=True)
class HybridTensor:
    """Fused frequency-color stack ready for a model backbone (or noise)."""

    tensor: Tensor3
    scheme: FusionScheme

    def __post_init__(self):
        want = SCHEME_DEPTH[self.scheme]
        if self.tensor.depth != want:
            raise SchemeError(
                f"scheme {self.scheme.value} requires {want} planes, got {self.tensor.depth}"
            )

    @property
    def depth(self) -> int:
        return self.tensor.depth

    def plane(self, index: int) -> np.ndarray:
        return self.tensor.plane(index)


def frequency_fuse(ac: DctTensor) -> DctTensor:
    """Collapse Ac189 to Fused63: per frequency and pixel, keep the Y/Cb/Cr
    coefficient of largest magnitude, sign preserved; ties favor Y over Cb
    over Cr."""
    if ac.layout != Layout.AC189:
        raise LayoutError(f"frequency_fuse requires Ac189, got {ac.layout.value}")
    by_component = {}
    for comp in ("Y", "Cb", "Cr"):
        idx = [i for i, t in enumerate(ac.tags) if t.component == comp]
        if len(idx) != AC_PER_COMPONENT:
            raise LayoutError(f"component {comp} has {len(idx)} planes, expected 63")
        idx.sort(key=lambda i: ac.tags[i].freq)
        by_component[comp] = ac.tensor.data[:, :, idx]
    # stacking in priority order makes argmax's first-wins tie rule pick Y
    stacked = np.stack([by_component["Y"], by_component["Cb"], by_component["Cr"]])
    winner = np.argmax(np.abs(stacked), axis=0)
    fused = np.take_along_axis(stacked, winner[None], axis=0)[0]
    tags = tuple(PlaneTag("mixed", f) for f in range(1, AC_PER_COMPONENT + 1))
    return DctTensor(Tensor3(fused, [str(t) for t in tags]), Layout.FUSED63, tags)


def _stable_sort(keys: np.ndarray, descending: bool) -> np.ndarray:
    order = np.argsort(-keys if descending else keys, kind="stable")
    return order


def sort_by_energy(fused: DctTensor) -> tuple[DctTensor, SortPermutation]:
    """Reorder Fused63 planes by non-increasing energy (stable)."""
    if fused.layout != Layout.FUSED63:
        raise LayoutError(f"sort_by_energy requires Fused63, got {fused.layout.value}")
    energies = np.array(
        [channel_energy(fused.plane(k)) for k in range(fused.depth)]
    )
    order = _stable_sort(energies, descending=True)
    data = fused.tensor.data[:, :, order]
    tags = tuple(fused.tags[i] for i in order)
    perm = SortPermutation(tuple(order), tuple(energies[order]))
    sorted_t = DctTensor(Tensor3(data, [str(t) for t in tags]), Layout.FUSED63, tags)
    return sorted_t, perm


def sort_dlbp_by_dc_similarity(
    stack: DlbpStack, dc_luma: np.ndarray
) -> tuple[DlbpStack, SortPermutation]:
    """Reorder DLBP planes by descending similarity to the luma DC plane,
    i.e. ascending Euclidean distance (stable)."""
    ref = np.asarray(dc_luma, dtype=np.float64)
    if ref.shape != (stack.tensor.height, stack.tensor.width):
        raise DimError(
            f"DC plane shape {ref.shape} does not match stack "
            f"{(stack.tensor.height, stack.tensor.width)}"
        )
    diffs = stack.tensor.data - ref[:, :, None]
    distances = np.sqrt(np.sum(diffs * diffs, axis=(0, 1)))
    order = _stable_sort(distances, descending=False)
    data = stack.tensor.data[:, :, order]
    labels = None
    if stack.tensor.labels is not None:
        labels = [stack.tensor.labels[i] for i in order]
    perm = SortPermutation(tuple(order), tuple(distances[order]))
    return DlbpStack(Tensor3(data, labels)), perm


def hybrid_fuse(
    freq_sorted: DctTensor,
    color_sorted: DlbpStack | list[LbpCodeImage] | None,
    scheme: FusionScheme,
    alpha: float = 1.0,
) -> HybridTensor:
    """Combine energy-sorted fused-frequency planes with a color descriptor.

    DLBP schemes take the similarity-sorted 64-plane stack and drop its
    first (most DC-like) plane, leaving 63. The LBP descriptor is only
    valid with concatenation; it carries too much structure for blending.
    """
    if freq_sorted.layout != Layout.FUSED63:
        raise LayoutError("hybrid_fuse expects the energy-sorted Fused63 tensor")
    freq = freq_sorted.tensor.data
    freq_labels = [f"freq:{t}" for t in freq_sorted.tags]

    if scheme == FusionScheme.FREQ_ONLY:
        return HybridTensor(Tensor3(freq.copy(), freq_labels), scheme)

    if scheme == FusionScheme.CONCAT_LBP:
        if not isinstance(color_sorted, list) or len(color_sorted) != 3:
            raise DimError("concat-lbp requires exactly 3 LBP code images")
        planes = []
        labels = list(freq_labels)
        for code_img in color_sorted:
            if (code_img.height, code_img.width) != freq.shape[:2]:
                raise DimError("LBP code image dimensions do not match frequency planes")
            planes.append(code_img.codes.astype(np.float64))
            labels.append(f"lbp:{code_img.source_channel}")
        data = np.concatenate([freq] + [p[:, :, None] for p in planes], axis=2)
        return HybridTensor(Tensor3(data, labels), scheme)

    if not isinstance(color_sorted, DlbpStack):
        if scheme in (FusionScheme.ADD_DLBP, FusionScheme.MULT_DLBP) and isinstance(
            color_sorted, list
        ):
            raise SchemeError("LBP features are only used with concatenation")
        raise DimError("DLBP schemes require a sorted DlbpStack")
    if color_sorted.depth < 64:
        raise DimError("DLBP stack must still contain 64 planes (first not yet dropped)")
    if (color_sorted.tensor.height, color_sorted.tensor.width) != freq.shape[:2]:
        raise DimError("DLBP plane dimensions do not match frequency planes")
    dlbp = color_sorted.tensor.data[:, :, 1:64]
    dlbp_labels = (color_sorted.tensor.labels or [""] * 64)[1:64]

    if scheme == FusionScheme.ADD_DLBP:
        data = freq + alpha * dlbp
        labels = [f"{f}+{d}" for f, d in zip(freq_labels, dlbp_labels)]
    elif scheme == FusionScheme.MULT_DLBP:
        # 1 + x keeps the (mostly zero) DLBP entries from wiping coefficients
        data = freq * (1.0 + dlbp / 255.0)
        labels = [f"{f}*{d}" for f, d in zip(freq_labels, dlbp_labels)]
    elif scheme == FusionScheme.CONCAT_DLBP:
        data = np.concatenate([freq, dlbp], axis=2)
        labels = freq_labels + list(dlbp_labels)
    else:
        raise SchemeError(f"unsupported scheme {scheme}")
    return HybridTensor(Tensor3(data, labels), scheme)


def apply_dp_noise(t: HybridTensor, spec: NoiseSpec) -> HybridTensor:
    """Add elementwise noise per the NoiseSpec; the None mechanism is the identity."""
    if spec.mechanism == NoiseKind.NONE:
        return t
    rng = np.random.default_rng(spec.seed)
    shape = t.tensor.data.shape
    if spec.mechanism == NoiseKind.LAPLACE:
        noise = rng.laplace(0.0, spec.sensitivity / spec.epsilon, size=shape)
    else:
        noise = rng.normal(0.0, spec.sigma, size=shape)
    return HybridTensor(Tensor3(t.tensor.data + noise, t.tensor.labels), t.scheme)
