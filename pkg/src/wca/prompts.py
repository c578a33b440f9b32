"""Localized visual prompting: seeded square crops and alternative styles.

The crop sampler draws a scale gamma uniformly from [alpha, beta] per crop,
converts it to a pixel size against the short image side (round half up,
clamped to the valid range), and places the crop uniformly over all valid
offsets. All draws come from the portable per-image stream in
:mod:`wca.rng`, three draws per crop in the order gamma, left, top, so spec
sequences reproduce bit-for-bit anywhere.

Alternative prompt styles keep the full image size and mark a region
instead: a red circle outline, blur outside the region, or greyscale
outside the region. Their parameters (stroke width, blur sigma, the
outside-the-region convention) are fixed defaults of this engine, not
reconstructions of any reference values, and exist for comparison runs
only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BoundsError, ConfigError, DomainError
from .rng import SplitMix64, stream_for_image

STYLES = ("crop", "red-circle", "blur", "greyscale")

DEFAULT_ALPHA = 0.5
DEFAULT_BETA = 0.9
DEFAULT_CROPS = 60


@dataclass(frozen=True)
class ImageBuffer:
    """H x W x 3 uint8 RGB image."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.uint8)
        if px.ndim != 3 or px.shape[2] != 3 or px.shape[0] < 1 or px.shape[1] < 1:
            raise DomainError(f"image must be H x W x 3 with positive dims, got {px.shape}")
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class CropSpec:
    """One sampled square crop: scale, pixel size, and top-left offset."""

    gamma: float
    size: int
    left: int
    top: int

    def validate(self, width: int, height: int) -> None:
        if self.size < 1:
            raise BoundsError(f"crop size {self.size} must be >= 1")
        if self.left < 0 or self.top < 0:
            raise BoundsError(f"crop offset ({self.left}, {self.top}) must be non-negative")
        if self.left + self.size > width or self.top + self.size > height:
            raise BoundsError(
                f"crop {self.size}px at ({self.left}, {self.top}) exceeds {width}x{height} image"
            )


@dataclass(frozen=True)
class PromptConfig:
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    num_crops: int = DEFAULT_CROPS
    seed: int = 0
    style: str = "crop"

    def __post_init__(self):
        if not (0.0 < self.alpha <= self.beta <= 1.0):
            raise ConfigError(
                f"need 0 < alpha <= beta <= 1, got alpha={self.alpha}, beta={self.beta}"
            )
        if self.num_crops < 1:
            raise ConfigError(f"num_crops must be >= 1, got {self.num_crops}")
        if self.style not in STYLES:
            raise ConfigError(f"unknown prompt style {self.style!r}, expected one of {STYLES}")


def crop_size(gamma: float, short_side: int) -> int:
    """Pixel size for a scale: round half up, clamped to [1, short_side]."""
    n = math.floor(gamma * short_side + 0.5)
    return max(1, min(short_side, n))


def sample_crop_specs(
    cfg: PromptConfig, width: int, height: int, stream: SplitMix64
) -> list[CropSpec]:
    """Draw ``cfg.num_crops`` crop specs from an explicit stream."""
    if width < 1 or height < 1:
        raise DomainError(f"image dims must be positive, got {width}x{height}")
    short = min(width, height)
    specs = []
    for _ in range(cfg.num_crops):
        gamma = stream.uniform(cfg.alpha, cfg.beta)
        n = crop_size(gamma, short)
        left = stream.below(width - n + 1)
        top = stream.below(height - n + 1)
        specs.append(CropSpec(gamma=gamma, size=n, left=left, top=top))
    return specs


def crop_specs_for_image(
    cfg: PromptConfig, width: int, height: int, image_id: str
) -> list[CropSpec]:
    """Crop specs from the per-image stream derived from (cfg.seed, image_id)."""
    return sample_crop_specs(cfg, width, height, stream_for_image(cfg.seed, image_id))


def apply_crop(img: ImageBuffer, spec: CropSpec) -> ImageBuffer:
    """Extract the spec's n x n window; pure indexing, no resampling."""
    spec.validate(img.width, img.height)
    window = img.pixels[spec.top : spec.top + spec.size, spec.left : spec.left + spec.size]
    return ImageBuffer(window.copy())


def apply_alt_prompt(img: ImageBuffer, style: str, region: CropSpec) -> ImageBuffer:
    """Mark a region in place of cropping; output keeps the input dimensions."""
    region.validate(img.width, img.height)
    if style == "red-circle":
        return _red_circle(img, region)
    if style == "blur":
        return _blur_outside(img, region)
    if style == "greyscale":
        return _greyscale_outside(img, region)
    if style == "crop":
        raise ConfigError("style 'crop' is handled by apply_crop, not apply_alt_prompt")
    raise ConfigError(f"unknown prompt style {style!r}")


def prompt_image(img: ImageBuffer, cfg: PromptConfig, spec: CropSpec) -> ImageBuffer:
    """Apply the configured style for one sampled region."""
    if cfg.style == "crop":
        return apply_crop(img, spec)
    return apply_alt_prompt(img, cfg.style, spec)


def _region_mask(img: ImageBuffer, region: CropSpec) -> np.ndarray:
    mask = np.zeros((img.height, img.width), dtype=bool)
    mask[region.top : region.top + region.size, region.left : region.left + region.size] = True
    return mask


def _red_circle(img: ImageBuffer, region: CropSpec) -> ImageBuffer:
    short = min(img.width, img.height)
    stroke = max(2, math.floor(0.01 * short + 0.5))
    cx = region.left + region.size / 2.0
    cy = region.top + region.size / 2.0
    radius = region.size / 2.0
    yy, xx = np.mgrid[0 : img.height, 0 : img.width]
    dist = np.hypot(xx + 0.0 - cx, yy + 0.0 - cy)
    ring = np.abs(dist - radius) <= stroke / 2.0
    out = img.pixels.copy()
    out[ring] = (255, 0, 0)
    return ImageBuffer(out)


def _blur_outside(img: ImageBuffer, region: CropSpec) -> ImageBuffer:
    from scipy.ndimage import gaussian_filter

    sigma = 0.05 * min(img.width, img.height)
    blurred = gaussian_filter(img.pixels.astype(np.float64), sigma=(sigma, sigma, 0))
    out = np.clip(np.rint(blurred), 0, 255).astype(np.uint8)
    mask = _region_mask(img, region)
    out[mask] = img.pixels[mask]
    return ImageBuffer(out)


def _greyscale_outside(img: ImageBuffer, region: CropSpec) -> ImageBuffer:
    px = img.pixels.astype(np.float64)
    luma = 0.299 * px[:, :, 0] + 0.587 * px[:, :, 1] + 0.114 * px[:, :, 2]
    grey = np.clip(np.rint(luma), 0, 255).astype(np.uint8)
    out = np.repeat(grey[:, :, None], 3, axis=2)
    mask = _region_mask(img, region)
    out[mask] = img.pixels[mask]
    return ImageBuffer(out)


def load_image(path) -> ImageBuffer:
    """Decode a PNG or JPEG into RGB; alpha channels composite over white."""
    from PIL import Image

    with Image.open(path) as im:
        if im.mode in ("RGBA", "LA", "PA") or (im.mode == "P" and "transparency" in im.info):
            rgba = im.convert("RGBA")
            base = Image.new("RGBA", rgba.size, (255, 255, 255, 255))
            im = Image.alpha_composite(base, rgba).convert("RGB")
        else:
            im = im.convert("RGB")
        return ImageBuffer(np.asarray(im, dtype=np.uint8))
