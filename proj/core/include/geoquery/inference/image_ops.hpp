#pragma once

#include <cstddef>
#include <vector>

#include "geoquery/numerics/tensor.hpp"

namespace geoquery::inference {

using numerics::Tensor;

/**
 * Bilinear resize of a [C×H×W] image with half-pixel centres
 * (align_corners = false):
 *
 *     src = (dst + 0.5) · in / out − 0.5, clamped below at 0
 *     i0 = floor(src), i1 = min(i0 + 1, in − 1), w = src − i0
 *
 * applied separably, rows first then columns. Equal sizes return an exact copy.
 */
Tensor resize_bilinear(const Tensor& image, std::size_t out_h, std::size_t out_w);

/// Resizes so the shorter side becomes `size`, keeping the aspect ratio
/// (longer side = floor(size · long / short)).
Tensor resize_shorter_side(const Tensor& image, std::size_t size);

/// [C×H×W] window with top-left corner (top, left).
Tensor crop(const Tensor& image, std::size_t top, std::size_t left, std::size_t h, std::size_t w);

/// Reverses the width axis.
Tensor flip_horizontal(const Tensor& image);

/// Centre window; the offset is round((H − size) / 2), halves rounding to even.
Tensor center_crop(const Tensor& image, std::size_t size);

/**
 * Ten square crops in a fixed order: 0 top-left, 1 top-right, 2 bottom-left,
 * 3 bottom-right, 4 centre, then 5..9 the horizontal flips of 0..4.
 * Throws numerics::ShapeError when the image is smaller than `size`.
 */
std::vector<Tensor> ten_crop(const Tensor& image, std::size_t size);

/// Resize target used before cropping: round(size · 256 / 224).
std::size_t resize_target(std::size_t crop_size);

}  // namespace geoquery::inference
