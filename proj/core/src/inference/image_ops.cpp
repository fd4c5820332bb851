#include "geoquery/inference/image_ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace geoquery::inference {

using numerics::Scalar;
using numerics::ShapeError;

namespace {

void require_image(const Tensor& image, const char* op) {
  if (image.rank() != 3 || image.numel() == 0) {
    throw ShapeError(std::string(op) + " expects a [C×H×W] image, got " +
                     numerics::to_string(image.shape()));
  }
}

struct Tap {
  std::size_t i0;
  std::size_t i1;
  double w;
};

std::vector<Tap> taps(std::size_t in, std::size_t out) {
  std::vector<Tap> t(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  for (std::size_t d = 0; d < out; ++d) {
    const double src = std::max(0.0, (static_cast<double>(d) + 0.5) * scale - 0.5);
    auto i0 = std::min(static_cast<std::size_t>(src), in - 1);
    t[d] = {i0, std::min(i0 + 1, in - 1), src - static_cast<double>(i0)};
  }
  return t;
}

}  // namespace

Tensor resize_bilinear(const Tensor& image, std::size_t out_h, std::size_t out_w) {
  require_image(image, "resize");
  if (out_h == 0 || out_w == 0) throw ShapeError("resize target must be non-empty");
  const auto c = image.dim(0), h = image.dim(1), w = image.dim(2);
  if (h == out_h && w == out_w) return image.detach();
  const auto ty = taps(h, out_h);
  const auto tx = taps(w, out_w);
  const auto src = image.data();
  // Rows first into [C×out_h×W], then columns.
  std::vector<double> mid(c * out_h * w);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < out_h; ++y) {
      const auto* r0 = src.data() + (ch * h + ty[y].i0) * w;
      const auto* r1 = src.data() + (ch * h + ty[y].i1) * w;
      auto* dst = mid.data() + (ch * out_h + y) * w;
      for (std::size_t x = 0; x < w; ++x) dst[x] = (1.0 - ty[y].w) * r0[x] + ty[y].w * r1[x];
    }
  }
  std::vector<Scalar> out(c * out_h * out_w);
  for (std::size_t row = 0; row < c * out_h; ++row) {
    const auto* s = mid.data() + row * w;
    auto* dst = out.data() + row * out_w;
    for (std::size_t x = 0; x < out_w; ++x) {
      dst[x] = static_cast<Scalar>((1.0 - tx[x].w) * s[tx[x].i0] + tx[x].w * s[tx[x].i1]);
    }
  }
  return Tensor::from({c, out_h, out_w}, std::move(out));
}

Tensor resize_shorter_side(const Tensor& image, std::size_t size) {
  require_image(image, "resize");
  const auto h = image.dim(1), w = image.dim(2);
  if (h <= w) return resize_bilinear(image, size, size * w / h);
  return resize_bilinear(image, size * h / w, size);
}

Tensor crop(const Tensor& image, std::size_t top, std::size_t left, std::size_t h, std::size_t w) {
  require_image(image, "crop");
  const auto c = image.dim(0), ih = image.dim(1), iw = image.dim(2);
  if (top + h > ih || left + w > iw) {
    throw ShapeError("crop " + std::to_string(h) + "x" + std::to_string(w) + " at (" +
                     std::to_string(top) + "," + std::to_string(left) + ") exceeds image " +
                     numerics::to_string(image.shape()));
  }
  std::vector<Scalar> out(c * h * w);
  const auto src = image.data();
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < h; ++y) {
      const auto* row = src.data() + (ch * ih + top + y) * iw + left;
      std::copy(row, row + w, out.data() + (ch * h + y) * w);
    }
  }
  return Tensor::from({c, h, w}, std::move(out));
}

Tensor flip_horizontal(const Tensor& image) {
  require_image(image, "flip");
  std::vector<Scalar> out(image.data().begin(), image.data().end());
  const auto w = image.dim(2);
  for (std::size_t row = 0; row < image.dim(0) * image.dim(1); ++row) {
    std::reverse(out.begin() + static_cast<std::ptrdiff_t>(row * w),
                 out.begin() + static_cast<std::ptrdiff_t>((row + 1) * w));
  }
  return Tensor::from(image.shape(), std::move(out));
}

Tensor center_crop(const Tensor& image, std::size_t size) {
  require_image(image, "center crop");
  const auto h = image.dim(1), w = image.dim(2);
  if (h < size || w < size) {
    throw ShapeError("image " + numerics::to_string(image.shape()) + " is smaller than crop " +
                     std::to_string(size));
  }
  const auto top = static_cast<std::size_t>(std::nearbyint(static_cast<double>(h - size) / 2.0));
  const auto left = static_cast<std::size_t>(std::nearbyint(static_cast<double>(w - size) / 2.0));
  return crop(image, top, left, size, size);
}

std::vector<Tensor> ten_crop(const Tensor& image, std::size_t size) {
  require_image(image, "ten crop");
  const auto h = image.dim(1), w = image.dim(2);
  if (size == 0 || h < size || w < size) {
    throw ShapeError("image " + numerics::to_string(image.shape()) +
                     " is too small for ten crops of " + std::to_string(size));
  }
  std::vector<Tensor> out;
  out.reserve(10);
  out.push_back(crop(image, 0, 0, size, size));
  out.push_back(crop(image, 0, w - size, size, size));
  out.push_back(crop(image, h - size, 0, size, size));
  out.push_back(crop(image, h - size, w - size, size, size));
  out.push_back(center_crop(image, size));
  for (std::size_t k = 0; k < 5; ++k) out.push_back(flip_horizontal(out[k]));
  return out;
}

std::size_t resize_target(std::size_t crop_size) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(crop_size) * 256.0 / 224.0));
}

}  // namespace geoquery::inference
