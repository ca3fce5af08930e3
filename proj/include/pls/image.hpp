#pragma once

// Image container and value-domain operations.

#include "pls/core.hpp"

#include <algorithm>
#include <limits>
#include <utility>

namespace pls {

// Planar image: 1 (gray) or 3 (RGB) channel planes of identical shape, plus
// the declared value range of the samples (what "black" and "white" mean).
// Loaded 8/16-bit images declare [0, 1]; float images declare their observed
// range. All samples are finite; declared_range.lo < declared_range.hi.
template <typename Scalar>
struct Image {
  std::vector<Plane<Scalar>> planes;
  Range<Scalar> declared_range{Scalar(0), Scalar(1)};

  Image() = default;
  Image(int width, int height, int channels, Scalar fill = Scalar(0)) {
    planes.assign(channels, Plane<Scalar>::Constant(height, width, fill));
  }

  int width() const { return planes.empty() ? 0 : int(planes.front().cols()); }
  int height() const { return planes.empty() ? 0 : int(planes.front().rows()); }
  int channels() const { return int(planes.size()); }
  long pixels() const { return long(width()) * long(height()); }

  bool same_shape(const Image& other) const {
    return width() == other.width() && height() == other.height() &&
           channels() == other.channels();
  }
};

template <typename Scalar>
void require_same_shape(const Image<Scalar>& a, const Image<Scalar>& b,
                        const char* what) {
  if (!a.same_shape(b)) throw DimensionMismatch(std::string(what) + ": shape mismatch");
}

// Width/height agreement only: joint filtering pairs a source with a guide
// whose channel count may differ.
template <typename Scalar>
void require_same_extent(const Image<Scalar>& a, const Image<Scalar>& b,
                         const char* what) {
  if (a.width() != b.width() || a.height() != b.height())
    throw DimensionMismatch(std::string(what) + ": width/height mismatch");
}

// Observed min/max over every channel.
template <typename Scalar>
Range<Scalar> observed_range(const Image<Scalar>& img) {
  Scalar lo = std::numeric_limits<Scalar>::max();
  Scalar hi = std::numeric_limits<Scalar>::lowest();
  for (const auto& p : img.planes) {
    lo = std::min(lo, p.minCoeff());
    hi = std::max(hi, p.maxCoeff());
  }
  return {lo, hi};
}

template <typename Scalar>
Scalar max_abs(const Image<Scalar>& img) {
  Scalar m = 0;
  for (const auto& p : img.planes) m = std::max(m, p.abs().maxCoeff());
  return m;
}

// Map declared_range affinely onto [0, 1]; returns the normalized image and
// the state needed to invert the map. Throws DegenerateRange when the
// declared span is below 1e-12.
template <typename Scalar>
std::pair<Image<Scalar>, NormState<Scalar>> normalize_unit(const Image<Scalar>& img) {
  const Scalar span = img.declared_range.span();
  if (!(span > Scalar(1e-12)))
    throw DegenerateRange("normalize_unit: declared range span below 1e-12");
  NormState<Scalar> st{span, img.declared_range.lo};
  Image<Scalar> out = img;
  for (auto& p : out.planes) p = (p - st.offset) / st.scale;
  out.declared_range = {Scalar(0), Scalar(1)};
  return {std::move(out), st};
}

template <typename Scalar>
Image<Scalar> denormalize(const Image<Scalar>& img, const NormState<Scalar>& st) {
  Image<Scalar> out = img;
  for (auto& p : out.planes) p = p * st.scale + st.offset;
  out.declared_range = {st.denormalize(Scalar(0)), st.denormalize(Scalar(1))};
  return out;
}

// Rec. 709 luma weights; single-channel images pass through.
template <typename Scalar>
Plane<Scalar> luminance(const Image<Scalar>& img) {
  if (img.channels() == 1) return img.planes[0];
  return Scalar(0.2126) * img.planes[0] + Scalar(0.7152) * img.planes[1] +
         Scalar(0.0722) * img.planes[2];
}

// Stack copies of img's rows until the image is `rows` tall (used to turn 1-D
// test signals into strips that 2-D filters can chew on).
template <typename Scalar>
Image<Scalar> replicate_rows(const Image<Scalar>& img, int rows) {
  Image<Scalar> out(img.width(), rows, img.channels());
  out.declared_range = img.declared_range;
  for (int c = 0; c < img.channels(); ++c)
    for (int y = 0; y < rows; ++y)
      out.planes[c].row(y) = img.planes[c].row(y % img.height());
  return out;
}

// Peak signal-to-noise ratio in dB for a given peak value; +inf when equal.
template <typename Scalar>
double psnr(const Image<Scalar>& a, const Image<Scalar>& b, double peak = 1.0) {
  require_same_shape(a, b, "psnr");
  double se = 0;
  for (int c = 0; c < a.channels(); ++c)
    se += double((a.planes[c] - b.planes[c]).square().sum());
  const double mse = se / (double(a.pixels()) * a.channels());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

}  // namespace pls
