#pragma once
// Guided filter, gray-guidance variant: per window a linear model
// q = a * guide + b fit by ridge regression (a = cov/(var + eps)), with the
// final output averaging the models of every window covering a pixel. Box
// means use summed-area tables with per-pixel window counts, so borders are
// true truncated-window averages.

#include <cmath>

#include "pls/image.hpp"

namespace pls {
namespace detail {

// Truncated-window box mean of radius r via a summed-area table.
inline Plane<double> box_mean(const Plane<double>& p, int r) {
  const int h = int(p.rows()), w = int(p.cols());
  Eigen::ArrayXXd sat = Eigen::ArrayXXd::Zero(h + 1, w + 1);
  for (int x = 0; x < w; ++x)
    for (int y = 0; y < h; ++y)
      sat(y + 1, x + 1) = p(y, x) + sat(y, x + 1) + sat(y + 1, x) - sat(y, x);
  Plane<double> out(h, w);
  for (int x = 0; x < w; ++x) {
    const int x0 = std::max(0, x - r), x1 = std::min(w - 1, x + r);
    for (int y = 0; y < h; ++y) {
      const int y0 = std::max(0, y - r), y1 = std::min(h - 1, y + r);
      const double s = sat(y1 + 1, x1 + 1) - sat(y0, x1 + 1) - sat(y1 + 1, x0) + sat(y0, x0);
      out(y, x) = s / double((x1 - x0 + 1) * (y1 - y0 + 1));
    }
  }
  return out;
}

}  // namespace detail

template <typename Scalar>
Image<Scalar> guided_filter(const Image<Scalar>& src, const Image<Scalar>& guide,
                            int radius, double epsilon) {
  require_same_extent(src, guide, "guided_filter");
  if (guide.channels() != 1)
    throw DimensionMismatch("guided_filter: guide must be single-channel");

  const Plane<double> g = guide.planes[0].template cast<double>();
  const Plane<double> mean_g = detail::box_mean(g, radius);
  const Plane<double> var_g = detail::box_mean(g.square(), radius) - mean_g.square();

  Image<Scalar> out(src.width(), src.height(), src.channels());
  out.declared_range = src.declared_range;
  for (int c = 0; c < src.channels(); ++c) {
    const Plane<double> p = src.planes[c].template cast<double>();
    const Plane<double> mean_p = detail::box_mean(p, radius);
    const Plane<double> cov = detail::box_mean(g * p, radius) - mean_g * mean_p;
    const Plane<double> denom = var_g + epsilon;
    // Variance can round to a signed epsilon on constant windows; treat
    // near-zero denominators as the a=0 (pure box mean) branch.
    const Plane<double> a =
        (denom > 1e-12).select(cov / denom, Plane<double>::Zero(denom.rows(), denom.cols()));
    const Plane<double> b = mean_p - a * mean_g;
    out.planes[c] =
        (detail::box_mean(a, radius) * g + detail::box_mean(b, radius)).template cast<Scalar>();
  }
  return out;
}

}  // namespace pls
