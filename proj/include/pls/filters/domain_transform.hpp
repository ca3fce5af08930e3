#pragma once
// Domain transform, normalized-convolution variant: 1-D box averages taken in
// a warped coordinate where distance accumulates 1 + (sigma_s/sigma_r) times
// the guide's absolute differences, so averaging never crosses strong edges.
// Each iteration runs one horizontal and one vertical pass with a per-
// iteration sigma that halves every round.

#include <cmath>
#include <vector>

#include "pls/image.hpp"

namespace pls {
namespace detail {

// One 1-D normalized-convolution pass over a line: values[i] becomes the mean
// of all samples whose transformed coordinate lies within `radius` of its
// own. `ct` is strictly increasing, so both window ends advance monotonically
// (two-pointer sweep, O(n) per line).
inline void dt_box_line(const std::vector<double>& ct, double radius, int n,
                        std::vector<double*>& chans, std::vector<double>& prefix,
                        int nch) {
  // prefix holds per-channel running sums laid out channel-major.
  prefix.resize(std::size_t(nch) * (n + 1));
  for (int c = 0; c < nch; ++c) {
    double* ps = prefix.data() + std::size_t(c) * (n + 1);
    ps[0] = 0.0;
    for (int i = 0; i < n; ++i) ps[i + 1] = ps[i] + chans[c][i];
  }
  int lo = 0, hi = 0;
  for (int i = 0; i < n; ++i) {
    while (ct[lo] < ct[i] - radius) ++lo;
    if (hi < i) hi = i;
    while (hi + 1 < n && ct[hi + 1] <= ct[i] + radius) ++hi;
    const double inv = 1.0 / (hi - lo + 1);
    for (int c = 0; c < nch; ++c) {
      const double* ps = prefix.data() + std::size_t(c) * (n + 1);
      chans[c][i] = (ps[hi + 1] - ps[lo]) * inv;
    }
  }
}

}  // namespace detail

template <typename Scalar>
Image<Scalar> domain_transform_nc(const Image<Scalar>& src, const Image<Scalar>& guide,
                                  double sigma_s, double sigma_r, int iterations = 3) {
  require_same_extent(src, guide, "domain_transform_nc");
  const int w = src.width(), h = src.height(), cs = src.channels();
  const int cg = guide.channels();
  const double ratio = sigma_s / sigma_r;

  // Transformed coordinates, accumulated once from the guide: one row-wise
  // table and one column-wise table.
  std::vector<std::vector<double>> ct_h(h, std::vector<double>(w));
  for (int y = 0; y < h; ++y) {
    ct_h[y][0] = 0.0;
    for (int x = 1; x < w; ++x) {
      double d = 0.0;
      for (int c = 0; c < cg; ++c)
        d += std::abs(double(guide.planes[c](y, x)) - double(guide.planes[c](y, x - 1)));
      ct_h[y][x] = ct_h[y][x - 1] + 1.0 + ratio * d;
    }
  }
  std::vector<std::vector<double>> ct_v(w, std::vector<double>(h));
  for (int x = 0; x < w; ++x) {
    ct_v[x][0] = 0.0;
    for (int y = 1; y < h; ++y) {
      double d = 0.0;
      for (int c = 0; c < cg; ++c)
        d += std::abs(double(guide.planes[c](y, x)) - double(guide.planes[c](y - 1, x)));
      ct_v[x][y] = ct_v[x][y - 1] + 1.0 + ratio * d;
    }
  }

  // Work in doubles; cast back at the end.
  std::vector<Plane<double>> work(cs);
  for (int c = 0; c < cs; ++c) work[c] = src.planes[c].template cast<double>();

  const int n_it = iterations;
  std::vector<double*> chans(cs);
  std::vector<double> line_buf(std::size_t(cs) * std::max(w, h));
  std::vector<double> prefix;
  for (int i = 1; i <= n_it; ++i) {
    const double sigma_h = sigma_s * std::sqrt(3.0) * std::pow(2.0, n_it - i) /
                           std::sqrt(std::pow(4.0, n_it) - 1.0);
    const double radius = sigma_h * std::sqrt(3.0);

    for (int y = 0; y < h; ++y) {  // horizontal: copy the row out (strided)
      for (int c = 0; c < cs; ++c) {
        double* row = line_buf.data() + std::size_t(c) * w;
        for (int x = 0; x < w; ++x) row[x] = work[c](y, x);
        chans[c] = row;
      }
      detail::dt_box_line(ct_h[y], radius, w, chans, prefix, cs);
      for (int c = 0; c < cs; ++c)
        for (int x = 0; x < w; ++x) work[c](y, x) = chans[c][x];
    }
    for (int x = 0; x < w; ++x) {  // vertical: columns are contiguous
      for (int c = 0; c < cs; ++c) chans[c] = work[c].col(x).data();
      detail::dt_box_line(ct_v[x], radius, h, chans, prefix, cs);
    }
  }

  Image<Scalar> out(w, h, cs);
  out.declared_range = src.declared_range;
  for (int c = 0; c < cs; ++c) out.planes[c] = work[c].template cast<Scalar>();
  return out;
}

}  // namespace pls
