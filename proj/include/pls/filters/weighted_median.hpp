#pragma once
// Weighted median filter over quantized intensity levels. Source and guide
// are both quantized to `bins` uniform levels k/(bins-1); the weight between
// two pixels is a Gaussian on the guide's level distance (product over guide
// channels), realized as a lookup table so histogram counts can be weighted
// at query time. Output is the smallest level whose cumulative weight reaches
// half the total (deterministic tie rule). Self-guided single-channel inputs
// take an O(bins)-per-pixel sliding-histogram path; everything else takes a
// per-pixel window walk with the identical semantics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "pls/image.hpp"

namespace pls {
namespace detail {

template <typename Scalar>
std::vector<Eigen::ArrayXXi> quantize_levels(const Image<Scalar>& img, int bins) {
  std::vector<Eigen::ArrayXXi> q(img.channels());
  for (int c = 0; c < img.channels(); ++c)
    q[c] = img.planes[c].unaryExpr([bins](Scalar v) {
      const long k = std::lround(double(v) * (bins - 1));
      return int(std::clamp(k, 0L, long(bins - 1)));
    });
  return q;
}

inline std::vector<double> wmf_weight_table(int bins, double sigma_r) {
  std::vector<double> wtab(bins);
  const double step = 1.0 / (bins - 1);
  for (int d = 0; d < bins; ++d) {
    const double z = (d * step) * (d * step) / (2.0 * sigma_r * sigma_r);
    // Snap numerically flat kernels to exactly 1 so the degenerate plain-
    // median limit runs in exact integer arithmetic instead of having
    // near-ties decided by last-ulp rounding. Real kernels are unaffected
    // (any weight this close to 1 is flat to begin with).
    wtab[d] = z < 1e-12 ? 1.0 : std::exp(-z);
  }
  return wtab;
}

// Smallest level whose cumulative weighted count reaches half the total.
inline int wmf_median_from_histogram(const std::vector<std::int32_t>& hist,
                                     const std::vector<double>& wtab, int center,
                                     int bins) {
  double total = 0.0;
  for (int k = 0; k < bins; ++k)
    if (hist[k]) total += wtab[std::abs(k - center)] * hist[k];
  const double half = 0.5 * total;
  double cum = 0.0;
  for (int k = 0; k < bins; ++k) {
    if (!hist[k]) continue;
    cum += wtab[std::abs(k - center)] * hist[k];
    if (cum >= half) return k;
  }
  return bins - 1;  // unreachable: cum == total >= half at the last bin
}

}  // namespace detail

template <typename Scalar>
Image<Scalar> weighted_median(const Image<Scalar>& src, const Image<Scalar>& guide,
                              int radius, double sigma_r, int bins) {
  require_same_extent(src, guide, "weighted_median");
  const int w = src.width(), h = src.height(), cs = src.channels();
  const int cg = guide.channels();
  const auto qsrc = detail::quantize_levels(src, bins);
  const auto qguide = detail::quantize_levels(guide, bins);
  const auto wtab = detail::wmf_weight_table(bins, sigma_r);
  const double step = 1.0 / (bins - 1);

  Image<Scalar> out(w, h, cs);
  out.declared_range = src.declared_range;

  const bool self_guided =
      cs == 1 && cg == 1 && (qsrc[0] == qguide[0]).all();

  if (self_guided) {
    // Column histograms over the current row band plus a sliding window
    // histogram: O(1) column updates per row step, O(bins) window updates per
    // pixel step, O(bins) median query.
    const auto& q = qsrc[0];
    std::vector<std::vector<std::int32_t>> colh(w, std::vector<std::int32_t>(bins, 0));
    std::vector<std::int32_t> win(bins);
    for (int x = 0; x < w; ++x)
      for (int y = 0; y <= std::min(h - 1, radius); ++y) ++colh[x][q(y, x)];

    for (int y = 0; y < h; ++y) {
      if (y > 0) {
        const int add = y + radius, del = y - radius - 1;
        for (int x = 0; x < w; ++x) {
          if (add < h) ++colh[x][q(add, x)];
          if (del >= 0) --colh[x][q(del, x)];
        }
      }
      std::fill(win.begin(), win.end(), 0);
      for (int x = 0; x <= std::min(w - 1, radius); ++x)
        for (int k = 0; k < bins; ++k) win[k] += colh[x][k];
      for (int x = 0; x < w; ++x) {
        if (x > 0) {
          const int add = x + radius, del = x - radius - 1;
          if (add < w)
            for (int k = 0; k < bins; ++k) win[k] += colh[add][k];
          if (del >= 0)
            for (int k = 0; k < bins; ++k) win[k] -= colh[del][k];
        }
        const int m = detail::wmf_median_from_histogram(win, wtab, q(y, x), bins);
        out.planes[0](y, x) = Scalar(m * step);
      }
    }
    return out;
  }

  // Joint path: per-pixel window walk. The weighted histogram is accumulated
  // over the window, queried, then cleared by re-walking the window (touched
  // bins only), keeping each pixel O(window + occupied bins).
  std::vector<double> whist(bins, 0.0);
  for (int c = 0; c < cs; ++c) {
    const auto& q = qsrc[c];
    for (int y = 0; y < h; ++y) {
      const int y0 = std::max(0, y - radius), y1 = std::min(h - 1, y + radius);
      for (int x = 0; x < w; ++x) {
        const int x0 = std::max(0, x - radius), x1 = std::min(w - 1, x + radius);
        double total = 0.0;
        int kmin = bins, kmax = -1;
        for (int qy = y0; qy <= y1; ++qy)
          for (int qx = x0; qx <= x1; ++qx) {
            double wq = 1.0;
            for (int gc = 0; gc < cg; ++gc)
              wq *= wtab[std::abs(qguide[gc](qy, qx) - qguide[gc](y, x))];
            const int k = q(qy, qx);
            whist[k] += wq;
            total += wq;
            kmin = std::min(kmin, k);
            kmax = std::max(kmax, k);
          }
        const double half = 0.5 * total;
        double cum = 0.0;
        int m = kmax;
        for (int k = kmin; k <= kmax; ++k) {
          cum += whist[k];
          if (cum >= half) {
            m = k;
            break;
          }
        }
        out.planes[c](y, x) = Scalar(m * step);
        for (int qy = y0; qy <= y1; ++qy)
          for (int qx = x0; qx <= x1; ++qx) whist[q(qy, qx)] = 0.0;
      }
    }
  }
  return out;
}

}  // namespace pls
