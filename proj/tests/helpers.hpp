#pragma once

// Shared test utilities: deterministic random images and small brute-force
// reference implementations used as oracles.

#include "pls/gradient.hpp"
#include "pls/image.hpp"

#include <random>

namespace test {

using pls::GradientField;
using pls::Image;

// Deterministic uniform image in [lo, hi]. Values are generated as exact
// float32 numbers so float round trips stay bitwise.
inline Image<double> random_image(int w, int h, int c, unsigned seed, double lo = 0.0,
                                  double hi = 1.0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> dist{float(lo), float(hi)};
  Image<double> img(w, h, c);
  img.declared_range = {lo, hi};
  for (int ch = 0; ch < c; ++ch)
    for (int x = 0; x < w; ++x)
      for (int y = 0; y < h; ++y) img.planes[ch](y, x) = double(dist(rng));
  return img;
}

inline GradientField<double> random_gradient(int w, int h, int c, unsigned seed,
                                             double amp = 1.0) {
  GradientField<double> g{random_image(w, h, c, seed, -amp, amp),
                          random_image(w, h, c, seed + 1, -amp, amp)};
  // Keep the forward-difference structure: last column / row carry no data.
  for (int ch = 0; ch < c; ++ch) {
    g.gx.planes[ch].col(w - 1).setZero();
    g.gy.planes[ch].row(h - 1).setZero();
  }
  g.gx.declared_range = g.gy.declared_range = {-amp, amp};
  return g;
}

inline double max_abs_diff(const Image<double>& a, const Image<double>& b) {
  double m = 0;
  for (int c = 0; c < a.channels(); ++c)
    m = std::max(m, (a.planes[c] - b.planes[c]).abs().maxCoeff());
  return m;
}

}  // namespace test
