#pragma once

// Core dense types and small shared utilities.
//
// Images are stored as planar stacks of Eigen arrays (one H x W plane per
// channel, row index = y, column index = x). Everything is templated on the
// scalar type; free functions operate on these types in Eigen style.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pls {

template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// ---------------------------------------------------------------------------
// Errors

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateRange : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CgDidNotConverge : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonPositiveLuminance : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Value ranges and affine normalization

// Closed value range [lo, hi] with lo < hi.
template <typename Scalar>
struct Range {
  Scalar lo{0};
  Scalar hi{1};

  Scalar span() const { return hi - lo; }
  bool valid() const { return std::isfinite(double(lo)) && std::isfinite(double(hi)) && lo < hi; }
};

// Invertible affine map between an original domain and [0, 1]:
//   normalize(x)  = (x - offset) / scale
//   denormalize(y) = y * scale + offset
template <typename Scalar>
struct NormState {
  Scalar scale{1};
  Scalar offset{0};

  Scalar normalize(Scalar x) const { return (x - offset) / scale; }
  Scalar denormalize(Scalar y) const { return y * scale + offset; }
};

// Fixed map for gradient values: [-1, 1] -> [0, 1], g -> (g + 1) / 2.
// Gradients of unit-range images always live in [-1, 1], so one fixed map
// serves every image; range parameters stay comparable across inputs.
template <typename Scalar>
constexpr NormState<Scalar> gradient_norm_state() {
  return NormState<Scalar>{Scalar(2), Scalar(-1)};
}

// ---------------------------------------------------------------------------
// Misc

template <typename Scalar>
Scalar clamp01(Scalar v) {
  return v < Scalar(0) ? Scalar(0) : (v > Scalar(1) ? Scalar(1) : v);
}

inline int ceil_int(double v) { return static_cast<int>(std::ceil(v)); }

}  // namespace pls
