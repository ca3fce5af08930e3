#pragma once
// Filter selection: a tagged union of the edge-preserving smoothers plus a
// uniform apply/validate interface. Parameter defaults follow the standard
// intensity-domain settings; gradient-domain callers override sigma_r (and
// lambda) downward since gradients live on a compressed scale.

#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>

#include "pls/filters/bilateral.hpp"
#include "pls/filters/domain_transform.hpp"
#include "pls/filters/guided.hpp"
#include "pls/filters/l0.hpp"
#include "pls/filters/weighted_median.hpp"

namespace pls {

struct Bilateral {
  double sigma_s = 16.0;
  double sigma_r = 0.1;
  bool fast = false;  // grid approximation; engaged only for 1-channel guides
};

struct DomainTransformNC {
  double sigma_s = 16.0;
  double sigma_r = 0.1;
  int iterations = 3;
};

struct WeightedMedian {
  int radius = 16;
  double sigma_r = 0.1;
  int bins = 4096;
};

struct L0 {
  double lambda = 0.007;
  double kappa = 2.0;
  double beta_max = 1e5;
};

struct Guided {
  int radius = 16;
  double epsilon = 0.01;
};

using FilterSpec = std::variant<Bilateral, DomainTransformNC, WeightedMedian, L0, Guided>;

inline const char* filter_name(const FilterSpec& spec) {
  return std::visit(
      [](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Bilateral>) return "bilateral";
        if constexpr (std::is_same_v<T, DomainTransformNC>) return "dt";
        if constexpr (std::is_same_v<T, WeightedMedian>) return "wmf";
        if constexpr (std::is_same_v<T, L0>) return "l0";
        if constexpr (std::is_same_v<T, Guided>) return "guided";
      },
      spec);
}

// Rejects out-of-domain parameters with a message naming the offending field.
inline void validate(const FilterSpec& spec) {
  const auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Bilateral>) {
          if (!(f.sigma_s > 0)) fail("bilateral: sigma-s must be > 0");
          if (!(f.sigma_r > 0)) fail("bilateral: sigma-r must be > 0");
        } else if constexpr (std::is_same_v<T, DomainTransformNC>) {
          if (!(f.sigma_s > 0)) fail("dt: sigma-s must be > 0");
          if (!(f.sigma_r > 0)) fail("dt: sigma-r must be > 0");
          if (f.iterations < 1) fail("dt: iterations must be >= 1");
        } else if constexpr (std::is_same_v<T, WeightedMedian>) {
          if (f.radius < 1) fail("wmf: radius must be >= 1");
          if (!(f.sigma_r > 0)) fail("wmf: sigma-r must be > 0");
          if (f.bins < 2) fail("wmf: bins must be >= 2");
        } else if constexpr (std::is_same_v<T, L0>) {
          if (!(f.lambda >= 0)) fail("l0: lambda must be >= 0");
          if (!(f.kappa > 1)) fail("l0: kappa must be > 1");
          if (!(f.beta_max > 0)) fail("l0: beta-max must be > 0");
        } else if constexpr (std::is_same_v<T, Guided>) {
          if (f.radius < 1) fail("guided: radius must be >= 1");
          if (!(f.epsilon >= 0)) fail("guided: epsilon must be >= 0");
        }
      },
      spec);
}

// Uniform application with a guide image (pass src itself for self-guided
// smoothing; L0 has no guide notion and ignores it).
template <typename Scalar>
Image<Scalar> apply_filter(const Image<Scalar>& src, const Image<Scalar>& guide,
                           const FilterSpec& spec) {
  return std::visit(
      [&](const auto& f) -> Image<Scalar> {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Bilateral>) {
          if (f.fast && guide.channels() == 1)
            return bilateral_grid(src, guide, f.sigma_s, f.sigma_r);
          return bilateral(src, guide, f.sigma_s, f.sigma_r);
        } else if constexpr (std::is_same_v<T, DomainTransformNC>) {
          return domain_transform_nc(src, guide, f.sigma_s, f.sigma_r, f.iterations);
        } else if constexpr (std::is_same_v<T, WeightedMedian>) {
          return weighted_median(src, guide, f.radius, f.sigma_r, f.bins);
        } else if constexpr (std::is_same_v<T, L0>) {
          return l0_smooth(src, f.lambda, f.kappa, f.beta_max);
        } else {
          return guided_filter(src, guide, f.radius, f.epsilon);
        }
      },
      spec);
}

}  // namespace pls
