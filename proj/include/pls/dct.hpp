#pragma once

// 2-D type-II / type-III discrete cosine transforms backed by FFTW, with a
// per-size plan cache. Used by the spectral screened-gradient solver.
//
// FFTW's REDFT10 (DCT-II) followed by REDFT01 (DCT-III) multiplies a signal
// by 2n per transformed dimension, so a forward+inverse round trip over an
// H x W plane needs a final division by 4*W*H.

#include "pls/core.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <tuple>

namespace pls {
namespace detail {

class DctPlans {
 public:
  static DctPlans& instance() {
    static DctPlans p;
    return p;
  }

  // Executes a 2-D r2r transform of `a` in place through a cached plan.
  void execute(Eigen::ArrayXXd& a, fftw_r2r_kind kind) {
    std::lock_guard<std::mutex> lock(mutex_);
    const Key key{int(a.rows()), int(a.cols()), kind};
    Entry& e = entries_[key];
    const size_t n = size_t(a.size());
    if (!e.plan) {
      e.buffer = fftw_alloc_real(n);
      // Eigen arrays are column-major: memory order is (col, row), so the
      // "row" dimension FFTW sees first is the image width.
      e.plan = fftw_plan_r2r_2d(int(a.cols()), int(a.rows()), e.buffer, e.buffer,
                                kind, kind, FFTW_ESTIMATE);
      if (!e.plan) throw std::runtime_error("dct: fftw plan creation failed");
    }
    std::memcpy(e.buffer, a.data(), n * sizeof(double));
    fftw_execute(e.plan);
    std::memcpy(a.data(), e.buffer, n * sizeof(double));
  }

 private:
  struct Key {
    int rows, cols;
    fftw_r2r_kind kind;
    bool operator<(const Key& o) const {
      return std::tie(rows, cols, kind) < std::tie(o.rows, o.cols, o.kind);
    }
  };
  struct Entry {
    fftw_plan plan = nullptr;
    double* buffer = nullptr;
  };

  DctPlans() = default;
  ~DctPlans() {
    for (auto& [k, e] : entries_) {
      if (e.plan) fftw_destroy_plan(e.plan);
      if (e.buffer) fftw_free(e.buffer);
    }
  }

  std::mutex mutex_;
  std::map<Key, Entry> entries_;
};

}  // namespace detail

inline void dct2_inplace(Eigen::ArrayXXd& a) {
  detail::DctPlans::instance().execute(a, FFTW_REDFT10);
}

inline void idct2_inplace(Eigen::ArrayXXd& a) {
  detail::DctPlans::instance().execute(a, FFTW_REDFT01);
}

}  // namespace pls
